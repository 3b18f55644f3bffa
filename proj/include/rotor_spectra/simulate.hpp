#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <vector>

#include <Eigen/Sparse>

#include "rotor_spectra/arnoldi.hpp"
#include "rotor_spectra/linalg.hpp"
#include "rotor_spectra/model.hpp"
#include "rotor_spectra/parallel.hpp"

namespace rotor {

/// splitmix64 finaliser; used to derive independent per-path seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stream for one path: depends only on (seed, path), so results do not
/// depend on the thread count.
inline std::mt19937_64 path_engine(std::uint64_t seed, std::uint64_t path) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ (path + 1) * 0xd1b54a32d192ed03ULL));
}

/// Uniform double in [0, 1) from the top 53 bits. Spelled out because the
/// standard distributions are not reproducible across library vendors.
inline double unit_uniform(std::mt19937_64& g) { return static_cast<double>(g() >> 11) * 0x1.0p-53; }

struct TrajectoryBatch {
  std::uint64_t seed = 0;
  int n_paths = 0;
  int n_steps = 0;  // transitions per path; each path stores n_steps + 1 states
  int fibres = 0;
  std::vector<int> j;     // path-major, zero-based fibre
  std::vector<double> x;  // in [0, 1)

  std::size_t index(int path, int step) const {
    return static_cast<std::size_t>(path) * static_cast<std::size_t>(n_steps + 1) + static_cast<std::size_t>(step);
  }
  bool empty() const { return n_paths == 0 || n_steps == 0; }
};

struct InitialState {
  int j = 0;
  double x = 0;
};

/// Samples T(j, x) = (j + gamma, x + alpha_j + eta), gamma drawn from row j of
/// W_eps and eta uniform on [-delta, delta]. Initial states are uniform on
/// the cylinder unless a fixed start is given.
inline TrajectoryBatch simulate(const BandModel& model, const NoiseGenerator& gen, double eps, double delta,
                                int n_paths, int n_steps, std::uint64_t seed,
                                std::optional<InitialState> start = std::nullopt) {
  if (n_paths < 0 || n_steps < 0) throw Error(ErrorCode::InvalidArgument, "path and step counts must be nonnegative");
  if (!(delta >= 0.0)) throw Error(ErrorCode::InvalidArgument, "delta must be nonnegative");
  const int n = model.fibres();
  if (gen.dim() != n) throw Error(ErrorCode::InvalidArgument, "generator and model dimensions differ");
  if (start && (start->j < 0 || start->j >= n)) throw Error(ErrorCode::InvalidArgument, "initial fibre out of range");
  const MatrixR w = w_epsilon<double>(gen, eps);

  // Sparse cumulative rows of W_eps.
  std::vector<std::vector<int>> targets(static_cast<std::size_t>(n));
  std::vector<std::vector<double>> cdf(static_cast<std::size_t>(n));
  for (int r = 0; r < n; ++r) {
    double acc = 0;
    for (int c = 0; c < n; ++c) {
      if (w(r, c) > 0) {
        acc += w(r, c);
        targets[static_cast<std::size_t>(r)].push_back(c);
        cdf[static_cast<std::size_t>(r)].push_back(acc);
      }
    }
    for (double& v : cdf[static_cast<std::size_t>(r)]) v /= acc;
  }

  TrajectoryBatch b;
  b.seed = seed;
  b.n_paths = n_paths;
  b.n_steps = n_steps;
  b.fibres = n;
  const std::size_t total = static_cast<std::size_t>(n_paths) * static_cast<std::size_t>(n_steps + 1);
  b.j.resize(total);
  b.x.resize(total);
  const auto& alpha = model.alpha();
  parallel_for(static_cast<std::size_t>(n_paths), [&](std::size_t p) {
    auto g = path_engine(seed, p);
    int j;
    double x;
    if (start) {
      j = start->j;
      x = start->x - std::floor(start->x);
    } else {
      j = std::min(n - 1, static_cast<int>(unit_uniform(g) * n));
      x = unit_uniform(g);
    }
    std::size_t at = b.index(static_cast<int>(p), 0);
    b.j[at] = j;
    b.x[at] = x;
    for (int t = 0; t < n_steps; ++t) {
      const double u = unit_uniform(g);
      const auto& row = cdf[static_cast<std::size_t>(j)];
      const auto it = std::upper_bound(row.begin(), row.end(), u);
      const std::size_t pick = std::min<std::size_t>(static_cast<std::size_t>(it - row.begin()), row.size() - 1);
      const int next_j = targets[static_cast<std::size_t>(j)][pick];
      const double eta = delta > 0 ? delta * (2.0 * unit_uniform(g) - 1.0) : 0.0;
      x += alpha[static_cast<std::size_t>(j)] + eta;
      x -= std::floor(x);
      if (x >= 1.0) x = 0.0;
      j = next_j;
      ++at;
      b.j[at] = j;
      b.x[at] = x;
    }
  });
  return b;
}

enum class UlamMode { Analytic, Empirical };

/// Row-stochastic Ulam matrix on N * M cells; cell (j, a) has index j * M + a,
/// and bin a covers [a / M, (a + 1) / M).
struct UlamOperator {
  int fibres = 0;
  int bins = 0;
  UlamMode mode = UlamMode::Analytic;
  Eigen::SparseMatrix<double, Eigen::RowMajor> matrix;
  std::vector<int> self_loop_rows;  // empirical rows with no data

  int size() const { return fibres * bins; }
};

namespace detail {

/// Integral of the CDF of U[-delta, delta] from -infinity to y.
inline double uniform_cdf_integral(double y, double delta) {
  if (delta == 0.0) return std::max(y, 0.0);
  if (y <= -delta) return 0.0;
  if (y >= delta) return y;
  return (y + delta) * (y + delta) / (4.0 * delta);
}

/// c[d] = probability that a point uniform in bin 0, moved by shift + eta,
/// lands in bin d (mod 1). Closed-form overlap; no quadrature.
inline std::vector<double> circulant_row(double shift, double delta, int m) {
  const double h = 1.0 / m;
  const double s = shift - std::floor(shift);
  const auto g = [&](double y) { return uniform_cdf_integral(y, delta); };
  const long n_lo = static_cast<long>(std::floor(s - delta)) - 2;
  const long n_hi = static_cast<long>(std::ceil(s + h + delta)) + 2;
  std::vector<double> c(static_cast<std::size_t>(m), 0.0);
  for (int d = 0; d < m; ++d) {
    double acc = 0;
    for (long wrap = n_lo; wrap <= n_hi; ++wrap) {
      const double lo = d * h - static_cast<double>(wrap) - s;
      const double hi = (d + 1) * h - static_cast<double>(wrap) - s;
      acc += (g(hi) - g(hi - h)) - (g(lo) - g(lo - h));
    }
    c[static_cast<std::size_t>(d)] = std::max(0.0, acc / h);
  }
  double total = 0;
  for (double v : c) total += v;
  for (double& v : c) v /= total;
  return c;
}

}  // namespace detail

/// Exact bin-to-bin transition probabilities of the annealed kernel:
/// ((j, a) -> (j', b)) = W_eps[j][j'] * q_j(b - a). W_eps is symmetric, so
/// row and column conventions for the base walk coincide.
inline UlamOperator ulam_analytic(const BandModel& model, const NoiseGenerator& gen, double eps, double delta, int m) {
  if (m < 2) throw Error(ErrorCode::InvalidArgument, "Ulam discretisation needs M >= 2");
  if (!(delta >= 0.0)) throw Error(ErrorCode::InvalidArgument, "delta must be nonnegative");
  const int n = model.fibres();
  if (gen.dim() != n) throw Error(ErrorCode::InvalidArgument, "generator and model dimensions differ");
  const MatrixR w = w_epsilon<double>(gen, eps);

  std::vector<std::vector<double>> rows(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) rows[static_cast<std::size_t>(j)] = detail::circulant_row(model.alpha()[static_cast<std::size_t>(j)], delta, m);

  std::vector<Eigen::Triplet<double>> trip;
  for (int j = 0; j < n; ++j)
    for (int jp = 0; jp < n; ++jp) {
      if (w(j, jp) == 0.0) continue;
      const auto& c = rows[static_cast<std::size_t>(j)];
      for (int a = 0; a < m; ++a)
        for (int d = 0; d < m; ++d) {
          const double q = c[static_cast<std::size_t>(d)];
          if (q == 0.0) continue;
          trip.emplace_back(j * m + a, jp * m + (a + d) % m, w(j, jp) * q);
        }
    }
  UlamOperator op;
  op.fibres = n;
  op.bins = m;
  op.mode = UlamMode::Analytic;
  op.matrix.resize(n * m, n * m);
  op.matrix.setFromTriplets(trip.begin(), trip.end());
  op.matrix.makeCompressed();
  return op;
}

inline int ulam_bin(double x, int m) { return std::clamp(static_cast<int>(std::floor(x * m)), 0, m - 1); }

/// Counting estimator from consecutive states of every path. Rows without
/// data become flagged self-loops.
inline UlamOperator ulam_empirical(const TrajectoryBatch& batch, int m) {
  if (m < 2) throw Error(ErrorCode::InvalidArgument, "Ulam discretisation needs M >= 2");
  if (batch.empty()) throw Error(ErrorCode::InsufficientData, "trajectory batch is empty");
  const int size = batch.fibres * m;
  std::vector<std::vector<std::pair<int, double>>> counts(static_cast<std::size_t>(size));
  for (int p = 0; p < batch.n_paths; ++p)
    for (int t = 0; t < batch.n_steps; ++t) {
      const std::size_t i = batch.index(p, t);
      const int from = batch.j[i] * m + ulam_bin(batch.x[i], m);
      const int to = batch.j[i + 1] * m + ulam_bin(batch.x[i + 1], m);
      auto& row = counts[static_cast<std::size_t>(from)];
      auto it = std::find_if(row.begin(), row.end(), [&](const auto& e) { return e.first == to; });
      if (it == row.end()) row.emplace_back(to, 1.0);
      else it->second += 1.0;
    }
  UlamOperator op;
  op.fibres = batch.fibres;
  op.bins = m;
  op.mode = UlamMode::Empirical;
  std::vector<Eigen::Triplet<double>> trip;
  for (int r = 0; r < size; ++r) {
    const auto& row = counts[static_cast<std::size_t>(r)];
    double total = 0;
    for (const auto& e : row) total += e.second;
    if (total == 0) {
      op.self_loop_rows.push_back(r);
      trip.emplace_back(r, r, 1.0);
      continue;
    }
    for (const auto& e : row) trip.emplace_back(r, e.first, e.second / total);
  }
  if (static_cast<double>(op.self_loop_rows.size()) > 0.01 * size) {
    std::ostringstream msg;
    msg << op.self_loop_rows.size() << " of " << size << " cells were never visited";
    throw Error(ErrorCode::InsufficientData, msg.str());
  }
  op.matrix.resize(size, size);
  op.matrix.setFromTriplets(trip.begin(), trip.end());
  op.matrix.makeCompressed();
  return op;
}

/// Largest deviation of a row sum from 1.
inline double stochasticity_defect(const UlamOperator& op) {
  double worst = 0;
  for (int r = 0; r < op.matrix.outerSize(); ++r) {
    double s = 0;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(op.matrix, r); it; ++it) s += it.value();
    worst = std::max(worst, std::abs(s - 1.0));
  }
  return worst;
}

/// Total-variation distance between matching rows of two Ulam matrices.
inline std::vector<double> row_tv_distance(const UlamOperator& a, const UlamOperator& b) {
  if (a.size() != b.size()) throw Error(ErrorCode::InvalidArgument, "Ulam operators differ in size");
  const Eigen::SparseMatrix<double, Eigen::RowMajor> diff = a.matrix - b.matrix;
  std::vector<double> out(static_cast<std::size_t>(a.size()), 0.0);
  for (int r = 0; r < diff.outerSize(); ++r)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(diff, r); it; ++it)
      out[static_cast<std::size_t>(r)] += 0.5 * std::abs(it.value());
  return out;
}

struct Cycle {
  cplx eigenvalue;  // representative with positive imaginary part
  double magnitude = 0;
  double arg = 0;  // in (0, pi)
  double period_steps = 0;
  std::vector<double> band_masses;  // sums to 1
  int band = 0;                     // argmax of band_masses
  double residual = 0;
};

struct CycleReport {
  int size = 0;
  bool dense = false;
  int eigenvalues_computed = 0;
  std::vector<Cycle> cycles;
};

struct CycleOptions {
  int dense_limit = 4096;      // N * M at or below this uses a dense solve
  double merge_tol = 0.02;     // eigenvalues with args this close belong to one cycle
  double real_tol = 1e-9;      // |Im| below this counts as real
  int eigenvalue_count = 0;    // 0: automatic
};

/// Largest-magnitude nonreal eigenvalues of the density operator Q^T, one
/// per conjugate pair. Eigenvalues whose arguments agree within merge_tol
/// with a larger one describe the same rotation and are not reported again.
inline CycleReport detect_cycles(const UlamOperator& op, const BandModel& model, int top_m,
                                 const CycleOptions& opt = {}) {
  if (top_m < 1) throw Error(ErrorCode::InvalidArgument, "top_m must be at least 1");
  if (op.fibres != model.fibres()) throw Error(ErrorCode::InvalidArgument, "Ulam operator and model differ in N");
  const int n = op.size();
  CycleReport rep;
  rep.size = n;

  std::vector<cplx> values;
  std::vector<VectorC> vectors;
  std::vector<double> residuals;
  const Eigen::SparseMatrix<double, Eigen::RowMajor> qt_rows = op.matrix.transpose();
  if (n <= opt.dense_limit) {
    rep.dense = true;
    const MatrixR qt = MatrixR(qt_rows);
    Eigen::EigenSolver<MatrixR> es(qt, true);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "dense Ulam eigensolve failed");
    for (int i = 0; i < n; ++i) {
      VectorC v = es.eigenvectors().col(i);
      v /= v.norm();
      values.push_back(es.eigenvalues()(i));
      const VectorR re = qt * v.real();
      const VectorR im = qt * v.imag();
      residuals.push_back((re.cast<cplx>() + cplx(0, 1) * im.cast<cplx>() - es.eigenvalues()(i) * v).norm());
      vectors.push_back(std::move(v));
    }
  } else {
    const int want = opt.eigenvalue_count > 0 ? opt.eigenvalue_count
                                              : std::min(n - 2, std::max(64, 8 * top_m + 2 * model.fibres()));
    const auto apply = [&](const double* in, double* out) {
      Eigen::Map<const VectorR> x(in, n);
      Eigen::Map<VectorR> y(out, n);
      y.noalias() = qt_rows * x;
    };
    auto part = arnoldi_largest(n, apply, want);
    values = std::move(part.values);
    vectors = std::move(part.vectors);
    residuals = std::move(part.residuals);
  }
  rep.eigenvalues_computed = static_cast<int>(values.size());

  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < values.size(); ++i)
    if (values[i].imag() > opt.real_tol) order.push_back(i);
  if (order.empty()) throw Error(ErrorCode::NoComplexEigenvalues, "the computed spectrum is numerically real");
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(values[a]) > std::abs(values[b]); });

  for (std::size_t i : order) {
    if (static_cast<int>(rep.cycles.size()) == top_m) break;
    const double arg = std::arg(values[i]);
    const bool seen = std::any_of(rep.cycles.begin(), rep.cycles.end(),
                                  [&](const Cycle& c) { return std::abs(c.arg - arg) <= opt.merge_tol; });
    if (seen) continue;
    Cycle c;
    c.eigenvalue = values[i];
    c.magnitude = std::abs(values[i]);
    c.arg = arg;
    c.period_steps = two_pi<double> / arg;
    c.residual = residuals[i];
    c.band_masses.assign(static_cast<std::size_t>(model.bands()), 0.0);
    const VectorC& v = vectors[i];
    double total = 0;
    for (int j = 0; j < op.fibres; ++j) {
      const double mass = v.segment(static_cast<Eigen::Index>(j) * op.bins, op.bins).squaredNorm();
      c.band_masses[static_cast<std::size_t>(model.band_of(j))] += mass;
      total += mass;
    }
    for (double& mass : c.band_masses) mass /= total;
    c.band = static_cast<int>(std::max_element(c.band_masses.begin(), c.band_masses.end()) - c.band_masses.begin());
    rep.cycles.push_back(std::move(c));
  }
  return rep;
}

}  // namespace rotor

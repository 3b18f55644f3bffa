#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "rotor_spectra/linalg.hpp"
#include "rotor_spectra/model.hpp"
#include "rotor_spectra/parallel.hpp"

namespace rotor {

/// Matrix D_{k,alpha} W_eps acting on the k-th circular Fourier mode.
template <class Real = double>
struct FourierBlock {
  long k = 0;
  double eps = 0;
  CVector<Real> phases;  // diagonal of D_{k,alpha}
  CMatrix<Real> matrix;
};

/// Block for an arbitrary (not necessarily banded) speed vector alpha.
template <class Real = double>
FourierBlock<Real> assemble_fourier_block(const std::vector<double>& alpha, const NoiseGenerator& gen, long k,
                                          double eps) {
  if (gen.dim() != static_cast<int>(alpha.size())) {
    throw Error(ErrorCode::InvalidArgument, "generator and speed vector dimensions differ");
  }
  const int n = gen.dim();
  FourierBlock<Real> block;
  block.k = k;
  block.eps = eps;
  block.phases.resize(n);
  for (int j = 0; j < n; ++j) block.phases(j) = unit_phase<Real>(k, alpha[static_cast<std::size_t>(j)]);
  const RMatrix<Real> w = w_epsilon<Real>(gen, eps);
  block.matrix = block.phases.asDiagonal() * w.template cast<Complex<Real>>();
  return block;
}

template <class Real = double>
FourierBlock<Real> assemble_fourier_block(const BandModel& model, const NoiseGenerator& gen, long k, double eps) {
  return assemble_fourier_block<Real>(model.alpha(), gen, k, eps);
}

/// Radius 2 max_j |Wdot_jj| eps of the eigenvalue inclusion disks.
inline double gershgorin_bound(const NoiseGenerator& gen, double eps) {
  return 2.0 * gen.max_abs_diagonal() * eps;
}

/// sin(2 pi k delta) / (2 pi k delta), equal to 1 at k = 0 or delta = 0.
inline double delta_factor(long k, double delta) {
  const double x = two_pi<double> * static_cast<double>(k) * delta;
  if (x == 0.0) return 1.0;
  // sin(pi m) is exactly zero for integer m, which std::sin does not reproduce.
  const double half_turns = 2.0 * static_cast<double>(k) * delta;
  if (half_turns == std::round(half_turns)) return 0.0;
  return std::sin(x) / x;
}

template <class Real = double>
struct LabelledEigen {
  Complex<Real> lambda;
  Complex<Real> target;  // e^{-2 pi i k alpha_ell}, times the delta factor
  CVector<Real> vector;  // unit norm, largest entry real positive
  Real residual = 0;
  int band = 0;
  double dist_to_target = 0;
  bool converged = true;
};

template <class Real = double>
struct LabelledSpectrum {
  long k = 0;
  double eps = 0;
  double delta = 0;
  double factor = 1;         // delta factor applied to lambda and target
  double gersh_radius = 0;   // already scaled by factor
  double assignment_cost = 0;  // max |lambda - target| before scaling
  std::vector<LabelledEigen<Real>> entries;  // indexed by ell

  std::size_t size() const { return entries.size(); }
  const LabelledEigen<Real>& operator[](std::size_t ell) const { return entries[ell]; }
};

namespace detail {

/// Labels ell grouped by equal target phase; within a group the order of
/// labels is ascending.
template <class Real>
std::vector<std::vector<int>> target_groups(const CVector<Real>& targets) {
  std::vector<std::vector<int>> groups;
  std::vector<Complex<Real>> reps;
  for (int ell = 0; ell < targets.size(); ++ell) {
    std::size_t g = 0;
    for (; g < reps.size(); ++g)
      if (std::abs(reps[g] - targets(ell)) <= Real(1e-12)) break;
    if (g == reps.size()) {
      reps.push_back(targets(ell));
      groups.emplace_back();
    }
    groups[g].push_back(ell);
  }
  return groups;
}

}  // namespace detail

/// Assigns eigenpairs to targets e^{-2 pi i k alpha_ell} by minimum-cost
/// bipartite matching, then orders members of each target group by
/// descending |lambda|. Throws AmbiguousLabelling when the band disks are
/// disjoint but an eigenvalue falls outside its Gershgorin radius.
template <class Real = double>
LabelledSpectrum<Real> label_spectrum(const BandModel& model, const NoiseGenerator& gen,
                                      const FourierBlock<Real>& block, const EigenSolution<Real>& raw) {
  const int n = model.fibres();
  if (static_cast<int>(raw.pairs.size()) != n) {
    throw Error(ErrorCode::InvalidArgument, "eigen solution size does not match the model");
  }
  LabelledSpectrum<Real> out;
  out.k = block.k;
  out.eps = block.eps;
  out.gersh_radius = gershgorin_bound(gen, block.eps);

  MatrixR cost(n, n);
  for (int ell = 0; ell < n; ++ell)
    for (int i = 0; i < n; ++i)
      cost(ell, i) = static_cast<double>(std::abs(raw.pairs[static_cast<std::size_t>(i)].value - block.phases(ell)));
  const std::vector<int> assign = min_cost_assignment(cost);

  out.entries.resize(static_cast<std::size_t>(n));
  for (const auto& group : detail::target_groups(block.phases)) {
    std::vector<int> members;
    for (int ell : group) members.push_back(assign[static_cast<std::size_t>(ell)]);
    std::stable_sort(members.begin(), members.end(), [&](int a, int b) {
      return std::abs(raw.pairs[static_cast<std::size_t>(a)].value) >
             std::abs(raw.pairs[static_cast<std::size_t>(b)].value);
    });
    for (std::size_t m = 0; m < group.size(); ++m) {
      const int ell = group[m];
      const auto& p = raw.pairs[static_cast<std::size_t>(members[m])];
      auto& e = out.entries[static_cast<std::size_t>(ell)];
      e.lambda = p.value;
      e.target = block.phases(ell);
      e.vector = p.vector;
      e.residual = p.residual;
      e.converged = p.converged;
      e.band = model.band_of(ell);
      e.dist_to_target = static_cast<double>(std::abs(e.lambda - e.target));
      out.assignment_cost = std::max(out.assignment_cost, e.dist_to_target);
    }
  }

  // Disjoint band disks make the per-cluster eigenvalue count exact, so every
  // label must then sit inside its disk.
  const auto groups = detail::target_groups(block.phases);
  double min_sep = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a < groups.size(); ++a)
    for (std::size_t b = a + 1; b < groups.size(); ++b)
      min_sep = std::min(min_sep, static_cast<double>(std::abs(block.phases(groups[a][0]) - block.phases(groups[b][0]))));
  const bool disjoint = min_sep > 2.0 * out.gersh_radius;
  if (disjoint && out.assignment_cost > out.gersh_radius * (1.0 + 1e-9) + 1e-12) {
    std::ostringstream msg;
    msg << "k=" << block.k << " eps=" << block.eps << ": assignment cost " << out.assignment_cost
        << " exceeds Gershgorin radius " << out.gersh_radius;
    throw Error(ErrorCode::AmbiguousLabelling, msg.str());
  }
  return out;
}

/// Assemble, solve and label the k-th Fourier block at noise level eps.
template <class Real = double>
LabelledSpectrum<Real> labelled_spectrum(const BandModel& model, const NoiseGenerator& gen, long k, double eps,
                                         Real tol = Real(1e-11)) {
  const auto block = assemble_fourier_block<Real>(model, gen, k, eps);
  const auto raw = eig_dense_complex<Real>(block.matrix, tol);
  return label_spectrum<Real>(model, gen, block, raw);
}

/// Scales eigenvalues, targets and Gershgorin radius by the delta factor;
/// eigenvectors are left untouched.
template <class Real>
void apply_delta_factor(LabelledSpectrum<Real>& spec, double delta) {
  const double f = delta_factor(spec.k, delta);
  spec.delta = delta;
  spec.factor = f;
  spec.gersh_radius *= std::abs(f);
  for (auto& e : spec.entries) {
    e.lambda *= Real(f);
    e.target *= Real(f);
    e.dist_to_target = static_cast<double>(std::abs(e.lambda - e.target));
  }
}

/// Labelled spectra for every k in ks at (eps, delta), computed in parallel.
template <class Real = double>
std::vector<LabelledSpectrum<Real>> full_spectrum(const BandModel& model, const NoiseGenerator& gen,
                                                  const std::vector<long>& ks, double eps, double delta,
                                                  Real tol = Real(1e-11)) {
  std::vector<LabelledSpectrum<Real>> out(ks.size());
  parallel_for(ks.size(), [&](std::size_t i) {
    out[i] = labelled_spectrum<Real>(model, gen, ks[i], eps, tol);
    apply_delta_factor(out[i], delta);
  });
  return out;
}

/// Operator 2-norm of a dense complex matrix (largest singular value).
template <class Real>
Real spectral_norm(const CMatrix<Real>& a) {
  Eigen::JacobiSVD<CMatrix<Real>> svd(a);
  return svd.singularValues()(0);
}

}  // namespace rotor

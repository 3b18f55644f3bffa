#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "rotor_spectra/error.hpp"
#include "rotor_spectra/linalg.hpp"

namespace rotor {

// Indices are zero-based throughout the library: fibres j and labels ell run
// over 0..N-1 and bands s over 0..S-1. File writers add one.

/// Rotation speeds that are constant on S consecutive bands of fibres, with
/// pairwise distinct band speeds.
class BandModel {
 public:
  BandModel(std::vector<double> beta, std::vector<int> widths) : beta_(std::move(beta)), widths_(std::move(widths)) {
    if (beta_.empty() || beta_.size() != widths_.size()) {
      throw Error(ErrorCode::InvalidArgument, "beta and L must be nonempty and of equal length");
    }
    for (std::size_t s = 0; s < beta_.size(); ++s) {
      if (!std::isfinite(beta_[s])) throw Error(ErrorCode::InvalidArgument, "beta must be finite");
      if (widths_[s] < 1) {
        throw Error(ErrorCode::EmptyBand, "band " + std::to_string(s + 1) + " has width " + std::to_string(widths_[s]));
      }
      for (std::size_t r = 0; r < s; ++r) {
        if (beta_[r] == beta_[s]) {
          throw Error(ErrorCode::DuplicateSpeed,
                      "bands " + std::to_string(r + 1) + " and " + std::to_string(s + 1) + " share a speed");
        }
      }
    }
    offsets_.assign(1, 0);
    for (int w : widths_) offsets_.push_back(offsets_.back() + w);
    alpha_.reserve(static_cast<std::size_t>(offsets_.back()));
    band_of_.reserve(static_cast<std::size_t>(offsets_.back()));
    for (std::size_t s = 0; s < beta_.size(); ++s) {
      for (int j = 0; j < widths_[s]; ++j) {
        alpha_.push_back(beta_[s]);
        band_of_.push_back(static_cast<int>(s));
      }
    }
  }

  int bands() const { return static_cast<int>(beta_.size()); }
  int fibres() const { return offsets_.back(); }
  const std::vector<double>& beta() const { return beta_; }
  const std::vector<int>& widths() const { return widths_; }
  /// N_0 = 0 < N_1 < ... < N_S = N.
  const std::vector<int>& offsets() const { return offsets_; }
  const std::vector<double>& alpha() const { return alpha_; }
  int band_of(int j) const { return band_of_.at(static_cast<std::size_t>(j)); }
  int band_begin(int s) const { return offsets_.at(static_cast<std::size_t>(s)); }
  int band_end(int s) const { return offsets_.at(static_cast<std::size_t>(s) + 1); }
  int width(int s) const { return widths_.at(static_cast<std::size_t>(s)); }

  friend bool operator==(const BandModel& a, const BandModel& b) {
    return a.beta_ == b.beta_ && a.widths_ == b.widths_;
  }

 private:
  std::vector<double> beta_;
  std::vector<int> widths_;
  std::vector<int> offsets_;
  std::vector<double> alpha_;
  std::vector<int> band_of_;
};

inline BandModel build_band_model(std::vector<double> beta, std::vector<int> widths) {
  return BandModel(std::move(beta), std::move(widths));
}

/// Groups maximal runs of equal speeds into bands. Speeds are compared exactly.
inline BandModel detect_bands(const std::vector<double>& alpha) {
  if (alpha.empty()) throw Error(ErrorCode::DimensionTooSmall, "alpha must have at least one entry");
  std::vector<double> beta;
  std::vector<int> widths;
  for (double a : alpha) {
    if (!beta.empty() && beta.back() == a) {
      ++widths.back();
      continue;
    }
    if (std::find(beta.begin(), beta.end(), a) != beta.end()) {
      std::ostringstream msg;
      msg << "speed " << a << " recurs in non-adjacent runs";
      throw Error(ErrorCode::NonBandable, msg.str());
    }
    beta.push_back(a);
    widths.push_back(1);
  }
  return BandModel(std::move(beta), std::move(widths));
}

/// The symmetric generator Wdot of the noise family W_eps = Id + eps * Wdot.
class NoiseGenerator {
 public:
  explicit NoiseGenerator(MatrixR wdot) : wdot_(std::move(wdot)) {
    if (wdot_.rows() != wdot_.cols() || wdot_.rows() < 1) {
      throw Error(ErrorCode::InvalidArgument, "generator must be a nonempty square matrix");
    }
    if (!wdot_.allFinite()) throw Error(ErrorCode::InvalidArgument, "generator has non-finite entries");
  }

  int dim() const { return static_cast<int>(wdot_.rows()); }
  const MatrixR& matrix() const { return wdot_; }
  double max_abs_diagonal() const { return wdot_.diagonal().cwiseAbs().maxCoeff(); }

  /// Diagonal block of rows/columns [begin, end).
  MatrixR block(int begin, int end) const { return wdot_.block(begin, begin, end - begin, end - begin); }

 private:
  MatrixR wdot_;
};

/// Central-difference Neumann Laplacian: diagonal (-1/2, -1, ..., -1, -1/2),
/// off-diagonals 1/2.
inline NoiseGenerator laplacian_generator(int n) {
  if (n < 2) throw Error(ErrorCode::DimensionTooSmall, "laplacian generator needs N >= 2");
  MatrixR w = MatrixR::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    w(j, j) = -1.0;
    if (j + 1 < n) {
      w(j, j + 1) = 0.5;
      w(j + 1, j) = 0.5;
    }
  }
  w(0, 0) = -0.5;
  w(n - 1, n - 1) = -0.5;
  return NoiseGenerator(std::move(w));
}

inline bool is_laplacian(const NoiseGenerator& gen) {
  if (gen.dim() < 2) return false;
  return gen.matrix() == laplacian_generator(gen.dim()).matrix();
}

struct AdmissibilityReport {
  double row_sum_defect = 0;        // max |row sum|
  double symmetry_defect = 0;       // max |W - W^T|
  double min_offdiag = 0;           // most negative off-diagonal entry (0 if none negative)
  double min_eigen_gap_full = 0;    // smallest gap in spec(Wdot)
  double min_eigen_gap_blocks = 0;  // smallest gap across all diagonal band blocks
  double eps_max = 0;               // largest eps with W_eps entrywise nonnegative
  double tol = 0;
  bool item1 = false;  // symmetric, nonnegative off-diagonals, zero row sums
  bool item2 = false;  // N distinct eigenvalues
  bool item3 = false;  // every band block has distinct eigenvalues

  bool pass() const { return item1 && item2 && item3; }
};

namespace detail {

inline double min_gap(const VectorR& sorted) {
  double gap = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 1; i < sorted.size(); ++i) gap = std::min(gap, sorted(i) - sorted(i - 1));
  return gap;
}

/// Relative distinctness threshold: tol times the spectral radius (absolute
/// tol when the spectrum is zero).
inline double gap_threshold(const VectorR& values, double tol) {
  const double radius = values.size() ? values.cwiseAbs().maxCoeff() : 0.0;
  return tol * std::max(radius, 1.0);
}

}  // namespace detail

/// Checks the three admissibility conditions of a generator for a band layout.
/// Failures are reported, never thrown.
inline AdmissibilityReport validate_admissibility(const NoiseGenerator& gen, const BandModel& model,
                                                  double tol = 1e-9) {
  if (gen.dim() != model.fibres()) {
    throw Error(ErrorCode::InvalidArgument, "generator dimension " + std::to_string(gen.dim()) +
                                                " does not match model N=" + std::to_string(model.fibres()));
  }
  const MatrixR& w = gen.matrix();
  const int n = gen.dim();
  AdmissibilityReport r;
  r.tol = tol;
  r.row_sum_defect = w.rowwise().sum().cwiseAbs().maxCoeff();
  r.symmetry_defect = (w - w.transpose()).cwiseAbs().maxCoeff();
  double min_off = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) min_off = std::min(min_off, w(i, j));
  r.min_offdiag = min_off;
  const double scale = std::max(1.0, w.cwiseAbs().maxCoeff());
  r.item1 = r.row_sum_defect <= tol * scale && r.symmetry_defect <= tol * scale && min_off >= 0.0;

  // Symmetrised for the spectral checks so an asymmetric input still yields numbers.
  const MatrixR sym = 0.5 * (w + w.transpose());
  const auto full = symmetric_eig<double>(sym);
  r.min_eigen_gap_full = n > 1 ? detail::min_gap(full.values) : std::numeric_limits<double>::infinity();
  r.item2 = r.min_eigen_gap_full > detail::gap_threshold(full.values, tol);

  r.item3 = true;
  r.min_eigen_gap_blocks = std::numeric_limits<double>::infinity();
  for (int s = 0; s < model.bands(); ++s) {
    const MatrixR blk = sym.block(model.band_begin(s), model.band_begin(s), model.width(s), model.width(s));
    const auto e = symmetric_eig<double>(blk);
    const double g = detail::min_gap(e.values);
    r.min_eigen_gap_blocks = std::min(r.min_eigen_gap_blocks, g);
    if (model.width(s) > 1 && !(g > detail::gap_threshold(e.values, tol))) r.item3 = false;
  }

  const double dmax = gen.max_abs_diagonal();
  r.eps_max = dmax > 0 ? 1.0 / dmax : std::numeric_limits<double>::infinity();
  return r;
}

/// W_eps = Id + eps * Wdot, required to be entrywise in [0, 1].
template <class Real = double>
RMatrix<Real> w_epsilon(const NoiseGenerator& gen, double eps) {
  if (!(eps >= 0.0) || !std::isfinite(eps)) {
    throw Error(ErrorCode::EpsOutOfRange, "eps must be finite and nonnegative");
  }
  const int n = gen.dim();
  RMatrix<Real> w = RMatrix<Real>::Identity(n, n) + Real(eps) * gen.matrix().cast<Real>();
  const Real slack = Real(64) * std::numeric_limits<double>::epsilon();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (w(i, j) < -slack || w(i, j) > Real(1) + slack) {
        std::ostringstream msg;
        msg << "W_eps(" << i + 1 << "," << j + 1 << ") = " << static_cast<double>(w(i, j)) << " at eps = " << eps;
        throw Error(ErrorCode::EpsOutOfRange, msg.str());
      }
  return w;
}

}  // namespace rotor

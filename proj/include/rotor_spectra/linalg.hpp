#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rotor_spectra/error.hpp"

namespace rotor {

template <class Real>
using Complex = std::complex<Real>;
template <class Real>
using RMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
template <class Real>
using CMatrix = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <class Real>
using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
template <class Real>
using CVector = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, 1>;

using cplx = Complex<double>;
using MatrixR = RMatrix<double>;
using MatrixC = CMatrix<double>;
using VectorR = RVector<double>;
using VectorC = CVector<double>;

template <class Real>
constexpr Real two_pi = Real(2) * std::numbers::pi_v<Real>;

/// e^{-2 pi i k a}, with k*a reduced mod 1 before the exponential so that large
/// Fourier indices do not lose phase accuracy.
template <class Real = double>
Complex<Real> unit_phase(long k, double a) {
  const Real t = Real(k) * Real(a);
  const Real frac = t - std::round(t);
  return std::polar(Real(1), -two_pi<Real> * frac);
}

/// <u, v> = sum_j u_j conj(v_j): linear in the first slot.
template <class Derived1, class Derived2>
auto inner(const Eigen::MatrixBase<Derived1>& u, const Eigen::MatrixBase<Derived2>& v) {
  return v.dot(u);
}

/// min_theta || u/|u| - e^{i theta} v/|v| ||, evaluated as a vector norm after
/// optimal phase alignment (no 2 - 2|<u,v>| cancellation).
template <class Real>
Real projective_distance(const CVector<Real>& u, const CVector<Real>& v) {
  const Real nu = u.norm();
  const Real nv = v.norm();
  if (nu == Real(0) || nv == Real(0)) {
    throw Error(ErrorCode::ZeroVector, "projective_distance needs nonzero vectors");
  }
  const Complex<Real> c = inner(u, v);
  Complex<Real> phase(1);
  if (std::abs(c) > Real(0)) phase = c / std::abs(c);
  return (u / nu - phase * (v / nv)).norm();
}

/// Operator-norm distance between the rank-one orthogonal projectors onto
/// span{a} and span{b}.
template <class Real>
Real projector_gap(const CVector<Real>& a, const CVector<Real>& b) {
  const Real na = a.norm();
  const Real nb = b.norm();
  if (na == Real(0) || nb == Real(0)) {
    throw Error(ErrorCode::ZeroVector, "projector_gap needs nonzero vectors");
  }
  // sqrt(1 - |<a,b>|^2) = |sin angle|, computed from the orthogonal residual.
  const CVector<Real> ua = a / na;
  const CVector<Real> ub = b / nb;
  const CVector<Real> perp = ub - inner(ub, ua) * ua;
  return std::min(Real(1), perp.norm());
}

/// Multiply by a unit scalar so that the entry of largest magnitude is real
/// and positive (first such entry on ties).
template <class Real>
void fix_phase(CVector<Real>& v) {
  Eigen::Index arg = 0;
  Real best = Real(-1);
  for (Eigen::Index j = 0; j < v.size(); ++j) {
    const Real m = std::abs(v(j));
    if (m > best * (Real(1) + Real(64) * std::numeric_limits<Real>::epsilon())) {
      best = m;
      arg = j;
    }
  }
  if (best > Real(0)) v *= std::conj(v(arg)) / best;
}

template <class Real>
struct EigenPair {
  Complex<Real> value;
  CVector<Real> vector;  // unit norm, phase fixed
  Real residual = 0;     // ||A v - value v||
  bool converged = true;
};

template <class Real>
struct EigenSolution {
  std::vector<EigenPair<Real>> pairs;
  Real matrix_norm = 0;  // Frobenius norm used for the relative residual

  bool all_converged() const {
    return std::all_of(pairs.begin(), pairs.end(), [](const auto& p) { return p.converged; });
  }
};

namespace detail {

template <class Real>
void refine_by_inverse_iteration(const CMatrix<Real>& a, EigenPair<Real>& pair, Real target,
                                 int sweeps) {
  const Real scale = std::max(a.norm(), std::numeric_limits<Real>::min());
  for (int it = 0; it < sweeps && pair.residual > target; ++it) {
    CMatrix<Real> shifted = a;
    const Complex<Real> shift =
        pair.value + Complex<Real>(scale * Real(16) * std::numeric_limits<Real>::epsilon());
    shifted.diagonal().array() -= shift;
    CVector<Real> y = shifted.partialPivLu().solve(pair.vector);
    const Real ny = y.norm();
    if (!std::isfinite(ny) || ny == Real(0)) break;
    y /= ny;
    const CVector<Real> ay = a * y;
    pair.value = y.dot(ay);  // Rayleigh quotient (y unit)
    pair.vector = y;
    pair.residual = (ay - pair.value * y).norm();
  }
}

}  // namespace detail

/// Full eigendecomposition of a dense complex matrix. Every pair satisfies
/// ||A v - lambda v|| <= tol * ||A||_F or carries converged = false.
template <class Real>
EigenSolution<Real> eig_dense_complex(const CMatrix<Real>& a, Real tol = Real(1e-11)) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    throw Error(ErrorCode::InvalidArgument, "eig_dense_complex needs a nonempty square matrix");
  }
  if (!a.allFinite()) {
    throw Error(ErrorCode::InvalidArgument, "eig_dense_complex: matrix has non-finite entries");
  }
  EigenSolution<Real> out;
  out.matrix_norm = a.norm();
  const Real target = tol * std::max(out.matrix_norm, std::numeric_limits<Real>::min());

  Eigen::ComplexEigenSolver<CMatrix<Real>> solver;
  solver.setMaxIterations(static_cast<Eigen::Index>(100));
  solver.compute(a, true);
  const bool ok = solver.info() == Eigen::Success;

  const auto n = a.rows();
  out.pairs.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    EigenPair<Real> p;
    p.value = solver.eigenvalues()(i);
    p.vector = solver.eigenvectors().col(i);
    const Real nv = p.vector.norm();
    if (nv > Real(0) && std::isfinite(nv)) p.vector /= nv;
    p.residual = (a * p.vector - p.value * p.vector).norm();
    if (!(p.residual <= target)) detail::refine_by_inverse_iteration(a, p, target, 3);
    fix_phase(p.vector);
    p.converged = ok && p.residual <= target;
    out.pairs.push_back(std::move(p));
  }
  return out;
}

template <class Real>
struct SymmetricEigen {
  RVector<Real> values;   // ascending
  RMatrix<Real> vectors;  // orthonormal columns
};

template <class Real>
SymmetricEigen<Real> symmetric_eig(const RMatrix<Real>& a) {
  Eigen::SelfAdjointEigenSolver<RMatrix<Real>> solver(a);
  if (solver.info() != Eigen::Success) {
    throw Error(ErrorCode::NoConvergence, "symmetric eigensolve failed");
  }
  return {solver.eigenvalues(), solver.eigenvectors()};
}

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method,
/// O(n^3)). Returns assignment[row] = column.
inline std::vector<int> min_cost_assignment(const MatrixR& cost) {
  const int n = static_cast<int>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> assignment(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (p[j] > 0) assignment[p[j] - 1] = j - 1;
  }
  return assignment;
}

/// Least-squares slope of log(y) against log(x). Zero or negative y values
/// are skipped; returns NaN when fewer than two usable points remain.
inline double loglog_slope(std::span<const double> x, std::span<const double> y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < std::min(x.size(), y.size()); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) continue;
    const double lx = std::log(x[i]);
    const double ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  const double den = n * sxx - sx * sx;
  if (den == 0) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / den;
}

/// Circular distance between two angles, in [0, pi].
inline double angle_distance(double a, double b) {
  double d = std::fmod(std::abs(a - b), two_pi<double>);
  return d > std::numbers::pi ? two_pi<double> - d : d;
}

}  // namespace rotor

#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "rotor_spectra/linalg.hpp"
#include "rotor_spectra/model.hpp"
#include "rotor_spectra/zero_noise.hpp"

namespace rotor {

// Closed-form eigendata of the zero-noise limit for the Laplacian generator.
// Cutting the tridiagonal stencil at band edges leaves three kinds of blocks
// (n = block width, m = 1..n the local label, j = 1..n the local fibre):
//
//   first    Neumann/Dirichlet  theta = (2m-1) pi / (2n+1)  v_j = cos(theta (j - 1/2))
//   interior Dirichlet/Dirichlet theta = m pi / (n+1)       v_j = sin(theta j)
//   last     Dirichlet/Neumann  theta = (2m-1) pi / (2n+1)  v_j = sin(theta j)
//
// with block eigenvalue -1 + cos(theta) in every case. The whole generator
// (S = 1, or k = 0) is solved numerically instead.

enum class BlockCase { First, Interior, Last, NumericFallback };

inline std::string to_string(BlockCase c) {
  switch (c) {
    case BlockCase::First: return "first";
    case BlockCase::Interior: return "interior";
    case BlockCase::Last: return "last";
    case BlockCase::NumericFallback: return "numeric_fallback";
  }
  return "unknown";
}

struct ClosedFormEigen {
  int ell = 0;
  int band = 0;
  BlockCase block_case = BlockCase::Interior;
  cplx lambda_hat;
  double rho = 0;  // -1 + cos(theta)
  VectorR vector;  // length N, unit norm, zero off the band
};

namespace detail {

inline double block_theta(BlockCase c, int n, int m) {
  const double pi = std::numbers::pi;
  if (c == BlockCase::Interior) return m * pi / (n + 1);
  return (2 * m - 1) * pi / (2 * n + 1);
}

inline VectorR block_vector(BlockCase c, int n, int m) {
  const double theta = block_theta(c, n, m);
  VectorR v(n);
  for (int j = 1; j <= n; ++j) {
    v(j - 1) = c == BlockCase::First ? std::cos(theta * (j - 0.5)) : std::sin(theta * j);
  }
  v /= v.norm();
  for (int j = 0; j < n; ++j) {
    if (std::abs(v(j)) > 1e-12) {
      if (v(j) < 0) v = -v;
      break;
    }
  }
  return v;
}

}  // namespace detail

/// Closed-form (lambda_hat, f) for every label ell, ordered like
/// limit_eigenbasis (descending rho within each band).
inline std::vector<ClosedFormEigen> closed_form_eigendata(const BandModel& model, const NoiseGenerator& gen, long k) {
  if (gen.dim() != model.fibres()) throw Error(ErrorCode::InvalidArgument, "generator and model dimensions differ");
  if (!is_laplacian(gen)) throw Error(ErrorCode::NotLaplacian, "closed forms exist only for the Laplacian generator");
  const int n_total = model.fibres();
  const int S = model.bands();
  std::vector<ClosedFormEigen> out(static_cast<std::size_t>(n_total));

  if (S == 1 || k == 0) {
    const LimitBasis basis = limit_basis(model, gen, k);
    for (int ell = 0; ell < n_total; ++ell) {
      auto& e = out[static_cast<std::size_t>(ell)];
      e.ell = ell;
      e.band = model.band_of(ell);
      e.block_case = BlockCase::NumericFallback;
      e.lambda_hat = basis[static_cast<std::size_t>(ell)].lambda_hat;
      e.rho = basis[static_cast<std::size_t>(ell)].rho;
      e.vector = basis[static_cast<std::size_t>(ell)].f.real();
    }
    return out;
  }

  for (int s = 0; s < S; ++s) {
    const BlockCase c = s == 0 ? BlockCase::First : (s == S - 1 ? BlockCase::Last : BlockCase::Interior);
    const int n = model.width(s);
    const int begin = model.band_begin(s);
    const cplx phase = unit_phase(k, model.beta()[static_cast<std::size_t>(s)]);
    for (int m = 1; m <= n; ++m) {
      const int ell = begin + m - 1;
      auto& e = out[static_cast<std::size_t>(ell)];
      e.ell = ell;
      e.band = s;
      e.block_case = c;
      e.rho = -1.0 + std::cos(detail::block_theta(c, n, m));
      e.lambda_hat = phase * e.rho;
      e.vector = VectorR::Zero(n_total);
      e.vector.segment(begin, n) = detail::block_vector(c, n, m);
    }
  }
  return out;
}

struct OracleRow {
  long k = 0;
  int ell = 0;
  int band = 0;
  BlockCase block_case = BlockCase::Interior;
  cplx lhat_closed;
  cplx lhat_numeric;
  double abs_diff = 0;
  double vec_proj_dist = 0;
  double residual = 0;  // ||P_hat v - lambda_hat v|| for the closed-form pair
};

struct OracleReport {
  long k = 0;
  double tol = 0;
  double max_abs_diff = 0;
  double max_vec_dist = 0;
  double max_residual = 0;
  bool fallback = false;
  std::vector<OracleRow> rows;
};

/// Compares the closed forms against the numerically solved limit basis.
/// Throws MismatchBeyondTolerance when any eigenvalue or eigenvector differs
/// by more than tol (vec_tol for eigenvectors, default tol).
inline OracleReport oracle_crosscheck(const BandModel& model, const NoiseGenerator& gen, long k, double tol = 1e-10,
                                      double vec_tol = -1) {
  if (vec_tol < 0) vec_tol = tol;
  const auto closed = closed_form_eigendata(model, gen, k);
  const LimitMatrix lim = assemble_limit_matrix(model, gen, k);
  const LimitBasis basis = limit_eigenbasis(model, lim);

  OracleReport rep;
  rep.k = k;
  rep.tol = tol;
  for (std::size_t ell = 0; ell < closed.size(); ++ell) {
    const auto& c = closed[ell];
    const VectorC v = c.vector.cast<cplx>();
    OracleRow row;
    row.k = k;
    row.ell = static_cast<int>(ell);
    row.band = c.band;
    row.block_case = c.block_case;
    row.lhat_closed = c.lambda_hat;
    row.lhat_numeric = basis[ell].lambda_hat;
    row.abs_diff = std::abs(c.lambda_hat - basis[ell].lambda_hat);
    row.vec_proj_dist = projective_distance<double>(v, basis[ell].f);
    row.residual = (lim.phat * v - c.lambda_hat * v).norm();
    rep.fallback = rep.fallback || c.block_case == BlockCase::NumericFallback;
    rep.max_abs_diff = std::max(rep.max_abs_diff, row.abs_diff);
    rep.max_vec_dist = std::max(rep.max_vec_dist, row.vec_proj_dist);
    rep.max_residual = std::max(rep.max_residual, row.residual);
    rep.rows.push_back(row);
  }
  if (rep.max_abs_diff > tol || rep.max_vec_dist > vec_tol) {
    std::ostringstream msg;
    msg << "k=" << k << ": closed form differs from the numerical limit basis (eigenvalue " << rep.max_abs_diff
        << ", eigenvector " << rep.max_vec_dist << ")";
    throw Error(ErrorCode::MismatchBeyondTolerance, msg.str());
  }
  return rep;
}

}  // namespace rotor

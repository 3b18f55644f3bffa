#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "rotor_spectra/linalg.hpp"
#include "rotor_spectra/model.hpp"
#include "rotor_spectra/spectra.hpp"
#include "rotor_spectra/zero_noise.hpp"

namespace rotor {

// Zero-noise expansion of the eigendata of D_{k,beta,L}(Id + eps Wdot):
//
//   lambda_eps = phi_s + eps lambda_hat + eps^2 lambda_hathat + o(eps^2)
//   [f_eps]    = [f + eps f_hat + o(eps)]
//
// with phi_s = e^{-2 pi i k beta_s} the phase of the band containing ell,
// D = D_{k,beta,L}, pi_s coordinate masking onto band s and
// <u, v> = sum u_j conj(v_j):
//
//   lambda_hathat = sum_{s' != s} <pi_s' D Wdot f, pi_s' Wdot conj(D) f> / (phi_s - phi_s')
//   f_hat = sum_{s' != s} sum_{r in B_s, r != ell}
//             <pi_s' D Wdot f, pi_s' Wdot conj(D) f_r> / ((lhat - lhat_r)(phi_s - phi_s')) f_r
//         + sum_{s' != s} sum_{r in B_s'} <D Wdot f, f_r> / (phi_s - phi_s') f_r
//
// lambda_hathat is the Taylor coefficient, i.e. half of d^2 lambda / d eps^2.

struct ResponseEntry {
  cplx lambda_hat;
  cplx lambda_hathat;
  VectorC f;
  VectorC f_hat;
  int band = 0;
};

struct ResponseData {
  long k = 0;
  bool exact = false;  // S = 1 or k = 0: the first-order expansion is exact
  std::vector<ResponseEntry> entries;

  std::size_t size() const { return entries.size(); }
  const ResponseEntry& operator[](std::size_t ell) const { return entries[ell]; }
};

namespace detail {

inline VectorC mask(const VectorC& v, int begin, int end) {
  VectorC out = VectorC::Zero(v.size());
  out.segment(begin, end - begin) = v.segment(begin, end - begin);
  return out;
}

struct ResponseContext {
  const BandModel& model;
  const MatrixR& wdot;
  VectorC d;  // diagonal of D_{k,beta,L}
  std::vector<cplx> phi;
};

inline ResponseContext make_context(const BandModel& model, const NoiseGenerator& gen, long k) {
  ResponseContext ctx{model, gen.matrix(), VectorC(model.fibres()), {}};
  for (int s = 0; s < model.bands(); ++s) ctx.phi.push_back(unit_phase(k, model.beta()[static_cast<std::size_t>(s)]));
  for (int j = 0; j < model.fibres(); ++j) ctx.d(j) = ctx.phi[static_cast<std::size_t>(model.band_of(j))];
  return ctx;
}

inline cplx second_order(const ResponseContext& ctx, const LimitBasis& basis, int ell) {
  const auto& fl = basis[static_cast<std::size_t>(ell)].f;
  const int s = basis[static_cast<std::size_t>(ell)].band;
  const VectorC dwf = ctx.d.asDiagonal() * (ctx.wdot.cast<cplx>() * fl);
  const VectorC wdf = ctx.wdot.cast<cplx>() * (ctx.d.conjugate().asDiagonal() * fl);
  cplx sum = 0;
  for (int sp = 0; sp < ctx.model.bands(); ++sp) {
    if (sp == s) continue;
    const int b = ctx.model.band_begin(sp);
    const int e = ctx.model.band_end(sp);
    sum += inner(mask(dwf, b, e), mask(wdf, b, e)) /
           (ctx.phi[static_cast<std::size_t>(s)] - ctx.phi[static_cast<std::size_t>(sp)]);
  }
  return sum;
}

inline VectorC first_order_vector(const ResponseContext& ctx, const LimitBasis& basis, int ell, double tol) {
  const auto& le = basis[static_cast<std::size_t>(ell)];
  const int s = le.band;
  const int n = ctx.model.fibres();
  const MatrixC w = ctx.wdot.cast<cplx>();
  const VectorC dwf = ctx.d.asDiagonal() * (w * le.f);
  VectorC out = VectorC::Zero(n);
  for (int sp = 0; sp < ctx.model.bands(); ++sp) {
    if (sp == s) continue;
    const cplx gap = ctx.phi[static_cast<std::size_t>(s)] - ctx.phi[static_cast<std::size_t>(sp)];
    const int b = ctx.model.band_begin(sp);
    const int e = ctx.model.band_end(sp);
    const VectorC left = mask(dwf, b, e);
    // Within-band part: second-order coupling through band s'.
    for (int r = ctx.model.band_begin(s); r < ctx.model.band_end(s); ++r) {
      if (r == ell) continue;
      const auto& lr = basis[static_cast<std::size_t>(r)];
      const cplx split = le.lambda_hat - lr.lambda_hat;
      if (std::abs(split) <= tol) {
        throw Error(ErrorCode::DegenerateFirstOrder, "first-order eigenvalues of labels " + std::to_string(ell + 1) +
                                                         " and " + std::to_string(r + 1) + " coincide");
      }
      const VectorC right = mask(w * (ctx.d.conjugate().asDiagonal() * lr.f), b, e);
      out += inner(left, right) / (split * gap) * lr.f;
    }
    // Cross-band part.
    for (int r = b; r < e; ++r) {
      const auto& fr = basis[static_cast<std::size_t>(r)].f;
      out += inner(dwf, fr) / gap * fr;
    }
  }
  return out;
}

}  // namespace detail

/// Eps^2 coefficient of the eigenvalue expansion for label ell.
inline cplx second_order_eigenvalue(const BandModel& model, const NoiseGenerator& gen, const LimitBasis& basis,
                                    int ell) {
  if (basis.whole_generator) return {0.0, 0.0};
  return detail::second_order(detail::make_context(model, gen, basis.k), basis, ell);
}

inline cplx second_order_eigenvalue(const BandModel& model, const NoiseGenerator& gen, long k, int ell) {
  return second_order_eigenvalue(model, gen, limit_basis(model, gen, k), ell);
}

/// First-order eigenvector response f_hat for label ell, orthogonal to f.
inline VectorC eigenvector_response(const BandModel& model, const NoiseGenerator& gen, const LimitBasis& basis,
                                    int ell, double tol = 1e-12) {
  if (basis.whole_generator) return VectorC::Zero(model.fibres());
  return detail::first_order_vector(detail::make_context(model, gen, basis.k), basis, ell, tol);
}

inline VectorC eigenvector_response(const BandModel& model, const NoiseGenerator& gen, long k, int ell,
                                    double tol = 1e-12) {
  return eigenvector_response(model, gen, limit_basis(model, gen, k), ell, tol);
}

/// lambda_hat, lambda_hathat and f_hat for every label at Fourier index k.
inline ResponseData compute_response(const BandModel& model, const NoiseGenerator& gen, long k) {
  const LimitBasis basis = limit_basis(model, gen, k);
  ResponseData out;
  out.k = k;
  out.exact = basis.whole_generator;
  const auto ctx = detail::make_context(model, gen, k);
  for (int ell = 0; ell < model.fibres(); ++ell) {
    const auto& le = basis[static_cast<std::size_t>(ell)];
    ResponseEntry e;
    e.lambda_hat = le.lambda_hat;
    e.f = le.f;
    e.band = le.band;
    if (out.exact) {
      e.lambda_hathat = 0.0;
      e.f_hat = VectorC::Zero(model.fibres());
    } else {
      e.lambda_hathat = detail::second_order(ctx, basis, ell);
      e.f_hat = detail::first_order_vector(ctx, basis, ell, 1e-12);
    }
    out.entries.push_back(std::move(e));
  }
  return out;
}

/// First-order expansion f f* + eps (f_hat f* + f f_hat*) of the eigenprojection.
inline MatrixC projection_expansion(const VectorC& f, const VectorC& f_hat, double eps, double tol = 1e-10) {
  if (std::abs(inner(f, f_hat)) > tol * std::max(1.0, f_hat.norm())) {
    throw Error(ErrorCode::NonOrthogonal, "f_hat is not orthogonal to f");
  }
  return f * f.adjoint() + eps * (f_hat * f.adjoint() + f * f_hat.adjoint());
}

/// Orthogonal projector onto span{v}.
inline MatrixC rank_one_projector(const VectorC& v) {
  const VectorC u = v / v.norm();
  return u * u.adjoint();
}

struct OrderCheck {
  long k = 0;
  int ell = 0;
  std::vector<double> eps_grid;
  std::vector<double> residual_0;  // |lambda - phi|
  std::vector<double> residual_1;  // |lambda - phi - eps lhat|
  std::vector<double> residual_2;  // |lambda - phi - eps lhat - eps^2 lhathat|
  std::vector<double> vec_residual;  // projective distance of f_eps from f + eps f_hat
  double slope_0 = 0, slope_1 = 0, slope_2 = 0, slope_vec = 0;
};

/// Residual ladders of the expansion along a decreasing eps grid. Eigendata
/// at each eps are computed in extended precision so that the eps^3 remainder
/// stays above rounding at eps ~ 1e-5.
inline OrderCheck order_check(const BandModel& model, const NoiseGenerator& gen, long k, int ell,
                              const std::vector<double>& eps_grid) {
  if (eps_grid.size() < 4) throw Error(ErrorCode::InvalidArgument, "order_check needs at least 4 eps values");
  const double eps_max = validate_admissibility(gen, model).eps_max;
  for (std::size_t i = 0; i < eps_grid.size(); ++i) {
    if (!(eps_grid[i] > 0) || eps_grid[i] > eps_max) {
      throw Error(ErrorCode::EpsOutOfRange, "order_check eps outside (0, eps_max]");
    }
    if (i > 0 && !(eps_grid[i] < eps_grid[i - 1])) {
      throw Error(ErrorCode::InvalidArgument, "order_check eps grid must be strictly decreasing");
    }
  }
  const auto resp = compute_response(model, gen, k);
  const auto& re = resp[static_cast<std::size_t>(ell)];
  using LD = long double;
  const Complex<LD> phi = unit_phase<LD>(k, model.alpha()[static_cast<std::size_t>(ell)]);
  const Complex<LD> lhat(re.lambda_hat.real(), re.lambda_hat.imag());
  const Complex<LD> lhh(re.lambda_hathat.real(), re.lambda_hathat.imag());

  OrderCheck oc;
  oc.k = k;
  oc.ell = ell;
  oc.eps_grid = eps_grid;
  const std::size_t m = eps_grid.size();
  oc.residual_0.resize(m);
  oc.residual_1.resize(m);
  oc.residual_2.resize(m);
  oc.vec_residual.resize(m);
  parallel_for(m, [&](std::size_t i) {
    const LD e = eps_grid[i];
    const auto spec = labelled_spectrum<LD>(model, gen, k, eps_grid[i], LD(1e-15));
    const auto& le = spec[static_cast<std::size_t>(ell)];
    oc.residual_0[i] = static_cast<double>(std::abs(le.lambda - phi));
    oc.residual_1[i] = static_cast<double>(std::abs(le.lambda - phi - e * lhat));
    oc.residual_2[i] = static_cast<double>(std::abs(le.lambda - phi - e * lhat - e * e * lhh));
    const CVector<LD> approx = (re.f + eps_grid[i] * re.f_hat).cast<Complex<LD>>();
    oc.vec_residual[i] = static_cast<double>(projective_distance<LD>(le.vector, approx));
  });
  oc.slope_0 = loglog_slope(oc.eps_grid, oc.residual_0);
  oc.slope_1 = loglog_slope(oc.eps_grid, oc.residual_1);
  oc.slope_2 = loglog_slope(oc.eps_grid, oc.residual_2);
  oc.slope_vec = loglog_slope(oc.eps_grid, oc.vec_residual);
  return oc;
}

struct AlphaResponse {
  cplx d_lambda;
  VectorC d_f;              // gauge <f, d_f> = 0
  cplx lambda;
  VectorC f;                // unit eigenvector at the base point
  double system_residual = 0;  // relative residual of (A - lambda) d_f = (d_lambda - dA) f
};

/// Directional derivative of the eigenpair labelled ell with respect to the
/// speed vector alpha, at eps > 0 where all eigenvalues are simple.
inline AlphaResponse alpha_response(const std::vector<double>& alpha, const NoiseGenerator& gen, long k,
                                    double eps, int ell, const VectorR& direction) {
  if (eps == 0.0) {
    throw Error(ErrorCode::EpsZero, "alpha response at eps = 0 is discontinuous for banded speeds");
  }
  const int n = gen.dim();
  if (direction.size() != n) throw Error(ErrorCode::InvalidArgument, "direction has the wrong dimension");
  const auto block = assemble_fourier_block<double>(alpha, gen, k, eps);
  const auto raw = eig_dense_complex<double>(block.matrix);

  double min_gap = std::numeric_limits<double>::infinity();
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      min_gap = std::min(min_gap, std::abs(raw.pairs[static_cast<std::size_t>(a)].value -
                                           raw.pairs[static_cast<std::size_t>(b)].value));
  if (!(min_gap > 1e-10)) throw Error(ErrorCode::EigsNotSimple, "eigenvalues are not simple at this eps");

  // Banded speeds use the library labelling; otherwise plain min-cost matching.
  std::optional<BandModel> model;
  try {
    model.emplace(detect_bands(alpha));
  } catch (const Error&) {
  }
  EigenPair<double> pair;
  if (model) {
    const auto spec = label_spectrum<double>(*model, gen, block, raw);
    const auto& e = spec[static_cast<std::size_t>(ell)];
    pair.value = e.lambda;
    pair.vector = e.vector;
  } else {
    MatrixR cost(n, n);
    for (int l = 0; l < n; ++l)
      for (int i = 0; i < n; ++i)
        cost(l, i) = std::abs(raw.pairs[static_cast<std::size_t>(i)].value - block.phases(l));
    pair = raw.pairs[static_cast<std::size_t>(min_cost_assignment(cost)[static_cast<std::size_t>(ell)])];
  }
  const MatrixC& a = block.matrix;
  const cplx lambda = pair.value;
  const VectorC& f = pair.vector;

  // Left eigenvector by inverse iteration on A^H.
  MatrixC shifted_h = (a - lambda * MatrixC::Identity(n, n)).adjoint();
  shifted_h.diagonal().array() += cplx(1e-13 * std::max(1.0, a.norm()), 0.0);
  const auto lu = shifted_h.partialPivLu();
  VectorC y = VectorC::Ones(n);
  for (int it = 0; it < 4; ++it) {
    y = lu.solve(y);
    y /= y.norm();
  }

  const MatrixR w = w_epsilon<double>(gen, eps);
  VectorC d_diag(n);
  for (int j = 0; j < n; ++j) d_diag(j) = cplx(0.0, -two_pi<double> * static_cast<double>(k) * direction(j)) * block.phases(j);
  const MatrixC da = d_diag.asDiagonal() * w.cast<cplx>();

  AlphaResponse out;
  out.lambda = lambda;
  out.f = f;
  out.d_lambda = y.dot(da * f) / y.dot(f);

  // Bordered system [[A - lambda, f], [f^H, 0]] [df; mu] = [(dlambda - dA) f; 0].
  MatrixC big = MatrixC::Zero(n + 1, n + 1);
  big.topLeftCorner(n, n) = a - lambda * MatrixC::Identity(n, n);
  big.block(0, n, n, 1) = f;
  big.block(n, 0, 1, n) = f.adjoint();
  VectorC rhs = VectorC::Zero(n + 1);
  const VectorC top = out.d_lambda * f - da * f;
  rhs.head(n) = top;
  const VectorC sol = big.fullPivLu().solve(rhs);
  out.d_f = sol.head(n);
  const VectorC res = (a - lambda * MatrixC::Identity(n, n)) * out.d_f - top;
  out.system_residual = res.norm() / std::max(1e-300, std::max(top.norm(), a.norm() * out.d_f.norm()));
  return out;
}

inline AlphaResponse alpha_response(const BandModel& model, const NoiseGenerator& gen, long k, double eps, int ell,
                                    const VectorR& direction) {
  return alpha_response(model.alpha(), gen, k, eps, ell, direction);
}

}  // namespace rotor

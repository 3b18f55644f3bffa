#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "rotor_spectra/linalg.hpp"
#include "rotor_spectra/model.hpp"
#include "rotor_spectra/spectra.hpp"

namespace rotor {

/// Per-k slice of the phase-distinctness condition: the band phases
/// e^{-2 pi i k beta_s} are pairwise distinct. Passing for one k does not
/// certify the condition for all k.
inline bool check_gamma(const BandModel& model, long k, double tol = 1e-12) {
  const int S = model.bands();
  for (int a = 0; a < S; ++a)
    for (int b = a + 1; b < S; ++b) {
      const auto pa = unit_phase(k, model.beta()[static_cast<std::size_t>(a)]);
      const auto pb = unit_phase(k, model.beta()[static_cast<std::size_t>(b)]);
      if (std::abs(pa - pb) <= tol) return false;
    }
  return true;
}

/// One diagonal block of the limit matrix: coordinates [begin, end) carrying
/// phase * wblock.
struct LimitBlock {
  int band = 0;  // -1 when the block is the whole generator (k = 0, S > 1)
  int begin = 0;
  int end = 0;
  cplx phase{1.0, 0.0};
  MatrixR wblock;
};

struct LimitMatrix {
  long k = 0;
  bool whole_generator = false;  // S == 1 or k == 0: the limit problem is Wdot itself
  MatrixC phat;
  std::vector<LimitBlock> blocks;
};

/// Builds D_{k,beta,L} Wdot_L: off-band entries of Wdot are discarded and each
/// band block is scaled by its unit phase. For S = 1 or k = 0 the limit
/// problem is the whole generator.
inline LimitMatrix assemble_limit_matrix(const BandModel& model, const NoiseGenerator& gen, long k) {
  if (gen.dim() != model.fibres()) throw Error(ErrorCode::InvalidArgument, "generator and model dimensions differ");
  const int n = model.fibres();
  LimitMatrix lim;
  lim.k = k;
  lim.phat = MatrixC::Zero(n, n);
  if (model.bands() == 1 || k == 0) {
    lim.whole_generator = true;
    const cplx phase = model.bands() == 1 ? unit_phase(k, model.beta()[0]) : cplx(1.0, 0.0);
    lim.blocks.push_back({model.bands() == 1 ? 0 : -1, 0, n, phase, gen.matrix()});
    lim.phat = phase * gen.matrix().cast<cplx>();
    return lim;
  }
  if (!check_gamma(model, k)) {
    throw Error(ErrorCode::GammaViolated,
                "band phases coincide at k=" + std::to_string(k) + "; the zero-noise limit is not characterised");
  }
  for (int s = 0; s < model.bands(); ++s) {
    LimitBlock b;
    b.band = s;
    b.begin = model.band_begin(s);
    b.end = model.band_end(s);
    b.phase = unit_phase(k, model.beta()[static_cast<std::size_t>(s)]);
    b.wblock = gen.block(b.begin, b.end);
    lim.phat.block(b.begin, b.begin, b.end - b.begin, b.end - b.begin) = b.phase * b.wblock.cast<cplx>();
    lim.blocks.push_back(std::move(b));
  }
  return lim;
}

struct LimitEigen {
  VectorC f;          // real entries, unit norm, first nonzero entry positive
  cplx lambda_hat;    // phase * rho
  double rho = 0;     // eigenvalue of the real symmetric block, <= 0 for admissible generators
  int band = 0;
};

struct LimitBasis {
  long k = 0;
  bool whole_generator = false;
  std::vector<LimitEigen> entries;  // indexed by ell

  std::size_t size() const { return entries.size(); }
  const LimitEigen& operator[](std::size_t ell) const { return entries[ell]; }
};

/// Orthonormal eigenbasis of the limit matrix, solved block by block as real
/// symmetric problems. Within a block, labels follow descending rho, which is
/// descending |lambda| for small eps.
inline LimitBasis limit_eigenbasis(const BandModel& model, const LimitMatrix& lim, double tol = 1e-9) {
  const int n = model.fibres();
  LimitBasis basis;
  basis.k = lim.k;
  basis.whole_generator = lim.whole_generator;
  basis.entries.resize(static_cast<std::size_t>(n));
  for (const auto& blk : lim.blocks) {
    const int w = blk.end - blk.begin;
    const auto e = symmetric_eig<double>(blk.wblock);
    const double radius = e.values.cwiseAbs().maxCoeff();
    for (int i = 1; i < w; ++i) {
      if (!(e.values(i) - e.values(i - 1) > tol * std::max(1.0, radius))) {
        throw Error(ErrorCode::DegenerateBlock, "block starting at fibre " + std::to_string(blk.begin + 1) +
                                                    " has a repeated eigenvalue");
      }
    }
    // SelfAdjointEigenSolver sorts ascending; walk backwards for descending rho.
    for (int m = 0; m < w; ++m) {
      const int col = w - 1 - m;
      VectorR v = e.vectors.col(col);
      for (int j = 0; j < w; ++j) {
        if (std::abs(v(j)) > 1e-12) {
          if (v(j) < 0) v = -v;
          break;
        }
      }
      const int ell = blk.begin + m;
      auto& le = basis.entries[static_cast<std::size_t>(ell)];
      le.f = VectorC::Zero(n);
      le.f.segment(blk.begin, w) = v.cast<cplx>();
      le.rho = e.values(col);
      le.lambda_hat = blk.phase * le.rho;
      le.band = model.band_of(ell);
    }
  }
  return basis;
}

inline LimitBasis limit_basis(const BandModel& model, const NoiseGenerator& gen, long k, double tol = 1e-9) {
  return limit_eigenbasis(model, assemble_limit_matrix(model, gen, k), tol);
}

/// Squared mass of each labelled eigenvector outside its band.
template <class Real>
std::vector<double> support_mass_outside_band(const LabelledSpectrum<Real>& spec, const BandModel& model) {
  std::vector<double> out;
  out.reserve(spec.size());
  for (const auto& e : spec.entries) {
    const int s = e.band;
    Real outside = 0;
    for (int j = 0; j < e.vector.size(); ++j)
      if (model.band_of(j) != s) outside += std::norm(e.vector(j));
    out.push_back(static_cast<double>(outside / e.vector.squaredNorm()));
  }
  return out;
}

inline std::vector<double> support_mass_outside_band(const LimitBasis& basis, const BandModel& model) {
  std::vector<double> out;
  for (const auto& e : basis.entries) {
    double outside = 0;
    for (int j = 0; j < e.f.size(); ++j)
      if (model.band_of(j) != e.band) outside += std::norm(e.f(j));
    out.push_back(outside);
  }
  return out;
}

struct ConvergenceRow {
  long k = 0;
  int ell = 0;
  double eps = 0;
  double proj_distance = 0;
  double projector_gap = 0;
  double mass_outside_band = 0;
};

/// Distance of finite-eps eigendata from the limit basis along an eps grid.
inline std::vector<ConvergenceRow> convergence_study(const BandModel& model, const NoiseGenerator& gen, long k,
                                                     const std::vector<double>& eps_grid) {
  const LimitBasis basis = limit_basis(model, gen, k);
  std::vector<std::vector<ConvergenceRow>> per_eps(eps_grid.size());
  parallel_for(eps_grid.size(), [&](std::size_t i) {
    const auto spec = labelled_spectrum<double>(model, gen, k, eps_grid[i]);
    const auto mass = support_mass_outside_band(spec, model);
    for (std::size_t ell = 0; ell < spec.size(); ++ell) {
      per_eps[i].push_back({k, static_cast<int>(ell), eps_grid[i],
                            projective_distance<double>(spec[ell].vector, basis[ell].f),
                            projector_gap<double>(spec[ell].vector, basis[ell].f), mass[ell]});
    }
  });
  std::vector<ConvergenceRow> rows;
  for (auto& v : per_eps) rows.insert(rows.end(), v.begin(), v.end());
  return rows;
}

}  // namespace rotor

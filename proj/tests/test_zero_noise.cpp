#include <numbers>

#include <gtest/gtest.h>

#include "rotor_spectra/zero_noise.hpp"

using namespace rotor;

namespace {

BandModel case_study() {
  return build_band_model({std::numbers::pi / 20, std::numbers::e / 7, 1 / std::numbers::sqrt2}, {11, 7, 15});
}

}  // namespace

TEST(CheckGamma, Examples) {
  EXPECT_FALSE(check_gamma(build_band_model({0.0, 0.5}, {1, 1}), 2));
  EXPECT_TRUE(check_gamma(build_band_model({0.0, 0.5}, {1, 1}), 1));
  for (long k = 1; k <= 50; ++k) EXPECT_TRUE(check_gamma(case_study(), k)) << k;
  EXPECT_FALSE(check_gamma(case_study(), 0));
  EXPECT_TRUE(check_gamma(build_band_model({0.3}, {4}), 0));
}

TEST(LimitMatrix, BlockLayout) {
  const auto m = case_study();
  const auto lim = assemble_limit_matrix(m, laplacian_generator(33), 1);
  ASSERT_EQ(lim.blocks.size(), 3u);
  EXPECT_EQ(lim.blocks[0].end - lim.blocks[0].begin, 11);
  EXPECT_EQ(lim.blocks[1].end - lim.blocks[1].begin, 7);
  EXPECT_EQ(lim.blocks[2].end - lim.blocks[2].begin, 15);
  for (int i = 0; i < 33; ++i)
    for (int j = 0; j < 33; ++j)
      if (m.band_of(i) != m.band_of(j)) EXPECT_EQ(lim.phat(i, j), cplx(0, 0));
  // Band 1 block: Neumann end at the top, cut (Dirichlet) end at fibre 11.
  EXPECT_EQ(lim.blocks[0].wblock(0, 0), -0.5);
  EXPECT_EQ(lim.blocks[0].wblock(10, 10), -1.0);
}

TEST(LimitMatrix, TwoSingletons) {
  const auto m = build_band_model({0.1, 0.35}, {1, 1});
  const auto lim = assemble_limit_matrix(m, laplacian_generator(2), 1);
  EXPECT_LT(std::abs(lim.phat(0, 0) - (-0.5) * unit_phase(1, 0.1)), 1e-16);
  EXPECT_LT(std::abs(lim.phat(1, 1) - (-0.5) * unit_phase(1, 0.35)), 1e-16);
  EXPECT_EQ(lim.phat(0, 1), cplx(0, 0));
  const auto basis = limit_eigenbasis(m, lim);
  EXPECT_LT((basis[0].f - VectorC::Unit(2, 0)).norm(), 1e-16);
  EXPECT_LT((basis[1].f - VectorC::Unit(2, 1)).norm(), 1e-16);
}

TEST(LimitMatrix, SingleBandIsWholeGenerator) {
  const auto m = build_band_model({0.3}, {4});
  const auto gen = laplacian_generator(4);
  const auto lim = assemble_limit_matrix(m, gen, 2);
  EXPECT_TRUE(lim.whole_generator);
  EXPECT_LT((lim.phat - unit_phase(2, 0.3) * gen.matrix().cast<cplx>()).norm(), 1e-15);
}

TEST(LimitMatrix, CoincidingPhasesAreRefused) {
  try {
    assemble_limit_matrix(build_band_model({0.0, 0.5}, {1, 1}), laplacian_generator(2), 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::GammaViolated);
  }
}

TEST(LimitBasis, InteriorPairByHand) {
  // Middle band of width 2 sees [[-1, 1/2], [1/2, -1]].
  const auto m = build_band_model({0.1, 0.2, 0.3}, {1, 2, 1});
  const auto basis = limit_basis(m, laplacian_generator(4), 1);
  EXPECT_NEAR(basis[1].rho, -0.5, 1e-15);
  EXPECT_NEAR(basis[2].rho, -1.5, 1e-15);
  const double r = 1 / std::sqrt(2.0);
  EXPECT_LT((basis[1].f.real() - (VectorR(4) << 0, r, r, 0).finished()).norm(), 1e-15);
  EXPECT_LT((basis[2].f.real() - (VectorR(4) << 0, r, -r, 0).finished()).norm(), 1e-15);
}

TEST(LimitBasis, CaseStudyStructure) {
  const auto m = case_study();
  const auto gen = laplacian_generator(33);
  const auto lim = assemble_limit_matrix(m, gen, 1);
  const auto basis = limit_eigenbasis(m, lim);
  MatrixC f(33, 33);
  for (int ell = 0; ell < 33; ++ell) f.col(ell) = basis[ell].f;
  EXPECT_LT((f.adjoint() * f - MatrixC::Identity(33, 33)).norm(), 1e-12);
  for (double mass : support_mass_outside_band(basis, m)) EXPECT_EQ(mass, 0.0);
  for (int ell = 0; ell < 33; ++ell) {
    EXPECT_LT((lim.phat * basis[ell].f - basis[ell].lambda_hat * basis[ell].f).norm(), 1e-12);
    EXPECT_LE(basis[ell].rho, 0.0);
    const double shift = std::arg(basis[ell].lambda_hat) - std::arg(unit_phase(1, m.alpha()[ell]));
    EXPECT_LT(angle_distance(shift, std::numbers::pi), 1e-12);
  }
}

TEST(LimitBasis, SingleBandZeroModeIsGeneratorEigenbasis) {
  const auto m = build_band_model({0.3}, {5});
  const auto basis = limit_basis(m, laplacian_generator(5), 0);
  for (int ell = 0; ell < 5; ++ell) {
    EXPECT_EQ(basis[ell].lambda_hat.imag(), 0.0);
    EXPECT_LE(basis[ell].lambda_hat.real(), 1e-15);
    // Descending rho: -1 + cos(ell pi / 5).
    EXPECT_NEAR(basis[ell].rho, -1 + std::cos(ell * std::numbers::pi / 5), 1e-14);
  }
}

TEST(LimitBasis, DegenerateBlock) {
  try {
    limit_basis(build_band_model({0.1, 0.2}, {2, 1}), NoiseGenerator(MatrixR::Zero(3, 3)), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateBlock);
  }
}

TEST(Distances, Examples) {
  const VectorC e1 = VectorC::Unit(3, 0), e2 = VectorC::Unit(3, 1);
  VectorC v(3);
  v << cplx(1, 2), cplx(-1, 0), cplx(0, 3);
  EXPECT_EQ(projective_distance<double>(v, v), 0.0);
  EXPECT_LT(projective_distance<double>(cplx(0, 1) * v, v), 1e-15);
  EXPECT_NEAR(projective_distance<double>(e1, e2), std::sqrt(2.0), 1e-15);
  EXPECT_EQ(projector_gap<double>(v, v), 0.0);
  EXPECT_NEAR(projector_gap<double>(e1, e2), 1.0, 1e-15);
  // Operator-norm gap between rank-one projectors, computed directly.
  VectorC w(3);
  w << cplx(0.3, 0), cplx(1, 1), cplx(0, -0.2);
  const MatrixC diff = v * v.adjoint() / v.squaredNorm() - w * w.adjoint() / w.squaredNorm();
  Eigen::SelfAdjointEigenSolver<MatrixC> es(diff);
  EXPECT_NEAR(projector_gap<double>(v, w), es.eigenvalues().cwiseAbs().maxCoeff(), 1e-14);
  try {
    projective_distance<double>(VectorC::Zero(2), e1.head(2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ZeroVector);
  }
}

TEST(Convergence, ProjectorsApproachTheLimit) {
  const auto m = case_study();
  const auto rows = convergence_study(m, laplacian_generator(33), 1, {1e-1, 1e-2, 1e-3});
  ASSERT_EQ(rows.size(), 99u);
  for (int ell = 0; ell < 33; ++ell) {
    const auto& a = rows[static_cast<std::size_t>(ell)];
    const auto& b = rows[static_cast<std::size_t>(33 + ell)];
    const auto& c = rows[static_cast<std::size_t>(66 + ell)];
    EXPECT_GT(a.projector_gap, b.projector_gap) << ell;
    EXPECT_GT(b.projector_gap, c.projector_gap) << ell;
    EXPECT_LT(c.proj_distance, 1e-2) << ell;
  }
  // Band 1, first label: positive but well below one half at eps = 0.1.
  EXPECT_GT(rows[0].mass_outside_band, 0.0);
  EXPECT_LT(rows[0].mass_outside_band, 0.5);
}

TEST(Convergence, SingleBandHasNoOutsideMass) {
  const auto m = build_band_model({0.3}, {5});
  const auto spec = labelled_spectrum(m, laplacian_generator(5), 1, 0.2);
  for (double mass : support_mass_outside_band(spec, m)) EXPECT_EQ(mass, 0.0);
}

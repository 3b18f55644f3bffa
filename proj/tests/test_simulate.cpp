#include <cstdlib>
#include <numbers>

#include <gtest/gtest.h>

#include "rotor_spectra/simulate.hpp"
#include "rotor_spectra/spectra.hpp"

using namespace rotor;

namespace {

BandModel case_study() {
  return build_band_model({std::numbers::pi / 20, std::numbers::e / 7, 1 / std::numbers::sqrt2}, {11, 7, 15});
}

BandModel quarter() { return build_band_model({0.25}, {1}); }
NoiseGenerator trivial(int n) { return NoiseGenerator(MatrixR::Zero(n, n)); }

}  // namespace

TEST(Simulate, RationalRotationCycles) {
  const auto b = simulate(quarter(), trivial(1), 0.0, 0.0, 3, 12, 7, InitialState{0, 0.0});
  for (int p = 0; p < 3; ++p)
    for (int t = 0; t <= 12; ++t) EXPECT_EQ(b.x[b.index(p, t)], 0.25 * (t % 4));
}

TEST(Simulate, NoBaseNoiseKeepsFibre) {
  const auto m = case_study();
  const auto b = simulate(m, laplacian_generator(33), 0.0, 0.3, 50, 40, 11);
  for (int p = 0; p < 50; ++p)
    for (int t = 1; t <= 40; ++t) EXPECT_EQ(b.j[b.index(p, t)], b.j[b.index(p, 0)]);
}

TEST(Simulate, FibreOccupancyStaysUniform) {
  const auto m = case_study();
  const int paths = 10000;
  const auto b = simulate(m, laplacian_generator(33), 0.1, 0.1, paths, 1000, 2024);
  std::vector<int> count(33, 0);
  for (int p = 0; p < paths; ++p) ++count[static_cast<std::size_t>(b.j[b.index(p, 1000)])];
  const double expect = paths / 33.0;
  const double se = std::sqrt(paths * (1.0 / 33) * (32.0 / 33));
  for (int c : count) EXPECT_LT(std::abs(c - expect), 3.5 * se);
  for (double x : b.x) {
    ASSERT_GE(x, 0.0);
    ASSERT_LT(x, 1.0);
  }
}

TEST(Simulate, ReproducibleAndThreadIndependent) {
  const auto m = case_study();
  const auto gen = laplacian_generator(33);
  const auto a = simulate(m, gen, 0.2, 0.05, 64, 50, 99);
  setenv("ROTOR_SPECTRA_THREADS", "1", 1);
  const auto b = simulate(m, gen, 0.2, 0.05, 64, 50, 99);
  unsetenv("ROTOR_SPECTRA_THREADS");
  EXPECT_EQ(a.j, b.j);
  EXPECT_EQ(a.x, b.x);
  const auto c = simulate(m, gen, 0.2, 0.05, 64, 50, 100);
  EXPECT_NE(a.x, c.x);
}

TEST(UlamAnalytic, RotationByOneBinIsAPermutation) {
  const auto op = ulam_analytic(quarter(), trivial(1), 0.0, 0.0, 4);
  const MatrixR q(op.matrix);
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) EXPECT_EQ(q(a, b), b == (a + 1) % 4 ? 1.0 : 0.0);
}

TEST(UlamAnalytic, WideNoiseIsUniform) {
  for (double delta : {0.5, 1.0}) {
    const MatrixR q(ulam_analytic(build_band_model({0.137}, {1}), trivial(1), 0.0, delta, 8).matrix);
    EXPECT_LT((q.array() - 0.125).abs().maxCoeff(), 1e-15) << delta;
  }
  // Radius 0.7 is not a whole number of turns: the kernel is not flat.
  const MatrixR q(ulam_analytic(build_band_model({0.137}, {1}), trivial(1), 0.0, 0.7, 8).matrix);
  EXPECT_GT((q.array() - 0.125).abs().maxCoeff(), 1e-3);
}

TEST(UlamAnalytic, OverlapMatchesQuadrature) {
  // Midpoint rule over the source bin and the exact noise CDF as an
  // independent check of the closed-form overlap.
  const double shift = 0.31, delta = 0.07;
  const int m = 10;
  const MatrixR q(ulam_analytic(build_band_model({shift}, {1}), trivial(1), 0.0, delta, m).matrix);
  const int samples = 200000;
  for (int b = 0; b < m; ++b) {
    double acc = 0;
    for (int i = 0; i < samples; ++i) {
      const double x = (i + 0.5) / samples / m;  // bin 0
      const double centre = x + shift;
      // Probability that centre + eta lands in [b/m, (b+1)/m) mod 1.
      for (int wrap = -1; wrap <= 1; ++wrap) {
        const double lo = static_cast<double>(b) / m + wrap, hi = lo + 1.0 / m;
        const double a0 = std::clamp((lo - centre + delta) / (2 * delta), 0.0, 1.0);
        const double a1 = std::clamp((hi - centre + delta) / (2 * delta), 0.0, 1.0);
        acc += a1 - a0;
      }
    }
    EXPECT_NEAR(q(0, b), acc / samples, 1e-8) << b;
  }
}

TEST(UlamAnalytic, RowsAreStochastic) {
  const auto op = ulam_analytic(case_study(), laplacian_generator(33), 0.1, 0.1, 32);
  EXPECT_LT(stochasticity_defect(op), 1e-12);
  for (int r = 0; r < op.matrix.outerSize(); ++r)
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(op.matrix, r); it; ++it)
      ASSERT_GE(it.value(), 0.0);
}

TEST(UlamAnalytic, ExactSectorMatchesFourierBlock) {
  // Speeds on the bin grid and no fibre noise: the k = 1 Fourier block
  // spectrum appears exactly (up to conjugation) in the Ulam spectrum.
  const auto m = build_band_model({0.0, 0.25}, {1, 1});
  const auto gen = laplacian_generator(2);
  const MatrixR q(ulam_analytic(m, gen, 0.01, 0.0, 64).matrix);
  Eigen::EigenSolver<MatrixR> es(q.transpose(), false);
  const auto spec = labelled_spectrum(m, gen, 1, 0.01);
  for (const auto& e : spec.entries) {
    double best = 1e300;
    for (int i = 0; i < es.eigenvalues().size(); ++i)
      best = std::min({best, std::abs(es.eigenvalues()(i) - e.lambda), std::abs(es.eigenvalues()(i) - std::conj(e.lambda))});
    EXPECT_LT(best, 1e-10);
    EXPECT_LT(angle_distance(std::abs(std::arg(e.lambda)), std::abs(std::arg(unit_phase(1, m.beta()[e.band])))),
              1e-2);
  }
}

TEST(UlamEmpirical, DeterministicRotationRecoversPermutation) {
  const auto b = simulate(quarter(), trivial(1), 0.0, 0.0, 1, 40, 3, InitialState{0, 0.1});
  const MatrixR q(ulam_empirical(b, 4).matrix);
  for (int a = 0; a < 4; ++a)
    for (int c = 0; c < 4; ++c) EXPECT_EQ(q(a, c), c == (a + 1) % 4 ? 1.0 : 0.0);
}

TEST(UlamEmpirical, EmptyAndSparseBatches) {
  TrajectoryBatch empty;
  try {
    ulam_empirical(empty, 4);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientData);
  }
  const auto few = simulate(case_study(), laplacian_generator(33), 0.1, 0.1, 2, 10, 5);
  try {
    ulam_empirical(few, 64);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientData);
  }
}

TEST(UlamEmpirical, ConvergesToAnalyticAtMonteCarloRate) {
  const auto m = build_band_model({0.0, 0.25}, {1, 1});
  const auto gen = laplacian_generator(2);
  const auto analytic = ulam_analytic(m, gen, 0.1, 0.05, 16);
  const auto mean_tv = [&](int paths) {
    const auto b = simulate(m, gen, 0.1, 0.05, paths, 1000, 77);
    const auto emp = ulam_empirical(b, 16);
    EXPECT_LT(stochasticity_defect(emp), 1e-14);
    const auto tv = row_tv_distance(analytic, emp);
    double s = 0, worst = 0;
    for (double v : tv) {
      s += v;
      worst = std::max(worst, v);
    }
    return std::pair{s / static_cast<double>(tv.size()), worst};
  };
  const auto [small_mean, small_worst] = mean_tv(250);
  const auto [big_mean, big_worst] = mean_tv(1000);
  EXPECT_LT(big_worst, 0.02);
  const double ratio = small_mean / big_mean;
  EXPECT_GT(ratio, 2.0 / 3.0);
  EXPECT_LT(ratio, 6.0);
  (void)small_worst;
}

TEST(DetectCycles, QuarterRotation) {
  const auto rep = detect_cycles(ulam_analytic(quarter(), trivial(1), 0.0, 0.0, 4), quarter(), 1);
  ASSERT_EQ(rep.cycles.size(), 1u);
  EXPECT_LT(std::abs(rep.cycles[0].eigenvalue - cplx(0, 1)), 1e-12);
  EXPECT_NEAR(rep.cycles[0].period_steps, 4.0, 1e-12);
  EXPECT_NEAR(rep.cycles[0].band_masses[0], 1.0, 1e-15);
}

TEST(DetectCycles, IdentityHasNoCycles) {
  UlamOperator op;
  op.fibres = 1;
  op.bins = 6;
  op.matrix.resize(6, 6);
  op.matrix.setIdentity();
  try {
    detect_cycles(op, quarter(), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoComplexEigenvalues);
  }
}

TEST(DetectCycles, ArnoldiAgreesWithDense) {
  const auto m = build_band_model({0.1, 0.37}, {2, 3});
  const auto op = ulam_analytic(m, laplacian_generator(5), 0.1, 0.02, 40);
  const auto dense = detect_cycles(op, m, 2);
  CycleOptions opt;
  opt.dense_limit = 0;
  const auto krylov = detect_cycles(op, m, 2, opt);
  EXPECT_TRUE(dense.dense);
  EXPECT_FALSE(krylov.dense);
  ASSERT_EQ(dense.cycles.size(), krylov.cycles.size());
  for (std::size_t i = 0; i < dense.cycles.size(); ++i) {
    EXPECT_LT(std::abs(dense.cycles[i].eigenvalue - krylov.cycles[i].eigenvalue), 1e-9);
    EXPECT_EQ(dense.cycles[i].band, krylov.cycles[i].band);
    EXPECT_NEAR(dense.cycles[i].band_masses[dense.cycles[i].band],
                krylov.cycles[i].band_masses[krylov.cycles[i].band], 1e-8);
  }
}

TEST(DetectCycles, CaseStudyAttributesEveryBand) {
  const auto m = case_study();
  const auto rep = detect_cycles(ulam_analytic(m, laplacian_generator(33), 0.1, 0.1, 128), m, 3);
  ASSERT_EQ(rep.cycles.size(), 3u);
  std::vector<int> bands;
  for (const auto& c : rep.cycles) {
    bands.push_back(c.band);
    EXPECT_GT(c.band_masses[c.band], 0.8);
    double total = 0;
    for (double v : c.band_masses) total += v;
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_GT(c.period_steps, 0);
  }
  std::sort(bands.begin(), bands.end());
  EXPECT_EQ(bands, (std::vector<int>{0, 1, 2}));
  // Periods 2 pi / |arg e^{-2 pi i beta_s}| for the principal argument.
  for (const auto& c : rep.cycles) {
    const double want = 2 * std::numbers::pi / std::abs(std::arg(unit_phase(1, m.beta()[c.band])));
    EXPECT_NEAR(c.period_steps, want, 0.2);
  }
}

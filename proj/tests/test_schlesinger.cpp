#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "schl/random.hpp"
#include "schl/schlesinger.hpp"

using fixtures::kind_of;
using schl::ComplexMatrix;
using schl::cplx;
using schl::ErrorKind;

namespace {

const ComplexMatrix kQ1{{-1.0, 0.0}, {0.0, 0.0}};
const ComplexMatrix kQ2{{1.0, 0.0}, {0.0, 0.0}};

}  // namespace

TEST(BuildExplicit, DSeedGenerators) {
  const auto sol = schl::build_explicit(fixtures::d_seed());
  // Gauge-invariant content: B_P0 spans (1, 0) and C_Z0 spans (1, 0)^T.
  EXPECT_NE(sol.B_P0(0, 0), cplx(0.0));
  EXPECT_EQ(sol.B_P0(0, 1), cplx(0.0));
  EXPECT_NE(sol.C_Z0(0, 0), cplx(0.0));
  EXPECT_EQ(sol.C_Z0(1, 0), cplx(0.0));
  EXPECT_LT(schl::initial_condition_residual(sol), 1e-15);
}

TEST(BuildExplicit, RankOneViolation) {
  auto seed = fixtures::d_seed();
  seed.Q0[0] = ComplexMatrix::identity(2);
  EXPECT_EQ(kind_of([&] { schl::build_explicit(seed); }), ErrorKind::NotRankOne);
}

TEST(BuildExplicit, InvalidSeedNamesRelation) {
  auto seed = fixtures::d_seed();
  seed.Q0[0] = ComplexMatrix{{0.0, 1.0}, {0.0, 0.0}};
  seed.Q0[1] = ComplexMatrix{{0.0, -1.0}, {0.0, 0.0}};
  try {
    schl::build_explicit(seed);
    FAIL() << "expected InvalidSeed";
  } catch (const schl::Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidSeed);
    EXPECT_NE(std::string(e.what()).find("idempotency violated at j=1"), std::string::npos) << e.what();
  }
}

TEST(BuildExplicit, RandomRoundTrip) {
  std::mt19937_64 rng(41);
  for (std::size_t s = 1; s <= 3; ++s)
    for (std::size_t m = 1; m <= 3; ++m) {
      const auto seed = schl::random_seed(rng, m, s);
      const auto sol = schl::build_explicit(seed);
      EXPECT_LT(schl::initial_condition_residual(sol), 1e-9) << "s=" << s << " m=" << m;
    }
}

TEST(BuildExplicit, GaugeIndependence) {
  std::mt19937_64 rng(42);
  const auto seed = schl::random_seed(rng, 3, 2);
  auto [C_P0, B_Z0] = schl::seed_semi_residues(seed);
  const auto a = schl::build_explicit_from_factors(seed, C_P0, B_Z0);
  for (std::size_t i = 0; i < 3; ++i) {
    C_P0(i, 0) *= cplx(2.0, -1.0);
    C_P0(i, 1) *= cplx(-0.3, 0.0);
    B_Z0(1, i) *= cplx(0.0, 5.0);
  }
  const auto b = schl::build_explicit_from_factors(seed, C_P0, B_Z0);
  const auto t = schl::perturbed_points(rng, seed.t0, 0.1);
  const auto Qa = schl::eval_Q(a, t), Qb = schl::eval_Q(b, t);
  for (std::size_t j = 0; j < Qa.size(); ++j) EXPECT_LT(schl::max_diff(Qa[j], Qb[j]), 1e-10);
}

TEST(EvalQ, DSeedIsConstant) {
  const auto sol = schl::build_explicit(fixtures::d_seed());
  const std::vector<std::vector<cplx>> ts = {{2.0, 5.0}, {cplx(0.3, 1.0), -4.0}, {cplx(-7.0, 2.0), cplx(1e-3, 0.0)}};
  for (const auto& t : ts) {
    const auto Q = schl::eval_Q(sol, t);
    EXPECT_LT(schl::max_diff(Q[0], kQ1), 1e-12);
    EXPECT_LT(schl::max_diff(Q[1], kQ2), 1e-12);
  }
}

TEST(EvalQ, ConservationAndStructureAlongPath) {
  std::mt19937_64 rng(43);
  const auto seed = schl::random_seed(rng, 2, 2);
  const auto sol = schl::build_explicit(seed);
  for (int i = 0; i < 10; ++i) {
    const auto t = schl::perturbed_points(rng, seed.t0, 0.05);
    const auto Q = schl::eval_Q(sol, t);
    ComplexMatrix sum(2, 2);
    for (const auto& q : Q) sum += q;
    EXPECT_LT(sum.max_norm(), 1e-10);
    EXPECT_TRUE(schl::check_general_position(schl::FuchsianSystem(t, Q, false), 2).passed());
  }
}

TEST(EvalQ, CoincidentPointsRejected) {
  const auto sol = schl::build_explicit(fixtures::d_seed());
  EXPECT_EQ(kind_of([&] { schl::eval_Q(sol, std::vector<cplx>{1.0, 1.0}); }), ErrorKind::InvalidPoints);
}

TEST(SchlesingerResidual, DSeedVanishes) {
  // Q is constant here, so the central difference is exact for any step and
  // a large one keeps rounding (about eps / h) out of the residual.
  const auto sol = schl::build_explicit(fixtures::d_seed());
  const std::vector<cplx> t{cplx(0.5, 0.2), 3.0};
  EXPECT_LT(schl::schlesinger_residual(sol, t, 0.25), 1e-12);
  // At h = 1e-5 one-ulp differences between Q(t + h) and Q(t - h) give about 1e-11.
  EXPECT_LT(schl::schlesinger_residual(sol, t, 1e-5), 4.0 * std::numeric_limits<double>::epsilon() / 1e-5);
}

TEST(SchlesingerResidual, RandomSeeds) {
  std::mt19937_64 rng(44);
  for (std::size_t s = 1; s <= 3; ++s) {
    const auto seed = schl::random_seed(rng, 2, s);
    const auto sol = schl::build_explicit(seed);
    for (int i = 0; i < 3; ++i) {
      const auto t = schl::perturbed_points(rng, seed.t0, 0.05);
      EXPECT_LT(schl::schlesinger_residual(sol, t, 1e-5), 1e-6) << "s=" << s;
    }
  }
}

TEST(SchlesingerResidual, SecondOrderInStep) {
  // Above the rounding floor the central-difference error scales like h^2.
  std::mt19937_64 rng(45);
  const auto seed = schl::random_seed(rng, 2, 2);
  const auto sol = schl::build_explicit(seed);
  const double r1 = schl::schlesinger_residual(sol, seed.t0, 2e-3);
  const double r2 = schl::schlesinger_residual(sol, seed.t0, 1e-3);
  ASSERT_GT(r2, 1e-8);
  EXPECT_NEAR(r1 / r2, 4.0, 0.3);
}

TEST(SchlesingerResidual, ExtrapolatedIsFourthOrder) {
  std::mt19937_64 rng(45);
  const auto seed = schl::random_seed(rng, 2, 2);
  const auto sol = schl::build_explicit(seed);
  const double r1 = schl::schlesinger_residual_extrapolated(sol, seed.t0, 4e-2);
  const double r2 = schl::schlesinger_residual_extrapolated(sol, seed.t0, 2e-2);
  ASSERT_GT(r2, 1e-8);
  EXPECT_NEAR(r1 / r2, 16.0, 2.0);
  EXPECT_LT(schl::schlesinger_residual_extrapolated(sol, seed.t0, 3e-5), 1e-8);
}

TEST(SchlesingerResidual, TamperedGeneratorsBreakOnlyInitialCondition) {
  std::mt19937_64 rng(46);
  const auto seed = schl::random_seed(rng, 2, 2);
  auto sol = schl::build_explicit(seed);
  sol.B_P0(0, 0) += 1e-2;
  EXPECT_GT(schl::initial_condition_residual(sol), 1e-4);
  // Any generators define some rational solution, so the PDE residual alone
  // cannot detect the tampering.
  EXPECT_LT(schl::schlesinger_residual(sol, seed.t0, 1e-5), 1e-6);
}

TEST(GeneralizedRhs, HandCommutatorSign) {
  schl::HigherOrderFamily fam{{0.0, 1.0},
                              {{ComplexMatrix{{0.0, 1.0}, {0.0, 0.0}}}, {ComplexMatrix{{0.0, 0.0}, {1.0, 0.0}}}},
                              false};
  const std::vector<cplx> dt{1.0, 0.0};
  EXPECT_LT(schl::max_diff(schl::generalized_rhs(fam, 0, 0, dt), ComplexMatrix{{1.0, 0.0}, {0.0, -1.0}}), 1e-15);
}

TEST(GeneralizedRhs, FirstOrderPoleTerm) {
  // Q_{1,1} = E12, Q_{2,0} = E21. For k = 0 only l = 1 contributes,
  // -[E21, E12] / (t_1 - t_2)^2 = diag(1, -1); for k = 1 only l = 0,
  // [E21, E12] / (t_1 - t_2) = diag(1, -1).
  schl::HigherOrderFamily fam{{0.0, 1.0},
                              {{ComplexMatrix(2, 2), ComplexMatrix{{0.0, 1.0}, {0.0, 0.0}}},
                               {ComplexMatrix{{0.0, 0.0}, {1.0, 0.0}}}},
                              false};
  const std::vector<cplx> dt{1.0, 0.0};
  EXPECT_LT(schl::max_diff(schl::generalized_rhs(fam, 0, 0, dt), ComplexMatrix{{1.0, 0.0}, {0.0, -1.0}}), 1e-15);
  EXPECT_LT(schl::max_diff(schl::generalized_rhs(fam, 0, 1, dt), ComplexMatrix{{1.0, 0.0}, {0.0, -1.0}}), 1e-15);
  EXPECT_EQ(kind_of([&] { schl::generalized_rhs(fam, 0, 2, dt); }), ErrorKind::IndexOutOfRange);
  EXPECT_EQ(kind_of([&] { schl::generalized_rhs(fam, 1, 1, dt); }), ErrorKind::IndexOutOfRange);
}

TEST(GeneralizedRhs, CommutingFamilyVanishes) {
  schl::HigherOrderFamily fam{{0.0, 1.0, 3.0},
                              {{ComplexMatrix{{1.0, 0.0}, {0.0, 2.0}}, ComplexMatrix{{0.5, 0.0}, {0.0, -1.0}}},
                               {ComplexMatrix{{-3.0, 0.0}, {0.0, 1.0}}},
                               {ComplexMatrix{{2.0, 0.0}, {0.0, -3.0}}}},
                              true};
  const std::vector<cplx> dt{1.0, cplx(0.0, 1.0), -2.0};
  for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(schl::generalized_rhs(fam, j, 0, dt), ComplexMatrix(2, 2));
}

TEST(GeneralizedRhs, FuchsianCaseMatchesDirectionalDerivative) {
  std::mt19937_64 rng(47);
  const auto seed = schl::random_seed(rng, 2, 2);
  const auto sol = schl::build_explicit(seed);
  const auto Q = schl::eval_Q(sol, seed.t0);
  schl::HigherOrderFamily fam{seed.t0, {}, true};
  for (const auto& q : Q) fam.Q.push_back({q});
  const std::vector<cplx> dt{cplx(1.0, 0.5), -0.5, cplx(0.0, 2.0), 1.0};
  const double h = 1e-5;
  std::vector<cplx> tp(seed.t0), tm(seed.t0);
  for (std::size_t k = 0; k < 4; ++k) {
    tp[k] += h * dt[k];
    tm[k] -= h * dt[k];
  }
  const auto Qp = schl::eval_Q(sol, tp), Qm = schl::eval_Q(sol, tm);
  for (std::size_t j = 0; j < 4; ++j)
    EXPECT_LT(schl::max_diff((Qp[j] - Qm[j]) / (2.0 * h), schl::generalized_rhs(fam, j, 0, dt)), 1e-6) << "j=" << j;
}

TEST(PoleLocus, DSeedHasNoRoots) {
  const auto sol = schl::build_explicit(fixtures::d_seed());
  const std::vector<cplx> a{-3.0, 1.0}, b{0.5, 4.0};
  EXPECT_TRUE(schl::pole_locus(sol, a, b, 200).empty());
}

TEST(PoleLocus, RealSeedRootsArePoles) {
  std::mt19937_64 rng(48);
  schl::RandomOptions opt;
  opt.real = true;
  std::size_t found = 0;
  for (int trial = 0; trial < 10 && found < 3; ++trial) {
    const auto seed = schl::random_seed(rng, 2, 2, opt);
    const auto sol = schl::build_explicit(seed);
    std::vector<cplx> b(seed.t0);
    b[0] += 6.0;
    b[2] -= 6.0;
    for (const auto& root : schl::pole_locus(sol, seed.t0, b, 400)) {
      ++found;
      EXPECT_LT(root.det_abs, 1e-8);
      EXPECT_GE(root.order, 1);
      EXPECT_GT(root.residue_norm, 1e-6);
      EXPECT_LT(root.limit_mismatch, 1e-6);
      EXPECT_EQ(kind_of([&] { schl::eval_Q(sol, root.t); }), ErrorKind::MovablePole);
    }
  }
  EXPECT_GT(found, 0u);
}

// On |tau| = 1 the fit separates degrees; on tiny circles every analytic
// function passes.
TEST(Rationality, DegreeTwiceSForSmallS) {
  std::mt19937_64 rng(49);
  for (std::size_t s = 1; s <= 2; ++s)
    for (int i = 0; i < 3; ++i) {
      const auto seed = schl::random_seed(rng, 2 + i % 2, s);
      const auto sol = schl::build_explicit(seed);
      const auto dir = schl::perturbed_points(rng, std::vector<cplx>(2 * s, 0.0), 1.0);
      EXPECT_LT(schl::rationality_residual(sol, seed.t0, dir, 2 * s, 1.0), 1e-8) << "s=" << s;
      if (s == 2) EXPECT_GT(schl::rationality_residual(sol, seed.t0, dir, 3, 1.0), 1e-6);
    }
}

TEST(Rationality, ThreePolesNeedDegreeTwelve) {
  // Double poles at the s(s - 1) = 6 zeros of det S_PZ along the line.
  std::mt19937_64 rng(50);
  for (int i = 0; i < 3; ++i) {
    const auto seed = schl::random_seed(rng, 2 + i % 2, 3);
    const auto sol = schl::build_explicit(seed);
    const auto dir = schl::perturbed_points(rng, std::vector<cplx>(6, 0.0), 1.0);
    EXPECT_LT(schl::rationality_residual(sol, seed.t0, dir, 12, 1.0), 1e-8);
    EXPECT_GT(schl::rationality_residual(sol, seed.t0, dir, 6, 1.0), 1e-6);
  }
}

TEST(Isomonodromy, DSeedSamples) {
  const auto sol = schl::build_explicit(fixtures::d_seed());
  const auto rep = schl::verify_isomonodromy(sol, {{0.0, 1.0}, {cplx(0.5, 0.5), 3.0}, {-2.0, cplx(0.0, 1.0)}});
  EXPECT_TRUE(rep.passed());
}

TEST(Isomonodromy, RandomSeedAtInitialPoint) {
  std::mt19937_64 rng(51);
  const auto seed = schl::random_seed(rng, 2, 2);
  const auto sol = schl::build_explicit(seed);
  const auto rep = schl::verify_isomonodromy(sol, {seed.t0, schl::perturbed_points(rng, seed.t0, 0.05)});
  EXPECT_TRUE(rep.passed()) << rep.max_deviation[0];
}

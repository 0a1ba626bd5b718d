#include <gtest/gtest.h>

#include <random>

#include "fixtures.hpp"
#include "schl/fuchsian.hpp"
#include "schl/random.hpp"
#include "schl/realization.hpp"

using fixtures::kind_of;
using schl::ComplexMatrix;
using schl::cplx;
using schl::ErrorKind;

TEST(CoreMatrix, DInstance) {
  const schl::PoleZeroData pz({0.0}, {1.0});
  EXPECT_EQ(schl::core_matrix_pz(ComplexMatrix{{-1.0, 0.0}}, ComplexMatrix{{1.0}, {0.0}}, pz), ComplexMatrix{{1.0}});
  EXPECT_EQ(schl::core_matrix_zp(ComplexMatrix{{1.0, 0.0}}, ComplexMatrix{{1.0}, {0.0}}, pz), ComplexMatrix{{1.0}});
}

TEST(CoreMatrix, SingleCauchyQuotient) {
  const schl::PoleZeroData pz({0.0}, {2.0});
  EXPECT_EQ(schl::core_matrix_pz(ComplexMatrix{{1.0, 0.0}}, ComplexMatrix{{1.0}, {0.0}}, pz), ComplexMatrix{{-0.5}});
}

TEST(CoreMatrix, OrthogonalDataGivesZero) {
  const schl::PoleZeroData pz({0.0, 3.0}, {1.0, 2.0});
  const ComplexMatrix B{{1.0, 0.0}, {2.0, 0.0}};
  const ComplexMatrix C{{0.0, 0.0}, {5.0, -1.0}};
  EXPECT_EQ(schl::core_matrix_pz(B, C, pz), ComplexMatrix(2, 2));
  EXPECT_EQ(schl::core_matrix_zp(B, C, pz), ComplexMatrix(2, 2));
}

TEST(Complete, DInstanceFromPoleColumnsAndZeroRows) {
  const auto r = fixtures::d_instance();
  EXPECT_EQ(r.S_ZP, ComplexMatrix{{1.0}});
  EXPECT_EQ(r.S_PZ, ComplexMatrix{{1.0}});
  EXPECT_EQ(r.C_Z, (ComplexMatrix{{1.0}, {0.0}}));
  EXPECT_EQ(r.B_P, (ComplexMatrix{{-1.0, 0.0}}));
}

TEST(Complete, DInstanceMirror) {
  const auto r = schl::complete_from_CZ_BP(ComplexMatrix{{1.0}, {0.0}}, ComplexMatrix{{-1.0, 0.0}},
                                           schl::PoleZeroData({0.0}, {1.0}));
  EXPECT_EQ(r.S_PZ, ComplexMatrix{{1.0}});
  EXPECT_EQ(r.C_P, (ComplexMatrix{{1.0}, {0.0}}));
  EXPECT_EQ(r.B_Z, (ComplexMatrix{{1.0, 0.0}}));
}

TEST(Complete, ZeroCoreIsSingular) {
  const schl::PoleZeroData pz({0.0}, {1.0});
  EXPECT_EQ(kind_of([&] { schl::complete_from_CP_BZ(ComplexMatrix{{1.0}, {0.0}}, ComplexMatrix{{0.0, 1.0}}, pz); }),
            ErrorKind::CoreSingular);
  EXPECT_EQ(kind_of([&] { schl::complete_from_CZ_BP(ComplexMatrix{{0.0}, {1.0}}, ComplexMatrix{{1.0, 0.0}}, pz); }),
            ErrorKind::CoreSingular);
}

TEST(Complete, RandomPassesValidation) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    const auto r = schl::random_realization(rng, 3, 2);
    const auto rep = schl::validate(r);
    EXPECT_TRUE(rep.passed());
    EXPECT_LT(rep.max_value(), 1e-10);
    // The zero-side core is the inverse of the pole-side core recomputed from the completed data.
    const auto S_PZ = schl::core_matrix_pz(r.B_P, r.C_Z, r.pz);
    EXPECT_LT(schl::max_diff(schl::core_matrix_zp(r.B_Z, r.C_P, r.pz), schl::inverse(S_PZ)), 1e-10);
  }
}

TEST(Complete, RoundTripThroughMirror) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 10; ++i) {
    const auto r = schl::random_realization(rng, 3, 3);
    const auto back = schl::complete_from_CZ_BP(r.C_Z, r.B_P, r.pz);
    EXPECT_LT(schl::max_diff(back.C_P, r.C_P), 1e-10);
    EXPECT_LT(schl::max_diff(back.B_Z, r.B_Z), 1e-10);
    EXPECT_LT(schl::max_diff(back.S_ZP, r.S_ZP), 1e-10);
  }
}

TEST(Eval, DInstanceValues) {
  const auto r = fixtures::d_instance();
  EXPECT_LT(schl::max_diff(schl::eval(r, 2.0), ComplexMatrix{{0.5, 0.0}, {0.0, 1.0}}), 1e-15);
  EXPECT_LT(schl::max_diff(schl::eval_inverse(r, 2.0), ComplexMatrix{{2.0, 0.0}, {0.0, 1.0}}), 1e-15);
  EXPECT_LT(std::abs(schl::det_formula(r, 2.0) - 0.5), 1e-15);
  EXPECT_EQ(kind_of([&] { schl::eval(r, 0.0); }), ErrorKind::AtPole);
  EXPECT_EQ(kind_of([&] { schl::eval_inverse(r, 1.0); }), ErrorKind::AtZeroPoint);
  EXPECT_EQ(kind_of([&] { schl::det_formula(r, 0.0); }), ErrorKind::AtPole);
}

TEST(Eval, NormalizedAtInfinity) {
  std::mt19937_64 rng(13);
  const auto r = schl::random_realization(rng, 3, 2);
  EXPECT_LT(schl::max_diff(schl::eval(r, cplx(1e8, 0.0)), ComplexMatrix::identity(3)), 1e-6);
  EXPECT_LT(std::abs(schl::det_formula(r, cplx(0.0, 1e8)) - 1.0), 1e-6);
}

TEST(Eval, InverseAndDeterminantAtRandomPoints) {
  std::mt19937_64 rng(14);
  std::normal_distribution<double> n;
  for (int inst = 0; inst < 5; ++inst) {
    const auto r = schl::random_realization(rng, 3, 2);
    const auto pts = r.pz.points();
    int used = 0;
    while (used < 20) {
      const cplx x(2.0 * n(rng), 2.0 * n(rng));
      if (std::ranges::any_of(pts, [&](cplx t) { return std::abs(x - t) < 0.1; })) continue;
      ++used;
      EXPECT_LT(schl::max_diff(schl::eval(r, x) * schl::eval_inverse(r, x), ComplexMatrix::identity(3)), 1e-9);
      EXPECT_LT(fixtures::rel_err(schl::det(schl::eval(r, x)), schl::det_formula(r, x)), 1e-10);
    }
  }
}

TEST(Eval, GaugeInvariance) {
  std::mt19937_64 rng(15);
  auto r = schl::random_realization(rng, 3, 2);
  auto g = r;
  const cplx lambda(0.7, -2.1);
  for (std::size_t i = 0; i < 3; ++i) {
    g.C_P(i, 1) *= lambda;
    g.B_P(1, i) /= lambda;
  }
  for (const cplx x : {cplx(3.0, 1.0), cplx(-2.0, 0.5), cplx(0.1, 4.0)})
    EXPECT_LT(schl::max_diff(schl::eval(r, x), schl::eval(g, x)), 1e-10);
}

TEST(Eval, ContourResidueIsSemiResidueProduct) {
  std::mt19937_64 rng(16);
  const auto r = schl::random_realization(rng, 3, 2);
  for (std::size_t j = 0; j < 2; ++j) {
    const auto circle = schl::isolating_circle(r.pz.points(), j, 0.3, 64);
    const auto res = schl::contour_integral(circle, [&](cplx x) { return schl::eval(r, x); });
    EXPECT_LT(schl::max_diff(res, r.C_P.col(j) * r.B_P.row(j)), 1e-9);
  }
}

TEST(Validate, DInstanceExact) {
  const auto rep = schl::validate(fixtures::d_instance());
  EXPECT_TRUE(rep.passed());
  EXPECT_LT(rep.max_value(), 1e-14);
  EXPECT_EQ(rep.residuals.size(), 6u);
}

TEST(Validate, SignFlippedRightPoleSemiResidues) {
  std::mt19937_64 rng(17);
  auto r = schl::random_realization(rng, 3, 2);
  r.B_P = -r.B_P;
  const auto rep = schl::validate(r);
  EXPECT_FALSE(rep.passed());
  EXPECT_NEAR(rep.value("exchange_b"), 2.0 * r.B_P.max_norm(), 1e-10);
}

TEST(Validate, RandomSizes) {
  std::mt19937_64 rng(18);
  for (std::size_t m = 1; m <= 4; ++m)
    for (std::size_t s = 1; s <= 4; ++s) EXPECT_TRUE(schl::validate(schl::random_realization(rng, m, s)).passed());
}

TEST(PoleZeroData, RejectsCoincidentPoints) {
  EXPECT_EQ(kind_of([] { schl::PoleZeroData({0.0, 1.0}, {1.0, 2.0}); }), ErrorKind::InvalidPoints);
  EXPECT_EQ(kind_of([] { schl::PoleZeroData({0.0}, {1.0, 2.0}); }), ErrorKind::InvalidPoints);
}

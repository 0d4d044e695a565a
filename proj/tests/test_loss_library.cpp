// Copyright 2026 The divlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "divlab/divlab.hpp"
#include "oracles.hpp"

namespace {

using namespace divlab;

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kIoError;
}

TEST(Conjugate, ClosedFormExamples) {
  EXPECT_NEAR(conjugate_eval(LossFn::exponential(1.0), 1.0), -1.0, 1e-15);
  EXPECT_EQ(conjugate_eval(LossFn::exponential(1.0), 0.0), 0.0);
  EXPECT_NEAR(conjugate_eval(UtilityFn::exp_shift(), 1.0), 0.0, 1e-15);
  EXPECT_EQ(conjugate_eval(UtilityFn::identity(), 1.0), 0.0);
  EXPECT_TRUE(is_pos_inf(conjugate_eval(UtilityFn::identity(), 2.0)));
  EXPECT_EQ(code_of([] { conjugate_eval(LossFn::exponential(1.0), -0.5); }), ErrorCode::kNegativeArgument);
}

// The closed-form conjugates agree with sup_x (xy - f(x)) on a dense grid.
struct ConjCase {
  const char* name;
  std::function<double(double)> fn;
  std::function<double(double)> conj;
};

TEST(Conjugate, MatchesGridOracle) {
  const LossFn e07 = LossFn::exponential(0.7), pp2 = LossFn::power_plus(2.0), pp3 = LossFn::power_plus(3.0);
  const UtilityFn es = UtilityFn::exp_shift(), h2 = UtilityFn::hinge_power(2.0), h3 = UtilityFn::hinge_power(3.0);
  const std::vector<ConjCase> cases = {
      {"exponential(0.7)", [&](double x) { return e07(x); }, [&](double y) { return e07.conjugate(y); }},
      {"power_plus(2)", [&](double x) { return pp2(x); }, [&](double y) { return pp2.conjugate(y); }},
      {"power_plus(3)", [&](double x) { return pp3(x); }, [&](double y) { return pp3.conjugate(y); }},
      {"exp_shift", [&](double x) { return es(x); }, [&](double y) { return es.conjugate(y); }},
      {"hinge_power(2)", [&](double x) { return h2(x); }, [&](double y) { return h2.conjugate(y); }},
      {"hinge_power(3)", [&](double x) { return h3(x); }, [&](double y) { return h3.conjugate(y); }},
  };
  for (const auto& c : cases) {
    for (double y : {0.05, 0.3, 1.0, 1.7, 3.0}) {
      const double ref = oracle::grid_conjugate([&](long double x) { return c.fn(static_cast<double>(x)); }, y);
      EXPECT_NEAR(c.conj(y), ref, 1e-6 * std::max(1.0, std::abs(ref))) << c.name << " at y=" << y;
    }
  }
}

TEST(Conjugate, ZeroIsMinusInfimum) {
  EXPECT_NEAR(LossFn::power_plus(2.0).conjugate(0.0), 0.0, 1e-15);
  EXPECT_NEAR(UtilityFn::hinge_power(2.0).conjugate(0.0), 0.5, 1e-15);  // inf phi = -1/p
  EXPECT_EQ(UtilityFn::exp_shift().conjugate(0.0), 0.0);
}

TEST(Custom, TabulatedExponentialTracksClosedForm) {
  const auto exact = LossFn::exponential(1.0);
  const auto table = LossFn::custom(tabulate([](double x) { return std::exp(x); }, 20.0, 400));
  for (double x : {-3.0, -0.5, 0.0, 0.25, 2.0}) EXPECT_NEAR(table(x), exact(x), 2e-3 * exact(x));
  for (double y : {0.2, 1.0, 2.5}) EXPECT_NEAR(table.conjugate(y), exact.conjugate(y), 1e-3);
  EXPECT_TRUE(is_pos_inf(table.conjugate(1e12)));
}

TEST(Custom, ValidationRejectsBadShapes) {
  // Not convex.
  EXPECT_EQ(code_of([] { LossFn::custom(PiecewiseLinear::from_knots({-1, 0, 1}, {0.5, 1, 1.2})); }),
            ErrorCode::kInvalidFunction);
  // Decreasing.
  EXPECT_EQ(code_of([] { LossFn::custom(PiecewiseLinear::from_knots({-1, 0, 1}, {2, 1, 3})); }),
            ErrorCode::kInvalidFunction);
  // l(0) != 1.
  EXPECT_EQ(code_of([] { LossFn::custom(PiecewiseLinear::from_knots({-1, 0, 1}, {0.5, 1.5, 3})); }),
            ErrorCode::kInvalidFunction);
  // phi*(1) != 0: phi(x) = x + 1 never touches the diagonal.
  EXPECT_EQ(code_of([] { UtilityFn::custom(PiecewiseLinear::from_knots({-1, 0, 1}, {0, 1, 2})); }),
            ErrorCode::kInvalidFunction);
  EXPECT_EQ(code_of([] { LossFn::power_plus(0.5); }), ErrorCode::kInvalidSpec);
  EXPECT_EQ(code_of([] { LossFn::exponential(0.0); }), ErrorCode::kInvalidSpec);
  EXPECT_EQ(code_of([] { UtilityFn::hinge_power(1.0); }), ErrorCode::kInvalidSpec);
}

TEST(Custom, HingeKnotsAreAValidUtility) {
  // max(x, -1) touches the diagonal on [-1, inf), so phi*(1) = 0.
  const auto u = UtilityFn::custom(PiecewiseLinear::from_knots({-3, -1, 0, 2}, {-1, -1, 0, 2}));
  EXPECT_NEAR(u.conjugate(1.0), 0.0, 1e-12);
  EXPECT_NEAR(u.conjugate(0.5), 0.5, 1e-12);
  EXPECT_TRUE(is_pos_inf(u.conjugate(1.5)));
}

TEST(Derivatives, MatchCentralDifferences) {
  const LossFn pp2 = LossFn::power_plus(2.0), e2 = LossFn::exponential(2.0);
  const UtilityFn h3 = UtilityFn::hinge_power(3.0), es = UtilityFn::exp_shift();
  for (double x : {-0.6, -0.1, 0.3, 1.4}) {
    EXPECT_NEAR(pp2.derivative(x), oracle::derivative([&](double t) { return pp2(t); }, x), 1e-6);
    EXPECT_NEAR(e2.derivative(x), oracle::derivative([&](double t) { return e2(t); }, x), 1e-6);
    EXPECT_NEAR(h3.derivative(x), oracle::derivative([&](double t) { return h3(t); }, x), 1e-6);
    EXPECT_NEAR(es.derivative(x), oracle::derivative([&](double t) { return es(t); }, x), 1e-6);
  }
}

TEST(Tangency, PointTouchesDiagonal) {
  for (const auto& u : {UtilityFn::exp_shift(), UtilityFn::identity(), UtilityFn::hinge_power(2.5)}) {
    const double x0 = u.tangency_point();
    EXPECT_NEAR(u(x0), x0, 1e-15);
    EXPECT_NEAR(u.derivative(x0), 1.0, 1e-15);
  }
}

TEST(LogSubadditivity, ExponentialIsExact) {
  const auto grid = linear_grid(-3.0, 3.0, 61);
  const auto v = check_log_subadditive(LossFn::exponential(1.3), grid);
  EXPECT_TRUE(v.passes);
  EXPECT_NEAR(v.worst_violation, 0.0, 1e-14);
}

TEST(LogSubadditivity, PowerPlusFails) {
  const auto grid = linear_grid(-3.0, 3.0, 61);
  const auto v = check_log_subadditive(LossFn::power_plus(2.0), grid);
  EXPECT_FALSE(v.passes);
  EXPECT_GT(v.worst_violation, 0.1);
  // The zero of the loss is what breaks it: l(x) l(y) = 0 while l(x + y) > 0.
  const auto pp2 = LossFn::power_plus(2.0);
  EXPECT_EQ(pp2(-1.0), 0.0);
  EXPECT_GT(pp2(-1.0 + 1.0), pp2(-1.0) * pp2(1.0));
}

TEST(LogSubadditivity, ZeroGridIsTrivial) {
  const std::vector<double> grid{0.0};
  EXPECT_TRUE(check_log_subadditive(LossFn::power_plus(2.0), grid).passes);
}

TEST(OceInequality, EntropicConjugateIsExact) {
  const auto grid = linear_grid(0.0, 4.0, 41);
  const auto v = check_oce_inequality(UtilityFn::exp_shift(), grid);
  EXPECT_EQ(v.direction, OceInequalityVerdict::Direction::kBoth);
  EXPECT_LE(v.max_defect, 1e-12);
  EXPECT_GE(v.min_defect, -1e-12);
}

TEST(OceInequality, UnitArgumentIsEquality) {
  const auto h2 = UtilityFn::hinge_power(2.0);
  for (double y : {0.0, 0.5, 2.0, 3.5}) {
    EXPECT_NEAR(y * h2.conjugate(1.0) + 1.0 * h2.conjugate(y), h2.conjugate(y), 1e-15);
  }
}

TEST(OceInequality, QuadraticConjugateFailsBothDirections) {
  // hinge_power(2) has phi*(y) = (y - 1)^2 / 2.
  const auto h2 = UtilityFn::hinge_power(2.0);
  EXPECT_NEAR(2.0 * h2.conjugate(2.0) + 2.0 * h2.conjugate(2.0), 2.0, 1e-15);
  EXPECT_NEAR(h2.conjugate(4.0), 4.5, 1e-15);
  const auto grid = linear_grid(0.0, 4.0, 41);
  const auto v = check_oce_inequality(h2, grid);
  EXPECT_EQ(v.direction, OceInequalityVerdict::Direction::kNeither);
  EXPECT_GT(v.max_defect, 0.0);
  EXPECT_LT(v.min_defect, 0.0);
}

TEST(OceInequality, RejectsNegativeGrid) {
  const std::vector<double> grid{-1.0, 1.0};
  EXPECT_EQ(code_of([&] { check_oce_inequality(UtilityFn::exp_shift(), grid); }), ErrorCode::kNegativeArgument);
}

}  // namespace

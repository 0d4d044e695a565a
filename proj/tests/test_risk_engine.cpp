// Copyright 2026 The divlab Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "divlab/divlab.hpp"
#include "oracles.hpp"

namespace {

using namespace divlab;

const double kLogMeanE = std::log((1.0 + std::exp(1.0)) / 2.0);  // 0.620115...

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kIoError;
}

Law law(std::vector<double> v, std::vector<double> w) { return make_law(v, w); }

Law random_law(Sampler& rng, std::size_t n) {
  const auto v = rng.grid_values(n);
  const auto w = rng.dirichlet(n);
  return make_law_from_masses(v, w);
}

std::vector<RiskSpec> law_based_specs() {
  return {RiskSpec::entropic(1.0),
          RiskSpec::entropic(2.5),
          RiskSpec::shortfall(LossFn::exponential(1.0)),
          RiskSpec::shortfall(LossFn::power_plus(2.0)),
          RiskSpec::shortfall(LossFn::power_plus(3.0)),
          RiskSpec::oce(UtilityFn::exp_shift()),
          RiskSpec::oce(UtilityFn::hinge_power(2.0)),
          RiskSpec::oce(UtilityFn::hinge_power(3.0)),
          RiskSpec::expectation(),
          RiskSpec::esssup()};
}

std::string describe(const RiskSpec& s) { return io::to_json(s).dump(); }

TEST(Entropic, Examples) {
  EXPECT_DOUBLE_EQ(rho_entropic(point_mass(0.7), 1.3), 0.7);
  const auto u01 = law({0, 1}, {0.5, 0.5});
  EXPECT_NEAR(rho_entropic(u01, 1.0), kLogMeanE, 1e-15);
  EXPECT_NEAR(rho_entropic(u01.shifted(1.0), 1.0), kLogMeanE + 1.0, 1e-15);
  EXPECT_NEAR(kLogMeanE, 0.620115, 1e-6);
}

TEST(Entropic, LargeValuesDoNotOverflow) {
  const auto m = law({800.0, 801.0}, {0.5, 0.5});
  EXPECT_NEAR(rho_entropic(m, 1.0), 800.0 + kLogMeanE, 1e-12);
}

TEST(Shortfall, Examples) {
  const auto exp1 = LossFn::exponential(1.0);
  EXPECT_NEAR(rho_shortfall(point_mass(-0.4), LossFn::power_plus(2.0)), -0.4, 1e-10);
  const auto u01 = law({0, 1}, {0.5, 0.5});
  EXPECT_NEAR(rho_shortfall(u01, exp1), kLogMeanE, 1e-10);
  EXPECT_NEAR(rho_shortfall(u01.shifted(1.0), exp1), kLogMeanE + 1.0, 1e-10);
}

TEST(Shortfall, ConstraintIsMetAtTheRoot) {
  Sampler rng(21);
  const auto pp2 = LossFn::power_plus(2.0);
  for (int t = 0; t < 50; ++t) {
    const auto m = random_law(rng, rng.between(1, 6));
    const double c = rho_shortfall(m, pp2);
    EXPECT_LE(expected_loss(m, pp2, c), 1.0 + 1e-12);
    EXPECT_GT(expected_loss(m, pp2, c - 1e-9), 1.0 - 1e-6);
  }
}

TEST(Oce, Examples) {
  const auto es = UtilityFn::exp_shift();
  EXPECT_NEAR(rho_oce(point_mass(1.25), es), 1.25, 1e-10);
  const auto u01 = law({0, 1}, {0.5, 0.5});
  const auto sol = solve_oce(u01, es);
  EXPECT_NEAR(sol.value, kLogMeanE, 1e-10);
  EXPECT_NEAR(sol.shift, 1.0 - kLogMeanE, 1e-5);
  const auto m = law({-1, 0.5, 2}, {0.2, 0.5, 0.3});
  EXPECT_NEAR(rho_oce(m, UtilityFn::identity()), m.mean(), 1e-10);
}

TEST(Coherent, Examples) {
  const auto mu = uniform_dist({"a", "b"});
  const RandomVariable f{{0.0, 1.0}};
  EXPECT_NEAR(rho_coherent(mu, f, {{1.0, 1.0}}), 0.5, 1e-15);
  EXPECT_NEAR(rho_coherent(mu, f, {{2.0, 0.0}, {0.0, 2.0}}), 1.0, 1e-15);
  EXPECT_NEAR(rho_coherent(mu, RandomVariable{{3.0, 3.0}}, {{2.0, 0.0}, {0.5, 1.5}}), 3.0, 1e-15);
  EXPECT_EQ(rho_coherent(mu, RandomVariable{{0.0, 0.0}}, {{2.0, 0.0}, {0.0, 2.0}}), 0.0);
}

TEST(Coherent, Errors) {
  const auto mu = uniform_dist({"a", "b"});
  EXPECT_EQ(code_of([&] { RiskSpec::coherent({{1.0, 0.5}}, mu); }), ErrorCode::kInvalidDensity);
  EXPECT_EQ(code_of([&] { RiskSpec::coherent({{3.0, -1.0}}, mu); }), ErrorCode::kInvalidDensity);
  EXPECT_EQ(code_of([&] { RiskSpec::coherent({}); }), ErrorCode::kInvalidDensity);
  const auto spec = RiskSpec::coherent({{2.0, 0.0}});
  EXPECT_EQ(code_of([&] { evaluate(spec, point_mass(0.0)); }), ErrorCode::kUnsupported);
  EXPECT_EQ(code_of([&] { rho_lifted(spec, uniform_dist({"a", "b", "c"}), RandomVariable{{0, 0, 0}}); }),
            ErrorCode::kInvalidDensity);
}

TEST(Families, MatchIndependentOracles) {
  Sampler rng(99);
  for (int t = 0; t < 100; ++t) {
    const auto m = random_law(rng, rng.between(1, 7));
    const auto& x = m.values();
    const auto& w = m.weights();
    for (double eta : {0.5, 1.0, 3.0}) {
      EXPECT_NEAR(rho_entropic(m, eta), oracle::entropic(x, w, eta), 1e-12);
    }
    for (double p : {1.0, 2.0, 3.0}) {
      const auto ref = oracle::shortfall(x, w, [p](long double v) { return std::pow(std::max(1.0L + v, 0.0L), p); });
      EXPECT_NEAR(rho_shortfall(m, LossFn::power_plus(p)), ref, 1e-9) << "p=" << p;
    }
    EXPECT_NEAR(rho_shortfall(m, LossFn::exponential(0.6)),
                oracle::shortfall(x, w, [](long double v) { return std::exp(0.6L * v); }), 1e-9);
    for (double p : {2.0, 3.0}) {
      const auto ref = oracle::oce(x, w, [p](long double v) { return (std::pow(std::max(1.0L + v, 0.0L), p) - 1.0L) / p; });
      EXPECT_NEAR(rho_oce(m, UtilityFn::hinge_power(p)), ref, 1e-9) << "p=" << p;
    }
    EXPECT_NEAR(rho_oce(m, UtilityFn::exp_shift()), oracle::oce(x, w, [](long double v) { return std::exp(v - 1.0L); }),
                1e-9);
  }
}

TEST(Families, CustomTabulatedLossTracksClosedForm) {
  const auto spec_exact = RiskSpec::shortfall(LossFn::power_plus(2.0));
  const auto spec_table = RiskSpec::shortfall(
      LossFn::custom(tabulate([](double x) { return std::pow(std::max(1.0 + x, 0.0), 2.0); }, 20.0, 400)));
  Sampler rng(4);
  for (int t = 0; t < 20; ++t) {
    const auto m = random_law(rng, 4);
    EXPECT_NEAR(evaluate(spec_table, m), evaluate(spec_exact, m), 2e-3);
  }
}

// Law-invariant convex risk measure axioms, checked on random pairs of laws
// realized on a common space.
TEST(Axioms, MonotoneCashAdditiveConvex) {
  Sampler rng(7);
  for (const auto& spec : law_based_specs()) {
    for (int t = 0; t < 60; ++t) {
      const std::size_t n = rng.between(1, 6);
      const auto mu = make_dist_from_masses(index_labels(n), rng.dirichlet(n));
      RandomVariable f{rng.grid_values(n)}, g{rng.grid_values(n)}, h = f;
      for (std::size_t i = 0; i < n; ++i) h.values[i] = std::max(f.values[i], g.values[i]);
      const double rf = rho_lifted(spec, mu, f), rg = rho_lifted(spec, mu, g), rh = rho_lifted(spec, mu, h);
      EXPECT_LE(rf, rh + 1e-9) << describe(spec);
      RandomVariable shifted = f;
      for (double& v : shifted.values) v += 0.35;
      EXPECT_NEAR(rho_lifted(spec, mu, shifted), rf + 0.35, 1e-9) << describe(spec);
      const double lam = rng.uniform();
      RandomVariable mix = f;
      for (std::size_t i = 0; i < n; ++i) mix.values[i] = lam * f.values[i] + (1 - lam) * g.values[i];
      EXPECT_LE(rho_lifted(spec, mu, mix), lam * rf + (1 - lam) * rg + 1e-9) << describe(spec);
      EXPECT_NEAR(rho_lifted(spec, mu, RandomVariable{std::vector<double>(n, 0.0)}), 0.0, 1e-10) << describe(spec);
    }
  }
}

TEST(Lifted, ConstantAndLawInvariance) {
  const auto mu = make_dist({"a", "b", "c"}, {0.2, 0.3, 0.5});
  for (const auto& spec : law_based_specs()) {
    EXPECT_NEAR(rho_lifted(spec, mu, RandomVariable{{-1.5, -1.5, -1.5}}), -1.5, 1e-10) << describe(spec);
    // Same law realized on a different space.
    const auto nu = make_dist({"x", "y"}, {0.5, 0.5});
    EXPECT_NEAR(rho_lifted(spec, mu, RandomVariable{{1.0, 1.0, -2.0}}), rho_lifted(spec, nu, RandomVariable{{-2.0, 1.0}}),
                1e-14)
        << describe(spec);
  }
  const auto u = uniform_dist({"a", "b"});
  EXPECT_NEAR(rho_lifted(RiskSpec::entropic(1.0), u, RandomVariable{{0.0, 1.0}}), 0.620115, 1e-6);
  EXPECT_EQ(code_of([&] { rho_lifted(RiskSpec::entropic(1.0), u, RandomVariable{{0.0}}); }), ErrorCode::kLengthMismatch);
}

TEST(Gradient, MatchesFiniteDifferences) {
  Sampler rng(13);
  const std::vector<RiskSpec> smooth = {RiskSpec::entropic(1.7), RiskSpec::shortfall(LossFn::exponential(1.0)),
                                        RiskSpec::shortfall(LossFn::power_plus(3.0)),
                                        RiskSpec::oce(UtilityFn::exp_shift()), RiskSpec::oce(UtilityFn::hinge_power(3.0)),
                                        RiskSpec::expectation()};
  for (const auto& spec : smooth) {
    for (int t = 0; t < 10; ++t) {
      const std::size_t n = rng.between(2, 5);
      const auto mu = make_dist_from_masses(index_labels(n), rng.dirichlet(n));
      RandomVariable f{std::vector<double>(n)};
      for (double& v : f.values) v = 2.0 * rng.uniform() - 1.0;
      const auto g = lifted_gradient(spec, mu, f);
      for (std::size_t i = 0; i < n; ++i) {
        const double fd = oracle::derivative(
            [&](double h) {
              RandomVariable fh = f;
              fh.values[i] += h;
              return rho_lifted(spec, mu, fh);
            },
            0.0, 1e-5);
        EXPECT_NEAR(g[i], fd, 1e-5) << describe(spec) << " atom " << i;
      }
    }
  }
}

TEST(Gradient, PiecewiseFamiliesPickTheActiveFace) {
  const auto mu = make_dist({"a", "b", "c"}, {0.2, 0.3, 0.5});
  const RandomVariable f{{0.0, 2.0, 1.0}};
  EXPECT_EQ(lifted_gradient(RiskSpec::esssup(), mu, f), (std::vector<double>{0.0, 1.0, 0.0}));
  const auto coh = RiskSpec::coherent({{1.0, 1.0, 1.0}, {0.0, 10.0 / 3.0, 0.0}});
  const auto g = lifted_gradient(coh, mu, f);
  EXPECT_NEAR(g[1], 1.0, 1e-15);
}

TEST(Conditional, TrivialFinestAndIndependentBlocks) {
  const auto spec = RiskSpec::entropic(1.0);
  const auto mu = make_dist({"1", "2", "3", "4"}, {0.1, 0.2, 0.3, 0.4});
  const RandomVariable x{{0.5, -1.0, 2.0, 0.0}};
  const auto triv = rho_conditional(spec, mu, x, Partition::trivial(mu.atoms()));
  ASSERT_EQ(triv.blocks.size(), 1u);
  EXPECT_NEAR(triv.blocks[0].value, rho_lifted(spec, mu, x), 1e-15);
  const auto fine = rho_conditional(spec, mu, x, Partition::finest(mu.atoms()));
  for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(fine.blocks[i].value, x.values[i], 1e-15);
  EXPECT_NEAR(fine.max_value(), 2.0, 1e-15);

  // Product measure: the value on block x is rho of f(x, .) under the second marginal.
  const auto a = make_dist({"0", "1"}, {0.3, 0.7}), b = make_dist({"0", "1", "2"}, {0.2, 0.5, 0.3});
  const auto joint = product(a, b).flatten();
  std::vector<double> fv{0.1, -0.4, 1.2, 0.9, 0.0, -1.1};
  Partition part;
  for (std::size_t i = 0; i < 2; ++i) {
    part.blocks.push_back({});
    for (std::size_t j = 0; j < 3; ++j) part.blocks.back().push_back(joint.atom(i * 3 + j));
  }
  const auto cond = rho_conditional(spec, joint, RandomVariable{fv}, part);
  for (std::size_t i = 0; i < 2; ++i) {
    const RandomVariable row{{fv[i * 3], fv[i * 3 + 1], fv[i * 3 + 2]}};
    EXPECT_NEAR(cond.blocks[i].value, rho_lifted(spec, b, row), 1e-14);
  }
}

TEST(Acceptance, Membership) {
  const auto spec = RiskSpec::entropic(1.0);
  EXPECT_TRUE(acceptance_member(spec, point_mass(0.0)));
  EXPECT_FALSE(acceptance_member(spec, point_mass(1.0)));
  const auto m = law({-1.0, 0.5}, {0.5, 0.5});
  EXPECT_NEAR(evaluate(spec, m), 0.00826609742280713, 1e-15);
  EXPECT_FALSE(acceptance_member(spec, m, 1e-9));
  EXPECT_TRUE(acceptance_member(spec, m, 1e-2));
}

TEST(Numerics, TighterRootToleranceIsHonored) {
  auto spec = RiskSpec::shortfall(LossFn::power_plus(2.0));
  spec.numerics().root_tol = 1e-4;
  const auto m = law({-0.5, 0.3, 1.1}, {0.3, 0.3, 0.4});
  const double coarse = evaluate(spec, m);
  const double fine = evaluate(RiskSpec::shortfall(LossFn::power_plus(2.0)), m);
  EXPECT_NEAR(coarse, fine, 1e-4);
  EXPECT_EQ(family_name(RiskSpec::Family::kShortfall), "shortfall");
}

}  // namespace

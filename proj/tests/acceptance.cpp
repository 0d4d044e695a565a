// Copyright 2026 The divlab Authors
// SPDX-License-Identifier: Apache-2.0

// Prints one PASS/FAIL line per acceptance criterion and exits nonzero if any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "divlab/divlab.hpp"

namespace {

using namespace divlab;

struct Outcome {
  bool ok = true;
  std::ostringstream detail;

  void require(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      detail << " [failed: " << what << "]";
    }
  }
};

struct Check {
  Target target;
  std::optional<RiskSpec> risk;
  std::optional<DivergenceSpec> div;
  std::size_t trials;
  std::uint64_t seed;
  std::size_t E = 3, F = 3;
};

SearchResult run(const Check& c) {
  SearchProblem p;
  p.target = c.target;
  p.risk = c.risk;
  p.divergence = c.div;
  SearchBudget b;
  b.trials = c.trials;
  b.seed = c.seed;
  b.E = c.E;
  b.F = c.F;
  return counterexample_search(p, b);
}

// Worst score >= -tol over at least one informative trial.
void expect_bound(Outcome& o, const std::string& label, const SearchResult& r, double tol) {
  const bool informative = r.worst.has_value() && !r.worst->is_vacuous();
  const double worst = informative ? r.worst->numeric() : std::nan("");
  o.detail << " " << label << ": worst " << worst << " (" << r.trials - r.vacuous << "/" << r.trials << ")";
  o.require(informative && worst >= -tol, label + " bound " + std::to_string(tol));
}

std::string spec_label(const RiskSpec& s) { return io::to_json(s).dump(); }
std::string div_label(const DivergenceSpec& d) { return io::to_json(d).dump(); }

Outcome ac1() {
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = run({Target::kChainRule, {}, DivergenceSpec::relative_entropy(), 10000, 101, 6, 6});
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  expect_bound(o, "chain rule", r, 1e-9);
  o.detail << " time " << secs << " s";
  o.require(secs <= 10.0, "runtime <= 10 s");
  return o;
}

Outcome ac2() {
  Outcome o;
  for (const auto& d : {DivergenceSpec::relative_entropy(), DivergenceSpec::phi_star(UtilityFn::exp_shift()),
                        DivergenceSpec::shortfall(LossFn::exponential(1.0))}) {
    expect_bound(o, div_label(d) + " dpi", run({Target::kDpi, {}, d, 1000, 201, 5, 4}), 1e-8);
    expect_bound(o, "bijection", run({Target::kDpiBijection, {}, d, 1000, 202, 5, 4}), 1e-9);
  }
  return o;
}

Outcome ac3() {
  Outcome o;
  for (const auto& s : {RiskSpec::entropic(1.0), RiskSpec::entropic(2.5), RiskSpec::shortfall(LossFn::exponential(1.0)),
                        RiskSpec::shortfall(LossFn::power_plus(2.0)), RiskSpec::oce(UtilityFn::exp_shift()),
                        RiskSpec::oce(UtilityFn::hinge_power(2.0))}) {
    expect_bound(o, spec_label(s), run({Target::kDuality, s, {}, 200, 301, 12, 1}), 1e-5);
  }
  return o;
}

Outcome ac4() {
  Outcome o;
  Sampler rng(401);
  double risk_err = 0.0, oce_err = 0.0, div_err = 0.0;
  for (int t = 0; t < 500; ++t) {
    const std::size_t n = rng.between(1, 8);
    const Law law = make_law_from_masses(rng.grid_values(n), rng.dirichlet(n));
    const double eta = 0.25 + 3.0 * rng.uniform();
    risk_err = std::max(risk_err, std::abs(evaluate(RiskSpec::shortfall(LossFn::exponential(eta)), law) -
                                           evaluate(RiskSpec::entropic(eta), law)));
    oce_err = std::max(oce_err, std::abs(evaluate(RiskSpec::oce(UtilityFn::exp_shift()), law) -
                                         evaluate(RiskSpec::entropic(1.0), law)));
    const auto atoms = index_labels(n);
    const auto nu = make_dist_from_masses(atoms, rng.dirichlet(n));
    const auto mu = make_dist_from_masses(atoms, rng.dirichlet(n));
    div_err = std::max(div_err, std::abs(evaluate_divergence(DivergenceSpec::shortfall(LossFn::exponential(1.0)), nu, mu) -
                                         evaluate_divergence(DivergenceSpec::relative_entropy(), nu, mu)));
  }
  o.detail << " shortfall/entropic " << risk_err << ", oce/entropic " << oce_err << ", divergence " << div_err;
  o.require(risk_err <= 1e-8, "shortfall(exp) = entropic");
  o.require(oce_err <= 1e-8, "oce(exp_shift) = entropic(1)");
  o.require(div_err <= 1e-6, "shortfall divergence = relative entropy");
  return o;
}

Outcome ac5() {
  Outcome o;
  for (const auto& s : {RiskSpec::entropic(1.0), RiskSpec::expectation(), RiskSpec::esssup()}) {
    expect_bound(o, spec_label(s), run({Target::kTimeConsistency, s, {}, 2000, 501, 4, 4}), 1e-8);
  }
  return o;
}

Outcome ac6() {
  Outcome o;
  SearchProblem p;
  p.target = Target::kAcceptance;
  p.risk = RiskSpec::shortfall(LossFn::power_plus(2.0));
  SearchBudget b;
  b.trials = 100000;
  b.seed = 42;
  const auto r = counterexample_search(p, b);
  const bool found = r.worst.has_value() && r.worst->is_finite() && r.worst->value < -1e-4;
  o.detail << " worst " << (r.worst ? r.worst->numeric() : std::nan("")) << " at trial "
           << (r.worst_trial ? static_cast<long long>(*r.worst_trial) : -1LL);
  o.require(found, "violation below -1e-4");
  if (found) {
    const auto rep = replay_trial(p, b, *r.worst_trial);
    o.require(rep.score == *r.worst, "replayed score");
    o.require(rep.instance == r.worst_instance, "replayed instance");
    o.require(rep.seed == trial_seed(b.seed, *r.worst_trial), "trial seed");
    o.detail << ", replay seed " << rep.seed;
  }
  return o;
}

Outcome ac7() {
  Outcome o;
  const auto s = RiskSpec::entropic(1.0);
  expect_bound(o, "shift convexity", run({Target::kShiftConvexity, s, {}, 500, 701}), 1e-8);
  expect_bound(o, "property S", run({Target::kPropertyS, s, {}, 500, 702}), 1e-8);
  return o;
}

Outcome ac8() {
  Outcome o;
  for (const auto& d : {DivergenceSpec::relative_entropy(), DivergenceSpec::phi_star(UtilityFn::exp_shift())}) {
    expect_bound(o, div_label(d), run({Target::kWeakSuperadditivity, {}, d, 2000, 801}), 1e-8);
  }
  expect_bound(o, "mixture convexity", run({Target::kMixtureConvexity, RiskSpec::entropic(1.0), {}, 500, 802}), 1e-8);
  return o;
}

Outcome ac9() {
  Outcome o;
  expect_bound(o, "integral lemma", run({Target::kIntegralLemma, RiskSpec::entropic(1.0), {}, 200, 901, 4, 4}), 1e-5);
  return o;
}

Outcome ac10() {
  Outcome o;
  for (const auto& u : {UtilityFn::exp_shift(), UtilityFn::hinge_power(2.0)}) {
    const auto d = DivergenceSpec::phi_star(u);
    expect_bound(o, div_label(d), run({Target::kJointConvexity, {}, d, 1000, 1001, 5}), 1e-8);
  }
  for (const auto& s : {RiskSpec::oce(UtilityFn::exp_shift()), RiskSpec::oce(UtilityFn::hinge_power(2.0)),
                        RiskSpec::entropic(1.0)}) {
    expect_bound(o, spec_label(s) + " concavity", run({Target::kRhoConcavity, s, {}, 1000, 1002, 5}), 1e-8);
  }
  return o;
}

Outcome ac11() {
  Outcome o;
  for (const auto& d : {DivergenceSpec::relative_entropy(), DivergenceSpec::phi_star(UtilityFn::hinge_power(2.0))}) {
    expect_bound(o, div_label(d) + " matched", run({Target::kSufficiencyMatched, {}, d, 200, 1101, 6}), 1e-8);
    expect_bound(o, "unmatched", run({Target::kSufficiencyUnmatched, {}, d, 200, 1102, 6}), 1e-8);
  }
  return o;
}

std::string capture(const std::string& cmd, int& status) {
  FILE* pipe = popen(cmd.c_str(), "r");
  std::string out;
  if (!pipe) {
    status = -1;
    return out;
  }
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  const int st = pclose(pipe);
  status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return out;
}

Outcome ac12() {
  Outcome o;
  const std::string base = std::string(DIVLAB_CLI_PATH) + " verify --no-timestamp --config " + DIVLAB_CONFIG_DIR +
                           "/determinism.json";
  int s1 = 0, s2 = 0, s8 = 0;
  const auto a = capture("DIVLAB_THREADS=1 " + base, s1);
  const auto b = capture("DIVLAB_THREADS=1 " + base, s2);
  const auto c = capture("DIVLAB_THREADS=8 " + base, s8);
  o.detail << " " << a.size() << " bytes";
  o.require(s1 == 0 && s2 == 0 && s8 == 0, "exit status 0");
  o.require(!a.empty(), "nonempty report");
  o.require(a == b, "repeat run identical");
  o.require(a == c, "1 vs 8 workers identical");
  return o;
}

}  // namespace

int main() {
  using Fn = Outcome (*)();
  const std::pair<const char*, Fn> criteria[] = {{"AC1", ac1},   {"AC2", ac2},   {"AC3", ac3},  {"AC4", ac4},
                                                 {"AC5", ac5},   {"AC6", ac6},   {"AC7", ac7},  {"AC8", ac8},
                                                 {"AC9", ac9},   {"AC10", ac10}, {"AC11", ac11}, {"AC12", ac12}};
  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail << " exception: " << e.what();
    }
    if (!o.ok) ++failures;
    std::cout << (o.ok ? "PASS " : "FAIL ") << name << ":" << o.detail.str() << std::endl;
  }
  return failures == 0 ? 0 : 1;
}

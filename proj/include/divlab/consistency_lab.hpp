// Copyright 2026 The divlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Time-consistency and additivity experiments on finite product spaces:
// superadditivity and Weber gaps, conditional consistency gaps, acceptance
// set probes, the integral lemma and the composed-risk penalty identity, and
// a seeded randomized counterexample search.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "divlab/divergence_engine.hpp"
#include "divlab/error.hpp"
#include "divlab/extended_real.hpp"
#include "divlab/json_io.hpp"
#include "divlab/optimize.hpp"
#include "divlab/prob_core.hpp"
#include "divlab/risk_engine.hpp"
#include "divlab/sampler.hpp"

namespace divlab {

/// A pair of joints on a common E x F grid; mu_bar is the reference.
struct ProductInstance {
  JointDist mu_bar;
  JointDist nu_bar;
  bool product = false;
};

namespace detail {

inline std::vector<double> row_of(const JointDist& j, std::size_t i) {
  std::vector<double> r(j.n_cols());
  for (std::size_t k = 0; k < j.n_cols(); ++k) r[k] = j(i, k);
  return r;
}

inline std::vector<double> normalized(std::vector<double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  if (s <= 0.0) {
    std::fill(v.begin(), v.end(), 1.0 / static_cast<double>(v.size()));
  } else {
    for (double& x : v) x /= s;
  }
  return v;
}

inline double add_extended(double a, double b) { return (is_pos_inf(a) || is_pos_inf(b)) ? kInf : a + b; }

}  // namespace detail

/// sum_x nu(x) alpha(K^nu_x | K^mu_x), +inf when a nu-charged row is infinite.
inline double integrated_row_divergence(const DivergenceSpec& div, const JointDist& nu_bar, const JointDist& mu_bar) {
  if (!nu_bar.same_grid(mu_bar)) throw Error(ErrorCode::kSpaceMismatch, "joints live on different grids");
  double total = 0.0;
  for (std::size_t i = 0; i < nu_bar.n_rows(); ++i) {
    const auto nr = detail::row_of(nu_bar, i);
    double nu_x = 0.0;
    for (double v : nr) nu_x += v;
    if (nu_x <= 0.0) continue;
    const double a = divergence_value(div, detail::normalized(nr), detail::normalized(detail::row_of(mu_bar, i)));
    if (is_pos_inf(a)) return kInf;
    total += nu_x * a;
  }
  return total;
}

struct AdditivityTerms {
  double joint = 0.0;        // alpha(nu_bar | mu_bar)
  double marginal = 0.0;     // alpha(nu | mu)
  double conditional = 0.0;  // sum_x nu(x) alpha(K^nu_x | K^mu_x)
};

inline AdditivityTerms additivity_terms(const DivergenceSpec& div, const ProductInstance& inst) {
  if (!inst.nu_bar.same_grid(inst.mu_bar)) throw Error(ErrorCode::kSpaceMismatch, "joints live on different grids");
  AdditivityTerms t;
  t.joint = divergence_value(div, inst.nu_bar.weights(), inst.mu_bar.weights());
  t.marginal = divergence_value(div, inst.nu_bar.row_marginal().weights(), inst.mu_bar.row_marginal().weights());
  t.conditional = integrated_row_divergence(div, inst.nu_bar, inst.mu_bar);
  return t;
}

/// alpha(nu_bar|mu_bar) - alpha(nu|mu) - sum nu(x) alpha(K^nu_x|K^mu_x).
inline GapValue superadditivity_gap(const DivergenceSpec& div, const ProductInstance& inst) {
  const auto t = additivity_terms(div, inst);
  return extended_difference(t.joint, detail::add_extended(t.marginal, t.conditional));
}

/// alpha(nu_bar|mu_bar) - sum nu(x) alpha(K^nu_x|K^mu_x).
inline GapValue weak_consistency_gap(const DivergenceSpec& div, const ProductInstance& inst) {
  const auto t = additivity_terms(div, inst);
  return extended_difference(t.joint, t.conditional);
}

/// rho~(law of rho(X|G)) - rho_mu(X); nonnegative under acceptance consistency.
inline double consistency_gap(const RiskSpec& spec, const FiniteDist& mu, const RandomVariable& x,
                              const Partition& part) {
  const auto cond = rho_conditional(spec, mu, x, part);
  return evaluate(spec, cond.law()) - rho_lifted(spec, mu, x);
}

struct AcceptanceProbe {
  bool accepted = false;
  double risk = 0.0;  // rho~ of the constructed law
};

/// The law placing mass mu(x) K_x(y) at x + y; rows follow mu's support order.
inline Law shifted_mixture(const Law& mu, std::span<const Law> rows) {
  if (rows.size() != mu.size()) throw Error(ErrorCode::kLengthMismatch, "need one row law per support point");
  std::vector<double> v, w;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    for (std::size_t k = 0; k < rows[i].size(); ++k) {
      v.push_back(mu.values()[i] + rows[i].values()[k]);
      w.push_back(mu.weights()[i] * rows[i].weights()[k]);
    }
  }
  return make_law_from_masses(v, w);
}

inline void require_acceptable(const RiskSpec& spec, const Law& m, double tol, const char* what) {
  if (!acceptance_member(spec, m, tol)) {
    throw Error(ErrorCode::kPreconditionViolated, std::string(what) + " is not acceptable");
  }
}

/// mu in A and every K_x in A; reports whether the shifted mixture is in A.
inline AcceptanceProbe shift_convexity_probe(const RiskSpec& spec, const Law& mu, std::span<const Law> rows,
                                             double tol) {
  require_acceptable(spec, mu, tol, "mu");
  for (const auto& r : rows) require_acceptable(spec, r, tol, "kernel row");
  const double risk = evaluate(spec, shifted_mixture(mu, rows));
  return {risk <= tol, risk};
}

/// One atom of gamma in property (S): mass `weight` at (x, m).
struct ShiftedComponent {
  double x = 0.0;
  double weight = 0.0;
  Law m;
};

inline Law shifted_component_mixture(std::span<const ShiftedComponent> gamma) {
  std::vector<double> v, w;
  for (const auto& c : gamma) {
    for (std::size_t k = 0; k < c.m.size(); ++k) {
      v.push_back(c.x + c.m.values()[k]);
      w.push_back(c.weight * c.m.weights()[k]);
    }
  }
  return make_law_from_masses(v, w);
}

/// First marginal of gamma and every component law acceptable; reports
/// whether int gamma(dx, dm) m(. - x) is acceptable.
inline AcceptanceProbe property_s_probe(const RiskSpec& spec, std::span<const ShiftedComponent> gamma, double tol) {
  std::vector<double> xs, ws;
  for (const auto& c : gamma) {
    xs.push_back(c.x);
    ws.push_back(c.weight);
    require_acceptable(spec, c.m, tol, "component law");
  }
  require_acceptable(spec, make_law_from_masses(xs, ws), tol, "first marginal");
  const double risk = evaluate(spec, shifted_component_mixture(gamma));
  return {risk <= tol, risk};
}

/// Acceptable laws; reports whether their mixture is acceptable.
inline AcceptanceProbe mixture_convexity_probe(const RiskSpec& spec, std::span<const Law> laws,
                                               std::span<const double> coefficients, double tol) {
  for (const auto& m : laws) require_acceptable(spec, m, tol, "mixture component");
  const double risk = evaluate(spec, mixture(laws, coefficients));
  return {risk <= tol, risk};
}

struct LebesgueProbe {
  bool monotone = true;
  double final_error = 0.0;     // |rho(f_n) - rho(f)| at the last step
  double final_distance = 0.0;  // sup |f_n - f| at the last step
};

/// f_n = f + 2^-n g with g >= 0, n = 0..steps.
inline LebesgueProbe lebesgue_continuity_probe(const RiskSpec& spec, const FiniteDist& mu, const RandomVariable& f,
                                               const RandomVariable& g, int steps = 27) {
  require_compatible(mu, g);
  double gmax = 0.0;
  for (double v : g.values) {
    if (v < 0.0) throw Error(ErrorCode::kPreconditionViolated, "perturbation must be nonnegative");
    gmax = std::max(gmax, v);
  }
  const double limit = rho_lifted(spec, mu, f);
  LebesgueProbe out;
  double prev = kInf;
  for (int n = 0; n <= steps; ++n) {
    const double eps = std::ldexp(1.0, -n);
    RandomVariable fn = f;
    for (std::size_t i = 0; i < fn.size(); ++i) fn.values[i] += eps * g.values[i];
    const double v = rho_lifted(spec, mu, fn);
    if (v > prev + 1e-12) out.monotone = false;
    prev = v;
    out.final_error = std::abs(v - limit);
    out.final_distance = eps * gmax;
  }
  return out;
}

/// |sum nu(x) alpha(K^nu_x|K^mu_x) - sup_f {nu_bar(f) - sum nu(x) rho_{K^mu_x}(f(x,.))}|; the
/// left side uses the closed-form divergence and the supremum is solved row by row by the dual
/// solver.
inline double integral_lemma_gap(const RiskSpec& spec, const JointDist& nu_bar, const JointDist& mu_bar,
                                 const DualOptions& opt = {}) {
  const double left = integrated_row_divergence(induced_divergence(spec), nu_bar, mu_bar);
  const auto cols = nu_bar.col_atoms();
  double right = 0.0;
  for (std::size_t i = 0; i < nu_bar.n_rows(); ++i) {
    const auto nr = detail::row_of(nu_bar, i);
    double nu_x = 0.0;
    for (double v : nr) nu_x += v;
    if (nu_x <= 0.0) continue;
    const auto kn = make_dist_from_masses(cols, nr);
    const auto km = make_dist_from_masses(cols, detail::normalized(detail::row_of(mu_bar, i)));
    const double d = dual_divergence(spec, kn, km, opt).value;
    right = is_pos_inf(d) ? kInf : detail::add_extended(right, nu_x * d);
  }
  if (is_pos_inf(left) && is_pos_inf(right)) return 0.0;
  return std::abs(left - right);
}

/// Both sides of the composed-risk penalty identity.
struct KeyIdentitySides {
  double composed = 0.0;  // rho_mu(x -> rho_{K^mu_x}(f(x, .)))
  double penalized = 0.0; // sup over nu_bar of nu_bar(f) - sum nu alpha(K^nu_x|K^mu_x) - alpha(nu|mu)
};

/// f is indexed row-major over mu_bar's grid. The supremum is evaluated by
/// nested simplex maximization: inner over each K^nu_x, outer over nu.
inline KeyIdentitySides key_identity_sides(const RiskSpec& spec, const JointDist& mu_bar, const RandomVariable& f,
                                           int resolution = 24) {
  const std::size_t ne = mu_bar.n_rows(), nf = mu_bar.n_cols();
  if (f.size() != ne * nf) throw Error(ErrorCode::kLengthMismatch, "f must have one value per grid cell");
  const auto [mu, kmu] = disintegrate(mu_bar);
  const auto div = induced_divergence(spec);
  KeyIdentitySides out;
  std::vector<double> inner_risk(ne), inner_sup(ne);
  for (std::size_t i = 0; i < ne; ++i) {
    const auto row_mu = kmu.row_dist(i);
    std::vector<double> fx(f.values.begin() + static_cast<std::ptrdiff_t>(i * nf),
                           f.values.begin() + static_cast<std::ptrdiff_t>((i + 1) * nf));
    inner_risk[i] = rho_lifted(spec, row_mu, RandomVariable{fx});
    inner_sup[i] = optimize::simplex_maximize(
                       [&](const std::vector<double>& eta) {
                         double lin = 0.0;
                         for (std::size_t k = 0; k < nf; ++k) lin += eta[k] * fx[k];
                         return lin - divergence_value(div, eta, row_mu.weights());
                       },
                       nf, resolution)
                       .value;
  }
  out.composed = rho_lifted(spec, mu, RandomVariable{inner_risk});
  out.penalized = optimize::simplex_maximize(
                      [&](const std::vector<double>& nu) {
                        double lin = 0.0;
                        for (std::size_t i = 0; i < ne; ++i) {
                          if (nu[i] > 0.0) lin += nu[i] * inner_sup[i];
                        }
                        return lin - divergence_value(div, nu, mu.weights());
                      },
                      ne, resolution)
                      .value;
  return out;
}

inline double key_identity_gap(const RiskSpec& spec, const JointDist& mu_bar, const RandomVariable& f,
                               int resolution = 24) {
  const auto s = key_identity_sides(spec, mu_bar, f, resolution);
  return std::abs(s.composed - s.penalized);
}

/// max over nu of (nu(f) - alpha(nu|mu)); reproduces rho_mu(f) by duality.
inline double primal_from_divergence(const DivergenceSpec& div, const FiniteDist& mu, const RandomVariable& f,
                                     int resolution = 24) {
  require_compatible(mu, f);
  return optimize::simplex_maximize(
             [&](const std::vector<double>& nu) {
               double lin = 0.0;
               for (std::size_t i = 0; i < nu.size(); ++i) lin += nu[i] * f.values[i];
               return lin - divergence_value(div, nu, mu.weights());
             },
             mu.size(), resolution)
      .value;
}

// ---------------------------------------------------------------------------
// Randomized search.

enum class Target {
  kAcceptance,
  kRejection,
  kWeakAcceptance,
  kShiftConvexity,
  kTimeConsistency,
  kChainRule,
  kSuperadditivity,
  kSubadditivity,
  kWeakSuperadditivity,
  kDpi,
  kDpiBijection,
  kDuality,
  kIntegralLemma,
  kKeyIdentity,
  kSufficiencyMatched,
  kSufficiencyUnmatched,
  kJointConvexity,
  kDivergenceConvexity,
  kRhoConcavity,
  kPropertyS,
  kMixtureConvexity,
};

inline constexpr std::pair<Target, std::string_view> kTargetNames[] = {
    {Target::kAcceptance, "acceptance"},
    {Target::kRejection, "rejection"},
    {Target::kWeakAcceptance, "weak_acceptance"},
    {Target::kShiftConvexity, "shift_convexity"},
    {Target::kTimeConsistency, "time_consistency"},
    {Target::kChainRule, "chain_rule"},
    {Target::kSuperadditivity, "superadditivity"},
    {Target::kSubadditivity, "subadditivity"},
    {Target::kWeakSuperadditivity, "weak_superadditivity"},
    {Target::kDpi, "dpi"},
    {Target::kDpiBijection, "dpi_bijection"},
    {Target::kDuality, "duality"},
    {Target::kIntegralLemma, "integral_lemma"},
    {Target::kKeyIdentity, "key_identity"},
    {Target::kSufficiencyMatched, "sufficiency_matched"},
    {Target::kSufficiencyUnmatched, "sufficiency_unmatched"},
    {Target::kJointConvexity, "joint_convexity"},
    {Target::kDivergenceConvexity, "divergence_convexity"},
    {Target::kRhoConcavity, "rho_concavity"},
    {Target::kPropertyS, "property_s"},
    {Target::kMixtureConvexity, "mixture_convexity"},
};

constexpr std::string_view target_name(Target t) {
  for (const auto& [target, name] : kTargetNames) {
    if (target == t) return name;
  }
  return "?";
}

inline Target parse_target(std::string_view name) {
  for (const auto& [target, n] : kTargetNames) {
    if (n == name) return target;
  }
  throw Error(ErrorCode::kConfigParseError, "unknown target '" + std::string(name) + "'");
}

/// Which reference measures the sampler draws: arbitrary, product-form, or
/// alternating between the two by trial parity.
enum class SamplerClass { kGeneral, kProduct, kBoth };

constexpr std::string_view class_name(SamplerClass c) {
  switch (c) {
    case SamplerClass::kGeneral: return "general";
    case SamplerClass::kProduct: return "product";
    case SamplerClass::kBoth: return "both";
  }
  return "?";
}

inline SamplerClass parse_sampler_class(std::string_view name) {
  if (name == "general") return SamplerClass::kGeneral;
  if (name == "product") return SamplerClass::kProduct;
  if (name == "both") return SamplerClass::kBoth;
  throw Error(ErrorCode::kConfigParseError, "unknown sampler class '" + std::string(name) + "'");
}

struct SearchBudget {
  std::size_t trials = 1000;
  std::uint64_t seed = 0;
  std::size_t E = 3;
  std::size_t F = 3;
  SamplerClass sampler = SamplerClass::kBoth;
  unsigned workers = 0;  // 0: default_workers()
};

struct Tolerances {
  double noise = 1e-8;
  double violation = 1e-4;
};

enum class Verdict { kPass, kViolation, kInconclusive };

constexpr std::string_view verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kPass: return "pass";
    case Verdict::kViolation: return "violation";
    case Verdict::kInconclusive: return "inconclusive";
  }
  return "?";
}

/// Scores are oriented so that negative values contradict the property.
inline Verdict classify(const GapValue& score, const Tolerances& tol) {
  const double s = score.numeric();
  if (s >= -tol.noise) return Verdict::kPass;
  if (s < -tol.violation) return Verdict::kViolation;
  return Verdict::kInconclusive;
}

/// What to search: a target plus the risk spec and/or divergence it needs.
/// Divergence targets fall back to the divergence induced by the risk spec.
struct SearchProblem {
  Target target = Target::kAcceptance;
  std::optional<RiskSpec> risk;
  std::optional<DivergenceSpec> divergence;

  const RiskSpec& require_risk() const {
    if (!risk) {
      throw Error(ErrorCode::kInvalidSpec, "target '" + std::string(target_name(target)) + "' needs a risk spec");
    }
    return *risk;
  }

  DivergenceSpec resolved_divergence() const {
    if (divergence) return *divergence;
    if (risk) return induced_divergence(*risk);
    throw Error(ErrorCode::kInvalidSpec, "target '" + std::string(target_name(target)) + "' needs a divergence");
  }
};

inline unsigned default_workers() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("DIVLAB_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) n = static_cast<unsigned>(std::min<long>(v, 256));
  }
  return n;
}

namespace detail {

using Json = io::Json;

struct TrialContext {
  const SearchProblem& problem;
  std::size_t E, F;
  bool product;
  Sampler& rng;
  Json* capture;  // instance sink, or null when only the score is needed
};

inline std::size_t draw_size(Sampler& rng, std::size_t max) { return rng.between(std::min<std::size_t>(2, max), max); }

inline JointDist draw_joint(Sampler& rng, std::size_t ne, std::size_t nf, bool product) {
  const auto rows = index_labels(ne, "x");
  const auto cols = index_labels(nf, "y");
  if (!product) return JointDist::from_masses(rows, cols, rng.dirichlet(ne * nf));
  return ::divlab::product(make_dist_from_masses(rows, rng.dirichlet(ne)),
                           make_dist_from_masses(cols, rng.dirichlet(nf)));
}

/// A law on grid values shifted onto the boundary of the acceptance set.
inline Law draw_boundary_law(const RiskSpec& spec, Sampler& rng, std::size_t n) {
  const auto v = rng.grid_values(n);
  const auto w = rng.dirichlet(n);
  const Law m = make_law_from_masses(v, w);
  return m.shifted(-evaluate(spec, m));
}

inline FiniteDist flat_of(const JointDist& j) {
  return make_dist_from_masses(index_labels(j.weights().size(), "a"), j.weights());
}

struct GridProblem {
  FiniteDist mu;
  RandomVariable x;
  Partition part;
};

/// mu on an E x F grid of atoms "i.j", X on grid values, G generated by the first coordinate.
inline GridProblem draw_grid_problem(TrialContext& c) {
  const std::size_t ne = draw_size(c.rng, c.E), nf = draw_size(c.rng, c.F);
  const JointDist j = draw_joint(c.rng, ne, nf, c.product);
  std::vector<Label> atoms;
  Partition part;
  for (std::size_t i = 0; i < ne; ++i) {
    part.blocks.emplace_back();
    for (std::size_t k = 0; k < nf; ++k) {
      atoms.push_back(std::to_string(i) + "." + std::to_string(k));
      part.blocks.back().push_back(atoms.back());
    }
  }
  GridProblem g{make_dist_from_masses(atoms, j.weights()), RandomVariable{c.rng.grid_values(ne * nf)}, part};
  if (c.capture) {
    *c.capture = Json{{"mu", io::to_json(g.mu)}, {"X", g.x.values}, {"partition", io::to_json(g.part)}};
  }
  return g;
}

inline ProductInstance draw_product_instance(TrialContext& c) {
  const std::size_t ne = draw_size(c.rng, c.E), nf = draw_size(c.rng, c.F);
  ProductInstance inst;
  inst.mu_bar = draw_joint(c.rng, ne, nf, c.product);
  inst.nu_bar = draw_joint(c.rng, ne, nf, false);
  inst.product = c.product;
  if (c.capture) {
    *c.capture = Json{{"mu_bar", io::to_json(inst.mu_bar)},
                      {"nu_bar", io::to_json(inst.nu_bar)},
                      {"product", inst.product}};
  }
  return inst;
}

inline GapValue score_of(double v) { return GapValue::finite(v); }

inline GapValue run_trial(TrialContext& c) {
  const SearchProblem& p = c.problem;
  Sampler& rng = c.rng;
  switch (p.target) {
    case Target::kAcceptance:
    case Target::kRejection:
    case Target::kTimeConsistency: {
      const auto g = draw_grid_problem(c);
      const double gap = consistency_gap(p.require_risk(), g.mu, g.x, g.part);
      if (p.target == Target::kAcceptance) return score_of(gap);
      if (p.target == Target::kRejection) return score_of(-gap);
      return score_of(-std::abs(gap));
    }
    case Target::kWeakAcceptance: {
      auto g = draw_grid_problem(c);
      const auto& spec = p.require_risk();
      const auto cond = rho_conditional(spec, g.mu, g.x, g.part);
      const auto block_of = g.part.assign(g.mu.atoms());
      std::vector<double> shift(g.part.blocks.size(), 0.0);
      for (const auto& b : cond.blocks) shift[b.block] = b.value;
      for (std::size_t i = 0; i < g.x.size(); ++i) g.x.values[i] -= shift[block_of[i]];
      if (c.capture) (*c.capture)["X"] = g.x.values;
      return score_of(-rho_lifted(spec, g.mu, g.x));
    }
    case Target::kShiftConvexity: {
      const auto& spec = p.require_risk();
      const Law mu = draw_boundary_law(spec, rng, draw_size(rng, c.E));
      std::vector<Law> rows;
      const std::size_t nf = draw_size(rng, c.F);
      for (std::size_t i = 0; i < mu.size(); ++i) {
        if (c.product && i > 0) {
          rows.push_back(rows.front());
        } else {
          rows.push_back(draw_boundary_law(spec, rng, nf));
        }
      }
      if (c.capture) {
        Json jr = Json::array();
        for (const auto& r : rows) jr.push_back(io::to_json(r));
        *c.capture = Json{{"mu", io::to_json(mu)}, {"rows", jr}};
      }
      return score_of(-shift_convexity_probe(spec, mu, rows, 1e-9).risk);
    }
    case Target::kPropertyS: {
      const auto& spec = p.require_risk();
      const Law first = draw_boundary_law(spec, rng, draw_size(rng, c.E));
      const std::size_t nf = draw_size(rng, c.F);
      std::vector<Law> pool;
      if (c.product) {
        for (std::size_t k = 0; k < 3; ++k) pool.push_back(draw_boundary_law(spec, rng, nf));
      }
      std::vector<ShiftedComponent> gamma;
      for (std::size_t i = 0; i < first.size(); ++i) {
        const std::size_t parts = rng.between(1, 3);
        const auto split = rng.dirichlet(parts);
        for (std::size_t k = 0; k < parts; ++k) {
          Law m = c.product ? pool[rng.index(pool.size())] : draw_boundary_law(spec, rng, nf);
          gamma.push_back({first.values()[i], first.weights()[i] * split[k], std::move(m)});
        }
      }
      if (c.capture) {
        Json jg = Json::array();
        for (const auto& g : gamma) jg.push_back(Json{{"x", g.x}, {"weight", g.weight}, {"m", io::to_json(g.m)}});
        *c.capture = Json{{"gamma", jg}};
      }
      return score_of(-property_s_probe(spec, gamma, 1e-9).risk);
    }
    case Target::kMixtureConvexity: {
      const auto& spec = p.require_risk();
      const std::size_t k = draw_size(rng, c.E);
      std::vector<Law> laws;
      for (std::size_t i = 0; i < k; ++i) laws.push_back(draw_boundary_law(spec, rng, draw_size(rng, c.F)));
      const auto coef = rng.dirichlet(k);
      if (c.capture) {
        Json jl = Json::array();
        for (const auto& m : laws) jl.push_back(io::to_json(m));
        *c.capture = Json{{"laws", jl}, {"coefficients", coef}};
      }
      return score_of(-mixture_convexity_probe(spec, laws, coef, 1e-9).risk);
    }
    case Target::kChainRule:
    case Target::kSuperadditivity:
    case Target::kSubadditivity: {
      const auto inst = draw_product_instance(c);
      const auto gap = superadditivity_gap(p.resolved_divergence(), inst);
      if (p.target == Target::kSuperadditivity) return gap;
      if (p.target == Target::kSubadditivity) return negate(gap);
      return two_sided(gap);
    }
    case Target::kWeakSuperadditivity: {
      const auto inst = draw_product_instance(c);
      return weak_consistency_gap(p.resolved_divergence(), inst);
    }
    case Target::kIntegralLemma: {
      const auto inst = draw_product_instance(c);
      return score_of(-integral_lemma_gap(p.require_risk(), inst.nu_bar, inst.mu_bar));
    }
    case Target::kKeyIdentity: {
      const std::size_t ne = draw_size(rng, c.E), nf = draw_size(rng, c.F);
      const JointDist mu_bar = draw_joint(rng, ne, nf, c.product);
      const RandomVariable f{rng.grid_values(ne * nf)};
      if (c.capture) *c.capture = Json{{"mu_bar", io::to_json(mu_bar)}, {"f", f.values}};
      return score_of(-key_identity_gap(p.require_risk(), mu_bar, f));
    }
    case Target::kDpi:
    case Target::kDpiBijection: {
      const std::size_t n = draw_size(rng, c.E);
      const auto atoms = index_labels(n, "e");
      const auto nu = make_dist_from_masses(atoms, rng.dirichlet(n));
      const auto mu = make_dist_from_masses(atoms, rng.dirichlet(n));
      Kernel k;
      if (p.target == Target::kDpiBijection) {
        const auto perm = rng.permutation(n);
        k = deterministic_kernel(atoms, [&](const Label& a) { return "f" + std::to_string(perm[mu.index_of(a)]); });
      } else {
        const std::size_t m = rng.between(1, c.F);
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < n; ++i) rows.push_back(rng.dirichlet(m));
        k = Kernel(atoms, index_labels(m, "f"), rows);
      }
      if (c.capture) *c.capture = Json{{"nu", io::to_json(nu)}, {"mu", io::to_json(mu)}, {"kernel", io::to_json(k)}};
      const auto gap = dpi_gap(p.resolved_divergence(), nu, mu, k);
      return p.target == Target::kDpi ? gap : two_sided(gap);
    }
    case Target::kDuality: {
      const std::size_t n = rng.between(1, c.E);
      const auto atoms = index_labels(n, "e");
      const auto nu = make_dist_from_masses(atoms, rng.dirichlet(n));
      const auto mu = make_dist_from_masses(atoms, rng.dirichlet(n));
      if (c.capture) *c.capture = Json{{"nu", io::to_json(nu)}, {"mu", io::to_json(mu)}};
      const auto& spec = p.require_risk();
      const double closed = evaluate_divergence(induced_divergence(spec), nu, mu);
      const double dual = dual_divergence(spec, nu, mu).value;
      return two_sided(extended_difference(closed, dual));
    }
    case Target::kSufficiencyMatched:
    case Target::kSufficiencyUnmatched: {
      const std::size_t n = draw_size(rng, c.E);
      const std::size_t m = rng.between(1, std::max<std::size_t>(1, n - 1));
      const auto atoms = index_labels(n, "e");
      std::vector<std::size_t> image(n);
      for (std::size_t i = 0; i < n; ++i) image[i] = i < m ? i : rng.index(m);
      const auto mu = make_dist_from_masses(atoms, rng.dirichlet(n));
      std::vector<double> nu_w;
      if (p.target == Target::kSufficiencyMatched) {
        const auto coarse = rng.dirichlet(m);
        std::vector<double> mu_coarse(m, 0.0);
        for (std::size_t i = 0; i < n; ++i) mu_coarse[image[i]] += mu.weight(i);
        for (std::size_t i = 0; i < n; ++i) nu_w.push_back(mu.weight(i) * coarse[image[i]] / mu_coarse[image[i]]);
      } else {
        nu_w = rng.dirichlet(n);
      }
      const auto nu = make_dist_from_masses(atoms, nu_w);
      auto map = [&](const Label& a) { return "t" + std::to_string(image[mu.index_of(a)]); };
      if (c.capture) {
        std::vector<std::string> images;
        for (const auto& a : atoms) images.push_back(map(a));
        *c.capture = Json{{"nu", io::to_json(nu)}, {"mu", io::to_json(mu)}, {"map", images}};
      }
      const auto gap = sufficiency_gap(p.resolved_divergence(), nu, mu, map);
      return p.target == Target::kSufficiencyMatched ? two_sided(gap) : gap;
    }
    case Target::kJointConvexity:
    case Target::kDivergenceConvexity: {
      const std::size_t n = draw_size(rng, c.E);
      const auto nu1 = rng.dirichlet(n), nu2 = rng.dirichlet(n), mu1 = rng.dirichlet(n);
      const auto mu2 = p.target == Target::kJointConvexity ? rng.dirichlet(n) : mu1;
      const double t = rng.uniform();
      std::vector<double> nu_t(n), mu_t(n);
      for (std::size_t i = 0; i < n; ++i) {
        nu_t[i] = t * nu1[i] + (1.0 - t) * nu2[i];
        mu_t[i] = t * mu1[i] + (1.0 - t) * mu2[i];
      }
      if (c.capture) *c.capture = Json{{"nu1", nu1}, {"nu2", nu2}, {"mu1", mu1}, {"mu2", mu2}, {"t", t}};
      const auto div = p.resolved_divergence();
      const double a1 = divergence_value(div, nu1, mu1), a2 = divergence_value(div, nu2, mu2);
      const double combo = (is_pos_inf(a1) || is_pos_inf(a2)) ? kInf : t * a1 + (1.0 - t) * a2;
      return extended_difference(combo, divergence_value(div, nu_t, mu_t));
    }
    case Target::kRhoConcavity: {
      const auto& spec = p.require_risk();
      const std::size_t n = draw_size(rng, c.E);
      const Law m1 = make_law_from_masses(rng.grid_values(n), rng.dirichlet(n));
      const Law m2 = make_law_from_masses(rng.grid_values(n), rng.dirichlet(n));
      const double t = rng.uniform();
      const Law laws[] = {m1, m2};
      const double coef[] = {t, 1.0 - t};
      if (c.capture) *c.capture = Json{{"m1", io::to_json(m1)}, {"m2", io::to_json(m2)}, {"t", t}};
      return score_of(evaluate(spec, mixture(laws, coef)) - t * evaluate(spec, m1) - (1.0 - t) * evaluate(spec, m2));
    }
  }
  return GapValue::vacuous();
}

}  // namespace detail

struct ClassSummary {
  SamplerClass sampler = SamplerClass::kGeneral;
  std::size_t trials = 0;
  std::size_t vacuous = 0;
  std::size_t violations = 0;
  std::size_t inconclusive = 0;
  std::optional<std::size_t> worst_trial;
  std::optional<GapValue> worst;
};

struct TrialOutcome {
  GapValue score;
  SamplerClass sampler = SamplerClass::kGeneral;
};

struct SearchResult {
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  std::size_t vacuous = 0;
  std::optional<std::size_t> worst_trial;
  std::optional<GapValue> worst;
  std::optional<Verdict> verdict;  // absent when no trials ran
  std::vector<ClassSummary> classes;
  std::vector<TrialOutcome> outcomes;  // indexed by trial
  io::Json worst_instance;             // null unless a trial was scored
};

struct TrialReplay {
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  SamplerClass sampler = SamplerClass::kGeneral;
  GapValue score;
  io::Json instance;
};

inline SamplerClass class_of_trial(const SearchBudget& budget, std::size_t trial) {
  if (budget.sampler != SamplerClass::kBoth) return budget.sampler;
  return trial % 2 == 0 ? SamplerClass::kGeneral : SamplerClass::kProduct;
}

/// Reruns one trial from its seed and serializes its instance.
inline TrialReplay replay_trial(const SearchProblem& problem, const SearchBudget& budget, std::size_t trial) {
  TrialReplay r;
  r.trial = trial;
  r.seed = trial_seed(budget.seed, trial);
  r.sampler = class_of_trial(budget, trial);
  Sampler rng(r.seed);
  detail::TrialContext ctx{problem, budget.E, budget.F, r.sampler == SamplerClass::kProduct, rng, &r.instance};
  r.score = detail::run_trial(ctx);
  return r;
}

/// Runs budget.trials independent seeded trials on a worker pool and reduces
/// them in trial order, so the result does not depend on the worker count.
/// The worst trial is the one with the smallest score (earliest on ties).
inline SearchResult counterexample_search(const SearchProblem& problem, const SearchBudget& budget,
                                          const Tolerances& tol = {}) {
  if (budget.E == 0 || budget.F == 0) throw Error(ErrorCode::kInvalidSpec, "space sizes must be positive");
  SearchResult res;
  res.seed = budget.seed;
  res.trials = budget.trials;
  res.outcomes.resize(budget.trials);
  std::vector<std::exception_ptr> errors(budget.trials);
  std::atomic<std::size_t> next{0};
  constexpr std::size_t kChunk = 16;
  auto worker = [&] {
    for (;;) {
      const std::size_t start = next.fetch_add(kChunk);
      if (start >= budget.trials) return;
      const std::size_t stop = std::min(budget.trials, start + kChunk);
      for (std::size_t t = start; t < stop; ++t) {
        try {
          const SamplerClass cls = class_of_trial(budget, t);
          Sampler rng(trial_seed(budget.seed, t));
          detail::TrialContext ctx{problem, budget.E, budget.F, cls == SamplerClass::kProduct, rng, nullptr};
          res.outcomes[t] = {detail::run_trial(ctx), cls};
        } catch (...) {
          errors[t] = std::current_exception();
        }
      }
    }
  };
  const unsigned workers = static_cast<unsigned>(
      std::min<std::size_t>(budget.workers ? budget.workers : default_workers(), std::max<std::size_t>(1, budget.trials)));
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  auto summary_for = [&](SamplerClass cls) -> ClassSummary& {
    for (auto& s : res.classes) {
      if (s.sampler == cls) return s;
    }
    res.classes.push_back({});
    res.classes.back().sampler = cls;
    return res.classes.back();
  };
  if (budget.sampler == SamplerClass::kBoth) {
    summary_for(SamplerClass::kGeneral);
    summary_for(SamplerClass::kProduct);
  } else {
    summary_for(budget.sampler);
  }
  for (std::size_t t = 0; t < budget.trials; ++t) {
    const auto& o = res.outcomes[t];
    ClassSummary& s = summary_for(o.sampler);
    ++s.trials;
    if (o.score.is_vacuous()) {
      ++s.vacuous;
      ++res.vacuous;
      continue;
    }
    const Verdict v = classify(o.score, tol);
    if (v == Verdict::kViolation) ++s.violations;
    if (v == Verdict::kInconclusive) ++s.inconclusive;
    if (!s.worst || o.score.numeric() < s.worst->numeric()) s.worst = o.score, s.worst_trial = t;
    if (!res.worst || o.score.numeric() < res.worst->numeric()) res.worst = o.score, res.worst_trial = t;
  }
  if (budget.trials > 0) {
    res.verdict = res.worst ? classify(*res.worst, tol) : Verdict::kInconclusive;
  }
  if (res.worst_trial) res.worst_instance = replay_trial(problem, budget, *res.worst_trial).instance;
  return res;
}

inline SearchResult counterexample_search(const RiskSpec& spec, const SearchBudget& budget, Target target,
                                          const Tolerances& tol = {}) {
  SearchProblem p;
  p.target = target;
  p.risk = spec;
  return counterexample_search(p, budget, tol);
}

}  // namespace divlab

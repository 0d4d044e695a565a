// Copyright 2026 The divlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Law-invariant risk measures on finite laws: evaluation of rho~(m), the
// lifted family rho_mu(f), conditional risk rho(X|G), and acceptance sets.
// Sign convention: rho is nondecreasing, rho(X + c) = rho(X) + c, rho(0) = 0.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "divlab/error.hpp"
#include "divlab/loss_library.hpp"
#include "divlab/optimize.hpp"
#include "divlab/prob_core.hpp"

namespace divlab {

struct RiskNumerics {
  double root_tol = 1e-11;   // shortfall bisection width on the cash level
  double min_tol = 1e-12;    // OCE golden-section relative width
  int max_expansions = 10;   // OCE bracket doublings before giving up
};

class RiskSpec {
 public:
  enum class Family { kEntropic, kShortfall, kOce, kExpectation, kEsssup, kCoherent };

  static RiskSpec entropic(double eta) {
    if (!(eta > 0.0)) throw Error(ErrorCode::kInvalidSpec, "entropic risk needs eta > 0");
    RiskSpec s(Family::kEntropic);
    s.eta_ = eta;
    return s;
  }
  static RiskSpec shortfall(LossFn loss) {
    RiskSpec s(Family::kShortfall);
    s.loss_ = std::move(loss);
    return s;
  }
  static RiskSpec oce(UtilityFn utility) {
    RiskSpec s(Family::kOce);
    s.utility_ = std::move(utility);
    return s;
  }
  static RiskSpec expectation() { return RiskSpec(Family::kExpectation); }
  static RiskSpec esssup() { return RiskSpec(Family::kEsssup); }

  /// sup over the given densities (w.r.t. the reference measure it is
  /// evaluated against) of E^Q[f]. The reference is optional; when given,
  /// the densities are validated against it immediately.
  static RiskSpec coherent(std::vector<std::vector<double>> densities,
                           std::optional<FiniteDist> reference = std::nullopt) {
    if (densities.empty()) throw Error(ErrorCode::kInvalidDensity, "coherent risk needs at least one density");
    RiskSpec s(Family::kCoherent);
    s.densities_ = std::move(densities);
    s.reference_ = std::move(reference);
    if (s.reference_) s.validate_densities(*s.reference_);
    return s;
  }

  Family family() const { return family_; }
  double eta() const { return eta_; }
  const LossFn& loss() const { return *loss_; }
  const UtilityFn& utility() const { return *utility_; }
  const std::vector<std::vector<double>>& densities() const { return densities_; }
  const std::optional<FiniteDist>& reference() const { return reference_; }
  const RiskNumerics& numerics() const { return numerics_; }
  RiskNumerics& numerics() { return numerics_; }

  /// True for families whose rho~ is defined on arbitrary laws.
  bool law_based() const { return family_ != Family::kCoherent; }

  void validate_densities(const FiniteDist& mu) const {
    for (const auto& d : densities_) {
      if (d.size() != mu.size()) throw Error(ErrorCode::kInvalidDensity, "density length differs from reference");
      double mass = 0.0;
      for (std::size_t i = 0; i < d.size(); ++i) {
        if (d[i] < 0.0) throw Error(ErrorCode::kInvalidDensity, "negative density");
        mass += mu.weight(i) * d[i];
      }
      if (std::abs(mass - 1.0) > 1e-9) {
        throw Error(ErrorCode::kInvalidDensity, "density integrates to " + std::to_string(mass));
      }
    }
  }

 private:
  explicit RiskSpec(Family f) : family_(f) {}

  Family family_;
  double eta_ = 1.0;
  std::optional<LossFn> loss_;
  std::optional<UtilityFn> utility_;
  std::vector<std::vector<double>> densities_;
  std::optional<FiniteDist> reference_;
  RiskNumerics numerics_;
};

constexpr std::string_view family_name(RiskSpec::Family f) {
  switch (f) {
    case RiskSpec::Family::kEntropic: return "entropic";
    case RiskSpec::Family::kShortfall: return "shortfall";
    case RiskSpec::Family::kOce: return "oce";
    case RiskSpec::Family::kExpectation: return "expectation";
    case RiskSpec::Family::kEsssup: return "esssup";
    case RiskSpec::Family::kCoherent: return "coherent";
  }
  return "?";
}

/// eta^{-1} log sum m(x) e^{eta x}, shifted by the max for overflow safety.
inline double rho_entropic(const Law& m, double eta) {
  const double top = m.max();
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) s += m.weights()[i] * std::exp(eta * (m.values()[i] - top));
  return top + std::log(s) / eta;
}

inline double expected_loss(const Law& m, const LossFn& loss, double c) {
  double s = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) s += m.weights()[i] * loss(m.values()[i] - c);
  return s;
}

/// Smallest c with E[l(X - c)] <= 1, by bisection on [min - 1, max + 1].
inline double rho_shortfall(const Law& m, const LossFn& loss, const RiskNumerics& num = {}) {
  const double lo = m.min() - 1.0, hi = m.max() + 1.0;
  auto feasible = [&](double c) { return expected_loss(m, loss, c) <= 1.0; };
  if (feasible(lo) || !feasible(hi)) {
    throw Error(ErrorCode::kBracketFailure, "shortfall constraint does not change sign on [min-1, max+1]");
  }
  const double c = optimize::bisect_threshold(feasible, lo, hi, num.root_tol);
  if (expected_loss(m, loss, c) > 1.0 + 1e-9) {
    throw Error(ErrorCode::kBracketFailure, "shortfall post-check failed");
  }
  return c;
}

struct OceSolution {
  double value = 0.0;
  double shift = 0.0;  // optimal m
};

/// inf_m E[phi(m + X)] - m by golden-section search. The minimizer lies in
/// [x0 - max - 1, x0 - min + 1] where x0 is phi's tangency point with the
/// diagonal; the bracket is still doubled on boundary hits.
inline OceSolution solve_oce(const Law& m, const UtilityFn& phi, const RiskNumerics& num = {}) {
  auto objective = [&](double shift) {
    double s = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) s += m.weights()[i] * phi(shift + m.values()[i]);
    return s - shift;
  };
  const double x0 = phi.tangency_point();
  double lo = x0 - m.max() - 1.0, hi = x0 - m.min() + 1.0;
  for (int expansion = 0; expansion <= num.max_expansions; ++expansion) {
    const auto r = optimize::golden_section(objective, lo, hi, num.min_tol);
    if (!std::isfinite(r.value)) break;
    const double width = hi - lo;
    const bool flat_edge = (r.hit_lower && objective(lo - width) >= r.value) ||
                           (r.hit_upper && objective(hi + width) >= r.value);
    if ((!r.hit_lower && !r.hit_upper) || flat_edge) return {r.value, r.argmin};
    if (r.hit_lower) lo -= width;
    if (r.hit_upper) hi += width;
  }
  throw Error(ErrorCode::kUnboundedObjective, "OCE objective has no interior minimizer");
}

inline double rho_oce(const Law& m, const UtilityFn& phi, const RiskNumerics& num = {}) {
  return solve_oce(m, phi, num).value;
}

inline double rho_expectation(const Law& m) { return m.mean(); }

/// Max over positive-weight support points.
inline double rho_esssup(const Law& m) { return m.max(); }

/// max_d sum mu(x) d(x) f(x) over the density set.
inline double rho_coherent(const FiniteDist& mu, const RandomVariable& f,
                           const std::vector<std::vector<double>>& densities) {
  require_compatible(mu, f);
  RiskSpec::coherent(densities, mu);  // validates
  double best = -kInf;
  for (const auto& d : densities) {
    double s = 0.0;
    for (std::size_t i = 0; i < mu.size(); ++i) s += mu.weight(i) * d[i] * f.values[i];
    best = std::max(best, s);
  }
  return best;
}

/// rho~(m) for a law on the real line.
inline double evaluate(const RiskSpec& spec, const Law& m) {
  switch (spec.family()) {
    case RiskSpec::Family::kEntropic: return rho_entropic(m, spec.eta());
    case RiskSpec::Family::kShortfall: return rho_shortfall(m, spec.loss(), spec.numerics());
    case RiskSpec::Family::kOce: return rho_oce(m, spec.utility(), spec.numerics());
    case RiskSpec::Family::kExpectation: return rho_expectation(m);
    case RiskSpec::Family::kEsssup: return rho_esssup(m);
    case RiskSpec::Family::kCoherent:
      throw Error(ErrorCode::kUnsupported, "coherent specs are evaluated on their reference space only");
  }
  return 0.0;
}

/// rho_mu(f) = rho~(mu o f^{-1}); coherent specs use mu as the reference.
inline double rho_lifted(const RiskSpec& spec, const FiniteDist& mu, const RandomVariable& f) {
  require_compatible(mu, f);
  if (spec.family() == RiskSpec::Family::kCoherent) return rho_coherent(mu, f, spec.densities());
  return evaluate(spec, law_of(mu, f));
}

/// A supergradient-direction vector g with rho_mu(f + h) ~ rho_mu(f) + <g, h>;
/// nonnegative entries summing to one.
inline std::vector<double> lifted_gradient(const RiskSpec& spec, const FiniteDist& mu, const RandomVariable& f) {
  require_compatible(mu, f);
  const std::size_t n = mu.size();
  std::vector<double> g(n, 0.0);
  auto normalize = [&g] {
    double s = 0.0;
    for (double v : g) s += v;
    if (s > 0.0) {
      for (double& v : g) v /= s;
    }
  };
  switch (spec.family()) {
    case RiskSpec::Family::kEntropic: {
      double top = -kInf;
      for (std::size_t i = 0; i < n; ++i) {
        if (mu.weight(i) > 0.0) top = std::max(top, f.values[i]);
      }
      for (std::size_t i = 0; i < n; ++i) g[i] = mu.weight(i) * std::exp(spec.eta() * (f.values[i] - top));
      normalize();
      return g;
    }
    case RiskSpec::Family::kShortfall: {
      const double c = rho_lifted(spec, mu, f);
      for (std::size_t i = 0; i < n; ++i) g[i] = mu.weight(i) * spec.loss().derivative(f.values[i] - c);
      normalize();
      return g;
    }
    case RiskSpec::Family::kOce: {
      const auto sol = solve_oce(law_of(mu, f), spec.utility(), spec.numerics());
      for (std::size_t i = 0; i < n; ++i) g[i] = mu.weight(i) * spec.utility().derivative(sol.shift + f.values[i]);
      normalize();
      return g;
    }
    case RiskSpec::Family::kExpectation: return mu.weights();
    case RiskSpec::Family::kEsssup: {
      std::size_t best = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (mu.weight(i) > 0.0 && (best == n || f.values[i] > f.values[best])) best = i;
      }
      g[best] = 1.0;
      return g;
    }
    case RiskSpec::Family::kCoherent: {
      double best = -kInf;
      const std::vector<double>* arg = nullptr;
      for (const auto& d : spec.densities()) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += mu.weight(i) * d[i] * f.values[i];
        if (s > best) best = s, arg = &d;
      }
      for (std::size_t i = 0; i < n; ++i) g[i] = mu.weight(i) * (*arg)[i];
      return g;
    }
  }
  return g;
}

/// rho(X|G) as one value per positive-weight block.
struct ConditionalRisk {
  struct BlockValue {
    std::size_t block = 0;
    double weight = 0.0;
    double value = 0.0;
  };
  std::vector<BlockValue> blocks;
  Partition partition;

  /// Law of the G-measurable random variable rho(X|G).
  Law law() const {
    std::vector<double> v, w;
    for (const auto& b : blocks) {
      v.push_back(b.value);
      w.push_back(b.weight);
    }
    return make_law_from_masses(v, w);
  }

  double max_value() const {
    double m = -kInf;
    for (const auto& b : blocks) m = std::max(m, b.value);
    return m;
  }
};

inline ConditionalRisk rho_conditional(const RiskSpec& spec, const FiniteDist& mu, const RandomVariable& x,
                                       const Partition& part) {
  ConditionalRisk out;
  out.partition = part;
  for (const auto& bl : condition(mu, x, part)) out.blocks.push_back({bl.block, bl.weight, evaluate(spec, bl.law)});
  return out;
}

/// m lies in the measure acceptance set {rho~ <= 0} up to tol.
inline bool acceptance_member(const RiskSpec& spec, const Law& m, double tol = 0.0) {
  return evaluate(spec, m) <= tol;
}

}  // namespace divlab

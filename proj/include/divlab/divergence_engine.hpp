// Copyright 2026 The divlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Divergences alpha(nu|mu) induced by law-invariant risk measures: closed
// forms for the entropic, OCE and shortfall families, a dual solver for
// sup_f (nu(f) - rho_mu(f)), and data-processing / sufficiency gaps.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "divlab/error.hpp"
#include "divlab/extended_real.hpp"
#include "divlab/loss_library.hpp"
#include "divlab/optimize.hpp"
#include "divlab/prob_core.hpp"
#include "divlab/risk_engine.hpp"

namespace divlab {

struct DualOptions {
  enum class Gradient { kAnalytic, kFiniteDifference };
  int max_iters = 5000;
  double step0 = 1.0;
  double tol = 1e-10;
  Gradient gradient = Gradient::kAnalytic;
  double fd_step = 1e-6;
};

class DivergenceSpec {
 public:
  enum class Family { kRelativeEntropy, kPhiStar, kShortfall, kDual };

  static DivergenceSpec relative_entropy(double eta = 1.0) {
    if (!(eta > 0.0)) throw Error(ErrorCode::kInvalidSpec, "relative entropy needs eta > 0");
    DivergenceSpec d(Family::kRelativeEntropy);
    d.eta_ = eta;
    return d;
  }
  static DivergenceSpec phi_star(UtilityFn phi) {
    DivergenceSpec d(Family::kPhiStar);
    d.utility_ = std::move(phi);
    return d;
  }
  static DivergenceSpec shortfall(LossFn loss) {
    DivergenceSpec d(Family::kShortfall);
    d.loss_ = std::move(loss);
    return d;
  }
  static DivergenceSpec dual_of(RiskSpec spec, DualOptions options = {}) {
    DivergenceSpec d(Family::kDual);
    d.risk_ = std::make_shared<RiskSpec>(std::move(spec));
    d.options_ = options;
    return d;
  }

  Family family() const { return family_; }
  double eta() const { return eta_; }
  const UtilityFn& utility() const { return *utility_; }
  const LossFn& loss() const { return *loss_; }
  const RiskSpec& risk() const { return *risk_; }
  const DualOptions& options() const { return options_; }

 private:
  explicit DivergenceSpec(Family f) : family_(f) {}

  Family family_;
  double eta_ = 1.0;
  std::optional<UtilityFn> utility_;
  std::optional<LossFn> loss_;
  std::shared_ptr<const RiskSpec> risk_;
  DualOptions options_;
};

constexpr std::string_view family_name(DivergenceSpec::Family f) {
  switch (f) {
    case DivergenceSpec::Family::kRelativeEntropy: return "relative_entropy";
    case DivergenceSpec::Family::kPhiStar: return "phi_star";
    case DivergenceSpec::Family::kShortfall: return "shortfall_div";
    case DivergenceSpec::Family::kDual: return "dual_of";
  }
  return "?";
}

/// The divergence of a risk spec, in closed form where one exists.
inline DivergenceSpec induced_divergence(const RiskSpec& spec) {
  switch (spec.family()) {
    case RiskSpec::Family::kEntropic: return DivergenceSpec::relative_entropy(spec.eta());
    case RiskSpec::Family::kShortfall: return DivergenceSpec::shortfall(spec.loss());
    case RiskSpec::Family::kOce: return DivergenceSpec::phi_star(spec.utility());
    case RiskSpec::Family::kExpectation: return DivergenceSpec::phi_star(UtilityFn::identity());
    case RiskSpec::Family::kEsssup:
    case RiskSpec::Family::kCoherent: return DivergenceSpec::dual_of(spec);
  }
  return DivergenceSpec::dual_of(spec);
}

// ---------------------------------------------------------------------------
// Closed forms on weight vectors over a common atom set.

/// eta^{-1} sum nu log(nu/mu), 0 log 0 = 0, +inf off absolute continuity.
inline double relative_entropy(std::span<const double> nu, std::span<const double> mu, double eta = 1.0) {
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (nu[i] <= 0.0) continue;
    if (mu[i] <= 0.0) return kInf;
    s += nu[i] * std::log(nu[i] / mu[i]);
  }
  return std::max(s, 0.0) / eta;
}

/// sum over mu-positive atoms of mu phi*(nu/mu).
inline double phi_divergence(std::span<const double> nu, std::span<const double> mu, const UtilityFn& phi) {
  if (!absolutely_continuous(nu, mu)) return kInf;
  double s = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu[i] <= 0.0) continue;
    const double c = phi.conjugate(nu[i] / mu[i]);
    if (is_pos_inf(c)) return kInf;
    s += mu[i] * c;
  }
  return s;
}

/// inf_{t>0} (1 + sum mu l*(t nu/mu)) / t, searched over log t in [-40, 40].
inline double shortfall_divergence(std::span<const double> nu, std::span<const double> mu, const LossFn& loss) {
  if (!absolutely_continuous(nu, mu)) return kInf;
  std::vector<double> r, w;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu[i] <= 0.0) continue;
    r.push_back(nu[i] / mu[i]);
    w.push_back(mu[i]);
  }
  auto g = [&](double s) {
    const double t = std::exp(s);
    double acc = 1.0;
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double c = loss.conjugate(t * r[i]);
      if (is_pos_inf(c)) return kInf;
      acc += w[i] * c;
    }
    return acc / t;
  };
  constexpr double kLo = -40.0, kHi = 40.0;
  constexpr int kScan = 64;
  int best = 0;
  double best_val = kInf;
  for (int k = 0; k < kScan; ++k) {
    const double s = kLo + (kHi - kLo) * k / (kScan - 1);
    const double v = g(s);
    if (v < best_val) best_val = v, best = k;
  }
  if (!std::isfinite(best_val)) return kInf;
  const double h = (kHi - kLo) / (kScan - 1);
  const auto res = optimize::golden_section(g, std::max(kLo, kLo + (best - 1) * h),
                                            std::min(kHi, kLo + (best + 1) * h), 1e-13);
  return std::max(0.0, std::min(best_val, res.value));
}

// ---------------------------------------------------------------------------
// Dual solver.

struct DualSolveResult {
  double value = 0.0;
  RandomVariable maximizer;  // mean zero under mu, zero on mu-null atoms
  int iterations = 0;
  std::optional<double> certified_gap;  // closed form minus dual value
  bool budget_exhausted = false;
};

double divergence_value(const DivergenceSpec& div, std::span<const double> nu, std::span<const double> mu);

namespace detail {

inline std::optional<double> closed_form_for(const RiskSpec& spec, std::span<const double> nu,
                                             std::span<const double> mu) {
  switch (spec.family()) {
    case RiskSpec::Family::kCoherent: return std::nullopt;
    case RiskSpec::Family::kEsssup: return absolutely_continuous(nu, mu) ? 0.0 : kInf;
    default: return divergence_value(induced_divergence(spec), nu, mu);
  }
}

}  // namespace detail

/// sup_f (sum nu f - rho_mu(f)) by ascent over mu-mean-zero f on the support
/// of mu. L-BFGS for the smooth families, supergradient steps otherwise.
inline DualSolveResult dual_divergence(const RiskSpec& spec, const FiniteDist& nu, const FiniteDist& mu,
                                       const DualOptions& opt = {}) {
  if (!nu.same_space(mu)) throw Error(ErrorCode::kSpaceMismatch, "dual divergence needs a common atom set");
  DualSolveResult out;
  out.maximizer.values.assign(mu.size(), 0.0);
  if (!absolutely_continuous(nu, mu)) {
    out.value = kInf;
    return out;
  }
  std::vector<std::size_t> support;
  std::vector<double> mu_s, nu_s;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu.weight(i) <= 0.0) continue;
    support.push_back(i);
    mu_s.push_back(mu.weight(i));
    nu_s.push_back(nu.weight(i));
  }
  const std::size_t n = support.size();
  const FiniteDist base = make_dist_from_masses(index_labels(n, "s"), mu_s);
  RiskSpec local = spec;
  if (spec.family() == RiskSpec::Family::kCoherent) {
    std::vector<std::vector<double>> dens;
    for (const auto& d : spec.densities()) {
      if (d.size() != mu.size()) throw Error(ErrorCode::kInvalidDensity, "density length differs from space");
      std::vector<double> ds;
      for (std::size_t i : support) ds.push_back(d[i]);
      dens.push_back(std::move(ds));
    }
    local = RiskSpec::coherent(std::move(dens), base);
  }

  auto value_at = [&](const std::vector<double>& x) {
    double lin = 0.0;
    for (std::size_t i = 0; i < n; ++i) lin += nu_s[i] * x[i];
    return lin - rho_lifted(local, base, RandomVariable{x});
  };
  optimize::ValueAndGradient objective = [&](const std::vector<double>& x, std::vector<double>& grad) {
    const double v = value_at(x);
    if (opt.gradient == DualOptions::Gradient::kFiniteDifference) {
      std::vector<double> xp = x;
      for (std::size_t i = 0; i < n; ++i) {
        xp[i] = x[i] + opt.fd_step;
        const double up = value_at(xp);
        xp[i] = x[i] - opt.fd_step;
        const double dn = value_at(xp);
        xp[i] = x[i];
        grad[i] = (up - dn) / (2.0 * opt.fd_step);
      }
    } else {
      const auto g = lifted_gradient(local, base, RandomVariable{x});
      for (std::size_t i = 0; i < n; ++i) grad[i] = nu_s[i] - g[i];
    }
    return v;
  };

  optimize::AscentOptions ao;
  ao.max_iters = opt.max_iters;
  ao.step0 = opt.step0;
  ao.tol = opt.tol;
  const bool smooth = spec.family() == RiskSpec::Family::kEntropic ||
                      spec.family() == RiskSpec::Family::kShortfall || spec.family() == RiskSpec::Family::kOce;
  auto res = smooth ? optimize::lbfgs_maximize(objective, std::vector<double>(n, 0.0), ao)
                    : optimize::supergradient_maximize(objective, std::vector<double>(n, 0.0), ao);

  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean += mu_s[i] * res.x[i];
  for (double& v : res.x) v -= mean;
  out.value = std::max(res.value, value_at(res.x));
  for (std::size_t k = 0; k < n; ++k) out.maximizer.values[support[k]] = res.x[k];
  out.iterations = res.iterations;
  out.budget_exhausted = res.budget_exhausted;
  if (auto cf = detail::closed_form_for(spec, nu.weights(), mu.weights()); cf && std::isfinite(*cf)) {
    out.certified_gap = *cf - out.value;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dispatch.

inline double divergence_value(const DivergenceSpec& div, std::span<const double> nu, std::span<const double> mu) {
  if (nu.size() != mu.size()) throw Error(ErrorCode::kLengthMismatch, "divergence arguments differ in length");
  switch (div.family()) {
    case DivergenceSpec::Family::kRelativeEntropy: return relative_entropy(nu, mu, div.eta());
    case DivergenceSpec::Family::kPhiStar: return phi_divergence(nu, mu, div.utility());
    case DivergenceSpec::Family::kShortfall: return shortfall_divergence(nu, mu, div.loss());
    case DivergenceSpec::Family::kDual: {
      const auto atoms = index_labels(mu.size(), "a");
      const auto nu_d = make_dist_from_masses(atoms, {nu.begin(), nu.end()});
      const auto mu_d = make_dist_from_masses(atoms, {mu.begin(), mu.end()});
      return dual_divergence(div.risk(), nu_d, mu_d, div.options()).value;
    }
  }
  return kInf;
}

inline double evaluate_divergence(const DivergenceSpec& div, const FiniteDist& nu, const FiniteDist& mu) {
  if (!nu.same_space(mu)) throw Error(ErrorCode::kSpaceMismatch, "divergence needs a common atom set");
  return divergence_value(div, nu.weights(), mu.weights());
}

inline double relative_entropy(const FiniteDist& nu, const FiniteDist& mu, double eta = 1.0) {
  return evaluate_divergence(DivergenceSpec::relative_entropy(eta), nu, mu);
}
inline double phi_divergence(const FiniteDist& nu, const FiniteDist& mu, const UtilityFn& phi) {
  return evaluate_divergence(DivergenceSpec::phi_star(phi), nu, mu);
}
inline double shortfall_divergence(const FiniteDist& nu, const FiniteDist& mu, const LossFn& loss) {
  return evaluate_divergence(DivergenceSpec::shortfall(loss), nu, mu);
}

/// alpha(nu|mu) - alpha(nuK|muK).
inline GapValue dpi_gap(const DivergenceSpec& div, const FiniteDist& nu, const FiniteDist& mu, const Kernel& k) {
  const double fine = evaluate_divergence(div, nu, mu);
  const double coarse = evaluate_divergence(div, mean_measure(nu, k), mean_measure(mu, k));
  return extended_difference(fine, coarse);
}

/// True when dnu/dmu is constant on every fiber of T (relative tolerance 1e-12).
inline bool ratio_is_fiber_constant(const FiniteDist& nu, const FiniteDist& mu,
                                    const std::function<Label(const Label&)>& map) {
  const auto r = radon_nikodym(nu, mu);
  std::vector<std::pair<Label, double>> seen;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu.weight(i) <= 0.0) continue;
    const Label image = map(mu.atom(i));
    auto it = std::find_if(seen.begin(), seen.end(), [&](const auto& p) { return p.first == image; });
    if (it == seen.end()) {
      seen.emplace_back(image, r[i]);
    } else if (std::abs(it->second - r[i]) > 1e-12 * std::max({1.0, it->second, r[i]})) {
      return false;
    }
  }
  return true;
}

/// alpha(nu|mu) - alpha(nu o T^-1 | mu o T^-1); requires nu << mu.
inline GapValue sufficiency_gap(const DivergenceSpec& div, const FiniteDist& nu, const FiniteDist& mu,
                                const std::function<Label(const Label&)>& map) {
  radon_nikodym(nu, mu);  // throws NotAbsolutelyContinuous
  const double fine = evaluate_divergence(div, nu, mu);
  const double coarse = evaluate_divergence(div, pushforward(nu, map), pushforward(mu, map));
  return extended_difference(fine, coarse);
}

/// Divergence values after applying each map of the chain in turn.
inline std::vector<double> refinement_monotonicity(const DivergenceSpec& div, const FiniteDist& nu,
                                                   const FiniteDist& mu,
                                                   const std::vector<std::function<Label(const Label&)>>& chain) {
  std::vector<double> out;
  FiniteDist n = nu, m = mu;
  for (const auto& map : chain) {
    n = pushforward(n, map);
    m = pushforward(m, map);
    out.push_back(evaluate_divergence(div, n, m));
  }
  return out;
}

}  // namespace divlab

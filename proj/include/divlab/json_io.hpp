// Copyright 2026 The divlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// JSON encodings of distributions, kernels, partitions, losses, utilities
// and specs. Parsing failures raise ConfigParseError; unknown family or kind
// names raise UnknownFamily.

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "divlab/divergence_engine.hpp"
#include "divlab/error.hpp"
#include "divlab/extended_real.hpp"
#include "divlab/loss_library.hpp"
#include "divlab/prob_core.hpp"
#include "divlab/risk_engine.hpp"

namespace divlab::io {

using Json = nlohmann::json;

namespace detail {

[[noreturn]] inline void parse_error(const std::string& what) { throw Error(ErrorCode::kConfigParseError, what); }

inline const Json& field(const Json& j, const char* key) {
  if (!j.is_object()) parse_error(std::string("expected an object holding '") + key + "'");
  auto it = j.find(key);
  if (it == j.end()) parse_error(std::string("missing field '") + key + "'");
  return *it;
}

inline double number(const Json& j, const char* what) {
  if (!j.is_number()) parse_error(std::string("'") + what + "' must be a number");
  return j.get<double>();
}

inline double number_or(const Json& j, const char* key, double fallback) {
  if (!j.is_object() || !j.contains(key)) return fallback;
  return number(j.at(key), key);
}

inline std::string string_field(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_string()) parse_error(std::string("'") + key + "' must be a string");
  return v.get<std::string>();
}

inline std::vector<double> numbers(const Json& j, const char* what) {
  if (!j.is_array()) parse_error(std::string("'") + what + "' must be an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(number(v, what));
  return out;
}

inline std::vector<std::vector<double>> number_rows(const Json& j, const char* what) {
  if (!j.is_array()) parse_error(std::string("'") + what + "' must be an array of arrays");
  std::vector<std::vector<double>> out;
  for (const auto& row : j) out.push_back(numbers(row, what));
  return out;
}

inline Label label(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return v.dump();
  parse_error("atom labels must be strings or integers");
}

inline std::vector<Label> labels(const Json& j, const char* what) {
  if (!j.is_array()) parse_error(std::string("'") + what + "' must be an array of labels");
  std::vector<Label> out;
  for (const auto& v : j) out.push_back(label(v));
  return out;
}

}  // namespace detail

// --- prob_core -------------------------------------------------------------

inline Json to_json(const FiniteDist& d) { return Json{{"atoms", d.atoms()}, {"weights", d.weights()}}; }

inline FiniteDist dist_from_json(const Json& j) {
  return make_dist(detail::labels(detail::field(j, "atoms"), "atoms"),
                   detail::numbers(detail::field(j, "weights"), "weights"));
}

inline Json to_json(const Kernel& k) {
  return Json{{"source", k.source()}, {"rows", k.rows()}, {"target", k.target()}};
}

inline Kernel kernel_from_json(const Json& j) {
  return Kernel(detail::labels(detail::field(j, "source"), "source"),
                detail::labels(detail::field(j, "target"), "target"),
                detail::number_rows(detail::field(j, "rows"), "rows"));
}

inline Json to_json(const Partition& p) { return Json{{"blocks", p.blocks}}; }

inline Partition partition_from_json(const Json& j) {
  const Json& blocks = detail::field(j, "blocks");
  if (!blocks.is_array()) detail::parse_error("'blocks' must be an array");
  Partition p;
  for (const auto& b : blocks) p.blocks.push_back(detail::labels(b, "blocks"));
  return p;
}

/// Joints are written as a weight grid with one row per first-coordinate atom.
inline Json to_json(const JointDist& jd) {
  std::vector<std::vector<double>> grid(jd.n_rows(), std::vector<double>(jd.n_cols()));
  for (std::size_t i = 0; i < jd.n_rows(); ++i) {
    for (std::size_t k = 0; k < jd.n_cols(); ++k) grid[i][k] = jd(i, k);
  }
  return Json{{"row_atoms", jd.row_atoms()}, {"col_atoms", jd.col_atoms()}, {"weights", grid}};
}

inline JointDist joint_from_json(const Json& j) {
  auto grid = detail::number_rows(detail::field(j, "weights"), "weights");
  std::vector<double> flat;
  for (const auto& row : grid) flat.insert(flat.end(), row.begin(), row.end());
  return JointDist(detail::labels(detail::field(j, "row_atoms"), "row_atoms"),
                   detail::labels(detail::field(j, "col_atoms"), "col_atoms"), std::move(flat));
}

inline Json to_json(const Law& m) { return Json{{"values", m.values()}, {"weights", m.weights()}}; }

inline Law law_from_json(const Json& j) {
  const auto v = detail::numbers(detail::field(j, "values"), "values");
  const auto w = detail::numbers(detail::field(j, "weights"), "weights");
  return make_law(v, w);
}

inline Json to_json(const GapValue& g) {
  if (g.is_finite()) return g.value;
  return g.to_string();
}

inline GapValue gap_from_json(const Json& j) {
  if (j.is_number()) return GapValue::finite(j.get<double>());
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "+inf") return GapValue::plus_infinity();
    if (s == "-inf") return GapValue::minus_infinity();
    if (s == "vacuous") return GapValue::vacuous();
  }
  detail::parse_error("gap must be a number, \"+inf\", \"-inf\" or \"vacuous\"");
}

// --- loss_library ----------------------------------------------------------

inline Json to_json(const LossFn& l) {
  switch (l.kind()) {
    case LossFn::Kind::kExponential: return Json{{"kind", "exponential"}, {"eta", l.param()}};
    case LossFn::Kind::kPowerPlus: return Json{{"kind", "power_plus"}, {"p", l.param()}};
    case LossFn::Kind::kCustom: return Json{{"kind", "custom"}, {"xs", l.table().xs()}, {"ys", l.table().ys()}};
  }
  return {};
}

inline LossFn loss_from_json(const Json& j) {
  const auto kind = detail::string_field(j, "kind");
  if (kind == "exponential") return LossFn::exponential(detail::number_or(j, "eta", 1.0));
  if (kind == "power_plus") return LossFn::power_plus(detail::number(detail::field(j, "p"), "p"));
  if (kind == "custom") {
    return LossFn::custom(PiecewiseLinear::from_knots(detail::numbers(detail::field(j, "xs"), "xs"),
                                                      detail::numbers(detail::field(j, "ys"), "ys")));
  }
  throw Error(ErrorCode::kUnknownFamily, "unknown loss kind '" + kind + "'");
}

inline Json to_json(const UtilityFn& u) {
  switch (u.kind()) {
    case UtilityFn::Kind::kExpShift: return Json{{"kind", "exp_shift"}};
    case UtilityFn::Kind::kIdentity: return Json{{"kind", "identity"}};
    case UtilityFn::Kind::kHingePower: return Json{{"kind", "hinge_power"}, {"p", u.param()}};
    case UtilityFn::Kind::kCustom: return Json{{"kind", "custom"}, {"xs", u.table().xs()}, {"ys", u.table().ys()}};
  }
  return {};
}

inline UtilityFn utility_from_json(const Json& j) {
  const auto kind = detail::string_field(j, "kind");
  if (kind == "exp_shift") return UtilityFn::exp_shift();
  if (kind == "identity") return UtilityFn::identity();
  if (kind == "hinge_power") return UtilityFn::hinge_power(detail::number(detail::field(j, "p"), "p"));
  if (kind == "custom") {
    return UtilityFn::custom(PiecewiseLinear::from_knots(detail::numbers(detail::field(j, "xs"), "xs"),
                                                         detail::numbers(detail::field(j, "ys"), "ys")));
  }
  throw Error(ErrorCode::kUnknownFamily, "unknown utility kind '" + kind + "'");
}

// --- specs -----------------------------------------------------------------

inline Json to_json(const RiskSpec& s) {
  Json j{{"family", std::string(family_name(s.family()))}};
  switch (s.family()) {
    case RiskSpec::Family::kEntropic: j["eta"] = s.eta(); break;
    case RiskSpec::Family::kShortfall: j["loss"] = to_json(s.loss()); break;
    case RiskSpec::Family::kOce: j["utility"] = to_json(s.utility()); break;
    case RiskSpec::Family::kCoherent:
      j["densities"] = s.densities();
      if (s.reference()) j["reference"] = to_json(*s.reference());
      break;
    default: break;
  }
  return j;
}

inline RiskSpec risk_from_json(const Json& j) {
  const auto family = detail::string_field(j, "family");
  auto spec = [&]() -> RiskSpec {
    if (family == "entropic") return RiskSpec::entropic(detail::number_or(j, "eta", 1.0));
    if (family == "shortfall") return RiskSpec::shortfall(loss_from_json(detail::field(j, "loss")));
    if (family == "oce") return RiskSpec::oce(utility_from_json(detail::field(j, "utility")));
    if (family == "expectation") return RiskSpec::expectation();
    if (family == "esssup") return RiskSpec::esssup();
    if (family == "coherent") {
      std::optional<FiniteDist> ref;
      if (j.contains("reference")) ref = dist_from_json(j.at("reference"));
      return RiskSpec::coherent(detail::number_rows(detail::field(j, "densities"), "densities"), std::move(ref));
    }
    throw Error(ErrorCode::kUnknownFamily, "unknown risk family '" + family + "'");
  }();
  if (j.contains("numeric")) {
    const Json& n = j.at("numeric");
    auto& num = spec.numerics();
    num.root_tol = detail::number_or(n, "root_tol", num.root_tol);
    num.min_tol = detail::number_or(n, "min_tol", num.min_tol);
    num.max_expansions = static_cast<int>(detail::number_or(n, "max_expansions", num.max_expansions));
  }
  return spec;
}

inline Json to_json(const DualOptions& o) {
  return Json{{"max_iters", o.max_iters},
              {"step0", o.step0},
              {"tol", o.tol},
              {"gradient", o.gradient == DualOptions::Gradient::kAnalytic ? "analytic" : "finite_difference"}};
}

inline DualOptions dual_options_from_json(const Json& j) {
  DualOptions o;
  o.max_iters = static_cast<int>(detail::number_or(j, "max_iters", o.max_iters));
  o.step0 = detail::number_or(j, "step0", o.step0);
  o.tol = detail::number_or(j, "tol", o.tol);
  if (j.contains("gradient")) {
    const auto g = detail::string_field(j, "gradient");
    if (g == "analytic") {
      o.gradient = DualOptions::Gradient::kAnalytic;
    } else if (g == "finite_difference") {
      o.gradient = DualOptions::Gradient::kFiniteDifference;
    } else {
      detail::parse_error("gradient must be \"analytic\" or \"finite_difference\"");
    }
  }
  return o;
}

inline Json to_json(const DivergenceSpec& d) {
  Json j{{"family", std::string(family_name(d.family()))}};
  switch (d.family()) {
    case DivergenceSpec::Family::kRelativeEntropy: j["eta"] = d.eta(); break;
    case DivergenceSpec::Family::kPhiStar: j["utility"] = to_json(d.utility()); break;
    case DivergenceSpec::Family::kShortfall: j["loss"] = to_json(d.loss()); break;
    case DivergenceSpec::Family::kDual:
      j["spec"] = to_json(d.risk());
      j["options"] = to_json(d.options());
      break;
  }
  return j;
}

/// Divergence families, or a risk family name, which selects its induced divergence.
inline DivergenceSpec divergence_from_json(const Json& j) {
  const auto family = detail::string_field(j, "family");
  if (family == "relative_entropy") return DivergenceSpec::relative_entropy(detail::number_or(j, "eta", 1.0));
  if (family == "phi_star") return DivergenceSpec::phi_star(utility_from_json(detail::field(j, "utility")));
  if (family == "shortfall_div") return DivergenceSpec::shortfall(loss_from_json(detail::field(j, "loss")));
  if (family == "dual_of") {
    DualOptions opt;
    if (j.contains("options")) opt = dual_options_from_json(j.at("options"));
    return DivergenceSpec::dual_of(risk_from_json(detail::field(j, "spec")), opt);
  }
  return induced_divergence(risk_from_json(j));
}

}  // namespace divlab::io

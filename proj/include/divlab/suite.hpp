// Copyright 2026 The divlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

// Verification suites: a list of named searches with budgets and
// tolerances, run into per-check reports serialized as JSON or CSV.

#include <cstdint>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "divlab/consistency_lab.hpp"
#include "divlab/error.hpp"
#include "divlab/json_io.hpp"

namespace divlab {

inline constexpr int kReportSchemaVersion = 1;

struct CheckConfig {
  std::string name;
  SearchProblem problem;
  SearchBudget budget;
  Tolerances tolerances;
  bool must_pass = true;
};

struct SuiteConfig {
  std::vector<CheckConfig> checks;
};

struct ClassReport {
  std::string sampler;
  std::size_t trials = 0;
  std::size_t vacuous = 0;
  std::size_t violations = 0;
  std::size_t inconclusive = 0;
  std::optional<GapValue> worst_gap;

  friend bool operator==(const ClassReport&, const ClassReport&) = default;
};

struct CheckReport {
  std::string name;
  std::string target;
  std::size_t trials = 0;
  std::size_t vacuous = 0;
  std::optional<GapValue> worst_gap;
  std::string verdict;  // pass | violation | inconclusive
  std::uint64_t seed = 0;
  std::optional<std::size_t> worst_trial;
  double tol_noise = 0.0;
  double tol_violation = 0.0;
  bool must_pass = true;
  std::vector<ClassReport> classes;
  io::Json instance;  // worst instance, null when the verdict is pass

  friend bool operator==(const CheckReport&, const CheckReport&) = default;
};

/// Command-line overrides applied on top of a parsed suite.
struct SuiteOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<double> tol_noise;
  std::optional<double> tol_violation;
  std::optional<unsigned> workers;
};

namespace detail {

inline CheckConfig check_from_json(const io::Json& j, std::size_t index) {
  using io::detail::number_or;
  if (!j.is_object()) io::detail::parse_error("each check must be an object");
  CheckConfig c;
  c.problem.target = parse_target(io::detail::string_field(j, "target"));
  c.name = j.contains("name") ? io::detail::string_field(j, "name")
                              : std::string(target_name(c.problem.target)) + "_" + std::to_string(index);
  if (j.contains("spec")) c.problem.risk = io::risk_from_json(j.at("spec"));
  if (j.contains("divergence")) c.problem.divergence = io::divergence_from_json(j.at("divergence"));
  auto count = [&](const io::Json& src, const char* key, double fallback) {
    const double v = number_or(src, key, fallback);
    if (v < 0.0 || v != static_cast<double>(static_cast<std::uint64_t>(v))) {
      io::detail::parse_error(std::string("'") + key + "' must be a nonnegative integer");
    }
    return static_cast<std::uint64_t>(v);
  };
  c.budget.trials = count(j, "trials", static_cast<double>(c.budget.trials));
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) io::detail::parse_error("'seed' must be a nonnegative integer");
    c.budget.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("sizes")) {
    c.budget.E = count(j.at("sizes"), "E", static_cast<double>(c.budget.E));
    c.budget.F = count(j.at("sizes"), "F", static_cast<double>(c.budget.F));
    if (c.budget.E == 0 || c.budget.F == 0) io::detail::parse_error("sizes must be positive");
  }
  if (j.contains("sampler")) c.budget.sampler = parse_sampler_class(io::detail::string_field(j, "sampler"));
  if (j.contains("tolerances")) {
    c.tolerances.noise = number_or(j.at("tolerances"), "noise", c.tolerances.noise);
    c.tolerances.violation = number_or(j.at("tolerances"), "violation", c.tolerances.violation);
  }
  if (j.contains("must_pass")) {
    if (!j.at("must_pass").is_boolean()) io::detail::parse_error("'must_pass' must be a boolean");
    c.must_pass = j.at("must_pass").get<bool>();
  }
  // Fail early on checks that cannot run.
  switch (c.problem.target) {
    case Target::kChainRule:
    case Target::kSuperadditivity:
    case Target::kSubadditivity:
    case Target::kWeakSuperadditivity:
    case Target::kDpi:
    case Target::kDpiBijection:
    case Target::kSufficiencyMatched:
    case Target::kSufficiencyUnmatched:
    case Target::kJointConvexity:
    case Target::kDivergenceConvexity: c.problem.resolved_divergence(); break;
    default: c.problem.require_risk(); break;
  }
  return c;
}

}  // namespace detail

/// Accepts {"checks": [...]}, a bare array of checks, or a single check object.
inline SuiteConfig suite_from_json(const io::Json& j) {
  SuiteConfig suite;
  const io::Json* list = nullptr;
  io::Json single;
  if (j.is_array()) {
    list = &j;
  } else if (j.is_object() && j.contains("checks")) {
    list = &j.at("checks");
    if (!list->is_array()) io::detail::parse_error("'checks' must be an array");
  } else if (j.is_object() && j.contains("target")) {
    single = io::Json::array({j});
    list = &single;
  } else if (j.is_object() && j.empty()) {
    return suite;
  } else {
    io::detail::parse_error("suite must be an array of checks, {\"checks\": [...]}, or one check");
  }
  std::set<std::string> names;
  for (std::size_t i = 0; i < list->size(); ++i) {
    suite.checks.push_back(detail::check_from_json((*list)[i], i));
    if (!names.insert(suite.checks.back().name).second) {
      io::detail::parse_error("duplicate check name '" + suite.checks.back().name + "'");
    }
  }
  return suite;
}

inline io::Json parse_json_text(const std::string& text) {
  try {
    return io::Json::parse(text);
  } catch (const io::Json::exception& e) {
    throw Error(ErrorCode::kConfigParseError, e.what());
  }
}

inline void apply_overrides(SuiteConfig& suite, const SuiteOverrides& o) {
  for (auto& c : suite.checks) {
    if (o.seed) c.budget.seed = *o.seed;
    if (o.trials) c.budget.trials = *o.trials;
    if (o.tol_noise) c.tolerances.noise = *o.tol_noise;
    if (o.tol_violation) c.tolerances.violation = *o.tol_violation;
    if (o.workers) c.budget.workers = *o.workers;
  }
}

struct CheckRun {
  CheckReport report;
  SearchResult result;
};

inline CheckRun run_check(const CheckConfig& c) {
  CheckRun run;
  run.result = counterexample_search(c.problem, c.budget, c.tolerances);
  const auto& r = run.result;
  CheckReport& rep = run.report;
  rep.name = c.name;
  rep.target = std::string(target_name(c.problem.target));
  rep.trials = r.trials;
  rep.vacuous = r.vacuous;
  rep.worst_gap = r.worst;
  // A zero-trial check has no verdict of its own; it is reported as inconclusive.
  rep.verdict = std::string(verdict_name(r.verdict.value_or(Verdict::kInconclusive)));
  rep.seed = c.budget.seed;
  rep.worst_trial = r.worst_trial;
  rep.tol_noise = c.tolerances.noise;
  rep.tol_violation = c.tolerances.violation;
  rep.must_pass = c.must_pass;
  for (const auto& s : r.classes) {
    rep.classes.push_back({std::string(class_name(s.sampler)), s.trials, s.vacuous, s.violations, s.inconclusive,
                           s.worst});
  }
  if (rep.verdict != "pass" && !r.worst_instance.is_null()) rep.instance = r.worst_instance;
  return run;
}

inline std::vector<CheckReport> run_suite(const SuiteConfig& suite) {
  std::vector<CheckReport> out;
  for (const auto& c : suite.checks) out.push_back(run_check(c).report);
  return out;
}

/// True when some must-pass check reported a violation.
inline bool has_blocking_violation(const std::vector<CheckReport>& reports) {
  for (const auto& r : reports) {
    if (r.must_pass && r.verdict == "violation") return true;
  }
  return false;
}

// --- serialization ---------------------------------------------------------

inline io::Json to_json(const CheckReport& r) {
  io::Json j{{"name", r.name},
             {"target", r.target},
             {"trials", r.trials},
             {"vacuous", r.vacuous},
             {"worst_gap", r.worst_gap ? io::to_json(*r.worst_gap) : io::Json()},
             {"verdict", r.verdict},
             {"seed", r.seed},
             {"worst_trial", r.worst_trial ? io::Json(*r.worst_trial) : io::Json()},
             {"tolerances", {{"noise", r.tol_noise}, {"violation", r.tol_violation}}},
             {"must_pass", r.must_pass}};
  io::Json classes = io::Json::array();
  for (const auto& c : r.classes) {
    classes.push_back({{"sampler", c.sampler},
                       {"trials", c.trials},
                       {"vacuous", c.vacuous},
                       {"violations", c.violations},
                       {"inconclusive", c.inconclusive},
                       {"worst_gap", c.worst_gap ? io::to_json(*c.worst_gap) : io::Json()}});
  }
  j["classes"] = classes;
  if (!r.instance.is_null()) j["instance"] = r.instance;
  return j;
}

inline CheckReport report_from_json(const io::Json& j) {
  try {
    CheckReport r;
    r.name = j.at("name").get<std::string>();
    r.target = j.at("target").get<std::string>();
    r.trials = j.at("trials").get<std::size_t>();
    r.vacuous = j.at("vacuous").get<std::size_t>();
    if (!j.at("worst_gap").is_null()) r.worst_gap = io::gap_from_json(j.at("worst_gap"));
    r.verdict = j.at("verdict").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    if (!j.at("worst_trial").is_null()) r.worst_trial = j.at("worst_trial").get<std::size_t>();
    r.tol_noise = j.at("tolerances").at("noise").get<double>();
    r.tol_violation = j.at("tolerances").at("violation").get<double>();
    r.must_pass = j.at("must_pass").get<bool>();
    for (const auto& c : j.at("classes")) {
      ClassReport cr{c.at("sampler").get<std::string>(), c.at("trials").get<std::size_t>(),
                     c.at("vacuous").get<std::size_t>(), c.at("violations").get<std::size_t>(),
                     c.at("inconclusive").get<std::size_t>(), std::nullopt};
      if (!c.at("worst_gap").is_null()) cr.worst_gap = io::gap_from_json(c.at("worst_gap"));
      r.classes.push_back(std::move(cr));
    }
    if (j.contains("instance")) r.instance = j.at("instance");
    return r;
  } catch (const io::Json::exception& e) {
    throw Error(ErrorCode::kConfigParseError, std::string("malformed report: ") + e.what());
  }
}

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

struct EmitOptions {
  bool timestamp = true;
};

inline io::Json reports_to_json(const std::vector<CheckReport>& reports, const EmitOptions& opt = {}) {
  io::Json doc{{"schema_version", kReportSchemaVersion}};
  if (opt.timestamp) doc["generated_at"] = utc_timestamp();
  io::Json checks = io::Json::array();
  std::size_t violations = 0, blocking = 0;
  for (const auto& r : reports) {
    checks.push_back(to_json(r));
    if (r.verdict == "violation") {
      ++violations;
      if (r.must_pass) ++blocking;
    }
  }
  doc["checks"] = checks;
  doc["summary"] = {{"checks", reports.size()}, {"violations", violations}, {"must_pass_violations", blocking}};
  return doc;
}

inline std::vector<CheckReport> reports_from_json(const io::Json& doc) {
  if (!doc.is_object() || !doc.contains("checks") || !doc.at("checks").is_array()) {
    throw Error(ErrorCode::kConfigParseError, "report document needs a 'checks' array");
  }
  std::vector<CheckReport> out;
  for (const auto& c : doc.at("checks")) out.push_back(report_from_json(c));
  return out;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string format_gap(const std::optional<GapValue>& g) {
  if (!g) return "";
  return g->is_finite() ? format_double(g->value) : g->to_string();
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline std::string reports_to_csv(const std::vector<CheckReport>& reports) {
  std::string out = "name,trials,vacuous,worst_gap,verdict,seed\n";
  for (const auto& r : reports) {
    out += csv_field(r.name) + "," + std::to_string(r.trials) + "," + std::to_string(r.vacuous) + "," +
           format_gap(r.worst_gap) + "," + r.verdict + "," + std::to_string(r.seed) + "\n";
  }
  return out;
}

/// One row per scored trial: check,trial,gap.
inline std::string plot_csv(const std::vector<std::pair<std::string, const SearchResult*>>& runs) {
  std::string out = "check,trial,gap\n";
  for (const auto& [name, res] : runs) {
    for (std::size_t t = 0; t < res->outcomes.size(); ++t) {
      out += csv_field(name) + "," + std::to_string(t) + "," + format_gap(res->outcomes[t].score) + "\n";
    }
  }
  return out;
}

enum class ReportFormat { kJson, kCsv };

inline ReportFormat parse_format(std::string_view s) {
  if (s == "json") return ReportFormat::kJson;
  if (s == "csv") return ReportFormat::kCsv;
  throw Error(ErrorCode::kConfigParseError, "format must be json or csv");
}

inline std::string render_report(const std::vector<CheckReport>& reports, ReportFormat format,
                                 const EmitOptions& opt = {}) {
  if (format == ReportFormat::kCsv) return reports_to_csv(reports);
  return reports_to_json(reports, opt).dump(2) + "\n";
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw Error(ErrorCode::kIoError, "write to '" + path + "' failed");
}

inline void emit_report(const std::vector<CheckReport>& reports, ReportFormat format, const std::string& path,
                        const EmitOptions& opt = {}) {
  write_text(path, render_report(reports, format, opt));
}

}  // namespace divlab

// Copyright 2026 The divlab Authors
// SPDX-License-Identifier: Apache-2.0

// divlab command-line driver. Every subcommand reads one JSON document from
// --config PATH (or standard input) and writes its result to --out PATH (or
// standard output).

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>

#include "divlab/divlab.hpp"

namespace {

using divlab::io::Json;

struct CommonOptions {
  std::string config;
  std::string out;
  std::string format = "json";
};

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<double> tol_noise;
  std::optional<double> tol_violation;
  bool no_timestamp = false;
  std::string plot;
  std::optional<std::size_t> replay;
};

std::string read_input(const std::string& path) {
  if (path.empty() || path == "-") {
    return std::string(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw divlab::Error(divlab::ErrorCode::kIoError, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  divlab::write_text(path, text);
}

Json number_or_marker(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "+inf" : "-inf";
}

std::string render_values(const Json& doc, const std::string& format,
                          const std::vector<std::pair<std::string, Json>>& rows) {
  if (divlab::parse_format(format) == divlab::ReportFormat::kJson) return doc.dump(2) + "\n";
  std::string out = "quantity,value\n";
  for (const auto& [k, v] : rows) {
    out += k + "," + (v.is_number() ? divlab::format_double(v.get<double>()) : v.get<std::string>()) + "\n";
  }
  return out;
}

const Json& require(const Json& j, const char* key) { return divlab::io::detail::field(j, key); }

int cmd_risk(const CommonOptions& o) {
  const Json in = divlab::parse_json_text(read_input(o.config));
  const auto spec = divlab::io::risk_from_json(require(in, "spec"));
  double value = 0.0;
  if (in.contains("law")) {
    value = divlab::evaluate(spec, divlab::io::law_from_json(in.at("law")));
  } else {
    const auto mu = divlab::io::dist_from_json(require(in, "dist"));
    const divlab::RandomVariable f{divlab::io::detail::numbers(require(in, "f"), "f")};
    value = divlab::rho_lifted(spec, mu, f);
  }
  const Json doc{{"family", std::string(divlab::family_name(spec.family()))}, {"value", value}};
  write_output(o.out, render_values(doc, o.format, {{"value", value}}));
  return 0;
}

int cmd_div(const CommonOptions& o) {
  const Json in = divlab::parse_json_text(read_input(o.config));
  const auto nu = divlab::io::dist_from_json(require(in, "nu"));
  const auto mu = divlab::io::dist_from_json(require(in, "mu"));
  const std::string method = in.contains("method") ? divlab::io::detail::string_field(in, "method") : "closed";
  Json doc;
  std::vector<std::pair<std::string, Json>> rows;
  if (method == "dual") {
    const auto spec = divlab::io::risk_from_json(require(in, "spec"));
    divlab::DualOptions opt;
    if (in.contains("options")) opt = divlab::io::dual_options_from_json(in.at("options"));
    const auto r = divlab::dual_divergence(spec, nu, mu, opt);
    doc = {{"method", "dual"},
           {"value", number_or_marker(r.value)},
           {"iterations", r.iterations},
           {"budget_exhausted", r.budget_exhausted},
           {"maximizer", r.maximizer.values}};
    doc["certified_gap"] = r.certified_gap ? Json(*r.certified_gap) : Json();
    rows = {{"value", number_or_marker(r.value)}, {"iterations", static_cast<double>(r.iterations)}};
  } else if (method == "closed") {
    const auto div = in.contains("divergence") ? divlab::io::divergence_from_json(in.at("divergence"))
                                               : divlab::induced_divergence(divlab::io::risk_from_json(require(in, "spec")));
    const double v = divlab::evaluate_divergence(div, nu, mu);
    doc = {{"method", "closed"}, {"family", std::string(divlab::family_name(div.family()))}, {"value", number_or_marker(v)}};
    rows = {{"value", number_or_marker(v)}};
  } else {
    throw divlab::Error(divlab::ErrorCode::kConfigParseError, "method must be \"closed\" or \"dual\"");
  }
  write_output(o.out, render_values(doc, o.format, rows));
  return 0;
}

int cmd_conditional(const CommonOptions& o) {
  const Json in = divlab::parse_json_text(read_input(o.config));
  const auto spec = divlab::io::risk_from_json(require(in, "spec"));
  const auto mu = divlab::io::dist_from_json(require(in, "dist"));
  const divlab::RandomVariable x{divlab::io::detail::numbers(require(in, "X"), "X")};
  const auto part = divlab::io::partition_from_json(require(in, "partition"));
  const auto cond = divlab::rho_conditional(spec, mu, x, part);
  Json blocks = Json::array();
  std::vector<std::pair<std::string, Json>> rows;
  for (const auto& b : cond.blocks) {
    blocks.push_back({{"block", b.block}, {"atoms", part.blocks[b.block]}, {"weight", b.weight}, {"value", b.value}});
    rows.emplace_back("block_" + std::to_string(b.block), b.value);
  }
  const double composed = divlab::evaluate(spec, cond.law());
  const double direct = divlab::rho_lifted(spec, mu, x);
  const Json doc{{"blocks", blocks}, {"risk", direct}, {"risk_of_conditional", composed}, {"consistency_gap", composed - direct}};
  rows.emplace_back("risk", direct);
  rows.emplace_back("risk_of_conditional", composed);
  write_output(o.out, render_values(doc, o.format, rows));
  return 0;
}

divlab::SuiteConfig load_suite(const CommonOptions& o, const RunOptions& r) {
  auto suite = divlab::suite_from_json(divlab::parse_json_text(read_input(o.config)));
  divlab::SuiteOverrides ov;
  ov.seed = r.seed;
  ov.trials = r.trials;
  ov.tol_noise = r.tol_noise;
  ov.tol_violation = r.tol_violation;
  divlab::apply_overrides(suite, ov);
  return suite;
}

int run_checks(const CommonOptions& o, const RunOptions& r, bool keep_instances) {
  const auto suite = load_suite(o, r);
  const auto format = divlab::parse_format(o.format);
  std::vector<divlab::CheckReport> reports;
  std::vector<divlab::CheckRun> runs;
  for (const auto& c : suite.checks) {
    runs.push_back(divlab::run_check(c));
    if (keep_instances && !runs.back().result.worst_instance.is_null()) {
      runs.back().report.instance = runs.back().result.worst_instance;
    }
    reports.push_back(runs.back().report);
  }
  divlab::EmitOptions emit;
  emit.timestamp = !r.no_timestamp;
  write_output(o.out, divlab::render_report(reports, format, emit));
  if (!r.plot.empty()) {
    std::vector<std::pair<std::string, const divlab::SearchResult*>> series;
    for (const auto& run : runs) series.emplace_back(run.report.name, &run.result);
    divlab::write_text(r.plot, divlab::plot_csv(series));
  }
  return divlab::has_blocking_violation(reports) ? 1 : 0;
}

int cmd_replay(const CommonOptions& o, const RunOptions& r) {
  const auto suite = load_suite(o, r);
  Json out = Json::array();
  for (const auto& c : suite.checks) {
    const auto rep = divlab::replay_trial(c.problem, c.budget, *r.replay);
    out.push_back({{"check", c.name},
                   {"trial", rep.trial},
                   {"trial_seed", rep.seed},
                   {"sampler", std::string(divlab::class_name(rep.sampler))},
                   {"score", divlab::io::to_json(rep.score)},
                   {"instance", rep.instance}});
  }
  write_output(o.out, out.dump(2) + "\n");
  return 0;
}

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("--config", o.config, "Input JSON file (default: standard input)");
  app->add_option("--out", o.out, "Output file (default: standard output)");
  app->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"json", "csv"}));
}

void add_run(CLI::App* app, RunOptions& r) {
  app->add_option("--seed", r.seed, "Override every check's seed");
  app->add_option("--trials", r.trials, "Override every check's trial count");
  app->add_option("--tol-noise", r.tol_noise, "Noise band below zero still counted as a pass");
  app->add_option("--tol-violation", r.tol_violation, "Threshold below which a gap is a violation");
  app->add_flag("--no-timestamp", r.no_timestamp, "Omit the generation time from JSON reports");
  app->add_option("--plot", r.plot, "Write per-trial gaps as CSV (check,trial,gap)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"divlab: risk measures, induced divergences and consistency checks on finite spaces"};
  app.require_subcommand(1);
  CommonOptions common;
  RunOptions run;

  auto* risk = app.add_subcommand("risk", "Evaluate a risk measure on a law or on (dist, f)");
  auto* div = app.add_subcommand("div", "Evaluate a divergence in closed form or by the dual solver");
  auto* cond = app.add_subcommand("conditional", "Evaluate conditional risk on a partition");
  auto* verify = app.add_subcommand("verify", "Run a verification suite");
  auto* search = app.add_subcommand("search", "Run counterexample searches and report worst instances");
  for (auto* sub : {risk, div, cond, verify, search}) add_common(sub, common);
  add_run(verify, run);
  add_run(search, run);
  search->add_option("--replay", run.replay, "Replay one trial index and print its instance");

  CLI11_PARSE(app, argc, argv);
  try {
    if (risk->parsed()) return cmd_risk(common);
    if (div->parsed()) return cmd_div(common);
    if (cond->parsed()) return cmd_conditional(common);
    if (verify->parsed()) return run_checks(common, run, false);
    if (search->parsed()) return run.replay ? cmd_replay(common, run) : run_checks(common, run, true);
  } catch (const divlab::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 2;
}

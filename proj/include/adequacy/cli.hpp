#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "adequacy/analytics.hpp"
#include "adequacy/experiments.hpp"
#include "adequacy/linear_program.hpp"
#include "adequacy/lp_builder.hpp"
#include "adequacy/outputs.hpp"
#include "adequacy/scenario.hpp"
#include "adequacy/simplex.hpp"
#include "adequacy/solution_check.hpp"
#include "adequacy/voll.hpp"

namespace adequacy::cli {

inline constexpr const char* kToolVersion = "1.0.0";

enum ExitCode : int { ok = 0, invalid_input = 1, infeasible = 2, iteration_limit = 3, io_failure = 4 };

inline int exit_code(SolveStatus s) {
  switch (s) {
    case SolveStatus::optimal: return ok;
    case SolveStatus::infeasible:
    case SolveStatus::unbounded: return infeasible;
    case SolveStatus::iteration_limit: return iteration_limit;
  }
  return infeasible;
}

// 64-bit FNV-1a; byte-oriented, so identical on every platform.
inline std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream o;
  o << std::hex << std::setw(16) << std::setfill('0') << v;
  return o.str();
}

inline std::string utc_now() {
  const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Collects output files of one command and writes manifest.json last.
class RunRecorder {
 public:
  RunRecorder(std::string command, std::filesystem::path out) : command_(std::move(command)), out_(std::move(out)) {
    started_ = utc_now();
  }

  void scenario(const std::filesystem::path& dir, const RunConfig& cfg) {
    scenarios_.push_back(dir.string());
    config_dumps_.push_back(adequacy::detail::config_to_json(cfg).dump());
  }

  void write(const std::string& name, const std::string& content) {
    ensure_dir();
    detail::write_file(out_ / name, content);
    if (std::find(outputs_.begin(), outputs_.end(), name) == outputs_.end()) outputs_.push_back(name);
  }

  void note(const std::string& key, nlohmann::json value) { extra_[key] = std::move(value); }

  void finish(int code) {
    if (outputs_.empty()) return;
    nlohmann::json j;
    j["command"] = command_;
    j["scenario"] = scenarios_.size() == 1 ? nlohmann::json(scenarios_.front()) : nlohmann::json(scenarios_);
    std::string joined;
    for (const auto& d : config_dumps_) joined += d + "\n";
    j["config_hash"] = "fnv1a64:" + hex64(fnv1a(joined));
    j["tool_version"] = kToolVersion;
    j["started_at"] = started_;
    j["finished_at"] = utc_now();
    j["exit_code"] = code;
    j["outputs"] = outputs_;
    for (const auto& [k, v] : extra_.items()) j[k] = v;
    const auto tmp = out_ / ".manifest.json.tmp";
    detail::write_file(tmp, j.dump(2) + "\n");
    std::error_code ec;
    std::filesystem::rename(tmp, out_ / "manifest.json", ec);
    if (ec) throw IoError("cannot finalize manifest.json: " + ec.message());
  }

 private:
  void ensure_dir() {
    std::error_code ec;
    std::filesystem::create_directories(out_, ec);
    if (ec) throw IoError("cannot create output directory '" + out_.string() + "': " + ec.message());
  }

  std::string command_;
  std::filesystem::path out_;
  std::string started_;
  std::vector<std::string> scenarios_;
  std::vector<std::string> config_dumps_;
  std::vector<std::string> outputs_;
  nlohmann::json extra_ = nlohmann::json::object();
};

namespace detail {

inline Scenario load_valid(const std::filesystem::path& dir, std::ostream& err) {
  Scenario s = load_scenario(dir);
  const auto violations = validate(s);
  for (const auto& v : violations)
    if (v.severity == Severity::warning) err << "warning: " << v.location() << ": " << v.message << "\n";
  if (has_errors(violations)) {
    for (const auto& v : violations)
      if (v.severity == Severity::error) err << "error: " << v.location() << ": " << v.message << "\n";
    throw InputError("scenario '" + dir.string() + "' failed validation");
  }
  return s;
}

// Pins capacities to those in a previous solve's capacities files.
inline std::map<std::string, double> read_fixed_capacities(const std::filesystem::path& dir) {
  std::map<std::string, double> out;
  auto cell = [](const csv::Table& t, std::size_t row, const std::string& col) -> const std::string& {
    const auto c = t.column(col);
    if (!c) throw InputError(t.file, 1, col, "missing column");
    return t.rows[row][*c];
  };
  auto number = [&](const csv::Table& t, std::size_t row, const std::string& col) {
    const auto& text = cell(t, row, col);
    auto v = csv::parse_double(text);
    if (!v) throw InputError(t.file, t.lines[row], col, "malformed number '" + text + "'");
    return *v;
  };
  const auto caps = csv::read(dir / "capacities.csv", "capacities.csv");
  for (std::size_t i = 0; i < caps.rows.size(); ++i) {
    const auto key = cell(caps, i, "region") + "_" + cell(caps, i, "technology");
    out["CAP_" + key] = number(caps, i, "capacity_mw");
    if (cell(caps, i, "kind") == "storage") out["ECAP_" + key] = number(caps, i, "energy_capacity_mwh");
  }
  if (std::filesystem::exists(dir / "link_capacities.csv")) {
    const auto links = csv::read(dir / "link_capacities.csv", "link_capacities.csv");
    for (std::size_t i = 0; i < links.rows.size(); ++i)
      out["LCAP_" + cell(links, i, "link")] = number(links, i, "capacity_mw");
  }
  return out;
}

inline void write_dispatch_files(RunRecorder& rec, const Scenario& s, const LinearProgram& lp,
                                 std::span<const double> x) {
  const auto d = extract_dispatch(s, lp, x);
  rec.write("solution.csv", format_solution_csv(lp, x));
  rec.write("capacities.csv", outputs::capacities_csv(s, d));
  rec.write("link_capacities.csv", outputs::link_capacities_csv(s, d));
  rec.write("dispatch.csv", outputs::dispatch_csv(d));
  rec.write("shed.csv", outputs::shed_csv(d));
  rec.write("flows.csv", outputs::flows_csv(d));
}

struct Options {
  std::string input;
  std::vector<std::string> scenarios;
  std::vector<std::string> results;
  std::vector<std::string> solutions;
  std::string out;
  std::string fix_capacities;
  std::optional<double> threshold_hours;
  std::optional<double> event_threshold;
  std::string factors;
  unsigned jobs = 1;
};

inline std::vector<double> parse_factors(const std::string& text) {
  if (text.empty()) return {kDefaultSweepFactors.begin(), kDefaultSweepFactors.end()};
  std::vector<double> out;
  for (const auto& cell : csv::split(text)) {
    auto v = csv::parse_double(cell);
    if (!v || !(*v > 0) || !std::isfinite(*v)) throw InputError("--factors: '" + cell + "' is not a positive number");
    out.push_back(*v);
  }
  return out;
}

inline int cmd_voll_project(const Options& o, std::ostream& err) {
  RunRecorder rec("voll project", o.out);
  const auto records = voll::load_voll_inputs(o.input);
  std::string text;
  try {
    text = voll::format_voll_2050(records);
  } catch (const std::domain_error& e) {
    throw InputError(o.input + ": " + e.what());
  }
  rec.write("voll_2050.csv", text);
  rec.note("input", o.input);
  rec.finish(ok);
  (void)err;
  return ok;
}

inline int cmd_validate(const Options& o, std::ostream& out) {
  const auto s = load_scenario(o.scenarios.front());
  const auto violations = validate(s);
  for (const auto& v : violations)
    out << (v.severity == Severity::error ? "error" : "warning") << ": " << v.location() << ": " << v.message << "\n";
  return has_errors(violations) ? invalid_input : ok;
}

inline int cmd_solve(const Options& o, std::ostream& err) {
  RunRecorder rec("solve", o.out);
  const auto s = load_valid(o.scenarios.front(), err);
  rec.scenario(o.scenarios.front(), s.config);
  BuildOptions bo;
  if (!o.fix_capacities.empty()) bo.fixed_capacities = read_fixed_capacities(o.fix_capacities);
  const auto lp = build(s, bo);

  if (!o.solutions.empty()) {
    const auto x = import_solution_csv(lp, o.solutions.front());
    const auto chk = check_solution(lp, x);
    const auto split = cost_split(lp, x);
    const double tol = std::max(s.config.solver.feas_tol, 1e-7);
    nlohmann::json j;
    j["status"] = chk.feasible(tol) ? "imported" : "imported_infeasible";
    j["objective"] = outputs::number(split.total());
    j["c_system"] = outputs::number(split.system);
    j["c_lol"] = outputs::number(split.loss_of_load);
    j["iterations"] = 0;
    j["max_eq_residual"] = outputs::number(chk.max_eq_residual);
    j["max_ineq_violation"] = outputs::number(chk.max_ineq_violation);
    rec.write("solution.json", outputs::dump(j));
    if (!chk.feasible(tol)) {
      err << "imported solution violates the model: equality residual " << chk.max_eq_residual
          << ", inequality violation " << chk.max_ineq_violation << "\n";
      rec.finish(invalid_input);
      return invalid_input;
    }
    write_dispatch_files(rec, s, lp, x);
    rec.finish(ok);
    return ok;
  }

  const auto sol = solve(lp, solve_options(s));
  rec.write("solution.json", outputs::solution_json(sol));
  if (sol.status == SolveStatus::optimal) write_dispatch_files(rec, s, lp, sol.x);
  else err << "solve ended " << to_string(sol.status) << (sol.message.empty() ? "" : ": " + sol.message) << "\n";
  const int code = exit_code(sol.status);
  rec.finish(code);
  return code;
}

inline int cmd_metrics(const Options& o, std::ostream& err) {
  RunRecorder rec("metrics", o.out);
  std::vector<std::filesystem::path> sources;
  for (const auto& r : o.results) sources.push_back(std::filesystem::path(r) / "solution.csv");
  for (const auto& f : o.solutions) sources.emplace_back(f);
  if (sources.empty()) throw InputError("metrics needs --results DIR or --solution FILE");
  if (o.scenarios.size() != 1 && o.scenarios.size() != sources.size())
    throw InputError("metrics needs one --scenario, or one per result");

  std::vector<DispatchResult> years;
  std::vector<LullExportRow> lull;
  std::vector<EventDiagnosis> diags;
  std::optional<Scenario> shared;
  double threshold = 0;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const auto& dir = o.scenarios.size() == 1 ? o.scenarios.front() : o.scenarios[i];
    Scenario s = (o.scenarios.size() == 1 && shared) ? *shared : load_valid(dir, err);
    if (o.event_threshold) s.config.event_threshold_fraction = *o.event_threshold;
    if (o.scenarios.size() == 1) shared = s;
    if (o.scenarios.size() != 1 || i == 0) rec.scenario(dir, s.config);
    threshold = s.config.event_threshold_fraction;
    const auto lp = build(s);
    if (!std::filesystem::exists(sources[i])) throw InputError("missing result file '" + sources[i].string() + "'");
    const auto x = import_solution_csv(lp, sources[i]);
    const auto chk = check_solution(lp, x);
    if (!chk.feasible(1e-6))
      err << "warning: " << sources[i].string() << " violates the model (equality residual " << chk.max_eq_residual
          << ")\n";
    auto d = extract_dispatch(s, lp, x);
    std::vector<double> volls;
    for (const auto& r : s.regions) volls.push_back(r.country_voll);
    auto rows = lull_export_table(d, volls, threshold);
    lull.insert(lull.end(), rows.begin(), rows.end());
    auto dg = binding_limit_diagnosis(s, lp, x, s.config.solver.feas_tol, threshold);
    diags.insert(diags.end(), dg.begin(), dg.end());
    years.push_back(std::move(d));
  }
  const auto rep = make_report(years, threshold);
  rec.write("report.json", outputs::report_json(rep));
  rec.write("events.csv", outputs::events_csv(rep));
  rec.write("exceedance.csv", outputs::exceedance_csv(rep));
  rec.write("fig6.csv", outputs::fig6_csv(lull));
  rec.write("diagnosis.csv", outputs::diagnosis_csv(diags));
  rec.write("supply_split.csv", outputs::supply_split_csv(diags));
  rec.finish(ok);
  return ok;
}

inline int cmd_stabilize(const Options& o, std::ostream& err) {
  RunRecorder rec("stabilize", o.out);
  Scenario s = load_valid(o.scenarios.front(), err);
  if (o.event_threshold) s.config.event_threshold_fraction = *o.event_threshold;
  rec.scenario(o.scenarios.front(), s.config);
  const double threshold = o.threshold_hours.value_or(1.0);
  StabilizationResult res;
  try {
    res = stabilize(s, threshold);
  } catch (const SolveFailure& e) {
    err << "stabilize: " << e.what() << "\n";
    return exit_code(e.status());
  }
  rec.write("stabilization.json", outputs::stabilization_json(res.report));
  rec.write("solution.json", outputs::solution_json(res.stabilized));
  const int code = exit_code(res.stabilized.status);
  if (code == ok) {
    BuildOptions bo;
    bo.shed_cap_mwh = res.report.shed_cap_mwh;
    write_dispatch_files(rec, s, build(s, bo), res.stabilized.x);
  } else if (!res.report.feasible) {
    err << "stabilized model infeasible; binding caps:";
    for (const auto& c : res.report.binding_caps) err << " " << c;
    err << "\n";
  }
  rec.finish(code);
  return code;
}

inline int cmd_sweep(const Options& o, std::ostream& err) {
  RunRecorder rec("sweep", o.out);
  const auto s = load_valid(o.scenarios.front(), err);
  rec.scenario(o.scenarios.front(), s.config);
  const auto factors = parse_factors(o.factors);
  const auto res = voll_sweep(s, factors, o.jobs);
  rec.write("sweep.csv", outputs::sweep_csv(res));
  rec.note("partial", !res.complete);
  int code = ok;
  if (!res.complete) {
    err << "sweep aborted at " << res.failure << "\n";
    rec.note("failure", res.failure);
    code = exit_code(res.failure_status);
    if (code == ok) code = infeasible;
  }
  rec.finish(code);
  return code;
}

inline int cmd_export_mps(const Options& o, std::ostream& err) {
  RunRecorder rec("export-mps", o.out);
  const auto s = load_valid(o.scenarios.front(), err);
  rec.scenario(o.scenarios.front(), s.config);
  BuildOptions bo;
  if (!o.fix_capacities.empty()) bo.fixed_capacities = read_fixed_capacities(o.fix_capacities);
  rec.write("model.mps", to_mps(build(s, bo)));
  rec.finish(ok);
  return ok;
}

}  // namespace detail

// Runs one command line (without the program name). Data goes to files or
// `out`; diagnostics go to `err`.
inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Economically optimal adequacy assessment of multi-region energy systems", "adequacy"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);
  detail::Options o;

  auto add_scenario = [&](CLI::App* sub, bool many) {
    auto* opt = sub->add_option("--scenario", o.scenarios, "Scenario directory")->required()->check(CLI::ExistingDirectory);
    if (!many) opt->expected(1);
  };
  auto add_out = [&](CLI::App* sub) { sub->add_option("--out", o.out, "Output directory")->required(); };

  auto* voll_cmd = app.add_subcommand("voll", "VoLL processing");
  voll_cmd->require_subcommand(1);
  auto* project = voll_cmd->add_subcommand("project", "Project country VoLL values to 2050");
  project->add_option("--input", o.input, "voll_inputs.csv")->required();
  add_out(project);

  auto* validate_cmd = app.add_subcommand("validate", "Check a scenario directory");
  add_scenario(validate_cmd, false);

  auto* solve_cmd = app.add_subcommand("solve", "Build and solve the expansion and dispatch program");
  add_scenario(solve_cmd, false);
  add_out(solve_cmd);
  solve_cmd->add_option("--solution", o.solutions, "Import an external solution (name,value CSV) instead of solving")
      ->expected(1);
  solve_cmd->add_option("--fix-capacities", o.fix_capacities, "Directory with capacities.csv from an earlier solve")
      ->check(CLI::ExistingDirectory);

  auto* metrics_cmd = app.add_subcommand("metrics", "Reliability metrics from solved dispatches");
  add_scenario(metrics_cmd, true);
  add_out(metrics_cmd);
  metrics_cmd->add_option("--results", o.results, "Results directory of a solve (repeatable, one per weather year)");
  metrics_cmd->add_option("--solution", o.solutions, "Solution CSV (repeatable)");
  metrics_cmd->add_option("--event-threshold", o.event_threshold, "Shed fraction of demand that counts as an outage")
      ->check(CLI::Range(0.0, 1.0));

  auto* stab_cmd = app.add_subcommand("stabilize", "Re-optimize under a per-region outage limit");
  add_scenario(stab_cmd, false);
  add_out(stab_cmd);
  stab_cmd->add_option("--threshold-hours", o.threshold_hours, "Allowed loss of load, hours per year")
      ->check(CLI::NonNegativeNumber);
  stab_cmd->add_option("--event-threshold", o.event_threshold, "Shed fraction of demand that counts as an outage")
      ->check(CLI::Range(0.0, 1.0));

  auto* sweep_cmd = app.add_subcommand("sweep", "VoLL sensitivity sweep");
  add_scenario(sweep_cmd, false);
  add_out(sweep_cmd);
  sweep_cmd->add_option("--factors", o.factors, "Comma-separated VoLL factors");
  sweep_cmd->add_option("--jobs", o.jobs, "Factors solved concurrently")->check(CLI::PositiveNumber);

  auto* mps_cmd = app.add_subcommand("export-mps", "Write the program in fixed MPS format");
  add_scenario(mps_cmd, false);
  add_out(mps_cmd);
  mps_cmd->add_option("--fix-capacities", o.fix_capacities, "Directory with capacities.csv from an earlier solve")
      ->check(CLI::ExistingDirectory);

  try {
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : invalid_input;
  }

  try {
    if (project->parsed()) return detail::cmd_voll_project(o, err);
    if (validate_cmd->parsed()) return detail::cmd_validate(o, out);
    if (solve_cmd->parsed()) return detail::cmd_solve(o, err);
    if (metrics_cmd->parsed()) return detail::cmd_metrics(o, err);
    if (stab_cmd->parsed()) return detail::cmd_stabilize(o, err);
    if (sweep_cmd->parsed()) return detail::cmd_sweep(o, err);
    if (mps_cmd->parsed()) return detail::cmd_export_mps(o, err);
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return io_failure;
  } catch (const InputError& e) {
    err << "invalid input: " << e.what() << "\n";
    return invalid_input;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << "\n";
    return invalid_input;
  } catch (const std::domain_error& e) {
    err << "invalid input: " << e.what() << "\n";
    return invalid_input;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "I/O error: " << e.what() << "\n";
    return io_failure;
  }
  return invalid_input;
}

}  // namespace adequacy::cli

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "driftwatch/backtest.hpp"
#include "driftwatch/config.hpp"
#include "driftwatch/engine.hpp"
#include "driftwatch/generators.hpp"
#include "driftwatch/math.hpp"
#include "driftwatch/policy.hpp"
#include "driftwatch/scenario.hpp"

namespace {

using namespace driftwatch;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitParse = 3;
constexpr int kExitRuntime = 4;

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n') c = ' ';
  }
  return s;
}

Config resolve_config(const std::string& flag_path, bool require_costs_ok = true) {
  std::string path = flag_path;
  if (path.empty()) {
    if (const char* env = std::getenv("DRIFTWATCH_CONFIG")) path = env;
  }
  if (path.empty()) {
    throw ConfigError({"config: pass --config or set DRIFTWATCH_CONFIG"});
  }
  Config cfg = load_config_file(path);
  if (require_costs_ok) cfg.costs.validate();
  return cfg;
}

std::unique_ptr<std::ostream> open_output(const std::string& path, std::ostream*& out) {
  if (path.empty() || path == "-") {
    out = &std::cout;
    return nullptr;
  }
  auto file = std::make_unique<std::ofstream>(path);
  if (!*file) throw FieldError("out", "cannot open " + path);
  out = file.get();
  return file;
}

int cmd_simulate(const std::string& scenario_path, std::int64_t seed_flag,
                 const std::string& out_path) {
  sim::ScenarioSpec spec = sim::ScenarioSpec::load_file(scenario_path);
  if (seed_flag >= 0) spec.seed = static_cast<std::uint64_t>(seed_flag);
  std::ostream* out = nullptr;
  auto holder = open_output(out_path, out);
  for (const auto& line : sim::generate_jsonl(spec)) *out << line << '\n';
  out->flush();
  return kExitOk;
}

int cmd_monitor(const std::string& events_path, const std::string& config_path,
                const std::string& decisions_path, const std::string& snapshot_in,
                const std::string& snapshot_out, bool reset_on_trigger) {
  Config cfg = resolve_config(config_path);
  MonitorEngine engine(cfg);
  if (!snapshot_in.empty()) {
    std::ifstream in(snapshot_in);
    if (!in) throw FieldError("snapshot", "cannot open " + snapshot_in);
    std::ostringstream buf;
    buf << in.rdbuf();
    engine = MonitorEngine::load_snapshot(buf.str(), cfg);
  }
  engine.set_reset_on_trigger(reset_on_trigger);

  std::istream* in = &std::cin;
  std::ifstream file;
  if (!events_path.empty() && events_path != "-") {
    file.open(events_path);
    if (!file) throw FieldError("events", "cannot open " + events_path);
    in = &file;
  }
  std::ostream* out = nullptr;
  auto holder = open_output(decisions_path, out);

  std::string line;
  while (std::getline(*in, line)) {
    if (line.empty()) continue;
    for (const auto& d : engine.ingest_line(line)) {
      *out << d.to_jsonl() << '\n';
      out->flush();  // one decision per completed tick, no cross-tick buffering
    }
  }
  for (const auto& d : engine.finish()) {
    *out << d.to_jsonl() << '\n';
    out->flush();
  }
  if (!snapshot_out.empty()) {
    std::ofstream snap(snapshot_out);
    if (!snap) throw FieldError("snapshot", "cannot open " + snapshot_out);
    snap << engine.save_snapshot();
  }
  return kExitOk;
}

int cmd_backtest(const std::string& scenario_path, const std::string& config_path,
                 int seeds, std::int64_t seed_flag, const std::string& policies_flag,
                 const std::string& report_path, const std::string& csv_path,
                 const std::string& decisions_path) {
  sim::ScenarioSpec spec = sim::ScenarioSpec::load_file(scenario_path);
  if (seed_flag >= 0) spec.seed = static_cast<std::uint64_t>(seed_flag);

  Config cfg;
  if (!config_path.empty() || std::getenv("DRIFTWATCH_CONFIG")) {
    cfg = resolve_config(config_path);
  } else {
    CostModel costs{1000.0, 500.0, 0.0, 14.0};
    cfg = sim::default_config_for(spec, costs);
  }

  std::vector<sim::PolicySpec> policies;
  std::stringstream ss(policies_flag);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (!token.empty()) policies.push_back(sim::PolicySpec::parse(token));
  }
  if (policies.empty()) throw FieldError("policies", "need at least one policy");

  std::vector<sim::BacktestReport> runs;
  for (int s = 0; s < std::max(seeds, 1); ++s) {
    sim::ScenarioSpec seeded = spec;
    seeded.seed = spec.seed + static_cast<std::uint64_t>(s);
    runs.push_back(sim::run_backtest(seeded, cfg, policies));
  }

  // Median summary per policy.
  nlohmann::json summary = nlohmann::json::object();
  for (std::size_t pi = 0; pi < policies.size(); ++pi) {
    std::vector<double> totals, churns, biases, delays;
    for (const auto& run : runs) {
      const auto& pr = run.policies[pi];
      totals.push_back(pr.total_dollars);
      churns.push_back(pr.churn_dollars);
      biases.push_back(pr.bias_dollars);
      if (pr.detection_delay) delays.push_back(static_cast<double>(*pr.detection_delay));
    }
    nlohmann::json entry;
    entry["median_total_dollars"] = math::median(totals);
    entry["median_churn_dollars"] = math::median(churns);
    entry["median_bias_dollars"] = math::median(biases);
    if (!delays.empty()) entry["median_detection_delay"] = math::median(delays);
    summary[policies[pi].name()] = entry;
  }

  nlohmann::json report;
  report["scenario"] = spec.name;
  report["base_seed"] = spec.seed;
  report["seeds"] = std::max(seeds, 1);
  report["summary"] = summary;
  nlohmann::json run_array = nlohmann::json::array();
  for (const auto& run : runs) run_array.push_back(nlohmann::json::parse(run.to_json()));
  report["runs"] = run_array;

  std::ostream* out = nullptr;
  auto holder = open_output(report_path, out);
  *out << report.dump(2) << '\n';
  out->flush();

  if (!csv_path.empty()) {
    std::ofstream csv(csv_path);
    if (!csv) throw FieldError("csv", "cannot open " + csv_path);
    csv << runs.front().csv_header() << '\n';
    for (const auto& run : runs) {
      for (const auto& row : run.csv_rows()) csv << row << '\n';
    }
  }
  if (!decisions_path.empty()) {
    std::ofstream dec(decisions_path);
    if (!dec) throw FieldError("decisions", "cannot open " + decisions_path);
    for (const auto& run : runs) {
      for (const auto& pr : run.policies) {
        for (const auto& line : pr.decision_log) dec << line << '\n';
      }
    }
  }
  return kExitOk;
}

int cmd_sensitivity(const std::string& config_path, double p_shift, bool as_json) {
  Config cfg = resolve_config(config_path);
  const auto grid = policy::sensitivity(p_shift, cfg.costs, cfg.decision);
  std::cout << (as_json ? grid.to_json() : grid.to_text()) << '\n';
  return kExitOk;
}

int cmd_report(const std::string& decisions_path) {
  std::ifstream in(decisions_path);
  if (!in) throw FieldError("decisions", "cannot open " + decisions_path);
  std::size_t ticks = 0, retrains = 0, holds = 0, warmup = 0, cooldown = 0;
  double max_p = 0.0;
  std::map<std::string, int> retrains_by_series;
  std::map<std::string, double> contribution_at_trigger;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto d = policy::RetrainDecision::from_jsonl(line);
    ++ticks;
    max_p = std::max(max_p, d.p_shift);
    for (const auto& f : d.flags) {
      if (f == "warmup") ++warmup;
      if (f == "cooldown") ++cooldown;
    }
    if (d.action == policy::Action::retrain) {
      ++retrains;
      ++retrains_by_series[d.series_id];
      for (const auto& s : d.signals) contribution_at_trigger[s.signal_id] += s.contribution;
    } else {
      ++holds;
    }
  }
  std::cout << "decisions: " << ticks << " (hold " << holds << ", retrain " << retrains
            << ", warmup " << warmup << ", cooldown-suppressed " << cooldown << ")\n";
  std::cout << "max p_shift: " << max_p << '\n';
  for (const auto& [series, n] : retrains_by_series) {
    std::cout << "series " << series << ": " << n << " retrain(s)\n";
  }
  if (retrains > 0) {
    std::cout << "log-odds contributions at triggers:\n";
    for (const auto& [id, c] : contribution_at_trigger) {
      if (c != 0.0) std::cout << "  " << id << ": " << c / static_cast<double>(retrains) << '\n';
    }
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"streaming retraining-decision engine"};
  app.require_subcommand(1);

  std::string scenario_path, config_path, out_path, events_path, decisions_path;
  std::string snapshot_in, snapshot_out, policies_flag, report_path, csv_path;
  std::int64_t seed_flag = -1;
  int seeds = 1;
  double p_shift = 0.0;
  bool reset_on_trigger = false;
  bool as_json = false;

  auto* sim_cmd = app.add_subcommand("simulate", "generate a scenario event stream");
  sim_cmd->add_option("--scenario", scenario_path, "scenario JSON file")->required();
  sim_cmd->add_option("--seed", seed_flag, "override the scenario seed");
  sim_cmd->add_option("--out", out_path, "output JSONL path (default stdout)");

  auto* mon_cmd = app.add_subcommand("monitor", "stream events to per-tick decisions");
  mon_cmd->add_option("--events", events_path, "events JSONL path or - for stdin");
  mon_cmd->add_option("--config", config_path, "config JSON (or DRIFTWATCH_CONFIG)");
  mon_cmd->add_option("--decisions", decisions_path, "decision JSONL out (default stdout)");
  mon_cmd->add_option("--snapshot-in", snapshot_in, "resume from a snapshot");
  mon_cmd->add_option("--snapshot-out", snapshot_out, "write a snapshot at end of stream");
  mon_cmd->add_flag("--reset-on-trigger", reset_on_trigger,
                    "reset monitors when a retrain fires (backtest semantics)");

  auto* bt_cmd = app.add_subcommand("backtest", "price retraining policies on a scenario");
  bt_cmd->add_option("--scenario", scenario_path, "scenario JSON file")->required();
  bt_cmd->add_option("--config", config_path, "config JSON (default: scenario defaults)");
  bt_cmd->add_option("--seeds", seeds, "number of seeds (base seed from scenario)");
  bt_cmd->add_option("--seed", seed_flag, "override the base seed");
  bt_cmd->add_option("--policies", policies_flag, "comma list of policies")
      ->default_val("learning_debt,calendar(7),calendar(30),never,oracle");
  bt_cmd->add_option("--report", report_path, "report JSON out (default stdout)");
  bt_cmd->add_option("--csv", csv_path, "flat CSV table out");
  bt_cmd->add_option("--decisions", decisions_path, "learning-debt decision log out");

  auto* sens_cmd = app.add_subcommand("sensitivity", "2x cost perturbation grid");
  sens_cmd->add_option("--config", config_path, "config JSON (or DRIFTWATCH_CONFIG)");
  sens_cmd->add_option("--p-shift", p_shift, "shift probability to evaluate")->required();
  sens_cmd->add_flag("--json", as_json, "emit JSON instead of text");

  auto* rep_cmd = app.add_subcommand("report", "summarize a decision log");
  rep_cmd->add_option("--decisions", decisions_path, "decision JSONL file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim_cmd->parsed()) return cmd_simulate(scenario_path, seed_flag, out_path);
    if (mon_cmd->parsed()) {
      return cmd_monitor(events_path, config_path, decisions_path, snapshot_in, snapshot_out,
                         reset_on_trigger);
    }
    if (bt_cmd->parsed()) {
      return cmd_backtest(scenario_path, config_path, seeds, seed_flag, policies_flag,
                          report_path, csv_path, decisions_path);
    }
    if (sens_cmd->parsed()) return cmd_sensitivity(config_path, p_shift, as_json);
    if (rep_cmd->parsed()) return cmd_report(decisions_path);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << one_line(e.what()) << '\n';
    return kExitConfig;
  } catch (const FieldError& e) {
    std::cerr << "error: " << one_line(e.what()) << '\n';
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << one_line(e.what()) << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "sociallearn/bundled.hpp"
#include "sociallearn/error.hpp"
#include "sociallearn/figures.hpp"
#include "sociallearn/runner.hpp"
#include "sociallearn/scenario.hpp"

namespace fs = std::filesystem;
using namespace sociallearn;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;

int cmd_validate(const std::string& path) {
  const ScenarioConfig c = load_scenario(path);
  const ScenarioCheck check = validate_scenario(c);
  nlohmann::json out = {{"name", c.name},
                        {"nodes", c.models.size()},
                        {"hypotheses", c.hypotheses.size()},
                        {"strongly_connected", check.graph.strongly_connected},
                        {"period", check.graph.period},
                        {"globally_identifiable", check.distinguishability.globally_identifiable},
                        {"warnings", check.warnings}};
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_simulate(const std::string& path, const std::string& out_dir, std::optional<std::uint64_t> seed,
                 unsigned threads) {
  ScenarioConfig c = load_scenario(path);
  if (seed) c.seed = *seed;
  const fs::path dir = out_dir.empty() ? fs::path("out") / c.name : fs::path(out_dir);
  fs::create_directories(dir);
  const RunResult result = run(c, threads);
  {
    std::ofstream trace(dir / "trace.csv");
    write_trace_csv(trace, result.traces, c.full_trace);
  }
  std::ofstream(dir / "report.json") << report_to_json(result.report).dump(2) << '\n';
  std::cout << "wrote " << (dir / "trace.csv").string() << " and " << (dir / "report.json").string() << '\n';
  for (const auto& e : result.report.errors) {
    std::cerr << "replication " << e.rep << " stopped after " << e.steps << " steps: " << e.message << '\n';
  }
  return 0;
}

int cmd_analyze(const std::string& trace_path, const std::string& config_path) {
  const ScenarioConfig c = load_scenario(config_path);
  std::ifstream in(trace_path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + trace_path);
  const auto traces = read_trace_csv(in, c.models.size(), c.hypotheses.size());
  std::cout << report_to_json(analyze(c, traces)).dump(2) << '\n';
  return 0;
}

int cmd_ldp(const std::string& path, const std::vector<double>& epsilons) {
  ScenarioConfig c = load_scenario(path);
  if (!epsilons.empty()) c.analysis.epsilons = epsilons;
  const AnalysisReport report = analyze(c, {});
  const nlohmann::json full = report_to_json(report);
  nlohmann::json out = {{"scenario", c.name},
                        {"network", full["network"]},
                        {"predictions", full["predictions"]},
                        {"log_ratio_bound", full["log_ratio_bound"]},
                        {"ldp", full["ldp"]},
                        {"rate_function", full["rate_function"]},
                        {"warnings", full["warnings"]}};
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_reproduce(const std::string& id, const std::string& out_dir) {
  const fs::path dir = out_dir.empty() ? fs::path("out") / id : fs::path(out_dir);
  const FigureResult r = reproduce(id, dir);
  std::cout << r.id << ": " << (r.passed ? "PASS" : "FAIL") << " - " << r.claim << '\n';
  for (const auto& f : r.files) std::cout << "  " << f.string() << '\n';
  return 0;
}

int cmd_scenarios(const std::string& out_dir) {
  for (const auto& name : bundled_scenario_names()) {
    if (out_dir.empty()) {
      std::cout << name << '\n';
      continue;
    }
    fs::create_directories(out_dir);
    std::ofstream(fs::path(out_dir) / (name + ".json")) << scenario_to_json(bundled_scenario(name)).dump(2) << '\n';
    std::cout << "wrote " << (fs::path(out_dir) / (name + ".json")).string() << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed hypothesis testing with log-linear belief consensus"};
  app.require_subcommand(1);

  std::string config;
  std::string trace;
  std::string out_dir;
  std::string figure;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::vector<double> epsilons;

  auto* validate = app.add_subcommand("validate", "Check a scenario config");
  validate->add_option("config", config, "Config file or bundled scenario name")->required();

  auto* simulate = app.add_subcommand("simulate", "Run all replications and write trace.csv and report.json");
  simulate->add_option("config", config, "Config file or bundled scenario name")->required();
  simulate->add_option("--out", out_dir, "Output directory (default out/<name>)");
  auto* seed_opt = simulate->add_option("--seed", seed, "Override the master seed");
  simulate->add_option("--threads", threads, "Worker threads (0 = all cores)");

  auto* analyze_cmd = app.add_subcommand("analyze", "Recompute the report from a full trace");
  analyze_cmd->add_option("trace", trace, "trace.csv written by simulate")->required();
  analyze_cmd->add_option("config", config, "Config the trace came from")->required();

  auto* ldp = app.add_subcommand("ldp", "Deviation exponents without simulation");
  ldp->add_option("config", config, "Config file or bundled scenario name")->required();
  ldp->add_option("--epsilons", epsilons, "Deviation sizes in nats per step");

  auto* repro = app.add_subcommand("reproduce", "Regenerate one figure's data (fig2..fig11)");
  repro->add_option("figure_id", figure, "Figure id")->required();
  repro->add_option("--out", out_dir, "Output directory (default out/<figure_id>)");

  auto* scenarios = app.add_subcommand("scenarios", "List bundled scenarios, or write them as JSON with --out");
  scenarios->add_option("--out", out_dir, "Directory for the JSON files");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*validate) return cmd_validate(config);
    if (*simulate) {
      return cmd_simulate(config, out_dir, *seed_opt ? std::optional<std::uint64_t>(seed) : std::nullopt, threads);
    }
    if (*analyze_cmd) return cmd_analyze(trace, config);
    if (*ldp) return cmd_ldp(config, epsilons);
    if (*repro) return cmd_reproduce(figure, out_dir);
    if (*scenarios) return cmd_scenarios(out_dir);
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    switch (e.code()) {
      case ErrorCode::ParseError:
      case ErrorCode::ValidationError:
      case ErrorCode::UnknownFigure:
        return kExitValidation;
      default:
        return kExitRuntime;
    }
  } catch (const std::exception& e) {
    std::cerr << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "sociallearn/bundled.hpp"
#include "sociallearn/figures.hpp"
#include "sociallearn/runner.hpp"
#include "sociallearn/scenario.hpp"

namespace fs = std::filesystem;
using namespace sociallearn;
using nlohmann::json;

namespace {

json small_bernoulli() {
  auto c = bundled_scenario("two_node_bernoulli");
  c.horizon = 40;
  c.replications = 5;
  c.analysis.brute_force_horizon = 0;
  return scenario_to_json(c);
}

std::string validation_message(const json& doc) {
  try {
    validate_scenario(scenario_from_json(doc));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ValidationError);
    return e.what();
  }
  return "";
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SOCIALLEARN_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("sociallearn_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("bundled scenarios load and validate") {
  const auto names = bundled_scenario_names();
  CHECK(names.size() == 10);
  for (const auto& name : names) {
    CAPTURE(name);
    const auto c = bundled_scenario(name);
    CHECK(c.name == name);
    const auto check = validate_scenario(c);
    CHECK(check.w.size() == c.models.size());
    CHECK(is_bundled_scenario(name));
  }
  CHECK_FALSE(is_bundled_scenario("nope"));
  CHECK_THROWS_CODE(bundled_scenario("nope"), ErrorCode::InvalidArgument);

  const auto grid = bundled_scenario("grid5x5");
  CHECK(grid.models.size() == 25);
  for (const auto& row : grid.weights) {
    double s = 0.0;
    for (double w : row) s += w;
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(grid.weights[12][7] == doctest::Approx(0.25));
  CHECK(grid.weights[12][12] == 0.0);
  CHECK(grid.weights[0][1] == doctest::Approx(0.5));
  CHECK(grid.weights[2][1] == doctest::Approx(1.0 / 3.0));

  const auto nc = validate_scenario(bundled_scenario("not_conn"));
  CHECK_FALSE(nc.graph.strongly_connected);
  CHECK_FALSE(nc.warnings.empty());
  CHECK(validate_scenario(bundled_scenario("two_node_bernoulli_periodic")).graph.period == 2);
}

TEST_CASE("invalid configs name the violated assumption") {
  json doc = small_bernoulli();
  doc["prior"] = {0.5, 0.5, 0.0, 0.0};
  CHECK(validation_message(doc).find("positive initial beliefs") != std::string::npos);

  doc = small_bernoulli();
  doc["network"]["weights"] = {{0.9, 0.2}, {0.4, 0.6}};
  CHECK(validation_message(doc).find("row-stochastic") != std::string::npos);

  doc = small_bernoulli();
  doc["models"][0]["p"] = {0.8, 0.25, 1.2, 0.25};
  CHECK_FALSE(validation_message(doc).empty());

  doc = small_bernoulli();
  doc["hypotheses"]["true_index"] = 9;
  CHECK_FALSE(validation_message(doc).empty());

  doc = small_bernoulli();
  doc["schema_version"] = 7;
  CHECK_FALSE(validation_message(doc).empty());

  CHECK_THROWS_CODE(parse_scenario("{ not json"), ErrorCode::ParseError);
  // Well-formed JSON that does not follow the schema.
  CHECK(validation_message(json::array({1, 2})).find("schema") != std::string::npos);
  doc = small_bernoulli();
  doc.erase("models");
  CHECK(validation_message(doc).find("schema") != std::string::npos);
  doc = small_bernoulli();
  doc["horizon"] = "long";
  CHECK(validation_message(doc).find("schema") != std::string::npos);
}

TEST_CASE("configs round-trip through JSON and match the shipped files") {
  for (const auto& name : bundled_scenario_names()) {
    CAPTURE(name);
    const json doc = scenario_to_json(bundled_scenario(name));
    CHECK(scenario_to_json(scenario_from_json(doc)) == doc);
    CHECK(scenario_to_json(parse_scenario(doc.dump())) == doc);
    const fs::path file = fs::path(SOCIALLEARN_SOURCE_DIR) / "scenarios" / (name + ".json");
    REQUIRE(fs::exists(file));
    CHECK(scenario_to_json(load_scenario(file)) == doc);
  }
  CHECK(scenario_to_json(load_scenario("two_node_gaussian")) == scenario_to_json(bundled_scenario("two_node_gaussian")));
  CHECK_THROWS(load_scenario("/nonexistent/dir/x.json"));
}

TEST_CASE("runs are deterministic in the seed and independent of thread count") {
  const auto config = scenario_from_json(small_bernoulli());
  const auto a = run(config, 1);
  const auto b = run(config, 1);
  const auto c = run(config, 4);
  const std::string ra = report_to_json(a.report).dump();
  CHECK(ra == report_to_json(b.report).dump());
  CHECK(ra == report_to_json(c.report).dump());
  std::ostringstream ta, tc;
  write_trace_csv(ta, a.traces, true);
  write_trace_csv(tc, c.traces, true);
  CHECK(ta.str() == tc.str());

  auto other = config;
  other.seed += 1;
  CHECK(report_to_json(run(other, 1).report).dump() != ra);

  // Replication r's stream does not depend on R.
  auto more = config;
  more.replications = 8;
  const auto m = simulate_all(more, 2);
  for (std::size_t r = 0; r < config.replications; ++r) {
    CHECK(m[r].seed == a.traces[r].seed);
    CHECK(m[r].log_q == a.traces[r].log_q);
  }
  CHECK(replication_seed(config.seed, 0) != replication_seed(config.seed, 1));
}

TEST_CASE("trace CSV has one row per (rep, t, node, hypothesis) and reads back exactly") {
  const auto config = scenario_from_json(small_bernoulli());
  const auto traces = simulate_all(config, 1);
  std::ostringstream out;
  write_trace_csv(out, traces, true);
  const std::string text = out.str();
  const auto lines = std::count(text.begin(), text.end(), '\n');
  CHECK(static_cast<std::size_t>(lines) == 1 + config.replications * config.horizon * 2 * 4);
  CHECK(text.rfind("rep,t,node,hypothesis,log_belief,rho\n", 0) == 0);

  std::istringstream in(text);
  const auto back = read_trace_csv(in, 2, 4);
  REQUIRE(back.size() == traces.size());
  for (std::size_t r = 0; r < traces.size(); ++r) CHECK(back[r].log_q == traces[r].log_q);
  CHECK(report_to_json(analyze(config, back))["slopes"] == report_to_json(analyze(config, traces))["slopes"]);

  std::istringstream bad("rep,t,node\n1,2,3\n");
  CHECK_THROWS_CODE(read_trace_csv(bad, 2, 4), ErrorCode::ParseError);

  std::ostringstream last;
  write_trace_csv(last, traces, false);
  const std::string lt = last.str();
  CHECK(static_cast<std::size_t>(std::count(lt.begin(), lt.end(), '\n')) == 1 + config.replications * 2 * 4);
}

TEST_CASE("report contents") {
  auto config = bundled_scenario("two_node_bernoulli");
  config.horizon = 400;
  config.replications = 4;
  config.analysis.brute_force_horizon = 4;
  const auto result = run(config, 1);
  const auto& r = result.report;
  CHECK(r.counts.replications == 4);
  CHECK(r.counts.completed == 4);
  CHECK(r.strongly_connected);
  CHECK(r.period == 1);
  CHECK(r.centrality[0] == doctest::Approx(0.8).epsilon(1e-12));
  CHECK(r.k_vec.size() == 3);
  CHECK(r.slopes.size() == 2 * 3);
  CHECK(r.ldp.size() == config.analysis.epsilons.size() * 3);
  for (const auto& row : r.ldp) {
    if (row.hypothesis == 0) {
      REQUIRE(row.exact_tail_probability.has_value());
      CHECK(*row.exact_tail_probability >= 0.0);
      CHECK(*row.exact_tail_probability <= 1.0);
    }
  }
  CHECK_FALSE(r.rate_function.empty());
  REQUIRE(r.recursion_residual.has_value());
  CHECK(*r.recursion_residual <= 1e-9);
  const json j = report_to_json(r);
  CHECK(j.contains("slopes"));
  CHECK(json::parse(j.dump()) == j);
  // Outside the range of the statistic the exponent is reported as "inf".
  bool saw_inf = false;
  for (const auto& row : j["ldp"])
    if (row["rate_above"]["value"].is_string()) {
      CHECK(row["rate_above"]["value"] == "inf");
      saw_inf = true;
    }
  CHECK(saw_inf);
}

TEST_CASE("disconnected network keeps indistinguishable hypotheses at the prior ratio") {
  auto config = bundled_scenario("not_conn");
  config.horizon = 1500;
  config.replications = 3;
  const auto result = run(config, 1);
  const auto& fb = result.report.final_beliefs;
  REQUIRE(fb.size() == 2);
  CHECK(fb[0][1] == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(fb[0][3] == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("figures") {
  CHECK(figure_ids().size() == 10);
  CHECK_THROWS_CODE(reproduce("fig99", scratch("fig")), ErrorCode::UnknownFigure);
  const auto dir = scratch("fig9");
  const auto res = reproduce("fig9", dir);
  CHECK(res.id == "fig9");
  CHECK(fs::exists(dir / "fig9_summary.json"));
  for (const auto& f : res.files) CHECK(fs::exists(f));
  CHECK(quantized_absorption_mechanism(255, 10));
}

TEST_CASE("command-line exit codes") {
  const auto dir = scratch("cli");
  CHECK(run_cli("validate two_node_bernoulli") == 0);
  CHECK(run_cli("scenarios --out " + dir.string()) == 0);
  CHECK(fs::exists(dir / "grid5x5.json"));
  CHECK(run_cli("ldp two_node_gaussian --epsilons 0.1") == 0);

  std::ofstream(dir / "bad.json") << "{ nope";
  CHECK(run_cli("validate " + (dir / "bad.json").string()) == 2);
  json zero = small_bernoulli();
  zero["prior"] = {1.0, 0.0, 0.0, 0.0};
  std::ofstream(dir / "zero.json") << zero.dump();
  CHECK(run_cli("validate " + (dir / "zero.json").string()) == 2);
  CHECK(run_cli("reproduce fig99 --out " + dir.string()) == 2);
  CHECK(run_cli("frobnicate") != 0);

  std::ofstream(dir / "small.json") << small_bernoulli().dump();
  const auto out = dir / "run";
  CHECK(run_cli("simulate " + (dir / "small.json").string() + " --out " + out.string() + " --threads 2") == 0);
  REQUIRE(fs::exists(out / "trace.csv"));
  REQUIRE(fs::exists(out / "report.json"));
  CHECK(run_cli("analyze " + (out / "trace.csv").string() + " " + (dir / "small.json").string()) == 0);
}

#include "sociallearn/bundled.hpp"

#include <algorithm>

#include "sociallearn/error.hpp"

namespace sociallearn {

std::vector<NodeModel> two_node_bernoulli_models() {
  return {NodeModel(Bernoulli{{0.8, 0.25, 0.8, 0.25}}), NodeModel(Bernoulli{{1.0 / 3.0, 1.0 / 3.0, 0.25, 0.25}})};
}

// Scalar sufficient statistic of the two-node Gaussian example: node 1 sees
// the column (theta1, theta3 vs theta2, theta4), node 2 the row.
std::vector<NodeModel> two_node_gaussian_models() {
  return {NodeModel(Gaussian{{1.0, 0.0, 1.0, 0.0}, 1.0}), NodeModel(Gaussian{{2.0, 2.0, 0.0, 0.0}, 1.0})};
}

std::vector<std::vector<double>> aperiodic_two_node_weights() { return {{0.9, 0.1}, {0.4, 0.6}}; }
std::vector<std::vector<double>> periodic_two_node_weights() { return {{0.0, 1.0}, {1.0, 0.0}}; }
std::vector<std::vector<double>> not_connected_weights() { return {{1.0, 0.0}, {0.5, 0.5}}; }

namespace {

ScenarioConfig two_node_base(std::string name) {
  ScenarioConfig c;
  c.name = std::move(name);
  c.hypotheses = numbered_hypotheses(4, 3);
  c.weights = aperiodic_two_node_weights();
  c.models = two_node_bernoulli_models();
  c.horizon = 10000;
  c.replications = 20;
  c.seed = 20240601;
  c.analysis.node = 1;
  c.analysis.epsilons = {0.05, 0.1, 0.2};
  return c;
}

}  // namespace

ScenarioConfig grid_scenario(std::size_t informed) {
  if (informed >= 25) throw Error(ErrorCode::InvalidArgument, "informed node out of range");
  ScenarioConfig c;
  c.name = "grid5x5";
  c.hypotheses = numbered_hypotheses(5, 3);
  c.weights = grid_weights(5, 5);
  for (std::size_t i = 0; i < 25; ++i) {
    if (i == informed) {
      c.models.emplace_back(Gaussian{{0.0, 1.0, 2.0, 3.0, 4.0}, 1.0});
    } else {
      c.models.emplace_back(Gaussian{{0.0, 0.0, 0.0, 0.0, 0.0}, 1.0});
    }
  }
  c.horizon = 2000;
  c.replications = 10;
  c.seed = 77;
  c.analysis.node = 4;
  c.analysis.epsilons = {0.02};
  return c;
}

ScenarioConfig sensor_network_scenario(std::uint64_t levels) {
  ScenarioConfig c;
  c.name = levels == 0 ? "sensor_network" : "sensor_network_" + std::to_string(levels);
  // Cell (ix, iy, iz) -> index ix + 4 iy + 16 iz; axis intervals are
  // (-2,-1], (-1,0), [0,1), [1,2). theta1 = (0,0,0) is the truth.
  std::vector<std::string> labels;
  for (std::size_t h = 0; h < 64; ++h) labels.push_back("theta" + std::to_string(h + 1));
  c.hypotheses = make_hypotheses(labels, 0);
  // Sensors at +x, -x, +y, -y, +z, -z on a directed ring: node i listens to
  // itself and node i-1.
  c.weights.assign(6, std::vector<double>(6, 0.0));
  for (std::size_t i = 0; i < 6; ++i) {
    c.weights[i][i] = 0.5;
    c.weights[i][(i + 5) % 6] = 0.5;
  }
  for (std::size_t node = 0; node < 6; ++node) {
    const std::size_t axis = node / 2;
    const bool plus = node % 2 == 0;
    std::vector<double> means;
    for (std::size_t h = 0; h < 64; ++h) {
      const std::size_t cell = axis == 0 ? h % 4 : axis == 1 ? (h / 4) % 4 : h / 16;
      // Mean floor(3 + x) for the +2 sensor and floor(3 - x) for the -2 sensor.
      means.push_back(plus ? static_cast<double>(cell + 1) : static_cast<double>(4 - cell));
    }
    c.models.emplace_back(Gaussian{means, 1.0});
  }
  c.horizon = 300;
  c.replications = 100;
  c.seed = 4242;
  c.analysis.node = 2;
  c.full_trace = false;
  if (levels > 0) {
    c.quantization.enabled = true;
    c.quantization.levels = levels;
  }
  return c;
}

std::vector<std::string> bundled_scenario_names() {
  return {"two_node_bernoulli", "two_node_bernoulli_periodic", "two_node_gaussian", "two_node_gaussian_linear",
          "not_conn",           "grid5x5",                     "sensor_network",    "sensor_network_255",
          "sensor_network_4095", "quantized_two_node"};
}

bool is_bundled_scenario(const std::string& name) {
  const auto names = bundled_scenario_names();
  return std::find(names.begin(), names.end(), name) != names.end();
}

ScenarioConfig bundled_scenario(const std::string& name) {
  if (name == "two_node_bernoulli") {
    auto c = two_node_base(name);
    c.analysis.brute_force_horizon = 8;
    return c;
  }
  if (name == "two_node_bernoulli_periodic") {
    auto c = two_node_base(name);
    c.weights = periodic_two_node_weights();
    return c;
  }
  if (name == "two_node_gaussian" || name == "two_node_gaussian_linear") {
    auto c = two_node_base(name);
    c.models = two_node_gaussian_models();
    c.horizon = 2000;
    c.replications = 10;
    c.analysis.epsilons = {0.1};
    if (name == "two_node_gaussian_linear") c.rule = ConsensusRule::LinearBaseline;
    return c;
  }
  if (name == "not_conn") {
    auto c = two_node_base(name);
    c.models = two_node_gaussian_models();
    c.weights = not_connected_weights();
    c.horizon = 5000;
    c.replications = 10;
    c.analysis.epsilons = {};
    return c;
  }
  if (name == "grid5x5") return grid_scenario(12);
  if (name == "sensor_network") return sensor_network_scenario(0);
  if (name == "sensor_network_255") return sensor_network_scenario(255);
  if (name == "sensor_network_4095") return sensor_network_scenario(4095);
  if (name == "quantized_two_node") {
    auto c = two_node_base(name);
    c.horizon = 5000;
    c.replications = 50;
    c.quantization.enabled = true;
    c.quantization.levels = 4095;
    c.full_trace = false;
    c.analysis.epsilons = {};
    return c;
  }
  throw Error(ErrorCode::InvalidArgument, "no bundled scenario named '" + name + "'");
}

}  // namespace sociallearn

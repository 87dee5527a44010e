#pragma once

#include <string>
#include <vector>

#include "sociallearn/scenario.hpp"

namespace sociallearn {

// Scenario recipes shipped with the tool. The JSON files under scenarios/
// are these configs serialized with scenario_to_json.
std::vector<std::string> bundled_scenario_names();
bool is_bundled_scenario(const std::string& name);
ScenarioConfig bundled_scenario(const std::string& name);  // throws InvalidArgument

// Building blocks shared by the recipes and the test suite.
std::vector<NodeModel> two_node_bernoulli_models();
std::vector<NodeModel> two_node_gaussian_models();
std::vector<std::vector<double>> aperiodic_two_node_weights();  // [[0.9,0.1],[0.4,0.6]]
std::vector<std::vector<double>> periodic_two_node_weights();   // [[0,1],[1,0]]
std::vector<std::vector<double>> not_connected_weights();       // [[1,0],[0.5,0.5]]

// 5x5 grid, M = 5, truth theta4; only `informed` distinguishes hypotheses.
ScenarioConfig grid_scenario(std::size_t informed);

// Six one-axis sensors on a directed ring, M = 64 location cells, truth theta1.
ScenarioConfig sensor_network_scenario(std::uint64_t levels);

}  // namespace sociallearn

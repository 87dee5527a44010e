#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "sociallearn/engine.hpp"
#include "sociallearn/network.hpp"
#include "sociallearn/obsmodels.hpp"

namespace sociallearn {

inline constexpr int kSchemaVersion = 1;

struct AnalysisRequest {
  std::size_t node = 0;            // node whose rho feeds the deviation table and tail oracle
  std::vector<double> epsilons;    // deviation thresholds, nats/step
  std::size_t checkpoints = 10;    // time points in the deviation table
  std::size_t brute_force_horizon = 0;  // 0 disables the exact tail oracle
};

struct ScenarioConfig {
  int schema_version = kSchemaVersion;
  std::string name;
  HypothesisSet hypotheses;
  std::vector<std::vector<double>> weights;
  std::size_t ref_node = 0;
  std::vector<NodeModel> models;
  std::vector<double> prior;  // empty means uniform
  std::size_t horizon = 1;
  std::size_t replications = 1;
  std::uint64_t seed = 0;
  QuantizationSpec quantization;
  ConsensusRule rule = ConsensusRule::LogLinear;
  AnalysisRequest analysis;
  bool full_trace = true;
};

// Result of running every module-level validator on a config.
struct ScenarioCheck {
  StochasticMatrix w;
  GraphStructure graph;
  DistinguishabilityReport distinguishability;
  std::vector<std::string> warnings;
};

// parse_scenario throws ParseError for text that is not JSON. Both parsers
// throw ValidationError ("schema: ...") for documents that do not follow the
// schema; the remaining assumptions are checked by validate_scenario.
ScenarioConfig scenario_from_json(const nlohmann::json& doc);
nlohmann::json scenario_to_json(const ScenarioConfig& config);
ScenarioConfig parse_scenario(const std::string& text);

// Reads and validates a config file. A bare name with no such file resolves to the bundled
// scenario of that name.
ScenarioConfig load_scenario(const std::filesystem::path& path);

ScenarioCheck validate_scenario(const ScenarioConfig& config);

}  // namespace sociallearn

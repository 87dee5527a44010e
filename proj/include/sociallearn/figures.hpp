#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "sociallearn/runner.hpp"

namespace sociallearn {

struct FigureResult {
  std::string id;
  std::string claim;
  bool passed = false;
  std::vector<std::filesystem::path> files;
  nlohmann::json details;
};

std::vector<std::string> figure_ids();  // fig2 .. fig11

// Runs the desk-scale recipe for one figure, writes its CSV files and a
// summary.json into out_dir, and checks the figure's qualitative claim.
// Throws UnknownFigure.
FigureResult reproduce(const std::string& figure_id, const std::filesystem::path& out_dir);

// Fitted slope of -ln q(node, k) for every completed replication, in
// replication order; absorbed replications give NaN.
std::vector<double> replication_slopes(const std::vector<ReplicationTrace>& traces, std::size_t horizon,
                                       std::size_t node, std::size_t k);
std::vector<double> replication_residual_variances(const std::vector<ReplicationTrace>& traces,
                                                   std::size_t horizon, std::size_t node, std::size_t k);

// Drives a node whose public belief in the truth is below 1/(2D) through
// one quantized step and a further `extra_steps` steps with observations
// favouring the truth; true when the truth's belief is exactly zero after
// every one of them.
bool quantized_absorption_mechanism(std::uint64_t levels, std::size_t extra_steps);

}  // namespace sociallearn

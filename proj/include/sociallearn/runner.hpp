#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "sociallearn/analysis.hpp"
#include "sociallearn/engine.hpp"
#include "sociallearn/error.hpp"
#include "sociallearn/scenario.hpp"

namespace sociallearn {

// SplitMix64 finalizer of (master, rep); replication r's stream does not
// depend on R.
std::uint64_t replication_seed(std::uint64_t master, std::size_t rep);

struct ReplicationTrace {
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  std::vector<BeliefMatrix> log_q;  // log_q[t-1] after step t
  std::optional<ErrorCode> error;   // run stopped early
  std::string error_message;
  // Max recursion-identity deviation over all steps; NaN when not tracked
  // (quantized or linear runs, traces read back from CSV).
  double recursion_residual = 0.0;

  bool complete(std::size_t horizon) const { return !error && log_q.size() == horizon; }
};

ReplicationTrace simulate_replication(const ScenarioConfig& config, const StochasticMatrix& w, std::size_t rep,
                                      std::uint64_t seed);

struct TaggedValue {
  double value = 0.0;
  std::string tag;
};

struct SlopeSummary {
  std::size_t node = 0;
  std::size_t hypothesis = 0;
  double mean = 0.0;       // mean fitted slope of -ln q, nats/step
  double std_error = 0.0;  // across replications (fit stderr when only one)
  double residual_variance = 0.0;  // mean over replications
  std::size_t replications = 0;    // replications that produced a fit
  std::size_t absorbed = 0;        // replications skipped because q hit zero
  std::optional<double> predicted;
};

struct DeviationRow {
  double epsilon = 0.0;
  std::size_t hypothesis = 0;
  std::vector<std::size_t> t;
  std::vector<double> fraction;  // share of replications with |rho - K| > eps
};

struct LdpRow {
  double epsilon = 0.0;
  std::size_t hypothesis = 0;
  double k = 0.0;
  double below = 0.0;  // I~_k(K - eps), +inf outside the range
  double above = 0.0;  // I~_k(K + eps)
  std::optional<HoeffdingExponents> hoeffding;
  // -(1/t) ln P(rho <= K - eps) from exact enumeration, when requested.
  std::optional<double> exact_tail_exponent;
  std::optional<double> exact_tail_probability;
};

struct RateFunctionRow {
  double epsilon = 0.0;
  std::size_t hypothesis = 0;
  std::vector<double> y;
  double separable = 0.0;
  double joint = 0.0;
};

struct RunCounts {
  std::size_t replications = 0;
  std::size_t completed = 0;
  std::size_t converged = 0;         // every node's argmax is the truth
  std::size_t wrong_convergence = 0; // completed, some node's argmax is wrong
  std::size_t truth_absorbed = 0;    // some node holds q(truth) = 0
  std::size_t all_zero_message = 0;
  std::size_t other_errors = 0;
};

struct ReplicationError {
  std::size_t rep = 0;
  std::size_t steps = 0;
  ErrorCode code = ErrorCode::InvalidArgument;
  std::string message;
};

struct AnalysisReport {
  std::string scenario;
  std::size_t horizon = 0;
  bool strongly_connected = false;
  unsigned period = 0;
  std::vector<double> centrality;
  bool identifiable = false;
  std::vector<std::string> warnings;
  std::vector<TaggedValue> k_vec;  // aligned with wrong_hypotheses
  std::vector<std::size_t> wrong_hypotheses;
  std::optional<TaggedValue> mu_lower;
  std::optional<TaggedValue> rho_l_lower;
  std::optional<double> log_ratio_bound;
  std::vector<SlopeSummary> slopes;
  std::vector<DeviationRow> deviations;
  std::vector<LdpRow> ldp;
  std::vector<RateFunctionRow> rate_function;
  RunCounts counts;
  std::vector<std::vector<double>> final_beliefs;  // mean over completed replications
  std::optional<double> recursion_residual;
  std::vector<ReplicationError> errors;
};

AnalysisReport analyze(const ScenarioConfig& config, const std::vector<ReplicationTrace>& traces);

struct RunResult {
  std::vector<ReplicationTrace> traces;
  AnalysisReport report;
};

// threads = 0 uses the hardware concurrency. Output does not depend on it.
RunResult run(const ScenarioConfig& config, unsigned threads = 0);
std::vector<ReplicationTrace> simulate_all(const ScenarioConfig& config, unsigned threads = 0);

nlohmann::json report_to_json(const AnalysisReport& report);

// Headered CSV rep,t,node,hypothesis,log_belief,rho. With full = false only
// the last step of each replication is written.
void write_trace_csv(std::ostream& out, const std::vector<ReplicationTrace>& traces, bool full);
// Inverse of write_trace_csv for full traces. Throws ParseError.
std::vector<ReplicationTrace> read_trace_csv(std::istream& in, std::size_t nodes, std::size_t hypotheses);

}  // namespace sociallearn

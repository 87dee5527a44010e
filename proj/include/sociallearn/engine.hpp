#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sociallearn/network.hpp"
#include "sociallearn/obsmodels.hpp"

namespace sociallearn {

// Dense n x M matrix of log-beliefs (or log-likelihoods), row per node.
class BeliefMatrix {
public:
  BeliefMatrix() = default;
  BeliefMatrix(std::size_t nodes, std::size_t hypotheses, double fill = 0.0)
      : n_(nodes), m_(hypotheses), data_(nodes * hypotheses, fill) {}

  std::size_t nodes() const noexcept { return n_; }
  std::size_t hypotheses() const noexcept { return m_; }
  double& operator()(std::size_t i, std::size_t k) { return data_[i * m_ + k]; }
  double operator()(std::size_t i, std::size_t k) const { return data_[i * m_ + k]; }
  std::span<double> row(std::size_t i) { return {data_.data() + i * m_, m_}; }
  std::span<const double> row(std::size_t i) const { return {data_.data() + i * m_, m_}; }

  bool operator==(const BeliefMatrix&) const = default;

private:
  std::size_t n_ = 0;
  std::size_t m_ = 0;
  std::vector<double> data_;
};

// Private (log_q) and public (log_b) beliefs, natural-log space. A belief of
// exactly zero is stored as -inf and stays there.
struct BeliefState {
  BeliefMatrix log_q;
  BeliefMatrix log_b;
  std::uint64_t t = 0;
};

struct QuantizationSpec {
  bool enabled = false;
  std::uint64_t levels = 1;  // D
};

enum class ConsensusRule { LogLinear, LinearBaseline };

struct StepInput {
  std::vector<Observation> observations;  // one per node
};

// Uniform when prior is empty. Throws ZeroPrior on a nonpositive entry.
BeliefState init_beliefs(std::size_t n, std::size_t m, std::span<const double> prior = {});

// log_lik(i, k) = ln f_i(x_i; theta_k).
BeliefMatrix evaluate_log_likelihoods(const std::vector<NodeModel>& models, const StepInput& input);

// Local Bayesian update of every node, written into log_b.
void bayes_update(const BeliefMatrix& log_q, const BeliefMatrix& log_lik, BeliefMatrix& log_b);
BeliefMatrix bayes_step(const BeliefState& state, const std::vector<NodeModel>& models,
                        const StepInput& input);

// Weighted geometric mean of the received public beliefs, renormalized.
void consensus_update(const BeliefMatrix& log_b, const StochasticMatrix& w, BeliefMatrix& log_q);
BeliefMatrix consensus_step(const BeliefMatrix& log_b, const StochasticMatrix& w);

// Arithmetic mean of the received public beliefs (computed in log space).
void linear_consensus_update(const BeliefMatrix& log_b, const StochasticMatrix& w, BeliefMatrix& log_q);

// [D b] with ties at .5 rounded down.
std::uint64_t quantize_level(double belief, std::uint64_t levels);
std::vector<std::vector<std::uint64_t>> quantize_message(const BeliefMatrix& log_b,
                                                         const QuantizationSpec& spec);
// Normalizes one received message row. Zero levels stay exactly zero.
std::vector<double> dequantize_normalize(std::span<const std::uint64_t> message);

// One synchronous round with precomputed log-likelihoods: Bayes, optional
// quantization of the public beliefs, then consensus. Updates state in place.
void advance(BeliefState& state, const BeliefMatrix& log_lik, const StochasticMatrix& w,
             const QuantizationSpec& spec, ConsensusRule rule = ConsensusRule::LogLinear);

BeliefState step(const BeliefState& state, const std::vector<NodeModel>& models,
                 const StochasticMatrix& w, const StepInput& input, const QuantizationSpec& spec);
BeliefState baseline_linear_step(const BeliefState& state, const std::vector<NodeModel>& models,
                                 const StochasticMatrix& w, const StepInput& input);

// Largest deviation of ln(q_i(truth)/q_i(k)) at the new state from
// sum_j W_ij [ln(f_j(x_j;truth)/f_j(x_j;k)) + ln(q_j(truth)/q_j(k)) at the
// previous state], over all nodes and all k with finite ratios.
double recursion_residual(const BeliefState& previous, const BeliefState& next,
                          const BeliefMatrix& log_lik, const StochasticMatrix& w, std::size_t truth);

}  // namespace sociallearn

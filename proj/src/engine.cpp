#include "sociallearn/engine.hpp"

#include <cmath>
#include <string>

#include "sociallearn/error.hpp"
#include "sociallearn/numeric.hpp"

namespace sociallearn {

namespace {

void require_shape(const BeliefMatrix& a, std::size_t n, std::size_t m, const char* what) {
  if (a.nodes() != n || a.hypotheses() != m) {
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + " has the wrong shape");
  }
}

void normalize_row_or_throw(std::span<double> row, std::size_t node, const char* phase) {
  if (normalize_log(row) == kNegInf) {
    throw Error(ErrorCode::AllZeroPosterior,
                std::string(phase) + " left node " + std::to_string(node) + " with no belief mass");
  }
}

}  // namespace

BeliefState init_beliefs(std::size_t n, std::size_t m, std::span<const double> prior) {
  if (n == 0 || m == 0) throw Error(ErrorCode::InvalidArgument, "empty belief state");
  std::vector<double> log_prior(m, -std::log(static_cast<double>(m)));
  if (!prior.empty()) {
    if (prior.size() != m) throw Error(ErrorCode::DimensionMismatch, "prior length differs from M");
    double sum = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      if (!(prior[k] > 0.0)) {
        throw Error(ErrorCode::ZeroPrior, "prior entry " + std::to_string(k) + " is not strictly positive");
      }
      sum += prior[k];
    }
    if (std::abs(sum - 1.0) > 1e-9) throw Error(ErrorCode::InvalidArgument, "prior does not sum to 1");
    for (std::size_t k = 0; k < m; ++k) log_prior[k] = std::log(prior[k] / sum);
  }
  BeliefState s{BeliefMatrix(n, m), BeliefMatrix(n, m), 0};
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < m; ++k) s.log_q(i, k) = s.log_b(i, k) = log_prior[k];
  return s;
}

BeliefMatrix evaluate_log_likelihoods(const std::vector<NodeModel>& models, const StepInput& input) {
  if (input.observations.size() != models.size()) {
    throw Error(ErrorCode::DimensionMismatch, "one observation per node required");
  }
  const std::size_t m = models.empty() ? 0 : models.front().hypotheses();
  BeliefMatrix out(models.size(), m);
  for (std::size_t i = 0; i < models.size(); ++i)
    for (std::size_t k = 0; k < m; ++k) out(i, k) = log_likelihood(models[i], k, input.observations[i]);
  return out;
}

void bayes_update(const BeliefMatrix& log_q, const BeliefMatrix& log_lik, BeliefMatrix& log_b) {
  const std::size_t n = log_q.nodes();
  const std::size_t m = log_q.hypotheses();
  require_shape(log_lik, n, m, "log-likelihood matrix");
  if (log_b.nodes() != n || log_b.hypotheses() != m) log_b = BeliefMatrix(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < m; ++k) {
      const double q = log_q(i, k);
      const double l = log_lik(i, k);
      log_b(i, k) = (q == kNegInf || l == kNegInf) ? kNegInf : q + l;
    }
    normalize_row_or_throw(log_b.row(i), i, "Bayesian update");
  }
}

BeliefMatrix bayes_step(const BeliefState& state, const std::vector<NodeModel>& models,
                        const StepInput& input) {
  BeliefMatrix out;
  bayes_update(state.log_q, evaluate_log_likelihoods(models, input), out);
  return out;
}

void consensus_update(const BeliefMatrix& log_b, const StochasticMatrix& w, BeliefMatrix& log_q) {
  const std::size_t n = log_b.nodes();
  const std::size_t m = log_b.hypotheses();
  if (w.size() != n) throw Error(ErrorCode::DimensionMismatch, "weight matrix size differs from node count");
  if (log_q.nodes() != n || log_q.hypotheses() != m) log_q = BeliefMatrix(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    const auto wi = w.row(i);
    for (std::size_t k = 0; k < m; ++k) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        if (wi[j] == 0.0) continue;
        const double b = log_b(j, k);
        if (b == kNegInf) {
          acc = kNegInf;
          break;
        }
        acc += wi[j] * b;
      }
      log_q(i, k) = acc;
    }
    normalize_row_or_throw(log_q.row(i), i, "log-linear consensus");
  }
}

BeliefMatrix consensus_step(const BeliefMatrix& log_b, const StochasticMatrix& w) {
  BeliefMatrix out;
  consensus_update(log_b, w, out);
  return out;
}

void linear_consensus_update(const BeliefMatrix& log_b, const StochasticMatrix& w, BeliefMatrix& log_q) {
  const std::size_t n = log_b.nodes();
  const std::size_t m = log_b.hypotheses();
  if (w.size() != n) throw Error(ErrorCode::DimensionMismatch, "weight matrix size differs from node count");
  if (log_q.nodes() != n || log_q.hypotheses() != m) log_q = BeliefMatrix(n, m);
  std::vector<double> terms(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto wi = w.row(i);
    for (std::size_t k = 0; k < m; ++k) {
      terms.clear();
      for (std::size_t j = 0; j < n; ++j)
        if (wi[j] > 0.0) terms.push_back(std::log(wi[j]) + log_b(j, k));
      log_q(i, k) = log_sum_exp(terms);
    }
    normalize_row_or_throw(log_q.row(i), i, "linear consensus");
  }
}

std::uint64_t quantize_level(double belief, std::uint64_t levels) {
  if (levels == 0) throw Error(ErrorCode::InvalidArgument, "quantization needs D >= 1");
  if (!(belief >= 0.0 && belief <= 1.0)) throw Error(ErrorCode::InvalidArgument, "belief outside [0,1]");
  const long double x = static_cast<long double>(levels) * static_cast<long double>(belief);
  const long double fl = std::floor(x);
  return static_cast<std::uint64_t>(x > fl + 0.5L ? fl + 1.0L : fl);
}

std::vector<std::vector<std::uint64_t>> quantize_message(const BeliefMatrix& log_b,
                                                         const QuantizationSpec& spec) {
  if (!spec.enabled) throw Error(ErrorCode::InvalidArgument, "quantization is disabled");
  std::vector<std::vector<std::uint64_t>> out(log_b.nodes(), std::vector<std::uint64_t>(log_b.hypotheses()));
  for (std::size_t i = 0; i < log_b.nodes(); ++i)
    for (std::size_t k = 0; k < log_b.hypotheses(); ++k)
      out[i][k] = quantize_level(std::exp(log_b(i, k)), spec.levels);
  return out;
}

std::vector<double> dequantize_normalize(std::span<const std::uint64_t> message) {
  long double total = 0.0L;
  for (auto level : message) total += static_cast<long double>(level);
  if (total == 0.0L) throw Error(ErrorCode::AllZeroMessage, "every belief quantized to level 0");
  std::vector<double> out(message.size());
  for (std::size_t k = 0; k < message.size(); ++k)
    out[k] = static_cast<double>(static_cast<long double>(message[k]) / total);
  return out;
}

void advance(BeliefState& state, const BeliefMatrix& log_lik, const StochasticMatrix& w,
             const QuantizationSpec& spec, ConsensusRule rule) {
  bayes_update(state.log_q, log_lik, state.log_b);
  const BeliefMatrix* received = &state.log_b;
  BeliefMatrix dequantized;
  if (spec.enabled) {
    const auto messages = quantize_message(state.log_b, spec);
    dequantized = BeliefMatrix(state.log_b.nodes(), state.log_b.hypotheses());
    for (std::size_t j = 0; j < messages.size(); ++j) {
      const auto y = dequantize_normalize(messages[j]);
      for (std::size_t k = 0; k < y.size(); ++k) dequantized(j, k) = y[k] > 0.0 ? std::log(y[k]) : kNegInf;
    }
    received = &dequantized;
  }
  if (rule == ConsensusRule::LogLinear) {
    consensus_update(*received, w, state.log_q);
  } else {
    linear_consensus_update(*received, w, state.log_q);
  }
  ++state.t;
}

BeliefState step(const BeliefState& state, const std::vector<NodeModel>& models,
                 const StochasticMatrix& w, const StepInput& input, const QuantizationSpec& spec) {
  BeliefState next = state;
  advance(next, evaluate_log_likelihoods(models, input), w, spec, ConsensusRule::LogLinear);
  return next;
}

BeliefState baseline_linear_step(const BeliefState& state, const std::vector<NodeModel>& models,
                                 const StochasticMatrix& w, const StepInput& input) {
  BeliefState next = state;
  advance(next, evaluate_log_likelihoods(models, input), w, QuantizationSpec{},
          ConsensusRule::LinearBaseline);
  return next;
}

double recursion_residual(const BeliefState& previous, const BeliefState& next,
                          const BeliefMatrix& log_lik, const StochasticMatrix& w, std::size_t truth) {
  const std::size_t n = next.log_q.nodes();
  const std::size_t m = next.log_q.hypotheses();
  double worst = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < m; ++k) {
      if (k == truth) continue;
      const double lhs = next.log_q(i, truth) - next.log_q(i, k);
      if (!std::isfinite(lhs)) continue;
      double rhs = 0.0;
      bool finite = true;
      for (std::size_t j = 0; j < n; ++j) {
        const double wij = w(i, j);
        if (wij == 0.0) continue;
        const double term = (log_lik(j, truth) - log_lik(j, k)) +
                            (previous.log_q(j, truth) - previous.log_q(j, k));
        if (!std::isfinite(term)) {
          finite = false;
          break;
        }
        rhs += wij * term;
      }
      if (finite) worst = std::max(worst, std::abs(lhs - rhs));
    }
  return worst;
}

}  // namespace sociallearn

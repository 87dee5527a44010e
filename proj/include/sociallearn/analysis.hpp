#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "sociallearn/obsmodels.hpp"

namespace sociallearn {

// K(truth, k) = sum_i v_i D(f_i(.; truth) || f_i(.; theta_k)), nats per step.
double network_divergence(std::span<const double> v, const std::vector<NodeModel>& models,
                          std::size_t truth, std::size_t k);

struct RatePrediction {
  std::vector<std::size_t> wrong;  // hypothesis index of each k_vec entry
  std::vector<double> k_vec;       // K(truth, theta_k) for k in `wrong`
  double mu_lower = 0.0;           // min_k K(truth, theta_k)
  double rho_l_lower = 0.0;        // min over ordered pairs a != b of K(theta_a, theta_b)
  bool identifiable = true;        // false when some k_vec entry vanishes

  double at(std::size_t k) const;  // K for hypothesis index k
};

RatePrediction predict_rates(std::span<const double> v, const std::vector<NodeModel>& models,
                             const HypothesisSet& hyp);

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double std_error = 0.0;
  double residual_variance = 0.0;
};

// Ordinary least squares of y against x.
SlopeFit fit_line(std::span<const double> x, std::span<const double> y);

struct RejectionTrace {
  std::vector<double> rho;  // rho[t-1] = -ln q^(t) / t
  SlopeFit fit;             // -ln q against t over the final half of the horizon
};

// log_q[t-1] holds ln q_i^(t)(theta_k) for t = 1..T. Throws AbsorbedBelief
// when a belief hit exactly zero.
RejectionTrace empirical_rejection(std::span<const double> log_q);

struct HoeffdingExponents {
  double below = 0.0;  // exponent for rho <= K - eps
  double above = 0.0;  // exponent for rho >= K + eps
};

// Concentration exponents under bounded log-likelihood ratios. l_bound is
// nullopt for unbounded families (throws UnboundedRatios).
HoeffdingExponents hoeffding_exponents(std::optional<double> l_bound, unsigned period,
                                       std::span<const double> k_vec, std::size_t k_entry,
                                       double epsilon);

// max over nodes of log_ratio_bound; nullopt if any node is unbounded.
std::optional<double> network_log_ratio_bound(const std::vector<NodeModel>& models);

}  // namespace sociallearn

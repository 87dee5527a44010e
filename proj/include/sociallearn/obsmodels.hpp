#pragma once

#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <variant>
#include <vector>

namespace sociallearn {

// Scalar observation. Finite-alphabet families use the outcome index
// (0/1 for Bernoulli, 0..A-1 for categorical).
using Observation = double;
using Rng = std::mt19937_64;

struct HypothesisSet {
  std::vector<std::string> labels;
  std::size_t true_index = 0;

  std::size_t size() const noexcept { return labels.size(); }
};

HypothesisSet make_hypotheses(std::vector<std::string> labels, std::size_t true_index);
HypothesisSet numbered_hypotheses(std::size_t m, std::size_t true_index);

// Per-hypothesis parameters, one entry per hypothesis in each vector.
struct Bernoulli {
  std::vector<double> p;  // P(X = 1)
};
struct Categorical {
  std::vector<std::vector<double>> probs;  // probs[k][x]
};
struct Gaussian {
  std::vector<double> mean;
  double sigma = 1.0;
};
struct GaussianMixture {
  std::vector<std::vector<double>> weights;  // weights[k][c]
  std::vector<std::vector<double>> means;    // means[k][c]
  double sigma = 1.0;
};
struct Gamma {
  std::vector<double> shape;
  double rate = 1.0;  // shared across hypotheses
};

using Family = std::variant<Bernoulli, Categorical, Gaussian, GaussianMixture, Gamma>;

// The local likelihood family {f_i(.; theta_k)}_k of one node. Construction
// validates the parameters; instances are immutable afterwards.
class NodeModel {
public:
  explicit NodeModel(Family family);

  const Family& family() const noexcept { return family_; }
  std::size_t hypotheses() const noexcept { return m_; }
  // Alphabet size for finite families, nullopt for continuous ones.
  std::optional<std::size_t> alphabet_size() const;
  std::string family_name() const;

private:
  Family family_;
  std::size_t m_ = 0;
};

Observation sample(const NodeModel& model, std::size_t hypothesis, Rng& rng);

// ln f(x; theta_k). Throws OutOfSupport for observations outside the family's
// support; finite-alphabet outcomes with zero mass give -inf.
double log_likelihood(const NodeModel& model, std::size_t hypothesis, Observation x);

// D(f_a || f_b) in nats.
double kl_divergence(const NodeModel& model, std::size_t a, std::size_t b);

// sup_x max_{j,k} |ln f_j(x)/f_k(x)|; nullopt when unbounded.
std::optional<double> log_ratio_bound(const NodeModel& model);

// ln E_truth[(f_k / f_truth)^s], +inf when the expectation diverges.
double pair_log_mgf_or_inf(const NodeModel& model, std::size_t k, std::size_t truth, double s);
// Same, throwing MgfDiverges instead of returning +inf.
double pair_log_mgf(const NodeModel& model, std::size_t k, std::size_t truth, double s);

// ln E_truth[prod_k (f_k / f_truth)^{s_k}] over all hypotheses k (s has one
// entry per hypothesis; the truth entry is ignored). +inf when divergent.
double joint_log_mgf_or_inf(const NodeModel& model, std::size_t truth, const std::vector<double>& s);

inline constexpr double kIndistinguishableKl = 1e-12;

struct DistinguishabilityReport {
  // Hypotheses locally indistinguishable from the truth, per node.
  std::vector<std::vector<std::size_t>> indistinguishable;
  bool globally_identifiable = false;
  // Every ordered pair of hypotheses separated by some node.
  bool pairwise_distinguishable = false;
  // kl[i][k] = D(f_i(.; truth) || f_i(.; theta_k)).
  std::vector<std::vector<double>> kl;
};

DistinguishabilityReport distinguishability(const std::vector<NodeModel>& models,
                                            const HypothesisSet& hyp);

}  // namespace sociallearn

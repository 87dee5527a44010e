#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "sociallearn/engine.hpp"
#include "sociallearn/network.hpp"
#include "sociallearn/obsmodels.hpp"

namespace sociallearn {

// Sign convention. The per-step statistic used throughout is
//   Z_k = <v, ln f(X; truth) / f(X; theta_k)>,
// whose mean is +K(truth, theta_k). Its log-MGF and conjugate are written
// Lambda~_k and I~_k. The log-likelihood-ratio vector in the other direction,
// Y_k = -Z_k, has conjugate I_k(x) = I~_k(-x); deviation probabilities of the
// rejection rate rho^(t)(theta_k) around K are governed by I~_k evaluated at
// K - eps and K + eps.

// Lambda~_k(lambda) = sum_j ln E[(f_j(.;theta_k)/f_j(.;truth))^(-lambda v_j)].
double lambda_tilde_or_inf(std::span<const double> v, const std::vector<NodeModel>& models,
                           std::size_t truth, std::size_t k, double lambda);
// Throws MgfDiverges instead of returning +inf.
double lambda_tilde(std::span<const double> v, const std::vector<NodeModel>& models,
                    std::size_t truth, std::size_t k, double lambda);

// Lambda~_k bound to one (v, models, truth, k), plus a tabulation on a grid.
class ConjugatePair {
public:
  ConjugatePair(std::vector<double> v, std::vector<NodeModel> models, std::size_t truth, std::size_t k);

  double log_mgf(double lambda) const;  // +inf when divergent
  double mean() const noexcept { return mean_; }
  std::size_t hypothesis() const noexcept { return k_; }

  void tabulate(double lo, double hi, std::size_t points);
  const std::vector<double>& lambda_grid() const noexcept { return grid_; }
  const std::vector<double>& values() const noexcept { return values_; }

private:
  std::vector<double> v_;
  std::vector<NodeModel> models_;
  std::size_t truth_;
  std::size_t k_;
  double mean_;
  std::vector<double> grid_;
  std::vector<double> values_;
};

struct ConjugateValue {
  double value = 0.0;
  double argmax = 0.0;
  // First-order condition |Lambda~'(argmax) - x| < 1e-6 verified.
  bool certified = false;
  // The search reached the lambda limit while still increasing by less than
  // 1e-9 (x on the boundary of the range of Z_k); value is the limit.
  bool at_boundary = false;
};

// I~_k(x) = sup_lambda { lambda x - Lambda~_k(lambda) }. Throws
// SupremumAtInfinity when x lies outside the closed range of Z_k.
ConjugateValue fenchel_legendre_detail(const ConjugatePair& conj, double x);
double fenchel_legendre(const ConjugatePair& conj, double x);
// Same, +inf instead of throwing.
double fenchel_legendre_or_inf(const ConjugatePair& conj, double x);

// g_k(x) = x_k - max{0, x_1, ..., x_{M-1}}.
std::vector<double> g_map(std::span<const double> x);

// J(y) = inf { I(x) : g(x) = y } with the separable I(x) = sum_k I_k(x_k)
// (I_k the conjugate of the log-likelihood-ratio statistic Y_k). y lives in
// the image of g: y_k is the limit of (1/t) ln q^(t)(theta_k), i.e. -rho_k.
// conj holds one pair per wrong hypothesis, aligned with y.
double rate_function_j(std::span<const ConjugatePair> conj, std::span<const double> y);

// Same rate function built from the joint log-MGF of the whole vector Z,
// which does not assume the components are independent.
class JointLogMgf {
public:
  JointLogMgf(std::vector<double> v, std::vector<NodeModel> models, std::size_t truth,
              std::vector<std::size_t> wrong);

  std::size_t dimension() const noexcept { return wrong_.size(); }
  double operator()(std::span<const double> lambda) const;  // +inf when divergent
  // sup_lambda <lambda, z> - Lambda(lambda) in Z coordinates; +inf if unbounded.
  double conjugate(std::span<const double> z) const;

private:
  std::vector<double> v_;
  std::vector<NodeModel> models_;
  std::size_t truth_;
  std::vector<std::size_t> wrong_;
};

double rate_function_j_joint(const JointLogMgf& joint, std::span<const double> y);

enum class Tail { Lower, Upper };  // rho <= threshold, rho >= threshold

struct TailQuery {
  std::size_t horizon = 1;
  std::size_t node = 0;
  std::size_t hypothesis = 0;
  double threshold = 0.0;
  Tail tail = Tail::Lower;
};

inline constexpr std::uint64_t kMaxBruteForcePaths = std::uint64_t{1} << 24;

// Exact P(rho_node^(t)(theta_k) in tail) by enumerating every joint sample
// path of finite-alphabet observations and running the engine on each.
double brute_force_tail(const std::vector<NodeModel>& models, const StochasticMatrix& w,
                        std::span<const double> prior, std::size_t truth, const TailQuery& query);

struct MonteCarloTail {
  double frequency = 0.0;
  std::uint64_t hits = 0;
  std::uint64_t paths = 0;
};

MonteCarloTail monte_carlo_tail(const std::vector<NodeModel>& models, const StochasticMatrix& w,
                                std::span<const double> prior, std::size_t truth,
                                const TailQuery& query, std::uint64_t paths, std::uint64_t seed);

}  // namespace sociallearn

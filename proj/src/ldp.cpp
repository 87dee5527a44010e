#include "sociallearn/ldp.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "sociallearn/analysis.hpp"
#include "sociallearn/error.hpp"
#include "sociallearn/numeric.hpp"

namespace sociallearn {

namespace {

constexpr double kLambdaLimit = 1e4;
constexpr double kLambdaTolerance = 1e-10;
constexpr double kFirstOrderTolerance = 1e-6;
constexpr double kBoundaryIncrement = 1e-9;

}  // namespace

double lambda_tilde_or_inf(std::span<const double> v, const std::vector<NodeModel>& models,
                           std::size_t truth, std::size_t k, double lambda) {
  if (v.size() != models.size()) throw Error(ErrorCode::DimensionMismatch, "centrality length differs from node count");
  double acc = 0.0;
  for (std::size_t j = 0; j < models.size(); ++j) {
    const double term = pair_log_mgf_or_inf(models[j], k, truth, -lambda * v[j]);
    if (term == kPosInf) return kPosInf;
    acc += term;
  }
  return acc;
}

double lambda_tilde(std::span<const double> v, const std::vector<NodeModel>& models,
                    std::size_t truth, std::size_t k, double lambda) {
  const double value = lambda_tilde_or_inf(v, models, truth, k, lambda);
  if (value == kPosInf) {
    throw Error(ErrorCode::MgfDiverges, "log-MGF diverges at lambda " + std::to_string(lambda));
  }
  return value;
}

ConjugatePair::ConjugatePair(std::vector<double> v, std::vector<NodeModel> models, std::size_t truth,
                             std::size_t k)
    : v_(std::move(v)), models_(std::move(models)), truth_(truth), k_(k) {
  if (k_ == truth_) throw Error(ErrorCode::InvalidArgument, "conjugate pair needs a wrong hypothesis");
  mean_ = network_divergence(v_, models_, truth_, k_);
}

double ConjugatePair::log_mgf(double lambda) const {
  return lambda_tilde_or_inf(v_, models_, truth_, k_, lambda);
}

void ConjugatePair::tabulate(double lo, double hi, std::size_t points) {
  grid_.clear();
  values_.clear();
  if (points < 2) throw Error(ErrorCode::InvalidArgument, "tabulation needs two or more points");
  for (std::size_t i = 0; i < points; ++i) {
    const double lambda = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
    grid_.push_back(lambda);
    values_.push_back(log_mgf(lambda));
  }
}

ConjugateValue fenchel_legendre_detail(const ConjugatePair& conj, double x) {
  const double mean = conj.mean();
  if (x == mean) return {0.0, 0.0, true, false};
  auto objective = [&](double lambda) {
    const double l = conj.log_mgf(lambda);
    return l == kPosInf ? kNegInf : lambda * x - l;
  };
  const int direction = x > mean ? 1 : -1;
  const auto found = maximize_concave_half_line(objective, 0.0, direction, 0.25, kLambdaLimit,
                                                kLambdaTolerance);
  if (found.hit_limit) {
    if (found.last_increment > kBoundaryIncrement) {
      throw Error(ErrorCode::SupremumAtInfinity,
                  "x = " + std::to_string(x) + " lies outside the range of the statistic");
    }
    return {found.max.value, found.max.argmax, false, true};
  }
  ConjugateValue out;
  out.argmax = found.max.argmax;
  out.value = std::max(found.max.value, 0.0);
  const double h = 1e-5 * std::max(1.0, std::abs(out.argmax));
  const double up = conj.log_mgf(out.argmax + h);
  const double down = conj.log_mgf(out.argmax - h);
  if (std::isfinite(up) && std::isfinite(down)) {
    out.certified = std::abs((up - down) / (2.0 * h) - x) < kFirstOrderTolerance;
  }
  return out;
}

double fenchel_legendre(const ConjugatePair& conj, double x) { return fenchel_legendre_detail(conj, x).value; }

double fenchel_legendre_or_inf(const ConjugatePair& conj, double x) {
  try {
    return fenchel_legendre_detail(conj, x).value;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::SupremumAtInfinity) return kPosInf;
    throw;
  }
}

std::vector<double> g_map(std::span<const double> x) {
  double top = 0.0;
  for (double xi : x) top = std::max(top, xi);
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = x[k] - top;
  return out;
}

namespace {

// The preimage of y under g is {y + m 1 : m >= 0} when max_k y_k = 0 and the
// single point y when max_k y_k < 0. cost(m) must be convex in m.
double minimize_over_preimage(std::span<const double> y, const std::function<double(double)>& cost) {
  if (y.empty()) throw Error(ErrorCode::DimensionMismatch, "empty rate-function argument");
  double top = kNegInf;
  for (double yk : y) {
    if (yk > 0.0) {
      throw Error(ErrorCode::InfeasiblePreimage, "g maps into the nonpositive orthant; got y_k = " + std::to_string(yk));
    }
    top = std::max(top, yk);
  }
  if (top < -1e-12) return cost(0.0);
  const auto found = maximize_concave_half_line([&](double m) { return -cost(m); }, 0.0, 1, 0.25, 1e6,
                                                kLambdaTolerance);
  return std::max(-found.max.value, 0.0);
}

}  // namespace

double rate_function_j(std::span<const ConjugatePair> conj, std::span<const double> y) {
  if (conj.size() != y.size()) throw Error(ErrorCode::DimensionMismatch, "one conjugate pair per component");
  return minimize_over_preimage(y, [&](double m) {
    double total = 0.0;
    for (std::size_t e = 0; e < y.size(); ++e) {
      // I_k(x) = I~_k(-x) with x = y + m.
      const double term = fenchel_legendre_or_inf(conj[e], -(y[e] + m));
      if (term == kPosInf) return kPosInf;
      total += term;
    }
    return total;
  });
}

JointLogMgf::JointLogMgf(std::vector<double> v, std::vector<NodeModel> models, std::size_t truth,
                         std::vector<std::size_t> wrong)
    : v_(std::move(v)), models_(std::move(models)), truth_(truth), wrong_(std::move(wrong)) {
  if (v_.size() != models_.size()) throw Error(ErrorCode::DimensionMismatch, "centrality length differs from node count");
}

double JointLogMgf::operator()(std::span<const double> lambda) const {
  if (lambda.size() != wrong_.size()) throw Error(ErrorCode::DimensionMismatch, "lambda dimension");
  const std::size_t m = models_.front().hypotheses();
  double acc = 0.0;
  std::vector<double> s(m, 0.0);
  for (std::size_t j = 0; j < models_.size(); ++j) {
    for (std::size_t e = 0; e < wrong_.size(); ++e) s[wrong_[e]] = -lambda[e] * v_[j];
    const double term = joint_log_mgf_or_inf(models_[j], truth_, s);
    if (term == kPosInf) return kPosInf;
    acc += term;
  }
  return acc;
}

double JointLogMgf::conjugate(std::span<const double> z) const {
  const auto d = static_cast<Eigen::Index>(wrong_.size());
  if (z.size() != wrong_.size()) throw Error(ErrorCode::DimensionMismatch, "z dimension");
  Eigen::VectorXd zv(d);
  for (Eigen::Index e = 0; e < d; ++e) zv(e) = z[static_cast<std::size_t>(e)];

  auto lmgf = [&](const Eigen::VectorXd& lam) { return (*this)(std::span<const double>(lam.data(), lam.size())); };
  auto objective = [&](const Eigen::VectorXd& lam) {
    const double l = lmgf(lam);
    return l == kPosInf ? kNegInf : lam.dot(zv) - l;
  };

  Eigen::VectorXd lam = Eigen::VectorXd::Zero(d);
  double f = 0.0;
  const double h = 1e-5;
  for (int iter = 0; iter < 500; ++iter) {
    Eigen::VectorXd grad(d);
    for (Eigen::Index e = 0; e < d; ++e) {
      Eigen::VectorXd up = lam;
      Eigen::VectorXd dn = lam;
      up(e) += h;
      dn(e) -= h;
      grad(e) = zv(e) - (lmgf(up) - lmgf(dn)) / (2.0 * h);
    }
    if (!grad.allFinite() || grad.lpNorm<Eigen::Infinity>() < 1e-10) break;

    const double hh = 1e-4;
    Eigen::MatrixXd hess(d, d);
    const double l0 = lmgf(lam);
    for (Eigen::Index a = 0; a < d; ++a)
      for (Eigen::Index b = a; b < d; ++b) {
        Eigen::VectorXd pp = lam, pm = lam, mp = lam, mm = lam;
        pp(a) += hh; pp(b) += hh;
        pm(a) += hh; pm(b) -= hh;
        mp(a) -= hh; mp(b) += hh;
        mm(a) -= hh; mm(b) -= hh;
        const double second = a == b ? (lmgf(pp) - 2.0 * l0 + lmgf(mm)) / (4.0 * hh * hh)
                                     : (lmgf(pp) - lmgf(pm) - lmgf(mp) + lmgf(mm)) / (4.0 * hh * hh);
        hess(a, b) = hess(b, a) = second;
      }
    Eigen::VectorXd dir = grad;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(hess);
    if (hess.allFinite() && ldlt.info() == Eigen::Success && ldlt.isPositive() &&
        ldlt.vectorD().minCoeff() > 1e-14) {
      dir = ldlt.solve(grad);
    }
    double step = 1.0;
    double next = objective(lam + step * dir);
    const double slope = grad.dot(dir);
    while (!(next >= f + 1e-4 * step * slope) && step > 1e-14) {
      step *= 0.5;
      next = objective(lam + step * dir);
    }
    if (!(next > f)) break;
    lam += step * dir;
    const double gain = next - f;
    f = next;
    if (lam.lpNorm<Eigen::Infinity>() > kLambdaLimit) {
      return gain > kBoundaryIncrement ? kPosInf : f;
    }
  }
  return std::max(f, 0.0);
}

double rate_function_j_joint(const JointLogMgf& joint, std::span<const double> y) {
  if (y.size() != joint.dimension()) throw Error(ErrorCode::DimensionMismatch, "y dimension");
  std::vector<double> z(y.size());
  return minimize_over_preimage(y, [&](double m) {
    for (std::size_t e = 0; e < y.size(); ++e) z[e] = -(y[e] + m);
    return joint.conjugate(z);
  });
}

namespace {

struct JointOutcome {
  BeliefMatrix log_lik;
  std::vector<Observation> observations;
  double probability = 0.0;
};

std::vector<JointOutcome> enumerate_outcomes(const std::vector<NodeModel>& models, std::size_t truth) {
  std::vector<std::size_t> sizes;
  for (const auto& model : models) {
    const auto a = model.alphabet_size();
    if (!a) throw Error(ErrorCode::InvalidArgument, "exact enumeration needs finite observation alphabets");
    sizes.push_back(*a);
  }
  std::vector<JointOutcome> out;
  std::vector<std::size_t> digits(models.size(), 0);
  while (true) {
    StepInput input;
    double logp = 0.0;
    for (std::size_t i = 0; i < models.size(); ++i) {
      input.observations.push_back(static_cast<double>(digits[i]));
      logp += log_likelihood(models[i], truth, input.observations.back());
    }
    if (logp > kNegInf) {
      out.push_back({evaluate_log_likelihoods(models, input), input.observations, std::exp(logp)});
    }
    std::size_t pos = models.size();
    while (pos > 0) {
      --pos;
      if (++digits[pos] < sizes[pos]) break;
      digits[pos] = 0;
      if (pos == 0) return out;
    }
    if (models.empty()) return out;
  }
}

bool in_tail(const BeliefState& state, const TailQuery& q) {
  const double rho = -state.log_q(q.node, q.hypothesis) / static_cast<double>(state.t);
  return q.tail == Tail::Lower ? rho <= q.threshold : rho >= q.threshold;
}

class PathEnumerator {
public:
  PathEnumerator(const std::vector<JointOutcome>& outcomes, const StochasticMatrix& w, const TailQuery& q)
      : outcomes_(outcomes), w_(w), q_(q), stack_(q.horizon + 1) {}

  // Probability of the tail event conditioned on reaching `state` at `depth`.
  double conditional(std::size_t depth, const BeliefState& state) {
    if (depth == q_.horizon) return in_tail(state, q_) ? 1.0 : 0.0;
    double total = 0.0;
    BeliefState& next = stack_[depth + 1];
    for (const auto& o : outcomes_) {
      next = state;
      advance(next, o.log_lik, w_, QuantizationSpec{});
      total += o.probability * conditional(depth + 1, next);
    }
    return total;
  }

private:
  const std::vector<JointOutcome>& outcomes_;
  const StochasticMatrix& w_;
  TailQuery q_;
  std::vector<BeliefState> stack_;
};

void check_query(const std::vector<NodeModel>& models, const StochasticMatrix& w, const TailQuery& q) {
  if (models.empty() || w.size() != models.size()) throw Error(ErrorCode::DimensionMismatch, "models/network size");
  if (q.horizon == 0) throw Error(ErrorCode::InvalidArgument, "horizon must be at least 1");
  if (q.node >= models.size()) throw Error(ErrorCode::InvalidArgument, "node out of range");
  if (q.hypothesis >= models.front().hypotheses()) throw Error(ErrorCode::InvalidArgument, "hypothesis out of range");
}

}  // namespace

double brute_force_tail(const std::vector<NodeModel>& models, const StochasticMatrix& w,
                        std::span<const double> prior, std::size_t truth, const TailQuery& query) {
  check_query(models, w, query);
  std::uint64_t per_step = 1;
  for (const auto& model : models) {
    const auto a = model.alphabet_size();
    if (!a) throw Error(ErrorCode::InvalidArgument, "exact enumeration needs finite observation alphabets");
    per_step *= *a;
    if (per_step > kMaxBruteForcePaths) throw Error(ErrorCode::PathSpaceTooLarge, "joint alphabet too large");
  }
  std::uint64_t paths = 1;
  for (std::size_t t = 0; t < query.horizon; ++t) {
    paths *= per_step;
    if (paths > kMaxBruteForcePaths) {
      throw Error(ErrorCode::PathSpaceTooLarge, "path count exceeds 2^24 at horizon " + std::to_string(query.horizon));
    }
  }
  const auto outcomes = enumerate_outcomes(models, truth);
  const BeliefState start = init_beliefs(models.size(), models.front().hypotheses(), prior);
  PathEnumerator walker(outcomes, w, query);
  return walker.conditional(0, start);
}

MonteCarloTail monte_carlo_tail(const std::vector<NodeModel>& models, const StochasticMatrix& w,
                                std::span<const double> prior, std::size_t truth,
                                const TailQuery& query, std::uint64_t paths, std::uint64_t seed) {
  check_query(models, w, query);
  const BeliefState start = init_beliefs(models.size(), models.front().hypotheses(), prior);
  Rng rng(seed);
  MonteCarloTail out;
  out.paths = paths;
  BeliefState state;
  StepInput input;
  input.observations.resize(models.size());
  for (std::uint64_t p = 0; p < paths; ++p) {
    state = start;
    for (std::size_t t = 0; t < query.horizon; ++t) {
      for (std::size_t i = 0; i < models.size(); ++i) input.observations[i] = sample(models[i], truth, rng);
      advance(state, evaluate_log_likelihoods(models, input), w, QuantizationSpec{});
    }
    if (in_tail(state, query)) ++out.hits;
  }
  out.frequency = paths == 0 ? 0.0 : static_cast<double>(out.hits) / static_cast<double>(paths);
  return out;
}

}  // namespace sociallearn

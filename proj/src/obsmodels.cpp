#include "sociallearn/obsmodels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

#include <boost/math/special_functions/digamma.hpp>

#include "sociallearn/error.hpp"
#include "sociallearn/numeric.hpp"

namespace sociallearn {

namespace {

constexpr double kNormTolerance = 1e-9;
constexpr double kQuadratureRelTol = 1e-8;
constexpr double kTailWidthSigmas = 12.0;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::InvalidModel, what); }

double normal_log_pdf(double x, double mean, double sigma) {
  const double z = (x - mean) / sigma;
  return -0.5 * std::log(2.0 * std::numbers::pi) - std::log(sigma) - 0.5 * z * z;
}

double mixture_log_pdf(const GaussianMixture& g, std::size_t k, double x) {
  double terms[64];
  std::vector<double> heap;
  const std::size_t c = g.means[k].size();
  double* t = terms;
  if (c > 64) {
    heap.resize(c);
    t = heap.data();
  }
  for (std::size_t j = 0; j < c; ++j)
    t[j] = std::log(g.weights[k][j]) + normal_log_pdf(x, g.means[k][j], g.sigma);
  return log_sum_exp({t, c});
}

// Finite families viewed as a probability table probs[k][x].
std::optional<std::vector<std::vector<double>>> finite_table(const Family& f) {
  if (const auto* b = std::get_if<Bernoulli>(&f)) {
    std::vector<std::vector<double>> out;
    for (double p : b->p) out.push_back({1.0 - p, p});
    return out;
  }
  if (const auto* c = std::get_if<Categorical>(&f)) return c->probs;
  return std::nullopt;
}

std::pair<double, double> mixture_mean_range(const GaussianMixture& g) {
  double lo = kPosInf;
  double hi = kNegInf;
  for (const auto& row : g.means)
    for (double m : row) {
      lo = std::min(lo, m);
      hi = std::max(hi, m);
    }
  return {lo, hi};
}

// ln of the integral of exp(g) over [lo, hi], shifting by the grid maximum of g
// so that large exponents do not overflow.
double log_integral_exp(const std::function<double(double)>& g, double lo, double hi) {
  constexpr int kGrid = 4001;
  double shift = kNegInf;
  for (int i = 0; i < kGrid; ++i) {
    const double x = lo + (hi - lo) * i / (kGrid - 1);
    shift = std::max(shift, g(x));
  }
  if (shift == kNegInf) return kNegInf;
  if (!std::isfinite(shift)) return kPosInf;
  const double value =
      integrate([&](double x) { return std::exp(g(x) - shift); }, lo, hi, kQuadratureRelTol);
  if (!(value > 0.0)) return kNegInf;
  return shift + std::log(value);
}

bool same_row(const std::vector<double>& a, const std::vector<double>& b) { return a == b; }

}  // namespace

HypothesisSet make_hypotheses(std::vector<std::string> labels, std::size_t true_index) {
  if (labels.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least two hypotheses");
  if (true_index >= labels.size()) throw Error(ErrorCode::InvalidArgument, "true index out of range");
  std::set<std::string> seen(labels.begin(), labels.end());
  if (seen.size() != labels.size()) throw Error(ErrorCode::InvalidArgument, "hypothesis labels must be distinct");
  return HypothesisSet{std::move(labels), true_index};
}

HypothesisSet numbered_hypotheses(std::size_t m, std::size_t true_index) {
  std::vector<std::string> labels;
  for (std::size_t k = 1; k <= m; ++k) labels.push_back("theta" + std::to_string(k));
  return make_hypotheses(std::move(labels), true_index);
}

NodeModel::NodeModel(Family family) : family_(std::move(family)) {
  std::visit(
      overloaded{
          [&](const Bernoulli& b) {
            m_ = b.p.size();
            for (double p : b.p)
              if (!(p >= 0.0 && p <= 1.0)) invalid("bernoulli parameter outside [0,1]");
          },
          [&](const Categorical& c) {
            m_ = c.probs.size();
            if (m_ == 0) return;
            const std::size_t a = c.probs.front().size();
            if (a == 0) invalid("categorical alphabet is empty");
            for (const auto& row : c.probs) {
              if (row.size() != a) invalid("categorical rows differ in alphabet size");
              double s = 0.0;
              for (double p : row) {
                if (!(p >= 0.0 && p <= 1.0)) invalid("categorical probability outside [0,1]");
                s += p;
              }
              if (std::abs(s - 1.0) > kNormTolerance) invalid("categorical row does not sum to 1");
            }
          },
          [&](const Gaussian& g) {
            m_ = g.mean.size();
            if (!(g.sigma > 0.0) || !std::isfinite(g.sigma)) invalid("gaussian sigma must be positive");
            for (double mu : g.mean)
              if (!std::isfinite(mu)) invalid("gaussian mean must be finite");
          },
          [&](const GaussianMixture& g) {
            m_ = g.means.size();
            if (g.weights.size() != m_) invalid("mixture weights/means hypothesis count differ");
            if (!(g.sigma > 0.0) || !std::isfinite(g.sigma)) invalid("mixture sigma must be positive");
            for (std::size_t k = 0; k < m_; ++k) {
              if (g.means[k].empty() || g.means[k].size() != g.weights[k].size())
                invalid("mixture component count mismatch");
              double s = 0.0;
              for (double w : g.weights[k]) {
                if (!(w > 0.0)) invalid("mixture weights must be positive");
                s += w;
              }
              if (std::abs(s - 1.0) > kNormTolerance) invalid("mixture weights do not sum to 1");
              for (double mu : g.means[k])
                if (!std::isfinite(mu)) invalid("mixture mean must be finite");
            }
          },
          [&](const Gamma& g) {
            m_ = g.shape.size();
            if (!(g.rate > 0.0) || !std::isfinite(g.rate)) invalid("gamma rate must be positive");
            for (double a : g.shape)
              if (!(a > 0.0) || !std::isfinite(a)) invalid("gamma shape must be positive");
          },
      },
      family_);
  if (m_ == 0) invalid("model has no hypotheses");
}

std::optional<std::size_t> NodeModel::alphabet_size() const {
  if (std::holds_alternative<Bernoulli>(family_)) return 2;
  if (const auto* c = std::get_if<Categorical>(&family_)) return c->probs.front().size();
  return std::nullopt;
}

std::string NodeModel::family_name() const {
  static const char* names[] = {"bernoulli", "categorical", "gaussian", "gaussian_mixture", "gamma"};
  return names[family_.index()];
}

Observation sample(const NodeModel& model, std::size_t hypothesis, Rng& rng) {
  if (hypothesis >= model.hypotheses()) throw Error(ErrorCode::InvalidArgument, "hypothesis out of range");
  return std::visit(
      overloaded{
          [&](const Bernoulli& b) -> Observation {
            return std::bernoulli_distribution(b.p[hypothesis])(rng) ? 1.0 : 0.0;
          },
          [&](const Categorical& c) -> Observation {
            const auto& row = c.probs[hypothesis];
            return static_cast<double>(std::discrete_distribution<std::size_t>(row.begin(), row.end())(rng));
          },
          [&](const Gaussian& g) -> Observation {
            return std::normal_distribution<double>(g.mean[hypothesis], g.sigma)(rng);
          },
          [&](const GaussianMixture& g) -> Observation {
            const auto& w = g.weights[hypothesis];
            const std::size_t c = std::discrete_distribution<std::size_t>(w.begin(), w.end())(rng);
            return std::normal_distribution<double>(g.means[hypothesis][c], g.sigma)(rng);
          },
          [&](const Gamma& g) -> Observation {
            return std::gamma_distribution<double>(g.shape[hypothesis], 1.0 / g.rate)(rng);
          },
      },
      model.family());
}

double log_likelihood(const NodeModel& model, std::size_t hypothesis, Observation x) {
  if (hypothesis >= model.hypotheses()) throw Error(ErrorCode::InvalidArgument, "hypothesis out of range");
  if (auto table = model.alphabet_size()) {
    if (!(x >= 0.0) || x != std::floor(x) || x >= static_cast<double>(*table)) {
      throw Error(ErrorCode::OutOfSupport, "observation " + std::to_string(x) + " not in finite alphabet");
    }
    const auto idx = static_cast<std::size_t>(x);
    if (const auto* b = std::get_if<Bernoulli>(&model.family())) {
      return std::log(idx == 1 ? b->p[hypothesis] : 1.0 - b->p[hypothesis]);
    }
    return std::log(std::get<Categorical>(model.family()).probs[hypothesis][idx]);
  }
  if (!std::isfinite(x)) throw Error(ErrorCode::OutOfSupport, "non-finite observation");
  return std::visit(
      overloaded{
          [&](const Gaussian& g) { return normal_log_pdf(x, g.mean[hypothesis], g.sigma); },
          [&](const GaussianMixture& g) { return mixture_log_pdf(g, hypothesis, x); },
          [&](const Gamma& g) {
            if (!(x > 0.0)) throw Error(ErrorCode::OutOfSupport, "gamma observation must be positive");
            const double a = g.shape[hypothesis];
            return a * std::log(g.rate) - std::lgamma(a) + (a - 1.0) * std::log(x) - g.rate * x;
          },
          [](const auto&) -> double { return kNegInf; },
      },
      model.family());
}

double kl_divergence(const NodeModel& model, std::size_t a, std::size_t b) {
  if (a >= model.hypotheses() || b >= model.hypotheses())
    throw Error(ErrorCode::InvalidArgument, "hypothesis out of range");
  if (a == b) return 0.0;
  if (auto table = finite_table(model.family())) {
    const auto& pa = (*table)[a];
    const auto& pb = (*table)[b];
    double d = 0.0;
    for (std::size_t x = 0; x < pa.size(); ++x) {
      if (pa[x] == 0.0) continue;
      if (pb[x] == 0.0) return kPosInf;
      d += pa[x] * std::log(pa[x] / pb[x]);
    }
    return std::max(d, 0.0);
  }
  return std::visit(
      overloaded{
          [&](const Gaussian& g) {
            const double delta = g.mean[a] - g.mean[b];
            return delta * delta / (2.0 * g.sigma * g.sigma);
          },
          [&](const Gamma& g) {
            const double aa = g.shape[a];
            const double ab = g.shape[b];
            return (aa - ab) * boost::math::digamma(aa) - std::lgamma(aa) + std::lgamma(ab);
          },
          [&](const GaussianMixture& g) {
            if (same_row(g.means[a], g.means[b]) && same_row(g.weights[a], g.weights[b])) return 0.0;
            const auto [lo, hi] = mixture_mean_range(g);
            const double w = kTailWidthSigmas * g.sigma;
            const double d = integrate(
                [&](double x) {
                  const double la = mixture_log_pdf(g, a, x);
                  return std::exp(la) * (la - mixture_log_pdf(g, b, x));
                },
                lo - w, hi + w, kQuadratureRelTol);
            return std::max(d, 0.0);
          },
          [](const auto&) { return 0.0; },
      },
      model.family());
}

std::optional<double> log_ratio_bound(const NodeModel& model) {
  const std::size_t m = model.hypotheses();
  if (m == 1) return 0.0;
  if (auto table = finite_table(model.family())) {
    double bound = 0.0;
    const std::size_t alphabet = table->front().size();
    for (std::size_t x = 0; x < alphabet; ++x)
      for (std::size_t j = 0; j < m; ++j)
        for (std::size_t k = 0; k < m; ++k) {
          const double pj = (*table)[j][x];
          const double pk = (*table)[k][x];
          if (pj == 0.0 && pk == 0.0) continue;
          if (pj == 0.0 || pk == 0.0) return std::nullopt;
          bound = std::max(bound, std::abs(std::log(pj / pk)));
        }
    return bound;
  }
  // Continuous families: the ratio is unbounded unless all hypotheses coincide.
  const bool all_same = std::visit(
      overloaded{
          [&](const Gaussian& g) {
            return std::all_of(g.mean.begin(), g.mean.end(), [&](double mu) { return mu == g.mean[0]; });
          },
          [&](const GaussianMixture& g) {
            for (std::size_t k = 1; k < m; ++k)
              if (!same_row(g.means[k], g.means[0]) || !same_row(g.weights[k], g.weights[0])) return false;
            return true;
          },
          [&](const Gamma& g) {
            return std::all_of(g.shape.begin(), g.shape.end(), [&](double a) { return a == g.shape[0]; });
          },
          [](const auto&) { return false; },
      },
      model.family());
  if (all_same) return 0.0;
  return std::nullopt;
}

double joint_log_mgf_or_inf(const NodeModel& model, std::size_t truth, const std::vector<double>& s) {
  const std::size_t m = model.hypotheses();
  if (truth >= m || s.size() != m) throw Error(ErrorCode::DimensionMismatch, "exponent vector size");
  double s_total = 0.0;
  for (std::size_t k = 0; k < m; ++k)
    if (k != truth) s_total += s[k];

  if (auto table = finite_table(model.family())) {
    const auto& pt = (*table)[truth];
    std::vector<double> terms;
    for (std::size_t x = 0; x < pt.size(); ++x) {
      if (pt[x] == 0.0) continue;
      double term = (1.0 - s_total) * std::log(pt[x]);
      bool vanishes = false;
      for (std::size_t k = 0; k < m; ++k) {
        if (k == truth || s[k] == 0.0) continue;
        const double pk = (*table)[k][x];
        if (pk == 0.0) {
          if (s[k] < 0.0) return kPosInf;
          vanishes = true;
          break;
        }
        term += s[k] * std::log(pk);
      }
      if (!vanishes) terms.push_back(term);
    }
    return log_sum_exp(terms);
  }

  return std::visit(
      overloaded{
          [&](const Gaussian& g) {
            // ln f_k - ln f_t = a_k x + b_k is affine in x.
            const double var = g.sigma * g.sigma;
            const double mt = g.mean[truth];
            double c = 0.0;
            double b = 0.0;
            for (std::size_t k = 0; k < m; ++k) {
              if (k == truth) continue;
              const double mk = g.mean[k];
              c += s[k] * (mk - mt) / var;
              b += s[k] * (mt * mt - mk * mk) / (2.0 * var);
            }
            return b + c * mt + 0.5 * c * c * var;
          },
          [&](const Gamma& g) {
            // ln f_k - ln f_t = (a_k - a_t) ln x + const_k, so only E[x^c] is needed.
            const double at = g.shape[truth];
            const double log_rate = std::log(g.rate);
            double c = 0.0;
            double b = 0.0;
            for (std::size_t k = 0; k < m; ++k) {
              if (k == truth) continue;
              const double ak = g.shape[k];
              c += s[k] * (ak - at);
              b += s[k] * ((ak - at) * log_rate - std::lgamma(ak) + std::lgamma(at));
            }
            if (!(at + c > 0.0)) return kPosInf;
            return b + std::lgamma(at + c) - std::lgamma(at) - c * log_rate;
          },
          [&](const GaussianMixture& g) {
            const auto [lo, hi] = mixture_mean_range(g);
            double s_abs = std::abs(1.0 - s_total);
            for (std::size_t k = 0; k < m; ++k)
              if (k != truth) s_abs += std::abs(s[k]);
            const double w = kTailWidthSigmas * g.sigma + s_abs * (hi - lo);
            return log_integral_exp(
                [&](double x) {
                  double e = (1.0 - s_total) * mixture_log_pdf(g, truth, x);
                  for (std::size_t k = 0; k < m; ++k)
                    if (k != truth && s[k] != 0.0) e += s[k] * mixture_log_pdf(g, k, x);
                  return e;
                },
                lo - w, hi + w);
          },
          [](const auto&) { return kPosInf; },
      },
      model.family());
}

double pair_log_mgf_or_inf(const NodeModel& model, std::size_t k, std::size_t truth, double s) {
  const std::size_t m = model.hypotheses();
  if (k >= m || truth >= m) throw Error(ErrorCode::InvalidArgument, "hypothesis out of range");
  if (k == truth || s == 0.0) return 0.0;
  if (const auto* g = std::get_if<Gaussian>(&model.family())) {
    const double delta = g->mean[k] - g->mean[truth];
    return s * (s - 1.0) * delta * delta / (2.0 * g->sigma * g->sigma);
  }
  std::vector<double> exps(m, 0.0);
  exps[k] = s;
  return joint_log_mgf_or_inf(model, truth, exps);
}

double pair_log_mgf(const NodeModel& model, std::size_t k, std::size_t truth, double s) {
  const double v = pair_log_mgf_or_inf(model, k, truth, s);
  if (v == kPosInf) {
    throw Error(ErrorCode::MgfDiverges, "log-MGF diverges at exponent " + std::to_string(s));
  }
  return v;
}

DistinguishabilityReport distinguishability(const std::vector<NodeModel>& models,
                                            const HypothesisSet& hyp) {
  const std::size_t m = hyp.size();
  DistinguishabilityReport out;
  for (const auto& model : models) {
    if (model.hypotheses() != m) throw Error(ErrorCode::DimensionMismatch, "model hypothesis count differs");
    std::vector<double> row(m);
    std::vector<std::size_t> same;
    for (std::size_t k = 0; k < m; ++k) {
      row[k] = kl_divergence(model, hyp.true_index, k);
      if (row[k] <= kIndistinguishableKl) same.push_back(k);
    }
    out.kl.push_back(std::move(row));
    out.indistinguishable.push_back(std::move(same));
  }
  std::vector<std::size_t> common(m);
  for (std::size_t k = 0; k < m; ++k) common[k] = k;
  for (const auto& set : out.indistinguishable) {
    std::vector<std::size_t> next;
    std::set_intersection(common.begin(), common.end(), set.begin(), set.end(), std::back_inserter(next));
    common = std::move(next);
  }
  out.globally_identifiable = common.size() == 1 && common.front() == hyp.true_index;

  out.pairwise_distinguishable = true;
  for (std::size_t j = 0; j < m && out.pairwise_distinguishable; ++j)
    for (std::size_t k = 0; k < m; ++k) {
      if (j == k) continue;
      bool separated = false;
      for (const auto& model : models)
        if (kl_divergence(model, j, k) > kIndistinguishableKl) {
          separated = true;
          break;
        }
      if (!separated) {
        out.pairwise_distinguishable = false;
        break;
      }
    }
  return out;
}

}  // namespace sociallearn

#include "sociallearn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "sociallearn/error.hpp"
#include "sociallearn/numeric.hpp"

namespace sociallearn {

double network_divergence(std::span<const double> v, const std::vector<NodeModel>& models,
                          std::size_t truth, std::size_t k) {
  if (v.size() != models.size()) throw Error(ErrorCode::DimensionMismatch, "centrality length differs from node count");
  double acc = 0.0;
  for (std::size_t i = 0; i < models.size(); ++i) {
    const double d = kl_divergence(models[i], truth, k);
    if (d == 0.0) continue;
    acc += v[i] * d;
  }
  return acc;
}

double RatePrediction::at(std::size_t k) const {
  for (std::size_t e = 0; e < wrong.size(); ++e)
    if (wrong[e] == k) return k_vec[e];
  throw Error(ErrorCode::InvalidArgument, "no rate for hypothesis " + std::to_string(k));
}

RatePrediction predict_rates(std::span<const double> v, const std::vector<NodeModel>& models,
                             const HypothesisSet& hyp) {
  const std::size_t m = hyp.size();
  RatePrediction out;
  out.mu_lower = kPosInf;
  for (std::size_t k = 0; k < m; ++k) {
    if (k == hyp.true_index) continue;
    const double kk = network_divergence(v, models, hyp.true_index, k);
    out.wrong.push_back(k);
    out.k_vec.push_back(kk);
    out.mu_lower = std::min(out.mu_lower, kk);
    if (!(kk > kIndistinguishableKl)) out.identifiable = false;
  }
  out.rho_l_lower = kPosInf;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      if (a != b) out.rho_l_lower = std::min(out.rho_l_lower, network_divergence(v, models, a, b));
  return out;
}

SlopeFit fit_line(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size() || n < 2) throw Error(ErrorCode::InvalidArgument, "line fit needs two or more points");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ssr += r * r;
  }
  fit.residual_variance = ssr / static_cast<double>(n);
  fit.std_error = n > 2 ? std::sqrt(ssr / static_cast<double>(n - 2) / sxx) : 0.0;
  return fit;
}

RejectionTrace empirical_rejection(std::span<const double> log_q) {
  const std::size_t horizon = log_q.size();
  if (horizon == 0) throw Error(ErrorCode::InvalidArgument, "empty belief trace");
  RejectionTrace out;
  out.rho.reserve(horizon);
  for (std::size_t t = 1; t <= horizon; ++t) {
    const double lq = log_q[t - 1];
    if (lq == kNegInf) {
      throw Error(ErrorCode::AbsorbedBelief, "belief hit zero at t=" + std::to_string(t));
    }
    out.rho.push_back(-lq / static_cast<double>(t));
  }
  // Final half of the horizon; the prior transient decays as O(1/t).
  const std::size_t first = horizon / 2;
  const std::size_t count = horizon - first;
  if (count < 2) {
    out.fit.slope = out.rho.back();
    return out;
  }
  std::vector<double> ts(count);
  std::vector<double> ys(count);
  for (std::size_t i = 0; i < count; ++i) {
    ts[i] = static_cast<double>(first + i + 1);
    ys[i] = -log_q[first + i];
  }
  out.fit = fit_line(ts, ys);
  return out;
}

HoeffdingExponents hoeffding_exponents(std::optional<double> l_bound, unsigned period,
                                       std::span<const double> k_vec, std::size_t k_entry,
                                       double epsilon) {
  if (!l_bound || !std::isfinite(*l_bound)) {
    throw Error(ErrorCode::UnboundedRatios, "log-likelihood ratios are unbounded");
  }
  const double l = *l_bound;
  if (!(l > 0.0)) throw Error(ErrorCode::InvalidArgument, "ratio bound must be positive");
  if (period == 0) throw Error(ErrorCode::InvalidArgument, "period must be positive");
  if (k_entry >= k_vec.size()) throw Error(ErrorCode::InvalidArgument, "rate index out of range");
  if (epsilon < 0.0) throw Error(ErrorCode::InvalidArgument, "epsilon must be nonnegative");
  const double scale = 2.0 * l * l * static_cast<double>(period);
  double min_k2 = kPosInf;
  for (double kk : k_vec) min_k2 = std::min(min_k2, kk * kk);

  HoeffdingExponents out;
  out.below = epsilon * epsilon / scale;
  if (epsilon <= l - k_vec[k_entry]) {
    out.above = std::min(epsilon * epsilon, min_k2) / scale;
  } else {
    out.above = min_k2 / scale;
  }
  return out;
}

std::optional<double> network_log_ratio_bound(const std::vector<NodeModel>& models) {
  double l = 0.0;
  for (const auto& model : models) {
    const auto b = log_ratio_bound(model);
    if (!b) return std::nullopt;
    l = std::max(l, *b);
  }
  return l;
}

}  // namespace sociallearn

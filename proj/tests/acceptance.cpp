// Acceptance run: one PASS/FAIL line per criterion; exit status 1 if any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "sociallearn/analysis.hpp"
#include "sociallearn/bundled.hpp"
#include "sociallearn/engine.hpp"
#include "sociallearn/figures.hpp"
#include "sociallearn/ldp.hpp"
#include "sociallearn/network.hpp"
#include "sociallearn/numeric.hpp"
#include "sociallearn/runner.hpp"

using namespace sociallearn;

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

double mean_of(const std::vector<double>& x) {
  return x.empty() ? kNaN : std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

// Largest recursion residual seen over every acceptance run.
double g_max_residual = 0.0;
std::size_t g_tracked_runs = 0;

void track(const std::vector<ReplicationTrace>& traces) {
  for (const auto& tr : traces) {
    if (std::isnan(tr.recursion_residual)) continue;
    g_max_residual = std::max(g_max_residual, tr.recursion_residual);
    ++g_tracked_runs;
  }
}

const SlopeSummary* find_slope(const AnalysisReport& r, std::size_t node, std::size_t k) {
  for (const auto& s : r.slopes)
    if (s.node == node && s.hypothesis == k) return &s;
  return nullptr;
}

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome criterion1() {
  const auto w = validate_stochastic(aperiodic_two_node_weights());
  const auto start = Clock::now();
  const auto v = stationary_distribution(w);
  const double ms = seconds_since(start) * 1e3;
  const bool ok = std::abs(v[0] - 0.8) < 1e-10 && std::abs(v[1] - 0.2) < 1e-10 && ms < 1.0;
  return {ok, fmt("v = [%.15f, %.15f], %.3f ms", v[0], v[1], ms)};
}

Outcome criterion2() {
  const auto start = Clock::now();
  auto c = bundled_scenario("two_node_bernoulli");
  c.horizon = 10000;
  c.replications = 20;
  c.analysis.brute_force_horizon = 0;
  const auto result = run(c);
  const double secs = seconds_since(start);
  track(result.traces);
  const auto* s0 = find_slope(result.report, 0, 0);
  const auto* s1 = find_slope(result.report, 1, 0);
  if (!s0 || !s1 || !s0->predicted) return {false, "missing slope summary"};
  const double k = *s0->predicted;
  const double rel0 = std::abs(s0->mean - k) / k;
  const double rel1 = std::abs(s1->mean - k) / k;
  const double gap = std::abs(s0->mean - s1->mean);
  const double se = std::hypot(s0->std_error, s1->std_error);
  const bool ok = rel0 < 0.10 && rel1 < 0.10 && gap <= 2 * se && secs < 10.0 && s0->replications == 20;
  return {ok, fmt("K = %.6f, slopes %.6f / %.6f (rel err %.4f / %.4f), node gap %.2e vs 2 SE %.2e, %.2f s", k,
                  s0->mean, s1->mean, rel0, rel1, gap, 2 * se, secs)};
}

Outcome criterion3() {
  auto per = bundled_scenario("two_node_bernoulli_periodic");
  auto ape = bundled_scenario("two_node_bernoulli");
  ape.horizon = per.horizon;
  ape.replications = per.replications;
  ape.seed = per.seed;
  const auto per_traces = simulate_all(per);
  const auto ape_traces = simulate_all(ape);
  track(per_traces);
  track(ape_traces);
  const auto check = validate_scenario(per);
  const auto v = stationary_distribution(check.w);
  const double k = network_divergence(v, per.models, per.hypotheses.true_index, 0);
  const auto slopes = replication_slopes(per_traces, per.horizon, 1, 0);
  const double slope = mean_of(slopes);
  const double var_per = mean_of(replication_residual_variances(per_traces, per.horizon, 1, 0));
  const double var_ape = mean_of(replication_residual_variances(ape_traces, ape.horizon, 1, 0));
  std::size_t converged = 0;
  for (const auto& tr : per_traces) {
    if (!tr.complete(per.horizon)) continue;
    const auto& last = tr.log_q.back();
    bool all = true;
    for (std::size_t i = 0; i < 2; ++i) all = all && std::exp(last(i, per.hypotheses.true_index)) > 0.99;
    converged += all;
  }
  const double rel = std::abs(slope - k) / k;
  const bool ok = converged == per.replications && rel < 0.15 && var_per > var_ape;
  return {ok, fmt("v = [%.3f, %.3f], K = %.6f, slope %.6f (rel err %.4f), %zu/%zu converged, residual variance "
                  "%.1f periodic vs %.1f aperiodic",
                  v[0], v[1], k, slope, rel, converged, per.replications, var_per, var_ape)};
}

Outcome criterion4() {
  auto c = bundled_scenario("not_conn");
  c.horizon = 5000;
  const auto traces = simulate_all(c);
  track(traces);
  bool ok = !traces.empty();
  double worst_split = 0.0;
  double min_range = 1.0;
  for (const auto& tr : traces) {
    if (!tr.complete(c.horizon)) {
      ok = false;
      continue;
    }
    const auto& last = tr.log_q.back();
    worst_split = std::max({worst_split, std::abs(std::exp(last(0, 1)) - 0.5), std::abs(std::exp(last(0, 3)) - 0.5)});
    double lo = 1.0, hi = 0.0;
    for (std::size_t s = c.horizon - 1000; s < c.horizon; ++s) {
      const double b = std::exp(tr.log_q[s](1, 3));
      lo = std::min(lo, b);
      hi = std::max(hi, b);
    }
    min_range = std::min(min_range, hi - lo);
  }
  ok = ok && worst_split <= 0.02 && min_range > 0.2;
  return {ok, fmt("%zu runs: node 1 max |q(theta2|4) - 0.5| = %.2e; node 2 smallest theta4 range over last 1000 "
                  "steps = %.3f",
                  traces.size(), worst_split, min_range)};
}

Outcome criterion5() {
  const auto log_cfg = bundled_scenario("two_node_gaussian");
  const auto lin_cfg = bundled_scenario("two_node_gaussian_linear");
  const auto log_traces = simulate_all(log_cfg);
  const auto lin_traces = simulate_all(lin_cfg);
  track(log_traces);
  const auto a = replication_slopes(log_traces, log_cfg.horizon, 1, 1);
  const auto b = replication_slopes(lin_traces, lin_cfg.horizon, 1, 1);
  std::size_t wins = 0;
  for (std::size_t r = 0; r < std::min(a.size(), b.size()); ++r) wins += a[r] > b[r];
  const bool ok = a.size() == 10 && b.size() == 10 && wins == 10;
  return {ok, fmt("log-consensus faster on %zu/10 runs (mean slope %.4f vs %.4f)", wins, mean_of(a), mean_of(b))};
}

Outcome criterion6() {
  const auto base = bundled_scenario("grid5x5");
  double slope[2];
  const std::size_t informed[2] = {12, 0};
  for (int i = 0; i < 2; ++i) {
    auto c = grid_scenario(informed[i]);
    c.horizon = base.horizon;
    c.replications = 10;
    c.seed = base.seed;
    const auto traces = simulate_all(c);
    track(traces);
    const auto s = replication_slopes(traces, c.horizon, base.analysis.node, 1);
    slope[i] = s.size() == 10 ? mean_of(s) : kNaN;
  }
  return {slope[0] > slope[1], fmt("mean slope with informed node at centre %.5f, at corner %.5f", slope[0], slope[1])};
}

Outcome criterion7() {
  const auto start = Clock::now();
  const auto c = bundled_scenario("two_node_bernoulli");
  const auto check = validate_scenario(c);
  const auto v = stationary_distribution(check.w);
  const std::size_t truth = c.hypotheses.true_index;
  const auto l = network_log_ratio_bound(c.models);
  bool ok = l.has_value();
  std::string notes;

  std::mt19937_64 gen(7);
  double worst_zero = 0.0, worst_mean = 0.0;
  std::size_t convexity_failures = 0, dominance_failures = 0;
  for (std::size_t k = 0; k < c.hypotheses.size(); ++k) {
    if (k == truth) continue;
    const ConjugatePair pair(v, c.models, truth, k);
    worst_zero = std::max(worst_zero, std::abs(pair.log_mgf(0.0)));
    // At the mean itself, and just off it so the search runs.
    for (double x : {pair.mean(), pair.mean() - 1e-7, pair.mean() + 1e-7})
      worst_mean = std::max(worst_mean, std::abs(fenchel_legendre(pair, x)));
    // Triples inside the range of Z_k, found from a coarse conjugate scan.
    double lo = pair.mean(), hi = pair.mean();
    while (std::isfinite(fenchel_legendre_or_inf(pair, lo - 0.01))) lo -= 0.01;
    while (std::isfinite(fenchel_legendre_or_inf(pair, hi + 0.01))) hi += 0.01;
    std::uniform_real_distribution<double> u(lo, hi), s(0.0, 1.0);
    for (int i = 0; i < 50; ++i) {
      const double x = u(gen), y = u(gen), a = s(gen);
      const double mid = fenchel_legendre(pair, a * x + (1 - a) * y);
      if (mid > a * fenchel_legendre(pair, x) + (1 - a) * fenchel_legendre(pair, y) + 1e-9) ++convexity_failures;
    }
    if (l) {
      for (double eps : {0.05, 0.1, 0.2}) {
        const double bound = eps * eps / (2 * *l * *l);
        if (!(fenchel_legendre_or_inf(pair, pair.mean() - eps) >= bound)) ++dominance_failures;
        if (!(fenchel_legendre_or_inf(pair, pair.mean() + eps) >= bound)) ++dominance_failures;
      }
    }
  }
  ok = ok && worst_zero <= 1e-10 && worst_mean <= 1e-8 && convexity_failures == 0 && dominance_failures == 0;
  notes += fmt("|L(0)| %.1e, |I(K)| %.1e, convexity failures %zu, dominance failures %zu; ", worst_zero, worst_mean,
               convexity_failures, dominance_failures);

  const ConjugatePair pair(v, c.models, truth, 0);
  const double target = fenchel_legendre(pair, pair.mean() - 0.15);
  const std::vector<double> prior(c.hypotheses.size(), 1.0 / static_cast<double>(c.hypotheses.size()));
  double previous_gap = kPosInf;
  bool monotone = true;
  for (std::size_t t : {8u, 10u, 12u}) {
    const double p =
        brute_force_tail(c.models, check.w, prior, truth, {t, c.analysis.node, 0, pair.mean() - 0.15, Tail::Lower});
    const double e = -std::log(p) / static_cast<double>(t);
    const double gap = std::abs(e - target);
    monotone = monotone && p > 0.0 && gap < previous_gap;
    previous_gap = gap;
    notes += fmt("t=%zu exponent %.5f; ", t, e);
  }
  const double secs = seconds_since(start);
  ok = ok && monotone && secs < 60.0;
  notes += fmt("target %.5f, %s, %.1f s", target, monotone ? "monotone approach" : "not monotone", secs);
  return {ok, notes};
}

// Concentration exponents written out case by case.
double reference_below(double eps, double l, double d) { return eps * eps / (2.0 * l * l * d); }

double reference_above(double eps, double l, double d, const std::vector<double>& k, std::size_t entry) {
  double min_sq = kPosInf;
  for (double kj : k) min_sq = std::min(min_sq, kj * kj);
  if (eps == 0.0) return 0.0;
  if (eps <= l - k[entry]) return std::min(eps * eps, min_sq) / (2.0 * l * l * d);
  return min_sq / (2.0 * l * l * d);
}

Outcome criterion8() {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t cases = 0, mismatches = 0, case_counts[3] = {0, 0, 0};
  for (int trial = 0; trial < 2000; ++trial) {
    const double l = 0.2 + 3.0 * u(gen);
    const unsigned d = 1 + static_cast<unsigned>(gen() % 4);
    std::vector<double> k(1 + gen() % 4);
    for (double& kj : k) kj = l * u(gen);
    const std::size_t entry = gen() % k.size();
    std::vector<double> epsilons = {2.0 * l * u(gen), 0.5 * l * u(gen), l - k[entry], 0.0};
    for (double eps : epsilons) {
      const auto h = hoeffding_exponents(l, d, k, entry, eps);
      const double below = reference_below(eps, l, d);
      const double above = reference_above(eps, l, d, k, entry);
      ++cases;
      if (h.below != below || h.above != above) ++mismatches;
      double min_sq = kPosInf;
      for (double kj : k) min_sq = std::min(min_sq, kj * kj);
      if (eps > l - k[entry]) ++case_counts[2];
      else if (eps * eps < min_sq) ++case_counts[0];
      else ++case_counts[1];
    }
  }
  // The bundled scenario's value.
  const auto c = bundled_scenario("two_node_bernoulli");
  const auto l = network_log_ratio_bound(c.models);
  const auto v = stationary_distribution(validate_stochastic(c.weights));
  const auto pred = predict_rates(v, c.models, c.hypotheses);
  const double example = hoeffding_exponents(l, 1, pred.k_vec, 0, 0.1).below;
  const bool ok = mismatches == 0 && case_counts[0] && case_counts[1] && case_counts[2] &&
                  example == reference_below(0.1, *l, 1) && std::abs(example - 0.002862) < 5e-7;
  return {ok, fmt("%zu cases (%zu / %zu / %zu per branch), %zu mismatches; eps=0.1 example %.10f", cases,
                  case_counts[0], case_counts[1], case_counts[2], mismatches, example)};
}

Outcome criterion9() {
  const auto c = bundled_scenario("quantized_two_node");
  const auto result = run(c);
  const auto& n = result.report.counts;
  const bool mechanism = quantized_absorption_mechanism(255, 50);
  const bool ok = c.quantization.levels == 4095 && n.replications == 50 && n.converged == 50 && mechanism;
  return {ok, fmt("D=%llu: %zu/%zu runs converged to theta4 (T=%zu); D=255 absorption mechanism %s",
                  static_cast<unsigned long long>(c.quantization.levels), n.converged, n.replications, c.horizon,
                  mechanism ? "holds" : "fails")};
}

Outcome criterion10() {
  std::mt19937_64 gen(10);
  std::uniform_real_distribution<double> u(0.05, 0.95), mu(-2.0, 2.0);
  const auto w = validate_stochastic({{1.0}});
  double worst = 0.0;
  for (int scenario = 0; scenario < 100; ++scenario) {
    const std::size_t m = 2 + scenario % 6;
    std::vector<double> p(m), means(m);
    for (std::size_t k = 0; k < m; ++k) {
      p[k] = u(gen);
      means[k] = mu(gen);
    }
    const std::vector<NodeModel> models = {scenario % 2 ? NodeModel(Gaussian{means, 0.5 + u(gen)}) : NodeModel(Bernoulli{p})};
    const std::size_t truth = scenario % m;
    Rng rng(gen());
    BeliefState s = init_beliefs(1, m);
    std::vector<double> batch(m, 0.0);
    for (int t = 0; t < 300; ++t) {
      const Observation x = sample(models[0], truth, rng);
      s = step(s, models, w, StepInput{{x}}, {});
      for (std::size_t k = 0; k < m; ++k) batch[k] += log_likelihood(models[0], k, x);
    }
    const double z = log_sum_exp(batch);
    for (std::size_t k = 0; k < m; ++k) worst = std::max(worst, std::abs(std::exp(s.log_q(0, k)) - std::exp(batch[k] - z)));
  }
  const bool ok = worst <= 1e-8 && g_tracked_runs > 0 && g_max_residual <= 1e-9;
  return {ok, fmt("batch Bayes max deviation %.2e over 100 scenarios; recursion residual max %.2e over %zu runs", worst,
                  g_max_residual, g_tracked_runs)};
}

}  // namespace

int main() {
  const std::vector<std::function<Outcome()>> criteria = {criterion1, criterion2, criterion3, criterion4, criterion5,
                                                          criterion6, criterion7, criterion8, criterion9, criterion10};
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome out;
    try {
      out = criteria[i]();
    } catch (const std::exception& e) {
      out = {false, std::string("threw ") + e.what()};
    }
    failed += !out.passed;
    std::printf("criterion %zu %s: %s\n", i + 1, out.passed ? "PASS" : "FAIL", out.detail.c_str());
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}

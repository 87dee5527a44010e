#include "sociallearn/runner.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>

#include "sociallearn/ldp.hpp"
#include "sociallearn/numeric.hpp"

namespace sociallearn {

using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

json num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

json num(const std::optional<double>& x) { return x ? num(*x) : json(nullptr); }

std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, res.ptr};
}

std::size_t argmax_row(std::span<const double> row) {
  return static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
}

}  // namespace

std::uint64_t replication_seed(std::uint64_t master, std::size_t rep) {
  return splitmix64(splitmix64(master) ^ static_cast<std::uint64_t>(rep));
}

ReplicationTrace simulate_replication(const ScenarioConfig& c, const StochasticMatrix& w, std::size_t rep,
                                      std::uint64_t seed) {
  ReplicationTrace out;
  out.rep = rep;
  out.seed = seed;
  const std::size_t n = c.models.size();
  const std::size_t truth = c.hypotheses.true_index;
  const bool track = !c.quantization.enabled && c.rule == ConsensusRule::LogLinear;
  out.recursion_residual = track ? 0.0 : kNaN;
  Rng rng(seed);
  StepInput input;
  input.observations.resize(n);
  out.log_q.reserve(c.horizon);
  try {
    BeliefState state = init_beliefs(n, c.hypotheses.size(), c.prior);
    BeliefState previous;
    for (std::size_t t = 1; t <= c.horizon; ++t) {
      for (std::size_t i = 0; i < n; ++i) input.observations[i] = sample(c.models[i], truth, rng);
      const BeliefMatrix log_lik = evaluate_log_likelihoods(c.models, input);
      if (track) previous = state;
      advance(state, log_lik, w, c.quantization, c.rule);
      if (track) {
        out.recursion_residual =
            std::max(out.recursion_residual, recursion_residual(previous, state, log_lik, w, truth));
      }
      out.log_q.push_back(state.log_q);
    }
  } catch (const Error& e) {
    out.error = e.code();
    out.error_message = e.what();
  }
  return out;
}

std::vector<ReplicationTrace> simulate_all(const ScenarioConfig& config, unsigned threads) {
  const ScenarioCheck check = validate_scenario(config);
  std::vector<ReplicationTrace> traces(config.replications);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, config.replications));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t r = next++; r < config.replications; r = next++) {
      traces[r] = simulate_replication(config, check.w, r, replication_seed(config.seed, r));
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned k = 0; k < threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return traces;
}

RunResult run(const ScenarioConfig& config, unsigned threads) {
  RunResult out;
  out.traces = simulate_all(config, threads);
  out.report = analyze(config, out.traces);
  return out;
}

AnalysisReport analyze(const ScenarioConfig& c, const std::vector<ReplicationTrace>& traces) {
  const ScenarioCheck check = validate_scenario(c);
  const std::size_t n = c.models.size();
  const std::size_t m = c.hypotheses.size();
  const std::size_t truth = c.hypotheses.true_index;
  const std::size_t T = c.horizon;

  AnalysisReport r;
  r.scenario = c.name;
  r.horizon = T;
  r.strongly_connected = check.graph.strongly_connected;
  r.period = check.graph.period;
  r.identifiable = check.distinguishability.globally_identifiable;
  r.warnings = check.warnings;
  r.log_ratio_bound = network_log_ratio_bound(c.models);

  std::optional<RatePrediction> prediction;
  if (r.strongly_connected) {
    r.centrality = stationary_distribution(check.w);
    prediction = predict_rates(r.centrality, c.models, c.hypotheses);
    r.wrong_hypotheses = prediction->wrong;
    for (double k : prediction->k_vec) r.k_vec.push_back({k, "rejection-rate:network-divergence"});
    r.mu_lower = TaggedValue{prediction->mu_lower, "rejection-rate:min-network-divergence"};
    r.rho_l_lower = TaggedValue{prediction->rho_l_lower, "learning-rate:min-over-truths-and-pairs"};
    if (!prediction->identifiable) r.warnings.push_back("some network divergence vanishes");
  }

  // Run bookkeeping.
  r.counts.replications = traces.size();
  r.final_beliefs.assign(n, std::vector<double>(m, 0.0));
  double residual = 0.0;
  bool residual_known = !traces.empty();
  for (const auto& tr : traces) {
    if (std::isnan(tr.recursion_residual)) {
      residual_known = false;
    } else {
      residual = std::max(residual, tr.recursion_residual);
    }
    if (tr.error) {
      r.errors.push_back({tr.rep, tr.log_q.size(), *tr.error, tr.error_message});
      if (*tr.error == ErrorCode::AllZeroMessage) {
        ++r.counts.all_zero_message;
      } else {
        ++r.counts.other_errors;
      }
    }
    if (tr.log_q.empty()) continue;
    const BeliefMatrix& last = tr.log_q.back();
    bool absorbed = false;
    for (std::size_t i = 0; i < n; ++i) absorbed = absorbed || last(i, truth) == kNegInf;
    if (absorbed) ++r.counts.truth_absorbed;
    if (!tr.complete(T)) continue;
    ++r.counts.completed;
    bool all_right = true;
    for (std::size_t i = 0; i < n; ++i) {
      all_right = all_right && argmax_row(last.row(i)) == truth && last(i, truth) > kNegInf;
      for (std::size_t k = 0; k < m; ++k) r.final_beliefs[i][k] += std::exp(last(i, k));
    }
    if (all_right) {
      ++r.counts.converged;
    } else {
      ++r.counts.wrong_convergence;
    }
  }
  if (r.counts.completed > 0) {
    for (auto& row : r.final_beliefs)
      for (double& x : row) x /= static_cast<double>(r.counts.completed);
  }
  if (residual_known) r.recursion_residual = residual;

  // Fitted slopes of -ln q per (node, wrong hypothesis).
  std::vector<double> series(T);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < m; ++k) {
      if (k == truth) continue;
      SlopeSummary s;
      s.node = i;
      s.hypothesis = k;
      if (prediction) s.predicted = prediction->at(k);
      std::vector<double> slopes;
      std::vector<double> fit_errors;
      double resid = 0.0;
      for (const auto& tr : traces) {
        if (!tr.complete(T)) continue;
        for (std::size_t t = 0; t < T; ++t) series[t] = tr.log_q[t](i, k);
        try {
          const RejectionTrace rt = empirical_rejection(series);
          slopes.push_back(rt.fit.slope);
          fit_errors.push_back(rt.fit.std_error);
          resid += rt.fit.residual_variance;
        } catch (const Error& e) {
          if (e.code() != ErrorCode::AbsorbedBelief) throw;
          ++s.absorbed;
        }
      }
      s.replications = slopes.size();
      if (!slopes.empty()) {
        double mean = 0.0;
        for (double x : slopes) mean += x;
        mean /= static_cast<double>(slopes.size());
        s.mean = mean;
        s.residual_variance = resid / static_cast<double>(slopes.size());
        if (slopes.size() > 1) {
          double ss = 0.0;
          for (double x : slopes) ss += (x - mean) * (x - mean);
          s.std_error = std::sqrt(ss / static_cast<double>(slopes.size() - 1) / static_cast<double>(slopes.size()));
        } else {
          s.std_error = fit_errors.front();
        }
      } else {
        s.mean = kNaN;
        s.std_error = kNaN;
        s.residual_variance = kNaN;
      }
      r.slopes.push_back(s);
    }
  }

  if (!prediction) return r;

  // Deviation fractions at the analysis node.
  const std::size_t node = c.analysis.node;
  const std::size_t checkpoints = std::max<std::size_t>(1, std::min(c.analysis.checkpoints, T));
  for (double eps : c.analysis.epsilons) {
    for (std::size_t e = 0; e < prediction->wrong.size(); ++e) {
      DeviationRow row;
      row.epsilon = eps;
      row.hypothesis = prediction->wrong[e];
      for (std::size_t cp = 1; cp <= checkpoints; ++cp) {
        const std::size_t t = std::max<std::size_t>(1, T * cp / checkpoints);
        std::size_t seen = 0;
        std::size_t deviating = 0;
        for (const auto& tr : traces) {
          if (tr.log_q.size() < t) continue;
          ++seen;
          const double rho = -tr.log_q[t - 1](node, row.hypothesis) / static_cast<double>(t);
          if (!(std::abs(rho - prediction->k_vec[e]) <= eps)) ++deviating;
        }
        row.t.push_back(t);
        row.fraction.push_back(seen == 0 ? kNaN : static_cast<double>(deviating) / static_cast<double>(seen));
      }
      r.deviations.push_back(std::move(row));
    }
  }

  // Conjugate exponents, concentration bounds, exact tails.
  std::vector<ConjugatePair> pairs;
  for (std::size_t k : prediction->wrong) pairs.emplace_back(r.centrality, c.models, truth, k);
  bool finite_alphabets = true;
  for (const auto& model : c.models) finite_alphabets = finite_alphabets && model.alphabet_size().has_value();
  for (double eps : c.analysis.epsilons) {
    for (std::size_t e = 0; e < pairs.size(); ++e) {
      LdpRow row;
      row.epsilon = eps;
      row.hypothesis = prediction->wrong[e];
      row.k = prediction->k_vec[e];
      row.below = fenchel_legendre_or_inf(pairs[e], row.k - eps);
      row.above = fenchel_legendre_or_inf(pairs[e], row.k + eps);
      if (r.log_ratio_bound) {
        row.hoeffding = hoeffding_exponents(r.log_ratio_bound, r.period, prediction->k_vec, e, eps);
      }
      if (c.analysis.brute_force_horizon > 0 && finite_alphabets) {
        TailQuery q{c.analysis.brute_force_horizon, node, row.hypothesis, row.k - eps, Tail::Lower};
        try {
          const double p = brute_force_tail(c.models, check.w, c.prior, truth, q);
          row.exact_tail_probability = p;
          row.exact_tail_exponent = -std::log(p) / static_cast<double>(q.horizon);
        } catch (const Error& err) {
          if (err.code() != ErrorCode::PathSpaceTooLarge) throw;
          r.warnings.push_back(std::string("exact tail skipped: ") + err.what());
        }
      }
      r.ldp.push_back(row);
    }
  }

  // Rate function of the belief vector, separable and joint, for M <= 4.
  if (m <= 4) {
    const JointLogMgf joint(r.centrality, c.models, truth, prediction->wrong);
    for (double eps : c.analysis.epsilons) {
      for (std::size_t e = 0; e < pairs.size(); ++e) {
        RateFunctionRow row;
        row.epsilon = eps;
        row.hypothesis = prediction->wrong[e];
        for (double k : prediction->k_vec) row.y.push_back(-k);
        row.y[e] += eps;  // rho_k slower by eps
        if (row.y[e] > 0.0) continue;
        row.separable = rate_function_j(pairs, row.y);
        row.joint = rate_function_j_joint(joint, row.y);
        r.rate_function.push_back(row);
      }
    }
  }
  return r;
}

json report_to_json(const AnalysisReport& r) {
  json doc;
  doc["scenario"] = r.scenario;
  doc["horizon"] = r.horizon;
  doc["network"] = {{"strongly_connected", r.strongly_connected}, {"period", r.period}, {"centrality", json::array()}};
  for (double v : r.centrality) doc["network"]["centrality"].push_back(num(v));
  doc["identifiable"] = r.identifiable;
  doc["warnings"] = r.warnings;
  doc["log_ratio_bound"] = num(r.log_ratio_bound);

  json pred = json::object();
  if (r.mu_lower) {
    pred["k_vec"] = json::array();
    for (std::size_t e = 0; e < r.k_vec.size(); ++e) {
      pred["k_vec"].push_back({{"hypothesis", r.wrong_hypotheses[e]}, {"value", num(r.k_vec[e].value)}, {"tag", r.k_vec[e].tag}});
    }
    pred["mu_lower"] = {{"value", num(r.mu_lower->value)}, {"tag", r.mu_lower->tag}};
    pred["rho_l_lower"] = {{"value", num(r.rho_l_lower->value)}, {"tag", r.rho_l_lower->tag}};
  }
  doc["predictions"] = pred;

  doc["slopes"] = json::array();
  for (const auto& s : r.slopes) {
    doc["slopes"].push_back({{"node", s.node},
                             {"hypothesis", s.hypothesis},
                             {"mean", num(s.mean)},
                             {"std_error", num(s.std_error)},
                             {"residual_variance", num(s.residual_variance)},
                             {"replications", s.replications},
                             {"absorbed", s.absorbed},
                             {"predicted", num(s.predicted)}});
  }
  doc["deviation_fractions"] = json::array();
  for (const auto& d : r.deviations) {
    json fr = json::array();
    for (double f : d.fraction) fr.push_back(num(f));
    doc["deviation_fractions"].push_back({{"epsilon", d.epsilon}, {"hypothesis", d.hypothesis}, {"t", d.t}, {"fraction", fr}});
  }
  doc["ldp"] = json::array();
  for (const auto& l : r.ldp) {
    json row = {{"epsilon", l.epsilon},
                {"hypothesis", l.hypothesis},
                {"k", num(l.k)},
                {"rate_below", {{"value", num(l.below)}, {"tag", "deviation-exponent:conjugate-of-log-mgf"}}},
                {"rate_above", {{"value", num(l.above)}, {"tag", "deviation-exponent:conjugate-of-log-mgf"}}},
                {"exact_tail_probability", num(l.exact_tail_probability)},
                {"exact_tail_exponent", num(l.exact_tail_exponent)}};
    if (l.hoeffding) {
      row["hoeffding"] = {{"below", num(l.hoeffding->below)},
                          {"above", num(l.hoeffding->above)},
                          {"tag", "concentration:bounded-log-likelihood-ratios"}};
    } else {
      row["hoeffding"] = nullptr;
    }
    doc["ldp"].push_back(row);
  }
  doc["rate_function"] = json::array();
  for (const auto& j : r.rate_function) {
    json y = json::array();
    for (double v : j.y) y.push_back(num(v));
    doc["rate_function"].push_back({{"epsilon", j.epsilon},
                                    {"hypothesis", j.hypothesis},
                                    {"y", y},
                                    {"separable", num(j.separable)},
                                    {"joint", num(j.joint)},
                                    {"tag", "belief-vector-ldp:contraction-through-g"}});
  }
  doc["counts"] = {{"replications", r.counts.replications},   {"completed", r.counts.completed},
                   {"converged", r.counts.converged},         {"wrong_convergence", r.counts.wrong_convergence},
                   {"truth_absorbed", r.counts.truth_absorbed}, {"all_zero_message", r.counts.all_zero_message},
                   {"other_errors", r.counts.other_errors}};
  doc["final_beliefs"] = json::array();
  for (const auto& row : r.final_beliefs) {
    json out = json::array();
    for (double x : row) out.push_back(num(x));
    doc["final_beliefs"].push_back(out);
  }
  doc["recursion_residual"] = num(r.recursion_residual);
  doc["errors"] = json::array();
  for (const auto& e : r.errors) {
    doc["errors"].push_back({{"rep", e.rep}, {"steps", e.steps}, {"code", to_string(e.code)}, {"message", e.message}});
  }
  return doc;
}

void write_trace_csv(std::ostream& out, const std::vector<ReplicationTrace>& traces, bool full) {
  out << "rep,t,node,hypothesis,log_belief,rho\n";
  for (const auto& tr : traces) {
    const std::size_t first = full || tr.log_q.empty() ? 0 : tr.log_q.size() - 1;
    for (std::size_t s = first; s < tr.log_q.size(); ++s) {
      const BeliefMatrix& q = tr.log_q[s];
      const std::size_t t = s + 1;
      for (std::size_t i = 0; i < q.nodes(); ++i) {
        for (std::size_t k = 0; k < q.hypotheses(); ++k) {
          const double lb = q(i, k);
          out << tr.rep << ',' << t << ',' << i << ',' << k << ',' << format_double(lb) << ','
              << format_double(-lb / static_cast<double>(t)) << '\n';
        }
      }
    }
  }
}

std::vector<ReplicationTrace> read_trace_csv(std::istream& in, std::size_t nodes, std::size_t hypotheses) {
  std::string line;
  if (!std::getline(in, line) || line != "rep,t,node,hypothesis,log_belief,rho") {
    throw Error(ErrorCode::ParseError, "trace header must be rep,t,node,hypothesis,log_belief,rho");
  }
  std::vector<ReplicationTrace> traces;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream fields(line);
    std::string cell[6];
    for (auto& f : cell) std::getline(fields, f, ',');
    char* end = nullptr;
    const auto rep = std::strtoull(cell[0].c_str(), &end, 10);
    const auto t = std::strtoull(cell[1].c_str(), &end, 10);
    const auto i = std::strtoull(cell[2].c_str(), &end, 10);
    const auto k = std::strtoull(cell[3].c_str(), &end, 10);
    const double lb = std::strtod(cell[4].c_str(), &end);
    if (cell[4].empty() || *end != '\0' || t == 0 || i >= nodes || k >= hypotheses) {
      throw Error(ErrorCode::ParseError, "bad trace row at line " + std::to_string(line_no));
    }
    if (traces.empty() || traces.back().rep != rep) {
      if (!traces.empty() && rep < traces.back().rep) {
        throw Error(ErrorCode::ParseError, "replications out of order at line " + std::to_string(line_no));
      }
      ReplicationTrace tr;
      tr.rep = rep;
      tr.recursion_residual = kNaN;
      traces.push_back(std::move(tr));
    }
    auto& tr = traces.back();
    if (t == tr.log_q.size() + 1) {
      tr.log_q.emplace_back(nodes, hypotheses, kNaN);
    } else if (t != tr.log_q.size()) {
      throw Error(ErrorCode::ParseError, "non-monotone t at line " + std::to_string(line_no));
    }
    tr.log_q.back()(i, k) = lb;
  }
  return traces;
}

}  // namespace sociallearn

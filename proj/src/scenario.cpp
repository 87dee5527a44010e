#include "sociallearn/scenario.hpp"

#include <fstream>
#include <sstream>
#include <string>

#include "sociallearn/bundled.hpp"
#include "sociallearn/error.hpp"

namespace sociallearn {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& assumption, const std::string& detail) {
  throw Error(ErrorCode::ValidationError, assumption + ": " + detail);
}

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) invalid("schema", where + " is missing key '" + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    invalid("schema", where + "." + key + " has the wrong type (" + e.what() + ")");
  }
}

template <typename T>
T field_or(const json& obj, const char* key, T fallback, const std::string& where) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return field<T>(obj, key, where);
}

NodeModel model_from_json(const json& m, std::size_t node) {
  const std::string where = "models[" + std::to_string(node) + "]";
  const auto family = field<std::string>(m, "family", where);
  try {
    if (family == "bernoulli") return NodeModel(Bernoulli{field<std::vector<double>>(m, "p", where)});
    if (family == "categorical") {
      return NodeModel(Categorical{field<std::vector<std::vector<double>>>(m, "probs", where)});
    }
    if (family == "gaussian") {
      return NodeModel(Gaussian{field<std::vector<double>>(m, "mean", where), field_or<double>(m, "sigma", 1.0, where)});
    }
    if (family == "gaussian_mixture") {
      return NodeModel(GaussianMixture{field<std::vector<std::vector<double>>>(m, "weights", where),
                                       field<std::vector<std::vector<double>>>(m, "means", where),
                                       field_or<double>(m, "sigma", 1.0, where)});
    }
    if (family == "gamma") {
      return NodeModel(Gamma{field<std::vector<double>>(m, "shape", where), field_or<double>(m, "rate", 1.0, where)});
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ValidationError) throw;
    invalid("valid likelihood family", where + ": " + e.what());
  }
  invalid("schema", where + ".family '" + family + "' is not one of bernoulli, categorical, gaussian, "
                    "gaussian_mixture, gamma");
}

json model_to_json(const NodeModel& model) {
  return std::visit(
      [](const auto& f) -> json {
        using F = std::decay_t<decltype(f)>;
        if constexpr (std::is_same_v<F, Bernoulli>) return {{"family", "bernoulli"}, {"p", f.p}};
        if constexpr (std::is_same_v<F, Categorical>) return {{"family", "categorical"}, {"probs", f.probs}};
        if constexpr (std::is_same_v<F, Gaussian>) return {{"family", "gaussian"}, {"mean", f.mean}, {"sigma", f.sigma}};
        if constexpr (std::is_same_v<F, GaussianMixture>) {
          return {{"family", "gaussian_mixture"}, {"weights", f.weights}, {"means", f.means}, {"sigma", f.sigma}};
        }
        if constexpr (std::is_same_v<F, Gamma>) return {{"family", "gamma"}, {"shape", f.shape}, {"rate", f.rate}};
      },
      model.family());
}

}  // namespace

ScenarioConfig scenario_from_json(const json& doc) {
  if (!doc.is_object()) invalid("schema", "top level must be an object");
  ScenarioConfig c;
  c.schema_version = field<int>(doc, "schema_version", "config");
  if (c.schema_version != kSchemaVersion) {
    invalid("schema", "unsupported schema_version " + std::to_string(c.schema_version));
  }
  c.name = field<std::string>(doc, "name", "config");

  const json& hyp = doc.contains("hypotheses") ? doc.at("hypotheses") : json();
  try {
    c.hypotheses = make_hypotheses(field<std::vector<std::string>>(hyp, "labels", "hypotheses"),
                                   field<std::size_t>(hyp, "true_index", "hypotheses"));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ValidationError) throw;
    invalid("hypothesis set", e.what());
  }

  const json& net = doc.contains("network") ? doc.at("network") : json();
  c.weights = field<std::vector<std::vector<double>>>(net, "weights", "network");
  c.ref_node = field_or<std::size_t>(net, "ref_node", 0, "network");

  if (!doc.contains("models") || !doc.at("models").is_array()) invalid("schema", "models must be an array");
  for (std::size_t i = 0; i < doc.at("models").size(); ++i) c.models.push_back(model_from_json(doc.at("models")[i], i));

  if (doc.contains("prior")) {
    const json& p = doc.at("prior");
    if (p.is_string()) {
      if (p.get<std::string>() != "uniform") invalid("schema", "prior must be \"uniform\" or an array");
    } else {
      c.prior = field<std::vector<double>>(doc, "prior", "config");
    }
  }

  c.horizon = field<std::size_t>(doc, "horizon", "config");
  c.replications = field<std::size_t>(doc, "replications", "config");
  c.seed = field<std::uint64_t>(doc, "seed", "config");

  if (doc.contains("quantization")) {
    const json& q = doc.at("quantization");
    c.quantization.enabled = field_or<bool>(q, "enabled", false, "quantization");
    c.quantization.levels = field_or<std::uint64_t>(q, "levels", 1, "quantization");
  }

  const auto rule = field_or<std::string>(doc, "rule", "log_consensus", "config");
  if (rule == "log_consensus") {
    c.rule = ConsensusRule::LogLinear;
  } else if (rule == "linear_baseline") {
    c.rule = ConsensusRule::LinearBaseline;
  } else {
    invalid("schema", "rule must be log_consensus or linear_baseline");
  }

  if (doc.contains("analysis")) {
    const json& a = doc.at("analysis");
    c.analysis.node = field_or<std::size_t>(a, "node", 0, "analysis");
    c.analysis.epsilons = field_or<std::vector<double>>(a, "epsilons", {}, "analysis");
    c.analysis.checkpoints = field_or<std::size_t>(a, "checkpoints", 10, "analysis");
    c.analysis.brute_force_horizon = field_or<std::size_t>(a, "brute_force_horizon", 0, "analysis");
  }
  if (doc.contains("trace")) c.full_trace = field_or<bool>(doc.at("trace"), "full", true, "trace");
  return c;
}

json scenario_to_json(const ScenarioConfig& c) {
  json doc;
  doc["schema_version"] = c.schema_version;
  doc["name"] = c.name;
  doc["hypotheses"] = {{"labels", c.hypotheses.labels}, {"true_index", c.hypotheses.true_index}};
  doc["network"] = {{"weights", c.weights}, {"ref_node", c.ref_node}};
  doc["models"] = json::array();
  for (const auto& m : c.models) doc["models"].push_back(model_to_json(m));
  doc["prior"] = c.prior.empty() ? json("uniform") : json(c.prior);
  doc["horizon"] = c.horizon;
  doc["replications"] = c.replications;
  doc["seed"] = c.seed;
  doc["quantization"] = {{"enabled", c.quantization.enabled}, {"levels", c.quantization.levels}};
  doc["rule"] = c.rule == ConsensusRule::LogLinear ? "log_consensus" : "linear_baseline";
  doc["analysis"] = {{"node", c.analysis.node},
                     {"epsilons", c.analysis.epsilons},
                     {"checkpoints", c.analysis.checkpoints},
                     {"brute_force_horizon", c.analysis.brute_force_horizon}};
  doc["trace"] = {{"full", c.full_trace}};
  return doc;
}

ScenarioConfig parse_scenario(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return scenario_from_json(doc);
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    if (!path.has_extension() && is_bundled_scenario(path.string())) {
      ScenarioConfig c = bundled_scenario(path.string());
      validate_scenario(c);
      return c;
    }
    throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  }
  std::stringstream buffer;
  buffer << in.rdbuf();
  ScenarioConfig c = parse_scenario(buffer.str());
  validate_scenario(c);
  return c;
}

ScenarioCheck validate_scenario(const ScenarioConfig& c) {
  const std::size_t m = c.hypotheses.size();
  const std::size_t n = c.weights.size();
  if (c.horizon < 1) invalid("horizon", "T must be at least 1");
  if (c.replications < 1) invalid("replications", "R must be at least 1");
  if (c.quantization.enabled && c.quantization.levels < 1) invalid("quantization", "D must be at least 1");
  if (c.models.size() != n) {
    invalid("dimensions", std::to_string(c.models.size()) + " node models for a " + std::to_string(n) + "-node network");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (c.models[i].hypotheses() != m) {
      invalid("dimensions", "node " + std::to_string(i) + " model has " + std::to_string(c.models[i].hypotheses()) +
                                " hypotheses, expected " + std::to_string(m));
    }
  }
  if (!c.prior.empty()) {
    if (c.prior.size() != m) invalid("dimensions", "prior length differs from hypothesis count");
    double sum = 0.0;
    for (double p : c.prior) {
      if (!(p > 0.0)) invalid("positive initial beliefs", "every prior entry must be strictly positive");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kStochasticTolerance) invalid("positive initial beliefs", "prior must sum to 1");
  }
  if (c.analysis.node >= n && n > 0) invalid("analysis", "analysis.node out of range");
  for (double eps : c.analysis.epsilons) {
    if (!(eps >= 0.0)) invalid("analysis", "epsilons must be nonnegative");
  }

  std::optional<StochasticMatrix> w;
  try {
    w = validate_stochastic(c.weights);
  } catch (const Error& e) {
    invalid("row-stochastic weights", e.what());
  }
  if (c.ref_node >= n) invalid("network", "ref_node out of range");

  ScenarioCheck check{*w, {}, distinguishability(c.models, c.hypotheses), {}};
  if (is_strongly_connected(check.w)) {
    check.graph = cyclic_classes(check.w, c.ref_node);
  } else {
    check.warnings.push_back("network is not strongly connected; learning is not guaranteed");
  }
  if (!check.distinguishability.globally_identifiable) {
    check.warnings.push_back("true hypothesis is not globally identifiable");
  }
  return check;
}

}  // namespace sociallearn

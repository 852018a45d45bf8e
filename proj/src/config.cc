#include "neurallog/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "neurallog/errors.hpp"

namespace neurallog {

namespace {

using nlohmann::json;

// Reads fields from one JSON object and rejects keys nobody asked for.
class FieldReader {
 public:
  FieldReader(const json& obj, std::string path) : obj_(obj), path_(std::move(path)) {
    if (!obj_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <class T>
  void read(const char* key, T& out) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    if (it == obj_.end() || it->is_null()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception&) {
      throw ConfigError(field(key) + ": has the wrong type (" + it->dump() + ")");
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    const auto it = obj_.find(key);
    return it == obj_.end() || it->is_null() ? nullptr : &*it;
  }

  std::string field(const char* key) const {
    return path_.empty() ? std::string(key) : path_ + "." + key;
  }

  void finish() const {
    for (const auto& [k, v] : obj_.items()) {
      if (!seen_.contains(k)) throw ConfigError(field(k.c_str()) + ": unknown field");
    }
  }

 private:
  const json& obj_;
  std::string path_;
  std::set<std::string> seen_;
};

TrainMode parse_mode(const std::string& s, const std::string& field) {
  if (s == "theory") return TrainMode::kTheory;
  if (s == "practical") return TrainMode::kPractical;
  throw ConfigError(field + ": expected 'theory' or 'practical', got '" + s + "'");
}

MatrixMode parse_matrix_mode(const std::string& s, const std::string& field) {
  if (s == "full") return MatrixMode::kFull;
  if (s == "diag") return MatrixMode::kDiag;
  throw ConfigError(field + ": expected 'full' or 'diag', got '" + s + "'");
}

ContextMode parse_context_mode(const std::string& s, const std::string& field) {
  if (s == "isotropic") return ContextMode::kIsotropic;
  if (s == "aligned") return ContextMode::kAligned;
  if (s == "zero") return ContextMode::kZero;
  throw ConfigError(field + ": expected 'isotropic', 'aligned' or 'zero', got '" + s + "'");
}

std::string context_mode_name(ContextMode m) {
  switch (m) {
    case ContextMode::kIsotropic: return "isotropic";
    case ContextMode::kAligned: return "aligned";
    case ContextMode::kZero: return "zero";
  }
  return "isotropic";
}

AlgorithmSpec parse_algorithm_spec(const json& node, const std::string& path) {
  AlgorithmSpec spec;
  if (node.is_string()) {
    spec.bandit.algorithm = parse_algorithm(node.get<std::string>());
    spec.label = node.get<std::string>();
    return spec;
  }
  FieldReader r(node, path);
  std::string name;
  r.read("name", name);
  if (name.empty()) throw ConfigError(r.field("name") + ": required");
  BanditConfig& b = spec.bandit;
  b.algorithm = parse_algorithm(name);
  spec.label = name;
  r.read("label", spec.label);
  std::string mode = "practical";
  r.read("mode", mode);
  b.mode = parse_mode(mode, r.field("mode"));
  r.read("m", b.width);
  r.read("L", b.depth);
  r.read("nu", b.nu);
  r.read("lambda", b.lambda);
  r.read("retrain_every", b.retrain_every);
  r.read("gd_steps", b.gd_steps);
  r.read("gd_rate", b.gd_rate);
  r.read("warm_start", b.warm_start);
  if (const json* avg = r.child("average_loss")) {
    if (!avg->is_boolean()) throw ConfigError(r.field("average_loss") + ": expected a boolean");
    b.average_loss = avg->get<bool>();
  }
  r.read("kappa", b.kappa);
  r.read("R", b.R);
  r.read("S", b.S);
  r.read("C1", b.C1);
  r.read("C6", b.C6);
  r.read("C7", b.C7);
  r.read("delta", b.delta);
  r.read("clamp_lambda_to_lambda0", b.clamp_lambda_to_lambda0);
  std::string matrix = "diag";
  r.read("matrix_mode", matrix);
  b.matrix_mode = parse_matrix_mode(matrix, r.field("matrix_mode"));
  r.finish();
  try {
    b.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
  return spec;
}

}  // namespace

ExperimentConfig config_from_json(const json& doc) {
  ExperimentConfig cfg;
  FieldReader root(doc, "");

  if (const json* env = root.child("env")) {
    FieldReader r(*env, "env");
    std::string kind = "h1";
    r.read("kind", kind);
    cfg.env.kind = parse_env_kind(kind);
    r.read("d", cfg.env.dim);
    r.read("K", cfg.env.arms);
    r.read("T", cfg.env.horizon);
    r.read("dataset_path", cfg.env.dataset_path);
    r.finish();
  }

  if (const json* algos = root.child("algorithms")) {
    if (!algos->is_array()) throw ConfigError("algorithms: expected an array");
    for (std::size_t i = 0; i < algos->size(); ++i) {
      cfg.algorithms.push_back(
          parse_algorithm_spec((*algos)[i], "algorithms[" + std::to_string(i) + "]"));
    }
  }

  root.read("repeats", cfg.repeats);
  root.read("base_seed", cfg.base_seed);
  root.read("output", cfg.output);
  root.read("parallel", cfg.parallel);

  if (const json* sw = root.child("sweep")) {
    FieldReader r(*sw, "sweep");
    r.read("nu", cfg.sweep.nu);
    r.read("lambda", cfg.sweep.lambda);
    r.read("repeats", cfg.sweep.repeats);
    r.read("seed_offset", cfg.sweep.seed_offset);
    r.finish();
  }

  if (const json* bound = root.child("bound")) {
    FieldReader r(*bound, "bound");
    r.read("d", cfg.bound.dim);
    r.read("horizon", cfg.bound.horizon);
    r.read("lambda", cfg.bound.lambda);
    r.read("delta", cfg.bound.delta);
    r.read("M", cfg.bound.M);
    r.read("N", cfg.bound.N);
    r.read("theta_norm", cfg.bound.theta_norm);
    std::string contexts = "isotropic";
    r.read("contexts", contexts);
    cfg.bound.contexts = parse_context_mode(contexts, "bound.contexts");
    r.read("trials", cfg.bound_trials);
    r.finish();
  }
  root.finish();
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

json bandit_to_json(const BanditConfig& b) {
  json j;
  j["name"] = std::string(algorithm_name(b.algorithm));
  j["mode"] = b.mode == TrainMode::kTheory ? "theory" : "practical";
  j["m"] = b.width;
  j["L"] = b.depth;
  j["nu"] = b.nu;
  j["lambda"] = b.lambda;
  j["retrain_every"] = b.retrain_every;
  j["gd_steps"] = b.gd_steps;
  j["gd_rate"] = b.gd_rate;
  j["warm_start"] = b.warm_start;
  j["average_loss"] = b.average_loss ? json(*b.average_loss) : json(nullptr);
  j["kappa"] = b.kappa;
  j["R"] = b.R;
  j["S"] = b.S;
  j["C1"] = b.C1;
  j["C6"] = b.C6;
  j["C7"] = b.C7;
  j["delta"] = b.delta;
  j["clamp_lambda_to_lambda0"] = b.clamp_lambda_to_lambda0;
  j["matrix_mode"] = b.matrix_mode == MatrixMode::kFull ? "full" : "diag";
  return j;
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["env"] = {{"kind", std::string(env_kind_name(c.env.kind))},
              {"d", c.env.dim},
              {"K", c.env.arms},
              {"T", c.env.horizon},
              {"dataset_path", c.env.dataset_path}};
  j["algorithms"] = json::array();
  for (const auto& a : c.algorithms) {
    json aj = bandit_to_json(a.bandit);
    aj["label"] = a.label;
    j["algorithms"].push_back(aj);
  }
  j["repeats"] = c.repeats;
  j["base_seed"] = c.base_seed;
  j["output"] = c.output;
  j["parallel"] = c.parallel;
  j["sweep"] = {{"nu", c.sweep.nu},
                {"lambda", c.sweep.lambda},
                {"repeats", c.sweep.repeats},
                {"seed_offset", c.sweep.seed_offset}};
  j["bound"] = {{"d", c.bound.dim},
                {"horizon", c.bound.horizon},
                {"lambda", c.bound.lambda},
                {"delta", c.bound.delta},
                {"M", c.bound.M},
                {"N", c.bound.N},
                {"theta_norm", c.bound.theta_norm},
                {"contexts", context_mode_name(c.bound.contexts)},
                {"trials", c.bound_trials}};
  return j;
}

}  // namespace neurallog

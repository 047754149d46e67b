#include "aewb/config.hpp"

#include <set>

#include "aewb/errors.hpp"
#include "aewb/objectives.hpp"

namespace aewb {

namespace {

using nlohmann::json;

const std::set<std::string> kTopKeys = {"task", "seed", "dataset", "model", "objective", "train"};
const std::set<std::string> kDatasetKeys = {"openml_id", "path",   "synthetic",    "instances",
                                            "image_size", "target", "test_fraction"};
const std::set<std::string> kModelKeys = {"code_units", "hidden_units", "code_noise_sigma"};
const std::set<std::string> kObjectiveKeys = {"distance",     "penalty", "penalty_weight",
                                              "sparsity_target", "kl_weight", "noise",
                                              "noise_sigma",  "noise_p"};
const std::set<std::string> kTrainKeys = {"epochs",        "batch_size",        "optimizer",
                                          "learning_rate", "early_stop_delta", "early_stop_patience"};

void reject_unknown(const json& obj, const std::set<std::string>& known,
                    const std::string& prefix) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!known.count(it.key())) throw ConfigError("unknown key: " + prefix + it.key());
}

const json* section(const json& doc, const char* name) {
  auto it = doc.find(name);
  if (it == doc.end()) return nullptr;
  if (!it->is_object())
    throw ConfigError(std::string(name) + " must be an object");
  return &*it;
}

template <class T>
void read(const json& obj, const char* key, T& out) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("bad value for ") + key);
  }
}

void check_range(bool ok, const std::string& field, const std::string& what) {
  if (!ok) throw ConfigError("out of range: " + field + " " + what);
}

}  // namespace

const char* task_name(Task t) {
  switch (t) {
    case Task::Visualize: return "visualize";
    case Task::Denoise: return "denoise";
    case Task::Hash: return "hash";
    case Task::Detect: return "detect";
    case Task::Generate: return "generate";
  }
  return "visualize";
}

Task task_from_name(const std::string& s) {
  if (s == "visualize") return Task::Visualize;
  if (s == "denoise") return Task::Denoise;
  if (s == "hash") return Task::Hash;
  if (s == "detect") return Task::Detect;
  if (s == "generate") return Task::Generate;
  throw ConfigError("unknown task: " + s);
}

ExperimentConfig parse_config(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ConfigError("config root must be an object");
  reject_unknown(doc, kTopKeys, "");

  ExperimentConfig c;
  c.echo = doc;

  if (!doc.contains("task")) throw ConfigError("missing required key: task");
  if (!doc["task"].is_string()) throw ConfigError("bad value for task");
  c.task = task_from_name(doc["task"].get<std::string>());

  if (!doc.contains("seed")) throw ConfigError("missing required key: seed");
  if (!doc["seed"].is_number_unsigned()) throw ConfigError("seed must be a non-negative integer");
  c.seed = doc["seed"].get<uint64_t>();

  if (const json* d = section(doc, "dataset")) {
    reject_unknown(*d, kDatasetKeys, "dataset.");
    read(*d, "openml_id", c.dataset.openml_id);
    read(*d, "path", c.dataset.path);
    read(*d, "synthetic", c.dataset.synthetic);
    read(*d, "instances", c.dataset.instances);
    read(*d, "image_size", c.dataset.image_size);
    read(*d, "target", c.dataset.target);
    read(*d, "test_fraction", c.dataset.test_fraction);
    check_range(c.dataset.openml_id >= 0, "dataset.openml_id", "must be positive");
    check_range(c.dataset.instances >= 0, "dataset.instances", "must be positive");
    check_range(c.dataset.image_size >= 0, "dataset.image_size", "must be positive");
    check_range(c.dataset.test_fraction >= 0.0 && c.dataset.test_fraction < 1.0,
                "dataset.test_fraction", "must lie in [0,1)");
    if (!c.dataset.synthetic.empty()) {
      static const std::set<std::string> kSynth = {"manifold", "plane",  "shapes",
                                                   "faces",    "topics", "traffic"};
      if (!kSynth.count(c.dataset.synthetic))
        throw ConfigError("unknown synthetic dataset: " + c.dataset.synthetic);
    }
  }

  if (const json* m = section(doc, "model")) {
    reject_unknown(*m, kModelKeys, "model.");
    read(*m, "code_units", c.model.code_units);
    read(*m, "hidden_units", c.model.hidden_units);
    read(*m, "code_noise_sigma", c.model.code_noise_sigma);
    check_range(c.model.code_units >= 0, "model.code_units", "must be positive");
    check_range(c.model.hidden_units >= 0, "model.hidden_units", "must be positive");
    check_range(c.model.code_noise_sigma > 0.0, "model.code_noise_sigma", "must be positive");
  }

  if (const json* o = section(doc, "objective")) {
    reject_unknown(*o, kObjectiveKeys, "objective.");
    read(*o, "distance", c.objective.distance);
    read(*o, "penalty", c.objective.penalty);
    read(*o, "penalty_weight", c.objective.penalty_weight);
    read(*o, "sparsity_target", c.objective.sparsity_target);
    read(*o, "kl_weight", c.objective.kl_weight);
    read(*o, "noise", c.objective.noise);
    read(*o, "noise_sigma", c.objective.noise_sigma);
    read(*o, "noise_p", c.objective.noise_p);
    if (!c.objective.distance.empty()) distance_from_name(c.objective.distance);
    if (c.objective.penalty != "none") penalty_from_name(c.objective.penalty);
    if (c.objective.noise != "none") noise_from_name(c.objective.noise);
    check_range(c.objective.penalty_weight >= 0.0, "objective.penalty_weight",
                "must be non-negative");
    check_range(c.objective.sparsity_target > 0.0 && c.objective.sparsity_target < 1.0,
                "objective.sparsity_target", "must lie in (0,1)");
    check_range(c.objective.kl_weight >= 0.0, "objective.kl_weight", "must be non-negative");
    check_range(c.objective.noise_sigma > 0.0, "objective.noise_sigma", "must be positive");
    check_range(c.objective.noise_p >= 0.0 && c.objective.noise_p <= 1.0, "objective.noise_p",
                "must lie in [0,1]");
  }

  if (const json* t = section(doc, "train")) {
    reject_unknown(*t, kTrainKeys, "train.");
    read(*t, "epochs", c.train.epochs);
    read(*t, "batch_size", c.train.batch_size);
    read(*t, "optimizer", c.train.optimizer);
    read(*t, "learning_rate", c.train.learning_rate);
    read(*t, "early_stop_delta", c.train.early_stop_delta);
    read(*t, "early_stop_patience", c.train.early_stop_patience);
    if (t->contains("epochs"))
      check_range(c.train.epochs >= 1, "train.epochs", "must be at least 1");
    check_range(c.train.batch_size >= 1, "train.batch_size", "must be at least 1");
    if (c.train.optimizer != "adam" && c.train.optimizer != "sgd")
      throw ConfigError("unknown optimizer: " + c.train.optimizer);
    check_range(c.train.learning_rate >= 0.0, "train.learning_rate", "must be positive");
    check_range(c.train.early_stop_delta >= 0.0, "train.early_stop_delta",
                "must be non-negative");
    check_range(c.train.early_stop_patience >= 1, "train.early_stop_patience",
                "must be at least 1");
  }

  return c;
}

ExperimentConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  return parse_config(doc);
}

void apply_override(nlohmann::json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw ConfigError("override must look like key=value: " + assignment);
  std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);

  // Bare section-field names resolve into their unique section.
  if (key.find('.') == std::string::npos && !kTopKeys.count(key)) {
    std::string hit;
    auto probe = [&](const std::set<std::string>& keys, const char* sec) {
      if (keys.count(key)) hit = hit.empty() ? std::string(sec) : "?";
    };
    probe(kDatasetKeys, "dataset");
    probe(kModelKeys, "model");
    probe(kObjectiveKeys, "objective");
    probe(kTrainKeys, "train");
    if (hit.empty() || hit == "?") throw ConfigError("unknown key: " + key);
    key = hit + "." + key;
  }

  json value;
  try {
    value = json::parse(raw);
  } catch (const json::parse_error&) {
    value = raw;  // unquoted strings
  }

  json* node = &doc;
  size_t start = 0;
  for (size_t dot = key.find('.'); dot != std::string::npos; dot = key.find('.', start)) {
    const std::string part = key.substr(start, dot - start);
    if (!node->contains(part) || !(*node)[part].is_object()) (*node)[part] = json::object();
    node = &(*node)[part];
    start = dot + 1;
  }
  (*node)[key.substr(start)] = value;
}

}  // namespace aewb

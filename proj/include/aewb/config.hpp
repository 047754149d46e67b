#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace aewb {

enum class Task : uint8_t { Visualize, Denoise, Hash, Detect, Generate };

const char* task_name(Task t);
Task task_from_name(const std::string& s);

// Zero values mean "unset, use the task default"; the pipelines resolve
// them. Fields a user sets explicitly are range-checked at parse time.
struct DatasetConfig {
  int openml_id = 0;        // > 0: fetch this OpenML dataset
  std::string path;         // local .csv or .arff
  std::string synthetic;    // bundled generator name; empty = task default
  int instances = 0;        // synthetic row / image count
  int image_size = 0;       // synthetic image side length
  std::string target;       // target column name; empty = task default
  double test_fraction = 0.3;
};

struct ModelConfig {
  int code_units = 0;             // code layer width
  int hidden_units = 0;           // dense hidden width; 0 = derived
  double code_noise_sigma = 0.2;  // hash task code-layer noise
};

struct ObjectiveConfig {
  std::string distance;           // "mse" | "bce"; empty = task default
  std::string penalty = "none";   // "none" | penalty kind name
  double penalty_weight = 1e-3;
  double sparsity_target = 0.05;
  double kl_weight = 0.0;         // variational KL weight; 0 = 1/input_dim
  std::string noise = "none";     // "none" | corruption kind name
  double noise_sigma = 0.1;
  double noise_p = 0.1;
};

struct TrainConfig {
  int epochs = 0;  // 0 = task default
  int batch_size = 32;
  std::string optimizer = "adam";  // "adam" | "sgd"
  double learning_rate = 0.0;      // 0 = optimizer default
  double early_stop_delta = 1e-6;
  int early_stop_patience = 10;
};

struct ExperimentConfig {
  Task task = Task::Visualize;
  uint64_t seed = 0;
  DatasetConfig dataset;
  ModelConfig model;
  ObjectiveConfig objective;
  TrainConfig train;
  nlohmann::json echo;  // the parsed document, for report echoing
};

// Parses and validates a config document. Unknown keys are rejected with
// their dotted path; out-of-range values name the field. The seed is
// mandatory.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig parse_config_text(const std::string& text);

// Applies one "key=value" override onto the document before parsing.
// Dotted keys address nested objects; a bare key that belongs to exactly
// one section (e.g. "epochs") is resolved into it. Values are parsed as
// JSON scalars, falling back to strings.
void apply_override(nlohmann::json& doc, const std::string& assignment);

}  // namespace aewb

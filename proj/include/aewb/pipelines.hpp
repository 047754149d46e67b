#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "aewb/config.hpp"
#include "aewb/layers.hpp"
#include "aewb/objectives.hpp"
#include "aewb/openml.hpp"
#include "aewb/tensor.hpp"

namespace aewb {

// Hidden layer width that keeps the encoder compression ratio constant
// across its two stages: round(sqrt(n*k)), half up. Requires n > k >= 1.
int hidden_width(int n, int k);

// Binary-reflected Gray code of rank i.
uint64_t gray_code(uint64_t i);

struct Report {
  std::string task;
  nlohmann::json config_echo;
  nlohmann::json metrics = nlohmann::json::object();
  std::vector<std::string> artifacts;  // files written, relative to the out dir
  uint64_t seed = 0;
  double duration_seconds = 0.0;
};

// report.json bytes: sorted keys, duration floored to whole seconds.
std::string report_json(const Report& r);
void write_report(const Report& r, const std::string& out_dir);

struct RunContext {
  std::string out_dir = ".";
  std::string cache_dir = "aewb_cache";
  Transport* transport = nullptr;  // null: live HTTP when a fetch is needed
  bool emit_artifacts = true;      // false: model files only
  bool verbose = false;
};

struct TrainResult {
  int epochs_run = 0;
  double final_loss = 0.0;
};

// Shared mini-batch loop: seeded shuffle each epoch, Adam or SGD, stop
// early once the best epoch loss has not improved by early_stop_delta for
// early_stop_patience consecutive epochs. tc.epochs must be resolved.
TrainResult train_network(Network& net, const Tensor& X, const ObjectiveSpec& spec,
                          const TrainConfig& tc, uint64_t seed, bool verbose = false);

Report run_visualize(const ExperimentConfig& cfg, const RunContext& ctx);
Report run_denoise(const ExperimentConfig& cfg, const RunContext& ctx);
Report run_hash(const ExperimentConfig& cfg, const RunContext& ctx);
Report run_detect(const ExperimentConfig& cfg, const RunContext& ctx);
Report run_generate(const ExperimentConfig& cfg, const RunContext& ctx);

// Dispatches on cfg.task and fills duration_seconds. Artifacts are written
// into ctx.out_dir; report.json itself is left to the caller.
Report run_pipeline(const ExperimentConfig& cfg, const RunContext& ctx);

// Reloads the model saved in ctx.out_dir and recomputes reconstruction
// metrics on the configured dataset without training.
Report run_evaluate(const ExperimentConfig& cfg, const RunContext& ctx);

}  // namespace aewb

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "aewb/autodiff.hpp"
#include "aewb/config.hpp"
#include "aewb/errors.hpp"
#include "aewb/openml.hpp"
#include "aewb/pipelines.hpp"

namespace {

using aewb::ConfigError;
using nlohmann::json;

struct Options {
  std::string config_path;
  std::string out_dir = "out";
  std::string cache_dir;
  std::vector<std::string> sets;
  int64_t seed = -1;
  bool verbose = false;
};

std::string resolve_cache(const std::string& flag) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("AEWB_CACHE"); env != nullptr && *env != '\0') return env;
  return "aewb_cache";
}

json load_config_json(const Options& opt) {
  std::ifstream in(opt.config_path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + opt.config_path);
  const std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  for (const auto& kv : opt.sets) aewb::apply_override(doc, kv);
  if (opt.seed >= 0) aewb::apply_override(doc, "seed=" + std::to_string(opt.seed));
  return doc;
}

aewb::RunContext make_context(const Options& opt, bool emit_artifacts) {
  aewb::RunContext ctx;
  ctx.out_dir = opt.out_dir;
  ctx.cache_dir = resolve_cache(opt.cache_dir);
  ctx.emit_artifacts = emit_artifacts;
  ctx.verbose = opt.verbose;
  return ctx;
}

int cmd_fetch_data(const Options& opt) {
  const json doc = load_config_json(opt);
  int id = 0;
  if (doc.contains("dataset") && doc["dataset"].is_object() &&
      doc["dataset"].contains("openml_id") && doc["dataset"]["openml_id"].is_number_integer())
    id = doc["dataset"]["openml_id"].get<int>();
  if (id <= 0) throw ConfigError("fetch-data needs dataset.openml_id");
  const std::string cache = resolve_cache(opt.cache_dir);
  auto transport = aewb::make_http_transport();
  aewb::fetch_openml(id, cache, *transport);
  std::cout << aewb::openml_cache_path(cache, id) << "\n";
  return 0;
}

int cmd_run(const Options& opt, bool emit_artifacts) {
  const aewb::ExperimentConfig cfg = aewb::parse_config(load_config_json(opt));
  const aewb::RunContext ctx = make_context(opt, emit_artifacts);
  const aewb::Report report = aewb::run_pipeline(cfg, ctx);
  aewb::write_report(report, ctx.out_dir);
  std::cout << (std::filesystem::path(ctx.out_dir) / "report.json").string() << "\n";
  return 0;
}

int cmd_evaluate(const Options& opt) {
  const aewb::ExperimentConfig cfg = aewb::parse_config(load_config_json(opt));
  const aewb::RunContext ctx = make_context(opt, false);
  const aewb::Report report = aewb::run_evaluate(cfg, ctx);
  const auto path = std::filesystem::path(ctx.out_dir) / "evaluation.json";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << aewb::report_json(report);
  if (!out) throw aewb::IoError("cannot write " + path.string());
  std::cout << path.string() << "\n";
  return 0;
}

int cmd_list_tasks() {
  for (aewb::Task t : {aewb::Task::Visualize, aewb::Task::Denoise, aewb::Task::Hash,
                       aewb::Task::Detect, aewb::Task::Generate})
    std::cout << aewb::task_name(t) << "\n";
  return 0;
}

int fail(const std::string& message, const std::string& code, int exit_code) {
  std::cerr << "error: " << message << "\n";
  std::cerr << "error_code: " << code << "\n";
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"autoencoder workbench"};
  app.require_subcommand(1);

  Options opt;
  auto add_common = [&](CLI::App* sub, bool config_required) {
    CLI::Option* c = sub->add_option("--config", opt.config_path, "experiment config (JSON)");
    if (config_required) c->required();
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_option("--set", opt.sets, "config override key=value (repeatable)");
    sub->add_option("--seed", opt.seed, "override the experiment seed");
    sub->add_option("--cache", opt.cache_dir, "dataset cache directory");
    sub->add_flag("-v,--verbose", opt.verbose, "log training progress");
  };

  CLI::App* fetch = app.add_subcommand("fetch-data", "download a dataset into the cache");
  add_common(fetch, true);
  CLI::App* train = app.add_subcommand("train", "train a model; write model and report only");
  add_common(train, true);
  CLI::App* evaluate = app.add_subcommand("evaluate", "re-score a trained model from --out");
  add_common(evaluate, true);
  CLI::App* run = app.add_subcommand("run", "train and emit all report artifacts");
  add_common(run, true);
  app.add_subcommand("list-tasks", "list the available task names");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    std::cerr << "error_code: usage\n";
    return 2;
  }

  try {
    if (fetch->parsed()) return cmd_fetch_data(opt);
    if (train->parsed()) return cmd_run(opt, false);
    if (evaluate->parsed()) return cmd_evaluate(opt);
    if (run->parsed()) return cmd_run(opt, true);
    return cmd_list_tasks();
  } catch (const ConfigError& e) {
    return fail(e.what(), "config", 2);
  } catch (const aewb::ParseError& e) {
    return fail(e.what(), "parse", 1);
  } catch (const aewb::FetchError& e) {
    return fail(e.what(), "network", 1);
  } catch (const aewb::IoError& e) {
    return fail(e.what(), "io", 1);
  } catch (const aewb::UndefinedMetricError& e) {
    return fail(e.what(), "metric", 1);
  } catch (const aewb::ContractError& e) {
    return fail(e.what(), "contract", 1);
  } catch (const std::exception& e) {
    return fail(e.what(), "internal", 1);
  }
}

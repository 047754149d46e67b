#include "aewb/pipelines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <numeric>

#include "aewb/data.hpp"
#include "aewb/errors.hpp"
#include "aewb/image_io.hpp"
#include "aewb/metrics.hpp"
#include "aewb/optim.hpp"
#include "aewb/pca.hpp"
#include "aewb/svg.hpp"
#include "aewb/synth.hpp"

namespace aewb {

namespace {

using nlohmann::json;

// Seed sub-streams, so each stochastic stage draws independently of the
// others: +0 data generation, +1 split, +2 weight init, +3 training,
// +4 evaluation-time corruption, +5 prior draws.
constexpr uint64_t kSplitSeed = 1, kInitSeed = 2, kTrainSeed = 3, kNoiseSeed = 4, kDrawSeed = 5;

std::string join_path(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

void write_text(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("cannot write " + path);
}

// Gathers rows (axis 0) of X in the order given.
Tensor take_rows(const Tensor& X, const std::vector<int>& rows) {
  Shape s = X.shape();
  s[0] = static_cast<int>(rows.size());
  Tensor out(s);
  const int64_t n = X.dim(0) > 0 ? X.size() / X.dim(0) : 0;
  for (size_t i = 0; i < rows.size(); ++i)
    std::copy(X.data() + rows[i] * n, X.data() + (rows[i] + 1) * n,
              out.data() + static_cast<int64_t>(i) * n);
  return out;
}

Tensor image_at(const Tensor& batch, int b) {
  Shape s(batch.shape().begin() + 1, batch.shape().end());
  Tensor out(s);
  const int64_t n = out.size();
  std::copy(batch.data() + b * n, batch.data() + (b + 1) * n, out.data());
  return out;
}

Tensor forward_batched(const Network& net, const Tensor& X, int chunk = 64) {
  const int B = X.dim(0);
  Tensor out;
  for (int start = 0; start < B; start += chunk) {
    std::vector<int> rows;
    for (int i = start; i < std::min(B, start + chunk); ++i) rows.push_back(i);
    Tensor o = net.forward_values(take_rows(X, rows));
    if (start == 0) {
      Shape s = o.shape();
      s[0] = B;
      out = Tensor(s);
    }
    const int64_t n = o.size() / o.dim(0);
    std::copy(o.data(), o.data() + o.size(), out.data() + start * n);
  }
  return out;
}

double vec_mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double vec_sample_std(const std::vector<double>& v, double m) {
  if (v.size() < 2) return 0.0;
  double s = 0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

Dataset numeric_table(std::vector<std::string> names, Tensor X) {
  Dataset ds;
  for (auto& n : names) {
    Column c;
    c.name = std::move(n);
    ds.columns.push_back(std::move(c));
  }
  ds.X = std::move(X);
  return ds;
}

const char* default_synth(Task t) {
  switch (t) {
    case Task::Visualize: return "manifold";
    case Task::Denoise: return "shapes";
    case Task::Hash: return "topics";
    case Task::Detect: return "traffic";
    case Task::Generate: return "faces";
  }
  return "manifold";
}

Dataset load_tabular(const ExperimentConfig& cfg, const RunContext& ctx) {
  const DatasetConfig& d = cfg.dataset;
  if (d.openml_id > 0) {
    std::unique_ptr<Transport> fallback;
    Transport* tr = ctx.transport;
    if (tr == nullptr) {
      fallback = make_http_transport();
      tr = fallback.get();
    }
    return parse_arff(fetch_openml(d.openml_id, ctx.cache_dir, *tr));
  }
  if (!d.path.empty()) {
    const std::string bytes = read_file(d.path);
    if (d.path.ends_with(".arff")) return parse_arff(bytes);
    return parse_csv(bytes, true, ',');
  }
  const std::string name = d.synthetic.empty() ? default_synth(cfg.task) : d.synthetic;
  const int inst = d.instances;
  if (name == "manifold") return synth_manifold(inst > 0 ? inst : 2000, cfg.seed);
  if (name == "plane") return synth_plane(inst > 0 ? inst : 1000, 5, cfg.seed);
  if (name == "topics") return synth_topics(inst > 0 ? inst : 2000, 200, 4, cfg.seed);
  if (name == "traffic") {
    const int total = inst > 0 ? inst : 2000;
    const int test_n = static_cast<int>(std::llround(cfg.dataset.test_fraction * total));
    return synth_traffic(total - test_n, test_n, 0.05, cfg.seed);
  }
  throw ConfigError("task " + std::string(task_name(cfg.task)) +
                    " cannot use synthetic dataset '" + name + "'");
}

ImageSet load_images(const ExperimentConfig& cfg, const RunContext& ctx) {
  (void)ctx;
  const DatasetConfig& d = cfg.dataset;
  if (d.openml_id > 0 || !d.path.empty())
    throw ConfigError("image tasks load bundled synthetic corpora; set dataset.synthetic");
  const std::string name = d.synthetic.empty() ? default_synth(cfg.task) : d.synthetic;
  if (name == "shapes") {
    const int count = d.instances > 0 ? d.instances : 500;
    const int size = d.image_size > 0 ? d.image_size : 28;
    return synth_shapes(count, size, cfg.seed);
  }
  if (name == "faces") {
    const int count = d.instances > 0 ? d.instances : 200;
    const int size = d.image_size > 0 ? d.image_size : 32;
    return synth_faces(count, size, cfg.seed);
  }
  throw ConfigError("task " + std::string(task_name(cfg.task)) +
                    " cannot use synthetic dataset '" + name + "'");
}

struct TabularPrep {
  Dataset ds;
  std::vector<double> target;
  bool has_target = false;
};

// Shared tabular preparation: split, target extraction, dummy expansion,
// imputation, scaling. The hash task keeps raw binary features (scaling a
// constant-one column would zero it) and takes a target only when one is
// named or the trailing column is nominal.
TabularPrep prep_tabular(const ExperimentConfig& cfg, const RunContext& ctx) {
  TabularPrep p;
  p.ds = load_tabular(cfg, ctx);
  if (p.ds.rows() < 2) throw ContractError("dataset needs at least two rows");
  if (p.ds.split.empty()) split_dataset(p.ds, cfg.dataset.test_fraction, cfg.seed + kSplitSeed);

  bool want_target = true;
  if (cfg.task == Task::Hash)
    want_target = !cfg.dataset.target.empty() || p.ds.columns.back().kind == ColKind::Nominal;
  if (want_target) {
    const std::string name =
        cfg.dataset.target.empty() ? p.ds.columns.back().name : cfg.dataset.target;
    p.target = extract_target(p.ds, name);
    p.has_target = true;
  }

  p.ds = dummy_encode(p.ds);
  impute_missing(p.ds);
  if (cfg.task == Task::Hash) {
    for (int b = 0; b < p.ds.rows(); ++b)
      for (int j = 0; j < p.ds.cols(); ++j) {
        const double v = p.ds.X.at(b, j);
        if (v != 0.0 && v != 1.0) throw ContractError("hash task needs binary features");
      }
  } else {
    minmax_scale(p.ds);
  }
  return p;
}

Distance resolve_distance(const ExperimentConfig& cfg, Distance task_default) {
  return cfg.objective.distance.empty() ? task_default
                                        : distance_from_name(cfg.objective.distance);
}

TrainConfig resolve_train(const ExperimentConfig& cfg, int default_epochs) {
  TrainConfig tc = cfg.train;
  if (tc.epochs == 0) tc.epochs = default_epochs;
  if (tc.learning_rate == 0.0) tc.learning_rate = tc.optimizer == "sgd" ? 1e-2 : 1e-3;
  return tc;
}

void add_penalty_from_config(const ExperimentConfig& cfg, ObjectiveSpec& spec) {
  if (cfg.objective.penalty == "none") return;
  Penalty p;
  p.kind = penalty_from_name(cfg.objective.penalty);
  p.weight = cfg.objective.penalty_weight;
  p.rho = cfg.objective.sparsity_target;
  spec.penalties.push_back(p);
}

void save_model_artifacts(const Network& net, const RunContext& ctx, Report& r) {
  save_model(net, join_path(ctx.out_dir, "model.bin"), join_path(ctx.out_dir, "model.json"));
  r.artifacts.push_back("model.bin");
  r.artifacts.push_back("model.json");
}

void emit_csv(const Dataset& table, const std::string& name, const RunContext& ctx, Report& r) {
  write_text(join_path(ctx.out_dir, name), write_csv(table, ','));
  r.artifacts.push_back(name);
}

Report base_report(const ExperimentConfig& cfg) {
  Report r;
  r.task = task_name(cfg.task);
  r.config_echo = cfg.echo.is_null() ? json::object() : cfg.echo;
  r.seed = cfg.seed;
  return r;
}

double net_mse(const Network& net, const Tensor& X) {
  return vec_mean(reconstruction_errors(net, X));
}

// Mean squared pixel error in 0..255 units, per image.
double err255(const Tensor& batch_a, const Tensor& batch_b, int b, int64_t n) {
  double s = 0;
  for (int64_t j = 0; j < n; ++j) {
    const double d = 255.0 * (batch_a[b * n + j] - batch_b[b * n + j]);
    s += d * d;
  }
  return s / static_cast<double>(n);
}

}  // namespace

int hidden_width(int n, int k) {
  if (k < 1 || n <= k) throw ContractError("hidden_width needs n > k >= 1");
  return static_cast<int>(std::floor(std::sqrt(static_cast<double>(n) * k) + 0.5));
}

uint64_t gray_code(uint64_t i) { return i ^ (i >> 1); }

std::string report_json(const Report& r) {
  json j;
  j["task"] = r.task;
  j["config_echo"] = r.config_echo.is_null() ? json::object() : r.config_echo;
  j["metrics"] = r.metrics;
  j["artifacts"] = r.artifacts;
  j["seed"] = r.seed;
  j["duration_seconds"] = static_cast<int64_t>(std::floor(r.duration_seconds));
  return j.dump(2) + "\n";
}

void write_report(const Report& r, const std::string& out_dir) {
  write_text(join_path(out_dir, "report.json"), report_json(r));
}

TrainResult train_network(Network& net, const Tensor& X, const ObjectiveSpec& spec,
                          const TrainConfig& tc, uint64_t seed, bool verbose) {
  if (tc.epochs < 1) throw ContractError("epochs must be at least 1");
  const int B = X.dim(0);
  if (B < 1) throw ContractError("training needs at least one instance");
  const int64_t n = X.size() / B;

  net.set_mode(Mode::Train);
  Rng rng(seed);
  Adam adam;
  Sgd sgd;
  const bool use_adam = tc.optimizer != "sgd";
  adam.lr = tc.learning_rate;
  sgd.lr = tc.learning_rate;

  std::vector<int> order(static_cast<size_t>(B));
  std::iota(order.begin(), order.end(), 0);

  TrainResult res;
  double best = std::numeric_limits<double>::infinity();
  int stale = 0;
  for (int epoch = 0; epoch < tc.epochs; ++epoch) {
    rng.shuffle(order);
    double total = 0;
    for (int start = 0; start < B; start += tc.batch_size) {
      const int nb = std::min(tc.batch_size, B - start);
      Shape bs = X.shape();
      bs[0] = nb;
      Tensor xb(bs);
      for (int i = 0; i < nb; ++i)
        std::copy(X.data() + order[static_cast<size_t>(start + i)] * n,
                  X.data() + (order[static_cast<size_t>(start + i)] + 1) * n,
                  xb.data() + static_cast<int64_t>(i) * n);
      Tape tape;
      Val loss = total_objective(tape, net, xb, spec, &rng);
      GradientMap grads = tape.backward(loss);
      if (use_adam)
        adam.step(net.params(), grads);
      else
        sgd.step(net.params(), grads);
      total += loss.value()[0] * nb;
    }
    total /= B;
    res.epochs_run = epoch + 1;
    res.final_loss = total;
    if (verbose) std::fprintf(stderr, "epoch %d loss %.8f\n", epoch + 1, total);
    if (total < best - tc.early_stop_delta) {
      best = total;
      stale = 0;
    } else if (++stale >= tc.early_stop_patience) {
      break;
    }
  }
  net.set_mode(Mode::Eval);
  return res;
}

Report run_visualize(const ExperimentConfig& cfg, const RunContext& ctx) {
  TabularPrep p = prep_tabular(cfg, ctx);
  if (!p.has_target) throw ContractError("visualize needs a target column");
  const Tensor Xtr = p.ds.train_matrix();
  const Tensor Xte = p.ds.test_matrix();
  const int n = p.ds.cols();
  if (n <= 2) throw ContractError("visualize needs more than 2 features");
  const int k = cfg.model.code_units > 0 ? cfg.model.code_units : 2;
  const int h = cfg.model.hidden_units > 0 ? cfg.model.hidden_units : hidden_width(n, k);

  const PCAModel pca = pca_fit(Xtr, k);

  const std::vector<LayerSpec> arch = {
      LayerSpec::dense(h, Act::Sigmoid), LayerSpec::dense(k, Act::Sigmoid),
      LayerSpec::dense(h, Act::Sigmoid), LayerSpec::dense(n, Act::Sigmoid)};
  Rng init_a(cfg.seed + kInitSeed), init_b(cfg.seed + kInitSeed);
  Network basic({n}, arch, 2, init_a);       // same init as the contractive
  Network contractive({n}, arch, 2, init_b); // net: only the penalty differs

  ObjectiveSpec basic_spec;
  basic_spec.distance = resolve_distance(cfg, Distance::Mse);
  ObjectiveSpec contr_spec = basic_spec;
  Penalty pen;
  pen.kind = PenaltyKind::Contractive;
  pen.weight = cfg.objective.penalty_weight;
  contr_spec.penalties.push_back(pen);

  const TrainConfig tc = resolve_train(cfg, 100);
  const TrainResult rb = train_network(basic, Xtr, basic_spec, tc, cfg.seed + kTrainSeed,
                                       ctx.verbose);
  const TrainResult rc = train_network(contractive, Xtr, contr_spec, tc, cfg.seed + kTrainSeed,
                                       ctx.verbose);

  Report r = base_report(cfg);
  r.metrics["mse"] = {
      {"pca", {{"train", pca_reconstruction_mse(pca, Xtr)}, {"test", pca_reconstruction_mse(pca, Xte)}}},
      {"basic", {{"train", net_mse(basic, Xtr)}, {"test", net_mse(basic, Xte)}}},
      {"contractive",
       {{"train", net_mse(contractive, Xtr)}, {"test", net_mse(contractive, Xte)}}}};
  r.metrics["epochs_run"] = {{"basic", rb.epochs_run}, {"contractive", rc.epochs_run}};
  r.metrics["final_loss"] = {{"basic", rb.final_loss}, {"contractive", rc.final_loss}};
  r.metrics["hidden_units"] = h;
  r.metrics["code_units"] = k;

  if (ctx.emit_artifacts) {
    const Tensor codes = contractive.encode_values(Xte);
    const std::vector<int> te = p.ds.test_rows();
    Tensor emb({static_cast<int>(te.size()), 3});
    std::vector<PlotPoint> pts;
    for (size_t i = 0; i < te.size(); ++i) {
      const double x = codes.at(static_cast<int>(i), 0);
      const double y = k >= 2 ? codes.at(static_cast<int>(i), 1) : 0.0;
      const double t = p.target[static_cast<size_t>(te[i])];
      emb.at(static_cast<int>(i), 0) = x;
      emb.at(static_cast<int>(i), 1) = y;
      emb.at(static_cast<int>(i), 2) = t;
      pts.push_back({x, y, t});
    }
    emit_csv(numeric_table({"x", "y", "target"}, std::move(emb)), "embedding.csv", ctx, r);
    write_text(join_path(ctx.out_dir, "embedding.svg"), svg_scatter(pts));
    r.artifacts.push_back("embedding.svg");
  }
  save_model_artifacts(contractive, ctx, r);
  return r;
}

Report run_denoise(const ExperimentConfig& cfg, const RunContext& ctx) {
  const ImageSet imgs = load_images(cfg, ctx);
  const int B = imgs.count();
  if (B < 2) throw ContractError("denoise needs at least two images");
  const int H = imgs.height(), W = imgs.width(), C = imgs.channels();
  if (H % 2 != 0 || W % 2 != 0)
    throw ConfigError("denoise needs even image dimensions for the pooling stage");

  Dataset split_holder;  // reuse the seeded split rule on image indices
  split_holder.columns.push_back(Column{});
  split_holder.X = Tensor({B, 1});
  split_dataset(split_holder, cfg.dataset.test_fraction, cfg.seed + kSplitSeed);
  const Tensor Xtr = take_rows(imgs.images, split_holder.train_rows());
  const Tensor Xte = take_rows(imgs.images, split_holder.test_rows());
  if (Xtr.dim(0) < 1 || Xte.dim(0) < 1) throw ContractError("empty train or test image split");

  const std::vector<LayerSpec> arch = {
      LayerSpec::conv(5, 5, 16, 1, Act::Relu), LayerSpec::conv(1, 1, 32, 1, Act::Relu),
      LayerSpec::maxpool(),                    LayerSpec::deconv(5, 5, 16, 1, Act::Relu),
      LayerSpec::upsample(),                   LayerSpec::deconv(3, 3, C, 1, Act::Sigmoid)};
  Rng init_a(cfg.seed + kInitSeed), init_b(cfg.seed + kInitSeed);
  Network denoising({H, W, C}, arch, 3, init_a);
  Network basic({H, W, C}, arch, 3, init_b);

  NoiseSpec noise;
  noise.kind = cfg.objective.noise == "none" ? NoiseKind::ZeroMask
                                             : noise_from_name(cfg.objective.noise);
  noise.sigma = cfg.objective.noise_sigma;
  noise.p = cfg.objective.noise_p;

  ObjectiveSpec den_spec;
  den_spec.distance = resolve_distance(cfg, Distance::Mse);
  den_spec.corruption = noise;
  ObjectiveSpec basic_spec = den_spec;
  basic_spec.corruption.reset();  // the comparator trains clean-to-clean

  const TrainConfig tc = resolve_train(cfg, 10);
  const TrainResult rd = train_network(denoising, Xtr, den_spec, tc, cfg.seed + kTrainSeed,
                                       ctx.verbose);
  const TrainResult rb = train_network(basic, Xtr, basic_spec, tc, cfg.seed + kTrainSeed,
                                       ctx.verbose);

  // One shared corrupted test set; both nets denoise the same images.
  Rng noise_rng(cfg.seed + kNoiseSeed);
  const Tensor noisy = corrupt(Xte, noise, noise_rng, Mode::Train);
  const Tensor out_d = forward_batched(denoising, noisy);
  const Tensor out_b = forward_batched(basic, noisy);

  const int Bte = Xte.dim(0);
  const int64_t n = Xte.size() / Bte;
  std::vector<double> e_noisy, e_d, e_b, red_d, red_b;
  int degenerate = 0;
  for (int b = 0; b < Bte; ++b) {
    const double en = err255(noisy, Xte, b, n);
    const double ed = err255(out_d, Xte, b, n);
    const double eb = err255(out_b, Xte, b, n);
    e_noisy.push_back(en);
    e_d.push_back(ed);
    e_b.push_back(eb);
    if (en > 0) {  // reduction is undefined on an image the noise missed
      red_d.push_back(100.0 * (1.0 - ed / en));
      red_b.push_back(100.0 * (1.0 - eb / en));
    } else {
      ++degenerate;
    }
  }
  const double mrd = vec_mean(red_d), mrb = vec_mean(red_b);

  Report r = base_report(cfg);
  r.metrics["noise_reduction_percent"] = {
      {"reference", {{"mean", 100.0}, {"std", 0.0}}},
      {"noisy", {{"mean", 0.0}, {"std", 0.0}}},
      {"basic", {{"mean", mrb}, {"std", vec_sample_std(red_b, mrb)}}},
      {"denoising", {{"mean", mrd}, {"std", vec_sample_std(red_d, mrd)}}}};
  r.metrics["mse_0_255"] = {{"reference", 0.0},
                            {"noisy", vec_mean(e_noisy)},
                            {"basic", vec_mean(e_b)},
                            {"denoising", vec_mean(e_d)}};
  r.metrics["degenerate_noisy_images"] = degenerate;
  r.metrics["epochs_run"] = {{"basic", rb.epochs_run}, {"denoising", rd.epochs_run}};
  r.metrics["final_loss"] = {{"basic", rb.final_loss}, {"denoising", rd.final_loss}};

  if (ctx.emit_artifacts) {
    const int m = std::min(8, Bte);
    std::vector<Tensor> sc, sn, sd;
    for (int b = 0; b < m; ++b) {
      sc.push_back(image_at(Xte, b));
      sn.push_back(image_at(noisy, b));
      sd.push_back(image_at(out_d, b));
    }
    const char* ext = C == 1 ? ".pgm" : ".ppm";
    for (const auto& [strip, stem] :
         {std::pair{&sc, "clean"}, std::pair{&sn, "noisy"}, std::pair{&sd, "denoised"}}) {
      const std::string name = std::string(stem) + ext;
      write_image_file(image_strip(*strip), join_path(ctx.out_dir, name), true);
      r.artifacts.push_back(name);
    }
  }
  save_model_artifacts(denoising, ctx, r);
  return r;
}

Report run_hash(const ExperimentConfig& cfg, const RunContext& ctx) {
  TabularPrep p = prep_tabular(cfg, ctx);
  const Tensor Xtr = p.ds.train_matrix();
  const Tensor Xte = p.ds.test_matrix();
  const int n = p.ds.cols();
  const int k = cfg.model.code_units > 0 ? cfg.model.code_units : 7;
  if (k > 24) throw ConfigError("hash code length above 24 bits is not enumerable");
  const int h = cfg.model.hidden_units > 0 ? cfg.model.hidden_units : 512;

  const std::vector<LayerSpec> arch = {
      LayerSpec::dense(h, Act::Sigmoid), LayerSpec::dense(k, Act::Sigmoid),
      LayerSpec::gaussian_noise(cfg.model.code_noise_sigma), LayerSpec::dense(h, Act::Sigmoid),
      LayerSpec::dense(n, Act::Sigmoid)};
  Rng init(cfg.seed + kInitSeed);
  Network net({n}, arch, 2, init);

  ObjectiveSpec spec;
  spec.distance = resolve_distance(cfg, Distance::Bce);
  add_penalty_from_config(cfg, spec);

  const TrainConfig tc = resolve_train(cfg, 100);
  const TrainResult tr = train_network(net, Xtr, spec, tc, cfg.seed + kTrainSeed, ctx.verbose);

  // Binary hashes of the test split: bit j is 1 when code_j >= 0.5.
  const Tensor codes = net.encode_values(Xte);
  const int Bte = Xte.dim(0);
  std::vector<std::string> hashes(static_cast<size_t>(Bte));
  std::map<std::string, std::vector<int>> clusters;
  for (int b = 0; b < Bte; ++b) {
    std::string hs(static_cast<size_t>(k), '0');
    for (int j = 0; j < k; ++j)
      if (codes.at(b, j) >= 0.5) hs[static_cast<size_t>(j)] = '1';
    hashes[static_cast<size_t>(b)] = hs;
    clusters[hs].push_back(b);
  }

  auto row_vec = [&](int b) {
    std::vector<double> v(static_cast<size_t>(n));
    for (int j = 0; j < n; ++j) v[static_cast<size_t>(j)] = Xte.at(b, j);
    return v;
  };

  // Mean cosine distance per Hamming bucket. Bucket 0 takes each cluster's
  // internal pair mean once; bucket d >= 1 takes each unordered cluster
  // pair once. Zero-feature documents make cosine undefined; such pairs
  // are skipped and counted.
  std::map<int, std::pair<double, int>> buckets;
  int skipped_pairs = 0;
  for (auto a = clusters.begin(); a != clusters.end(); ++a) {
    if (a->second.size() >= 2) {
      double sum = 0;
      int cnt = 0;
      for (size_t i = 0; i < a->second.size(); ++i)
        for (size_t j = i + 1; j < a->second.size(); ++j) {
          try {
            sum += cosine_distance(row_vec(a->second[i]), row_vec(a->second[j]));
            ++cnt;
          } catch (const UndefinedMetricError&) {
            ++skipped_pairs;
          }
        }
      if (cnt > 0) {
        buckets[0].first += sum / cnt;
        buckets[0].second += 1;
      }
    }
    for (auto b = std::next(a); b != clusters.end(); ++b) {
      const int d = hamming(a->first, b->first);
      try {
        const double dist =
            intercluster_distance(take_rows(Xte, a->second), take_rows(Xte, b->second));
        buckets[d].first += dist;
        buckets[d].second += 1;
      } catch (const UndefinedMetricError&) {
        ++skipped_pairs;
      }
    }
  }

  std::vector<std::string> vocab;
  for (const auto& c : p.ds.columns) vocab.push_back(c.name);

  Report r = base_report(cfg);
  json jclusters = json::array();
  for (uint64_t i = 0; i < (uint64_t{1} << k); ++i) {
    const uint64_t g = gray_code(i);
    std::string hs(static_cast<size_t>(k), '0');
    for (int j = 0; j < k; ++j)
      if (g >> (k - 1 - j) & 1) hs[static_cast<size_t>(j)] = '1';
    auto it = clusters.find(hs);
    if (it == clusters.end()) continue;
    json jc;
    jc["hash"] = hs;
    jc["size"] = it->second.size();
    json terms = json::array();
    for (const auto& ts : tfidf_rank(take_rows(Xte, it->second), Xte, vocab, 6))
      terms.push_back(ts.term);
    jc["top_terms"] = terms;
    jclusters.push_back(jc);
  }
  r.metrics["clusters"] = jclusters;

  json jbuckets = json::array();
  Tensor bt({static_cast<int>(buckets.size()), 3});
  int bi = 0;
  for (const auto& [d, sc] : buckets) {
    const double mean = sc.first / sc.second;
    jbuckets.push_back({{"hamming", d}, {"mean_cosine_distance", mean}, {"pairs", sc.second}});
    bt.at(bi, 0) = d;
    bt.at(bi, 1) = mean;
    bt.at(bi, 2) = sc.second;
    ++bi;
  }
  r.metrics["hamming_buckets"] = jbuckets;
  r.metrics["code_bits"] = k;
  r.metrics["cluster_count"] = clusters.size();
  r.metrics["skipped_pairs"] = skipped_pairs;
  r.metrics["epochs_run"] = tr.epochs_run;
  r.metrics["final_loss"] = tr.final_loss;

  if (ctx.emit_artifacts) {
    std::string hcsv = "index,hash\n";
    for (int b = 0; b < Bte; ++b)
      hcsv += std::to_string(b) + "," + hashes[static_cast<size_t>(b)] + "\n";
    write_text(join_path(ctx.out_dir, "hashes.csv"), hcsv);
    r.artifacts.push_back("hashes.csv");
    emit_csv(numeric_table({"hamming", "mean_cosine_distance", "pairs"}, std::move(bt)),
             "buckets.csv", ctx, r);
  }
  save_model_artifacts(net, ctx, r);
  return r;
}

Report run_detect(const ExperimentConfig& cfg, const RunContext& ctx) {
  TabularPrep p = prep_tabular(cfg, ctx);
  if (!p.has_target) throw ContractError("detect needs a label column");
  for (int b = 0; b < p.ds.rows(); ++b)
    if (p.ds.is_train(b) && p.target[static_cast<size_t>(b)] != 0.0)
      throw ContractError("training split contains anomalies");

  const Tensor Xtr = p.ds.train_matrix();
  const Tensor Xte = p.ds.test_matrix();
  const int n = p.ds.cols();
  const int k = cfg.model.code_units > 0 ? cfg.model.code_units : 2;

  const std::vector<LayerSpec> arch = {LayerSpec::dense(k, Act::Relu),
                                       LayerSpec::dense(n, Act::Sigmoid)};
  Rng init(cfg.seed + kInitSeed);
  Network net({n}, arch, 1, init);

  ObjectiveSpec spec;
  spec.distance = resolve_distance(cfg, Distance::Mse);
  add_penalty_from_config(cfg, spec);

  const TrainConfig tc = resolve_train(cfg, 100);
  const TrainResult tr = train_network(net, Xtr, spec, tc, cfg.seed + kTrainSeed, ctx.verbose);

  // tau depends on the training split only.
  const std::vector<double> train_errs = reconstruction_errors(net, Xtr);
  const double mean = vec_mean(train_errs);
  const double std = vec_sample_std(train_errs, mean);
  const double tau = mean + 6.0 * std;

  const std::vector<double> test_errs = reconstruction_errors(net, Xte);
  const std::vector<int> te = p.ds.test_rows();
  std::vector<int> labels;
  int positives = 0, flagged = 0, tp = 0;
  for (size_t i = 0; i < te.size(); ++i) {
    const int label = p.target[static_cast<size_t>(te[i])] != 0.0 ? 1 : 0;
    labels.push_back(label);
    positives += label;
    const bool flag = test_errs[i] > tau;
    flagged += flag;
    tp += flag && label;
  }
  const double precision = flagged == 0 ? 1.0 : static_cast<double>(tp) / flagged;
  const double recall = positives == 0 ? 1.0 : static_cast<double>(tp) / positives;

  Report r = base_report(cfg);
  r.metrics["tau"] = tau;
  r.metrics["train_error_mean"] = mean;
  r.metrics["train_error_std"] = std;
  r.metrics["precision_at_tau"] = precision;
  r.metrics["recall_at_tau"] = recall;
  r.metrics["flagged"] = flagged;
  r.metrics["test_anomalies"] = positives;
  r.metrics["test_size"] = te.size();
  r.metrics["epochs_run"] = tr.epochs_run;
  r.metrics["final_loss"] = tr.final_loss;

  if (ctx.emit_artifacts) {
    Tensor et({static_cast<int>(te.size()), 4});
    for (size_t i = 0; i < te.size(); ++i) {
      et.at(static_cast<int>(i), 0) = static_cast<double>(i);
      et.at(static_cast<int>(i), 1) = test_errs[i];
      et.at(static_cast<int>(i), 2) = test_errs[i] > tau ? 1.0 : 0.0;
      et.at(static_cast<int>(i), 3) = labels[i];
    }
    emit_csv(numeric_table({"index", "error", "flag", "label"}, std::move(et)), "errors.csv",
             ctx, r);

    if (positives > 0) {
      const PRCurve curve = pr_curve(test_errs, labels);
      Tensor pt({static_cast<int>(curve.points.size()), 3});
      std::vector<PlotPoint> pts;
      for (size_t i = 0; i < curve.points.size(); ++i) {
        pt.at(static_cast<int>(i), 0) = curve.points[i].threshold;
        pt.at(static_cast<int>(i), 1) = curve.points[i].precision;
        pt.at(static_cast<int>(i), 2) = curve.points[i].recall;
        pts.push_back({curve.points[i].recall, curve.points[i].precision, 0.0});
      }
      emit_csv(numeric_table({"threshold", "precision", "recall"}, std::move(pt)),
               "pr_curve.csv", ctx, r);
      write_text(join_path(ctx.out_dir, "pr_curve.svg"), svg_polyline(pts));
      r.artifacts.push_back("pr_curve.svg");
    }
  }
  save_model_artifacts(net, ctx, r);
  return r;
}

Report run_generate(const ExperimentConfig& cfg, const RunContext& ctx) {
  const ImageSet imgs = load_images(cfg, ctx);
  const int B = imgs.count();
  if (B < 2) throw ContractError("generate needs at least two images");
  const int H = imgs.height(), W = imgs.width(), C = imgs.channels();
  if (H != W || H % 8 != 0)
    throw ConfigError("generate needs square images with sides divisible by 8");
  const int s = H / 8;
  const int n = H * W * C;
  const int k = cfg.model.code_units > 0 ? cfg.model.code_units : 4;

  const std::vector<LayerSpec> arch = {
      LayerSpec::conv(3, 3, 8, 2, Act::Relu),
      LayerSpec::conv(3, 3, 16, 2, Act::Relu),
      LayerSpec::conv(3, 3, 32, 2, Act::Relu),
      LayerSpec::dense(2 * k, Act::Linear),
      LayerSpec::sampling(k),
      LayerSpec::dense(s * s * 8, Act::Relu),
      LayerSpec::reshape({s, s, 8}),
      LayerSpec::deconv(3, 3, 32, 2, Act::Relu),
      LayerSpec::deconv(3, 3, 16, 2, Act::Relu),
      LayerSpec::deconv(3, 3, 8, 2, Act::Relu),
      LayerSpec::deconv(3, 3, C, 1, Act::Sigmoid)};
  Rng init(cfg.seed + kInitSeed);
  Network net({H, W, C}, arch, 5, init);

  ObjectiveSpec spec;
  spec.distance = resolve_distance(cfg, Distance::Bce);
  add_penalty_from_config(cfg, spec);
  Penalty kl;
  kl.kind = PenaltyKind::VaeKl;
  kl.weight = cfg.objective.kl_weight > 0 ? cfg.objective.kl_weight : 1.0 / n;
  spec.penalties.push_back(kl);

  const TrainConfig tc = resolve_train(cfg, 100);
  const TrainResult tr = train_network(net, imgs.images, spec, tc, cfg.seed + kTrainSeed,
                                       ctx.verbose);

  // Posterior means over the whole training set.
  Tensor mu({B, k});
  for (int start = 0; start < B; start += 64) {
    std::vector<int> rows;
    for (int i = start; i < std::min(B, start + 64); ++i) rows.push_back(i);
    const Tensor mc = net.encode_values(take_rows(imgs.images, rows));
    std::copy(mc.data(), mc.data() + mc.size(), mu.data() + static_cast<int64_t>(start) * k);
  }
  std::vector<double> dim_mean(static_cast<size_t>(k)), dim_std(static_cast<size_t>(k));
  double abs_mean_max = 0, std_min = std::numeric_limits<double>::infinity(), std_max = 0;
  for (int j = 0; j < k; ++j) {
    std::vector<double> col(static_cast<size_t>(B));
    for (int b = 0; b < B; ++b) col[static_cast<size_t>(b)] = mu.at(b, j);
    const double m = vec_mean(col);
    const double sd = vec_sample_std(col, m);
    dim_mean[static_cast<size_t>(j)] = m;
    dim_std[static_cast<size_t>(j)] = sd;
    abs_mean_max = std::max(abs_mean_max, std::abs(m));
    std_min = std::min(std_min, sd);
    std_max = std::max(std_max, sd);
  }

  Report r = base_report(cfg);
  r.metrics["latent_mean"] = dim_mean;
  r.metrics["latent_std"] = dim_std;
  r.metrics["latent_abs_mean_max"] = abs_mean_max;
  r.metrics["latent_std_min"] = std_min;
  r.metrics["latent_std_max"] = std_max;
  r.metrics["code_units"] = k;
  r.metrics["epochs_run"] = tr.epochs_run;
  r.metrics["final_loss"] = tr.final_loss;

  if (ctx.emit_artifacts) {
    const char* ext = C == 1 ? ".pgm" : ".ppm";
    // Interpolation strip between the first two training projections.
    constexpr int kSteps = 9;
    Tensor Z({kSteps, k});
    for (int i = 0; i < kSteps; ++i) {
      const double lam = static_cast<double>(i) / (kSteps - 1);
      for (int j = 0; j < k; ++j)
        Z.at(i, j) = (1.0 - lam) * mu.at(0, j) + lam * mu.at(1, j);
    }
    const Tensor interp = net.decode_values(Z);
    std::vector<Tensor> frames;
    for (int i = 0; i < kSteps; ++i) frames.push_back(image_at(interp, i));
    const std::string iname = std::string("interpolation") + ext;
    write_image_file(image_strip(frames), join_path(ctx.out_dir, iname), true);
    r.artifacts.push_back(iname);

    // Decodes of prior draws.
    constexpr int kDraws = 8;
    Rng draw(cfg.seed + kDrawSeed);
    Tensor Zs({kDraws, k});
    for (auto& v : Zs.vals()) v = draw.normal();
    const Tensor samples = net.decode_values(Zs);
    std::vector<Tensor> sframes;
    for (int i = 0; i < kDraws; ++i) sframes.push_back(image_at(samples, i));
    const std::string sname = std::string("samples") + ext;
    write_image_file(image_strip(sframes), join_path(ctx.out_dir, sname), true);
    r.artifacts.push_back(sname);
  }
  save_model_artifacts(net, ctx, r);
  return r;
}

Report run_pipeline(const ExperimentConfig& cfg, const RunContext& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  std::filesystem::create_directories(ctx.out_dir);
  Report r;
  switch (cfg.task) {
    case Task::Visualize: r = run_visualize(cfg, ctx); break;
    case Task::Denoise: r = run_denoise(cfg, ctx); break;
    case Task::Hash: r = run_hash(cfg, ctx); break;
    case Task::Detect: r = run_detect(cfg, ctx); break;
    case Task::Generate: r = run_generate(cfg, ctx); break;
  }
  r.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

Report run_evaluate(const ExperimentConfig& cfg, const RunContext& ctx) {
  const auto t0 = std::chrono::steady_clock::now();
  const Network net =
      load_model(join_path(ctx.out_dir, "model.bin"), join_path(ctx.out_dir, "model.json"));

  Report r = base_report(cfg);
  if (cfg.task == Task::Denoise || cfg.task == Task::Generate) {
    const ImageSet imgs = load_images(cfg, ctx);
    const std::vector<double> errs = reconstruction_errors(net, imgs.images);
    const double m = vec_mean(errs);
    r.metrics["mse"] = m;
    r.metrics["mse_0_255"] = m * 255.0 * 255.0;
    r.metrics["instances"] = imgs.count();
  } else {
    TabularPrep p = prep_tabular(cfg, ctx);
    const Tensor Xtr = p.ds.train_matrix();
    const Tensor Xte = p.ds.test_matrix();
    r.metrics["mse"] = {{"train", net_mse(net, Xtr)}, {"test", net_mse(net, Xte)}};
    r.metrics["rmse"] = {{"train", rmse(Xtr, forward_batched(net, Xtr))},
                         {"test", rmse(Xte, forward_batched(net, Xte))}};
    r.metrics["mae"] = {{"train", mae(Xtr, forward_batched(net, Xtr))},
                        {"test", mae(Xte, forward_batched(net, Xte))}};
  }
  r.duration_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace aewb

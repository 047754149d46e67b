#include "aewb/synth.hpp"

#include <array>
#include <cmath>

#include "aewb/rng.hpp"

namespace aewb {

namespace {

Dataset numeric_dataset(Tensor X, const std::string& prefix) {
  Dataset ds;
  const int n = X.dim(1);
  for (int j = 0; j < n; ++j) {
    Column col;
    col.name = prefix + std::to_string(j);
    ds.columns.push_back(std::move(col));
  }
  ds.X = std::move(X);
  return ds;
}

void append_numeric_column(Dataset& ds, const std::string& name,
                           const std::vector<double>& values) {
  const int B = ds.rows(), n = ds.cols();
  Tensor nx({B, n + 1});
  for (int b = 0; b < B; ++b) {
    for (int j = 0; j < n; ++j) nx.at(b, j) = ds.X.at(b, j);
    nx.at(b, n) = values[static_cast<size_t>(b)];
  }
  ds.X = std::move(nx);
  Column col;
  col.name = name;
  ds.columns.push_back(std::move(col));
}

}  // namespace

Dataset synth_manifold(int instances, uint64_t seed) {
  constexpr int n = 21;
  Rng rng(seed);
  // Fixed quadratic embedding of the (u,v) sheet, drawn before any instance.
  std::vector<std::array<double, 6>> coef(n);
  for (auto& c : coef)
    for (auto& v : c) v = rng.uniform(-1.0, 1.0);

  Tensor X({instances, n});
  std::vector<double> target(static_cast<size_t>(instances));
  for (int b = 0; b < instances; ++b) {
    // Centered parameters keep u and u*u uncorrelated, so the quadratic
    // terms bend the sheet instead of mostly tilting it.
    const double u = rng.uniform(-1.0, 1.0);
    const double v = rng.uniform(-1.0, 1.0);
    target[static_cast<size_t>(b)] = (u + 1.0) / 2.0;
    for (int j = 0; j < n; ++j) {
      const auto& c = coef[static_cast<size_t>(j)];
      X.at(b, j) = c[0] + c[1] * u + c[2] * v + c[3] * u * u + c[4] * v * v + c[5] * u * v +
                   rng.normal(0.0, 0.02);
    }
  }
  Dataset ds = numeric_dataset(std::move(X), "f");
  append_numeric_column(ds, "activity", target);
  return ds;
}

Dataset synth_plane(int instances, int dims, uint64_t seed) {
  Rng rng(seed);
  std::vector<double> p(static_cast<size_t>(dims)), q(static_cast<size_t>(dims)),
      m(static_cast<size_t>(dims));
  for (auto& v : p) v = rng.uniform(-1.0, 1.0);
  for (auto& v : q) v = rng.uniform(-1.0, 1.0);
  for (auto& v : m) v = rng.uniform(-0.5, 0.5);

  Tensor X({instances, dims});
  std::vector<double> target(static_cast<size_t>(instances));
  for (int b = 0; b < instances; ++b) {
    const double u = rng.uniform();
    const double v = rng.uniform();
    target[static_cast<size_t>(b)] = u;
    for (int j = 0; j < dims; ++j)
      X.at(b, j) = m[static_cast<size_t>(j)] + u * p[static_cast<size_t>(j)] +
                   v * q[static_cast<size_t>(j)] + rng.normal(0.0, 0.002);
  }
  Dataset ds = numeric_dataset(std::move(X), "f");
  append_numeric_column(ds, "activity", target);
  return ds;
}

ImageSet synth_shapes(int count, int size, uint64_t seed) {
  Rng rng(seed);
  std::vector<Tensor> images;
  images.reserve(static_cast<size_t>(count));
  for (int img = 0; img < count; ++img) {
    Tensor t({size, size, 1});
    auto px = [&](int i, int j) -> double& { return t[static_cast<int64_t>(i) * size + j]; };
    const int shapes = 1 + static_cast<int>(rng.below(3));
    for (int s = 0; s < shapes; ++s) {
      const bool disc = rng.uniform() < 0.5;
      const double cx = rng.uniform(0.15, 0.85) * size;
      const double cy = rng.uniform(0.15, 0.85) * size;
      const double r = rng.uniform(0.08, 0.22) * size;
      const double intensity = rng.uniform(0.5, 1.0);
      for (int i = 0; i < size; ++i)
        for (int j = 0; j < size; ++j) {
          const bool inside = disc
                                  ? (i - cy) * (i - cy) + (j - cx) * (j - cx) <= r * r
                                  : std::abs(i - cy) <= r && std::abs(j - cx) <= r;
          if (inside) px(i, j) = std::max(px(i, j), intensity);
        }
    }
    images.push_back(std::move(t));
  }
  return image_set_from(std::move(images));
}

ImageSet synth_faces(int count, int size, uint64_t seed) {
  Rng rng(seed);
  std::vector<Tensor> images;
  images.reserve(static_cast<size_t>(count));
  for (int img = 0; img < count; ++img) {
    Tensor t({size, size, 1});
    auto px = [&](int i, int j) -> double& { return t[static_cast<int64_t>(i) * size + j]; };
    // Variation factors: head center/radii, skin tone, eye spacing/height/
    // size, mouth width/height.
    const double cx = size * rng.uniform(0.45, 0.55);
    const double cy = size * rng.uniform(0.45, 0.55);
    const double rx = size * rng.uniform(0.28, 0.40);
    const double ry = size * rng.uniform(0.32, 0.44);
    const double tone = rng.uniform(0.6, 0.9);
    const double eye_dx = rx * rng.uniform(0.35, 0.55);
    const double eye_dy = ry * rng.uniform(0.2, 0.35);
    const double eye_r = size * rng.uniform(0.03, 0.06);
    const double mouth_w = rx * rng.uniform(0.4, 0.8);
    const double mouth_dy = ry * rng.uniform(0.35, 0.55);

    for (int i = 0; i < size; ++i)
      for (int j = 0; j < size; ++j) {
        const double dx = (j - cx) / rx, dy = (i - cy) / ry;
        if (dx * dx + dy * dy <= 1.0) px(i, j) = tone;
      }
    auto dot = [&](double ex, double ey, double r, double val) {
      for (int i = 0; i < size; ++i)
        for (int j = 0; j < size; ++j)
          if ((i - ey) * (i - ey) + (j - ex) * (j - ex) <= r * r) px(i, j) = val;
    };
    dot(cx - eye_dx, cy - eye_dy, eye_r, 0.15);
    dot(cx + eye_dx, cy - eye_dy, eye_r, 0.15);
    for (int i = 0; i < size; ++i)
      for (int j = 0; j < size; ++j)
        if (std::abs(i - (cy + mouth_dy)) <= size * 0.02 && std::abs(j - cx) <= mouth_w / 2)
          px(i, j) = 0.2;
    images.push_back(std::move(t));
  }
  return image_set_from(std::move(images));
}

Dataset synth_topics(int docs, int terms, int topics, uint64_t seed) {
  Rng rng(seed);
  const int block = terms / topics;
  Tensor X({docs, terms});
  std::vector<double> topic_of(static_cast<size_t>(docs));
  for (int d = 0; d < docs; ++d) {
    const int topic = static_cast<int>(rng.below(static_cast<uint64_t>(topics)));
    topic_of[static_cast<size_t>(d)] = topic;
    for (int t = 0; t < terms; ++t) {
      const bool owned = t >= topic * block && t < (topic + 1) * block;
      const double p = owned ? 0.25 : 0.01;
      X.at(d, t) = rng.uniform() < p ? 1.0 : 0.0;
    }
  }
  Dataset ds = numeric_dataset(std::move(X), "term");
  // topic labels as a nominal column
  Column col;
  col.name = "topic";
  col.kind = ColKind::Nominal;
  for (int t = 0; t < topics; ++t) col.categories.push_back("topic" + std::to_string(t));
  const int n = ds.cols();
  Tensor nx({docs, n + 1});
  for (int b = 0; b < docs; ++b) {
    for (int j = 0; j < n; ++j) nx.at(b, j) = ds.X.at(b, j);
    nx.at(b, n) = topic_of[static_cast<size_t>(b)];
  }
  ds.X = std::move(nx);
  ds.columns.push_back(std::move(col));
  return ds;
}

Dataset synth_traffic(int train_n, int test_n, double anomaly_frac, uint64_t seed) {
  constexpr int kNumeric = 12;
  Rng rng(seed);
  std::vector<double> mu(kNumeric);
  for (auto& v : mu) v = rng.uniform(-2.0, 2.0);

  const int total = train_n + test_n;
  Tensor X({total, kNumeric + 2});  // + proto + label
  std::vector<int> split(static_cast<size_t>(total), 0);
  for (int b = 0; b < total; ++b) {
    const bool test = b >= train_n;
    split[static_cast<size_t>(b)] = test ? 1 : 0;
    const bool anomaly = test && rng.uniform() < anomaly_frac;
    for (int j = 0; j < kNumeric; ++j)
      X.at(b, j) = mu[static_cast<size_t>(j)] + rng.normal();
    if (anomaly) {
      // Displace six distinct coordinates by at least 4 sigma. Per-feature
      // scaling clamps displaced values to the train range, so an anomaly
      // needs several hit features to keep a visible reconstruction gap.
      std::array<int, kNumeric> idx{};
      for (int j = 0; j < kNumeric; ++j) idx[static_cast<size_t>(j)] = j;
      for (int hit = 0; hit < 6; ++hit) {
        const int pick = hit + static_cast<int>(rng.below(static_cast<uint64_t>(kNumeric - hit)));
        std::swap(idx[static_cast<size_t>(hit)], idx[static_cast<size_t>(pick)]);
        const int j = idx[static_cast<size_t>(hit)];
        const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
        X.at(b, j) = mu[static_cast<size_t>(j)] + sign * rng.uniform(4.0, 6.0);
      }
    }
    X.at(b, kNumeric) = static_cast<double>(rng.below(3));  // proto category
    X.at(b, kNumeric + 1) = anomaly ? 1.0 : 0.0;
  }

  Dataset ds = numeric_dataset(std::move(X), "f");
  Column& proto = ds.columns[kNumeric];
  proto.name = "proto";
  proto.kind = ColKind::Nominal;
  proto.categories = {"tcp", "udp", "icmp"};
  Column& label = ds.columns[kNumeric + 1];
  label.name = "label";
  label.kind = ColKind::Nominal;
  label.categories = {"normal", "anomaly"};
  ds.split = std::move(split);
  return ds;
}

}  // namespace aewb

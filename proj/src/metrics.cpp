#include "aewb/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "aewb/errors.hpp"

namespace aewb {

namespace {

constexpr double kMapeEps = 1e-8;

void check_pair(const Tensor& x, const Tensor& xr, const char* what) {
  if (!x.same_shape(xr))
    throw DimensionError(std::string(what) + " shape mismatch: " + shape_str(x.shape()) +
                         " vs " + shape_str(xr.shape()));
  if (x.rank() != 2) throw DimensionError(std::string(what) + " expects [B,n] batches");
}

}  // namespace

double rmse(const Tensor& x, const Tensor& xr) {
  check_pair(x, xr, "rmse");
  const int B = x.dim(0), n = x.dim(1);
  double acc = 0;
  for (int b = 0; b < B; ++b) {
    double s = 0;
    for (int j = 0; j < n; ++j) {
      const double d = x.at(b, j) - xr.at(b, j);
      s += d * d;
    }
    acc += std::sqrt(s / n);
  }
  return acc / B;
}

double mae(const Tensor& x, const Tensor& xr) {
  check_pair(x, xr, "mae");
  const int B = x.dim(0), n = x.dim(1);
  double acc = 0;
  for (int b = 0; b < B; ++b) {
    double s = 0;
    for (int j = 0; j < n; ++j) s += std::abs(x.at(b, j) - xr.at(b, j));
    acc += s / n;
  }
  return acc / B;
}

double mape(const Tensor& x, const Tensor& xr) {
  check_pair(x, xr, "mape");
  const int B = x.dim(0), n = x.dim(1);
  double acc = 0;
  for (int b = 0; b < B; ++b) {
    double s = 0;
    int kept = 0;
    for (int j = 0; j < n; ++j) {
      if (std::abs(x.at(b, j)) < kMapeEps) continue;
      s += std::abs((x.at(b, j) - xr.at(b, j)) / x.at(b, j));
      ++kept;
    }
    if (kept == 0)
      throw UndefinedMetricError("mape undefined: instance " + std::to_string(b) +
                                 " has no coordinates above " + std::to_string(kMapeEps));
    acc += s / kept;
  }
  return acc / B;
}

std::vector<double> reconstruction_errors(const Network& net, const Tensor& X) {
  const int B = X.dim(0);
  const int64_t n = X.size() / B;
  std::vector<double> errs(static_cast<size_t>(B));
  constexpr int kChunk = 64;  // bounds activation memory on image nets
  for (int start = 0; start < B; start += kChunk) {
    const int nb = std::min(kChunk, B - start);
    Shape cs = X.shape();
    cs[0] = nb;
    Tensor chunk(cs);
    std::copy(X.data() + start * n, X.data() + (start + nb) * n, chunk.data());
    const Tensor out = net.forward_values(chunk);
    for (int b = 0; b < nb; ++b) {
      double s = 0;
      for (int64_t j = 0; j < n; ++j) {
        const double d = chunk[b * n + j] - out[b * n + j];
        s += d * d;
      }
      errs[static_cast<size_t>(start + b)] = s / static_cast<double>(n);
    }
  }
  return errs;
}

int hamming(const std::string& h1, const std::string& h2) {
  if (h1.size() != h2.size())
    throw DimensionError("hamming needs equal lengths: " + std::to_string(h1.size()) + " vs " +
                         std::to_string(h2.size()));
  int d = 0;
  for (size_t i = 0; i < h1.size(); ++i)
    if (h1[i] != h2[i]) ++d;
  return d;
}

double cosine_distance(const std::vector<double>& u, const std::vector<double>& v) {
  if (u.size() != v.size())
    throw DimensionError("cosine_distance needs equal lengths: " + std::to_string(u.size()) +
                         " vs " + std::to_string(v.size()));
  double dot = 0, nu = 0, nv = 0;
  for (size_t i = 0; i < u.size(); ++i) {
    dot += u[i] * v[i];
    nu += u[i] * u[i];
    nv += v[i] * v[i];
  }
  if (nu == 0 || nv == 0) throw UndefinedMetricError("cosine_distance undefined on zero vectors");
  return 1.0 - dot / (std::sqrt(nu) * std::sqrt(nv));
}

double intercluster_distance(const Tensor& A, const Tensor& B) {
  if (A.rank() != 2 || B.rank() != 2 || A.dim(1) != B.dim(1))
    throw DimensionError("intercluster_distance needs [*,n] row sets with equal n");
  if (A.dim(0) == 0 || B.dim(0) == 0)
    throw UndefinedMetricError("intercluster_distance undefined on empty clusters");
  const int n = A.dim(1);
  double acc = 0;
  std::vector<double> a(static_cast<size_t>(n)), b(static_cast<size_t>(n));
  for (int i = 0; i < A.dim(0); ++i) {
    for (int j = 0; j < n; ++j) a[static_cast<size_t>(j)] = A.at(i, j);
    for (int k = 0; k < B.dim(0); ++k) {
      for (int j = 0; j < n; ++j) b[static_cast<size_t>(j)] = B.at(k, j);
      acc += cosine_distance(a, b);
    }
  }
  return acc / (static_cast<double>(A.dim(0)) * B.dim(0));
}

std::vector<TermScore> tfidf_rank(const Tensor& cluster_docs, const Tensor& corpus_docs,
                                  const std::vector<std::string>& vocab, int m) {
  if (cluster_docs.rank() != 2 || corpus_docs.rank() != 2 ||
      cluster_docs.dim(1) != corpus_docs.dim(1))
    throw DimensionError("tfidf_rank needs term-count matrices over a shared vocabulary");
  const int T = cluster_docs.dim(1);
  if (static_cast<int>(vocab.size()) != T)
    throw DimensionError("tfidf_rank vocabulary size does not match term count");

  const int N = corpus_docs.dim(0);
  std::vector<TermScore> scored(static_cast<size_t>(T));
  for (int t = 0; t < T; ++t) {
    double tf = 0;
    for (int d = 0; d < cluster_docs.dim(0); ++d) tf += cluster_docs.at(d, t);
    int df = 0;
    for (int d = 0; d < N; ++d)
      if (corpus_docs.at(d, t) > 0) ++df;
    scored[static_cast<size_t>(t)] = {vocab[static_cast<size_t>(t)],
                                      tf * std::log(static_cast<double>(N) / (1.0 + df))};
  }
  std::sort(scored.begin(), scored.end(), [](const TermScore& a, const TermScore& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.term < b.term;
  });
  if (m < static_cast<int>(scored.size())) scored.resize(static_cast<size_t>(m));
  return scored;
}

PRCurve pr_curve(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size())
    throw DimensionError("pr_curve needs one label per score");
  int positives = 0;
  for (int l : labels) positives += l != 0;
  if (positives == 0) throw ContractError("pr_curve needs at least one positive label");

  std::vector<double> thr = scores;
  std::sort(thr.begin(), thr.end());
  thr.erase(std::unique(thr.begin(), thr.end()), thr.end());
  thr.insert(thr.begin(), thr.front() - 1.0);  // fencepost: everything predicted positive

  PRCurve curve;
  for (double t : thr) {
    int tp = 0, fp = 0;
    for (size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] > t) {
        if (labels[i] != 0)
          ++tp;
        else
          ++fp;
      }
    }
    const double precision = (tp + fp) == 0 ? 1.0 : static_cast<double>(tp) / (tp + fp);
    const double recall = static_cast<double>(tp) / positives;
    curve.points.push_back({t, precision, recall});
  }
  return curve;
}

}  // namespace aewb

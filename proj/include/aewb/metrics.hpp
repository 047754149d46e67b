#pragma once

#include <string>
#include <vector>

#include "aewb/layers.hpp"
#include "aewb/tensor.hpp"

namespace aewb {

// Per-instance regression errors averaged over the batch. x and xr are
// [B,n]. mape skips coordinates with |x_i| < 1e-8 and errors out when a
// row has none left.
double rmse(const Tensor& x, const Tensor& xr);
double mae(const Tensor& x, const Tensor& xr);
double mape(const Tensor& x, const Tensor& xr);

// Per-instance mean squared reconstruction error under the network run in
// eval mode.
std::vector<double> reconstruction_errors(const Network& net, const Tensor& X);

int hamming(const std::string& h1, const std::string& h2);

double cosine_distance(const std::vector<double>& u, const std::vector<double>& v);

// Mean cosine distance over all cross pairs of two row sets.
double intercluster_distance(const Tensor& A, const Tensor& B);

struct TermScore {
  std::string term;
  double score;
};

// score(term) = tf within the cluster's concatenated docs * ln(N/(1+df)),
// df counted over the corpus docs; ties broken lexicographically.
std::vector<TermScore> tfidf_rank(const Tensor& cluster_docs, const Tensor& corpus_docs,
                                  const std::vector<std::string>& vocab, int m);

struct PRPoint {
  double threshold;
  double precision;
  double recall;
};

struct PRCurve {
  std::vector<PRPoint> points;  // ascending threshold
};

// Threshold sweep over the sorted unique scores plus one fencepost below the
// minimum; an instance is predicted anomalous when score > threshold.
PRCurve pr_curve(const std::vector<double>& scores, const std::vector<int>& labels);

}  // namespace aewb

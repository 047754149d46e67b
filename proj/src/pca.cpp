#include "aewb/pca.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "aewb/autodiff.hpp"

namespace aewb {

namespace {

double offdiag_frobenius(const Tensor& S) {
  const int n = S.dim(0);
  double acc = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j) acc += S.at(i, j) * S.at(i, j);
  return std::sqrt(acc);
}

// Cyclic Jacobi sweeps on symmetric S; V accumulates the rotations.
void jacobi(Tensor& S, Tensor& V) {
  const int n = S.dim(0);
  for (int sweep = 0; sweep < 100; ++sweep) {
    if (offdiag_frobenius(S) < 1e-12) return;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double spq = S.at(p, q);
        if (std::abs(spq) < 1e-300) continue;
        const double theta = (S.at(q, q) - S.at(p, p)) / (2.0 * spq);
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int i = 0; i < n; ++i) {
          const double sip = S.at(i, p), siq = S.at(i, q);
          S.at(i, p) = c * sip - s * siq;
          S.at(i, q) = s * sip + c * siq;
        }
        for (int i = 0; i < n; ++i) {
          const double spi = S.at(p, i), sqi = S.at(q, i);
          S.at(p, i) = c * spi - s * sqi;
          S.at(q, i) = s * spi + c * sqi;
        }
        for (int i = 0; i < n; ++i) {
          const double vip = V.at(i, p), viq = V.at(i, q);
          V.at(i, p) = c * vip - s * viq;
          V.at(i, q) = s * vip + c * viq;
        }
      }
    }
  }
  if (offdiag_frobenius(S) >= 1e-12)
    throw ContractError("jacobi eigendecomposition did not converge");
}

}  // namespace

PCAModel pca_fit(const Tensor& X, int k) {
  if (X.rank() != 2) throw DimensionError("pca_fit expects an instance matrix [B,n]");
  const int B = X.dim(0), n = X.dim(1);
  if (B < 2) throw ContractError("pca_fit needs at least 2 instances");
  if (k < 1 || k > n)
    throw ContractError("pca_fit component count " + std::to_string(k) +
                        " out of range for n=" + std::to_string(n));

  PCAModel model;
  model.k = k;
  model.mean = Tensor({n});
  for (int b = 0; b < B; ++b)
    for (int j = 0; j < n; ++j) model.mean[j] += X.at(b, j);
  for (int j = 0; j < n; ++j) model.mean[j] /= B;

  Tensor cov({n, n});
  for (int b = 0; b < B; ++b)
    for (int i = 0; i < n; ++i) {
      const double xi = X.at(b, i) - model.mean[i];
      for (int j = i; j < n; ++j) cov.at(i, j) += xi * (X.at(b, j) - model.mean[j]);
    }
  for (int i = 0; i < n; ++i)
    for (int j = i; j < n; ++j) {
      cov.at(i, j) /= (B - 1);
      cov.at(j, i) = cov.at(i, j);
    }

  Tensor V({n, n});
  for (int i = 0; i < n; ++i) V.at(i, i) = 1.0;
  jacobi(cov, V);

  std::vector<int> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return cov.at(a, a) > cov.at(b, b); });

  model.eigenvalues.resize(static_cast<size_t>(n));
  for (int j = 0; j < n; ++j) model.eigenvalues[static_cast<size_t>(j)] = cov.at(order[static_cast<size_t>(j)], order[static_cast<size_t>(j)]);

  model.components = Tensor({n, k});
  for (int j = 0; j < k; ++j) {
    const int src = order[static_cast<size_t>(j)];
    int arg = 0;
    for (int i = 1; i < n; ++i)
      if (std::abs(V.at(i, src)) > std::abs(V.at(arg, src))) arg = i;
    const double sign = V.at(arg, src) >= 0 ? 1.0 : -1.0;
    for (int i = 0; i < n; ++i) model.components.at(i, j) = sign * V.at(i, src);
  }
  return model;
}

Tensor pca_project(const PCAModel& model, const Tensor& X) {
  if (X.rank() != 2 || X.dim(1) != model.mean.dim(0))
    throw DimensionError("pca_project shape mismatch: " + shape_str(X.shape()));
  const int B = X.dim(0), n = X.dim(1);
  Tensor centered({B, n});
  for (int b = 0; b < B; ++b)
    for (int j = 0; j < n; ++j) centered.at(b, j) = X.at(b, j) - model.mean[j];
  Tensor Z;
  matmul_into(centered, model.components, Z);
  return Z;
}

Tensor pca_reconstruct(const PCAModel& model, const Tensor& Z) {
  if (Z.rank() != 2 || Z.dim(1) != model.k)
    throw DimensionError("pca_reconstruct shape mismatch: " + shape_str(Z.shape()));
  Tensor X;
  matmul_tb_into(Z, model.components, X);
  const int B = X.dim(0), n = X.dim(1);
  for (int b = 0; b < B; ++b)
    for (int j = 0; j < n; ++j) X.at(b, j) += model.mean[j];
  return X;
}

double pca_reconstruction_mse(const PCAModel& model, const Tensor& X) {
  const Tensor R = pca_reconstruct(model, pca_project(model, X));
  const int B = X.dim(0), n = X.dim(1);
  double acc = 0;
  for (int b = 0; b < B; ++b) {
    double s = 0;
    for (int j = 0; j < n; ++j) {
      const double d = X.at(b, j) - R.at(b, j);
      s += d * d;
    }
    acc += s / n;
  }
  return acc / B;
}

double pca_residual_variance(const PCAModel& model, const Tensor& X) {
  const Tensor R = pca_reconstruct(model, pca_project(model, X));
  const int B = X.dim(0), n = X.dim(1);
  double acc = 0;
  for (int b = 0; b < B; ++b)
    for (int j = 0; j < n; ++j) {
      const double d = X.at(b, j) - R.at(b, j);
      acc += d * d;
    }
  return acc / (B - 1);
}

}  // namespace aewb

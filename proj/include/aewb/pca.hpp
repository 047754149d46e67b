#pragma once

#include <vector>

#include "aewb/tensor.hpp"

namespace aewb {

struct PCAModel {
  Tensor mean;                     // [n]
  Tensor components;               // [n,k], orthonormal columns
  std::vector<double> eigenvalues; // all n, non-increasing
  int k = 0;
};

// Centers X, eigendecomposes the (B-1)-normalized covariance with cyclic
// Jacobi rotations, keeps the top-k eigenvectors. Sign convention: the
// largest-magnitude entry of each component is positive.
PCAModel pca_fit(const Tensor& X, int k);

Tensor pca_project(const PCAModel& model, const Tensor& X);
Tensor pca_reconstruct(const PCAModel& model, const Tensor& Z);

// Mean over instances of the per-instance mean squared reconstruction error.
double pca_reconstruction_mse(const PCAModel& model, const Tensor& X);

// Residual energy under the sample-covariance convention: sum of squared
// residual norms divided by (B-1). Equals the sum of discarded eigenvalues
// on the fitting data.
double pca_residual_variance(const PCAModel& model, const Tensor& X);

}  // namespace aewb

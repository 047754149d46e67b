#include "aewb/optim.hpp"

#include <cmath>

namespace aewb {

void Sgd::step(std::vector<Tensor>& params, const GradientMap& grads) {
  if (!(lr > 0)) throw ContractError("sgd learning rate must be positive");
  for (size_t i = 0; i < params.size(); ++i) {
    const Tensor& g = grads.at(static_cast<int>(i));
    for (int64_t j = 0; j < params[i].size(); ++j) params[i][j] -= lr * g[j];
  }
}

void Adam::step(std::vector<Tensor>& params, const GradientMap& grads) {
  if (!(lr > 0)) throw ContractError("adam learning rate must be positive");
  if (m.empty()) {
    for (const auto& p : params) {
      m.push_back(Tensor(p.shape()));
      v.push_back(Tensor(p.shape()));
    }
  }
  ++t;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
  for (size_t i = 0; i < params.size(); ++i) {
    const Tensor& g = grads.at(static_cast<int>(i));
    for (int64_t j = 0; j < params[i].size(); ++j) {
      const double gj = g[j];
      m[i][j] = beta1 * m[i][j] + (1.0 - beta1) * gj;
      v[i][j] = beta2 * v[i][j] + (1.0 - beta2) * gj * gj;
      const double mhat = m[i][j] / bc1;
      const double vhat = v[i][j] / bc2;
      params[i][j] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
  }
}

}  // namespace aewb

#pragma once

#include <cstdint>
#include <vector>

#include "aewb/autodiff.hpp"

namespace aewb {

struct Sgd {
  double lr = 1e-2;
  void step(std::vector<Tensor>& params, const GradientMap& grads);
};

struct Adam {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int64_t t = 0;
  std::vector<Tensor> m, v;  // sized lazily on the first step

  void step(std::vector<Tensor>& params, const GradientMap& grads);
};

}  // namespace aewb

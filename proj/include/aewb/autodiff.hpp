#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "aewb/errors.hpp"
#include "aewb/tensor.hpp"

namespace aewb {

enum class Op : uint8_t {
  Leaf,
  Param,
  MatMul,
  MatMulTB,  // a * b^T
  Add,
  Sub,
  Mul,
  AddRowVec,   // [B,n] + [n]
  AddChanVec,  // [B,H,W,C] + [C]
  Scale,
  Log,  // clamped at kLogEps
  Exp,
  Square,
  Clamp,
  Act,
  ReluMask,  // step(x > 0); derivative treated as zero
  Sum,
  Mean,
  MeanRows,  // [B,n] -> [n], column means
  SliceCols,
  Reshape,
  Conv2d,    // SAME padding, cross-correlation
  Deconv2d,  // transposed convolution, output spatial = input * stride
  MaxPool2,
  Upsample2,
};

enum class Act : uint8_t { Sigmoid, Relu, Tanh, Linear };

const char* act_name(Act a);
Act act_from_name(const std::string& s);

inline constexpr double kLogEps = 1e-7;

struct Node {
  Op op = Op::Leaf;
  Act act = Act::Linear;
  int a = -1, b = -1;
  int slot = -1;          // parameter slot for Op::Param
  double c0 = 0, c1 = 0;  // scalar attrs (scale factor, clamp bounds)
  int i0 = 0, i1 = 0;     // integer attrs (stride, slice range)
  Tensor value;
  std::vector<int32_t> route;  // maxpool argmax cache
};

class Tape;

struct Val {
  Tape* tape = nullptr;
  int idx = -1;
  const Tensor& value() const;
  bool valid() const { return tape != nullptr && idx >= 0; }
};

/// Gradients keyed by parameter slot; one entry per registered slot.
class GradientMap {
 public:
  void set(int slot, Tensor g) { grads_[slot] = std::move(g); }
  const Tensor& at(int slot) const { return grads_.at(slot); }
  size_t size() const { return grads_.size(); }
  const std::map<int, Tensor>& all() const { return grads_; }

 private:
  std::map<int, Tensor> grads_;
};

/// Define-by-run tape: nodes are appended in topological order during the
/// forward pass and traversed in reverse for gradients.
class Tape {
 public:
  Val leaf(Tensor t);
  Val param(const Tensor& t, int slot);

  Val matmul(Val a, Val b);
  Val matmul_tb(Val a, Val b);
  Val add(Val a, Val b);
  Val sub(Val a, Val b);
  Val mul(Val a, Val b);  // equal shapes, or one operand scalar
  Val add_rowvec(Val m, Val row);
  Val add_chanvec(Val img, Val chan);
  Val scale(Val a, double c);
  Val log(Val a);
  Val exp(Val a);
  Val square(Val a);
  Val clamp(Val a, double lo, double hi);
  Val activation(Act k, Val a);
  Val relu_mask(Val a);
  Val sum(Val a);
  Val mean(Val a);
  Val mean_rows(Val a);
  Val slice_cols(Val a, int c0, int c1);
  Val reshape(Val a, Shape s);
  Val conv2d(Val x, Val kernels, int stride);
  Val deconv2d(Val x, Val kernels, int stride);
  Val maxpool2(Val x);
  Val upsample2(Val x);

  // Gradients of a scalar node w.r.t. every registered parameter slot.
  // Slots the output does not depend on receive zero tensors.
  GradientMap backward(Val scalar_output);

  const Tensor& value(Val v) const { return nodes_[static_cast<size_t>(v.idx)].value; }
  size_t node_count() const { return nodes_.size(); }

 private:
  Val push(Node n);
  std::vector<Node> nodes_;
  std::map<int, int> param_nodes_;  // slot -> node index (first registration)
};

// Worst relative finite-difference error over every parameter coordinate.
// `build` must construct the objective from the provided parameter Vals
// (registered in order as slots 0..P-1) and return a scalar.
double grad_check(const std::function<Val(Tape&, const std::vector<Val>&)>& build,
                  const std::vector<Tensor>& params, double h);

}  // namespace aewb

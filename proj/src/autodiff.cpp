#include "aewb/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace aewb {

const char* act_name(Act a) {
  switch (a) {
    case Act::Sigmoid: return "sigmoid";
    case Act::Relu: return "relu";
    case Act::Tanh: return "tanh";
    case Act::Linear: return "linear";
  }
  return "linear";
}

Act act_from_name(const std::string& s) {
  if (s == "sigmoid") return Act::Sigmoid;
  if (s == "relu") return Act::Relu;
  if (s == "tanh") return Act::Tanh;
  if (s == "linear") return Act::Linear;
  throw ContractError("unknown activation: " + s);
}

const Tensor& Val::value() const { return tape->value(*this); }

namespace {

double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

struct ConvGeom {
  int out_h, out_w, pad_top, pad_left;
};

// SAME padding geometry: output spatial dims are ceil(in / stride).
ConvGeom conv_geom(int h, int w, int kh, int kw, int stride) {
  ConvGeom g;
  g.out_h = (h + stride - 1) / stride;
  g.out_w = (w + stride - 1) / stride;
  const int ph = std::max((g.out_h - 1) * stride + kh - h, 0);
  const int pw = std::max((g.out_w - 1) * stride + kw - w, 0);
  g.pad_top = ph / 2;
  g.pad_left = pw / 2;
  return g;
}

// out[b,oi,oj,f] = sum_{ki,kj,c} x[b, oi*s+ki-pt, oj*s+kj-pl, c] * k[ki,kj,c,f]
Tensor conv_fwd(const Tensor& x, const Tensor& k, int stride) {
  const int B = x.dim(0), H = x.dim(1), W = x.dim(2), C = x.dim(3);
  const int kh = k.dim(0), kw = k.dim(1), F = k.dim(3);
  const ConvGeom g = conv_geom(H, W, kh, kw, stride);
  Tensor out({B, g.out_h, g.out_w, F});
  for (int b = 0; b < B; ++b)
    for (int oi = 0; oi < g.out_h; ++oi)
      for (int oj = 0; oj < g.out_w; ++oj) {
        double* orow = out.data() + out.idx4(b, oi, oj, 0);
        for (int ki = 0; ki < kh; ++ki) {
          const int i = oi * stride + ki - g.pad_top;
          if (i < 0 || i >= H) continue;
          for (int kj = 0; kj < kw; ++kj) {
            const int j = oj * stride + kj - g.pad_left;
            if (j < 0 || j >= W) continue;
            const double* xrow = x.data() + x.idx4(b, i, j, 0);
            const double* krow = k.data() + (static_cast<int64_t>(ki) * kw + kj) * C * F;
            for (int c = 0; c < C; ++c) {
              const double xv = xrow[c];
              if (xv == 0.0) continue;
              const double* kf = krow + static_cast<int64_t>(c) * F;
              for (int f = 0; f < F; ++f) orow[f] += xv * kf[f];
            }
          }
        }
      }
  return out;
}

// Gradient of conv_fwd w.r.t. its input; also the forward map of Deconv2d.
Tensor conv_bwd_input(const Tensor& grad, const Tensor& k, int stride, int in_h, int in_w) {
  const int B = grad.dim(0), Ho = grad.dim(1), Wo = grad.dim(2), F = grad.dim(3);
  const int kh = k.dim(0), kw = k.dim(1), C = k.dim(2);
  const ConvGeom g = conv_geom(in_h, in_w, kh, kw, stride);
  Tensor dx({B, in_h, in_w, C});
  for (int b = 0; b < B; ++b)
    for (int oi = 0; oi < Ho; ++oi)
      for (int oj = 0; oj < Wo; ++oj) {
        const double* grow = grad.data() + grad.idx4(b, oi, oj, 0);
        for (int ki = 0; ki < kh; ++ki) {
          const int i = oi * stride + ki - g.pad_top;
          if (i < 0 || i >= in_h) continue;
          for (int kj = 0; kj < kw; ++kj) {
            const int j = oj * stride + kj - g.pad_left;
            if (j < 0 || j >= in_w) continue;
            double* xrow = dx.data() + dx.idx4(b, i, j, 0);
            const double* krow = k.data() + (static_cast<int64_t>(ki) * kw + kj) * C * F;
            for (int c = 0; c < C; ++c) {
              const double* kf = krow + static_cast<int64_t>(c) * F;
              double s = 0.0;
              for (int f = 0; f < F; ++f) s += grow[f] * kf[f];
              xrow[c] += s;
            }
          }
        }
      }
  return dx;
}

// Gradient of conv_fwd w.r.t. the kernel.
Tensor conv_bwd_kernel(const Tensor& x, const Tensor& grad, int stride, int kh, int kw) {
  const int B = x.dim(0), H = x.dim(1), W = x.dim(2), C = x.dim(3);
  const int Ho = grad.dim(1), Wo = grad.dim(2), F = grad.dim(3);
  const ConvGeom g = conv_geom(H, W, kh, kw, stride);
  Tensor dk({kh, kw, C, F});
  for (int b = 0; b < B; ++b)
    for (int oi = 0; oi < Ho; ++oi)
      for (int oj = 0; oj < Wo; ++oj) {
        const double* grow = grad.data() + grad.idx4(b, oi, oj, 0);
        for (int ki = 0; ki < kh; ++ki) {
          const int i = oi * stride + ki - g.pad_top;
          if (i < 0 || i >= H) continue;
          for (int kj = 0; kj < kw; ++kj) {
            const int j = oj * stride + kj - g.pad_left;
            if (j < 0 || j >= W) continue;
            const double* xrow = x.data() + x.idx4(b, i, j, 0);
            double* krow = dk.data() + (static_cast<int64_t>(ki) * kw + kj) * C * F;
            for (int c = 0; c < C; ++c) {
              const double xv = xrow[c];
              if (xv == 0.0) continue;
              double* kf = krow + static_cast<int64_t>(c) * F;
              for (int f = 0; f < F; ++f) kf[f] += xv * grow[f];
            }
          }
        }
      }
  return dk;
}

void require_image(const Tensor& t, const char* what) {
  if (t.rank() != 4)
    throw DimensionError(std::string(what) + " expects a [B,H,W,C] batch, got " +
                         shape_str(t.shape()));
}

}  // namespace

Val Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return Val{this, static_cast<int>(nodes_.size() - 1)};
}

Val Tape::leaf(Tensor t) {
  Node n;
  n.op = Op::Leaf;
  n.value = std::move(t);
  return push(std::move(n));
}

Val Tape::param(const Tensor& t, int slot) {
  auto it = param_nodes_.find(slot);
  if (it != param_nodes_.end()) return Val{this, it->second};
  Node n;
  n.op = Op::Param;
  n.slot = slot;
  n.value = t;
  Val v = push(std::move(n));
  param_nodes_[slot] = v.idx;
  return v;
}

Val Tape::matmul(Val a, Val b) {
  Node n;
  n.op = Op::MatMul;
  n.a = a.idx;
  n.b = b.idx;
  matmul_into(value(a), value(b), n.value);
  return push(std::move(n));
}

Val Tape::matmul_tb(Val a, Val b) {
  Node n;
  n.op = Op::MatMulTB;
  n.a = a.idx;
  n.b = b.idx;
  matmul_tb_into(value(a), value(b), n.value);
  return push(std::move(n));
}

namespace {
void check_elementwise(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b) && !a.is_scalar() && !b.is_scalar())
    throw DimensionError(std::string(what) + " shape mismatch: " + shape_str(a.shape()) +
                         " vs " + shape_str(b.shape()));
}
}  // namespace

Val Tape::add(Val a, Val b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  check_elementwise(ta, tb, "add");
  Node n;
  n.op = Op::Add;
  n.a = a.idx;
  n.b = b.idx;
  if (ta.is_scalar() && !tb.is_scalar()) {
    n.value = tb;
    for (auto& v : n.value.vals()) v += ta[0];
  } else {
    n.value = ta;
    if (tb.is_scalar())
      for (auto& v : n.value.vals()) v += tb[0];
    else
      for (int64_t i = 0; i < ta.size(); ++i) n.value[i] += tb[i];
  }
  return push(std::move(n));
}

Val Tape::sub(Val a, Val b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  check_elementwise(ta, tb, "sub");
  Node n;
  n.op = Op::Sub;
  n.a = a.idx;
  n.b = b.idx;
  if (ta.is_scalar() && !tb.is_scalar()) {
    n.value = tb;
    for (auto& v : n.value.vals()) v = ta[0] - v;
  } else {
    n.value = ta;
    if (tb.is_scalar())
      for (auto& v : n.value.vals()) v -= tb[0];
    else
      for (int64_t i = 0; i < ta.size(); ++i) n.value[i] -= tb[i];
  }
  return push(std::move(n));
}

Val Tape::mul(Val a, Val b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  check_elementwise(ta, tb, "mul");
  Node n;
  n.op = Op::Mul;
  n.a = a.idx;
  n.b = b.idx;
  if (ta.is_scalar() && !tb.is_scalar()) {
    n.value = tb;
    for (auto& v : n.value.vals()) v *= ta[0];
  } else {
    n.value = ta;
    if (tb.is_scalar())
      for (auto& v : n.value.vals()) v *= tb[0];
    else
      for (int64_t i = 0; i < ta.size(); ++i) n.value[i] *= tb[i];
  }
  return push(std::move(n));
}

Val Tape::add_rowvec(Val m, Val row) {
  const Tensor& tm = value(m);
  const Tensor& tr = value(row);
  if (tm.rank() != 2 || tr.size() != tm.dim(1))
    throw DimensionError("add_rowvec shape mismatch: " + shape_str(tm.shape()) + " + " +
                         shape_str(tr.shape()));
  Node n;
  n.op = Op::AddRowVec;
  n.a = m.idx;
  n.b = row.idx;
  n.value = tm;
  const int B = tm.dim(0), c = tm.dim(1);
  for (int i = 0; i < B; ++i)
    for (int j = 0; j < c; ++j) n.value.at(i, j) += tr[j];
  return push(std::move(n));
}

Val Tape::add_chanvec(Val img, Val chan) {
  const Tensor& ti = value(img);
  const Tensor& tc = value(chan);
  require_image(ti, "add_chanvec");
  if (tc.size() != ti.dim(3))
    throw DimensionError("add_chanvec channel mismatch: " + shape_str(ti.shape()) + " + " +
                         shape_str(tc.shape()));
  Node n;
  n.op = Op::AddChanVec;
  n.a = img.idx;
  n.b = chan.idx;
  n.value = ti;
  const int C = ti.dim(3);
  double* p = n.value.data();
  for (int64_t i = 0; i < n.value.size(); ++i) p[i] += tc[i % C];
  return push(std::move(n));
}

Val Tape::scale(Val a, double c) {
  Node n;
  n.op = Op::Scale;
  n.a = a.idx;
  n.c0 = c;
  n.value = value(a);
  for (auto& v : n.value.vals()) v *= c;
  return push(std::move(n));
}

Val Tape::log(Val a) {
  Node n;
  n.op = Op::Log;
  n.a = a.idx;
  n.value = value(a);
  for (auto& v : n.value.vals()) v = std::log(std::max(v, kLogEps));
  return push(std::move(n));
}

Val Tape::exp(Val a) {
  Node n;
  n.op = Op::Exp;
  n.a = a.idx;
  n.value = value(a);
  for (auto& v : n.value.vals()) v = std::exp(v);
  return push(std::move(n));
}

Val Tape::square(Val a) {
  Node n;
  n.op = Op::Square;
  n.a = a.idx;
  n.value = value(a);
  for (auto& v : n.value.vals()) v *= v;
  return push(std::move(n));
}

Val Tape::clamp(Val a, double lo, double hi) {
  Node n;
  n.op = Op::Clamp;
  n.a = a.idx;
  n.c0 = lo;
  n.c1 = hi;
  n.value = value(a);
  for (auto& v : n.value.vals()) v = std::min(std::max(v, lo), hi);
  return push(std::move(n));
}

Val Tape::activation(Act k, Val a) {
  Node n;
  n.op = Op::Act;
  n.act = k;
  n.a = a.idx;
  n.value = value(a);
  switch (k) {
    case Act::Sigmoid:
      for (auto& v : n.value.vals()) v = sigmoid(v);
      break;
    case Act::Relu:
      for (auto& v : n.value.vals()) v = v > 0 ? v : 0.0;
      break;
    case Act::Tanh:
      for (auto& v : n.value.vals()) v = std::tanh(v);
      break;
    case Act::Linear:
      break;
  }
  return push(std::move(n));
}

Val Tape::relu_mask(Val a) {
  Node n;
  n.op = Op::ReluMask;
  n.a = a.idx;
  n.value = value(a);
  for (auto& v : n.value.vals()) v = v > 0 ? 1.0 : 0.0;
  return push(std::move(n));
}

Val Tape::sum(Val a) {
  Node n;
  n.op = Op::Sum;
  n.a = a.idx;
  double s = 0;
  for (double v : value(a).vals()) s += v;
  n.value = Tensor::scalar(s);
  return push(std::move(n));
}

Val Tape::mean(Val a) {
  Node n;
  n.op = Op::Mean;
  n.a = a.idx;
  double s = 0;
  for (double v : value(a).vals()) s += v;
  n.value = Tensor::scalar(s / static_cast<double>(value(a).size()));
  return push(std::move(n));
}

Val Tape::mean_rows(Val a) {
  const Tensor& t = value(a);
  if (t.rank() != 2) throw DimensionError("mean_rows expects a matrix, got " + shape_str(t.shape()));
  Node n;
  n.op = Op::MeanRows;
  n.a = a.idx;
  const int B = t.dim(0), c = t.dim(1);
  n.value = Tensor({c});
  for (int i = 0; i < B; ++i)
    for (int j = 0; j < c; ++j) n.value[j] += t.at(i, j);
  for (auto& v : n.value.vals()) v /= B;
  return push(std::move(n));
}

Val Tape::slice_cols(Val a, int c0, int c1) {
  const Tensor& t = value(a);
  if (t.rank() != 2 || c0 < 0 || c1 > t.dim(1) || c0 >= c1)
    throw DimensionError("slice_cols [" + std::to_string(c0) + "," + std::to_string(c1) +
                         ") invalid for " + shape_str(t.shape()));
  Node n;
  n.op = Op::SliceCols;
  n.a = a.idx;
  n.i0 = c0;
  n.i1 = c1;
  const int B = t.dim(0), w = c1 - c0;
  n.value = Tensor({B, w});
  for (int i = 0; i < B; ++i)
    for (int j = 0; j < w; ++j) n.value.at(i, j) = t.at(i, c0 + j);
  return push(std::move(n));
}

Val Tape::reshape(Val a, Shape s) {
  Node n;
  n.op = Op::Reshape;
  n.a = a.idx;
  n.value = value(a).reshaped(std::move(s));
  return push(std::move(n));
}

Val Tape::conv2d(Val x, Val kernels, int stride) {
  if (stride < 1) throw ContractError("conv2d stride must be >= 1");
  const Tensor& tx = value(x);
  const Tensor& tk = value(kernels);
  require_image(tx, "conv2d");
  if (tk.rank() != 4 || tk.dim(2) != tx.dim(3))
    throw DimensionError("conv2d kernel " + shape_str(tk.shape()) + " incompatible with input " +
                         shape_str(tx.shape()));
  Node n;
  n.op = Op::Conv2d;
  n.a = x.idx;
  n.b = kernels.idx;
  n.i0 = stride;
  n.value = conv_fwd(tx, tk, stride);
  return push(std::move(n));
}

Val Tape::deconv2d(Val x, Val kernels, int stride) {
  if (stride < 1) throw ContractError("deconv2d stride must be >= 1");
  const Tensor& tx = value(x);
  const Tensor& tk = value(kernels);
  require_image(tx, "deconv2d");
  if (tk.rank() != 4 || tk.dim(3) != tx.dim(3))
    throw DimensionError("deconv2d kernel " + shape_str(tk.shape()) + " incompatible with input " +
                         shape_str(tx.shape()));
  Node n;
  n.op = Op::Deconv2d;
  n.a = x.idx;
  n.b = kernels.idx;
  n.i0 = stride;
  n.value = conv_bwd_input(tx, tk, stride, tx.dim(1) * stride, tx.dim(2) * stride);
  return push(std::move(n));
}

Val Tape::maxpool2(Val x) {
  const Tensor& t = value(x);
  require_image(t, "maxpool2");
  const int B = t.dim(0), H = t.dim(1), W = t.dim(2), C = t.dim(3);
  const int Ho = (H + 1) / 2, Wo = (W + 1) / 2;
  Node n;
  n.op = Op::MaxPool2;
  n.a = x.idx;
  n.value = Tensor({B, Ho, Wo, C});
  n.route.assign(static_cast<size_t>(n.value.size()), -1);
  int64_t o = 0;
  for (int b = 0; b < B; ++b)
    for (int oi = 0; oi < Ho; ++oi)
      for (int oj = 0; oj < Wo; ++oj)
        for (int c = 0; c < C; ++c, ++o) {
          // Odd dims are zero-padded bottom/right; padded cells may win the
          // max but route no gradient. First max in row-major order wins ties.
          double best = -std::numeric_limits<double>::infinity();
          int32_t best_idx = -1;
          for (int ki = 0; ki < 2; ++ki)
            for (int kj = 0; kj < 2; ++kj) {
              const int i = oi * 2 + ki, j = oj * 2 + kj;
              const bool inside = i < H && j < W;
              const double v = inside ? t.at4(b, i, j, c) : 0.0;
              if (v > best) {
                best = v;
                best_idx = inside ? static_cast<int32_t>(t.idx4(b, i, j, c)) : -1;
              }
            }
          n.value[o] = best;
          n.route[static_cast<size_t>(o)] = best_idx;
        }
  return push(std::move(n));
}

Val Tape::upsample2(Val x) {
  const Tensor& t = value(x);
  require_image(t, "upsample2");
  const int B = t.dim(0), H = t.dim(1), W = t.dim(2), C = t.dim(3);
  Node n;
  n.op = Op::Upsample2;
  n.a = x.idx;
  n.value = Tensor({B, H * 2, W * 2, C});
  for (int b = 0; b < B; ++b)
    for (int i = 0; i < H * 2; ++i)
      for (int j = 0; j < W * 2; ++j)
        for (int c = 0; c < C; ++c) n.value.at4(b, i, j, c) = t.at4(b, i / 2, j / 2, c);
  return push(std::move(n));
}

GradientMap Tape::backward(Val scalar_output) {
  if (scalar_output.tape != this || scalar_output.idx < 0)
    throw ContractError("backward called with a value from another tape");
  const Node& out = nodes_[static_cast<size_t>(scalar_output.idx)];
  if (out.value.size() != 1)
    throw ContractError("backward requires a scalar output, got shape " +
                        shape_str(out.value.shape()));

  std::vector<Tensor> adj(nodes_.size());
  std::vector<char> touched(nodes_.size(), 0);
  auto acc = [&](int idx, const Tensor& g) {
    if (!touched[static_cast<size_t>(idx)]) {
      adj[static_cast<size_t>(idx)] = g;
      touched[static_cast<size_t>(idx)] = 1;
    } else {
      Tensor& t = adj[static_cast<size_t>(idx)];
      for (int64_t i = 0; i < t.size(); ++i) t[i] += g[i];
    }
  };

  adj[static_cast<size_t>(scalar_output.idx)] = Tensor(out.value.shape());
  adj[static_cast<size_t>(scalar_output.idx)][0] = 1.0;
  touched[static_cast<size_t>(scalar_output.idx)] = 1;

  for (int idx = scalar_output.idx; idx >= 0; --idx) {
    if (!touched[static_cast<size_t>(idx)]) continue;
    const Node& n = nodes_[static_cast<size_t>(idx)];
    const Tensor& g = adj[static_cast<size_t>(idx)];
    const Tensor* va = n.a >= 0 ? &nodes_[static_cast<size_t>(n.a)].value : nullptr;
    const Tensor* vb = n.b >= 0 ? &nodes_[static_cast<size_t>(n.b)].value : nullptr;

    switch (n.op) {
      case Op::Leaf:
      case Op::Param:
      case Op::ReluMask:
        break;
      case Op::MatMul: {
        Tensor da, db;
        matmul_tb_into(g, *vb, da);
        matmul_ta_into(*va, g, db);
        acc(n.a, da);
        acc(n.b, db);
        break;
      }
      case Op::MatMulTB: {
        Tensor da, db;
        matmul_into(g, *vb, da);
        matmul_ta_into(g, *va, db);
        acc(n.a, da);
        acc(n.b, db);
        break;
      }
      case Op::Add:
      case Op::Sub: {
        const double sb = n.op == Op::Sub ? -1.0 : 1.0;
        auto side = [&](int tgt, const Tensor& vt, double sgn) {
          if (vt.is_scalar() && !g.is_scalar()) {
            double s = 0;
            for (double v : g.vals()) s += v;
            acc(tgt, Tensor(vt.shape(), {s * sgn}));
          } else if (sgn == 1.0) {
            acc(tgt, g);
          } else {
            Tensor d = g;
            for (auto& v : d.vals()) v = -v;
            acc(tgt, d);
          }
        };
        side(n.a, *va, 1.0);
        side(n.b, *vb, sb);
        break;
      }
      case Op::Mul: {
        auto side = [&](int tgt, const Tensor& self, const Tensor& other) {
          if (self.is_scalar() && !g.is_scalar()) {
            double s = 0;
            for (int64_t i = 0; i < g.size(); ++i) s += g[i] * other[i];
            acc(tgt, Tensor(self.shape(), {s}));
          } else if (other.is_scalar() && !g.is_scalar()) {
            Tensor d = g;
            for (auto& v : d.vals()) v *= other[0];
            acc(tgt, d);
          } else {
            Tensor d = g;
            for (int64_t i = 0; i < d.size(); ++i) d[i] *= other[i];
            acc(tgt, d);
          }
        };
        side(n.a, *va, *vb);
        side(n.b, *vb, *va);
        break;
      }
      case Op::AddRowVec: {
        acc(n.a, g);
        const int B = g.dim(0), c = g.dim(1);
        Tensor dr(vb->shape());
        for (int i = 0; i < B; ++i)
          for (int j = 0; j < c; ++j) dr[j] += g.at(i, j);
        acc(n.b, dr);
        break;
      }
      case Op::AddChanVec: {
        acc(n.a, g);
        const int C = va->dim(3);
        Tensor dc(vb->shape());
        for (int64_t i = 0; i < g.size(); ++i) dc[i % C] += g[i];
        acc(n.b, dc);
        break;
      }
      case Op::Scale: {
        Tensor d = g;
        for (auto& v : d.vals()) v *= n.c0;
        acc(n.a, d);
        break;
      }
      case Op::Log: {
        Tensor d = g;
        for (int64_t i = 0; i < d.size(); ++i) d[i] = (*va)[i] > kLogEps ? d[i] / (*va)[i] : 0.0;
        acc(n.a, d);
        break;
      }
      case Op::Exp: {
        Tensor d = g;
        for (int64_t i = 0; i < d.size(); ++i) d[i] *= n.value[i];
        acc(n.a, d);
        break;
      }
      case Op::Square: {
        Tensor d = g;
        for (int64_t i = 0; i < d.size(); ++i) d[i] *= 2.0 * (*va)[i];
        acc(n.a, d);
        break;
      }
      case Op::Clamp: {
        Tensor d = g;
        for (int64_t i = 0; i < d.size(); ++i)
          if ((*va)[i] <= n.c0 || (*va)[i] >= n.c1) d[i] = 0.0;
        acc(n.a, d);
        break;
      }
      case Op::Act: {
        Tensor d = g;
        switch (n.act) {
          case Act::Sigmoid:
            for (int64_t i = 0; i < d.size(); ++i) d[i] *= n.value[i] * (1.0 - n.value[i]);
            break;
          case Act::Relu:
            for (int64_t i = 0; i < d.size(); ++i)
              if ((*va)[i] <= 0) d[i] = 0.0;
            break;
          case Act::Tanh:
            for (int64_t i = 0; i < d.size(); ++i) d[i] *= 1.0 - n.value[i] * n.value[i];
            break;
          case Act::Linear:
            break;
        }
        acc(n.a, d);
        break;
      }
      case Op::Sum: {
        acc(n.a, Tensor::full(va->shape(), g[0]));
        break;
      }
      case Op::Mean: {
        acc(n.a, Tensor::full(va->shape(), g[0] / static_cast<double>(va->size())));
        break;
      }
      case Op::MeanRows: {
        const int B = va->dim(0), c = va->dim(1);
        Tensor d(va->shape());
        for (int i = 0; i < B; ++i)
          for (int j = 0; j < c; ++j) d.at(i, j) = g[j] / B;
        acc(n.a, d);
        break;
      }
      case Op::SliceCols: {
        Tensor d(va->shape());
        const int B = d.dim(0), w = n.i1 - n.i0;
        for (int i = 0; i < B; ++i)
          for (int j = 0; j < w; ++j) d.at(i, n.i0 + j) = g.at(i, j);
        acc(n.a, d);
        break;
      }
      case Op::Reshape: {
        acc(n.a, g.reshaped(va->shape()));
        break;
      }
      case Op::Conv2d: {
        acc(n.a, conv_bwd_input(g, *vb, n.i0, va->dim(1), va->dim(2)));
        acc(n.b, conv_bwd_kernel(*va, g, n.i0, vb->dim(0), vb->dim(1)));
        break;
      }
      case Op::Deconv2d: {
        acc(n.a, conv_fwd(g, *vb, n.i0));
        acc(n.b, conv_bwd_kernel(g, *va, n.i0, vb->dim(0), vb->dim(1)));
        break;
      }
      case Op::MaxPool2: {
        Tensor d(va->shape());
        for (int64_t o = 0; o < g.size(); ++o) {
          const int32_t src = n.route[static_cast<size_t>(o)];
          if (src >= 0) d[src] += g[o];
        }
        acc(n.a, d);
        break;
      }
      case Op::Upsample2: {
        const int B = va->dim(0), H = va->dim(1), W = va->dim(2), C = va->dim(3);
        Tensor d(va->shape());
        for (int b = 0; b < B; ++b)
          for (int i = 0; i < H * 2; ++i)
            for (int j = 0; j < W * 2; ++j)
              for (int c = 0; c < C; ++c) d.at4(b, i / 2, j / 2, c) += g.at4(b, i, j, c);
        acc(n.a, d);
        break;
      }
    }
  }

  GradientMap gm;
  for (auto [slot, node_idx] : param_nodes_) {
    if (touched[static_cast<size_t>(node_idx)])
      gm.set(slot, adj[static_cast<size_t>(node_idx)]);
    else
      gm.set(slot, Tensor(nodes_[static_cast<size_t>(node_idx)].value.shape()));
  }
  return gm;
}

double grad_check(const std::function<Val(Tape&, const std::vector<Val>&)>& build,
                  const std::vector<Tensor>& params, double h) {
  if (h <= 0) throw ContractError("grad_check requires h > 0");
  auto eval = [&](const std::vector<Tensor>& p) {
    Tape t;
    std::vector<Val> vs;
    vs.reserve(p.size());
    for (size_t i = 0; i < p.size(); ++i) vs.push_back(t.param(p[i], static_cast<int>(i)));
    Val out = build(t, vs);
    if (out.value().size() != 1) throw ContractError("grad_check objective must be scalar");
    return out.value()[0];
  };

  Tape tape;
  std::vector<Val> vs;
  vs.reserve(params.size());
  for (size_t i = 0; i < params.size(); ++i)
    vs.push_back(tape.param(params[i], static_cast<int>(i)));
  GradientMap gm = tape.backward(build(tape, vs));

  double worst = 0.0;
  std::vector<Tensor> work = params;
  for (size_t i = 0; i < params.size(); ++i) {
    const Tensor& grad = gm.at(static_cast<int>(i));
    for (int64_t j = 0; j < params[i].size(); ++j) {
      const double orig = work[i][j];
      work[i][j] = orig + h;
      const double fp = eval(work);
      work[i][j] = orig - h;
      const double fm = eval(work);
      work[i][j] = orig;
      const double fd = (fp - fm) / (2.0 * h);
      const double g = grad[j];
      const double err = std::abs(g - fd) / std::max({std::abs(g), std::abs(fd), 1e-8});
      worst = std::max(worst, err);
    }
  }
  return worst;
}

}  // namespace aewb

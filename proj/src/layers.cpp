#include "aewb/layers.hpp"

#include <cmath>

namespace aewb {

const char* layer_kind_name(LayerKind k) {
  switch (k) {
    case LayerKind::Dense: return "dense";
    case LayerKind::Conv: return "conv";
    case LayerKind::Deconv: return "deconv";
    case LayerKind::MaxPool: return "maxpool";
    case LayerKind::Upsample: return "upsample";
    case LayerKind::GaussianNoise: return "gaussian-noise";
    case LayerKind::Sampling: return "sampling";
    case LayerKind::Reshape: return "reshape";
  }
  return "dense";
}

LayerKind layer_kind_from_name(const std::string& s) {
  if (s == "dense") return LayerKind::Dense;
  if (s == "conv") return LayerKind::Conv;
  if (s == "deconv") return LayerKind::Deconv;
  if (s == "maxpool") return LayerKind::MaxPool;
  if (s == "upsample") return LayerKind::Upsample;
  if (s == "gaussian-noise") return LayerKind::GaussianNoise;
  if (s == "sampling") return LayerKind::Sampling;
  if (s == "reshape") return LayerKind::Reshape;
  throw ContractError("unknown layer kind: " + s);
}

LayerSpec LayerSpec::dense(int units, Act act) {
  LayerSpec s;
  s.kind = LayerKind::Dense;
  s.units = units;
  s.act = act;
  return s;
}

LayerSpec LayerSpec::conv(int kh, int kw, int filters, int stride, Act act) {
  LayerSpec s;
  s.kind = LayerKind::Conv;
  s.kh = kh;
  s.kw = kw;
  s.filters = filters;
  s.stride = stride;
  s.act = act;
  return s;
}

LayerSpec LayerSpec::deconv(int kh, int kw, int filters, int stride, Act act) {
  LayerSpec s = conv(kh, kw, filters, stride, act);
  s.kind = LayerKind::Deconv;
  return s;
}

LayerSpec LayerSpec::maxpool() {
  LayerSpec s;
  s.kind = LayerKind::MaxPool;
  return s;
}

LayerSpec LayerSpec::upsample() {
  LayerSpec s;
  s.kind = LayerKind::Upsample;
  return s;
}

LayerSpec LayerSpec::gaussian_noise(double sigma) {
  LayerSpec s;
  s.kind = LayerKind::GaussianNoise;
  s.sigma = sigma;
  return s;
}

LayerSpec LayerSpec::sampling(int units) {
  LayerSpec s;
  s.kind = LayerKind::Sampling;
  s.units = units;
  return s;
}

LayerSpec LayerSpec::reshape(Shape target) {
  LayerSpec s;
  s.kind = LayerKind::Reshape;
  s.target = std::move(target);
  return s;
}

namespace {

Tensor glorot(Shape shape, int fan_in, int fan_out, Rng& rng) {
  Tensor t(std::move(shape));
  const double limit = std::sqrt(6.0 / (fan_in + fan_out));
  for (auto& v : t.vals()) v = rng.uniform(-limit, limit);
  return t;
}

std::string layer_err(int l, const LayerSpec& s, const std::string& msg) {
  return "layer " + std::to_string(l) + " (" + layer_kind_name(s.kind) + "): " + msg;
}

}  // namespace

Network::Network(Shape input_shape, std::vector<LayerSpec> specs, int code_index, Rng& init_rng)
    : input_shape_(std::move(input_shape)), specs_(std::move(specs)), code_index_(code_index) {
  const int L = static_cast<int>(specs_.size());
  if (L == 0) throw ContractError("network needs at least one layer");
  if (code_index_ <= 0 || code_index_ >= L)
    throw ContractError("code_index " + std::to_string(code_index_) +
                        " out of range for " + std::to_string(L) + " layers");

  Shape cur = input_shape_;
  for (int l = 0; l < L; ++l) {
    const LayerSpec& s = specs_[static_cast<size_t>(l)];
    std::vector<int> slots;
    switch (s.kind) {
      case LayerKind::Dense: {
        if (s.units <= 0) throw ContractError(layer_err(l, s, "units must be positive"));
        const int n_in = static_cast<int>(shape_size(cur));
        slots.push_back(static_cast<int>(params_.size()));
        params_.push_back(glorot({n_in, s.units}, n_in, s.units, init_rng));
        slots.push_back(static_cast<int>(params_.size()));
        params_.push_back(Tensor({s.units}));
        cur = {s.units};
        break;
      }
      case LayerKind::Conv: {
        if (cur.size() != 3)
          throw DimensionError(layer_err(l, s, "expects [H,W,C] input, got " + shape_str(cur)));
        if (s.kh < 1 || s.kw < 1 || s.filters < 1 || s.stride < 1)
          throw ContractError(layer_err(l, s, "kernel, filters and stride must be positive"));
        const int C = cur[2];
        slots.push_back(static_cast<int>(params_.size()));
        params_.push_back(glorot({s.kh, s.kw, C, s.filters}, s.kh * s.kw * C,
                                 s.kh * s.kw * s.filters, init_rng));
        slots.push_back(static_cast<int>(params_.size()));
        params_.push_back(Tensor({s.filters}));
        cur = {(cur[0] + s.stride - 1) / s.stride, (cur[1] + s.stride - 1) / s.stride, s.filters};
        break;
      }
      case LayerKind::Deconv: {
        if (cur.size() != 3)
          throw DimensionError(layer_err(l, s, "expects [H,W,C] input, got " + shape_str(cur)));
        if (s.kh < 1 || s.kw < 1 || s.filters < 1 || s.stride < 1)
          throw ContractError(layer_err(l, s, "kernel, filters and stride must be positive"));
        const int C = cur[2];  // forward maps C input channels to s.filters
        slots.push_back(static_cast<int>(params_.size()));
        params_.push_back(glorot({s.kh, s.kw, s.filters, C}, s.kh * s.kw * C,
                                 s.kh * s.kw * s.filters, init_rng));
        slots.push_back(static_cast<int>(params_.size()));
        params_.push_back(Tensor({s.filters}));
        cur = {cur[0] * s.stride, cur[1] * s.stride, s.filters};
        break;
      }
      case LayerKind::MaxPool: {
        if (cur.size() != 3)
          throw DimensionError(layer_err(l, s, "expects [H,W,C] input, got " + shape_str(cur)));
        cur = {(cur[0] + 1) / 2, (cur[1] + 1) / 2, cur[2]};
        break;
      }
      case LayerKind::Upsample: {
        if (cur.size() != 3)
          throw DimensionError(layer_err(l, s, "expects [H,W,C] input, got " + shape_str(cur)));
        cur = {cur[0] * 2, cur[1] * 2, cur[2]};
        break;
      }
      case LayerKind::GaussianNoise: {
        if (s.sigma < 0) throw ContractError(layer_err(l, s, "sigma must be >= 0"));
        break;
      }
      case LayerKind::Sampling: {
        const int64_t w = shape_size(cur);
        if (cur.size() != 1 || w % 2 != 0)
          throw DimensionError(layer_err(l, s, "expects a flat even-width input, got " +
                                                   shape_str(cur)));
        if (s.units != w / 2)
          throw ContractError(layer_err(l, s, "units must equal half the input width"));
        cur = {s.units};
        break;
      }
      case LayerKind::Reshape: {
        if (shape_size(s.target) != shape_size(cur))
          throw DimensionError(layer_err(l, s, "cannot reshape " + shape_str(cur) + " to " +
                                                   shape_str(s.target)));
        cur = s.target;
        break;
      }
    }
    slots_.push_back(std::move(slots));
    out_shapes_.push_back(cur);
  }

  if (cur != input_shape_)
    throw DimensionError("network output shape " + shape_str(cur) +
                         " does not close back to input shape " + shape_str(input_shape_));
}

ForwardTrace Network::forward(Tape& tape, Val x, Rng* rng) const {
  return run(tape, x, rng, mode_);
}

ForwardTrace Network::run(Tape& tape, Val x, Rng* rng, Mode mode) const {
  const Tensor& tx = x.value();
  if (tx.rank() < 2)
    throw DimensionError("forward expects a batched input, got " + shape_str(tx.shape()));
  {
    Shape inst(tx.shape().begin() + 1, tx.shape().end());
    if (shape_size(inst) != shape_size(input_shape_))
      throw DimensionError("forward input instance shape " + shape_str(inst) +
                           " incompatible with network input " + shape_str(input_shape_));
  }

  ForwardTrace tr;
  tr.input = x;
  Val cur = x;
  for (int l = 0; l < layer_count(); ++l) cur = apply_layer(tape, l, cur, rng, mode, &tr);

  tr.code = tr.outputs[static_cast<size_t>(code_index_ - 1)];
  tr.output = cur;
  return tr;
}

Val Network::apply_layer(Tape& tape, int l, Val cur, Rng* rng, Mode mode,
                         ForwardTrace* tr) const {
  const int B = cur.value().dim(0);
  const LayerSpec& s = specs_[static_cast<size_t>(l)];
  const auto& slots = slots_[static_cast<size_t>(l)];
  std::vector<Val> pvals;
  for (int slot : slots) pvals.push_back(tape.param(params_[static_cast<size_t>(slot)], slot));

  switch (s.kind) {
    case LayerKind::Dense: {
      if (cur.value().rank() != 2)
        cur = tape.reshape(cur, {B, static_cast<int>(cur.value().size() / B)});
      cur = tape.add_rowvec(tape.matmul(cur, pvals[0]), pvals[1]);
      if (s.act != Act::Linear) cur = tape.activation(s.act, cur);
      break;
    }
    case LayerKind::Conv: {
      cur = tape.add_chanvec(tape.conv2d(cur, pvals[0], s.stride), pvals[1]);
      if (s.act != Act::Linear) cur = tape.activation(s.act, cur);
      break;
    }
    case LayerKind::Deconv: {
      cur = tape.add_chanvec(tape.deconv2d(cur, pvals[0], s.stride), pvals[1]);
      if (s.act != Act::Linear) cur = tape.activation(s.act, cur);
      break;
    }
    case LayerKind::MaxPool:
      cur = tape.maxpool2(cur);
      break;
    case LayerKind::Upsample:
      cur = tape.upsample2(cur);
      break;
    case LayerKind::GaussianNoise: {
      if (mode == Mode::Train && s.sigma > 0) {
        if (rng == nullptr)
          throw ContractError("gaussian-noise layer needs a PRNG in train mode");
        Tensor noise(cur.value().shape());
        for (auto& v : noise.vals()) v = rng->normal(0.0, s.sigma);
        cur = tape.add(cur, tape.leaf(std::move(noise)));
      }
      break;
    }
    case LayerKind::Sampling: {
      const int k = s.units;
      Val mu = tape.slice_cols(cur, 0, k);
      Val logvar = tape.slice_cols(cur, k, 2 * k);
      if (tr) {
        tr->mu = mu;
        tr->logvar = logvar;
      }
      if (mode == Mode::Train) {
        if (rng == nullptr) throw ContractError("sampling layer needs a PRNG in train mode");
        Tensor eps({B, k});
        for (auto& v : eps.vals()) v = rng->normal();
        cur = tape.add(mu, tape.mul(tape.exp(tape.scale(logvar, 0.5)), tape.leaf(std::move(eps))));
      } else {
        cur = mu;  // eval decodes the posterior mean
      }
      break;
    }
    case LayerKind::Reshape: {
      Shape full{B};
      full.insert(full.end(), s.target.begin(), s.target.end());
      cur = tape.reshape(cur, std::move(full));
      break;
    }
  }
  if (tr) {
    tr->outputs.push_back(cur);
    tr->params.push_back(std::move(pvals));
  }
  return cur;
}

Tensor Network::forward_values(const Tensor& x) const {
  Tape tape;
  return run(tape, tape.leaf(x), nullptr, Mode::Eval).output.value();
}

Tensor Network::encode_values(const Tensor& x) const {
  Tape tape;
  Val cur = tape.leaf(x);
  for (int l = 0; l < code_index_; ++l)
    cur = apply_layer(tape, l, cur, nullptr, Mode::Eval, nullptr);
  return cur.value();
}

Tensor Network::decode_values(const Tensor& z) const {
  if (z.rank() != 2) throw DimensionError("decode expects a [B,k] code batch");
  const Shape& code_shape = out_shapes_[static_cast<size_t>(code_index_ - 1)];
  if (z.dim(1) != static_cast<int>(shape_size(code_shape)))
    throw DimensionError("code width " + std::to_string(z.dim(1)) +
                         " does not match the network code size");
  Tape tape;
  Val cur = tape.leaf(z);
  for (int l = code_index_; l < layer_count(); ++l)
    cur = apply_layer(tape, l, cur, nullptr, Mode::Eval, nullptr);
  return cur.value();
}

}  // namespace aewb

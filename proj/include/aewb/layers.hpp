#pragma once

#include <optional>
#include <string>
#include <vector>

#include "aewb/autodiff.hpp"
#include "aewb/rng.hpp"
#include "aewb/tensor.hpp"

namespace aewb {

enum class LayerKind : uint8_t {
  Dense,
  Conv,
  Deconv,
  MaxPool,
  Upsample,
  GaussianNoise,
  Sampling,
  Reshape,
};

const char* layer_kind_name(LayerKind k);
LayerKind layer_kind_from_name(const std::string& s);

enum class Mode : uint8_t { Train, Eval };

struct LayerSpec {
  LayerKind kind = LayerKind::Dense;
  int units = 0;  // dense output width; sampling latent width
  Act act = Act::Linear;
  int kh = 0, kw = 0;  // conv/deconv kernel size
  int filters = 0;     // conv/deconv output channels
  int stride = 1;
  double sigma = 0.0;  // gaussian-noise std
  Shape target;        // reshape target (per instance)

  static LayerSpec dense(int units, Act act);
  static LayerSpec conv(int kh, int kw, int filters, int stride, Act act);
  static LayerSpec deconv(int kh, int kw, int filters, int stride, Act act);
  static LayerSpec maxpool();
  static LayerSpec upsample();
  static LayerSpec gaussian_noise(double sigma);
  static LayerSpec sampling(int units);
  static LayerSpec reshape(Shape target);
};

/// Per-forward record of tape values: one post-activation output per layer,
/// the bound parameter Vals, and the sampler inputs when one is present.
struct ForwardTrace {
  Val input;
  std::vector<Val> outputs;
  std::vector<std::vector<Val>> params;
  Val code;
  Val output;
  Val mu, logvar;  // valid only when the network has a sampling layer
};

/// Ordered layer stack with an encoding position. Layers before code_index
/// form the encoder, the rest the decoder; the stack must map an instance
/// back to its own shape.
class Network {
 public:
  Network(Shape input_shape, std::vector<LayerSpec> specs, int code_index, Rng& init_rng);

  ForwardTrace forward(Tape& tape, Val x, Rng* rng) const;
  Tensor forward_values(const Tensor& x) const;  // eval-mode convenience
  // Run only the encoder stack (layers 0..code_index-1) or only the decoder
  // stack (code_index..L-1), in eval mode.
  Tensor encode_values(const Tensor& x) const;
  Tensor decode_values(const Tensor& z) const;

  Mode mode() const { return mode_; }
  void set_mode(Mode m) { mode_ = m; }

  int layer_count() const { return static_cast<int>(specs_.size()); }
  int code_index() const { return code_index_; }
  const LayerSpec& spec(int l) const { return specs_[static_cast<size_t>(l)]; }
  const Shape& input_shape() const { return input_shape_; }
  const Shape& out_shape(int l) const { return out_shapes_[static_cast<size_t>(l)]; }

  std::vector<Tensor>& params() { return params_; }
  const std::vector<Tensor>& params() const { return params_; }
  // Parameter slots used by layer l (indices into params()).
  const std::vector<int>& layer_slots(int l) const { return slots_[static_cast<size_t>(l)]; }

 private:
  ForwardTrace run(Tape& tape, Val x, Rng* rng, Mode mode) const;
  Val apply_layer(Tape& tape, int l, Val cur, Rng* rng, Mode mode, ForwardTrace* tr) const;

  Shape input_shape_;
  std::vector<LayerSpec> specs_;
  int code_index_;
  Mode mode_ = Mode::Train;
  std::vector<Shape> out_shapes_;      // per instance, one per layer
  std::vector<Tensor> params_;         // flat, slot order
  std::vector<std::vector<int>> slots_;  // per layer, indices into params_
};

// Model serialization: binary container plus a JSON sidecar describing the
// architecture. load rebuilds the network from both files.
void save_model(const Network& net, const std::string& bin_path, const std::string& json_path);
Network load_model(const std::string& bin_path, const std::string& json_path);

}  // namespace aewb

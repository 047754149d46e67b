#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "aewb/errors.hpp"
#include "aewb/layers.hpp"
#include "json.hpp"

namespace aewb {

static_assert(std::endian::native == std::endian::little,
              "model container stores little-endian f64");

namespace {

constexpr char kMagic[5] = {'A', 'E', 'W', 'B', '1'};

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is, const std::string& path) {
  T v;
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw IoError("truncated model file: " + path);
  return v;
}

void put_shape(std::ostream& os, const Shape& s) {
  put<uint32_t>(os, static_cast<uint32_t>(s.size()));
  for (int d : s) put<int32_t>(os, d);
}

Shape get_shape(std::istream& is, const std::string& path) {
  const uint32_t rank = get<uint32_t>(is, path);
  if (rank > 8) throw IoError("implausible tensor rank in model file: " + path);
  Shape s(rank);
  for (auto& d : s) d = get<int32_t>(is, path);
  return s;
}

void put_tensor(std::ostream& os, const Tensor& t) {
  put_shape(os, t.shape());
  os.write(reinterpret_cast<const char*>(t.data()),
           static_cast<std::streamsize>(t.size() * sizeof(double)));
}

Tensor get_tensor(std::istream& is, const std::string& path) {
  Shape s = get_shape(is, path);
  Tensor t(std::move(s));
  is.read(reinterpret_cast<char*>(t.data()),
          static_cast<std::streamsize>(t.size() * sizeof(double)));
  if (!is) throw IoError("truncated model file: " + path);
  return t;
}

nlohmann::json spec_to_json(const LayerSpec& s) {
  nlohmann::json j;
  j["kind"] = layer_kind_name(s.kind);
  switch (s.kind) {
    case LayerKind::Dense:
      j["units"] = s.units;
      j["activation"] = act_name(s.act);
      break;
    case LayerKind::Conv:
    case LayerKind::Deconv:
      j["kernel"] = {s.kh, s.kw};
      j["filters"] = s.filters;
      j["stride"] = s.stride;
      j["activation"] = act_name(s.act);
      break;
    case LayerKind::GaussianNoise:
      j["sigma"] = s.sigma;
      break;
    case LayerKind::Sampling:
      j["units"] = s.units;
      break;
    case LayerKind::Reshape:
      j["target"] = s.target;
      break;
    case LayerKind::MaxPool:
    case LayerKind::Upsample:
      break;
  }
  return j;
}

}  // namespace

void save_model(const Network& net, const std::string& bin_path, const std::string& json_path) {
  std::ofstream os(bin_path, std::ios::binary);
  if (!os) throw IoError("cannot write model file: " + bin_path);
  os.write(kMagic, sizeof(kMagic));
  put<uint32_t>(os, static_cast<uint32_t>(net.layer_count()));
  for (int l = 0; l < net.layer_count(); ++l) {
    const LayerSpec& s = net.spec(l);
    put<uint8_t>(os, static_cast<uint8_t>(s.kind));
    put_shape(os, net.out_shape(l));
    put<uint8_t>(os, static_cast<uint8_t>(s.act));
    put<int32_t>(os, s.units);
    put<int32_t>(os, s.kh);
    put<int32_t>(os, s.kw);
    put<int32_t>(os, s.filters);
    put<int32_t>(os, s.stride);
    put<double>(os, s.sigma);
    put_shape(os, s.target);
    const auto& slots = net.layer_slots(l);
    put<uint32_t>(os, static_cast<uint32_t>(slots.size()));
    for (int slot : slots) put_tensor(os, net.params()[static_cast<size_t>(slot)]);
  }
  if (!os) throw IoError("write failed: " + bin_path);
  os.close();

  nlohmann::json j;
  j["format"] = "AEWB1";
  j["input_shape"] = net.input_shape();
  j["code_index"] = net.code_index();
  j["layers"] = nlohmann::json::array();
  for (int l = 0; l < net.layer_count(); ++l) j["layers"].push_back(spec_to_json(net.spec(l)));
  std::ofstream js(json_path);
  if (!js) throw IoError("cannot write model sidecar: " + json_path);
  js << j.dump(2) << "\n";
}

Network load_model(const std::string& bin_path, const std::string& json_path) {
  std::ifstream js(json_path);
  if (!js) throw IoError("cannot read model sidecar: " + json_path);
  nlohmann::json j = nlohmann::json::parse(js);
  const Shape input_shape = j.at("input_shape").get<Shape>();
  const int code_index = j.at("code_index").get<int>();

  std::ifstream is(bin_path, std::ios::binary);
  if (!is) throw IoError("cannot read model file: " + bin_path);
  char magic[5];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IoError("bad model magic in " + bin_path);

  const uint32_t L = get<uint32_t>(is, bin_path);
  std::vector<LayerSpec> specs;
  std::vector<Tensor> params;
  for (uint32_t l = 0; l < L; ++l) {
    LayerSpec s;
    s.kind = static_cast<LayerKind>(get<uint8_t>(is, bin_path));
    get_shape(is, bin_path);  // recorded output shape; re-derived at build
    s.act = static_cast<Act>(get<uint8_t>(is, bin_path));
    s.units = get<int32_t>(is, bin_path);
    s.kh = get<int32_t>(is, bin_path);
    s.kw = get<int32_t>(is, bin_path);
    s.filters = get<int32_t>(is, bin_path);
    s.stride = get<int32_t>(is, bin_path);
    s.sigma = get<double>(is, bin_path);
    s.target = get_shape(is, bin_path);
    const uint32_t np = get<uint32_t>(is, bin_path);
    for (uint32_t p = 0; p < np; ++p) params.push_back(get_tensor(is, bin_path));
    specs.push_back(std::move(s));
  }

  Rng init(0);
  Network net(input_shape, std::move(specs), code_index, init);
  if (net.params().size() != params.size())
    throw IoError("parameter count mismatch in " + bin_path);
  for (size_t i = 0; i < params.size(); ++i) {
    if (!net.params()[i].same_shape(params[i]))
      throw IoError("parameter shape mismatch in " + bin_path);
    net.params()[i] = std::move(params[i]);
  }
  return net;
}

}  // namespace aewb

#include "aewb/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include "aewb/errors.hpp"

namespace aewb {

ImageSet image_set_from(std::vector<Tensor> images) {
  if (images.empty()) throw ContractError("image_set_from needs at least one image");
  const Shape& first = images[0].shape();
  if (first.size() != 3) throw DimensionError("images must be [H,W,C]");
  for (const auto& img : images)
    if (img.shape() != first)
      throw DimensionError("image set needs uniform shapes: " + shape_str(first) + " vs " +
                           shape_str(img.shape()));
  ImageSet set;
  set.images = Tensor({static_cast<int>(images.size()), first[0], first[1], first[2]});
  double* dst = set.images.data();
  for (const auto& img : images) {
    for (int64_t i = 0; i < img.size(); ++i) dst[i] = img[i];
    dst += img.size();
  }
  return set;
}

namespace {

// Reads the next whitespace-separated token, skipping '#' comments.
std::string pnm_token(const std::string& bytes, size_t& pos) {
  while (pos < bytes.size()) {
    const char c = bytes[pos];
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      ++pos;
    } else {
      break;
    }
  }
  const size_t start = pos;
  while (pos < bytes.size() && !std::isspace(static_cast<unsigned char>(bytes[pos]))) ++pos;
  if (start == pos) throw ParseError("truncated pnm header");
  return bytes.substr(start, pos - start);
}

int pnm_int(const std::string& bytes, size_t& pos, const char* what) {
  const std::string tok = pnm_token(bytes, pos);
  try {
    size_t used;
    const int v = std::stoi(tok, &used);
    if (used != tok.size() || v < 0) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    throw ParseError(std::string("bad pnm ") + what + ": '" + tok + "'");
  }
}

}  // namespace

Tensor read_pgm_ppm(const std::string& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') throw ParseError("bad pnm magic");
  const char kind = bytes[1];
  if (kind != '2' && kind != '3' && kind != '5' && kind != '6')
    throw ParseError(std::string("unsupported pnm magic: P") + kind);
  const bool color = kind == '3' || kind == '6';
  const bool raw = kind == '5' || kind == '6';
  const int C = color ? 3 : 1;

  size_t pos = 2;
  const int W = pnm_int(bytes, pos, "width");
  const int H = pnm_int(bytes, pos, "height");
  const int maxval = pnm_int(bytes, pos, "maxval");
  if (maxval != 255) throw ParseError("pnm maxval must be 255, got " + std::to_string(maxval));

  Tensor img({H, W, C});
  const int64_t count = img.size();
  if (raw) {
    ++pos;  // single whitespace after maxval
    if (bytes.size() - pos < static_cast<size_t>(count))
      throw ParseError("truncated pnm payload: need " + std::to_string(count) + " bytes, have " +
                       std::to_string(bytes.size() - pos));
    for (int64_t i = 0; i < count; ++i)
      img[i] = static_cast<unsigned char>(bytes[pos + static_cast<size_t>(i)]) / 255.0;
  } else {
    for (int64_t i = 0; i < count; ++i) {
      const int v = pnm_int(bytes, pos, "pixel");
      if (v > 255) throw ParseError("pnm pixel out of range: " + std::to_string(v));
      img[i] = v / 255.0;
    }
  }
  return img;
}

std::string write_pgm_ppm(const Tensor& image, bool raw) {
  if (image.rank() != 3 || (image.dim(2) != 1 && image.dim(2) != 3))
    throw DimensionError("write_pgm_ppm expects [H,W,1] or [H,W,3], got " +
                         shape_str(image.shape()));
  const int H = image.dim(0), W = image.dim(1), C = image.dim(2);
  const bool color = C == 3;
  std::string out = color ? (raw ? "P6" : "P3") : (raw ? "P5" : "P2");
  out += "\n" + std::to_string(W) + " " + std::to_string(H) + "\n255\n";
  auto to_byte = [](double v) {
    const double scaled = std::floor(v * 255.0 + 0.5);  // round half-up
    return static_cast<int>(std::min(255.0, std::max(0.0, scaled)));
  };
  if (raw) {
    for (int64_t i = 0; i < image.size(); ++i)
      out += static_cast<char>(static_cast<unsigned char>(to_byte(image[i])));
  } else {
    for (int i = 0; i < H; ++i) {
      for (int j = 0; j < W * C; ++j) {
        if (j) out += ' ';
        out += std::to_string(to_byte(image[static_cast<int64_t>(i) * W * C + j]));
      }
      out += '\n';
    }
  }
  return out;
}

Tensor read_image_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read image file: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return read_pgm_ppm(bytes);
}

void write_image_file(const Tensor& image, const std::string& path, bool raw) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write image file: " + path);
  const std::string bytes = write_pgm_ppm(image, raw);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed: " + path);
}

Tensor image_strip(const std::vector<Tensor>& images) {
  if (images.empty()) throw ContractError("image_strip needs at least one image");
  const Shape& s = images[0].shape();
  if (s.size() != 3) throw DimensionError("image_strip expects [H,W,C] tiles");
  for (const auto& img : images)
    if (img.shape() != s) throw DimensionError("image_strip needs uniform tile shapes");
  const int H = s[0], W = s[1], C = s[2];
  const int n = static_cast<int>(images.size());
  Tensor strip({H, W * n, C});
  for (int t = 0; t < n; ++t)
    for (int i = 0; i < H; ++i)
      for (int j = 0; j < W; ++j)
        for (int c = 0; c < C; ++c)
          strip[(static_cast<int64_t>(i) * W * n + (t * W + j)) * C + c] =
              images[static_cast<size_t>(t)][(static_cast<int64_t>(i) * W + j) * C + c];
  return strip;
}

}  // namespace aewb

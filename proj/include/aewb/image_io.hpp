#pragma once

#include <string>
#include <vector>

#include "aewb/tensor.hpp"

namespace aewb {

/// Uniform raster batch [B,H,W,C] with values in [0,1].
struct ImageSet {
  Tensor images;
  int bit_depth = 8;

  int count() const { return images.rank() == 4 ? images.dim(0) : 0; }
  int height() const { return images.dim(1); }
  int width() const { return images.dim(2); }
  int channels() const { return images.dim(3); }
};

ImageSet image_set_from(std::vector<Tensor> images);  // each [H,W,C]

// PGM (P2/P5) and PPM (P3/P6), maxval 255. Values are divided by 255 on
// read; write rounds half-up back to 8-bit.
Tensor read_pgm_ppm(const std::string& bytes);           // [H,W,C], C in {1,3}
std::string write_pgm_ppm(const Tensor& image, bool raw);

Tensor read_image_file(const std::string& path);
void write_image_file(const Tensor& image, const std::string& path, bool raw);

// Concatenates equally sized [H,W,C] images left to right.
Tensor image_strip(const std::vector<Tensor>& images);

}  // namespace aewb

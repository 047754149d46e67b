#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace aewb {

using Shape = std::vector<int>;

int64_t shape_size(const Shape& s);
std::string shape_str(const Shape& s);

struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Dense n-dimensional array of f64 values in row-major order.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape) : shape_(std::move(shape)), data_(shape_size(shape_), 0.0) {}
  Tensor(Shape shape, std::vector<double> data);

  static Tensor scalar(double v);
  static Tensor zeros(Shape shape) { return Tensor(std::move(shape)); }
  static Tensor full(Shape shape, double v);
  static Tensor vec(std::vector<double> v);

  const Shape& shape() const { return shape_; }
  int64_t size() const { return static_cast<int64_t>(data_.size()); }
  int dim(int i) const { return shape_[static_cast<size_t>(i)]; }
  int rank() const { return static_cast<int>(shape_.size()); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::vector<double>& vals() { return data_; }
  const std::vector<double>& vals() const { return data_; }

  double& operator[](int64_t i) { return data_[static_cast<size_t>(i)]; }
  double operator[](int64_t i) const { return data_[static_cast<size_t>(i)]; }

  // Matrix accessors; rank must be 2.
  double& at(int r, int c) { return data_[static_cast<size_t>(r) * shape_[1] + c]; }
  double at(int r, int c) const { return data_[static_cast<size_t>(r) * shape_[1] + c]; }

  // Image-batch accessors; rank must be 4, layout [B,H,W,C].
  int64_t idx4(int b, int i, int j, int c) const {
    return ((static_cast<int64_t>(b) * shape_[1] + i) * shape_[2] + j) * shape_[3] + c;
  }
  double& at4(int b, int i, int j, int c) { return data_[static_cast<size_t>(idx4(b, i, j, c))]; }
  double at4(int b, int i, int j, int c) const { return data_[static_cast<size_t>(idx4(b, i, j, c))]; }

  bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
  bool is_scalar() const { return size() == 1; }
  bool all_finite() const;

  Tensor reshaped(Shape s) const;

 private:
  Shape shape_;
  std::vector<double> data_;
};

// c = a * b for matrices [m,k] x [k,n]; c is resized and overwritten.
void matmul_into(const Tensor& a, const Tensor& b, Tensor& c);
// c = a * b^T for a [m,k], b [n,k].
void matmul_tb_into(const Tensor& a, const Tensor& b, Tensor& c);
// c = a^T * b for a [k,m], b [k,n].
void matmul_ta_into(const Tensor& a, const Tensor& b, Tensor& c);

}  // namespace aewb

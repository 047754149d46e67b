#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "aewb/tensor.hpp"

using namespace aewb;

TEST_CASE("shape_size multiplies dimensions") {
  CHECK(shape_size({2, 3}) == 6);
  CHECK(shape_size({4, 2, 2, 3}) == 48);
  CHECK(shape_size({}) == 1);
}

TEST_CASE("construction zero-fills and validates length") {
  Tensor t({2, 3});
  CHECK(t.size() == 6);
  CHECK(t.rank() == 2);
  for (int64_t i = 0; i < t.size(); ++i) CHECK(t[i] == 0.0);
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), DimensionError);
}

TEST_CASE("factories") {
  CHECK(Tensor::scalar(3.5)[0] == 3.5);
  CHECK(Tensor::scalar(3.5).is_scalar());
  const Tensor f = Tensor::full({2, 2}, 7.0);
  CHECK(f.at(1, 1) == 7.0);
  const Tensor v = Tensor::vec({1, 2, 3});
  CHECK(v.rank() == 1);
  CHECK(v.dim(0) == 3);
}

TEST_CASE("matrix accessor is row-major") {
  Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(t.at(0, 2) == 3.0);
  CHECK(t.at(1, 0) == 4.0);
}

TEST_CASE("image accessor walks B,H,W,C") {
  Tensor t({2, 2, 2, 3});
  t.at4(1, 0, 1, 2) = 9.0;
  CHECK(t[1 * 12 + 0 * 6 + 1 * 3 + 2] == 9.0);
}

TEST_CASE("matmul identity case") {
  const Tensor eye({2, 2}, {1, 0, 0, 1});
  const Tensor b({2, 2}, {5, 6, 7, 8});
  Tensor c;
  matmul_into(eye, b, c);
  for (int64_t i = 0; i < 4; ++i) CHECK(c[i] == b[i]);
}

TEST_CASE("matmul hand product") {
  const Tensor a({2, 2}, {1, 2, 3, 4});
  const Tensor b({2, 2}, {5, 6, 7, 8});
  Tensor c;
  matmul_into(a, b, c);
  CHECK(c.at(0, 0) == 19.0);
  CHECK(c.at(0, 1) == 22.0);
  CHECK(c.at(1, 0) == 43.0);
  CHECK(c.at(1, 1) == 50.0);
}

TEST_CASE("matmul zero annihilates") {
  const Tensor z({2, 2});
  const Tensor b({2, 2}, {5, 6, 7, 8});
  Tensor c;
  matmul_into(z, b, c);
  for (int64_t i = 0; i < 4; ++i) CHECK(c[i] == 0.0);
}

TEST_CASE("matmul rejects mismatched inner dims") {
  const Tensor a({2, 3});
  const Tensor b({2, 2});
  Tensor c;
  CHECK_THROWS_AS(matmul_into(a, b, c), DimensionError);
}

TEST_CASE("transposed variants match explicit transposes") {
  const Tensor a({2, 3}, {1, 2, 3, 4, 5, 6});
  const Tensor b({2, 3}, {7, 8, 9, 1, 2, 3});
  Tensor ab_t;
  matmul_tb_into(a, b, ab_t);  // [2,3] x [2,3]^T = [2,2]
  CHECK(ab_t.at(0, 0) == doctest::Approx(1 * 7 + 2 * 8 + 3 * 9));
  CHECK(ab_t.at(1, 1) == doctest::Approx(4 * 1 + 5 * 2 + 6 * 3));

  Tensor at_b;
  matmul_ta_into(a, b, at_b);  // [2,3]^T x [2,3] = [3,3]
  CHECK(at_b.at(0, 0) == doctest::Approx(1 * 7 + 4 * 1));
  CHECK(at_b.at(2, 1) == doctest::Approx(3 * 8 + 6 * 2));
}

TEST_CASE("reshape keeps data and checks size") {
  const Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
  const Tensor r = t.reshaped({3, 2});
  CHECK(r.at(2, 1) == 6.0);
  CHECK_THROWS_AS(t.reshaped({4, 2}), DimensionError);
}

TEST_CASE("all_finite flags NaN and Inf") {
  Tensor t({2});
  CHECK(t.all_finite());
  t[1] = std::nan("");
  CHECK_FALSE(t.all_finite());
  t[1] = INFINITY;
  CHECK_FALSE(t.all_finite());
}

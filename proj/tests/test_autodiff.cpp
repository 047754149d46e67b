#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "aewb/autodiff.hpp"
#include "aewb/rng.hpp"

using namespace aewb;

namespace {

Tensor random_tensor(Shape s, Rng& rng, double range = 1.0) {
  Tensor t(std::move(s));
  for (auto& v : t.vals()) v = rng.uniform(-range, range);
  return t;
}

}  // namespace

TEST_CASE("elementwise hand values") {
  Tape tape;
  const Val a = tape.leaf(Tensor::vec({1, 2}));
  const Val b = tape.leaf(Tensor::vec({3, 4}));
  const Tensor& sum = tape.add(a, b).value();
  CHECK(sum[0] == 4.0);
  CHECK(sum[1] == 6.0);

  const Val one = tape.leaf(Tensor::scalar(1.0));
  const Tensor& same = tape.mul(a, one).value();
  CHECK(same[0] == 1.0);
  CHECK(same[1] == 2.0);

  CHECK(tape.square(tape.leaf(Tensor::vec({-2}))).value()[0] == 4.0);
  CHECK(tape.sub(b, a).value()[0] == 2.0);
}

TEST_CASE("activation values") {
  Tape tape;
  const Val x = tape.leaf(Tensor::vec({0, -1, 2}));
  const Tensor& sig = tape.activation(Act::Sigmoid, x).value();
  CHECK(sig[0] == doctest::Approx(0.5));
  const Tensor& rel = tape.activation(Act::Relu, x).value();
  CHECK(rel[1] == 0.0);
  CHECK(rel[2] == 2.0);
  const Tensor& lin = tape.activation(Act::Linear, x).value();
  CHECK(lin[1] == -1.0);
  const Tensor& th = tape.activation(Act::Tanh, x).value();
  CHECK(th[0] == 0.0);
  CHECK(th[2] == doctest::Approx(std::tanh(2.0)));
}

TEST_CASE("sigmoid derivative at 0 is 0.25") {
  Tape tape;
  const Val x = tape.param(Tensor::vec({0}), 0);
  const Val y = tape.sum(tape.activation(Act::Sigmoid, x));
  const GradientMap g = tape.backward(y);
  CHECK(g.at(0)[0] == doctest::Approx(0.25));
}

TEST_CASE("gradient of sum of squares is 2x") {
  Tape tape;
  const Val x = tape.param(Tensor::vec({1, 2}), 0);
  const Val y = tape.sum(tape.mul(x, x));
  const GradientMap g = tape.backward(y);
  CHECK(g.at(0)[0] == doctest::Approx(2.0));
  CHECK(g.at(0)[1] == doctest::Approx(4.0));
}

TEST_CASE("unused parameter gets a zero gradient") {
  Tape tape;
  const Val x = tape.param(Tensor::vec({1, 2}), 0);
  const Val p = tape.param(Tensor::vec({5}), 1);
  (void)p;
  const GradientMap g = tape.backward(tape.sum(x));
  CHECK(g.size() == 2);
  CHECK(g.at(1)[0] == 0.0);
}

TEST_CASE("one gradient entry per slot with matching shape") {
  Tape tape;
  Rng rng(1);
  const Val w = tape.param(random_tensor({3, 2}, rng), 0);
  const Val b = tape.param(Tensor::vec({0, 0}), 1);
  const Val x = tape.leaf(random_tensor({4, 3}, rng));
  const Val y = tape.sum(tape.add_rowvec(tape.matmul(x, w), b));
  const GradientMap g = tape.backward(y);
  CHECK(g.size() == 2);
  CHECK(g.at(0).shape() == Shape{3, 2});
  CHECK(g.at(1).shape() == Shape{2});
}

TEST_CASE("shared slot accumulates over forward passes") {
  Tape tape;
  const Tensor w0 = Tensor::vec({3});
  const Val w1 = tape.param(w0, 0);
  const Val w2 = tape.param(w0, 0);  // same slot: one parameter, used twice
  const Val y = tape.add(tape.sum(tape.square(w1)), tape.sum(tape.square(w2)));
  const GradientMap g = tape.backward(y);
  CHECK(g.at(0)[0] == doctest::Approx(12.0));  // 2*3 + 2*3
}

TEST_CASE("backward requires a scalar") {
  Tape tape;
  const Val x = tape.param(Tensor::vec({1, 2}), 0);
  CHECK_THROWS_AS(tape.backward(x), ContractError);
}

TEST_CASE("replay reproduces identical values") {
  Rng rng(7);
  const Tensor w = random_tensor({5, 4}, rng);
  const Tensor x = random_tensor({3, 5}, rng);
  auto run = [&]() {
    Tape tape;
    return tape.sum(tape.activation(Act::Sigmoid, tape.matmul(tape.leaf(x), tape.leaf(w))))
        .value()[0];
  };
  CHECK(run() == run());
}

TEST_CASE("finite differences on a random 2-layer net") {
  Rng rng(11);
  const Tensor x = random_tensor({4, 5}, rng);
  std::vector<Tensor> params = {random_tensor({5, 3}, rng), random_tensor({3}, rng),
                                random_tensor({3, 5}, rng), random_tensor({5}, rng)};
  auto build = [&](Tape& t, const std::vector<Val>& p) {
    Val h = t.activation(Act::Sigmoid, t.add_rowvec(t.matmul(t.leaf(x), p[0]), p[1]));
    Val o = t.activation(Act::Sigmoid, t.add_rowvec(t.matmul(h, p[2]), p[3]));
    return t.mean(t.square(t.sub(o, t.leaf(x))));
  };
  CHECK(grad_check(build, params, 1e-5) < 1e-4);
}

TEST_CASE("finite differences are exact on a linear objective") {
  Rng rng(3);
  const Tensor x = random_tensor({1, 6}, rng);
  auto build = [&](Tape& t, const std::vector<Val>& p) {
    return t.sum(t.matmul(t.leaf(x), p[0]));
  };
  CHECK(grad_check(build, {random_tensor({6, 1}, rng)}, 1e-5) < 1e-9);
}

TEST_CASE("finite differences on a quadratic at h=1e-4") {
  Rng rng(5);
  auto build = [&](Tape& t, const std::vector<Val>& p) { return t.sum(t.square(p[0])); };
  CHECK(grad_check(build, {random_tensor({4}, rng)}, 1e-4) < 1e-8);
}

TEST_CASE("reduction and shaping ops differentiate") {
  Rng rng(13);
  const Tensor x = random_tensor({3, 6}, rng);
  auto build = [&](Tape& t, const std::vector<Val>& p) {
    Val s = t.slice_cols(t.mul(t.leaf(x), p[0]), 1, 4);
    Val m = t.mean_rows(s);
    return t.sum(t.square(t.reshape(m, {3, 1})));
  };
  CHECK(grad_check(build, {random_tensor({3, 6}, rng)}, 1e-5) < 1e-4);
}

TEST_CASE("scalar-broadcast mul and scale differentiate") {
  Rng rng(17);
  auto build = [&](Tape& t, const std::vector<Val>& p) {
    return t.scale(t.sum(t.mul(p[0], p[1])), 3.0);
  };
  CHECK(grad_check(build, {random_tensor({4}, rng), Tensor::scalar(0.7)}, 1e-5) < 1e-4);
}

TEST_CASE("log exp clamp differentiate away from kinks") {
  Rng rng(19);
  Tensor x({5});
  for (auto& v : x.vals()) v = rng.uniform(0.2, 0.8);
  auto build = [&](Tape& t, const std::vector<Val>& p) {
    Val c = t.clamp(p[0], 0.05, 0.95);
    return t.sum(t.add(t.log(c), t.exp(c)));
  };
  CHECK(grad_check(build, {x}, 1e-5) < 1e-4);
}

TEST_CASE("conv 1x1 unit kernel is identity") {
  Tape tape;
  Rng rng(23);
  const Tensor img = random_tensor({2, 3, 3, 1}, rng);
  const Tensor k({1, 1, 1, 1}, {1.0});
  const Tensor& out = tape.conv2d(tape.leaf(img), tape.leaf(k), 1).value();
  for (int64_t i = 0; i < img.size(); ++i) CHECK(out[i] == img[i]);
}

TEST_CASE("conv zero kernel annihilates") {
  Tape tape;
  Rng rng(29);
  const Tensor img = random_tensor({1, 4, 4, 2}, rng);
  const Tensor k({3, 3, 2, 3});
  const Tensor& out = tape.conv2d(tape.leaf(img), tape.leaf(k), 1).value();
  for (int64_t i = 0; i < out.size(); ++i) CHECK(out[i] == 0.0);
}

TEST_CASE("averaging kernel keeps interior, dims zero-padded border") {
  Tape tape;
  const Tensor img = Tensor::full({1, 4, 4, 1}, 2.0);
  const Tensor k = Tensor::full({3, 3, 1, 1}, 1.0 / 9.0);
  const Tensor& out = tape.conv2d(tape.leaf(img), tape.leaf(k), 1).value();
  CHECK(out.at4(0, 1, 1, 0) == doctest::Approx(2.0));
  CHECK(out.at4(0, 1, 2, 0) == doctest::Approx(2.0));
  CHECK(out.at4(0, 0, 0, 0) == doctest::Approx(2.0 * 4 / 9));  // corner sees 4 taps
  CHECK(out.at4(0, 0, 1, 0) < 2.0);
}

TEST_CASE("conv stride 2 halves spatial dims") {
  Tape tape;
  Rng rng(31);
  const Tensor img = random_tensor({1, 6, 6, 1}, rng);
  const Tensor k = random_tensor({3, 3, 1, 2}, rng);
  const Tensor& out = tape.conv2d(tape.leaf(img), tape.leaf(k), 2).value();
  CHECK(out.shape() == Shape{1, 3, 3, 2});
}

TEST_CASE("deconv 1x1 unit kernel is identity") {
  Tape tape;
  Rng rng(37);
  const Tensor img = random_tensor({2, 3, 3, 1}, rng);
  const Tensor k({1, 1, 1, 1}, {1.0});
  const Tensor& out = tape.deconv2d(tape.leaf(img), tape.leaf(k), 1).value();
  for (int64_t i = 0; i < img.size(); ++i) CHECK(out[i] == img[i]);
}

TEST_CASE("deconv zero kernel annihilates") {
  Tape tape;
  const Tensor img = Tensor::full({1, 2, 2, 3}, 1.0);
  const Tensor k({3, 3, 4, 3});
  const Tensor& out = tape.deconv2d(tape.leaf(img), tape.leaf(k), 2).value();
  CHECK(out.shape() == Shape{1, 4, 4, 4});
  for (int64_t i = 0; i < out.size(); ++i) CHECK(out[i] == 0.0);
}

TEST_CASE("deconv is the adjoint of conv") {
  for (const int stride : {1, 2}) {
    Rng rng(41 + stride);
    const Tensor x = random_tensor({2, 6, 6, 2}, rng);
    const Tensor k = random_tensor({3, 3, 2, 4}, rng);
    Tape tape;
    const Tensor& cx = tape.conv2d(tape.leaf(x), tape.leaf(k), stride).value();
    const Tensor y = random_tensor(cx.shape(), rng);
    const Tensor& dy = tape.deconv2d(tape.leaf(y), tape.leaf(k), stride).value();
    REQUIRE(dy.shape() == x.shape());
    double lhs = 0, rhs = 0;
    for (int64_t i = 0; i < cx.size(); ++i) lhs += cx[i] * y[i];
    for (int64_t i = 0; i < x.size(); ++i) rhs += x[i] * dy[i];
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
  }
}

TEST_CASE("maxpool hand case and odd padding") {
  Tape tape;
  const Tensor img({1, 2, 2, 1}, {1, 2, 3, 4});
  CHECK(tape.maxpool2(tape.leaf(img)).value()[0] == 4.0);

  const Tensor odd({1, 3, 3, 1}, {1, 2, 3, 4, 5, 6, 7, 8, 9});
  const Tensor& pooled = tape.maxpool2(tape.leaf(odd)).value();
  CHECK(pooled.shape() == Shape{1, 2, 2, 1});
  CHECK(pooled.at4(0, 0, 0, 0) == 5.0);
  CHECK(pooled.at4(0, 1, 1, 0) == 9.0);
}

TEST_CASE("upsample inverts maxpool on block-constant images") {
  Tape tape;
  Tensor img({1, 4, 4, 1});
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) img.at4(0, i, j, 0) = static_cast<double>((i / 2) * 2 + j / 2);
  const Val up = tape.upsample2(tape.maxpool2(tape.leaf(img)));
  for (int64_t i = 0; i < img.size(); ++i) CHECK(up.value()[i] == img[i]);
}

TEST_CASE("constant image stays constant through pool and upsample") {
  Tape tape;
  const Tensor img = Tensor::full({1, 4, 4, 2}, 3.0);
  const Tensor& down = tape.maxpool2(tape.leaf(img)).value();
  CHECK(down.shape() == Shape{1, 2, 2, 2});
  for (int64_t i = 0; i < down.size(); ++i) CHECK(down[i] == 3.0);
  const Tensor& up = tape.upsample2(tape.leaf(down)).value();
  CHECK(up.shape() == Shape{1, 4, 4, 2});
  for (int64_t i = 0; i < up.size(); ++i) CHECK(up[i] == 3.0);
}

TEST_CASE("conv stack differentiates") {
  Rng rng(47);
  const Tensor x = random_tensor({2, 4, 4, 1}, rng);
  std::vector<Tensor> params = {random_tensor({3, 3, 1, 2}, rng, 0.5),
                                random_tensor({2}, rng, 0.1),
                                random_tensor({3, 3, 1, 2}, rng, 0.5)};
  auto build = [&](Tape& t, const std::vector<Val>& p) {
    Val h = t.activation(Act::Sigmoid,
                         t.add_chanvec(t.conv2d(t.leaf(x), p[0], 1), p[1]));
    Val pooled = t.maxpool2(h);
    Val up = t.upsample2(pooled);
    Val out = t.deconv2d(up, p[2], 1);
    return t.mean(t.square(t.sub(out, t.leaf(x))));
  };
  CHECK(grad_check(build, params, 1e-5) < 1e-4);
}

TEST_CASE("relu_mask matches relu pattern") {
  Tape tape;
  const Val x = tape.leaf(Tensor::vec({-1, 0.5, 2}));
  const Tensor& m = tape.relu_mask(x).value();
  CHECK(m[0] == 0.0);
  CHECK(m[1] == 1.0);
  CHECK(m[2] == 1.0);
}

#include <doctest.h>

#include <cmath>

#include "spdpool/error.hpp"
#include "spdpool/kernels.hpp"
#include "spdpool/learning.hpp"
#include "spdpool/spd.hpp"
#include "support.hpp"

using namespace spdpool;
namespace st = spdpool::testing;

TEST_CASE("label encoding") {
  const auto y = encode_label(2, 3, 0.1).matrix();
  CHECK(y(1, 1) == doctest::Approx(1.0 / 1.2));
  CHECK(y(0, 0) == doctest::Approx(0.1 / 1.2));
  CHECK(y.trace() == doctest::Approx(1.0));
  CHECK(y(0, 1) == 0.0);
  CHECK(encode_label(1, 4, 0.0).matrix() == Eigen::MatrixXd(Eigen::Vector4d(1, 0, 0, 0).asDiagonal()));
  CHECK_THROWS_AS(encode_label(0, 3), InvalidArgument);
  CHECK_THROWS_AS(encode_label(4, 3), InvalidArgument);
  CHECK_THROWS_AS(encode_label(1, 3, -0.1), InvalidArgument);
}

TEST_CASE("loss values by hand") {
  Eigen::MatrixXd t(1, 2);
  t << std::sqrt(3.0), std::sqrt(3.0);
  const LabelMatrix y{1, 1, 0.5};  // M = 1: Y = [1] for any epsilon
  CHECK(jbld_loss(t, y, {0.0}) == doctest::Approx(std::log(2.0) - 0.5 * std::log(3.0)).epsilon(1e-12));

  Eigen::MatrixXd u(1, 2);
  u << 1, 1;
  CHECK(frob_loss(u, encode_label(1, 1, 0.0)) == 0.0);
  // CP = diag(1, 0) against Y = diag(0, 1).
  Eigen::MatrixXd v(2, 2);
  v << 1, 1, 0, 0;
  CHECK(frob_loss(v, encode_label(2, 2, 0.0)) == doctest::Approx(2.0));
}

TEST_CASE("cp_scaled shares the tcp code path") {
  Rng rng(1);
  const auto t = st::random_matrix(3, 7, rng);
  CHECK(cp_scaled(t).matrix == tcp(t, TcpScale::ByFrames).matrix);
}

TEST_CASE("JBLD gradient: closed form without ridge") {
  Rng rng(2);
  for (int trial = 0; trial < 10; ++trial) {
    const int m = 2 + static_cast<int>(rng.below(4));
    const int n = m + static_cast<int>(rng.below(10));
    const auto t = st::random_matrix(m, n, rng, 0.05, 1.0);
    const auto y = encode_label(1 + static_cast<int>(rng.below(m)), m);
    const Eigen::MatrixXd cp = st::brute_tcp(t) / static_cast<double>(n);
    const Eigen::MatrixXd expected =
        (2.0 / n) * ((cp + y.matrix()).inverse() - 0.5 * cp.inverse()) * t;
    const auto g = jbld_loss_grad(t, y, {0.0});
    CHECK((g - expected).cwiseAbs().maxCoeff() < 1e-9 * std::max(1.0, expected.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("gradients pass central finite differences") {
  Rng rng(3);
  for (int trial = 0; trial < 10; ++trial) {
    const int m = 2 + static_cast<int>(rng.below(4));
    const int n = m + static_cast<int>(rng.below(10));
    const auto t = st::random_matrix(m, n, rng, 0.05, 1.0);
    const auto y = encode_label(1 + static_cast<int>(rng.below(m)), m);
    CHECK(fd_gradient(LossKind::Jbld, t, y, 1e-6).max_relative_error < 1e-5);
    CHECK(fd_gradient(LossKind::Jbld, t, y, 1e-6, {1e-3}).max_relative_error < 1e-5);
    CHECK(fd_gradient(LossKind::Frobenius, t, y, 1e-6).max_relative_error < 1e-5);
  }
}

TEST_CASE("Frobenius gradient constant") {
  CHECK(kFrobGradConstant == 4.0);
  Rng rng(4);
  const auto t = st::random_matrix(3, 8, rng, 0.05, 1.0);
  const auto y = encode_label(2, 3, 0.0);
  // The half-size constant disagrees with finite differences by a factor of two.
  const Eigen::MatrixXd half = 0.5 * frob_loss_grad(t, y);
  const auto report = compare_gradients([&](const Eigen::MatrixXd& x) { return frob_loss(x, y); }, half, t, 1e-6);
  CHECK(report.max_relative_error > 0.1);
  const Eigen::MatrixXd ratio = report.numeric.cwiseQuotient(half);
  CHECK(ratio.maxCoeff() == doctest::Approx(2.0).epsilon(1e-5));
  CHECK(ratio.minCoeff() == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("JBLD loss reports rank-deficient CP") {
  const Eigen::MatrixXd t = Eigen::MatrixXd::Ones(3, 2);  // rank 1, fewer frames than classes
  try {
    jbld_loss(t, encode_label(1, 3), {0.0});
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("regularize") != std::string::npos);
  }
  CHECK(std::isfinite(jbld_loss(t, encode_label(1, 3), {1e-3})));
  CHECK_THROWS_AS(jbld_loss(t, encode_label(1, 3, 0.0), {1e-3}), InvalidArgument);
  CHECK_THROWS_AS(frob_loss(t, encode_label(1, 4)), InvalidArgument);
}

TEST_CASE("softmax layer gradient passes finite differences") {
  Rng rng(5);
  const LinearMap map{st::random_matrix(3, 5, rng, -1, 1)};
  const auto x = st::random_matrix(5, 9, rng);
  for (auto kind : {LossKind::Frobenius, LossKind::Jbld}) {
    const auto y = encode_label(3, 3, kind == LossKind::Jbld ? 1e-3 : 0.0);
    Eigen::MatrixXd grad;
    clip_loss_and_grad(map, x, y, kind, {}, &grad);
    const auto report = compare_gradients(
        [&](const Eigen::MatrixXd& w) { return clip_loss_and_grad(LinearMap{w}, x, y, kind, {}, nullptr); }, grad,
        map.weights, 1e-6);
    CHECK(report.max_relative_error < 1e-5);
  }
  const auto s = softmax_scores(map, x);
  CHECK((s.colwise().sum().array() - 1.0).abs().maxCoeff() < 1e-14);
}

TEST_CASE("train_linear") {
  SynthParams p;
  p.sequences_per_class = 10;
  const auto data = synth_coactivation(p);
  TrainOptions o;
  o.iterations = 60;
  o.learning_rate = 1e-3;

  SUBCASE("deterministic and independent of the thread count") {
    const int before = num_threads();
    set_num_threads(1);
    const auto a = train_linear(data, o);
    set_num_threads(4);
    const auto b = train_linear(data, o);
    set_num_threads(before);
    CHECK(a.loss_trace == b.loss_trace);
    CHECK(a.map.weights == b.map.weights);
    CHECK(a.loss_trace.size() == 60u);
  }
  SUBCASE("the loss goes down for both kinds") {
    for (auto kind : {LossKind::Frobenius, LossKind::Jbld}) {
      o.loss = kind;
      const auto r = train_linear(data, o);
      CHECK(r.loss_trace.back() < r.loss_trace.front());
    }
  }
  SUBCASE("argument validation") {
    o.clip_len = 41;
    CHECK_THROWS_AS(train_linear(data, o), InvalidArgument);
    o.clip_len = 30;
    o.momentum = 1.0;
    CHECK_THROWS_AS(train_linear(data, o), InvalidArgument);
  }
}

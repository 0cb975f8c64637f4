#include <cmath>
#include <cstdlib>

#include "doctest.h"
#include "qmn/fixtures.hpp"
#include "qmn/grad.hpp"
#include "qmn/moduli.hpp"
#include "qmn/random.hpp"
#include "support.hpp"

using namespace qmn;
using namespace qmn::testing;

TEST_CASE("loss functions") {
  Eigen::Vector3d z(1, 2, 3), y(0, 1, 0);
  CHECK(loss_value(Loss::Mse, z, z) == 0);
  CHECK(loss_value(Loss::Mse, z, y) == doctest::Approx(1 + 1 + 9));
  auto s = softmax(z);
  CHECK(s.sum() == doctest::Approx(1));
  CHECK(softmax(Eigen::Vector3d(1000, 1000, 1000)).isApprox(Eigen::Vector3d::Constant(1.0 / 3)));
  CHECK(loss_value(Loss::SoftmaxCrossEntropy, z, y) == doctest::Approx(-std::log(s(1))));
  CHECK(parse_loss("cross-entropy") == Loss::SoftmaxCrossEntropy);
  CHECK(parse_loss("mse") == Loss::Mse);
  CHECK_FALSE(parse_loss("hinge").has_value());
}

TEST_CASE("loss gradients against finite differences") {
  Rng rng(71);
  for (auto loss : {Loss::Mse, Loss::SoftmaxCrossEntropy}) {
    VectorXd z = random_matrix(4, 1, rng, -3, 3);
    VectorXd y = softmax(random_matrix(4, 1, rng));
    auto g = loss_gradient(loss, z, y);
    for (Eigen::Index k = 0; k < 4; ++k) {
      VectorXd up = z, down = z;
      up(k) += 1e-6;
      down(k) -= 1e-6;
      CHECK(g(k) == doctest::Approx((loss_value(loss, up, y) - loss_value(loss, down, y)) / 2e-6).epsilon(1e-6));
    }
  }
}

TEST_CASE("single vertex identity gradient in closed form") {
  // y_hat = h f x, L = (y_hat - y)^2.
  auto q = fixtures::a3();
  NeuralNetwork net(fixtures::a3_thin(3, 2));
  const double x = 1.5, y = 4;
  auto g = backprop(net, VectorXd::Constant(1, x), VectorXd::Constant(1, y), Loss::Mse);
  const double r = 2 * (3 * 2 * x - y);
  CHECK(g.dw(0) == doctest::Approx(r * 2 * x));
  CHECK(g.dw(1) == doctest::Approx(r * 3 * x));
  CHECK(g.da(static_cast<Eigen::Index>(q->vertex_index("k"))) == doctest::Approx(r));
  CHECK(g.da(static_cast<Eigen::Index>(q->vertex_index("j"))) == doctest::Approx(2 * r));
}

TEST_CASE("zero weights give zero gradient under relu") {
  auto q = mlp_quiver({2, 3, 2}, false);
  NeuralNetwork net(zero_thin<double>(q), std::vector<Activation>(q->vertex_count(), Activation::Relu));
  auto g = backprop(net, Eigen::Vector2d(1, 2), Eigen::Vector2d(0, 0), Loss::Mse);
  CHECK(g.dw.isZero());
}

TEST_CASE("backprop agrees with finite differences") {
  Rng rng(72);
  for (auto f : {Activation::Identity, Activation::Tanh, Activation::Sigmoid}) {
    for (auto loss : {Loss::Mse, Loss::SoftmaxCrossEntropy}) {
      auto net = random_network(mlp_quiver({3, 4, 3}, true), f, rng);
      VectorXd x = random_matrix(3, 1, rng, -2, 2);
      VectorXd y = softmax(random_matrix(3, 1, rng));
      CHECK(max_rel_err(backprop(net, x, y, loss).dw, numerical_gradient(net, x, y, loss)) <= 1e-5);
    }
  }
}

TEST_CASE("factored gradient") {
  Rng rng(73);
  for (auto f : {Activation::Identity, Activation::Relu}) {
    for (int k = 0; k < 10; ++k) {
      auto net = random_network(mlp_quiver({3, 4, 3, 2}, true), f, rng);
      VectorXd x = random_matrix(3, 1, rng, -2, 2);
      VectorXd y = random_matrix(2, 1, rng);
      try {
        auto a = backprop(net, x, y, Loss::Mse), b = backprop_factored(net, x, y, Loss::Mse);
        CHECK(rel_err(a.dw, b.dw) <= 1e-12);
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SingularPreActivation);
      }
    }
  }
  // With tanh the factored formula replaces f'(z) by f(z)/z and so differs.
  auto net = random_network(mlp_quiver({3, 4, 2}, true), Activation::Tanh, rng);
  VectorXd x = random_matrix(3, 1, rng, -2, 2), y = random_matrix(2, 1, rng);
  CHECK(rel_err(backprop(net, x, y, Loss::Mse).dw, backprop_factored(net, x, y, Loss::Mse).dw) > 1e-3);
}

TEST_CASE("literal formulas") {
  Rng rng(74);
  SUBCASE("one hidden layer matches backprop") {
    for (auto f : {Activation::Tanh, Activation::Relu, Activation::Sigmoid}) {
      auto net = random_network(mlp_quiver({3, 4, 2}, true), f, rng);
      VectorXd x = random_matrix(3, 1, rng, -2, 2), y = random_matrix(2, 1, rng);
      try {
        CHECK(rel_err(backprop(net, x, y, Loss::Mse).dw, backprop_literal(net, x, y, Loss::Mse).dw) <= 1e-12);
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SingularPreActivation);
      }
    }
  }
  SUBCASE("deeper tanh networks differ") {
    auto net = random_network(mlp_quiver({3, 4, 4, 2}, true), Activation::Tanh, rng);
    VectorXd x = random_matrix(3, 1, rng, -2, 2), y = random_matrix(2, 1, rng);
    CHECK(rel_err(backprop(net, x, y, Loss::Mse).dw, backprop_literal(net, x, y, Loss::Mse).dw) > 1e-3);
  }
}

TEST_CASE("gradients live on the opposite quiver") {
  auto q = fixtures::d4tilde();
  auto op = opposite(*q);
  CHECK(op->arrow_count() == q->arrow_count());
  for (std::size_t a = 0; a < q->arrow_count(); ++a) {
    CHECK(op->arrow(a).source == q->arrow(a).target);
    CHECK(op->arrow(a).target == q->arrow(a).source);
  }
  CHECK(op->classification().sources.size() == q->classification().sinks.size());
  Rng rng(75);
  auto net = random_network(q, Activation::Relu, rng);
  auto g = backprop(net, Eigen::Vector3d(1, -1, 0.5), Eigen::Vector2d(0, 1), Loss::Mse);
  CHECK(as_opposite(g).weights == g.dw);
}

TEST_CASE("gradient transform") {
  Rng rng(76);
  auto q = fixtures::d4tilde();
  for (int k = 0; k < 20; ++k) {
    auto net = random_network(q, Activation::Identity, rng);
    VectorXd g = random_nonzero_gauge(*q, rng);
    VectorXd x = random_matrix(3, 1, rng), y = random_matrix(2, 1, rng);
    auto moved = backprop(net.with_weights(act(g, net.weights())), x, y, Loss::Mse);
    auto expected = gradient_transform(g, backprop(net, x, y, Loss::Mse));
    CHECK(rel_err(moved.dw, expected.dw) <= 1e-10);
    CHECK(rel_err(moved.da, expected.da) <= 1e-10);
  }
  auto id = backprop(NeuralNetwork(fixtures::d4tilde_thin()), Eigen::Vector3d(1, 2, 3), Eigen::Vector2d(0, 0), Loss::Mse);
  CHECK(gradient_transform(VectorXd::Ones(5), id).dw == id.dw);
  CHECK_THROWS_AS(gradient_transform(VectorXd::Ones(2), id), Error);
}

TEST_CASE("training") {
  auto net = fixtures::single_vertex_relu(0.5, 0.5);
  Dataset data;
  for (double x : {0.5, 1.0, 1.5, 2.0}) data.push_back({VectorXd::Constant(1, x), VectorXd::Constant(1, 2 * x)});

  SUBCASE("fits y = 2x") {
    TrainOptions opts;
    auto r = train(net, data, opts);
    CHECK(r.history.size() == 501);
    CHECK(r.history.back() < 1e-6);
    const double product = r.net.weights()["f"] * r.net.weights()["h"];
    CHECK(product == doctest::Approx(2).epsilon(1e-4));
  }
  SUBCASE("zero learning rate keeps the weights") {
    TrainOptions opts;
    opts.lr = 0;
    opts.epochs = 5;
    auto r = train(net, data, opts);
    CHECK(r.net.weights().weights == net.weights().weights);
  }
  SUBCASE("small steps decrease the loss") {
    TrainOptions opts;
    opts.lr = 0.01;
    opts.epochs = 50;
    auto r = train(net, data, opts);
    for (std::size_t k = 1; k < r.history.size(); ++k) CHECK(r.history[k] <= r.history[k - 1]);
  }
  SUBCASE("divergence is detected") {
    TrainOptions opts;
    opts.lr = 10;
    opts.epochs = 100;
    CHECK_THROWS_WITH_AS(train(NeuralNetwork(net.weights()), data, opts), doctest::Contains("DivergenceDetected"), Error);
  }
  SUBCASE("negative learning rate is rejected") {
    TrainOptions opts;
    opts.lr = -1;
    CHECK_THROWS_AS(train(net, data, opts), Error);
  }
  SUBCASE("moduli point of the knowledge map is tracked per epoch") {
    TrainOptions opts;
    opts.epochs = 20;
    int calls = 0;
    opts.observer = [&](int epoch, const NeuralNetwork& n, double loss) {
      CHECK(epoch == calls++);
      CHECK(loss == doctest::Approx(mean_loss(n, data, Loss::Mse)));
      for (const auto& s : data) CHECK(rel_err(forward(n, s.x).output, psi_hat(knowledge_map(n, s.x))) <= 1e-12);
    };
    train(net, data, opts);
    CHECK(calls == 21);
  }
}

TEST_CASE("batch gradient is independent of the thread count") {
  Rng rng(77);
  auto net = random_network(mlp_quiver({3, 5, 2}, true), Activation::Tanh, rng);
  Dataset data;
  for (int k = 0; k < 37; ++k) data.push_back({random_matrix(3, 1, rng), random_matrix(2, 1, rng)});
  auto one = batch_gradient(net, data, Loss::Mse, 1);
  for (unsigned t : {2u, 3u, 8u}) CHECK(batch_gradient(net, data, Loss::Mse, t) == one);
  VectorXd mean = VectorXd::Zero(one.size());
  for (const auto& s : data) mean += backprop(net, s.x, s.y, Loss::Mse).dw;
  CHECK(rel_err(mean / 37.0, one) <= 1e-14);
  CHECK(batch_gradient(net, {}, Loss::Mse, 1).isZero());
}

TEST_CASE("thread count from the environment") {
  setenv("QMN_THREADS", "3", 1);
  CHECK(default_threads() == 3);
  setenv("QMN_THREADS", "zero", 1);
  CHECK(default_threads() == 1);
  unsetenv("QMN_THREADS");
  CHECK(default_threads() == 1);
}

#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "coapids/autoenc.hpp"
#include "coapids/error.hpp"
#include "oracles/fd_grad.hpp"
#include "oracles/gen.hpp"

using namespace coapids;
using namespace coapids::autoenc;

namespace {

Matrix toy_corpus(std::size_t n) {
  Rng rng(99);
  Matrix x(n, 6);
  for (std::size_t r = 0; r < n; ++r) {
    const double a = rng.uniform(), b = rng.uniform();
    const double row[6] = {a, b, 0.5 * (a + b), 1.0 - a, a * b, 0.25};
    for (std::size_t c = 0; c < 6; ++c) x(r, c) = row[c];
  }
  return x;
}

}  // namespace

TEST_SUITE("autoenc") {
  TEST_CASE("config widths and validation") {
    AEConfig c;
    c.input_dim = 37;
    c.latent_dim = 4;
    CHECK(c.widths() == std::vector<std::size_t>{37, 35, 28, 4, 28, 35, 37});
    const AEModel m = initialize(c);
    REQUIRE(m.layers.size() == 6);
    CHECK(m.latent_layer() == 2);
    CHECK(m.layers[2].activation == Activation::linear);
    CHECK(m.layers[0].activation == Activation::relu);
    CHECK(m.layers[5].activation == Activation::relu);
    const double limit = std::sqrt(6.0 / (37 + 35));
    for (double w : m.layers[0].weights.values()) CHECK(std::abs(w) <= limit);
    for (double b : m.layers[0].bias) CHECK(b == 0.0);

    c.latent_dim = 0;
    CHECK_THROWS_AS(c.validate(), Error);
  }

  TEST_CASE("analytic gradients match finite differences") {
    Rng rng(2024);
    for (int net = 0; net < 20; ++net) {
      const AEModel model = oracle::random_net(rng);
      const Matrix x = gen::matrix(rng, 1 + rng.below(12), model.config.input_dim);
      Gradients g;
      const double loss = loss_and_gradients(model, x, g, Exec::serial);
      CHECK(loss == doctest::Approx(oracle::naive_mse(model, x)).epsilon(1e-12));
      const auto check = oracle::check_gradients(model, x, g);
      CHECK(check.max_rel_error < 1e-4);
    }
  }

  TEST_CASE("serial and parallel gradients agree") {
    Rng rng(5);
    const AEModel model = oracle::random_net(rng);
    const Matrix x = gen::matrix(rng, 300, model.config.input_dim);
    Gradients a, b;
    CHECK(loss_and_gradients(model, x, a, Exec::serial) == loss_and_gradients(model, x, b, Exec::parallel));
    CHECK(a.weights == b.weights);
    CHECK(a.bias == b.bias);
  }

  TEST_CASE("adam update rules") {
    AdamHyper h;
    std::vector<double> p{1.0, -2.0}, m(2, 0.0), v(2, 0.0);
    adam_update(p, std::vector<double>{0.0, 0.0}, m, v, 1, h);
    CHECK(p == std::vector<double>{1.0, -2.0});

    adam_update(p, std::vector<double>{3.0, -0.5}, m, v, 1, h);
    CHECK(p[0] == doctest::Approx(1.0 - 1e-3).epsilon(1e-6));
    CHECK(p[1] == doctest::Approx(-2.0 + 1e-3).epsilon(1e-6));

    h.learning_rate = 0.0;
    std::vector<double> q{0.5}, mq(1, 0.0), vq(1, 0.0);
    adam_update(q, std::vector<double>{2.0}, mq, vq, 1, h);
    CHECK(q[0] == 0.5);
    CHECK(mq[0] == doctest::Approx(0.2));
    CHECK(vq[0] == doctest::Approx(0.004));
  }

  TEST_CASE("zero epochs returns the initialization") {
    AEConfig c;
    c.input_dim = 6;
    c.epochs = 0;
    c.seed = 17;
    const auto r = train(toy_corpus(20), c);
    CHECK(r.loss_history.empty());
    CHECK(r.model == initialize(c));
  }

  TEST_CASE("toy corpus loss halves and the history recomputes") {
    AEConfig c;
    c.input_dim = 6;
    c.hidden_widths = {4};
    c.latent_dim = 2;
    c.epochs = 200;
    c.batch_size = 50;
    c.seed = 3;
    const Matrix x = toy_corpus(200);
    const double initial = reconstruction_mse(initialize(c), x);
    std::size_t calls = 0;
    const auto r = train(x, c, [&](std::size_t, double) { ++calls; });
    CHECK(calls == 200);
    REQUIRE(r.loss_history.size() == 200);
    CHECK(r.loss_history.back() < 0.5 * initial);
    CHECK(std::abs(oracle::naive_mse(r.model, x) - r.loss_history.back()) < 1e-9);
    CHECK(r.model.optimizer.step == 200 * 4);

    const auto again = train(x, c, {}, Exec::serial);
    CHECK(again.loss_history == r.loss_history);
  }

  TEST_CASE("identical rows drive the loss down") {
    AEConfig c;
    c.input_dim = 5;
    c.hidden_widths = {4};
    c.latent_dim = 1;
    c.epochs = 100;
    c.learning_rate = 1e-2;
    c.seed = 8;
    Matrix x(40, 5, 0.6);
    const auto r = train(x, c);
    CHECK(r.loss_history.back() < r.loss_history.front());
    CHECK(r.loss_history.back() < reconstruction_mse(initialize(c), x));
  }

  TEST_CASE("encode and reconstruct shapes") {
    AEConfig c;
    c.input_dim = 6;
    c.latent_dim = 3;
    c.seed = 1;
    AEModel m = initialize(c);
    const Matrix x = toy_corpus(10);
    CHECK(encode(m, x).rows() == 10);
    CHECK(encode(m, x).cols() == 3);
    CHECK(encode(m, x) == encode(m, x));
    const Matrix y = reconstruct(m, x);
    for (double v : y.values()) CHECK(v >= 0.0);

    for (auto& l : m.layers) {
      l.weights.fill(0.0);
      std::fill(l.bias.begin(), l.bias.end(), 0.0);
    }
    const Matrix z0 = encode(m, x), y0 = reconstruct(m, x);
    for (double v : z0.values()) CHECK(v == 0.0);
    for (double v : y0.values()) CHECK(v == 0.0);

    CHECK_THROWS_AS(encode(m, Matrix(2, 5)), Error);
    CHECK_THROWS_AS(train(Matrix(2, 5), c), Error);
    CHECK_THROWS_AS(train(Matrix(0, 6), c), Error);
  }

  TEST_CASE("divergence is reported") {
    AEConfig c;
    c.input_dim = 6;
    c.hidden_widths = {4};
    c.latent_dim = 2;
    c.epochs = 5;
    c.learning_rate = 1e300;
    c.output_activation = Activation::linear;
    try {
      train(toy_corpus(30), c);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::non_finite_loss);
    }
  }

  TEST_CASE("model json round trip") {
    AEConfig c;
    c.input_dim = 6;
    c.hidden_widths = {5};
    c.latent_dim = 2;
    c.epochs = 3;
    c.seed = 4;
    const auto r = train(toy_corpus(30), c);
    const auto path = std::filesystem::temp_directory_path() / "coapids_ae_test.json";
    save_model(r.model, path);
    CHECK(load_model(path) == r.model);
    std::filesystem::remove(path);

    auto j = to_json(r.model);
    j["layers"][0]["bias"].push_back(1.0);
    CHECK_THROWS_AS(model_from_json(j), Error);
  }
}

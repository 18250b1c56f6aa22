#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "focusfl/ensemble.hpp"
#include "focusfl/models.hpp"
#include "focusfl/rng.hpp"
#include "support.hpp"

using namespace focusfl;

namespace {

Vector random_vector(std::size_t d, RandomStream& rng, double scale = 1.0) {
  Vector v(d);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

Vector central_difference(const ModelKind& model, const Vector& w, const AgentDataset& data, double h) {
  Vector g(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    Vector up = w, down = w;
    up[i] += h;
    down[i] -= h;
    g[i] = (empirical_loss(model, up, data) - empirical_loss(model, down, data)) / (2 * h);
  }
  return g;
}

}  // namespace

TEST_CASE("empirical loss") {
  RandomStream rng(1, StreamTag::train_data);
  const Vector mu{0.2, -0.7, 1.1};
  SUBCASE("exact fit has zero loss") {
    const auto d = gen_regression_dataset(mu, 200, 1.0, 0.0, rng);
    CHECK(empirical_loss(ModelKind::linear(), mu, d) == doctest::Approx(0.0).epsilon(1e-12).scale(1e-12));
  }
  SUBCASE("hand arithmetic in one dimension") {
    const auto d = testkit::dataset({{1.0}, {-1.0}}, {0.0, 0.0});
    CHECK(empirical_loss(ModelKind::linear(), Vector{2.0}, d) == 4.0);
  }
  SUBCASE("the generating parameter reaches the noise floor") {
    const auto d = gen_regression_dataset(mu, 200000, 1.0, 0.1, rng);
    CHECK(std::abs(empirical_loss(ModelKind::linear(), mu, d) - 0.01) <= 0.03 * 0.01);
  }
  SUBCASE("logistic loss adds the ridge term to the per-sample loss") {
    const auto d = gen_classification_dataset(mu, 300, 1.0, rng);
    const auto model = ModelKind::logistic(0.3);
    const Vector w{0.5, 0.5, -0.5};
    CHECK(empirical_loss(model, w, d) == doctest::Approx(mean_sample_loss(model, w, d) + 0.15 * dot(w, w)));
  }
}

TEST_CASE("gradient") {
  RandomStream rng(2, StreamTag::train_data);
  SUBCASE("vanishes at the least-squares solution") {
    const auto d = gen_regression_dataset(Vector{1.0, -2.0, 0.5, 0.0}, 500, 1.0, 0.3, rng);
    CHECK(norm(gradient(ModelKind::linear(), testkit::ols(d), d)) <= 1e-10);
  }
  SUBCASE("single sample closed form") {
    const auto d = testkit::dataset({{1.0, 2.0}}, {3.0});
    const Vector w{0.5, -1.0};
    const double residual = 0.5 - 2.0 - 3.0;
    const Vector g = gradient(ModelKind::linear(), w, d);
    CHECK(g[0] == doctest::Approx(2 * residual * 1.0));
    CHECK(g[1] == doctest::Approx(2 * residual * 2.0));
  }
  SUBCASE("matches central differences for both model kinds") {
    for (const ModelKind& model : {ModelKind::linear(), ModelKind::logistic(0.1)}) {
      for (int trial = 0; trial < 20; ++trial) {
        const Vector mu = random_vector(10, rng);
        const auto d = model.is_classifier() ? gen_classification_dataset(mu, 50, 1.0, rng)
                                             : gen_regression_dataset(mu, 50, 1.0, 0.1, rng);
        const Vector w = random_vector(10, rng);
        const Vector g = gradient(model, w, d);
        const Vector fd = central_difference(model, w, d, 1e-5);
        for (std::size_t i = 0; i < g.size(); ++i) {
          CHECK(std::abs(g[i] - fd[i]) <= 1e-5 * std::max(1.0, std::abs(fd[i])));
        }
      }
    }
  }
  SUBCASE("dimension mismatch is rejected") {
    const auto d = testkit::dataset({{1.0, 2.0}}, {3.0});
    CHECK_THROWS_AS(gradient(ModelKind::linear(), Vector{1.0}, d), std::invalid_argument);
  }
}

TEST_CASE("ridge logistic is strongly convex and smooth") {
  RandomStream rng(3, StreamTag::train_data);
  const auto model = ModelKind::logistic(0.2);
  const auto d = gen_classification_dataset(random_vector(6, rng), 400, 1.0, rng);
  const double smooth = smoothness_bound(model, d);
  for (int trial = 0; trial < 100; ++trial) {
    const Vector a = random_vector(6, rng, 2.0);
    const Vector b = random_vector(6, rng, 2.0);
    const Vector diff = subtract(a, b);
    const Vector gdiff = subtract(gradient(model, a, d), gradient(model, b, d));
    CHECK(dot(gdiff, diff) >= model.ridge_lambda * dot(diff, diff) * (1 - 1e-12));
    CHECK(norm(gdiff) <= smooth * norm(diff) * (1 + 1e-12));
  }
}

TEST_CASE("analytic linear losses") {
  const Vector mu{1.0, 2.0, 3.0};
  CHECK(analytic_population_loss_linear(mu, mu, 1.0, 0.1) == doctest::Approx(0.01));
  CHECK(analytic_population_loss_linear(Vector{2.0, 2.0, 3.0}, mu, 1.0, 0.0) == 1.0);
  CHECK(analytic_excess_risk_linear(mu, mu, 1.3) == 0.0);
  CHECK(analytic_excess_risk_linear(Vector{1.01, 2.0, 3.0}, mu, 1.0) == doctest::Approx(1e-4));
  const Vector w{0.3, -0.2, 0.9};
  CHECK(analytic_excess_risk_linear(w, mu, 1.5) == analytic_population_loss_linear(w, mu, 1.5, 0.2) - 0.2 * 0.2);

  RandomStream rng(4, StreamTag::test_data);
  const Vector small_mu{0.4, -0.1, 0.2, 0.0, 0.3};
  const Vector small_w{0.1, 0.1, 0.1, 0.1, 0.1};
  const auto d = gen_regression_dataset(small_mu, 1000000, 1.2, 0.3, rng);
  const double exact = analytic_population_loss_linear(small_w, small_mu, 1.2, 0.3);
  CHECK(std::abs(empirical_loss(ModelKind::linear(), small_w, d) - exact) <= 0.01 * exact);
}

TEST_CASE("predictions") {
  CHECK(predict(ModelKind::logistic(), Vector{0.0, 0.0}, Vector{5.0, -2.0}) == Prediction{0.5, 0.5});
  CHECK(predict(ModelKind::linear(), Vector{1.0, 0.0, 0.0}, Vector{3.0, 7.0, -1.0}) == Prediction{3.0});
  RandomStream rng(5, StreamTag::test_data);
  for (int i = 0; i < 100; ++i) {
    const Prediction p = predict(ModelKind::logistic(), random_vector(4, rng, 20.0), random_vector(4, rng, 5.0));
    CHECK(std::abs(p[0] + p[1] - 1.0) <= 1e-12);
  }
  CHECK(prediction_loss(ModelKind::linear(), Prediction{2.0}, 0.5) == 2.25);
  CHECK(std::isfinite(prediction_loss(ModelKind::logistic(), Prediction{1.0, 0.0}, 1.0)));
}

TEST_CASE("ensemble prediction") {
  const ClusterModels models{{Vector{1.0}, Vector{3.0}}};
  const Vector x{1.0};
  CHECK(ensemble_predict(ModelKind::linear(), models, Vector{0.5, 0.5}, x) == Prediction{2.0});
  CHECK(ensemble_predict(ModelKind::linear(), models, Vector{0.0, 1.0}, x) ==
        predict(ModelKind::linear(), models.weights[1], x));

  RandomStream rng(6, StreamTag::test_data);
  const ClusterModels classifiers{{random_vector(3, rng), random_vector(3, rng), random_vector(3, rng)}};
  for (int i = 0; i < 50; ++i) {
    const Prediction p = ensemble_predict(ModelKind::logistic(), classifiers, Vector{0.2, 0.3, 0.5}, random_vector(3, rng));
    CHECK(std::abs(p[0] + p[1] - 1.0) <= 1e-12);
  }

  // Loss of the averaged prediction, not the average of per-model losses.
  const auto d = testkit::dataset({{1.0}}, {2.0});
  CHECK(ensemble_mean_loss(ModelKind::linear(), models, Vector{0.5, 0.5}, d) == 0.0);
}

#include <gtest/gtest.h>

#include <numeric>

#include "fairpareto/paretostats.hpp"
#include "fairpareto/scalarize.hpp"

namespace fp = fairpareto;

TEST(Scalarize, FormulaExamples) {
  const std::vector<double> f1 = {0.3, 0.9};
  EXPECT_NEAR(fp::parego(f1, fp::WeightVector{{1.0, 0.0}}, 0.05), 0.315, 1e-12);
  const std::vector<double> f2 = {0.2, 0.4};
  EXPECT_NEAR(fp::parego(f2, fp::WeightVector{{0.5, 0.5}}, 0.05), 0.215, 1e-12);
  EXPECT_NEAR(fp::parego(f2, fp::WeightVector{{0.5, 0.5}}, 0.0), 0.2, 1e-12);
  const std::vector<double> zero = {0, 0};
  const std::vector<double> one = {1, 1};
  EXPECT_EQ(fp::parego(zero, fp::WeightVector{{0.3, 0.7}}), 0.0);
  EXPECT_NEAR(fp::parego(one, fp::WeightVector{{0.3, 0.7}}), 0.7 + 0.05, 1e-12);
  const std::vector<double> three = {0, 0, 0};
  EXPECT_THROW(fp::parego(three, fp::WeightVector{{0.5, 0.5}}), fp::DataError);
  EXPECT_DOUBLE_EQ(fp::kDefaultRho, 0.05);
}

TEST(Scalarize, MonotoneOnRandomTriples) {
  fp::Rng rng(7);
  for (int i = 0; i < 10000; ++i) {
    auto w = fp::sample_weights(rng, 2);
    if (w.lambda[0] <= 0 || w.lambda[1] <= 0) continue;
    std::vector<double> f = {fp::uniform01(rng), fp::uniform01(rng)};
    std::vector<double> g = {f[0] + (1 - f[0]) * fp::uniform01(rng), f[1] + (1 - f[1]) * fp::uniform01(rng)};
    ASSERT_LE(fp::parego(f, w, 0.05), fp::parego(g, w, 0.05));
  }
}

TEST(Scalarize, WeightsAreOnTheSimplexAndUniform) {
  fp::Rng a(1);
  fp::Rng b(1);
  EXPECT_EQ(fp::sample_weights(a, 3).lambda, fp::sample_weights(b, 3).lambda);
  fp::Rng rng(2);
  double sum1 = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const auto w = fp::sample_weights(rng, 2);
    EXPECT_NEAR(w.lambda[0] + w.lambda[1], 1.0, 1e-12);
    EXPECT_GE(w.lambda[0], 0.0);
    EXPECT_GE(w.lambda[1], 0.0);
    sum1 += w.lambda[0];
  }
  EXPECT_GE(sum1 / n, 0.48);
  EXPECT_LE(sum1 / n, 0.52);
  for (int i = 0; i < 1000; ++i) {
    const auto w = fp::sample_weights(rng, 4);
    EXPECT_NEAR(std::accumulate(w.lambda.begin(), w.lambda.end(), 0.0), 1.0, 1e-9);
  }
  EXPECT_THROW(fp::sample_weights(rng, 1), fp::ConfigError);
}

TEST(Scalarize, Normalize) {
  fp::NormalizationState s;
  s.observe(fp::ObjectiveVector{{"a", 1.0}, {"b", 5.0}});
  s.observe(fp::ObjectiveVector{{"a", 3.0}, {"b", 5.0}});
  s.observe(fp::ObjectiveValues{{"a", std::nullopt}, {"b", 5.0}});
  const auto lo = fp::normalize(s, {{"a", 1.0}, {"b", 5.0}});
  EXPECT_EQ(lo.at("a"), 0.0);
  EXPECT_EQ(lo.at("b"), 0.0);  // constant objective
  EXPECT_EQ(fp::normalize(s, {{"a", 3.0}, {"b", 5.0}}).at("a"), 1.0);
  EXPECT_EQ(fp::normalize(s, {{"a", 2.0}, {"b", 5.0}}).at("a"), 0.5);
  EXPECT_EQ(fp::normalize(s, {{"a", 9.0}, {"b", 5.0}}).at("a"), 1.0);
  EXPECT_EQ(fp::normalize(s, {{"a", -9.0}, {"b", 5.0}}).at("a"), 0.0);
  EXPECT_THROW(fp::normalize(s, {{"c", 0.0}}), fp::DataError);
}

TEST(Scalarize, MinimizerIsParetoOptimal) {
  fp::Rng rng(12);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<fp::ObjectiveVector> pts;
    for (int i = 0; i < 12; ++i) pts.push_back({{"a", fp::uniform01(rng)}, {"b", fp::uniform01(rng)}});
    auto w = fp::sample_weights(rng, 2);
    if (w.lambda[0] <= 0 || w.lambda[1] <= 0) continue;
    std::size_t best = 0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      if (fp::parego(pts[i], w) < fp::parego(pts[best], w)) best = i;
    }
    const auto front = fp::pareto_front_indices(pts);
    EXPECT_NE(std::find(front.begin(), front.end(), best), front.end());
  }
}

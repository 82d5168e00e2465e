/*
 * Copyright 2026 The fairpareto Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "fairpareto/surrogate.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <numeric>

namespace fairpareto {
namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double gain = 0.0;
};

double mean_cost(const TrainingMatrix& data, std::span<const std::size_t> idx) {
  double s = 0.0;
  for (auto i : idx) s += data.cost(i);
  return s / static_cast<double>(idx.size());
}

Split best_split(const TrainingMatrix& data, std::span<std::size_t> idx,
                 std::span<const std::size_t> features, std::size_t min_leaf) {
  Split best;
  const std::size_t n = idx.size();
  double total = 0.0;
  double total_sq = 0.0;
  for (auto i : idx) {
    total += data.cost(i);
    total_sq += data.cost(i) * data.cost(i);
  }
  const double parent_sse = total_sq - total * total / static_cast<double>(n);
  std::vector<std::size_t> sorted(idx.begin(), idx.end());
  for (std::size_t f : features) {
    std::stable_sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
      return data.features(a)[f] < data.features(b)[f];
    });
    double left = 0.0;
    double left_sq = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
      const double y = data.cost(sorted[k]);
      left += y;
      left_sq += y * y;
      const std::size_t n_left = k + 1;
      const std::size_t n_right = n - n_left;
      if (n_left < min_leaf) continue;
      if (n_right < min_leaf) break;
      const double xa = data.features(sorted[k])[f];
      const double xb = data.features(sorted[k + 1])[f];
      if (!(xa < xb)) continue;
      const double right = total - left;
      const double right_sq = total_sq - left_sq;
      const double sse = (left_sq - left * left / static_cast<double>(n_left)) +
                         (right_sq - right * right / static_cast<double>(n_right));
      const double gain = parent_sse - sse;
      if (gain > best.gain + 1e-12 * std::max(1.0, std::abs(parent_sse))) {
        best = {static_cast<int>(f), 0.5 * (xa + xb), gain};
      }
    }
  }
  return best;
}

double normal_pdf(double u) { return std::exp(-0.5 * u * u) / std::sqrt(2.0 * std::numbers::pi); }
double normal_cdf(double u) { return 0.5 * std::erfc(-u / std::numbers::sqrt2); }

}  // namespace

void TrainingMatrix::add_row(std::vector<double> features, double cost) {
  if (costs_.empty()) {
    width_ = features.size();
  } else if (features.size() != width_) {
    throw DataError(fmt::format("training row width {} != {}", features.size(), width_));
  }
  if (!std::isfinite(cost) ||
      !std::all_of(features.begin(), features.end(), [](double v) { return std::isfinite(v); })) {
    throw DataError("training rows must be finite");
  }
  features_.push_back(std::move(features));
  costs_.push_back(cost);
}

SurrogateModel SurrogateModel::fit(const TrainingMatrix& data, Rng& rng, const ForestOptions& options) {
  if (data.rows() == 0) throw DataError("cannot fit a surrogate on empty data");
  SurrogateModel model;
  model.width_ = data.width();
  const std::size_t n = data.rows();
  const std::size_t width = data.width();
  const std::size_t mtry =
      std::min(width, options.max_features > 0
                          ? options.max_features
                          : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(width)))));
  const std::size_t min_leaf = std::max<std::size_t>(1, options.min_leaf);

  std::vector<std::size_t> feature_pool(width);
  std::iota(feature_pool.begin(), feature_pool.end(), std::size_t{0});

  model.trees_.reserve(options.n_trees);
  for (std::size_t t = 0; t < options.n_trees; ++t) {
    std::vector<std::size_t> sample(n);
    for (auto& s : sample) s = uniform_index(rng, n);

    Tree tree;
    struct Pending {
      std::size_t node;
      std::size_t begin;
      std::size_t end;
    };
    tree.push_back(Node{});
    std::vector<Pending> stack{{0, 0, n}};
    while (!stack.empty()) {
      const Pending job = stack.back();
      stack.pop_back();
      std::span<std::size_t> idx(sample.data() + job.begin, job.end - job.begin);
      tree[job.node].value = mean_cost(data, idx);
      if (idx.size() < 2 * min_leaf || width == 0) continue;

      // Partial Fisher-Yates for a random feature subset.
      for (std::size_t k = 0; k < mtry; ++k) {
        std::swap(feature_pool[k], feature_pool[k + uniform_index(rng, width - k)]);
      }
      const Split split = best_split(data, idx, std::span(feature_pool).first(mtry), min_leaf);
      if (split.feature < 0) continue;

      const auto mid = std::stable_partition(idx.begin(), idx.end(), [&](std::size_t i) {
        return data.features(i)[static_cast<std::size_t>(split.feature)] <= split.threshold;
      });
      const std::size_t n_left = static_cast<std::size_t>(mid - idx.begin());
      const std::size_t left = tree.size();
      tree.push_back(Node{});
      const std::size_t right = tree.size();
      tree.push_back(Node{});
      tree[job.node].feature = split.feature;
      tree[job.node].threshold = split.threshold;
      tree[job.node].left = left;
      tree[job.node].right = right;
      stack.push_back({right, job.begin + n_left, job.end});
      stack.push_back({left, job.begin, job.begin + n_left});
    }
    model.trees_.push_back(std::move(tree));
  }
  return model;
}

double SurrogateModel::predict_tree(const Tree& tree, std::span<const double> x) {
  std::size_t node = 0;
  while (tree[node].feature >= 0) {
    node = x[static_cast<std::size_t>(tree[node].feature)] <= tree[node].threshold ? tree[node].left
                                                                                   : tree[node].right;
  }
  return tree[node].value;
}

Prediction SurrogateModel::predict(std::span<const double> x) const {
  if (x.size() != width_) {
    throw DataError(fmt::format("prediction input width {} != model width {}", x.size(), width_));
  }
  std::vector<double> outputs;
  outputs.reserve(trees_.size());
  for (const auto& tree : trees_) outputs.push_back(predict_tree(tree, x));
  const double mean =
      std::accumulate(outputs.begin(), outputs.end(), 0.0) / static_cast<double>(outputs.size());
  if (outputs.size() < 2) return {mean, 0.0};
  if (std::all_of(outputs.begin(), outputs.end(), [&](double v) { return v == outputs.front(); })) {
    return {outputs.front(), 0.0};
  }
  double ss = 0.0;
  for (double v : outputs) ss += (v - mean) * (v - mean);
  return {mean, ss / static_cast<double>(outputs.size() - 1)};
}

double expected_improvement(double mean, double variance, double best) {
  const double sigma = std::sqrt(std::max(variance, 0.0));
  const double diff = best - mean;
  if (sigma == 0.0) return std::max(diff, 0.0);
  const double u = diff / sigma;
  return std::max(diff * normal_cdf(u) + sigma * normal_pdf(u), 0.0);
}

NormalizationState history_normalization(std::span<const TrialRecord> history,
                                         std::span<const std::string> objectives) {
  std::map<std::string, int> top_fidelity;
  for (const auto& r : history) {
    if (!r.defined(objectives)) continue;
    auto& f = top_fidelity[config_key(r.config)];
    f = std::max(f, r.fidelity);
  }
  NormalizationState state;
  for (const auto& r : history) {
    auto values = r.defined(objectives);
    if (values && r.fidelity == top_fidelity[config_key(r.config)]) state.observe(*values);
  }
  return state;
}

Suggestion suggest(std::span<const TrialRecord> history, const SearchSpace& space,
                   std::span<const std::string> objectives, const WeightVector& weights,
                   int max_fidelity, Rng& rng, const SuggestOptions& options) {
  std::vector<const TrialRecord*> usable;
  for (const auto& r : history) {
    if (r.defined(objectives) && validate(space, r.config).empty()) usable.push_back(&r);
  }
  if (usable.size() < options.initial_design) return {sample(space, rng), false, 0.0};
  if (uniform01(rng) < options.random_fraction) return {sample(space, rng), false, 0.0};

  const NormalizationState norm = history_normalization(history, objectives);
  TrainingMatrix data;
  int top = 0;
  for (const auto* r : usable) top = std::max(top, r->fidelity);
  const double scale = static_cast<double>(max_fidelity);
  double best = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, const Configuration*>> ranked;
  for (const auto* r : usable) {
    auto features = encode(space, r->config);
    features.push_back(static_cast<double>(r->fidelity) / scale);
    const double cost = parego(normalize(norm, *r->defined(objectives)), weights, options.rho);
    data.add_row(std::move(features), cost);
    if (r->fidelity == top) best = std::min(best, cost);
    ranked.emplace_back(cost, &r->config);
  }
  const SurrogateModel model = SurrogateModel::fit(data, rng, options.forest);

  std::vector<Configuration> candidates;
  candidates.reserve(options.random_candidates + options.local_parents * options.local_per_parent);
  for (std::size_t i = 0; i < options.random_candidates; ++i) candidates.push_back(sample(space, rng));
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  std::vector<const Configuration*> parents;
  for (const auto& [cost, config] : ranked) {
    if (parents.size() == options.local_parents) break;
    if (std::none_of(parents.begin(), parents.end(), [&](const Configuration* p) { return *p == *config; })) {
      parents.push_back(config);
    }
  }
  for (const auto* parent : parents) {
    for (std::size_t k = 0; k < options.local_per_parent; ++k) {
      candidates.push_back(perturb(space, *parent, rng));
    }
  }

  const double query_fidelity = static_cast<double>(top) / scale;
  std::size_t arg = 0;
  double best_ei = -1.0;
  std::vector<double> x;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    x = encode(space, candidates[i]);
    x.push_back(query_fidelity);
    const auto pred = model.predict(x);
    const double ei = expected_improvement(pred.mean, pred.variance, best);
    if (ei > best_ei) {
      best_ei = ei;
      arg = i;
    }
  }
  return {std::move(candidates[arg]), true, best_ei};
}

}  // namespace fairpareto

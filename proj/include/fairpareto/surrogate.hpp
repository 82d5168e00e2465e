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

#pragma once

#include <span>
#include <string>
#include <vector>

#include "fairpareto/common.hpp"
#include "fairpareto/configspace.hpp"
#include "fairpareto/scalarize.hpp"
#include "fairpareto/trial.hpp"

namespace fairpareto {

/// Rows of (encoded configuration ++ normalized fidelity) with scalar costs.
class TrainingMatrix {
 public:
  void add_row(std::vector<double> features, double cost);

  std::size_t rows() const { return costs_.size(); }
  std::size_t width() const { return width_; }
  std::span<const double> features(std::size_t row) const { return features_[row]; }
  double cost(std::size_t row) const { return costs_[row]; }
  std::span<const double> costs() const { return costs_; }

 private:
  std::vector<std::vector<double>> features_;
  std::vector<double> costs_;
  std::size_t width_ = 0;
};

struct ForestOptions {
  std::size_t n_trees = 64;
  std::size_t min_leaf = 3;
  std::size_t max_features = 0;  // 0: ceil(sqrt(width))
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

/// Bagged regression trees. Each tree is grown on a bootstrap sample and
/// picks the best variance-reducing split among a random feature subset at
/// every node.
class SurrogateModel {
 public:
  /// Throws DataError for empty data.
  static SurrogateModel fit(const TrainingMatrix& data, Rng& rng, const ForestOptions& options = {});

  /// Mean and across-tree sample variance. Throws DataError on width mismatch.
  Prediction predict(std::span<const double> x) const;

  std::size_t width() const { return width_; }
  std::size_t n_trees() const { return trees_.size(); }

 private:
  struct Node {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    double value = 0.0;
    std::size_t left = 0;
    std::size_t right = 0;
  };
  using Tree = std::vector<Node>;

  static double predict_tree(const Tree& tree, std::span<const double> x);

  std::vector<Tree> trees_;
  std::size_t width_ = 0;
};

/// Expected improvement below `best` for a Gaussian prediction; reduces to
/// max(best - mean, 0) at zero variance.
double expected_improvement(double mean, double variance, double best);

struct SuggestOptions {
  std::size_t initial_design = 8;
  double random_fraction = 0.25;
  std::size_t random_candidates = 1000;
  std::size_t local_parents = 10;
  std::size_t local_per_parent = 10;
  double rho = kDefaultRho;
  ForestOptions forest;
};

struct Suggestion {
  Configuration config;
  bool model_based = false;
  double expected_improvement = 0.0;
};

/// Min-max state over, per configuration, the records at the highest fidelity
/// that configuration reached.
NormalizationState history_normalization(std::span<const TrialRecord> history,
                                         std::span<const std::string> objectives);

/// Next configuration to try. Random while fewer than `initial_design`
/// usable records exist and with probability `random_fraction` afterwards;
/// otherwise the argmax-EI candidate under a forest fitted on the
/// ParEGO-scalarized history (queried at the highest observed fidelity).
Suggestion suggest(std::span<const TrialRecord> history, const SearchSpace& space,
                   std::span<const std::string> objectives, const WeightVector& weights,
                   int max_fidelity, Rng& rng, const SuggestOptions& options = {});

}  // namespace fairpareto

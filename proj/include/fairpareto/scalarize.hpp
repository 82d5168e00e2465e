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
#include "fairpareto/trial.hpp"

namespace fairpareto {

inline constexpr double kDefaultRho = 0.05;

/// Non-negative weights summing to one.
struct WeightVector {
  std::vector<double> lambda;

  std::size_t size() const { return lambda.size(); }
};

/// Uniform draw from the unit simplex: sorted uniform cut points, weights are
/// the spacings. Throws ConfigError for k < 2.
WeightVector sample_weights(Rng& rng, std::size_t k);

/// Observed per-objective minimum and maximum.
class NormalizationState {
 public:
  void observe(const ObjectiveVector& values);
  void observe(const ObjectiveValues& values);  // undefined entries ignored

  bool covers(const std::string& objective) const { return bounds_.contains(objective); }
  std::pair<double, double> bounds(const std::string& objective) const;

 private:
  std::map<std::string, std::pair<double, double>> bounds_;
};

/// (v - min) / (max - min) clamped to [0, 1]; 0 when max == min.
/// Throws DataError for an objective the state has never observed.
ObjectiveVector normalize(const NormalizationState& state, const ObjectiveVector& values);

/// Augmented Tchebycheff: max_j(l_j f_j) + rho * sum_j(l_j f_j).
/// Throws DataError when the dimensions differ.
double parego(std::span<const double> normalized, const WeightVector& weights,
              double rho = kDefaultRho);

/// Convenience over ObjectiveVector in its (name-sorted) order.
double parego(const ObjectiveVector& normalized, const WeightVector& weights,
              double rho = kDefaultRho);

}  // namespace fairpareto

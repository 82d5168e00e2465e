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

#include "fairpareto/scalarize.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace fairpareto {

WeightVector sample_weights(Rng& rng, std::size_t k) {
  if (k < 2) throw ConfigError(fmt::format("ParEGO weights need k >= 2, got {}", k));
  std::vector<double> cuts(k - 1);
  for (auto& c : cuts) c = uniform01(rng);
  std::sort(cuts.begin(), cuts.end());
  WeightVector w;
  w.lambda.reserve(k);
  double prev = 0.0;
  for (double c : cuts) {
    w.lambda.push_back(c - prev);
    prev = c;
  }
  w.lambda.push_back(1.0 - prev);
  return w;
}

void NormalizationState::observe(const ObjectiveVector& values) {
  for (const auto& [name, v] : values) {
    auto [it, inserted] = bounds_.try_emplace(name, v, v);
    if (!inserted) {
      it->second.first = std::min(it->second.first, v);
      it->second.second = std::max(it->second.second, v);
    }
  }
}

void NormalizationState::observe(const ObjectiveValues& values) {
  ObjectiveVector defined;
  for (const auto& [name, v] : values) {
    if (v) defined[name] = *v;
  }
  observe(defined);
}

std::pair<double, double> NormalizationState::bounds(const std::string& objective) const {
  auto it = bounds_.find(objective);
  if (it == bounds_.end()) {
    throw DataError(fmt::format("objective '{}' has no observed range", objective));
  }
  return it->second;
}

ObjectiveVector normalize(const NormalizationState& state, const ObjectiveVector& values) {
  ObjectiveVector out;
  for (const auto& [name, v] : values) {
    const auto [lo, hi] = state.bounds(name);
    out[name] = hi == lo ? 0.0 : std::clamp((v - lo) / (hi - lo), 0.0, 1.0);
  }
  return out;
}

double parego(std::span<const double> normalized, const WeightVector& weights, double rho) {
  if (normalized.size() != weights.size()) {
    throw DataError(fmt::format("parego: {} objectives but {} weights", normalized.size(),
                                weights.size()));
  }
  double worst = 0.0;
  double sum = 0.0;
  for (std::size_t j = 0; j < normalized.size(); ++j) {
    const double term = weights.lambda[j] * normalized[j];
    worst = j == 0 ? term : std::max(worst, term);
    sum += term;
  }
  return worst + rho * sum;
}

double parego(const ObjectiveVector& normalized, const WeightVector& weights, double rho) {
  std::vector<double> f;
  f.reserve(normalized.size());
  for (const auto& [name, v] : normalized) f.push_back(v);
  return parego(f, weights, rho);
}

}  // namespace fairpareto

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

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fairpareto/trial.hpp"

namespace fairpareto {

/// a_i <= b_i for all i and a_j < b_j for some j. Throws DataError when the
/// objective names differ.
bool dominates(const ObjectiveVector& a, const ObjectiveVector& b);

/// Indices (ascending) of the non-dominated points. Identical vectors are all
/// retained. Empty input gives an empty result.
std::vector<std::size_t> pareto_front_indices(std::span<const ObjectiveVector> points);

struct AggregatedPoint {
  std::string config_key;
  ObjectiveVector mean;
  ObjectiveVector standard_error;  // s / sqrt(n); 0 when n == 1
  std::size_t n_seeds = 0;
};

struct ParetoFront {
  std::vector<AggregatedPoint> members;
};

/// Front of aggregated points, comparing their means.
ParetoFront pareto_front(std::span<const AggregatedPoint> points);

/// Wraps each vector as a single-seed point keyed by position (or by `keys`).
std::vector<AggregatedPoint> as_points(std::span<const ObjectiveVector> vectors,
                                       std::span<const std::string> keys = {});

struct AggregationResult {
  std::vector<AggregatedPoint> points;  // ordered by config key
  std::size_t skipped_configs = 0;      // no reported trial at the fidelity
  std::size_t skipped_undefined = 0;    // trials with undefined objectives
};

/// Per-configuration mean and standard error of the named objectives over the
/// reported trials at `fidelity`.
AggregationResult aggregate_seeds(std::span<const TrialRecord> trials, int fidelity,
                                  std::span<const std::string> objectives);

/// Area dominated by a two-objective front and bounded by `ref`, by sorting
/// on the first objective and sweeping. Every member must dominate `ref`.
double hypervolume2d(std::span<const ObjectiveVector> front, const ObjectiveVector& ref);

/// Conjunction of `<objective> <op> <real>` terms joined by `&&`, where op is
/// one of <, <=, >, >=.
class RecordFilter {
 public:
  struct Term {
    std::string objective;
    std::string op;
    double value = 0.0;
  };

  RecordFilter() = default;
  /// Throws ConfigError on malformed input.
  static RecordFilter parse(std::string_view text);

  /// Missing or undefined referenced objectives fail the filter.
  bool accepts(const ObjectiveValues& values) const;
  bool accepts(const ObjectiveVector& values) const;
  std::span<const Term> terms() const { return terms_; }

 private:
  std::vector<Term> terms_;
};

/// CSV `config_key,<o>_mean,<o>_stderr,...,n_seeds,on_front`.
void write_front_csv(std::ostream& out, std::span<const AggregatedPoint> points,
                     std::span<const std::string> objectives,
                     std::span<const std::size_t> front_indices);

struct FrontCsvRow {
  AggregatedPoint point;
  bool on_front = false;
};
std::vector<FrontCsvRow> read_front_csv(std::istream& in);

}  // namespace fairpareto

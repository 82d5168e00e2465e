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

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fairpareto/asha.hpp"
#include "fairpareto/paretostats.hpp"
#include "fairpareto/runner.hpp"
#include "fairpareto/store.hpp"
#include "fairpareto/surrogate.hpp"

namespace fairpareto {

/// At least one of max_trials / max_full_fidelity_equivalents must be set.
/// A full-fidelity equivalent is one evaluation at max fidelity; a trial at
/// fidelity f costs f / max (or the resumed difference).
struct SearchBudget {
  std::optional<std::size_t> max_trials;
  std::optional<double> max_full_fidelity_equivalents;
  std::optional<std::chrono::milliseconds> wall_clock_limit;

  /// Throws ConfigError when no limit is set or a limit is not positive.
  void validate() const;
};

struct SearchSettings {
  int min_fidelity = 25;
  int max_fidelity = 100;
  int eta = 2;
  double rho = kDefaultRho;
  std::size_t n_workers = 1;
  std::uint64_t seed = 0;
  SearchBudget budget;
  /// Empty: the backend's default objectives.
  std::vector<std::string> objectives;
  /// Abort with BackendError after this many failed trials in a row.
  std::size_t max_consecutive_failures = 5;
  SuggestOptions suggest;
};

struct SearchResult {
  std::vector<TrialRecord> history;        // terminal records in completion order
  std::vector<std::string> objectives;
  std::vector<AggregatedPoint> max_fidelity_points;
  std::vector<std::size_t> front_indices;  // into max_fidelity_points
  ParetoFront front;
  double consumed_full_fidelity = 0.0;
  std::size_t failed_trials = 0;
  std::size_t cancelled_trials = 0;
  RungLadder ladder;
};

/// Runs the multi-fidelity search loop: ASHA decides what to run next, the
/// surrogate proposes new configurations under a fresh ParEGO weight per
/// proposal, completions are scalarized with the current weight and reported
/// to ASHA and to `log`. All scheduling state is touched by the calling thread
/// only; evaluations run on up to n_workers threads.
///
/// Failed evaluations are logged as failed and reported to ASHA with the worst
/// scalarized cost seen so far. Throws BackendError once
/// max_consecutive_failures failures happen in a row.
SearchResult run_search(const SearchSpace& space, ObjectiveBackend& backend,
                        const SearchSettings& settings, RunLogWriter* log = nullptr);

/// Derived per-trial seed: non-negative, 31 bits.
std::int64_t trial_seed(std::uint64_t search_seed, std::uint64_t counter);

}  // namespace fairpareto

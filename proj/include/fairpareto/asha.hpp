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

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fairpareto/common.hpp"
#include "fairpareto/configspace.hpp"

namespace fairpareto {

/// Geometric fidelity ladder min, min*eta, ..., with the last rung clamped to
/// max exactly.
struct RungLadder {
  std::vector<int> fidelities;
  int eta = 2;

  std::size_t size() const { return fidelities.size(); }
  int min_fidelity() const { return fidelities.front(); }
  int max_fidelity() const { return fidelities.back(); }
  std::size_t top() const { return fidelities.size() - 1; }
  /// Rung index of a fidelity, or nullopt if it is not on the ladder.
  std::optional<std::size_t> rung_of(int fidelity) const;
};

/// Throws ConfigError unless 0 < min_f <= max_f and eta >= 2.
RungLadder make_ladder(int min_f, int max_f, int eta);

struct AshaJob {
  std::string trial_id;
  Configuration config;
  std::size_t rung = 0;
  int fidelity = 0;
  /// Fidelity the trial already completed (set for promotions).
  std::optional<int> previous_fidelity;
};

/// Promotion-type asynchronous successive halving over one ladder.
/// Not thread-safe: callers serialize next_job/report/cancel.
class AshaScheduler {
 public:
  using SuggestFn = std::function<Configuration()>;

  explicit AshaScheduler(RungLadder ladder);

  /// Scans rungs from the highest non-top rung down. At rung r the best
  /// completed, unpromoted trial inside the top floor(|completed(r)|/eta) by
  /// cost is promoted to r+1, provided the rung has promoted fewer than that
  /// many; cost ties go to the earlier completion. With no
  /// promotable trial anywhere, a fresh configuration from `suggest` starts at
  /// the base rung.
  AshaJob next_job(const SuggestFn& suggest);

  /// Records a result for a trial pending at `rung`. Throws Error for unknown
  /// trials, wrong rungs and duplicate reports.
  void report(const std::string& trial_id, std::size_t rung, double cost);

  /// Drops a pending trial without a result. Returns false if not pending.
  bool cancel(const std::string& trial_id);

  const RungLadder& ladder() const { return ladder_; }
  std::size_t completed_count(std::size_t rung) const { return rungs_.at(rung).completed.size(); }
  std::size_t promoted_count(std::size_t rung) const { return rungs_.at(rung).promoted.size(); }
  std::size_t pending_count() const { return pending_.size(); }
  std::optional<std::size_t> pending_rung(const std::string& trial_id) const;
  std::set<std::string> completed_ids(std::size_t rung) const;
  const std::set<std::string>& promoted_ids(std::size_t rung) const {
    return rungs_.at(rung).promoted;
  }
  std::optional<double> cost(const std::string& trial_id, std::size_t rung) const;
  const Configuration& config_of(const std::string& trial_id) const { return configs_.at(trial_id); }

  /// Throws std::logic_error if any scheduler invariant is broken.
  void check_invariants() const;

 private:
  struct Completion {
    double cost = 0.0;
    std::uint64_t sequence = 0;
  };
  struct Rung {
    std::map<std::string, Completion> completed;
    std::set<std::string> promoted;
  };

  std::optional<std::string> promotable(std::size_t rung) const;

  RungLadder ladder_;
  std::vector<Rung> rungs_;
  std::map<std::string, std::size_t> pending_;
  std::map<std::string, Configuration> configs_;
  std::uint64_t next_trial_ = 0;
  std::uint64_t next_sequence_ = 0;
};

}  // namespace fairpareto

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

#include "fairpareto/asha.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <stdexcept>

namespace fairpareto {

std::optional<std::size_t> RungLadder::rung_of(int fidelity) const {
  auto it = std::find(fidelities.begin(), fidelities.end(), fidelity);
  if (it == fidelities.end()) return std::nullopt;
  return static_cast<std::size_t>(it - fidelities.begin());
}

RungLadder make_ladder(int min_f, int max_f, int eta) {
  if (min_f <= 0 || max_f < min_f) {
    throw ConfigError(fmt::format("fidelities must satisfy 0 < min <= max (got {}, {})", min_f, max_f));
  }
  if (eta < 2) throw ConfigError(fmt::format("eta must be >= 2 (got {})", eta));
  RungLadder ladder;
  ladder.eta = eta;
  long long f = min_f;
  while (f < max_f) {
    ladder.fidelities.push_back(static_cast<int>(f));
    f *= eta;
  }
  ladder.fidelities.push_back(max_f);
  return ladder;
}

AshaScheduler::AshaScheduler(RungLadder ladder) : ladder_(std::move(ladder)), rungs_(ladder_.size()) {}

std::optional<std::string> AshaScheduler::promotable(std::size_t rung) const {
  const auto& completed = rungs_[rung].completed;
  const std::size_t k = completed.size() / static_cast<std::size_t>(ladder_.eta);
  // Rankings shift as results arrive, so the top-k test alone would let the
  // promoted set outgrow floor(n/eta).
  if (k == 0 || rungs_[rung].promoted.size() >= k) return std::nullopt;
  std::vector<std::pair<const std::string*, const Completion*>> ranked;
  ranked.reserve(completed.size());
  for (const auto& [id, c] : completed) ranked.emplace_back(&id, &c);
  std::partial_sort(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(k), ranked.end(),
                    [](const auto& a, const auto& b) {
                      if (a.second->cost != b.second->cost) return a.second->cost < b.second->cost;
                      return a.second->sequence < b.second->sequence;
                    });
  for (std::size_t i = 0; i < k; ++i) {
    if (!rungs_[rung].promoted.contains(*ranked[i].first)) return *ranked[i].first;
  }
  return std::nullopt;
}

AshaJob AshaScheduler::next_job(const SuggestFn& suggest) {
  for (std::size_t r = ladder_.top(); r-- > 0;) {
    if (auto id = promotable(r)) {
      rungs_[r].promoted.insert(*id);
      pending_[*id] = r + 1;
      return AshaJob{*id, configs_.at(*id), r + 1, ladder_.fidelities[r + 1],
                     ladder_.fidelities[r]};
    }
  }
  std::string id = fmt::format("t{}", next_trial_++);
  Configuration config = suggest();
  configs_[id] = config;
  pending_[id] = 0;
  return AshaJob{std::move(id), std::move(config), 0, ladder_.fidelities.front(), std::nullopt};
}

void AshaScheduler::report(const std::string& trial_id, std::size_t rung, double cost) {
  if (rung >= rungs_.size()) throw Error(fmt::format("rung {} is not on the ladder", rung));
  auto it = pending_.find(trial_id);
  if (it == pending_.end()) {
    if (rungs_[rung].completed.contains(trial_id)) {
      throw Error(fmt::format("duplicate report for trial {} at rung {}", trial_id, rung));
    }
    throw Error(fmt::format("trial {} is not pending", trial_id));
  }
  if (it->second != rung) {
    throw Error(fmt::format("trial {} is pending at rung {}, not {}", trial_id, it->second, rung));
  }
  pending_.erase(it);
  rungs_[rung].completed.emplace(trial_id, Completion{cost, next_sequence_++});
}

bool AshaScheduler::cancel(const std::string& trial_id) { return pending_.erase(trial_id) > 0; }

std::optional<std::size_t> AshaScheduler::pending_rung(const std::string& trial_id) const {
  auto it = pending_.find(trial_id);
  if (it == pending_.end()) return std::nullopt;
  return it->second;
}

std::set<std::string> AshaScheduler::completed_ids(std::size_t rung) const {
  std::set<std::string> ids;
  for (const auto& [id, c] : rungs_.at(rung).completed) ids.insert(id);
  return ids;
}

std::optional<double> AshaScheduler::cost(const std::string& trial_id, std::size_t rung) const {
  const auto& completed = rungs_.at(rung).completed;
  auto it = completed.find(trial_id);
  if (it == completed.end()) return std::nullopt;
  return it->second.cost;
}

void AshaScheduler::check_invariants() const {
  for (std::size_t r = 0; r < rungs_.size(); ++r) {
    const auto& rung = rungs_[r];
    const std::size_t cap = rung.completed.size() / static_cast<std::size_t>(ladder_.eta);
    if (rung.promoted.size() > cap) {
      throw std::logic_error(fmt::format("rung {}: {} promoted exceeds floor({}/{})", r,
                                         rung.promoted.size(), rung.completed.size(), ladder_.eta));
    }
    for (const auto& id : rung.promoted) {
      if (!rung.completed.contains(id)) {
        throw std::logic_error(fmt::format("rung {}: promoted {} never completed", r, id));
      }
    }
    if (r > 0) {
      for (const auto& [id, c] : rung.completed) {
        if (!rungs_[r - 1].promoted.contains(id)) {
          throw std::logic_error(fmt::format("rung {}: {} skipped rung {}", r, id, r - 1));
        }
      }
    }
  }
}

}  // namespace fairpareto

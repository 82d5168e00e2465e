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

#include "fairpareto/orchestrator.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <condition_variable>
#include <deque>
#include <map>
#include <mutex>
#include <thread>

#include "fairpareto/scalarize.hpp"

namespace fairpareto {
namespace {

using Clock = std::chrono::steady_clock;

struct Completion {
  std::string trial_id;
  EvaluationResult result;
};

struct InFlight {
  AshaJob job;
  std::int64_t seed = 0;
  std::jthread thread;
};

class CompletionQueue {
 public:
  void push(Completion c) {
    {
      std::lock_guard lock(mutex_);
      queue_.push_back(std::move(c));
    }
    cv_.notify_one();
  }

  std::optional<Completion> pop_until(std::optional<Clock::time_point> deadline) {
    std::unique_lock lock(mutex_);
    auto ready = [&] { return !queue_.empty(); };
    if (deadline) {
      if (!cv_.wait_until(lock, *deadline, ready)) return std::nullopt;
    } else {
      cv_.wait(lock, ready);
    }
    Completion c = std::move(queue_.front());
    queue_.pop_front();
    return c;
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<Completion> queue_;
};

}  // namespace

void SearchBudget::validate() const {
  if (!max_trials && !max_full_fidelity_equivalents) {
    throw ConfigError("search budget needs max_trials or max_full_fidelity_equivalents");
  }
  if (max_trials && *max_trials == 0) throw ConfigError("max_trials must be positive");
  if (max_full_fidelity_equivalents && !(*max_full_fidelity_equivalents > 0.0)) {
    throw ConfigError("full-fidelity budget must be positive");
  }
  if (wall_clock_limit && wall_clock_limit->count() <= 0) {
    throw ConfigError("wall-clock limit must be positive");
  }
}

std::int64_t trial_seed(std::uint64_t search_seed, std::uint64_t counter) {
  return static_cast<std::int64_t>(mix_seed(search_seed + counter) >> 33);
}

SearchResult run_search(const SearchSpace& space, ObjectiveBackend& backend,
                        const SearchSettings& settings, RunLogWriter* log_writer) {
  settings.budget.validate();
  if (settings.n_workers == 0) throw ConfigError("need at least one worker");
  if (!(settings.rho >= 0.0)) throw ConfigError("rho must be non-negative");
  if (settings.max_consecutive_failures == 0) throw ConfigError("max_consecutive_failures must be positive");

  SearchResult result;
  result.ladder = make_ladder(settings.min_fidelity, settings.max_fidelity, settings.eta);
  result.objectives = settings.objectives.empty() ? backend.default_objectives() : settings.objectives;
  const auto& objectives = result.objectives;
  if (objectives.size() < 2) throw ConfigError("multi-objective search needs at least two objectives");

  AshaScheduler asha(result.ladder);
  Rng rng(settings.seed);
  SuggestOptions suggest_options = settings.suggest;
  suggest_options.rho = settings.rho;
  const double max_f = static_cast<double>(settings.max_fidelity);

  WeightVector weight = sample_weights(rng, objectives.size());
  std::optional<double> worst_cost;
  std::map<std::string, std::int64_t> seeds;
  std::map<std::string, int> resumable_at;
  std::map<std::string, InFlight> in_flight;
  CompletionQueue completions;
  std::size_t dispatched = 0;
  std::size_t consecutive_failures = 0;
  bool stopping = false;
  std::optional<std::string> abort_reason;
  const auto deadline = settings.budget.wall_clock_limit
                            ? std::optional(Clock::now() + *settings.budget.wall_clock_limit)
                            : std::nullopt;

  auto budget_left = [&] {
    if (stopping) return false;
    if (settings.budget.max_trials && dispatched >= *settings.budget.max_trials) return false;
    if (settings.budget.max_full_fidelity_equivalents &&
        result.consumed_full_fidelity >= *settings.budget.max_full_fidelity_equivalents - 1e-12) {
      return false;
    }
    return !deadline || Clock::now() < *deadline;
  };

  auto dispatch = [&] {
    AshaJob job = asha.next_job([&] {
      weight = sample_weights(rng, objectives.size());
      auto s = suggest(result.history, space, objectives, weight, settings.max_fidelity, rng,
                       suggest_options);
      log().debug("suggested {} ({})", canonical_string(s.config),
                  s.model_based ? fmt::format("EI {:.4g}", s.expected_improvement) : "random");
      return std::move(s.config);
    });
    auto [seed_it, fresh] = seeds.try_emplace(job.trial_id, trial_seed(settings.seed, dispatched));
    EvaluationRequest request{job.trial_id, job.config, job.fidelity, seed_it->second, std::nullopt};
    double cost_epochs = job.fidelity;
    if (job.previous_fidelity) {
      auto it = resumable_at.find(job.trial_id);
      if (it != resumable_at.end() && it->second == *job.previous_fidelity) {
        request.resume_from = *job.previous_fidelity;
        cost_epochs -= *job.previous_fidelity;
      }
    }
    result.consumed_full_fidelity += cost_epochs / max_f;
    ++dispatched;
    log().info("{} -> fidelity {} (rung {}){}", job.trial_id, job.fidelity, job.rung,
               request.resume_from ? fmt::format(", resuming from {}", *request.resume_from) : "");
    InFlight slot{std::move(job), request.seed, {}};
    const std::string id = request.trial_id;
    slot.thread = std::jthread([&backend, &completions, request = std::move(request)](std::stop_token st) {
      EvaluationResult r;
      try {
        r = backend.evaluate(request, st);
      } catch (const std::exception& e) {
        r = EvaluationResult::failed(e.what());
      }
      completions.push({request.trial_id, std::move(r)});
    });
    in_flight.emplace(id, std::move(slot));
  };

  auto append = [&](TrialRecord record) {
    if (log_writer) log_writer->append(record);
    result.history.push_back(std::move(record));
  };

  auto complete = [&](Completion c) {
    auto node = in_flight.extract(c.trial_id);
    InFlight& slot = node.mapped();
    slot.thread.join();
    const AshaJob& job = slot.job;
    TrialRecord record{job.trial_id, job.config, slot.seed, job.fidelity, TrialStatus::failed,
                       std::nullopt, c.result.wall_time_s};

    if (stopping && !c.result.ok) {
      ++result.cancelled_trials;
      ++result.failed_trials;
      asha.cancel(job.trial_id);
      log().warn("{} cancelled at fidelity {}: {}", job.trial_id, job.fidelity, c.result.failure);
      append(std::move(record));
      return;
    }

    std::optional<double> cost;
    if (c.result.ok) {
      consecutive_failures = 0;
      record.status = TrialStatus::reported;
      record.objectives = c.result.objectives;
      if (c.result.resumable) {
        resumable_at[job.trial_id] = job.fidelity;
      } else {
        resumable_at.erase(job.trial_id);
      }
      append(record);
      if (auto values = record.defined(objectives)) {
        const auto norm = history_normalization(result.history, objectives);
        cost = parego(normalize(norm, *values), weight, settings.rho);
      } else {
        log().warn("{} reported undefined or missing objectives; imputing worst cost", job.trial_id);
      }
    } else {
      ++result.failed_trials;
      ++consecutive_failures;
      log().warn("{} failed at fidelity {}: {}", job.trial_id, job.fidelity, c.result.failure);
      append(std::move(record));
      if (consecutive_failures >= settings.max_consecutive_failures) {
        abort_reason = fmt::format("{} consecutive failed trials; last: {}", consecutive_failures,
                                   c.result.failure);
      }
    }
    if (cost) {
      worst_cost = std::max(worst_cost.value_or(*cost), *cost);
    }
    asha.report(job.trial_id, job.rung, cost.value_or(worst_cost.value_or(1.0 + settings.rho)));
  };

  while (true) {
    while (!abort_reason && in_flight.size() < settings.n_workers && budget_left()) dispatch();
    if (in_flight.empty()) break;
    auto c = completions.pop_until(stopping ? std::nullopt : deadline);
    if (!c) {
      stopping = true;
      log().warn("wall-clock limit reached; cancelling {} running trial(s)", in_flight.size());
      for (auto& [id, slot] : in_flight) slot.thread.request_stop();
      continue;
    }
    complete(std::move(*c));
    if (abort_reason && !stopping) {
      stopping = true;
      for (auto& [id, slot] : in_flight) slot.thread.request_stop();
    }
  }
  asha.check_invariants();
  if (abort_reason) throw BackendError(*abort_reason);

  auto aggregated = aggregate_seeds(result.history, settings.max_fidelity, objectives);
  result.max_fidelity_points = std::move(aggregated.points);
  std::vector<ObjectiveVector> means;
  for (const auto& p : result.max_fidelity_points) means.push_back(p.mean);
  result.front_indices = pareto_front_indices(means);
  result.front = pareto_front(result.max_fidelity_points);
  log().info("search finished: {} records, {} failed, {:.3g} full-fidelity equivalents, front of {}",
             result.history.size(), result.failed_trials, result.consumed_full_fidelity,
             result.front.members.size());
  return result;
}

}  // namespace fairpareto

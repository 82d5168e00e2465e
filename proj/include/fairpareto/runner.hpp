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
#include <memory>
#include <span>
#include <stop_token>
#include <string>
#include <vector>

#include "fairpareto/configspace.hpp"
#include "fairpareto/trial.hpp"

namespace fairpareto {

/// ZDT1 with an additive fidelity bias b = 0.5 * (1 - s):
///   g  = 1 + 9 * mean(x_2..x_n)
///   f1 = x_1 + b
///   f2 = g * (1 - sqrt(x_1 / g)) + b
/// Throws ConfigError for n < 2, x outside [0,1], or s outside (0,1].
ObjectiveVector zdt1_mf(std::span<const double> x, double fidelity_fraction);

/// Folds the encoding of `config` onto n coordinates in [0,1]: coordinate i
/// is the mean of encoded entries j with j % n == i.
std::vector<double> builtin_point(const SearchSpace& space, const Configuration& config,
                                  std::size_t n);

struct EvaluationRequest {
  std::string trial_id;
  Configuration config;
  int fidelity = 0;
  std::int64_t seed = 0;
  std::optional<int> resume_from;
};

struct ProgressReport {
  int fidelity = 0;
  ObjectiveValues objectives;
};

struct EvaluationResult {
  bool ok = false;
  ObjectiveValues objectives;
  std::string failure;  // set when !ok
  double wall_time_s = 0.0;
  bool resumable = false;
  std::vector<ProgressReport> progress;

  static EvaluationResult failed(std::string why, double wall_time_s = 0.0);
};

/// Produces objective values for a configuration at a fidelity. Must be safe
/// to call from several threads at once.
class ObjectiveBackend {
 public:
  virtual ~ObjectiveBackend() = default;

  /// Never throws for evaluation problems; those come back as failed results.
  /// A stop request cancels the evaluation.
  virtual EvaluationResult evaluate(const EvaluationRequest& request, std::stop_token stop) = 0;
  virtual std::vector<std::string> default_objectives() const = 0;
  virtual std::string describe() const = 0;
};

/// zdt1_mf on builtin_point(config). Deterministic; ignores the seed and
/// reports zero wall time.
class BuiltinBackend final : public ObjectiveBackend {
 public:
  BuiltinBackend(SearchSpace space, int max_fidelity, std::size_t dims = 6);

  EvaluationResult evaluate(const EvaluationRequest& request, std::stop_token stop) override;
  std::vector<std::string> default_objectives() const override { return {"f1", "f2"}; }
  std::string describe() const override;

 private:
  SearchSpace space_;
  int max_fidelity_;
  std::size_t dims_;
};

/// Spawns `/bin/sh -c <command>` per evaluation and speaks the worker
/// protocol over its stdin/stdout. The worker's stderr is inherited.
class WorkerBackend final : public ObjectiveBackend {
 public:
  WorkerBackend(std::string command, std::chrono::milliseconds timeout,
                std::vector<std::string> objectives = {"error", "rank_disparity"});

  EvaluationResult evaluate(const EvaluationRequest& request, std::stop_token stop) override;
  std::vector<std::string> default_objectives() const override { return objectives_; }
  std::string describe() const override { return "worker:" + command_; }

 private:
  std::string command_;
  std::chrono::milliseconds timeout_;
  std::vector<std::string> objectives_;
};

/// Loads an embedding file per evaluation from a path template and reports
/// {error, rank_disparity}. Placeholders: {trial_id} {fidelity} {seed}
/// {config_key}. With more than two groups rank_disparity is max-pairwise.
class EmbeddingsBackend final : public ObjectiveBackend {
 public:
  explicit EmbeddingsBackend(std::string path_template);

  EvaluationResult evaluate(const EvaluationRequest& request, std::stop_token stop) override;
  std::vector<std::string> default_objectives() const override { return {"error", "rank_disparity"}; }
  std::string describe() const override { return "embeddings:" + template_; }

  std::string resolve(const EvaluationRequest& request) const;

 private:
  std::string template_;
};

struct BackendOptions {
  int max_fidelity = 100;
  std::size_t zdt_dims = 6;
  std::chrono::milliseconds timeout{std::chrono::hours(24)};
};

/// Parses `builtin:zdt1`, `worker:<command>` or `embeddings:<template>`.
/// Throws ConfigError for anything else.
std::unique_ptr<ObjectiveBackend> make_backend(const std::string& spec, const SearchSpace& space,
                                               const BackendOptions& options);

}  // namespace fairpareto

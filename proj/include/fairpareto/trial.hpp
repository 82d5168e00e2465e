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

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "fairpareto/common.hpp"
#include "fairpareto/configspace.hpp"

namespace fairpareto {

/// Named cost values, all minimized. Finite by contract.
using ObjectiveVector = std::map<std::string, double>;

/// Objective values as reported by a backend; entries may be undefined.
using ObjectiveValues = std::map<std::string, MaybeReal>;

enum class TrialStatus { running, reported, failed };

std::string_view to_string(TrialStatus s);
TrialStatus parse_trial_status(std::string_view s);

/// One evaluation of a configuration at a fidelity and seed.
struct TrialRecord {
  std::string trial_id;
  Configuration config;
  std::int64_t seed = 0;
  int fidelity = 0;
  TrialStatus status = TrialStatus::running;
  std::optional<ObjectiveValues> objectives;  // present iff status == reported
  double wall_time_s = 0.0;

  /// The requested objectives as finite values, or nullopt if any is missing
  /// or undefined.
  std::optional<ObjectiveVector> defined(std::span<const std::string> names) const;

  friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

}  // namespace fairpareto

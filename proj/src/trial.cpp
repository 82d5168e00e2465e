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

#include "fairpareto/trial.hpp"

#include <fmt/format.h>

namespace fairpareto {

std::string_view to_string(TrialStatus s) {
  switch (s) {
    case TrialStatus::running: return "running";
    case TrialStatus::reported: return "reported";
    case TrialStatus::failed: return "failed";
  }
  return "unknown";
}

TrialStatus parse_trial_status(std::string_view s) {
  if (s == "running") return TrialStatus::running;
  if (s == "reported") return TrialStatus::reported;
  if (s == "failed") return TrialStatus::failed;
  throw DataError(fmt::format("unknown trial status '{}'", s));
}

std::optional<ObjectiveVector> TrialRecord::defined(std::span<const std::string> names) const {
  if (status != TrialStatus::reported || !objectives) return std::nullopt;
  ObjectiveVector out;
  for (const auto& name : names) {
    auto it = objectives->find(name);
    if (it == objectives->end() || !it->second) return std::nullopt;
    out[name] = *it->second;
  }
  return out;
}

}  // namespace fairpareto

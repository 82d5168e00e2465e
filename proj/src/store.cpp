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

#include "fairpareto/store.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <json.hpp>

namespace fairpareto {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;

const nlohmann::json& field(const nlohmann::json& j, const char* name) {
  if (!j.contains(name)) throw DataError(fmt::format("missing field '{}'", name));
  return j.at(name);
}

}  // namespace

std::string encode_record(const TrialRecord& record) {
  ordered_json j;
  j["v"] = kSchemaVersion;
  j["trial_id"] = record.trial_id;
  j["config"] = ordered_json::parse(to_json(record.config).dump());
  j["seed"] = record.seed;
  j["fidelity"] = record.fidelity;
  j["status"] = std::string(to_string(record.status));
  if (record.objectives) {
    ordered_json obj = ordered_json::object();
    for (const auto& [name, v] : *record.objectives) {
      if (v) {
        obj[name] = *v;
      } else {
        obj[name] = nullptr;
      }
    }
    j["objectives"] = std::move(obj);
  } else {
    j["objectives"] = nullptr;
  }
  j["wall_time_s"] = record.wall_time_s;
  return j.dump();
}

TrialRecord decode_record(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    throw DataError("not valid JSON");
  }
  if (!j.is_object()) throw DataError("record must be a JSON object");
  try {
    const auto& v = field(j, "v");
    if (!v.is_number_integer() || v.get<int>() != kSchemaVersion) {
      throw DataError(fmt::format("unsupported schema version {}", v.dump()));
    }
    TrialRecord r;
    r.trial_id = field(j, "trial_id").get<std::string>();
    r.config = configuration_from_json(field(j, "config"));
    const auto& seed = field(j, "seed");
    const auto& fidelity = field(j, "fidelity");
    if (!seed.is_number_integer() || !fidelity.is_number_integer()) {
      throw DataError("seed and fidelity must be integers");
    }
    r.seed = seed.get<std::int64_t>();
    r.fidelity = fidelity.get<int>();
    try {
      r.status = parse_trial_status(field(j, "status").get<std::string>());
    } catch (const Error& e) {
      throw DataError(e.what());
    }
    const auto& obj = field(j, "objectives");
    if (!obj.is_null()) {
      if (!obj.is_object()) throw DataError("objectives must be an object or null");
      ObjectiveValues values;
      for (const auto& [name, val] : obj.items()) {
        if (val.is_null()) {
          values[name] = std::nullopt;
        } else if (val.is_number()) {
          values[name] = val.get<double>();
        } else {
          throw DataError(fmt::format("objective '{}' must be a number or null", name));
        }
      }
      r.objectives = std::move(values);
    }
    if ((r.status == TrialStatus::reported) != r.objectives.has_value()) {
      throw DataError("objectives must be present exactly for reported records");
    }
    const auto& wall = field(j, "wall_time_s");
    if (!wall.is_number()) throw DataError("wall_time_s must be a number");
    r.wall_time_s = wall.get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(fmt::format("mistyped field: {}", e.what()));
  }
}

RunLogWriter::RunLogWriter(std::filesystem::path path, Mode mode) : path_(std::move(path)) {
  out_.open(path_, mode == Mode::truncate ? std::ios::out | std::ios::trunc
                                          : std::ios::out | std::ios::app);
  if (!out_) throw Error(fmt::format("cannot open run log '{}' for writing", path_.string()));
}

void RunLogWriter::append(const TrialRecord& record) {
  out_ << encode_record(record) << '\n';
  out_.flush();
  if (!out_) throw Error(fmt::format("failed writing run log '{}'", path_.string()));
}

RunLog load_run_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open run log '{}'", path.string()));
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(std::move(line));
  while (!lines.empty() && lines.back().empty()) lines.pop_back();

  RunLog log_;
  log_.path = path;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    try {
      log_.records.push_back(decode_record(lines[i]));
    } catch (const DataError& e) {
      if (i + 1 == lines.size()) {
        log().warn("{}: skipping malformed final line {} ({})", path.string(), i + 1, e.what());
        log_.skipped_trailing = 1;
      } else {
        throw DataError(fmt::format("{}: line {}: {}", path.string(), i + 1, e.what()));
      }
    }
  }
  return log_;
}

std::vector<TrialRecord> load_run_logs(std::span<const std::filesystem::path> paths) {
  std::vector<TrialRecord> all;
  for (const auto& p : paths) {
    auto log_ = load_run_log(p);
    all.insert(all.end(), std::make_move_iterator(log_.records.begin()),
               std::make_move_iterator(log_.records.end()));
  }
  return all;
}

}  // namespace fairpareto

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

#include <filesystem>
#include <span>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

#include "fairpareto/trial.hpp"

namespace fairpareto {

/// One JSON Lines entry per record:
///   {"v":1,"trial_id":..,"config":{..},"seed":..,"fidelity":..,"status":..,
///    "objectives":{..}|null,"wall_time_s":..}
/// Undefined objective values are written as null.
std::string encode_record(const TrialRecord& record);

/// Throws DataError for malformed lines or an unsupported schema version.
TrialRecord decode_record(std::string_view line);

/// Append-only writer. Every append is flushed before it returns.
class RunLogWriter {
 public:
  enum class Mode { truncate, append };

  /// Throws Error when the file cannot be opened for writing.
  explicit RunLogWriter(std::filesystem::path path, Mode mode = Mode::truncate);

  void append(const TrialRecord& record);
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::ofstream out_;
};

struct RunLog {
  std::filesystem::path path;
  std::vector<TrialRecord> records;
  /// 1 when a malformed final line (an interrupted append) was dropped.
  std::size_t skipped_trailing = 0;
};

/// Parses every line. A malformed last line is skipped with a warning; a
/// malformed earlier line is a DataError naming its 1-based line number.
/// A missing file is a DataError.
RunLog load_run_log(const std::filesystem::path& path);

/// Concatenated records of several logs, in order.
std::vector<TrialRecord> load_run_logs(std::span<const std::filesystem::path> paths);

}  // namespace fairpareto

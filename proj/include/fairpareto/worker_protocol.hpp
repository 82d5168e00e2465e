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

#include <optional>
#include <string>
#include <string_view>

#include "fairpareto/common.hpp"
#include "fairpareto/configspace.hpp"
#include "fairpareto/trial.hpp"

namespace fairpareto {

/// Line-delimited JSON exchanged with external workers over stdin/stdout.
///
///   -> {"type":"start","trial_id":"t17","config":{...},"fidelity":50,"seed":3}
///   <- {"type":"progress","trial_id":"t17","fidelity":25,"objectives":{...}}
///   <- {"type":"final","trial_id":"t17","fidelity":50,"objectives":{...}}
///   <- {"type":"fail","trial_id":"t17","message":"..."}
///
/// Optional extensions: "resume_from" on start (only sent to workers that
/// declared "resumable": true in an earlier final message). Unknown fields are
/// ignored on decode; undefined objective values travel as null.
enum class MessageType { start, progress, final, fail };

std::string_view to_string(MessageType t);

struct WorkerMessage {
  MessageType type = MessageType::start;
  std::string trial_id;
  std::optional<Configuration> config;      // start
  std::optional<int> fidelity;              // start, progress, final
  std::optional<std::int64_t> seed;         // start
  std::optional<ObjectiveValues> objectives;  // progress, final
  std::optional<std::string> message;       // fail
  std::optional<bool> resumable;            // final
  std::optional<int> resume_from;           // start

  friend bool operator==(const WorkerMessage&, const WorkerMessage&) = default;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

/// One line, no trailing newline, fields in the canonical order above.
std::string encode_message(const WorkerMessage& m);

/// Throws ProtocolError for malformed JSON, unknown types, or missing/mistyped
/// required fields.
WorkerMessage decode_message(std::string_view line);

WorkerMessage start_message(std::string trial_id, Configuration config, int fidelity,
                            std::int64_t seed);

}  // namespace fairpareto

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

#include "fairpareto/worker_protocol.hpp"

#include <fmt/format.h>

#include <json.hpp>

namespace fairpareto {
namespace {

using ordered_json = nlohmann::ordered_json;

const nlohmann::json& require(const nlohmann::json& j, const char* field) {
  if (!j.contains(field)) throw ProtocolError(fmt::format("missing field '{}'", field));
  return j.at(field);
}

int require_int(const nlohmann::json& j, const char* field) {
  const auto& v = require(j, field);
  if (!v.is_number_integer()) throw ProtocolError(fmt::format("field '{}' must be an integer", field));
  return v.get<int>();
}

ObjectiveValues parse_objectives(const nlohmann::json& j) {
  if (!j.is_object()) throw ProtocolError("field 'objectives' must be an object");
  ObjectiveValues out;
  for (const auto& [name, v] : j.items()) {
    if (v.is_null()) {
      out[name] = std::nullopt;
    } else if (v.is_number()) {
      out[name] = v.get<double>();
    } else {
      throw ProtocolError(fmt::format("objective '{}' must be a number or null", name));
    }
  }
  return out;
}

ordered_json objectives_json(const ObjectiveValues& values) {
  ordered_json j = ordered_json::object();
  for (const auto& [name, v] : values) {
    if (v) {
      j[name] = *v;
    } else {
      j[name] = nullptr;
    }
  }
  return j;
}

}  // namespace

std::string_view to_string(MessageType t) {
  switch (t) {
    case MessageType::start: return "start";
    case MessageType::progress: return "progress";
    case MessageType::final: return "final";
    case MessageType::fail: return "fail";
  }
  return "unknown";
}

std::string encode_message(const WorkerMessage& m) {
  ordered_json j;
  j["type"] = std::string(to_string(m.type));
  j["trial_id"] = m.trial_id;
  switch (m.type) {
    case MessageType::start:
      j["config"] = ordered_json::parse(to_json(m.config.value_or(Configuration{})).dump());
      j["fidelity"] = m.fidelity.value_or(0);
      j["seed"] = m.seed.value_or(0);
      if (m.resume_from) j["resume_from"] = *m.resume_from;
      break;
    case MessageType::progress:
    case MessageType::final:
      j["fidelity"] = m.fidelity.value_or(0);
      j["objectives"] = objectives_json(m.objectives.value_or(ObjectiveValues{}));
      if (m.type == MessageType::final && m.resumable) j["resumable"] = *m.resumable;
      break;
    case MessageType::fail:
      j["message"] = m.message.value_or("");
      break;
  }
  return j.dump();
}

WorkerMessage decode_message(std::string_view line) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception&) {
    throw ProtocolError("not valid JSON");
  }
  if (!j.is_object()) throw ProtocolError("message must be a JSON object");
  const auto& type = require(j, "type");
  if (!type.is_string()) throw ProtocolError("field 'type' must be a string");
  WorkerMessage m;
  const auto t = type.get<std::string>();
  if (t == "start") {
    m.type = MessageType::start;
  } else if (t == "progress") {
    m.type = MessageType::progress;
  } else if (t == "final") {
    m.type = MessageType::final;
  } else if (t == "fail") {
    m.type = MessageType::fail;
  } else {
    throw ProtocolError(fmt::format("unknown message type '{}'", t));
  }
  const auto& id = require(j, "trial_id");
  if (!id.is_string()) throw ProtocolError("field 'trial_id' must be a string");
  m.trial_id = id.get<std::string>();
  switch (m.type) {
    case MessageType::start: {
      try {
        m.config = configuration_from_json(require(j, "config"));
      } catch (const DataError& e) {
        throw ProtocolError(e.what());
      }
      m.fidelity = require_int(j, "fidelity");
      const auto& seed = require(j, "seed");
      if (!seed.is_number_integer()) throw ProtocolError("field 'seed' must be an integer");
      m.seed = seed.get<std::int64_t>();
      if (j.contains("resume_from")) m.resume_from = require_int(j, "resume_from");
      break;
    }
    case MessageType::progress:
    case MessageType::final:
      m.fidelity = require_int(j, "fidelity");
      m.objectives = parse_objectives(require(j, "objectives"));
      if (m.type == MessageType::final && j.contains("resumable")) {
        if (!j.at("resumable").is_boolean()) throw ProtocolError("field 'resumable' must be a boolean");
        m.resumable = j.at("resumable").get<bool>();
      }
      break;
    case MessageType::fail: {
      const auto& msg = require(j, "message");
      if (!msg.is_string()) throw ProtocolError("field 'message' must be a string");
      m.message = msg.get<std::string>();
      break;
    }
  }
  return m;
}

WorkerMessage start_message(std::string trial_id, Configuration config, int fidelity,
                            std::int64_t seed) {
  WorkerMessage m;
  m.type = MessageType::start;
  m.trial_id = std::move(trial_id);
  m.config = std::move(config);
  m.fidelity = fidelity;
  m.seed = seed;
  return m;
}

}  // namespace fairpareto

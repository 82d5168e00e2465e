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

#include "fairpareto/configspace.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace fairpareto {
namespace {

bool needs_indicator_pairs(const ParameterSpec& p) {
  return p.ranges.size() > 1 || p.condition.has_value() || p.ranges.front().when.has_value();
}

std::size_t slot_width(const ParameterSpec& p) {
  if (p.kind == ParamKind::categorical) {
    return p.choices.size() + (p.condition ? 1 : 0);
  }
  return needs_indicator_pairs(p) ? 2 * p.ranges.size() : 1;
}

double log_position(double value, const LogRange& r) {
  return (std::log(value) - std::log(r.low)) / (std::log(r.high) - std::log(r.low));
}

double from_log_position(double t, const LogRange& r) {
  const double v = std::exp(std::log(r.low) + t * (std::log(r.high) - std::log(r.low)));
  return std::clamp(v, r.low, r.high);
}

double sample_log_uniform(const LogRange& r, Rng& rng) {
  return from_log_position(uniform01(rng), r);
}

Condition parse_condition(const nlohmann::json& j, const std::string& owner) {
  if (!j.is_object() || !j.contains("parent") || !j.contains("equals")) {
    throw ConfigError(fmt::format("parameter '{}': condition needs 'parent' and 'equals'", owner));
  }
  Condition c;
  c.parent = j.at("parent").get<std::string>();
  const auto& eq = j.at("equals");
  if (eq.is_string()) {
    c.equals.push_back(eq.get<std::string>());
  } else if (eq.is_array()) {
    c.equals = eq.get<std::vector<std::string>>();
  } else {
    throw ConfigError(fmt::format("parameter '{}': 'equals' must be a string or list", owner));
  }
  return c;
}

nlohmann::json condition_json(const Condition& c) {
  nlohmann::json j;
  j["parent"] = c.parent;
  if (c.equals.size() == 1) {
    j["equals"] = c.equals.front();
  } else {
    j["equals"] = c.equals;
  }
  return j;
}

std::pair<double, double> parse_bounds(const nlohmann::json& j, const std::string& owner) {
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ConfigError(fmt::format("parameter '{}': bounds must be [low, high]", owner));
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

ParameterSpec parse_parameter(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("name") || !j.at("name").is_string()) {
    throw ConfigError("parameter entry without a string 'name'");
  }
  ParameterSpec p;
  p.name = j.at("name").get<std::string>();
  const std::string kind = j.value("kind", std::string{});
  if (kind == "categorical") {
    p.kind = ParamKind::categorical;
    if (!j.contains("choices") || !j.at("choices").is_array()) {
      throw ConfigError(fmt::format("parameter '{}': categorical needs 'choices'", p.name));
    }
    for (const auto& c : j.at("choices")) {
      if (!c.is_string()) {
        throw ConfigError(fmt::format("parameter '{}': choices must be strings", p.name));
      }
      p.choices.push_back(c.get<std::string>());
    }
  } else if (kind == "continuous" || kind == "continuous-log-range") {
    p.kind = ParamKind::continuous;
    if (j.contains("bounds")) {
      auto [lo, hi] = parse_bounds(j.at("bounds"), p.name);
      p.ranges.push_back({lo, hi, std::nullopt});
    } else if (j.contains("branches") && j.at("branches").is_array()) {
      for (const auto& b : j.at("branches")) {
        if (!b.contains("bounds")) {
          throw ConfigError(fmt::format("parameter '{}': branch without 'bounds'", p.name));
        }
        auto [lo, hi] = parse_bounds(b.at("bounds"), p.name);
        p.ranges.push_back({lo, hi, parse_condition(b, p.name)});
      }
    } else {
      throw ConfigError(fmt::format("parameter '{}': continuous needs 'bounds' or 'branches'", p.name));
    }
  } else {
    throw ConfigError(fmt::format("parameter '{}': unknown kind '{}'", p.name, kind));
  }
  if (j.contains("condition")) p.condition = parse_condition(j.at("condition"), p.name);
  return p;
}

void check_condition(const Condition& c, const std::string& owner,
                     const std::map<std::string, const ParameterSpec*>& earlier) {
  auto it = earlier.find(c.parent);
  if (it == earlier.end()) {
    throw ConfigError(fmt::format(
        "parameter '{}': condition parent '{}' is not declared earlier", owner, c.parent));
  }
  const ParameterSpec& parent = *it->second;
  if (parent.kind != ParamKind::categorical) {
    throw ConfigError(fmt::format(
        "parameter '{}': condition parent '{}' must be categorical", owner, c.parent));
  }
  if (c.equals.empty()) {
    throw ConfigError(fmt::format("parameter '{}': condition has no values", owner));
  }
  for (const auto& v : c.equals) {
    if (std::find(parent.choices.begin(), parent.choices.end(), v) == parent.choices.end()) {
      throw ConfigError(fmt::format("parameter '{}': condition value '{}' is not a choice of '{}'",
                                    owner, v, c.parent));
    }
  }
}

}  // namespace

const std::string& Configuration::categorical(const std::string& name) const {
  return std::get<std::string>(values.at(name));
}

double Configuration::continuous(const std::string& name) const {
  return std::get<double>(values.at(name));
}

nlohmann::json to_json(const Configuration& config) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [k, v] : config.values) {
    std::visit([&](const auto& x) { j[k] = x; }, v);
  }
  return j;
}

Configuration configuration_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("configuration must be a JSON object");
  Configuration c;
  for (const auto& [k, v] : j.items()) {
    if (v.is_string()) {
      c.values.emplace(k, v.get<std::string>());
    } else if (v.is_number()) {
      c.values.emplace(k, v.get<double>());
    } else {
      throw DataError(fmt::format("configuration value for '{}' must be a string or number", k));
    }
  }
  return c;
}

std::string canonical_string(const Configuration& config) { return to_json(config).dump(); }

std::string config_key(const Configuration& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : canonical_string(config)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return fmt::format("c{:016x}", h);
}

bool Condition::holds(const Configuration& config) const {
  auto it = config.values.find(parent);
  if (it == config.values.end()) return false;
  const auto* v = std::get_if<std::string>(&it->second);
  return v != nullptr && std::find(equals.begin(), equals.end(), *v) != equals.end();
}

std::string Condition::label() const { return fmt::format("{}", fmt::join(equals, "/")); }

ParameterSpec ParameterSpec::make_categorical(std::string name, std::vector<std::string> choices,
                                              std::optional<Condition> condition) {
  ParameterSpec p;
  p.name = std::move(name);
  p.kind = ParamKind::categorical;
  p.choices = std::move(choices);
  p.condition = std::move(condition);
  return p;
}

ParameterSpec ParameterSpec::make_continuous(std::string name, double low, double high,
                                             std::optional<Condition> condition) {
  ParameterSpec p;
  p.name = std::move(name);
  p.kind = ParamKind::continuous;
  p.ranges.push_back({low, high, std::nullopt});
  p.condition = std::move(condition);
  return p;
}

ParameterSpec ParameterSpec::make_branched(std::string name, std::vector<LogRange> branches,
                                           std::optional<Condition> condition) {
  ParameterSpec p;
  p.name = std::move(name);
  p.kind = ParamKind::continuous;
  p.ranges = std::move(branches);
  p.condition = std::move(condition);
  return p;
}

SearchSpace::SearchSpace(std::string name, std::vector<ParameterSpec> parameters)
    : name_(std::move(name)), parameters_(std::move(parameters)) {
  if (parameters_.empty()) throw ConfigError("search space has no parameters");
  std::map<std::string, const ParameterSpec*> earlier;
  for (const auto& p : parameters_) {
    if (p.name.empty()) throw ConfigError("parameter with empty name");
    if (earlier.contains(p.name)) {
      throw ConfigError(fmt::format("parameter '{}': duplicate name", p.name));
    }
    if (p.condition) check_condition(*p.condition, p.name, earlier);
    if (p.kind == ParamKind::categorical) {
      if (p.choices.empty()) {
        throw ConfigError(fmt::format("parameter '{}': no choices", p.name));
      }
      std::set<std::string> seen(p.choices.begin(), p.choices.end());
      if (seen.size() != p.choices.size()) {
        throw ConfigError(fmt::format("parameter '{}': duplicate choices", p.name));
      }
    } else {
      if (p.ranges.empty()) throw ConfigError(fmt::format("parameter '{}': no range", p.name));
      for (const auto& r : p.ranges) {
        if (!(r.low > 0.0 && r.low < r.high && std::isfinite(r.high))) {
          throw ConfigError(fmt::format(
              "parameter '{}': bounds must satisfy 0 < low < high (got [{}, {}])", p.name, r.low,
              r.high));
        }
      }
      const bool branched = p.ranges.size() > 1 || p.ranges.front().when.has_value();
      if (branched) {
        // Branches must partition the parent's choices so exactly one is active.
        const std::string& parent = p.ranges.front().when ? p.ranges.front().when->parent : "";
        std::multiset<std::string> covered;
        for (const auto& r : p.ranges) {
          if (!r.when || r.when->parent != parent) {
            throw ConfigError(fmt::format(
                "parameter '{}': all branches must be conditioned on the same parent", p.name));
          }
          check_condition(*r.when, p.name, earlier);
          covered.insert(r.when->equals.begin(), r.when->equals.end());
        }
        const auto& choices = earlier.at(parent)->choices;
        std::multiset<std::string> expected(choices.begin(), choices.end());
        if (covered != expected) {
          throw ConfigError(fmt::format(
              "parameter '{}': branches must cover each choice of '{}' exactly once", p.name,
              parent));
        }
      }
    }
    earlier.emplace(p.name, &p);
    width_ += slot_width(p);
  }
}

const ParameterSpec* SearchSpace::find(std::string_view name) const {
  for (const auto& p : parameters_) {
    if (p.name == name) return &p;
  }
  return nullptr;
}

bool SearchSpace::is_active(const ParameterSpec& p, const Configuration& config) const {
  return !p.condition || p.condition->holds(config);
}

std::optional<std::size_t> SearchSpace::active_range(const ParameterSpec& p,
                                                     const Configuration& config) const {
  if (p.kind != ParamKind::continuous || !is_active(p, config)) return std::nullopt;
  for (std::size_t i = 0; i < p.ranges.size(); ++i) {
    if (!p.ranges[i].when || p.ranges[i].when->holds(config)) return i;
  }
  return std::nullopt;
}

SearchSpace SearchSpace::from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("parameters") || !j.at("parameters").is_array()) {
    throw ConfigError("space file must be an object with a 'parameters' list");
  }
  std::vector<ParameterSpec> params;
  try {
    for (const auto& pj : j.at("parameters")) params.push_back(parse_parameter(pj));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("space file: {}", e.what()));
  }
  return SearchSpace(j.value("name", std::string{"custom"}), std::move(params));
}

SearchSpace SearchSpace::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open space file '{}'", path.string()));
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("space file '{}': {}", path.string(), e.what()));
  }
  return from_json(j);
}

std::optional<SearchSpace> SearchSpace::preset(std::string_view name) {
  if (name == "dpn_fair_v1") return dpn_fair_v1();
  if (name == "box6") return box_space(6);
  return std::nullopt;
}

SearchSpace SearchSpace::load(const std::string& name_or_path) {
  if (auto p = preset(name_or_path)) return *std::move(p);
  return from_file(name_or_path);
}

nlohmann::json SearchSpace::to_json() const {
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : parameters_) {
    nlohmann::json pj;
    pj["name"] = p.name;
    if (p.kind == ParamKind::categorical) {
      pj["kind"] = "categorical";
      pj["choices"] = p.choices;
    } else {
      pj["kind"] = "continuous";
      if (p.ranges.size() == 1 && !p.ranges.front().when) {
        pj["bounds"] = {p.ranges.front().low, p.ranges.front().high};
      } else {
        for (const auto& r : p.ranges) {
          auto b = condition_json(*r.when);
          b["bounds"] = {r.low, r.high};
          pj["branches"].push_back(b);
        }
      }
    }
    if (p.condition) pj["condition"] = condition_json(*p.condition);
    params.push_back(pj);
  }
  return {{"name", name_}, {"parameters", params}};
}

SearchSpace dpn_fair_v1() {
  std::vector<std::string> ops(std::begin(kBlockOps), std::end(kBlockOps));
  std::vector<ParameterSpec> params;
  params.push_back(ParameterSpec::make_categorical("head", {"MagFace", "ArcFace", "CosFace"}));
  params.push_back(ParameterSpec::make_categorical("optimizer", {"Adam", "AdamW", "SGD"}));
  params.push_back(ParameterSpec::make_branched(
      "lr", {LogRange{1e-4, 1e-2, Condition{"optimizer", {"Adam", "AdamW"}}},
             LogRange{0.09, 0.8, Condition{"optimizer", {"SGD"}}}}));
  params.push_back(ParameterSpec::make_categorical("op1", ops));
  params.push_back(ParameterSpec::make_categorical("op2", ops));
  params.push_back(ParameterSpec::make_categorical("op3", ops));
  return SearchSpace("dpn_fair_v1", std::move(params));
}

SearchSpace box_space(std::size_t dims) {
  std::vector<ParameterSpec> params;
  for (std::size_t i = 1; i <= dims; ++i) {
    params.push_back(ParameterSpec::make_continuous(fmt::format("x{}", i), 1.0, 10.0));
  }
  return SearchSpace(fmt::format("box{}", dims), std::move(params));
}

Configuration sample(const SearchSpace& space, Rng& rng) {
  Configuration c;
  for (const auto& p : space.parameters()) {
    if (!space.is_active(p, c)) continue;
    if (p.kind == ParamKind::categorical) {
      c.values.emplace(p.name, p.choices[uniform_index(rng, p.choices.size())]);
    } else if (auto r = space.active_range(p, c)) {
      c.values.emplace(p.name, sample_log_uniform(p.ranges[*r], rng));
    }
  }
  return c;
}

std::vector<std::string> validate(const SearchSpace& space, const Configuration& config) {
  std::vector<std::string> violations;
  for (const auto& [name, value] : config.values) {
    if (space.find(name) == nullptr) violations.push_back(fmt::format("unknown parameter '{}'", name));
  }
  for (const auto& p : space.parameters()) {
    const bool active = space.is_active(p, config);
    auto it = config.values.find(p.name);
    if (!active) {
      if (it != config.values.end()) {
        violations.push_back(fmt::format("{} assigned but inactive (requires {} in {})", p.name,
                                         p.condition->parent, p.condition->label()));
      }
      continue;
    }
    if (it == config.values.end()) {
      violations.push_back(fmt::format("{} missing", p.name));
      continue;
    }
    if (p.kind == ParamKind::categorical) {
      const auto* v = std::get_if<std::string>(&it->second);
      if (v == nullptr) {
        violations.push_back(fmt::format("{} must be categorical", p.name));
      } else if (std::find(p.choices.begin(), p.choices.end(), *v) == p.choices.end()) {
        violations.push_back(fmt::format("{} value '{}' not among choices", p.name, *v));
      }
      continue;
    }
    const auto* v = std::get_if<double>(&it->second);
    if (v == nullptr || !std::isfinite(*v)) {
      violations.push_back(fmt::format("{} must be a finite real", p.name));
      continue;
    }
    auto r = space.active_range(p, config);
    if (!r) {
      violations.push_back(fmt::format("{} has no active range", p.name));
      continue;
    }
    const LogRange& range = p.ranges[*r];
    const std::string label = range.when ? range.when->label() + " " : std::string{};
    if (*v < range.low) {
      violations.push_back(fmt::format("{} below {}range low {}", p.name, label, range.low));
    } else if (*v > range.high) {
      violations.push_back(fmt::format("{} above {}range high {}", p.name, label, range.high));
    }
  }
  return violations;
}

std::vector<double> encode(const SearchSpace& space, const Configuration& config) {
  if (auto v = validate(space, config); !v.empty()) {
    throw ConfigError(fmt::format("invalid configuration: {}", fmt::join(v, "; ")));
  }
  std::vector<double> out;
  out.reserve(space.encoded_width());
  for (const auto& p : space.parameters()) {
    const bool active = space.is_active(p, config);
    if (p.kind == ParamKind::categorical) {
      const std::size_t begin = out.size();
      out.resize(begin + p.choices.size(), active ? 0.0 : kInactiveSentinel);
      if (active) {
        const auto& v = config.categorical(p.name);
        const auto pos = std::find(p.choices.begin(), p.choices.end(), v) - p.choices.begin();
        out[begin + static_cast<std::size_t>(pos)] = 1.0;
      }
      if (p.condition) out.push_back(active ? 1.0 : 0.0);
      continue;
    }
    const auto r = space.active_range(p, config);
    if (!needs_indicator_pairs(p)) {
      out.push_back(log_position(config.continuous(p.name), p.ranges.front()));
      continue;
    }
    for (std::size_t i = 0; i < p.ranges.size(); ++i) {
      if (r && *r == i) {
        out.push_back(log_position(config.continuous(p.name), p.ranges[i]));
        out.push_back(1.0);
      } else {
        out.push_back(kInactiveSentinel);
        out.push_back(0.0);
      }
    }
  }
  return out;
}

Configuration decode(const SearchSpace& space, std::span<const double> encoded) {
  if (encoded.size() != space.encoded_width()) {
    throw ConfigError(fmt::format("encoded width {} does not match space width {}",
                                  encoded.size(), space.encoded_width()));
  }
  Configuration c;
  std::size_t at = 0;
  for (const auto& p : space.parameters()) {
    if (p.kind == ParamKind::categorical) {
      const auto block = encoded.subspan(at, p.choices.size());
      at += p.choices.size();
      bool active = true;
      if (p.condition) active = encoded[at++] > 0.5;
      if (active) {
        const auto best = std::max_element(block.begin(), block.end()) - block.begin();
        c.values.emplace(p.name, p.choices[static_cast<std::size_t>(best)]);
      }
      continue;
    }
    if (!needs_indicator_pairs(p)) {
      c.values.emplace(p.name, from_log_position(encoded[at++], p.ranges.front()));
      continue;
    }
    for (const auto& range : p.ranges) {
      const double t = encoded[at];
      const bool on = encoded[at + 1] > 0.5;
      at += 2;
      if (on) c.values.emplace(p.name, from_log_position(t, range));
    }
  }
  return c;
}

Configuration perturb(const SearchSpace& space, const Configuration& config, Rng& rng) {
  std::vector<const ParameterSpec*> active;
  std::map<std::string, std::optional<std::size_t>> old_branch;
  for (const auto& p : space.parameters()) {
    if (space.is_active(p, config)) active.push_back(&p);
    if (p.kind == ParamKind::continuous) old_branch[p.name] = space.active_range(p, config);
  }
  Configuration out = config;
  if (active.empty()) return out;

  const ParameterSpec& hit = *active[uniform_index(rng, active.size())];
  if (hit.kind == ParamKind::categorical) {
    if (hit.choices.size() > 1) {
      const auto& current = config.categorical(hit.name);
      const auto cur = static_cast<std::size_t>(
          std::find(hit.choices.begin(), hit.choices.end(), current) - hit.choices.begin());
      std::size_t pick = uniform_index(rng, hit.choices.size() - 1);
      if (pick >= cur) ++pick;
      out.values[hit.name] = hit.choices[pick];
    }
  } else {
    const auto r = space.active_range(hit, config);
    const LogRange& range = hit.ranges[*r];
    const double v = config.continuous(hit.name) * std::exp(kPerturbSigma * standard_normal(rng));
    out.values[hit.name] = std::clamp(v, range.low, range.high);
  }

  // Repair conditionals downstream of the change, in declaration order.
  for (const auto& p : space.parameters()) {
    if (!space.is_active(p, out)) {
      out.values.erase(p.name);
      continue;
    }
    if (p.kind == ParamKind::categorical) {
      if (!out.has(p.name)) out.values[p.name] = p.choices[uniform_index(rng, p.choices.size())];
      continue;
    }
    const auto r = space.active_range(p, out);
    if (!r) continue;
    if (!out.has(p.name) || old_branch[p.name] != r) {
      out.values[p.name] = sample_log_uniform(p.ranges[*r], rng);
    }
  }
  return out;
}

}  // namespace fairpareto

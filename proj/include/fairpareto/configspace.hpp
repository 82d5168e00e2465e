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
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "fairpareto/common.hpp"

namespace fairpareto {

/// Categorical values are strings, continuous values positive reals.
using ParamValue = std::variant<std::string, double>;

/// One point of a search space. Keys are parameter names; inactive
/// conditional parameters are absent.
struct Configuration {
  std::map<std::string, ParamValue> values;

  bool has(const std::string& name) const { return values.contains(name); }
  const std::string& categorical(const std::string& name) const;
  double continuous(const std::string& name) const;

  friend bool operator==(const Configuration&, const Configuration&) = default;
};

/// Sorted-key JSON object; continuous values as numbers.
nlohmann::json to_json(const Configuration& config);
Configuration configuration_from_json(const nlohmann::json& j);

/// Canonical, order-independent text form (sorted compact JSON).
std::string canonical_string(const Configuration& config);

/// Short stable identifier ("c" + 16 hex digits of a 64-bit FNV-1a hash of
/// the canonical string).
std::string config_key(const Configuration& config);

/// "parent is one of equals".
struct Condition {
  std::string parent;
  std::vector<std::string> equals;

  bool holds(const Configuration& config) const;
  std::string label() const;  // "Adam/AdamW"
};

/// A log-scaled interval, optionally active only when `when` holds.
struct LogRange {
  double low = 0.0;
  double high = 0.0;
  std::optional<Condition> when;
};

enum class ParamKind { categorical, continuous };

struct ParameterSpec {
  std::string name;
  ParamKind kind = ParamKind::categorical;
  std::vector<std::string> choices;  // categorical
  std::vector<LogRange> ranges;      // continuous: one plain range or branches
  std::optional<Condition> condition;

  static ParameterSpec make_categorical(std::string name, std::vector<std::string> choices,
                                        std::optional<Condition> condition = std::nullopt);
  static ParameterSpec make_continuous(std::string name, double low, double high,
                                       std::optional<Condition> condition = std::nullopt);
  static ParameterSpec make_branched(std::string name, std::vector<LogRange> branches,
                                     std::optional<Condition> condition = std::nullopt);
};

/// Immutable, validated search space. All operations are const and take the
/// random stream explicitly.
class SearchSpace {
 public:
  /// Throws ConfigError naming the offending parameter.
  SearchSpace(std::string name, std::vector<ParameterSpec> parameters);

  const std::string& name() const { return name_; }
  std::span<const ParameterSpec> parameters() const { return parameters_; }
  const ParameterSpec* find(std::string_view name) const;

  /// Whether the parameter is active (its condition holds) in `config`.
  bool is_active(const ParameterSpec& p, const Configuration& config) const;

  /// Index into p.ranges of the range active in `config`, or nullopt if the
  /// parameter is inactive or no branch applies.
  std::optional<std::size_t> active_range(const ParameterSpec& p,
                                          const Configuration& config) const;

  /// Width of encode()'s output.
  std::size_t encoded_width() const { return width_; }

  static SearchSpace from_json(const nlohmann::json& j);
  static SearchSpace from_file(const std::filesystem::path& path);
  /// Built-in preset by name, or nullopt.
  static std::optional<SearchSpace> preset(std::string_view name);
  /// Preset name or path to a space file.
  static SearchSpace load(const std::string& name_or_path);

  nlohmann::json to_json() const;

 private:
  std::string name_;
  std::vector<ParameterSpec> parameters_;
  std::size_t width_ = 0;
};

/// Operation slot choices of the searchable block.
inline constexpr std::string_view kBlockOps[] = {
    "BnConv1x1", "Conv1x1Bn", "Conv1x1", "BnConv3x3", "Conv3x3Bn",
    "Conv3x3",   "BnConv5x5", "Conv5x5Bn", "Conv5x5"};

/// head x optimizer x conditional lr x three block-op slots.
SearchSpace dpn_fair_v1();

/// Six log-range parameters x1..x6 on [1, 10]; a plain box for the builtin
/// synthetic backends.
SearchSpace box_space(std::size_t dims = 6);

Configuration sample(const SearchSpace& space, Rng& rng);

/// Empty result means the configuration is valid.
std::vector<std::string> validate(const SearchSpace& space, const Configuration& config);

/// Fixed-width numeric encoding for surrogate input. For each parameter in
/// declaration order:
///  - categorical: one-hot block, plus an indicator bit if conditional;
///  - continuous: the log-scaled position in [0,1] of the active range; a
///    parameter with branches or a condition gets a (position, indicator)
///    pair per range.
/// Inactive slots hold the sentinel 0.5 with indicator 0.
/// Throws ConfigError when the configuration is invalid.
std::vector<double> encode(const SearchSpace& space, const Configuration& config);

/// Inverse of encode() for vectors produced by it.
Configuration decode(const SearchSpace& space, std::span<const double> encoded);

/// Resamples exactly one active parameter and repairs conditionals.
Configuration perturb(const SearchSpace& space, const Configuration& config, Rng& rng);

inline constexpr double kInactiveSentinel = 0.5;
inline constexpr double kPerturbSigma = 0.2;

}  // namespace fairpareto

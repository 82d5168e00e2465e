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

#include <cstdint>
#include <memory>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>

namespace spdlog {
class logger;
}

namespace fairpareto {

/// Seeded random stream used by every stochastic operation.
using Rng = std::mt19937_64;

/// A real value that may be the undefined-marker (e.g. a ratio with a zero
/// denominator). `std::nullopt` is the marker.
using MaybeReal = std::optional<double>;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user-supplied configuration: space files, flags, filters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed or inconsistent input data (embedding files, run logs).
class DataError : public Error {
 public:
  using Error::Error;
};

/// An objective backend could not produce a result.
class BackendError : public Error {
 public:
  using Error::Error;
};

/// Library-wide logger writing to stderr. Level follows FAIRPARETO_LOG
/// (error, info, debug); defaults to info.
spdlog::logger& log();

/// Re-reads FAIRPARETO_LOG and applies it to the logger.
void configure_logging_from_env();

/// SplitMix64 finalizer; used to derive independent seeds from a counter.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Uniform double in [0, 1). Implemented directly on the engine output so
/// sequences do not depend on the standard library's distribution code.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Uniform index in [0, n).
inline std::size_t uniform_index(Rng& rng, std::size_t n) {
  return static_cast<std::size_t>(uniform01(rng) * static_cast<double>(n));
}

/// Standard normal draw (Box-Muller).
double standard_normal(Rng& rng);

}  // namespace fairpareto

// Copyright 2026 The HCRMP Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <iostream>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hcrmp {

/// Number of driving attributes: safety, efficiency, comfort.
inline constexpr std::size_t kAttributes = 3;

/// Raised for bad configuration (missing corpus, unwritable output, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a caller breaks an operation's precondition.
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// SplitMix64, used to derive independent sub-seeds from one run seed.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

/// Wraps an angle into (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double pi = std::numbers::pi;
  a = std::fmod(a + pi, 2.0 * pi);
  if (a <= 0.0) a += 2.0 * pi;
  return a - pi;
}

/// Fixed-precision number formatting for CSV/JSON so outputs are byte-stable.
inline std::string fmt_num(double v, int digits = 10) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

enum class LogLevel { debug = 0, info = 1, warn = 2, error = 3 };

inline LogLevel& log_threshold() {
  static LogLevel level = LogLevel::warn;
  return level;
}

inline void log(LogLevel level, std::string_view msg) {
  if (level < log_threshold()) return;
  static constexpr const char* names[] = {"debug", "info", "warn", "error"};
  std::clog << "[hcrmp:" << names[static_cast<int>(level)] << "] " << msg << '\n';
}

}  // namespace hcrmp

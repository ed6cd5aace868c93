// Copyright 2026 The EEGPass Authors
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

// Core domain values: quantized signal levels, pels and pel templates, the
// canonical pel byte encoding and the bracket notation for templates.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace eegpass {

using Bytes = std::vector<std::uint8_t>;

inline constexpr std::size_t kMaxPels = 6;
inline constexpr std::size_t kMaxPelChars = 64;
inline constexpr std::size_t kMaxPasswordChars = 256;
inline constexpr int kSignalMin = 0;
inline constexpr int kSignalMax = 100;

/// Five quantized bands, ordered low to high.
enum class StateLevel : std::uint8_t { S = 0, L = 1, N = 2, R = 3, H = 4 };

inline constexpr std::array<StateLevel, 5> kAllLevels{
    StateLevel::S, StateLevel::L, StateLevel::N, StateLevel::R, StateLevel::H};

inline constexpr int index_of(StateLevel level) noexcept {
  return static_cast<int>(level);
}

char to_char(StateLevel level) noexcept;
std::optional<StateLevel> level_from_char(char c) noexcept;

/// A requirement on one signal: a concrete level, or the wildcard `0` that
/// accepts any level.
class RequiredLevel {
public:
  constexpr RequiredLevel() noexcept = default;
  constexpr RequiredLevel(StateLevel level) noexcept : level_(level) {}  // NOLINT

  static constexpr RequiredLevel any() noexcept { return RequiredLevel{}; }

  constexpr bool is_wildcard() const noexcept { return !level_.has_value(); }
  constexpr std::optional<StateLevel> level() const noexcept { return level_; }

  constexpr bool matches(StateLevel observed) const noexcept {
    return !level_ || *level_ == observed;
  }

  char symbol() const noexcept { return level_ ? to_char(*level_) : '0'; }

  friend constexpr bool operator==(RequiredLevel, RequiredLevel) noexcept = default;

private:
  std::optional<StateLevel> level_;
};

std::optional<RequiredLevel> required_from_char(char c) noexcept;

struct SignalSample {
  std::int64_t t_ms = 0;
  int attention = 0;
  int meditation = 0;

  friend bool operator==(const SignalSample&, const SignalSample&) = default;
};

/// Throws Errc::range when either signal lies outside 0..100 or t_ms < 0.
void validate(const SignalSample& sample);

struct Pel {
  std::string chars;
  RequiredLevel att;
  RequiredLevel rel;

  friend bool operator==(const Pel&, const Pel&) = default;
};

/// Authentication-time pel: both levels are what the device reported.
struct ObservedPel {
  std::string chars;
  StateLevel att = StateLevel::N;
  StateLevel rel = StateLevel::N;

  friend bool operator==(const ObservedPel&, const ObservedPel&) = default;
  friend auto operator<=>(const ObservedPel&, const ObservedPel&) = default;
};

/// Ordered pels of one enrolled password. Construction enforces 1..6 pels,
/// 1..64 code points per pel, at most 256 in total, and that neighbouring
/// pels carry different (att, rel) requirements.
class PelTemplate {
public:
  explicit PelTemplate(std::vector<Pel> pels);

  const std::vector<Pel>& pels() const noexcept { return pels_; }
  std::size_t size() const noexcept { return pels_.size(); }
  const Pel& operator[](std::size_t i) const { return pels_[i]; }
  std::string password() const;

  /// Count of wildcard requirements in pel i (0, 1 or 2).
  int wildcards(std::size_t i) const;

  friend bool operator==(const PelTemplate&, const PelTemplate&) = default;

private:
  std::vector<Pel> pels_;
};

struct QuantizerConfig {
  std::array<int, 4> band_edges{20, 40, 60, 80};
  int hysteresis_margin = 5;

  /// Throws Errc::input unless edges ascend strictly inside (0,100) and the
  /// margin is smaller than the narrowest band.
  void validate() const;

  friend bool operator==(const QuantizerConfig&, const QuantizerConfig&) = default;
};

/// Band lookup with sticky boundaries: when `prev` names a neighbouring band
/// and `value` sits within the hysteresis margin of the edge between the two,
/// `prev` is kept.
StateLevel quantize(int value, std::optional<StateLevel> prev,
                    const QuantizerConfig& cfg = {});

/// True when `value` is within the margin of the edge separating the two
/// neighbouring levels `a` and `b`. Always false for non-neighbours.
bool near_edge(int value, StateLevel a, StateLevel b, const QuantizerConfig& cfg);

inline constexpr std::uint8_t kPelEncodingVersion = 0x01;

/// 0x01 | u16 big-endian byte length | UTF-8 chars | att | rel
Bytes encode_pel(const ObservedPel& pel);

void validate(const ObservedPel& pel);

PelTemplate parse_template(std::string_view text);
std::string format_template(const PelTemplate& tpl);

}  // namespace eegpass

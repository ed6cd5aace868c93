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

// Deterministic stand-in for the headset: scripted synthetic traces, CSV
// trace files and replay.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "eegpass/model.hpp"
#include "eegpass/segmentation.hpp"

namespace eegpass::sim {

inline constexpr std::int64_t kDefaultSamplePeriodMs = 1000;
inline constexpr std::int64_t kDefaultKeyCadenceMs = 500;

struct Trace {
  std::vector<SignalSample> samples;
  std::string label;
  std::uint64_t seed = 0;

  friend bool operator==(const Trace&, const Trace&) = default;
};

/// Holds both signals near a target for a while.
struct Segment {
  std::int64_t duration_ms = 0;
  int attention = 50;
  int meditation = 50;
  double noise_sd = 0.0;

  friend bool operator==(const Segment&, const Segment&) = default;
};

using Schedule = std::vector<Segment>;

/// "3000:90/10/0,2000:10/90/0" (duration:att/med/sd, comma-separated).
Schedule parse_schedule(std::string_view text);
std::string format_schedule(const Schedule& schedule);

/// Each segment emits samples at its start and every period after, while
/// inside the segment; value = clamp(round(target + N(0, sd)), 0, 100).
Trace generate(const Schedule& schedule, std::int64_t sample_period_ms = kDefaultSamplePeriodMs,
               std::uint64_t seed = 0);

std::string to_csv(const Trace& trace);
Trace from_csv(std::string_view text);
void save_trace(const Trace& trace, const std::filesystem::path& path);
Trace load_trace(const std::filesystem::path& path);

enum class Pacing { as_fast_as_possible, real_time };

/// Delivers samples in timestamp order on the calling thread.
void replay(const Trace& trace, const std::function<void(const SignalSample&)>& sink,
            Pacing pacing = Pacing::as_fast_as_possible);

/// Midpoint of the band for `level` under `cfg`.
int band_center(StateLevel level, const QuantizerConfig& cfg = {});

/// Noise-free schedule holding each pel's levels for chars x cadence.
Schedule schedule_for(const std::vector<ObservedPel>& pels,
                      std::int64_t cadence_ms = kDefaultKeyCadenceMs,
                      const QuantizerConfig& cfg = {});

/// One key per code point at start_ms, start_ms + cadence, ...
std::vector<KeyEvent> keystrokes(std::string_view text,
                                 std::int64_t cadence_ms = kDefaultKeyCadenceMs,
                                 std::int64_t start_ms = 0);

}  // namespace eegpass::sim

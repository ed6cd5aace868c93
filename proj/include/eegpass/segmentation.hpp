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

// Turns keystroke and signal streams into observed pels, and infers a pel
// template from repeated enrolment trials.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "eegpass/model.hpp"

namespace eegpass {

struct KeyEvent {
  std::string ch;  // exactly one code point
  std::int64_t t_ms = 0;

  friend bool operator==(const KeyEvent&, const KeyEvent&) = default;
};

/// A typed character with the quantized levels in force when it was typed.
/// The raw values of the annotating sample are kept so that near-edge
/// boundaries can be recognised later.
struct AnnotatedChar {
  std::string ch;
  StateLevel att = StateLevel::N;
  StateLevel rel = StateLevel::N;
  int att_raw = 50;
  int rel_raw = 50;

  friend bool operator==(const AnnotatedChar&, const AnnotatedChar&) = default;
};

inline constexpr std::size_t kDefaultMaxCandidates = 16;
inline constexpr double kDefaultMinAgreement = 0.8;
inline constexpr std::size_t kMinEnrolmentTrials = 3;

/// Each key takes the levels of the latest sample at or before it. Hysteresis
/// is threaded through every sample in time order, typed or not.
std::vector<AnnotatedChar> annotate(std::span<const KeyEvent> keys,
                                    std::span<const SignalSample> samples,
                                    const QuantizerConfig& cfg = {});

/// Maximal runs of identical (att, rel) become one pel each.
std::vector<ObservedPel> segment(std::span<const AnnotatedChar> chars);

/// Raw segmentation first, then alternatives that undo band-boundary flicker.
/// Two neighbouring runs may merge when their patterns differ in one signal by
/// one level and a sample at their boundary sat within the hysteresis margin
/// of the edge between those levels. Merged spans take the majority pattern.
/// Ordered by number of merges, then by leftmost merge.
std::vector<std::vector<ObservedPel>> candidate_segmentations(
    std::span<const AnnotatedChar> chars,
    std::size_t max_candidates = kDefaultMaxCandidates,
    const QuantizerConfig& cfg = {});

/// Per position and per signal, a level seen in at least `min_agreement` of
/// the trials becomes the requirement; anything less becomes the wildcard.
PelTemplate infer_template(std::span<const std::vector<AnnotatedChar>> trials,
                           double min_agreement = kDefaultMinAgreement);

}  // namespace eegpass

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

// Security arithmetic for pel templates: keyspace amplification, pool
// combinatorics, the entropy given up by order independence, and attacker
// success probabilities (closed form and Monte Carlo).

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "eegpass/model.hpp"

namespace eegpass::analysis {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Attention x relaxation combinations a single pel or character can carry.
inline constexpr unsigned kStatesPerSlot = 25;

struct Keyspace {
  BigInt count;
  double bits = 0.0;
};

/// alphabet^length, or (alphabet * 25)^length with states.
Keyspace keyspace(std::uint64_t alphabet_size, std::uint64_t length, bool with_states);

struct PoolStats {
  BigInt orders;      // n!
  BigInt expansions;  // prod 5^w_i
  BigInt pool_size;   // distinct accepted pel sequences
  double entropy_loss_bits = 0.0;  // log2(n!)
  std::vector<std::size_t> unconstrained_pels;  // both requirements wildcarded

  /// Accept targets one submission can hit when it carries k candidates.
  BigInt candidate_surface(std::size_t k) const { return pool_size * k; }
};

PoolStats pool_stats(const PelTemplate& tpl);

struct AttackerModel {
  bool knows_chars = false;
  bool knows_segmentation = false;
  bool knows_states = false;  // implies the segmentation
  std::uint64_t guesses = 1;
  std::uint64_t alphabet_size = 94;
};

/// Comma-separated flags: "chars", "segmentation", "states", "guesses=N",
/// "alphabet=N"; "none" or the empty string for zero knowledge.
AttackerModel parse_attacker(std::string_view text);
std::string format_attacker(const AttackerModel& attacker);

/// The attacker's submission space, as counted in closed form.
struct AttackSpace {
  BigInt size;      // submissions consistent with the attacker's knowledge
  BigInt accepted;  // of those, how many the server accepts
};

AttackSpace attack_space(const PelTemplate& tpl, const AttackerModel& attacker);

inline constexpr std::uint64_t kDefaultRuns = 10000;
inline constexpr std::uint64_t kExactSpaceLimit = 1000000;

struct GuessSuccess {
  double probability = 0.0;       // exact when the space is small, else Monte Carlo
  bool monte_carlo = false;
  std::uint64_t runs = 0;
  std::optional<Rational> exact;  // closed form, when computable
  AttackSpace space;
};

/// P(at least one of `guesses` distinct uniform submissions is accepted).
GuessSuccess guess_success(const PelTemplate& tpl, const AttackerModel& attacker,
                           std::uint64_t seed, std::uint64_t runs = kDefaultRuns);

/// Seeded Monte Carlo estimate of the same probability.
double monte_carlo_guess(const PelTemplate& tpl, const AttackerModel& attacker,
                         std::uint64_t seed, std::uint64_t runs = kDefaultRuns);

/// 1 - C(space - accepted, g) / C(space, g), exactly.
Rational exact_success(const AttackSpace& space, std::uint64_t guesses);

double to_double(const Rational& r);
double log2(const BigInt& value);

}  // namespace eegpass::analysis

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

#include "eegpass/analysis.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "eegpass/error.hpp"
#include "eegpass/utf8.hpp"

namespace eegpass::analysis {

namespace {

using Mask = std::uint32_t;  // bit att*5+rel set when the pair is admitted

Mask mask_of(const Pel& pel) {
  Mask m = 0;
  for (auto att : kAllLevels)
    for (auto rel : kAllLevels)
      if (pel.att.matches(att) && pel.rel.matches(rel))
        m |= Mask{1} << (index_of(att) * 5 + index_of(rel));
  return m;
}

BigInt factorial(std::size_t n) {
  BigInt out = 1;
  for (std::size_t i = 2; i <= n; ++i) out *= i;
  return out;
}

BigInt binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) return 0;
  BigInt out = 1;
  for (std::uint64_t i = 1; i <= k; ++i) out = out * (n - k + i) / i;
  return out;
}

// Code points of each pel, mapped to small integer ids shared across pels.
struct TemplateView {
  std::vector<std::vector<int>> chars;
  std::vector<Mask> masks;
  std::vector<std::size_t> lens;
  std::vector<int> password;
  std::size_t distinct_chars = 0;
};

TemplateView view_of(const PelTemplate& tpl) {
  TemplateView v;
  std::map<std::string, int> ids;
  for (const auto& pel : tpl.pels()) {
    std::vector<int> cps;
    for (const auto& cp : utf8::code_points(pel.chars)) {
      auto [it, inserted] = ids.try_emplace(cp, static_cast<int>(ids.size()));
      cps.push_back(it->second);
    }
    v.lens.push_back(cps.size());
    v.password.insert(v.password.end(), cps.begin(), cps.end());
    v.chars.push_back(std::move(cps));
    v.masks.push_back(mask_of(pel));
  }
  v.distinct_chars = ids.size();
  return v;
}

// Size of the union over req tuples R_j of the product sets prod_i R_j[i],
// by dynamic programming over positions with the set of still-matching
// tuples as state.
BigInt union_of_products(const std::vector<std::vector<Mask>>& tuples) {
  if (tuples.empty()) return 0;
  const std::size_t g = tuples.size();
  const std::size_t n = tuples.front().size();
  const std::size_t words = (g + 63) / 64;
  using Alive = std::vector<std::uint64_t>;

  std::map<Alive, BigInt> states;
  Alive all(words, 0);
  for (std::size_t j = 0; j < g; ++j) all[j / 64] |= std::uint64_t{1} << (j % 64);
  states[all] = 1;

  for (std::size_t i = 0; i < n; ++i) {
    // group the 25 pairs by which tuples admit them
    std::map<Alive, unsigned> columns;
    for (unsigned s = 0; s < kStatesPerSlot; ++s) {
      Alive col(words, 0);
      for (std::size_t j = 0; j < g; ++j)
        if (tuples[j][i] >> s & 1u) col[j / 64] |= std::uint64_t{1} << (j % 64);
      ++columns[col];
    }
    std::map<Alive, BigInt> next;
    for (const auto& [alive, count] : states) {
      for (const auto& [col, multiplicity] : columns) {
        Alive both(words);
        bool any = false;
        for (std::size_t w = 0; w < words; ++w) {
          both[w] = alive[w] & col[w];
          any |= both[w] != 0;
        }
        if (any) next[both] += count * multiplicity;
      }
    }
    states = std::move(next);
  }
  BigInt total = 0;
  for (const auto& [alive, count] : states) total += count;
  return total;
}

struct SequenceFilter {
  bool chars_in_template_order = false;  // char tuple must equal the template's
  bool chars_spell_password = false;     // concatenation must equal the password
  bool lengths_as_template = false;      // pel lengths must equal the template's
  bool states_as_template = false;       // states must also satisfy the linear template
};

// Distinct accepted pel sequences (all orders x wildcard substitutions)
// passing the filter.
BigInt accepted_sequences(const TemplateView& v, const SequenceFilter& filter) {
  const std::size_t n = v.chars.size();
  std::map<std::vector<std::vector<int>>, std::set<std::vector<Mask>>> groups;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  do {
    std::vector<std::vector<int>> chars;
    std::vector<Mask> masks;
    for (std::size_t i = 0; i < n; ++i) {
      chars.push_back(v.chars[order[i]]);
      masks.push_back(v.masks[order[i]]);
    }
    if (filter.lengths_as_template || filter.states_as_template) {
      bool same = true;
      for (std::size_t i = 0; i < n; ++i) same &= chars[i].size() == v.lens[i];
      if (!same) continue;
    }
    if (filter.chars_in_template_order && chars != v.chars) continue;
    if (filter.chars_spell_password) {
      std::vector<int> joined;
      for (const auto& c : chars) joined.insert(joined.end(), c.begin(), c.end());
      if (joined != v.password) continue;
    }
    if (filter.states_as_template) {
      bool empty = false;
      for (std::size_t i = 0; i < n; ++i) {
        masks[i] &= v.masks[i];
        empty |= masks[i] == 0;
      }
      if (empty) continue;
    }
    groups[chars].insert(masks);
  } while (std::next_permutation(order.begin(), order.end()));

  BigInt total = 0;
  for (const auto& [chars, tuples] : groups)
    total += union_of_products(std::vector<std::vector<Mask>>(tuples.begin(), tuples.end()));
  return total;
}

BigInt power(BigInt base, std::uint64_t exp) {
  BigInt out = 1;
  while (exp) {
    if (exp & 1) out *= base;
    base *= base;
    exp >>= 1;
  }
  return out;
}

}  // namespace

double log2(const BigInt& value) {
  if (value <= 0) return -std::numeric_limits<double>::infinity();
  const auto top = boost::multiprecision::msb(value);
  if (top < 53) return std::log2(value.convert_to<double>());
  const BigInt head = value >> (top - 52);
  return std::log2(head.convert_to<double>()) + static_cast<double>(top - 52);
}

double to_double(const Rational& r) {
  using Float = boost::multiprecision::cpp_bin_float_50;
  const Float num(boost::multiprecision::numerator(r));
  const Float den(boost::multiprecision::denominator(r));
  return static_cast<double>(num / den);
}

Keyspace keyspace(std::uint64_t alphabet_size, std::uint64_t length, bool with_states) {
  if (alphabet_size < 1 || length < 1) fail(Errc::input, "alphabet and length must be >= 1");
  BigInt base = alphabet_size;
  if (with_states) base *= kStatesPerSlot;
  Keyspace out;
  out.count = power(base, length);
  out.bits = static_cast<double>(length) * std::log2(base.convert_to<double>());
  return out;
}

PoolStats pool_stats(const PelTemplate& tpl) {
  const auto v = view_of(tpl);
  PoolStats out;
  out.orders = factorial(tpl.size());
  out.expansions = 1;
  for (std::size_t i = 0; i < tpl.size(); ++i) {
    out.expansions *= std::popcount(v.masks[i]);
    if (tpl.wildcards(i) == 2) out.unconstrained_pels.push_back(i);
  }
  out.pool_size = accepted_sequences(v, {});
  out.entropy_loss_bits = std::log2(out.orders.convert_to<double>());
  return out;
}

AttackerModel parse_attacker(std::string_view text) {
  AttackerModel out;
  std::stringstream in{std::string(text)};
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty() || item == "none") continue;
    if (item == "chars") out.knows_chars = true;
    else if (item == "segmentation") out.knows_segmentation = true;
    else if (item == "states") out.knows_states = true;
    else if (item.starts_with("guesses=") || item.starts_with("alphabet=")) {
      const auto value = item.substr(item.find('=') + 1);
      std::uint64_t n = 0;
      try {
        std::size_t used = 0;
        n = std::stoull(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
      } catch (const std::exception&) {
        fail(Errc::parse, "attacker parameter " + item + " is not a number");
      }
      if (n < 1) fail(Errc::parse, "attacker parameter " + item + " must be >= 1");
      (item[0] == 'g' ? out.guesses : out.alphabet_size) = n;
    } else {
      fail(Errc::parse, "unknown attacker knowledge '" + item + "'");
    }
  }
  return out;
}

std::string format_attacker(const AttackerModel& a) {
  std::string out;
  auto add = [&](const std::string& s) { out += (out.empty() ? "" : ",") + s; };
  if (a.knows_chars) add("chars");
  if (a.knows_segmentation) add("segmentation");
  if (a.knows_states) add("states");
  add("guesses=" + std::to_string(a.guesses));
  add("alphabet=" + std::to_string(a.alphabet_size));
  return out;
}

AttackSpace attack_space(const PelTemplate& tpl, const AttackerModel& attacker) {
  if (attacker.guesses < 1) fail(Errc::input, "attacker needs at least one guess");
  const auto v = view_of(tpl);
  if (!attacker.knows_chars && attacker.alphabet_size < v.distinct_chars)
    fail(Errc::input, "alphabet smaller than the password's distinct characters");
  const bool seg_known = attacker.knows_segmentation || attacker.knows_states;
  const auto length = v.password.size();
  const BigInt chars = attacker.knows_chars ? BigInt(1) : power(attacker.alphabet_size, length);

  AttackSpace out;
  if (seg_known) {
    BigInt states = 1;
    for (std::size_t i = 0; i < tpl.size(); ++i)
      states *= attacker.knows_states ? BigInt(std::popcount(v.masks[i])) : BigInt(kStatesPerSlot);
    out.size = chars * states;
  } else {
    for (std::size_t k = 1; k <= std::min<std::size_t>(kMaxPels, length); ++k)
      out.size += binomial(length - 1, k - 1) * chars * power(kStatesPerSlot, k);
  }

  SequenceFilter filter;
  filter.lengths_as_template = seg_known;
  filter.chars_in_template_order = attacker.knows_chars && seg_known;
  filter.chars_spell_password = attacker.knows_chars && !seg_known;
  filter.states_as_template = attacker.knows_states;
  out.accepted = accepted_sequences(v, filter);
  return out;
}

Rational exact_success(const AttackSpace& space, std::uint64_t guesses) {
  if (space.size <= guesses) return 1;
  Rational miss = 1;
  const BigInt rejecting = space.size - space.accepted;
  for (std::uint64_t i = 0; i < guesses; ++i) {
    if (rejecting <= i) return 1;
    miss *= Rational(rejecting - i, space.size - i);
  }
  return 1 - miss;
}

namespace {

struct Submission {
  std::vector<std::vector<int>> chars;
  std::vector<unsigned> states;  // att*5+rel per pel

  friend auto operator<=>(const Submission&, const Submission&) = default;
};

// Does some permutation of the template pels line up with the submission?
bool accepts(const TemplateView& v, const Submission& s) {
  const std::size_t n = v.chars.size();
  if (s.chars.size() != n) return false;
  std::vector<bool> used(n, false);
  auto match = [&](auto&& self, std::size_t i) -> bool {
    if (i == n) return true;
    for (std::size_t j = 0; j < n; ++j) {
      if (used[j] || v.chars[j] != s.chars[i] || !(v.masks[j] >> s.states[i] & 1u)) continue;
      used[j] = true;
      if (self(self, i + 1)) return true;
      used[j] = false;
    }
    return false;
  };
  return match(match, 0);
}

std::vector<unsigned> admitted(Mask m) {
  std::vector<unsigned> out;
  for (unsigned s = 0; s < kStatesPerSlot; ++s)
    if (m >> s & 1u) out.push_back(s);
  return out;
}

}  // namespace

double monte_carlo_guess(const PelTemplate& tpl, const AttackerModel& attacker,
                         std::uint64_t seed, std::uint64_t runs) {
  if (runs == 0) fail(Errc::input, "Monte Carlo needs at least one run");
  const auto v = view_of(tpl);
  const auto space = attack_space(tpl, attacker);
  if (space.size <= attacker.guesses) return space.accepted > 0 ? 1.0 : 0.0;

  const bool seg_known = attacker.knows_segmentation || attacker.knows_states;
  const auto length = v.password.size();
  std::mt19937_64 rng(seed);

  // composition size weights C(L-1, k-1) * 25^k; the chars factor is common
  std::vector<double> weights;
  if (!seg_known)
    for (std::size_t k = 1; k <= std::min<std::size_t>(kMaxPels, length); ++k)
      weights.push_back((binomial(length - 1, k - 1) * power(kStatesPerSlot, k)).convert_to<double>());
  std::discrete_distribution<std::size_t> pick_k(weights.begin(), weights.end());
  std::uniform_int_distribution<std::uint64_t> pick_char(0, attacker.alphabet_size - 1);
  std::uniform_int_distribution<unsigned> pick_state(0, kStatesPerSlot - 1);

  std::vector<std::vector<unsigned>> known_states;
  for (auto m : v.masks) known_states.push_back(admitted(m));

  auto draw = [&] {
    std::vector<std::size_t> lens;
    if (seg_known) {
      lens = v.lens;
    } else {
      const std::size_t k = pick_k(rng) + 1;
      std::vector<std::size_t> cuts(length - 1);
      std::iota(cuts.begin(), cuts.end(), std::size_t{1});
      std::shuffle(cuts.begin(), cuts.end(), rng);
      cuts.resize(k - 1);
      std::sort(cuts.begin(), cuts.end());
      std::size_t prev = 0;
      for (auto c : cuts) {
        lens.push_back(c - prev);
        prev = c;
      }
      lens.push_back(length - prev);
    }
    Submission s;
    std::size_t pos = 0;
    for (std::size_t i = 0; i < lens.size(); ++i) {
      std::vector<int> chars;
      for (std::size_t c = 0; c < lens[i]; ++c, ++pos)
        chars.push_back(attacker.knows_chars ? v.password[pos] : static_cast<int>(pick_char(rng)));
      s.chars.push_back(std::move(chars));
      if (attacker.knows_states) {
        const auto& options = known_states[i];
        s.states.push_back(options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)]);
      } else {
        s.states.push_back(pick_state(rng));
      }
    }
    return s;
  };

  std::uint64_t hits = 0;
  for (std::uint64_t run = 0; run < runs; ++run) {
    std::set<Submission> tried;
    bool success = false;
    while (tried.size() < attacker.guesses && !success) {
      auto s = draw();
      if (!tried.insert(s).second) continue;
      success = accepts(v, s);
    }
    hits += success;
  }
  return static_cast<double>(hits) / static_cast<double>(runs);
}

GuessSuccess guess_success(const PelTemplate& tpl, const AttackerModel& attacker,
                           std::uint64_t seed, std::uint64_t runs) {
  GuessSuccess out;
  out.space = attack_space(tpl, attacker);
  if (attacker.guesses <= 1000) out.exact = exact_success(out.space, attacker.guesses);
  if (out.space.size <= kExactSpaceLimit && out.exact) {
    out.probability = to_double(*out.exact);
  } else {
    out.monte_carlo = true;
    out.runs = runs;
    out.probability = monte_carlo_guess(tpl, attacker, seed, runs);
  }
  return out;
}

}  // namespace eegpass::analysis

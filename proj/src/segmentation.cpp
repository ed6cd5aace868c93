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

#include "eegpass/segmentation.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>

#include "eegpass/error.hpp"
#include "eegpass/utf8.hpp"

namespace eegpass {

std::vector<AnnotatedChar> annotate(std::span<const KeyEvent> keys,
                                    std::span<const SignalSample> samples,
                                    const QuantizerConfig& cfg) {
  if (keys.empty()) fail(Errc::input, "no keystrokes to annotate");
  cfg.validate();

  struct Levels {
    StateLevel att;
    StateLevel rel;
  };
  std::vector<Levels> levels;
  levels.reserve(samples.size());
  std::optional<StateLevel> prev_att;
  std::optional<StateLevel> prev_rel;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    validate(samples[i]);
    if (i > 0 && samples[i].t_ms <= samples[i - 1].t_ms)
      fail(Errc::input, "signal samples are not strictly time-ordered");
    prev_att = quantize(samples[i].attention, prev_att, cfg);
    prev_rel = quantize(samples[i].meditation, prev_rel, cfg);
    levels.push_back({*prev_att, *prev_rel});
  }

  std::vector<AnnotatedChar> out;
  out.reserve(keys.size());
  std::size_t next = 0;  // first sample strictly after the current key
  for (std::size_t k = 0; k < keys.size(); ++k) {
    const auto& key = keys[k];
    if (!utf8::is_single_code_point(key.ch))
      fail(Errc::input, "key event must carry exactly one code point");
    if (k > 0 && key.t_ms <= keys[k - 1].t_ms)
      fail(Errc::input, "key events are not strictly time-ordered");
    while (next < samples.size() && samples[next].t_ms <= key.t_ms) ++next;
    if (next == 0)
      fail(Errc::signal_gap, "no signal sample precedes key at t=" + std::to_string(key.t_ms));
    const auto& sample = samples[next - 1];
    out.push_back({key.ch, levels[next - 1].att, levels[next - 1].rel, sample.attention,
                   sample.meditation});
  }
  return out;
}

namespace {

struct Run {
  std::size_t begin;
  std::size_t end;  // exclusive
  StateLevel att;
  StateLevel rel;
};

std::vector<Run> runs_of(std::span<const AnnotatedChar> chars) {
  std::vector<Run> runs;
  for (std::size_t i = 0; i < chars.size(); ++i) {
    if (!runs.empty() && runs.back().att == chars[i].att && runs.back().rel == chars[i].rel)
      runs.back().end = i + 1;
    else
      runs.push_back({i, i + 1, chars[i].att, chars[i].rel});
  }
  return runs;
}

bool one_step_apart(const Run& a, const Run& b) {
  const int datt = std::abs(index_of(a.att) - index_of(b.att));
  const int drel = std::abs(index_of(a.rel) - index_of(b.rel));
  return datt + drel == 1;
}

bool flicker_boundary(std::span<const AnnotatedChar> chars, const Run& left, const Run& right,
                      const QuantizerConfig& cfg) {
  if (!one_step_apart(left, right)) return false;
  const auto& last = chars[left.end - 1];
  const auto& first = chars[right.begin];
  if (left.att != right.att)
    return near_edge(last.att_raw, left.att, right.att, cfg) ||
           near_edge(first.att_raw, left.att, right.att, cfg);
  return near_edge(last.rel_raw, left.rel, right.rel, cfg) ||
         near_edge(first.rel_raw, left.rel, right.rel, cfg);
}

// Builds the pel list obtained by merging the runs joined at `merged`
// boundaries (boundary j joins run j and run j+1).
std::vector<ObservedPel> merge_runs(std::span<const AnnotatedChar> chars,
                                    const std::vector<Run>& runs,
                                    const std::vector<std::size_t>& merged) {
  std::vector<bool> joined(runs.size(), false);
  for (auto j : merged) joined[j] = true;

  std::vector<ObservedPel> pels;
  std::size_t r = 0;
  while (r < runs.size()) {
    std::size_t last = r;
    while (last + 1 < runs.size() && joined[last]) ++last;

    // majority pattern by character count, ties to the first seen
    std::vector<std::pair<std::pair<StateLevel, StateLevel>, std::size_t>> tally;
    std::string text;
    for (std::size_t k = r; k <= last; ++k) {
      const auto key = std::pair{runs[k].att, runs[k].rel};
      auto it = std::find_if(tally.begin(), tally.end(),
                             [&](const auto& t) { return t.first == key; });
      const auto count = runs[k].end - runs[k].begin;
      if (it == tally.end())
        tally.push_back({key, count});
      else
        it->second += count;
      for (auto i = runs[k].begin; i < runs[k].end; ++i) text += chars[i].ch;
    }
    auto best = tally.begin();
    for (auto it = tally.begin(); it != tally.end(); ++it)
      if (it->second > best->second) best = it;

    const auto [att, rel] = best->first;
    if (!pels.empty() && pels.back().att == att && pels.back().rel == rel)
      pels.back().chars += text;
    else
      pels.push_back({std::move(text), att, rel});
    r = last + 1;
  }
  return pels;
}

// Advances `combo` (sorted indices into a pool of size m) to the next
// lexicographic combination of the same size. Returns false when exhausted.
bool next_combination(std::vector<std::size_t>& combo, std::size_t m) {
  const std::size_t k = combo.size();
  for (std::size_t i = k; i-- > 0;) {
    if (combo[i] < m - k + i) {
      ++combo[i];
      for (std::size_t j = i + 1; j < k; ++j) combo[j] = combo[j - 1] + 1;
      return true;
    }
  }
  return false;
}

// Upper bound on merge subsets examined, independent of max_candidates, so an
// adversarial trace cannot make candidate generation expensive.
constexpr std::size_t kMaxSubsetsExamined = 4096;

}  // namespace

std::vector<ObservedPel> segment(std::span<const AnnotatedChar> chars) {
  if (chars.empty()) fail(Errc::input, "nothing to segment");
  std::vector<ObservedPel> pels;
  for (const auto& c : chars) {
    if (!pels.empty() && pels.back().att == c.att && pels.back().rel == c.rel)
      pels.back().chars += c.ch;
    else
      pels.push_back({c.ch, c.att, c.rel});
  }
  return pels;
}

std::vector<std::vector<ObservedPel>> candidate_segmentations(
    std::span<const AnnotatedChar> chars, std::size_t max_candidates,
    const QuantizerConfig& cfg) {
  if (max_candidates == 0) fail(Errc::input, "max_candidates must be at least 1");
  std::vector<std::vector<ObservedPel>> out;
  out.push_back(segment(chars));

  const auto runs = runs_of(chars);
  std::vector<std::size_t> mergeable;
  for (std::size_t j = 0; j + 1 < runs.size(); ++j)
    if (flicker_boundary(chars, runs[j], runs[j + 1], cfg)) mergeable.push_back(j);

  std::size_t examined = 0;
  const auto m = mergeable.size();
  for (std::size_t k = 1; k <= m && out.size() < max_candidates; ++k) {
    std::vector<std::size_t> combo(k);
    for (std::size_t i = 0; i < k; ++i) combo[i] = i;
    do {
      if (++examined > kMaxSubsetsExamined) return out;
      std::vector<std::size_t> merged(k);
      for (std::size_t i = 0; i < k; ++i) merged[i] = mergeable[combo[i]];
      auto candidate = merge_runs(chars, runs, merged);
      if (std::find(out.begin(), out.end(), candidate) == out.end()) {
        out.push_back(std::move(candidate));
        if (out.size() >= max_candidates) return out;
      }
    } while (next_combination(combo, m));
  }
  return out;
}

PelTemplate infer_template(std::span<const std::vector<AnnotatedChar>> trials,
                           double min_agreement) {
  if (trials.size() < kMinEnrolmentTrials)
    fail(Errc::input, "enrolment needs at least 3 trials");
  if (!(min_agreement > 0.0 && min_agreement <= 1.0))
    fail(Errc::input, "min_agreement must lie in (0,1]");

  const auto& reference = trials.front();
  if (reference.empty()) fail(Errc::input, "enrolment trial is empty");
  for (const auto& trial : trials) {
    if (trial.size() != reference.size())
      fail(Errc::enrolment_mismatch, "enrolment trials spell different passwords");
    for (std::size_t i = 0; i < trial.size(); ++i)
      if (trial[i].ch != reference[i].ch)
        fail(Errc::enrolment_mismatch, "enrolment trials spell different passwords");
  }

  const auto needed = min_agreement * static_cast<double>(trials.size()) - 1e-9;
  auto agreed = [&](auto level_of, std::size_t pos) -> RequiredLevel {
    std::array<std::size_t, 5> counts{};
    for (const auto& trial : trials) ++counts[index_of(level_of(trial[pos]))];
    for (auto level : kAllLevels)
      if (static_cast<double>(counts[index_of(level)]) >= needed) return level;
    return RequiredLevel::any();
  };

  std::vector<Pel> pels;
  for (std::size_t pos = 0; pos < reference.size(); ++pos) {
    const auto att = agreed([](const AnnotatedChar& c) { return c.att; }, pos);
    const auto rel = agreed([](const AnnotatedChar& c) { return c.rel; }, pos);
    if (!pels.empty() && pels.back().att == att && pels.back().rel == rel)
      pels.back().chars += reference[pos].ch;
    else
      pels.push_back({reference[pos].ch, att, rel});
  }
  if (pels.size() > kMaxPels)
    fail(Errc::template_too_fragmented,
         "inferred template has " + std::to_string(pels.size()) + " pels");
  return PelTemplate(std::move(pels));
}

}  // namespace eegpass

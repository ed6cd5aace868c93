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

#include "eegpass/model.hpp"

#include <cctype>
#include <cstdlib>

#include "eegpass/error.hpp"
#include "eegpass/utf8.hpp"

namespace eegpass {

char to_char(StateLevel level) noexcept {
  static constexpr char symbols[] = {'S', 'L', 'N', 'R', 'H'};
  return symbols[index_of(level)];
}

std::optional<StateLevel> level_from_char(char c) noexcept {
  switch (c) {
    case 'S': return StateLevel::S;
    case 'L': return StateLevel::L;
    case 'N': return StateLevel::N;
    case 'R': return StateLevel::R;
    case 'H': return StateLevel::H;
    default: return std::nullopt;
  }
}

std::optional<RequiredLevel> required_from_char(char c) noexcept {
  if (c == '0') return RequiredLevel::any();
  if (auto level = level_from_char(c)) return RequiredLevel{*level};
  return std::nullopt;
}

void validate(const SignalSample& sample) {
  if (sample.t_ms < 0) fail(Errc::range, "sample timestamp is negative");
  if (sample.attention < kSignalMin || sample.attention > kSignalMax ||
      sample.meditation < kSignalMin || sample.meditation > kSignalMax)
    fail(Errc::range, "signal value outside 0..100");
}

namespace {

void validate_chars(const std::string& chars) {
  const auto len = utf8::length(chars);
  if (len == 0) fail(Errc::input, "pel characters are empty");
  if (len > kMaxPelChars) fail(Errc::input, "pel longer than 64 code points");
}

}  // namespace

PelTemplate::PelTemplate(std::vector<Pel> pels) : pels_(std::move(pels)) {
  if (pels_.empty()) fail(Errc::input, "template has no pels");
  if (pels_.size() > kMaxPels)
    fail(Errc::template_too_fragmented, "template has more than 6 pels");
  std::size_t total = 0;
  for (std::size_t i = 0; i < pels_.size(); ++i) {
    validate_chars(pels_[i].chars);
    total += utf8::length(pels_[i].chars);
    if (i > 0 && pels_[i - 1].att == pels_[i].att && pels_[i - 1].rel == pels_[i].rel)
      fail(Errc::input, "adjacent pels share the same required pattern");
  }
  if (total > kMaxPasswordChars) fail(Errc::input, "password longer than 256 code points");
}

std::string PelTemplate::password() const {
  std::string out;
  for (const auto& p : pels_) out += p.chars;
  return out;
}

int PelTemplate::wildcards(std::size_t i) const {
  return int(pels_.at(i).att.is_wildcard()) + int(pels_.at(i).rel.is_wildcard());
}

void QuantizerConfig::validate() const {
  int prev = kSignalMin;
  int min_gap = kSignalMax;
  for (int edge : band_edges) {
    if (edge <= prev || edge >= kSignalMax)
      fail(Errc::input, "band edges must ascend strictly inside (0,100)");
    min_gap = std::min(min_gap, edge - prev);
    prev = edge;
  }
  min_gap = std::min(min_gap, kSignalMax - prev);
  if (hysteresis_margin < 0 || hysteresis_margin >= min_gap)
    fail(Errc::input, "hysteresis margin must be below the narrowest band");
}

namespace {

StateLevel band_of(int value, const QuantizerConfig& cfg) {
  int band = 0;
  for (int edge : cfg.band_edges)
    if (value >= edge) ++band;
  return static_cast<StateLevel>(band);
}

}  // namespace

bool near_edge(int value, StateLevel a, StateLevel b, const QuantizerConfig& cfg) {
  const int ia = index_of(a);
  const int ib = index_of(b);
  if (std::abs(ia - ib) != 1 || cfg.hysteresis_margin == 0) return false;
  const int edge = cfg.band_edges[static_cast<std::size_t>(std::min(ia, ib))];
  return std::abs(value - edge) <= cfg.hysteresis_margin;
}

StateLevel quantize(int value, std::optional<StateLevel> prev, const QuantizerConfig& cfg) {
  if (value < kSignalMin || value > kSignalMax)
    fail(Errc::input, "signal value outside 0..100");
  const StateLevel band = band_of(value, cfg);
  if (prev && *prev != band && near_edge(value, *prev, band, cfg)) return *prev;
  return band;
}

void validate(const ObservedPel& pel) { validate_chars(pel.chars); }

Bytes encode_pel(const ObservedPel& pel) {
  validate(pel);
  const auto& chars = pel.chars;
  Bytes out;
  out.reserve(chars.size() + 5);
  out.push_back(kPelEncodingVersion);
  out.push_back(static_cast<std::uint8_t>((chars.size() >> 8) & 0xFF));
  out.push_back(static_cast<std::uint8_t>(chars.size() & 0xFF));
  out.insert(out.end(), chars.begin(), chars.end());
  out.push_back(static_cast<std::uint8_t>(to_char(pel.att)));
  out.push_back(static_cast<std::uint8_t>(to_char(pel.rel)));
  return out;
}

// Template notation
//   template := '[' pel (',' pel)* ']'
//   pel      := '[' chars ',' lvl ',' lvl ']'

namespace {

class NotationParser {
public:
  explicit NotationParser(std::string_view text) : text_(text) {}

  PelTemplate parse() {
    std::vector<Pel> pels;
    expect('[');
    do {
      pels.push_back(parse_pel());
      if (pels.size() > kMaxPels)
        fail(Errc::template_too_fragmented, "template has more than 6 pels");
    } while (accept(','));
    expect(']');
    skip_ws();
    if (pos_ != text_.size()) error("trailing input");
    for (std::size_t i = 1; i < pels.size(); ++i)
      if (pels[i - 1].att == pels[i].att && pels[i - 1].rel == pels[i].rel)
        fail(Errc::parse, "adjacent pels " + std::to_string(i) + " and " +
                              std::to_string(i + 1) + " share the same pattern");
    try {
      return PelTemplate(std::move(pels));
    } catch (const Error& e) {
      fail(Errc::parse, e.what());
    }
  }

private:
  Pel parse_pel() {
    expect('[');
    skip_ws();
    const auto start = pos_;
    while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ']') ++pos_;
    auto chars = text_.substr(start, pos_ - start);
    while (!chars.empty() && std::isspace(static_cast<unsigned char>(chars.back())))
      chars.remove_suffix(1);
    if (chars.empty()) error("empty pel characters");
    expect(',');
    const auto att = parse_level();
    expect(',');
    const auto rel = parse_level();
    expect(']');
    return Pel{std::string(chars), att, rel};
  }

  RequiredLevel parse_level() {
    skip_ws();
    if (pos_ >= text_.size()) error("expected level");
    auto level = required_from_char(text_[pos_]);
    if (!level) error("unknown level symbol");
    ++pos_;
    return *level;
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) error(std::string("expected '") + c + "'");
  }

  [[noreturn]] void error(const std::string& what) const {
    fail(Errc::parse, "template notation: " + what + " at offset " + std::to_string(pos_));
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

PelTemplate parse_template(std::string_view text) { return NotationParser(text).parse(); }

std::string format_template(const PelTemplate& tpl) {
  std::string out = "[";
  for (std::size_t i = 0; i < tpl.size(); ++i) {
    if (i) out += ',';
    out += '[';
    out += tpl[i].chars;
    out += ',';
    out += tpl[i].att.symbol();
    out += ',';
    out += tpl[i].rel.symbol();
    out += ']';
  }
  out += ']';
  return out;
}

}  // namespace eegpass

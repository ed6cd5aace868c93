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

#include "eegpass/utf8.hpp"

#include "eegpass/error.hpp"

namespace eegpass::utf8 {
namespace {

// Byte length of the sequence starting at text[i], or 0 if malformed.
std::size_t sequence_length(std::string_view text, std::size_t i) noexcept {
  const auto lead = static_cast<unsigned char>(text[i]);
  std::size_t len = 0;
  char32_t cp = 0;
  if (lead < 0x80) return 1;
  if ((lead & 0xE0) == 0xC0) { len = 2; cp = lead & 0x1F; }
  else if ((lead & 0xF0) == 0xE0) { len = 3; cp = lead & 0x0F; }
  else if ((lead & 0xF8) == 0xF0) { len = 4; cp = lead & 0x07; }
  else return 0;
  if (i + len > text.size()) return 0;
  for (std::size_t k = 1; k < len; ++k) {
    const auto cont = static_cast<unsigned char>(text[i + k]);
    if ((cont & 0xC0) != 0x80) return 0;
    cp = (cp << 6) | (cont & 0x3F);
  }
  // overlong forms, surrogates, out of range
  if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
      (len == 4 && cp < 0x10000) || cp > 0x10FFFF ||
      (cp >= 0xD800 && cp <= 0xDFFF))
    return 0;
  return len;
}

}  // namespace

std::vector<std::string> code_points(std::string_view text) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < text.size();) {
    const auto len = sequence_length(text, i);
    if (len == 0) fail(Errc::input, "malformed UTF-8");
    out.emplace_back(text.substr(i, len));
    i += len;
  }
  return out;
}

std::size_t length(std::string_view text) { return code_points(text).size(); }

bool is_single_code_point(std::string_view text) noexcept {
  return !text.empty() && sequence_length(text, 0) == text.size();
}

}  // namespace eegpass::utf8

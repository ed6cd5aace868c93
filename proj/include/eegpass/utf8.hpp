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

#include <string>
#include <string_view>
#include <vector>

namespace eegpass::utf8 {

// Splits valid UTF-8 into one string per code point. Throws Errc::input on
// malformed sequences.
std::vector<std::string> code_points(std::string_view text);

std::size_t length(std::string_view text);

bool is_single_code_point(std::string_view text) noexcept;

}  // namespace eegpass::utf8

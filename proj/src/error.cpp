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

#include "eegpass/error.hpp"

namespace eegpass {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::input: return "input";
    case Errc::signal_gap: return "signal-gap";
    case Errc::enrolment_mismatch: return "enrolment-mismatch";
    case Errc::template_too_fragmented: return "template-too-fragmented";
    case Errc::pool_too_large: return "pool-too-large";
    case Errc::parse: return "parse";
    case Errc::range: return "range";
    case Errc::version: return "version";
    case Errc::corrupt_file: return "corrupt-file";
    case Errc::io: return "io";
    case Errc::transport: return "transport";
    case Errc::state: return "state";
    case Errc::unknown_principal: return "unknown-principal";
  }
  return "unknown";
}

}  // namespace eegpass

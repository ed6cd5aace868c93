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

#include <filesystem>
#include <span>
#include <vector>

#include "eegpass/server.hpp"

namespace eegpass {

inline constexpr int kStoreVersion = 1;

/// Versioned, checksummed JSON document of user records and client ids.
/// Keys never go here; they live in the key file.
void save_store(const ServerState& state, const std::filesystem::path& path);

/// Throws Errc::version for other versions, Errc::corrupt_file when the
/// document does not parse or its checksum does not match.
ServerState load_store(const std::filesystem::path& path);

/// One `client_id:64-hex-digit-key` per line; blank lines and lines starting
/// with '#' are ignored. The same format serves the server key database and a
/// client's single-key file.
std::vector<ClientCredential> load_key_file(const std::filesystem::path& path);

/// Written with owner-only permissions.
void save_key_file(std::span<const ClientCredential> credentials,
                   const std::filesystem::path& path);

}  // namespace eegpass

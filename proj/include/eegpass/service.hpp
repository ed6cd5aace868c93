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

// TCP endpoint of the authentication server.
//
// Request records (client -> server):
//   ENROLL_BEGIN   client_id, user_id, mode, [template | hp_variants]
//   ENROLL_DATA    session, hp_variants
//   ENROLL_CONFIRM session, hpf | hpf_candidates, order_kind
//   AUTH           client_id, user_id, [hpf_candidates]
// Replies are RESULT (ok, reason, session, mode) or ERROR (reason). An AUTH
// without candidates is the hello: the reply's `mode` tells the client how
// to compute its HPF.

#include <atomic>
#include <filesystem>
#include <list>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "eegpass/server.hpp"
#include "eegpass/wire.hpp"

namespace eegpass {

class AuthService {
public:
  explicit AuthService(AuthServer& server,
                       std::optional<std::filesystem::path> store_path = std::nullopt);

  wire::Record handle(const wire::Record& request);
  std::string handle_line(std::string_view line);

  /// Accepts connections until `stop` becomes true.
  void serve(wire::Listener& listener, const std::atomic<bool>& stop);

private:
  void persist();
  void connection_loop(wire::Socket socket, const std::atomic<bool>& stop);

  AuthServer& server_;
  std::optional<std::filesystem::path> store_path_;
  std::mutex store_mutex_;
};

/// Runs an AuthService on a background thread; stops on destruction.
class BackgroundService {
public:
  BackgroundService(AuthServer& server, std::uint16_t port = 0,
                    std::optional<std::filesystem::path> store_path = std::nullopt);
  ~BackgroundService();
  BackgroundService(const BackgroundService&) = delete;
  BackgroundService& operator=(const BackgroundService&) = delete;

  wire::Endpoint endpoint() const { return {"127.0.0.1", listener_.port()}; }

private:
  AuthService service_;
  wire::Listener listener_;
  std::atomic<bool> stop_{false};
  std::thread thread_;
};

/// Decodes a wire HPF: 64 hex digits for static values, 6-8 decimal digits
/// for one-time codes.
Hpf parse_wire_hpf(std::string_view text);

}  // namespace eegpass

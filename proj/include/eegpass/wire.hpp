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

// Newline-delimited JSON records over TCP, shared by the authentication
// service and the console bridge.

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include <json.hpp>

namespace eegpass::wire {

using Record = nlohmann::json;

inline constexpr std::uint16_t kDefaultPort = 7311;
inline constexpr std::uint16_t kDefaultBridgePort = 7312;
inline constexpr std::size_t kMaxLineBytes = 1 << 20;

/// Parses one line into an object with a string `type` from `types` and no
/// fields outside `fields`. Throws Errc::parse otherwise.
Record parse_record(std::string_view line, std::initializer_list<std::string_view> types,
                    std::initializer_list<std::string_view> fields);

/// Serialises to a single line (no trailing newline).
std::string to_line(const Record& record);

struct Endpoint {
  std::string host = "127.0.0.1";
  std::uint16_t port = kDefaultPort;

  /// "host:port", ":port" or "port".
  static Endpoint parse(std::string_view text);
  std::string to_string() const;
};

class Socket {
public:
  Socket() = default;
  explicit Socket(int fd) noexcept : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(std::exchange(other.fd_, -1)) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket();

  int fd() const noexcept { return fd_; }
  bool valid() const noexcept { return fd_ >= 0; }
  void shutdown() noexcept;

private:
  int fd_ = -1;
};

/// Buffered line I/O over a connected socket. All failures are Errc::transport.
class LineConnection {
public:
  explicit LineConnection(Socket socket) : socket_(std::move(socket)) {}

  /// Next line without its terminator; nullopt on orderly EOF. A timeout of
  /// -1 waits indefinitely.
  std::optional<std::string> read_line(int timeout_ms = -1);
  void write_line(std::string_view line);

  /// True when a complete line is buffered or the socket has data (or EOF).
  bool poll(int timeout_ms);

  void send(const Record& record) { write_line(to_line(record)); }

  Socket& socket() noexcept { return socket_; }

private:
  Socket socket_;
  std::string buffer_;
};

LineConnection connect(const Endpoint& endpoint, int timeout_ms = 2000);

class Listener {
public:
  /// Port 0 picks an ephemeral port.
  Listener(const std::string& host, std::uint16_t port);

  std::uint16_t port() const noexcept { return port_; }

  /// Waits up to timeout_ms for a connection.
  std::optional<Socket> accept(int timeout_ms);

private:
  Socket socket_;
  std::uint16_t port_ = 0;
};

}  // namespace eegpass::wire

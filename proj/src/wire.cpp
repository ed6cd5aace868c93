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

#include "eegpass/wire.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <memory>

#include "eegpass/error.hpp"

namespace eegpass::wire {

Record parse_record(std::string_view line, std::initializer_list<std::string_view> types,
                    std::initializer_list<std::string_view> fields) {
  Record record;
  try {
    record = Record::parse(line);
  } catch (const Record::exception&) {
    fail(Errc::parse, "record is not valid JSON");
  }
  if (!record.is_object()) fail(Errc::parse, "record is not an object");
  auto type = record.find("type");
  if (type == record.end() || !type->is_string()) fail(Errc::parse, "record has no type");
  const auto name = type->get<std::string>();
  if (std::find(types.begin(), types.end(), name) == types.end())
    fail(Errc::parse, "unexpected record type " + name);
  for (const auto& [key, value] : record.items()) {
    if (key == "type") continue;
    if (std::find(fields.begin(), fields.end(), key) == fields.end())
      fail(Errc::parse, "unexpected field " + key);
  }
  return record;
}

std::string to_line(const Record& record) { return record.dump(); }

Endpoint Endpoint::parse(std::string_view text) {
  Endpoint out;
  auto colon = text.rfind(':');
  std::string_view port = text;
  if (colon != std::string_view::npos) {
    if (colon > 0) out.host = std::string(text.substr(0, colon));
    port = text.substr(colon + 1);
  }
  int value = 0;
  if (port.empty()) fail(Errc::parse, "endpoint has no port");
  for (char c : port) {
    if (c < '0' || c > '9') fail(Errc::parse, "endpoint port is not numeric");
    value = value * 10 + (c - '0');
    if (value > 65535) fail(Errc::parse, "endpoint port out of range");
  }
  out.port = static_cast<std::uint16_t>(value);
  return out;
}

std::string Endpoint::to_string() const { return host + ":" + std::to_string(port); }

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = std::exchange(other.fd_, -1);
  }
  return *this;
}

Socket::~Socket() {
  if (fd_ >= 0) ::close(fd_);
}

void Socket::shutdown() noexcept {
  if (fd_ >= 0) ::shutdown(fd_, SHUT_RDWR);
}

namespace {

[[noreturn]] void transport_error(const std::string& what) {
  fail(Errc::transport, what + ": " + std::strerror(errno));
}

bool wait_for(int fd, short events, int timeout_ms) {
  pollfd p{fd, events, 0};
  for (;;) {
    const int rc = ::poll(&p, 1, timeout_ms);
    if (rc < 0 && errno == EINTR) continue;
    if (rc < 0) transport_error("poll");
    return rc > 0;
  }
}

}  // namespace

std::optional<std::string> LineConnection::read_line(int timeout_ms) {
  for (;;) {
    if (auto nl = buffer_.find('\n'); nl != std::string::npos) {
      auto line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      return line;
    }
    if (buffer_.size() > kMaxLineBytes) fail(Errc::transport, "record exceeds 1 MiB");
    if (!wait_for(socket_.fd(), POLLIN, timeout_ms)) fail(Errc::transport, "read timed out");
    char chunk[4096];
    const auto n = ::recv(socket_.fd(), chunk, sizeof chunk, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n < 0) transport_error("recv");
    if (n == 0) {
      if (buffer_.empty()) return std::nullopt;
      fail(Errc::transport, "connection closed mid-record");
    }
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

bool LineConnection::poll(int timeout_ms) {
  if (buffer_.find('\n') != std::string::npos) return true;
  return wait_for(socket_.fd(), POLLIN, timeout_ms);
}

void LineConnection::write_line(std::string_view line) {
  std::string data(line);
  data += '\n';
  std::size_t sent = 0;
  while (sent < data.size()) {
    const auto n = ::send(socket_.fd(), data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (n < 0 && errno == EINTR) continue;
    if (n < 0) transport_error("send");
    sent += static_cast<std::size_t>(n);
  }
}

LineConnection connect(const Endpoint& endpoint, int timeout_ms) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* result = nullptr;
  const auto port = std::to_string(endpoint.port);
  if (::getaddrinfo(endpoint.host.c_str(), port.c_str(), &hints, &result) != 0 || !result)
    fail(Errc::transport, "cannot resolve " + endpoint.to_string());
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(result, ::freeaddrinfo);

  for (auto* ai = result; ai; ai = ai->ai_next) {
    Socket sock(::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol));
    if (!sock.valid()) continue;
    const int flags = ::fcntl(sock.fd(), F_GETFL);
    ::fcntl(sock.fd(), F_SETFL, flags | O_NONBLOCK);
    int rc = ::connect(sock.fd(), ai->ai_addr, ai->ai_addrlen);
    if (rc < 0 && errno == EINPROGRESS) {
      if (!wait_for(sock.fd(), POLLOUT, timeout_ms)) continue;
      int err = 0;
      socklen_t len = sizeof err;
      ::getsockopt(sock.fd(), SOL_SOCKET, SO_ERROR, &err, &len);
      rc = err == 0 ? 0 : -1;
    }
    if (rc != 0) continue;
    ::fcntl(sock.fd(), F_SETFL, flags);
    int one = 1;
    ::setsockopt(sock.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    return LineConnection(std::move(sock));
  }
  fail(Errc::transport, "cannot connect to " + endpoint.to_string());
}

Listener::Listener(const std::string& host, std::uint16_t port) {
  socket_ = Socket(::socket(AF_INET, SOCK_STREAM, 0));
  if (!socket_.valid()) transport_error("socket");
  int one = 1;
  ::setsockopt(socket_.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
    fail(Errc::transport, "listen address must be IPv4: " + host);
  if (::bind(socket_.fd(), reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0)
    transport_error("bind " + host + ":" + std::to_string(port));
  if (::listen(socket_.fd(), 64) != 0) transport_error("listen");
  socklen_t len = sizeof addr;
  ::getsockname(socket_.fd(), reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

std::optional<Socket> Listener::accept(int timeout_ms) {
  if (!wait_for(socket_.fd(), POLLIN, timeout_ms)) return std::nullopt;
  Socket client(::accept(socket_.fd(), nullptr, nullptr));
  if (!client.valid()) {
    if (errno == EINTR || errno == ECONNABORTED) return std::nullopt;
    transport_error("accept");
  }
  int one = 1;
  ::setsockopt(client.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return client;
}

}  // namespace eegpass::wire

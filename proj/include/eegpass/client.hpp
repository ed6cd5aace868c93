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

// Workstation side: collects keystrokes and signal samples, turns them into
// HPF candidates under the workstation key and talks to the server.

#include <cstdint>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "eegpass/crypto.hpp"
#include "eegpass/segmentation.hpp"
#include "eegpass/server.hpp"
#include "eegpass/wire.hpp"

namespace eegpass {

enum class SessionState { collecting, submitted, done };

/// Latest raw sample and its quantized levels, for display.
struct DisplayLevels {
  std::optional<SignalSample> sample;
  std::optional<StateLevel> att;
  std::optional<StateLevel> rel;
};

/// One login attempt. Feeding and keying may come from different threads;
/// every method locks the session.
class AuthSession {
public:
  AuthSession(std::string user_id, SecretKey key, ModeSpec mode,
              QuantizerConfig cfg = {}, Clock clock = system_clock_ms);

  void feed(const SignalSample& sample);
  void key(const KeyEvent& event);

  DisplayLevels levels() const;
  std::size_t typed() const;
  SessionState state() const;

  /// HOTP counter used by finish(); ignored in other modes.
  void set_counter(std::uint64_t counter);
  std::uint64_t counter() const;

  /// Annotates, segments (up to 16 candidates) and hashes. Moves the session
  /// to Submitted. Throws Errc::signal_gap, Errc::input for an empty session
  /// and Errc::template_too_fragmented when the raw segmentation has more
  /// than 6 pels.
  std::vector<Hpf> finish();

  /// Records the server decision; Done is terminal.
  void complete(bool accepted);
  std::optional<bool> result() const;

  const std::string& user_id() const noexcept { return user_id_; }
  const ModeSpec& mode() const noexcept { return mode_; }
  const std::vector<Hpf>& candidates() const noexcept { return candidates_; }

private:
  std::string user_id_;
  SecretKey key_;
  ModeSpec mode_;
  QuantizerConfig cfg_;
  Clock clock_;

  mutable std::mutex mutex_;
  std::vector<SignalSample> samples_;
  std::vector<KeyEvent> keys_;
  std::optional<StateLevel> display_att_;
  std::optional<StateLevel> display_rel_;
  SessionState state_ = SessionState::collecting;
  std::uint64_t counter_ = 0;
  std::vector<Hpf> candidates_;
  std::optional<bool> result_;
};

/// HPF for one concrete pel sequence under the session's mode.
Hpf compute_hpf(const SecretKey& key, std::span<const ObservedPel> pels, const ModeSpec& mode,
                std::uint64_t counter, std::int64_t unix_time_s);

/// Per-user HOTP counters kept beside the key file.
class CounterFile {
public:
  explicit CounterFile(std::filesystem::path path) : path_(std::move(path)) {}

  /// `<key-file>.counter`
  static CounterFile beside(const std::filesystem::path& key_file);

  std::uint64_t get(const std::string& user_id) const;
  void set(const std::string& user_id, std::uint64_t counter);

  const std::filesystem::path& path() const noexcept { return path_; }

private:
  std::filesystem::path path_;
};

struct ClientIdentity {
  std::string client_id;
  SecretKey key;
};

/// Loads a single-credential key file.
ClientIdentity load_identity(const std::filesystem::path& key_file);

/// Exchanges one record; Errc::transport on connection problems.
wire::Record exchange(const wire::Endpoint& endpoint, const wire::Record& request);

/// Hello: asks the server which mode the user is enrolled in.
ModeSpec fetch_mode(const wire::Endpoint& endpoint, const std::string& client_id,
                    const std::string& user_id);

/// Sends the finished session's candidates. On Accept in HOTP mode the
/// counter file (if given) advances past the session counter. Transport
/// problems surface as Error(Errc::transport), never as a Reject.
AuthResult run_protocol(const wire::Endpoint& endpoint, AuthSession& session,
                        const std::string& client_id, CounterFile* counters = nullptr);

RejectReason parse_reason(std::string_view text);

/// Client-side enrolment over the wire: the template never leaves the
/// workstation, only per-pel HP variants do. Returns the session id.
std::string enroll_remote(const wire::Endpoint& endpoint, const ClientIdentity& identity,
                          const std::string& user_id, const ModeSpec& mode,
                          const PelTemplate& tpl);

struct ConfirmReply {
  bool accepted = false;
  std::string status;  // "active", "aborted" or "pending linear=.. permuted=.."
};

ConfirmReply confirm_remote(const wire::Endpoint& endpoint, const std::string& session,
                            std::span<const Hpf> candidates, OrderKind kind);

}  // namespace eegpass

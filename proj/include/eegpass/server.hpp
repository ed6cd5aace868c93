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

// Central authentication service: enrolment with 2 linear + 2 permuted
// confirmations, verification in static, HOTP and TOTP modes, counter
// resynchronisation and failure throttling.

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <variant>
#include <vector>

#include "eegpass/crypto.hpp"
#include "eegpass/model.hpp"

namespace eegpass {

enum class AuthMode { static_pool, hotp, totp };
enum class RecordStatus { pending_verification, active };
enum class OrderKind { linear, permuted };

/// Mode plus the OTP parameters a client needs to compute matching codes.
struct ModeSpec {
  AuthMode mode = AuthMode::static_pool;
  OtpParams otp;

  friend bool operator==(const ModeSpec&, const ModeSpec&) = default;
};

/// "static", "hotp" or "totp", optionally followed by ':' and comma-separated
/// key=value pairs (digits, hash, lookahead, step, skew).
ModeSpec parse_mode(std::string_view text);
std::string format_mode(const ModeSpec& spec);

std::string_view to_string(OrderKind kind) noexcept;
OrderKind parse_order_kind(std::string_view text);

struct VerificationProgress {
  int linear = 0;
  int permuted = 0;
  int consecutive_failures = 0;

  friend bool operator==(const VerificationProgress&, const VerificationProgress&) = default;
};

struct UserRecord {
  std::string user_id;
  std::string client_id;  // workstation whose key produced the stored values
  ModeSpec mode;
  HpfPool pool;                                  // static mode only
  std::vector<std::vector<Hp>> pel_hp_variants;  // OTP modes only
  std::uint64_t counter = 0;                     // HOTP
  std::optional<std::uint64_t> last_time_step;   // TOTP
  std::deque<std::string> accepted_codes;        // recent OTP codes, newest last
  RecordStatus status = RecordStatus::pending_verification;
  VerificationProgress progress;
  std::string enrolment_session;  // empty once active

  friend bool operator==(const UserRecord&, const UserRecord&) = default;
};

struct ClientCredential {
  std::string client_id;
  SecretKey key;
};

/// Per-pel HP variant lists sent by a client that enrolled locally.
using HpVariants = std::vector<std::vector<Hp>>;
using EnrolmentData = std::variant<PelTemplate, HpVariants>;

enum class RejectReason { none, rejected, unknown_principal, throttled, bad_request };
std::string_view to_string(RejectReason reason) noexcept;

struct AuthResult {
  bool ok = false;
  RejectReason reason = RejectReason::rejected;

  static AuthResult accept() { return {true, RejectReason::none}; }
  static AuthResult reject(RejectReason r) { return {false, r}; }
};

struct EnrolmentProgress {
  int linear = 0;
  int permuted = 0;
  bool active = false;
  bool accepted = false;  // the last confirmation verified
  bool aborted = false;
};

struct ServerConfig {
  std::size_t max_failures = 5;          // within failure_window_ms
  std::int64_t failure_window_ms = 60000;
  int max_confirm_failures = 5;          // consecutive, aborts enrolment
  std::size_t max_candidates = 16;
  std::size_t code_history = 1024;       // accepted OTP codes remembered per user
  int confirmations_each = 2;
};

/// Unix time in milliseconds.
using Clock = std::function<std::int64_t()>;
std::int64_t system_clock_ms();

/// Everything the store persists.
struct ServerState {
  std::map<std::string, UserRecord> users;
  std::vector<std::string> client_ids;

  friend bool operator==(const ServerState&, const ServerState&) = default;
};

class AuthServer {
public:
  explicit AuthServer(ServerConfig config = {}, Clock clock = system_clock_ms);

  void provision(ClientCredential credential);
  bool has_client(const std::string& client_id) const;

  /// With data: computes the pool (static) or stores the variants (OTP) and
  /// returns a session awaiting confirmation. Without data: the session
  /// waits for enroll_data.
  std::string enroll_begin(const std::string& client_id, const std::string& user_id,
                           const ModeSpec& mode, std::optional<EnrolmentData> data);
  void enroll_data(const std::string& session, HpVariants variants);
  EnrolmentProgress enroll_confirm(const std::string& session, std::span<const Hpf> candidates,
                                   OrderKind kind);
  EnrolmentProgress enrolment_progress(const std::string& session) const;

  AuthResult authenticate(const std::string& client_id, const std::string& user_id,
                          std::span<const Hpf> candidates,
                          std::optional<std::uint64_t> counter_hint = std::nullopt);

  /// Mode of an enrolled user, for the client hello.
  std::optional<ModeSpec> mode_of(const std::string& user_id) const;
  std::optional<UserRecord> user(const std::string& user_id) const;

  ServerState state() const;
  void restore(ServerState state);
  std::vector<ClientCredential> credentials() const;

  const ServerConfig& config() const noexcept { return config_; }

private:
  struct AwaitingData {
    std::string client_id;
    std::string user_id;
    ModeSpec mode;
  };

  UserRecord build_record(const std::string& client_id, const std::string& user_id,
                          const ModeSpec& mode, EnrolmentData data) const;
  bool verify(UserRecord& record, const SecretKey& key, std::span<const Hpf> candidates,
              std::optional<std::uint64_t> counter_hint);
  UserRecord* find_session(const std::string& session);
  const UserRecord* find_session(const std::string& session) const;
  const SecretKey* key_of(const std::string& client_id) const;

  ServerConfig config_;
  Clock clock_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, SecretKey> clients_;
  std::map<std::string, UserRecord> users_;
  std::map<std::string, AwaitingData> awaiting_;
  std::map<std::string, std::deque<std::int64_t>> failures_;
};

}  // namespace eegpass

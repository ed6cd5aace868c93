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

#include "eegpass/server.hpp"

#include <openssl/rand.h>

#include <chrono>
#include <mutex>
#include <sstream>

#include "eegpass/error.hpp"

namespace eegpass {

std::int64_t system_clock_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

std::string_view to_string(OrderKind kind) noexcept {
  return kind == OrderKind::linear ? "linear" : "permuted";
}

OrderKind parse_order_kind(std::string_view text) {
  if (text == "linear") return OrderKind::linear;
  if (text == "permuted") return OrderKind::permuted;
  fail(Errc::parse, "order_kind must be linear or permuted");
}

std::string_view to_string(RejectReason reason) noexcept {
  switch (reason) {
    case RejectReason::none: return "ok";
    case RejectReason::rejected: return "rejected";
    case RejectReason::unknown_principal: return "unknown-principal";
    case RejectReason::throttled: return "throttled";
    case RejectReason::bad_request: return "bad-request";
  }
  return "rejected";
}

ModeSpec parse_mode(std::string_view text) {
  ModeSpec spec;
  const auto colon = text.find(':');
  const auto name = text.substr(0, colon);
  if (name == "static")
    spec.mode = AuthMode::static_pool;
  else if (name == "hotp")
    spec.mode = AuthMode::hotp;
  else if (name == "totp")
    spec.mode = AuthMode::totp;
  else
    fail(Errc::parse, "mode must be static, hotp or totp");
  spec.otp.mode = spec.mode == AuthMode::totp ? OtpMode::totp : OtpMode::hotp;
  if (colon == std::string_view::npos) return spec;

  std::stringstream params{std::string(text.substr(colon + 1))};
  std::string item;
  while (std::getline(params, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) fail(Errc::parse, "mode parameter without '='");
    const auto key = item.substr(0, eq);
    const auto value = item.substr(eq + 1);
    auto number = [&] {
      try {
        std::size_t used = 0;
        const int v = std::stoi(value, &used);
        if (used != value.size()) throw std::invalid_argument(value);
        return v;
      } catch (const std::exception&) {
        fail(Errc::parse, "mode parameter " + key + " is not an integer");
      }
    };
    if (key == "digits")
      spec.otp.digits = number();
    else if (key == "lookahead")
      spec.otp.look_ahead = number();
    else if (key == "step")
      spec.otp.time_step = number();
    else if (key == "skew")
      spec.otp.skew_steps = number();
    else if (key == "hash" && (value == "sha256" || value == "sha1"))
      spec.otp.hash = value == "sha1" ? HashAlg::sha1 : HashAlg::sha256;
    else
      fail(Errc::parse, "unknown mode parameter " + item);
  }
  spec.otp.validate();
  return spec;
}

std::string format_mode(const ModeSpec& spec) {
  const auto& p = spec.otp;
  const std::string hash = p.hash == HashAlg::sha1 ? "sha1" : "sha256";
  switch (spec.mode) {
    case AuthMode::static_pool:
      return "static";
    case AuthMode::hotp:
      return "hotp:digits=" + std::to_string(p.digits) + ",hash=" + hash +
             ",lookahead=" + std::to_string(p.look_ahead);
    case AuthMode::totp:
      return "totp:digits=" + std::to_string(p.digits) + ",hash=" + hash +
             ",step=" + std::to_string(p.time_step) + ",skew=" + std::to_string(p.skew_steps);
  }
  return "static";
}

namespace {

std::string new_session_id() {
  std::array<std::uint8_t, 16> raw{};
  if (RAND_bytes(raw.data(), static_cast<int>(raw.size())) != 1)
    fail(Errc::state, "system random generator failed");
  return to_hex(raw);
}

// Scans every pool entry for every candidate without early exit.
bool pool_contains(const HpfPool& pool, std::span<const Hpf> candidates) {
  bool found = false;
  for (const auto& candidate : candidates) {
    const auto* value = std::get_if<StaticHpf>(&candidate);
    if (!value) continue;
    for (const auto& entry : pool) found |= ct_equal(entry.value, value->value);
  }
  return found;
}

// The candidate matching one of `codes` and not remembered as used, if any.
std::optional<std::string> match_code(const std::vector<OtpCode>& codes,
                                      std::span<const Hpf> candidates,
                                      const std::deque<std::string>& used) {
  std::optional<std::string> hit;
  for (const auto& candidate : candidates) {
    const auto* code = std::get_if<OtpCode>(&candidate);
    if (!code) continue;
    bool match = false;
    for (const auto& expected : codes) match |= ct_equal(expected.digits, code->digits);
    if (!match) continue;
    bool replay = false;
    for (const auto& old : used) replay |= ct_equal(old, code->digits);
    if (!replay && !hit) hit = code->digits;
  }
  return hit;
}

std::vector<OtpCode> codes_at(const SecretKey& key, std::uint64_t counter,
                              const HpVariants& variants, const OtpParams& params) {
  std::vector<OtpCode> codes;
  for_each_arrangement(std::span<const std::vector<Hp>>(variants),
                       [&](std::span<const Hp> seq) {
                         codes.push_back(hpf_otp(key, counter, seq, params));
                       });
  return codes;
}

}  // namespace

AuthServer::AuthServer(ServerConfig config, Clock clock)
    : config_(config), clock_(std::move(clock)) {}

void AuthServer::provision(ClientCredential credential) {
  std::unique_lock lock(mutex_);
  if (credential.client_id.empty()) fail(Errc::input, "client id is empty");
  clients_.insert_or_assign(credential.client_id, credential.key);
}

bool AuthServer::has_client(const std::string& client_id) const {
  std::shared_lock lock(mutex_);
  return clients_.contains(client_id);
}

const SecretKey* AuthServer::key_of(const std::string& client_id) const {
  auto it = clients_.find(client_id);
  return it == clients_.end() ? nullptr : &it->second;
}

UserRecord AuthServer::build_record(const std::string& client_id, const std::string& user_id,
                                    const ModeSpec& mode, EnrolmentData data) const {
  const SecretKey* key = key_of(client_id);
  if (!key) fail(Errc::unknown_principal, "unknown client " + client_id);
  mode.otp.validate();

  HpVariants variants;
  if (const auto* tpl = std::get_if<PelTemplate>(&data)) {
    // fail early on oversize templates before hashing anything
    if (mode.mode == AuthMode::static_pool) (void)expand_wildcards(*tpl);
    variants = hp_variants(*key, *tpl);
  } else {
    variants = std::move(std::get<HpVariants>(data));
  }
  if (variants.empty() || variants.size() > kMaxPels)
    fail(Errc::input, "enrolment needs 1..6 pel positions");
  for (const auto& v : variants)
    if (v.empty() || v.size() > 25) fail(Errc::input, "each pel needs 1..25 HP variants");
  if (arrangement_count(variants) > kMaxPoolSize)
    fail(Errc::pool_too_large, "HPF pool would exceed 10^5 entries");

  UserRecord record;
  record.user_id = user_id;
  record.client_id = client_id;
  record.mode = mode;
  if (mode.mode == AuthMode::static_pool)
    record.pool = hpf_pool(*key, variants);
  else
    record.pel_hp_variants = std::move(variants);
  return record;
}

std::string AuthServer::enroll_begin(const std::string& client_id, const std::string& user_id,
                                     const ModeSpec& mode, std::optional<EnrolmentData> data) {
  if (user_id.empty()) fail(Errc::input, "user id is empty");
  std::unique_lock lock(mutex_);
  if (!clients_.contains(client_id)) fail(Errc::unknown_principal, "unknown client " + client_id);
  if (auto it = users_.find(user_id); it != users_.end() && it->second.status == RecordStatus::active)
    fail(Errc::state, "user is already active");

  auto session = new_session_id();
  if (!data) {
    awaiting_[session] = AwaitingData{client_id, user_id, mode};
    return session;
  }
  auto record = build_record(client_id, user_id, mode, std::move(*data));
  record.enrolment_session = session;
  users_.insert_or_assign(user_id, std::move(record));
  return session;
}

void AuthServer::enroll_data(const std::string& session, HpVariants variants) {
  std::unique_lock lock(mutex_);
  auto it = awaiting_.find(session);
  if (it == awaiting_.end()) fail(Errc::state, "unknown enrolment session");
  const auto pending = it->second;
  if (auto u = users_.find(pending.user_id);
      u != users_.end() && u->second.status == RecordStatus::active)
    fail(Errc::state, "user is already active");
  auto record = build_record(pending.client_id, pending.user_id, pending.mode, std::move(variants));
  record.enrolment_session = session;
  awaiting_.erase(it);
  users_.insert_or_assign(pending.user_id, std::move(record));
}

UserRecord* AuthServer::find_session(const std::string& session) {
  if (session.empty()) return nullptr;
  for (auto& [id, record] : users_)
    if (record.enrolment_session == session) return &record;
  return nullptr;
}

const UserRecord* AuthServer::find_session(const std::string& session) const {
  return const_cast<AuthServer*>(this)->find_session(session);
}

bool AuthServer::verify(UserRecord& record, const SecretKey& key, std::span<const Hpf> candidates,
                        std::optional<std::uint64_t> counter_hint) {
  const auto& params = record.mode.otp;
  auto remember = [&](const std::string& code) {
    record.accepted_codes.push_back(code);
    while (record.accepted_codes.size() > config_.code_history) record.accepted_codes.pop_front();
  };

  switch (record.mode.mode) {
    case AuthMode::static_pool:
      return pool_contains(record.pool, candidates);

    case AuthMode::hotp: {
      std::vector<std::uint64_t> window;
      const auto last = record.counter + static_cast<std::uint64_t>(params.look_ahead);
      if (counter_hint && *counter_hint >= record.counter && *counter_hint <= last)
        window.push_back(*counter_hint);
      for (auto c = record.counter; c <= last; ++c)
        if (!counter_hint || c != *counter_hint) window.push_back(c);
      for (auto c : window) {
        const auto codes = codes_at(key, c, record.pel_hp_variants, params);
        if (auto hit = match_code(codes, candidates, record.accepted_codes)) {
          record.counter = c + 1;
          remember(*hit);
          return true;
        }
      }
      return false;
    }

    case AuthMode::totp: {
      // Confirmations arrive faster than one per step, so replay tracking
      // starts once the record is active.
      const bool confirming = record.status == RecordStatus::pending_verification;
      static const std::deque<std::string> none;
      const auto now_step = totp_counter(clock_() / 1000, params);
      const auto skew = static_cast<std::uint64_t>(params.skew_steps);
      const auto first = now_step >= skew ? now_step - skew : 0;
      for (auto step = first; step <= now_step + skew; ++step) {
        if (!confirming && record.last_time_step && step <= *record.last_time_step) continue;
        const auto codes = codes_at(key, step, record.pel_hp_variants, params);
        if (auto hit = match_code(codes, candidates, confirming ? none : record.accepted_codes)) {
          if (!confirming) {
            record.last_time_step = step;
            remember(*hit);
          }
          return true;
        }
      }
      return false;
    }
  }
  return false;
}

EnrolmentProgress AuthServer::enroll_confirm(const std::string& session,
                                             std::span<const Hpf> candidates, OrderKind kind) {
  std::unique_lock lock(mutex_);
  UserRecord* record = find_session(session);
  if (!record) fail(Errc::state, "unknown enrolment session");
  if (record->status != RecordStatus::pending_verification)
    fail(Errc::state, "enrolment already confirmed");
  if (candidates.empty() || candidates.size() > config_.max_candidates)
    fail(Errc::input, "confirmation needs 1..16 candidates");
  const SecretKey* key = key_of(record->client_id);
  if (!key) fail(Errc::unknown_principal, "enrolling client is no longer provisioned");

  EnrolmentProgress out;
  auto& progress = record->progress;
  if (verify(*record, *key, candidates, std::nullopt)) {
    out.accepted = true;
    progress.consecutive_failures = 0;
    ++(kind == OrderKind::linear ? progress.linear : progress.permuted);
    if (progress.linear >= config_.confirmations_each &&
        progress.permuted >= config_.confirmations_each) {
      record->status = RecordStatus::active;
      record->enrolment_session.clear();
      out.active = true;
    }
  } else if (++progress.consecutive_failures >= config_.max_confirm_failures) {
    out.aborted = true;
    users_.erase(record->user_id);
    return out;
  }
  out.linear = progress.linear;
  out.permuted = progress.permuted;
  return out;
}

EnrolmentProgress AuthServer::enrolment_progress(const std::string& session) const {
  std::shared_lock lock(mutex_);
  const UserRecord* record = find_session(session);
  if (!record) fail(Errc::state, "unknown enrolment session");
  return {record->progress.linear, record->progress.permuted, false, false, false};
}

AuthResult AuthServer::authenticate(const std::string& client_id, const std::string& user_id,
                                    std::span<const Hpf> candidates,
                                    std::optional<std::uint64_t> counter_hint) {
  std::unique_lock lock(mutex_);
  const SecretKey* key = key_of(client_id);
  auto it = users_.find(user_id);
  if (!key || it == users_.end()) return AuthResult::reject(RejectReason::unknown_principal);
  if (candidates.empty() || candidates.size() > config_.max_candidates)
    return AuthResult::reject(RejectReason::bad_request);

  const auto now = clock_();
  auto& failures = failures_[user_id];
  while (!failures.empty() && now - failures.front() >= config_.failure_window_ms)
    failures.pop_front();
  if (failures.size() >= config_.max_failures) return AuthResult::reject(RejectReason::throttled);

  auto& record = it->second;
  if (record.status == RecordStatus::active && verify(record, *key, candidates, counter_hint))
    return AuthResult::accept();
  failures.push_back(now);
  return AuthResult::reject(RejectReason::rejected);
}

std::optional<ModeSpec> AuthServer::mode_of(const std::string& user_id) const {
  std::shared_lock lock(mutex_);
  auto it = users_.find(user_id);
  if (it == users_.end()) return std::nullopt;
  return it->second.mode;
}

std::optional<UserRecord> AuthServer::user(const std::string& user_id) const {
  std::shared_lock lock(mutex_);
  auto it = users_.find(user_id);
  if (it == users_.end()) return std::nullopt;
  return it->second;
}

ServerState AuthServer::state() const {
  std::shared_lock lock(mutex_);
  ServerState out;
  out.users = users_;
  for (const auto& [id, key] : clients_) out.client_ids.push_back(id);
  return out;
}

void AuthServer::restore(ServerState state) {
  std::unique_lock lock(mutex_);
  for (const auto& id : state.client_ids)
    if (!clients_.contains(id))
      fail(Errc::input, "store references client " + id + " with no key");
  users_ = std::move(state.users);
  awaiting_.clear();
  failures_.clear();
}

std::vector<ClientCredential> AuthServer::credentials() const {
  std::shared_lock lock(mutex_);
  std::vector<ClientCredential> out;
  for (const auto& [id, key] : clients_) out.push_back({id, key});
  return out;
}

}  // namespace eegpass

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

#include "eegpass/client.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "eegpass/error.hpp"
#include "eegpass/store.hpp"
#include "eegpass/utf8.hpp"

namespace eegpass {

AuthSession::AuthSession(std::string user_id, SecretKey key, ModeSpec mode, QuantizerConfig cfg,
                         Clock clock)
    : user_id_(std::move(user_id)),
      key_(std::move(key)),
      mode_(mode),
      cfg_(cfg),
      clock_(std::move(clock)) {
  cfg_.validate();
  mode_.otp.validate();
}

void AuthSession::feed(const SignalSample& sample) {
  std::lock_guard lock(mutex_);
  if (state_ != SessionState::collecting) fail(Errc::state, "session no longer collecting");
  validate(sample);
  if (!samples_.empty() && sample.t_ms <= samples_.back().t_ms)
    fail(Errc::input, "sample timestamps must increase");
  display_att_ = quantize(sample.attention, display_att_, cfg_);
  display_rel_ = quantize(sample.meditation, display_rel_, cfg_);
  samples_.push_back(sample);
}

void AuthSession::key(const KeyEvent& event) {
  std::lock_guard lock(mutex_);
  if (state_ != SessionState::collecting) fail(Errc::state, "session no longer collecting");
  if (!utf8::is_single_code_point(event.ch))
    fail(Errc::input, "key event must carry exactly one code point");
  if (!keys_.empty() && event.t_ms <= keys_.back().t_ms)
    fail(Errc::input, "key timestamps must increase");
  keys_.push_back(event);
}

DisplayLevels AuthSession::levels() const {
  std::lock_guard lock(mutex_);
  DisplayLevels out;
  if (!samples_.empty()) out.sample = samples_.back();
  out.att = display_att_;
  out.rel = display_rel_;
  return out;
}

std::size_t AuthSession::typed() const {
  std::lock_guard lock(mutex_);
  return keys_.size();
}

SessionState AuthSession::state() const {
  std::lock_guard lock(mutex_);
  return state_;
}

void AuthSession::set_counter(std::uint64_t counter) {
  std::lock_guard lock(mutex_);
  counter_ = counter;
}

std::uint64_t AuthSession::counter() const {
  std::lock_guard lock(mutex_);
  return counter_;
}

Hpf compute_hpf(const SecretKey& key, std::span<const ObservedPel> pels, const ModeSpec& mode,
                std::uint64_t counter, std::int64_t unix_time_s) {
  std::vector<Hp> hps;
  hps.reserve(pels.size());
  for (const auto& pel : pels) hps.push_back(hp(key, pel));
  switch (mode.mode) {
    case AuthMode::static_pool:
      return hpf_static(key, hps);
    case AuthMode::hotp:
      return hpf_otp(key, counter, hps, mode.otp);
    case AuthMode::totp:
      return hpf_otp(key, totp_counter(unix_time_s, mode.otp), hps, mode.otp);
  }
  fail(Errc::state, "unknown mode");
}

std::vector<Hpf> AuthSession::finish() {
  std::lock_guard lock(mutex_);
  if (state_ != SessionState::collecting) fail(Errc::state, "session already finished");
  if (keys_.empty()) fail(Errc::input, "no keystrokes entered");

  const auto chars = annotate(keys_, samples_, cfg_);
  const auto segmentations = candidate_segmentations(chars, kDefaultMaxCandidates, cfg_);
  if (segmentations.front().size() > kMaxPels)
    fail(Errc::template_too_fragmented,
         "entry splits into " + std::to_string(segmentations.front().size()) + " pels");

  const auto now_s = clock_() / 1000;
  std::vector<Hpf> out;
  for (const auto& pels : segmentations) {
    if (pels.size() > kMaxPels) continue;
    auto hpf = compute_hpf(key_, pels, mode_, counter_, now_s);
    if (std::find(out.begin(), out.end(), hpf) == out.end()) out.push_back(std::move(hpf));
  }
  candidates_ = out;
  state_ = SessionState::submitted;
  return out;
}

void AuthSession::complete(bool accepted) {
  std::lock_guard lock(mutex_);
  if (state_ != SessionState::submitted) fail(Errc::state, "session was not submitted");
  state_ = SessionState::done;
  result_ = accepted;
}

std::optional<bool> AuthSession::result() const {
  std::lock_guard lock(mutex_);
  return result_;
}

CounterFile CounterFile::beside(const std::filesystem::path& key_file) {
  auto path = key_file;
  path += ".counter";
  return CounterFile(std::move(path));
}

std::uint64_t CounterFile::get(const std::string& user_id) const {
  std::ifstream in(path_);
  if (!in) return 0;
  try {
    const auto doc = nlohmann::json::parse(in);
    if (auto it = doc.find(user_id); it != doc.end()) return it->get<std::uint64_t>();
  } catch (const nlohmann::json::exception&) {
    fail(Errc::corrupt_file, "counter file " + path_.string() + " is corrupt");
  }
  return 0;
}

void CounterFile::set(const std::string& user_id, std::uint64_t counter) {
  nlohmann::json doc = nlohmann::json::object();
  if (std::ifstream in(path_); in) {
    try {
      doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception&) {
      fail(Errc::corrupt_file, "counter file " + path_.string() + " is corrupt");
    }
  }
  doc[user_id] = counter;
  auto tmp = path_;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) fail(Errc::io, "cannot write " + tmp.string());
    out << doc.dump() << '\n';
  }
  std::filesystem::rename(tmp, path_);
}

ClientIdentity load_identity(const std::filesystem::path& key_file) {
  auto creds = load_key_file(key_file);
  if (creds.size() != 1)
    fail(Errc::input, "client key file must hold exactly one credential");
  return {std::move(creds.front().client_id), std::move(creds.front().key)};
}

wire::Record exchange(const wire::Endpoint& endpoint, const wire::Record& request) {
  auto conn = wire::connect(endpoint);
  conn.send(request);
  auto line = conn.read_line(10000);
  if (!line) fail(Errc::transport, "server closed the connection");
  wire::Record reply;
  try {
    reply = wire::parse_record(*line, {"RESULT", "ERROR"},
                               {"ok", "reason", "session", "mode"});
  } catch (const Error& e) {
    fail(Errc::transport, std::string("malformed server reply: ") + e.what());
  }
  return reply;
}

namespace {

std::string reply_reason(const wire::Record& reply) {
  auto it = reply.find("reason");
  return it != reply.end() && it->is_string() ? it->get<std::string>() : "";
}

bool reply_ok(const wire::Record& reply) {
  auto it = reply.find("ok");
  return reply["type"] == "RESULT" && it != reply.end() && it->is_boolean() && it->get<bool>();
}

}  // namespace

RejectReason parse_reason(std::string_view text) {
  if (text == "ok") return RejectReason::none;
  if (text == "unknown-principal") return RejectReason::unknown_principal;
  if (text == "throttled") return RejectReason::throttled;
  if (text == "bad-request") return RejectReason::bad_request;
  return RejectReason::rejected;
}

ModeSpec fetch_mode(const wire::Endpoint& endpoint, const std::string& client_id,
                    const std::string& user_id) {
  const auto reply = exchange(
      endpoint, {{"type", "AUTH"}, {"client_id", client_id}, {"user_id", user_id}});
  if (!reply_ok(reply) || !reply.contains("mode"))
    fail(Errc::unknown_principal, "server does not know user " + user_id);
  return parse_mode(reply["mode"].get<std::string>());
}

AuthResult run_protocol(const wire::Endpoint& endpoint, AuthSession& session,
                        const std::string& client_id, CounterFile* counters) {
  if (session.state() != SessionState::submitted)
    fail(Errc::state, "session must be finished before submission");
  nlohmann::json candidates = nlohmann::json::array();
  for (const auto& c : session.candidates()) candidates.push_back(to_wire(c));
  const auto reply = exchange(endpoint, {{"type", "AUTH"},
                                         {"client_id", client_id},
                                         {"user_id", session.user_id()},
                                         {"hpf_candidates", std::move(candidates)}});
  if (reply["type"] == "ERROR") {
    session.complete(false);
    return AuthResult::reject(RejectReason::bad_request);
  }
  const bool ok = reply_ok(reply);
  session.complete(ok);
  if (ok && counters && session.mode().mode == AuthMode::hotp)
    counters->set(session.user_id(), session.counter() + 1);
  return ok ? AuthResult::accept() : AuthResult::reject(parse_reason(reply_reason(reply)));
}

std::string enroll_remote(const wire::Endpoint& endpoint, const ClientIdentity& identity,
                          const std::string& user_id, const ModeSpec& mode,
                          const PelTemplate& tpl) {
  const auto begin = exchange(endpoint, {{"type", "ENROLL_BEGIN"},
                                         {"client_id", identity.client_id},
                                         {"user_id", user_id},
                                         {"mode", format_mode(mode)}});
  if (!reply_ok(begin) || !begin.contains("session"))
    fail(Errc::state, "enrolment refused: " + reply_reason(begin));
  const auto session = begin["session"].get<std::string>();

  nlohmann::json lists = nlohmann::json::array();
  for (const auto& position : hp_variants(identity.key, tpl)) {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& h : position) list.push_back(to_hex(h.value));
    lists.push_back(std::move(list));
  }
  const auto data = exchange(endpoint, {{"type", "ENROLL_DATA"},
                                        {"session", session},
                                        {"hp_variants", std::move(lists)}});
  if (!reply_ok(data)) fail(Errc::state, "enrolment data refused: " + reply_reason(data));
  return session;
}

ConfirmReply confirm_remote(const wire::Endpoint& endpoint, const std::string& session,
                            std::span<const Hpf> candidates, OrderKind kind) {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& c : candidates) list.push_back(to_wire(c));
  const auto reply = exchange(endpoint, {{"type", "ENROLL_CONFIRM"},
                                         {"session", session},
                                         {"hpf_candidates", std::move(list)},
                                         {"order_kind", std::string(to_string(kind))}});
  if (reply["type"] == "ERROR") fail(Errc::state, "confirmation refused: " + reply_reason(reply));
  return {reply_ok(reply), reply_reason(reply)};
}

}  // namespace eegpass

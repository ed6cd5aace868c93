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

#include "eegpass/service.hpp"

#include <vector>

#include "eegpass/error.hpp"
#include "eegpass/store.hpp"

namespace eegpass {

using wire::Record;

namespace {

Record result(bool ok, std::string_view reason) {
  return Record{{"type", "RESULT"}, {"ok", ok}, {"reason", reason}};
}

Record error(std::string_view reason) { return Record{{"type", "ERROR"}, {"reason", reason}}; }

std::string text_field(const Record& r, const char* name) {
  auto it = r.find(name);
  if (it == r.end() || !it->is_string()) fail(Errc::parse, std::string("missing field ") + name);
  return it->get<std::string>();
}

HpVariants parse_variants(const Record& r) {
  const auto& lists = r.at("hp_variants");
  if (!lists.is_array()) fail(Errc::parse, "hp_variants must be a list of lists");
  HpVariants out;
  for (const auto& list : lists) {
    if (!list.is_array()) fail(Errc::parse, "hp_variants must be a list of lists");
    std::vector<Hp> hps;
    for (const auto& h : list) {
      if (!h.is_string()) fail(Errc::parse, "HP values must be hex strings");
      const auto raw = from_hex(h.get<std::string>());
      if (raw.size() != kMacSize) fail(Errc::parse, "HP values must be 32 bytes");
      Hp hp;
      std::copy(raw.begin(), raw.end(), hp.value.begin());
      hps.push_back(hp);
    }
    out.push_back(std::move(hps));
  }
  return out;
}

std::vector<Hpf> parse_candidates(const Record& r) {
  std::vector<Hpf> out;
  if (auto it = r.find("hpf_candidates"); it != r.end()) {
    if (!it->is_array()) fail(Errc::parse, "hpf_candidates must be a list");
    for (const auto& c : *it) {
      if (!c.is_string()) fail(Errc::parse, "HPF values must be strings");
      out.push_back(parse_wire_hpf(c.get<std::string>()));
    }
  }
  if (auto it = r.find("hpf"); it != r.end()) {
    if (!it->is_string()) fail(Errc::parse, "hpf must be a string");
    out.push_back(parse_wire_hpf(it->get<std::string>()));
  }
  return out;
}

}  // namespace

Hpf parse_wire_hpf(std::string_view text) {
  const bool decimal = !text.empty() && text.find_first_not_of("0123456789") == std::string_view::npos;
  if (decimal && text.size() >= 6 && text.size() <= 8) return OtpCode{std::string(text)};
  if (text.size() == 2 * kMacSize) {
    const auto raw = from_hex(text);
    StaticHpf out;
    std::copy(raw.begin(), raw.end(), out.value.begin());
    return out;
  }
  fail(Errc::parse, "HPF is neither 64 hex digits nor a 6-8 digit code");
}

AuthService::AuthService(AuthServer& server, std::optional<std::filesystem::path> store_path)
    : server_(server), store_path_(std::move(store_path)) {}

void AuthService::persist() {
  if (!store_path_) return;
  std::lock_guard lock(store_mutex_);
  save_store(server_.state(), *store_path_);
}

Record AuthService::handle(const Record& request) {
  try {
    const auto type = request.at("type").get<std::string>();
    if (type == "AUTH") {
      const auto client_id = text_field(request, "client_id");
      const auto user_id = text_field(request, "user_id");
      if (!request.contains("hpf_candidates") && !request.contains("hpf")) {
        const auto mode = server_.mode_of(user_id);
        if (!mode || !server_.has_client(client_id)) return result(false, "unknown-principal");
        auto out = result(true, "hello");
        out["mode"] = format_mode(*mode);
        return out;
      }
      const auto candidates = parse_candidates(request);
      const auto outcome = server_.authenticate(client_id, user_id, candidates);
      if (outcome.ok) {
        if (auto mode = server_.mode_of(user_id); mode && mode->mode != AuthMode::static_pool)
          persist();
      }
      return result(outcome.ok, to_string(outcome.reason));
    }
    if (type == "ENROLL_BEGIN") {
      const auto mode = parse_mode(text_field(request, "mode"));
      std::optional<EnrolmentData> data;
      if (request.contains("template"))
        data = parse_template(text_field(request, "template"));
      else if (request.contains("hp_variants"))
        data = parse_variants(request);
      const auto session = server_.enroll_begin(text_field(request, "client_id"),
                                                text_field(request, "user_id"), mode, std::move(data));
      persist();
      auto out = result(true, "pending");
      out["session"] = session;
      out["mode"] = format_mode(mode);
      return out;
    }
    if (type == "ENROLL_DATA") {
      const auto session = text_field(request, "session");
      server_.enroll_data(session, parse_variants(request));
      persist();
      auto out = result(true, "pending");
      out["session"] = session;
      return out;
    }
    if (type == "ENROLL_CONFIRM") {
      const auto session = text_field(request, "session");
      const auto kind = parse_order_kind(text_field(request, "order_kind"));
      const auto progress = server_.enroll_confirm(session, parse_candidates(request), kind);
      persist();
      std::string reason;
      if (progress.aborted)
        reason = "aborted";
      else if (progress.active)
        reason = "active";
      else
        reason = "pending linear=" + std::to_string(progress.linear) +
                 " permuted=" + std::to_string(progress.permuted);
      auto out = result(progress.accepted, reason);
      out["session"] = session;
      return out;
    }
    return error("bad-request");
  } catch (const Error& e) {
    if (e.code() == Errc::unknown_principal) return result(false, "unknown-principal");
    if (e.code() == Errc::parse || e.code() == Errc::input) return error("bad-request");
    return error(to_string(e.code()));
  } catch (const Record::exception&) {
    return error("bad-request");
  }
}

std::string AuthService::handle_line(std::string_view line) {
  Record request;
  try {
    request = wire::parse_record(
        line, {"ENROLL_BEGIN", "ENROLL_DATA", "ENROLL_CONFIRM", "AUTH"},
        {"client_id", "user_id", "mode", "template", "hp_variants", "hpf", "hpf_candidates",
         "order_kind", "session", "ok", "reason"});
  } catch (const Error&) {
    return wire::to_line(error("bad-request"));
  }
  return wire::to_line(handle(request));
}

void AuthService::connection_loop(wire::Socket socket, const std::atomic<bool>& stop) {
  wire::LineConnection conn(std::move(socket));
  try {
    while (!stop.load()) {
      if (!conn.poll(200)) continue;
      auto line = conn.read_line(1000);
      if (!line) return;
      conn.write_line(handle_line(*line));
    }
  } catch (const Error&) {
    // peer went away or sent an oversized record; drop the connection
  }
}

void AuthService::serve(wire::Listener& listener, const std::atomic<bool>& stop) {
  std::list<std::thread> workers;
  while (!stop.load()) {
    auto socket = listener.accept(200);
    if (!socket) continue;
    workers.emplace_back(
        [this, &stop, s = std::move(*socket)]() mutable { connection_loop(std::move(s), stop); });
  }
  for (auto& t : workers) t.join();
}

BackgroundService::BackgroundService(AuthServer& server, std::uint16_t port,
                                     std::optional<std::filesystem::path> store_path)
    : service_(server, std::move(store_path)), listener_("127.0.0.1", port) {
  thread_ = std::thread([this] { service_.serve(listener_, stop_); });
}

BackgroundService::~BackgroundService() {
  stop_ = true;
  thread_.join();
}

}  // namespace eegpass

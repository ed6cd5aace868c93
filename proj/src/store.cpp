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

#include "eegpass/store.hpp"

#include <openssl/sha.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "eegpass/error.hpp"

namespace eegpass {

using nlohmann::json;

namespace {

std::string sha256_hex(const std::string& text) {
  std::array<std::uint8_t, SHA256_DIGEST_LENGTH> digest{};
  SHA256(reinterpret_cast<const unsigned char*>(text.data()), text.size(), digest.data());
  return to_hex(digest);
}

Mac mac_from_hex(const std::string& hex) {
  const auto raw = from_hex(hex);
  if (raw.size() != kMacSize) fail(Errc::parse, "stored MAC has wrong length");
  Mac out{};
  std::copy(raw.begin(), raw.end(), out.begin());
  return out;
}

std::string_view status_name(RecordStatus s) {
  return s == RecordStatus::active ? "active" : "pending";
}

json to_json(const UserRecord& r) {
  json pool = json::array();
  for (const auto& h : r.pool) pool.push_back(to_hex(h.value));
  json variants = json::array();
  for (const auto& position : r.pel_hp_variants) {
    json list = json::array();
    for (const auto& h : position) list.push_back(to_hex(h.value));
    variants.push_back(std::move(list));
  }
  json out{
      {"user_id", r.user_id},
      {"client_id", r.client_id},
      {"mode", format_mode(r.mode)},
      {"pool", std::move(pool)},
      {"pel_hp_variants", std::move(variants)},
      {"counter", r.counter},
      {"accepted_codes", r.accepted_codes},
      {"status", status_name(r.status)},
      {"progress",
       {{"linear", r.progress.linear},
        {"permuted", r.progress.permuted},
        {"consecutive_failures", r.progress.consecutive_failures}}},
      {"enrolment_session", r.enrolment_session},
  };
  out["last_time_step"] = r.last_time_step ? json(*r.last_time_step) : json(nullptr);
  return out;
}

UserRecord record_from_json(const json& j) {
  UserRecord r;
  r.user_id = j.at("user_id").get<std::string>();
  r.client_id = j.at("client_id").get<std::string>();
  r.mode = parse_mode(j.at("mode").get<std::string>());
  for (const auto& h : j.at("pool")) r.pool.push_back(StaticHpf{mac_from_hex(h)});
  for (const auto& position : j.at("pel_hp_variants")) {
    std::vector<Hp> list;
    for (const auto& h : position) list.push_back(Hp{mac_from_hex(h)});
    r.pel_hp_variants.push_back(std::move(list));
  }
  r.counter = j.at("counter").get<std::uint64_t>();
  if (!j.at("last_time_step").is_null())
    r.last_time_step = j.at("last_time_step").get<std::uint64_t>();
  for (const auto& c : j.at("accepted_codes")) r.accepted_codes.push_back(c.get<std::string>());
  const auto status = j.at("status").get<std::string>();
  if (status != "active" && status != "pending") fail(Errc::parse, "unknown record status");
  r.status = status == "active" ? RecordStatus::active : RecordStatus::pending_verification;
  const auto& p = j.at("progress");
  r.progress = {p.at("linear").get<int>(), p.at("permuted").get<int>(),
                p.at("consecutive_failures").get<int>()};
  r.enrolment_session = j.at("enrolment_session").get<std::string>();
  return r;
}

void write_atomically(const std::filesystem::path& path, const std::string& contents,
                      std::filesystem::perms perms) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::io, "cannot write " + tmp.string());
    std::filesystem::permissions(tmp, perms, std::filesystem::perm_options::replace);
    out << contents;
    if (!out.flush()) fail(Errc::io, "write to " + tmp.string() + " failed");
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

}  // namespace

void save_store(const ServerState& state, const std::filesystem::path& path) {
  json users = json::array();
  for (const auto& [id, record] : state.users) users.push_back(to_json(record));
  const json body{{"clients", state.client_ids}, {"users", std::move(users)}};
  const auto body_text = body.dump();
  const json doc{{"format", "eegpass-store"},
                 {"version", kStoreVersion},
                 {"sha256", sha256_hex(body_text)},
                 {"body", body_text}};
  using std::filesystem::perms;
  write_atomically(path, doc.dump(1) + "\n", perms::owner_read | perms::owner_write);
}

ServerState load_store(const std::filesystem::path& path) {
  const auto text = read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    fail(Errc::corrupt_file, "store is not valid JSON: " + std::string(e.what()));
  }
  try {
    if (doc.at("format") != "eegpass-store") fail(Errc::corrupt_file, "not an eegpass store");
    const auto version = doc.at("version").get<int>();
    if (version != kStoreVersion)
      fail(Errc::version, "store version " + std::to_string(version) + " is not supported");
    const auto body_text = doc.at("body").get<std::string>();
    if (!ct_equal(sha256_hex(body_text), doc.at("sha256").get<std::string>()))
      fail(Errc::corrupt_file, "store checksum mismatch");

    const auto body = json::parse(body_text);
    ServerState state;
    state.client_ids = body.at("clients").get<std::vector<std::string>>();
    for (const auto& j : body.at("users")) {
      auto record = record_from_json(j);
      auto id = record.user_id;
      state.users.emplace(std::move(id), std::move(record));
    }
    return state;
  } catch (const json::exception& e) {
    fail(Errc::corrupt_file, "store structure invalid: " + std::string(e.what()));
  }
}

std::vector<ClientCredential> load_key_file(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  std::vector<ClientCredential> out;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    const auto colon = line.rfind(':');
    if (colon == std::string::npos || colon == 0)
      fail(Errc::parse, path.string() + ":" + std::to_string(number) + ": expected id:key");
    try {
      out.push_back({line.substr(0, colon), SecretKey::from_hex(line.substr(colon + 1))});
    } catch (const Error&) {
      fail(Errc::parse, path.string() + ":" + std::to_string(number) + ": malformed key");
    }
  }
  return out;
}

void save_key_file(std::span<const ClientCredential> credentials,
                   const std::filesystem::path& path) {
  std::string text;
  for (const auto& c : credentials) text += c.client_id + ":" + c.key.to_hex() + "\n";
  using std::filesystem::perms;
  write_atomically(path, text, perms::owner_read | perms::owner_write);
}

}  // namespace eegpass

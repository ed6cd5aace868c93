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

#include "eegpass/crypto.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/rand.h>

#include <cstring>

#include "eegpass/error.hpp"

namespace eegpass {

SecretKey::SecretKey(std::span<const std::uint8_t> bytes) {
  if (bytes.size() != kKeySize) fail(Errc::input, "secret key must be exactly 32 bytes");
  std::copy(bytes.begin(), bytes.end(), bytes_.begin());
}

SecretKey::~SecretKey() { OPENSSL_cleanse(bytes_.data(), bytes_.size()); }

SecretKey SecretKey::from_hex(std::string_view hex) {
  auto raw = eegpass::from_hex(hex);
  SecretKey key(raw);
  OPENSSL_cleanse(raw.data(), raw.size());
  return key;
}

SecretKey SecretKey::generate() {
  std::array<std::uint8_t, kKeySize> raw{};
  if (RAND_bytes(raw.data(), static_cast<int>(raw.size())) != 1)
    fail(Errc::state, "system random generator failed");
  SecretKey key(raw);
  OPENSSL_cleanse(raw.data(), raw.size());
  return key;
}

std::string SecretKey::to_hex() const { return eegpass::to_hex(bytes_); }

bool operator==(const SecretKey& a, const SecretKey& b) noexcept {
  return ct_equal(a.bytes_, b.bytes_);
}

void OtpParams::validate() const {
  if (digits < 6 || digits > 8) fail(Errc::input, "OTP digits must be 6, 7 or 8");
  if (look_ahead < 0) fail(Errc::input, "look-ahead must be non-negative");
  if (time_step < 1) fail(Errc::input, "time step must be at least 1 s");
  if (skew_steps < 0) fail(Errc::input, "skew steps must be non-negative");
}

std::string to_hex(std::span<const std::uint8_t> bytes) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out += digits[b >> 4];
    out += digits[b & 0x0F];
  }
  return out;
}

Bytes from_hex(std::string_view hex) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (hex.size() % 2 != 0) fail(Errc::parse, "hex string has odd length");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int hi = nibble(hex[2 * i]);
    const int lo = nibble(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) fail(Errc::parse, "invalid hex digit");
    out[i] = static_cast<std::uint8_t>((hi << 4) | lo);
  }
  return out;
}

std::string to_wire(const Hpf& hpf) {
  if (const auto* s = std::get_if<StaticHpf>(&hpf)) return to_hex(s->value);
  return std::get<OtpCode>(hpf).digits;
}

bool ct_equal(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) noexcept {
  if (a.size() != b.size()) return false;
  return CRYPTO_memcmp(a.data(), b.data(), a.size()) == 0;
}

bool ct_equal(std::string_view a, std::string_view b) noexcept {
  return ct_equal(std::span(reinterpret_cast<const std::uint8_t*>(a.data()), a.size()),
                  std::span(reinterpret_cast<const std::uint8_t*>(b.data()), b.size()));
}

Bytes hmac_raw(HashAlg hash, std::span<const std::uint8_t> key,
               std::span<const std::uint8_t> data) {
  const EVP_MD* md = hash == HashAlg::sha1 ? EVP_sha1() : EVP_sha256();
  Bytes out(EVP_MAX_MD_SIZE);
  unsigned int len = 0;
  if (!HMAC(md, key.data(), static_cast<int>(key.size()), data.data(), data.size(), out.data(),
            &len))
    fail(Errc::state, "HMAC computation failed");
  out.resize(len);
  return out;
}

Mac hmac(const SecretKey& key, std::span<const std::uint8_t> data) {
  Mac out{};
  unsigned int len = 0;
  const auto k = key.bytes();
  if (!HMAC(EVP_sha256(), k.data(), static_cast<int>(k.size()), data.data(), data.size(),
            out.data(), &len) ||
      len != out.size())
    fail(Errc::state, "HMAC computation failed");
  return out;
}

Hp hp(const SecretKey& key, const ObservedPel& pel) { return Hp{hmac(key, encode_pel(pel))}; }

namespace {

Bytes concat(std::span<const Hp> hps) {
  if (hps.empty()) fail(Errc::input, "HPF needs at least one HP");
  if (hps.size() > kMaxPels) fail(Errc::input, "HPF over more than 6 pels");
  Bytes data;
  data.reserve(hps.size() * kMacSize);
  for (const auto& h : hps) data.insert(data.end(), h.value.begin(), h.value.end());
  return data;
}

}  // namespace

StaticHpf hpf_static(const SecretKey& key, std::span<const Hp> hps) {
  return StaticHpf{hmac(key, concat(hps))};
}

OtpCode hotp(const SecretKey& key, std::uint64_t counter, std::span<const std::uint8_t> data,
             const OtpParams& params) {
  return hotp(key.bytes(), counter, data, params);
}

OtpCode hotp(std::span<const std::uint8_t> key, std::uint64_t counter,
             std::span<const std::uint8_t> data, const OtpParams& params) {
  params.validate();
  Bytes message(8);
  for (int i = 7; i >= 0; --i) {
    message[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(counter & 0xFF);
    counter >>= 8;
  }
  message.insert(message.end(), data.begin(), data.end());
  const auto mac = hmac_raw(params.hash, key, message);

  const std::size_t offset = mac.back() & 0x0F;
  const std::uint32_t binary = (std::uint32_t(mac[offset] & 0x7F) << 24) |
                               (std::uint32_t(mac[offset + 1]) << 16) |
                               (std::uint32_t(mac[offset + 2]) << 8) |
                               std::uint32_t(mac[offset + 3]);
  std::uint32_t modulus = 1;
  for (int i = 0; i < params.digits; ++i) modulus *= 10;

  auto code = std::to_string(binary % modulus);
  code.insert(0, static_cast<std::size_t>(params.digits) - code.size(), '0');
  return OtpCode{std::move(code)};
}

OtpCode hpf_otp(const SecretKey& key, std::uint64_t counter, std::span<const Hp> hps,
                const OtpParams& params) {
  return hotp(key, counter, concat(hps), params);
}

std::uint64_t totp_counter(std::int64_t unix_time, const OtpParams& params) {
  params.validate();
  if (unix_time < 0) fail(Errc::input, "negative unix time");
  return static_cast<std::uint64_t>(unix_time) / static_cast<std::uint64_t>(params.time_step);
}

std::vector<ObservedPel> pel_variants(const Pel& pel) {
  std::vector<ObservedPel> out;
  for (auto att : kAllLevels) {
    if (!pel.att.matches(att)) continue;
    for (auto rel : kAllLevels)
      if (pel.rel.matches(rel)) out.push_back({pel.chars, att, rel});
  }
  return out;
}

std::vector<std::vector<ObservedPel>> expand_wildcards(const PelTemplate& tpl) {
  std::vector<std::vector<ObservedPel>> per_pel;
  std::size_t total = 1;
  for (const auto& pel : tpl.pels()) {
    per_pel.push_back(pel_variants(pel));
    total *= per_pel.back().size();
  }
  if (total > kMaxPoolSize) fail(Errc::pool_too_large, "wildcard expansion exceeds 10^5");

  std::vector<std::vector<ObservedPel>> out;
  out.reserve(total);
  std::vector<std::size_t> choice(per_pel.size(), 0);
  for (;;) {
    std::vector<ObservedPel> list;
    list.reserve(per_pel.size());
    for (std::size_t i = 0; i < per_pel.size(); ++i) list.push_back(per_pel[i][choice[i]]);
    out.push_back(std::move(list));
    std::size_t i = per_pel.size();
    for (; i > 0; --i) {
      if (++choice[i - 1] < per_pel[i - 1].size()) break;
      choice[i - 1] = 0;
    }
    if (i == 0) break;
  }
  return out;
}

std::size_t arrangement_count(std::span<const std::vector<Hp>> variants) {
  std::size_t total = 1;
  for (std::size_t i = 1; i <= variants.size(); ++i) {
    total *= i;
    if (total > kMaxPoolSize) return kMaxPoolSize + 1;
  }
  for (const auto& v : variants) {
    total *= v.size();
    if (total > kMaxPoolSize) return kMaxPoolSize + 1;
  }
  return total;
}

std::vector<std::vector<Hp>> hp_variants(const SecretKey& key, const PelTemplate& tpl) {
  std::vector<std::vector<Hp>> out;
  for (const auto& pel : tpl.pels()) {
    std::vector<Hp> hps;
    for (const auto& v : pel_variants(pel)) hps.push_back(hp(key, v));
    out.push_back(std::move(hps));
  }
  return out;
}

HpfPool hpf_pool(const SecretKey& key, std::span<const std::vector<Hp>> variants) {
  if (variants.empty() || variants.size() > kMaxPels)
    fail(Errc::input, "pool needs 1..6 pel positions");
  for (const auto& v : variants)
    if (v.empty()) fail(Errc::input, "pel position without HP variants");
  if (arrangement_count(variants) > kMaxPoolSize)
    fail(Errc::pool_too_large, "HPF pool would exceed 10^5 entries");

  HpfPool pool;
  for_each_arrangement(variants, [&](std::span<const Hp> seq) {
    pool.push_back(hpf_static(key, seq));
  });
  std::sort(pool.begin(), pool.end());
  pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  return pool;
}

HpfPool hpf_pool(const SecretKey& key, const PelTemplate& tpl) {
  std::size_t expansions = 1;
  for (std::size_t i = 0; i < tpl.size(); ++i)
    expansions *= tpl.wildcards(i) == 2 ? 25 : tpl.wildcards(i) == 1 ? 5 : 1;
  std::size_t orders = 1;
  for (std::size_t i = 2; i <= tpl.size(); ++i) orders *= i;
  if (orders * expansions > kMaxPoolSize)
    fail(Errc::pool_too_large, "HPF pool would exceed 10^5 entries");
  const auto variants = hp_variants(key, tpl);
  return hpf_pool(key, variants);
}

}  // namespace eegpass

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

// Keyed hashing for pels: per-pel HP values, the combined HPF, the
// permutation and wildcard pool, and the HOTP/TOTP one-time variants.

#include <algorithm>
#include <array>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "eegpass/model.hpp"

namespace eegpass {

inline constexpr std::size_t kKeySize = 32;
inline constexpr std::size_t kMacSize = 32;
inline constexpr std::size_t kMaxPoolSize = 100000;

using Mac = std::array<std::uint8_t, kMacSize>;

/// Workstation key shared by one client and the server. Never printed; the
/// bytes are wiped when the object dies.
class SecretKey {
public:
  explicit SecretKey(std::span<const std::uint8_t> bytes);
  SecretKey(const SecretKey&) = default;
  SecretKey& operator=(const SecretKey&) = default;
  ~SecretKey();

  static SecretKey from_hex(std::string_view hex);
  static SecretKey generate();

  std::span<const std::uint8_t, kKeySize> bytes() const noexcept { return bytes_; }

  /// Only for writing key files.
  std::string to_hex() const;

  friend bool operator==(const SecretKey& a, const SecretKey& b) noexcept;

private:
  std::array<std::uint8_t, kKeySize> bytes_{};
};

/// HMAC of one encoded pel.
struct Hp {
  Mac value{};
  friend auto operator<=>(const Hp&, const Hp&) = default;
};

struct StaticHpf {
  Mac value{};
  friend auto operator<=>(const StaticHpf&, const StaticHpf&) = default;
};

/// Zero-padded decimal one-time code.
struct OtpCode {
  std::string digits;
  friend auto operator<=>(const OtpCode&, const OtpCode&) = default;
};

using Hpf = std::variant<StaticHpf, OtpCode>;

enum class OtpMode { hotp, totp };
enum class HashAlg { sha1, sha256 };

struct OtpParams {
  OtpMode mode = OtpMode::hotp;
  int digits = 6;
  HashAlg hash = HashAlg::sha256;
  int look_ahead = 4;
  int time_step = 30;  // seconds, TOTP only
  int skew_steps = 1;  // TOTP only

  void validate() const;
  friend bool operator==(const OtpParams&, const OtpParams&) = default;
};

std::string to_hex(std::span<const std::uint8_t> bytes);
Bytes from_hex(std::string_view hex);

/// Wire form: lowercase hex for static values, the digits for codes.
std::string to_wire(const Hpf& hpf);

/// Comparison of secret-dependent values; runtime independent of content.
bool ct_equal(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) noexcept;
bool ct_equal(std::string_view a, std::string_view b) noexcept;

/// HMAC over an arbitrary key, for reference-vector checks and HOTP.
Bytes hmac_raw(HashAlg hash, std::span<const std::uint8_t> key,
               std::span<const std::uint8_t> data);

/// HMAC-SHA-256.
Mac hmac(const SecretKey& key, std::span<const std::uint8_t> data);

Hp hp(const SecretKey& key, const ObservedPel& pel);

StaticHpf hpf_static(const SecretKey& key, std::span<const Hp> hps);

/// HMAC(key, counter as 8 big-endian bytes || data), RFC 4226 dynamic
/// truncation, reduced mod 10^digits. Empty data and SHA-1 gives plain HOTP.
OtpCode hotp(const SecretKey& key, std::uint64_t counter, std::span<const std::uint8_t> data,
             const OtpParams& params);

/// Same over a key of any length (the RFC 4226 reference key is 20 bytes).
OtpCode hotp(std::span<const std::uint8_t> key, std::uint64_t counter,
             std::span<const std::uint8_t> data, const OtpParams& params);

OtpCode hpf_otp(const SecretKey& key, std::uint64_t counter, std::span<const Hp> hps,
                const OtpParams& params);

std::uint64_t totp_counter(std::int64_t unix_time, const OtpParams& params);

/// Concrete levels each pel's requirement admits, attention outer and
/// relaxation inner, both in S..H order.
std::vector<ObservedPel> pel_variants(const Pel& pel);

/// Cartesian product of all wildcard substitutions; the rightmost pel varies
/// fastest. Throws Errc::pool_too_large above 10^5 lists.
std::vector<std::vector<ObservedPel>> expand_wildcards(const PelTemplate& tpl);

/// Number of HP arrangements (orders x variant choices) for the variant
/// lists, saturating at kMaxPoolSize + 1.
std::size_t arrangement_count(std::span<const std::vector<Hp>> variants);

/// Calls f(std::span<const Hp>) for every permutation of the positions
/// crossed with every choice of one variant per position.
template <typename F>
void for_each_arrangement(std::span<const std::vector<Hp>> variants, F&& f) {
  const std::size_t n = variants.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::size_t> choice(n);
  std::vector<Hp> seq(n);
  do {
    std::fill(choice.begin(), choice.end(), 0);
    for (;;) {
      for (std::size_t i = 0; i < n; ++i) seq[i] = variants[order[i]][choice[i]];
      f(std::span<const Hp>(seq));
      // odometer, rightmost position fastest
      std::size_t i = n;
      for (; i > 0; --i) {
        if (++choice[i - 1] < variants[order[i - 1]].size()) break;
        choice[i - 1] = 0;
      }
      if (i == 0) break;
    }
  } while (std::next_permutation(order.begin(), order.end()));
}

/// Sorted, duplicate-free set of static HPF values.
using HpfPool = std::vector<StaticHpf>;

HpfPool hpf_pool(const SecretKey& key, std::span<const std::vector<Hp>> variants);
HpfPool hpf_pool(const SecretKey& key, const PelTemplate& tpl);

/// Per-position HP lists of each pel's wildcard substitutions.
std::vector<std::vector<Hp>> hp_variants(const SecretKey& key, const PelTemplate& tpl);

}  // namespace eegpass

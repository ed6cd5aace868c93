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

#include <doctest.h>

#include <algorithm>
#include <set>

#include "eegpass/crypto.hpp"
#include "eegpass/error.hpp"
#include "support.hpp"

using namespace eegpass;
using L = StateLevel;

namespace {

Bytes bytes_of(std::string_view s) { return Bytes(s.begin(), s.end()); }
Bytes repeat(std::uint8_t b, std::size_t n) { return Bytes(n, b); }

OtpParams rfc_params() {
  OtpParams p;
  p.hash = HashAlg::sha1;
  p.digits = 6;
  return p;
}

Errc code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an eegpass::Error");
  return Errc::state;
}

}  // namespace

TEST_CASE("HMAC-SHA-256 matches RFC 4231 test cases 1 to 4") {
  Bytes key4;
  for (std::uint8_t b = 1; b <= 0x19; ++b) key4.push_back(b);
  struct Case {
    Bytes key;
    Bytes data;
    const char* mac;
  } cases[] = {
      {repeat(0x0b, 20), bytes_of("Hi There"),
       "b0344c61d8db38535ca8afceaf0bf12b881dc200c9833da726e9376c2e32cff7"},
      {bytes_of("Jefe"), bytes_of("what do ya want for nothing?"),
       "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843"},
      {repeat(0xaa, 20), repeat(0xdd, 50),
       "773ea91e36800e46854db8ebd09181a72959098b3ef8c122d9635514ced565fe"},
      {key4, repeat(0xcd, 50), "82558a389a443c0ea4cc819899f2083a85f0faa3e578f8077a2e3ff46729665b"},
  };
  for (const auto& c : cases) CHECK(to_hex(hmac_raw(HashAlg::sha256, c.key, c.data)) == c.mac);
}

TEST_CASE("keyed hmac equals the raw form over the key bytes") {
  const auto key = test::fixed_key();
  const auto data = bytes_of("abc");
  const auto mac = hmac(key, data);
  CHECK(to_hex(mac) == to_hex(hmac_raw(HashAlg::sha256, key.bytes(), data)));
  CHECK(hmac(key, data) == mac);
}

TEST_CASE("HOTP matches all RFC 4226 appendix D values") {
  const auto key = bytes_of("12345678901234567890");
  const char* expected[] = {"755224", "287082", "359152", "969429", "338314",
                            "254676", "287922", "162583", "399871", "520489"};
  for (std::uint64_t c = 0; c < 10; ++c)
    CHECK(hotp(key, c, {}, rfc_params()).digits == expected[c]);
}

TEST_CASE("TOTP counters and codes match RFC 6238 appendix B (SHA-1)") {
  const auto key = bytes_of("12345678901234567890");
  OtpParams p = rfc_params();
  p.mode = OtpMode::totp;
  p.digits = 8;
  struct Row {
    std::int64_t t;
    std::uint64_t step;
    const char* code;
  } rows[] = {{59, 0x1, "94287082"},
              {1111111109, 0x23523EC, "07081804"},
              {1111111111, 0x23523ED, "14050471"},
              {1234567890, 0x273EF07, "89005924"},
              {2000000000, 0x3F940AA, "69279037"},
              {20000000000, 0x27BC86AA, "65353130"}};
  for (const auto& r : rows) {
    CHECK(totp_counter(r.t, p) == r.step);
    CHECK(hotp(key, totp_counter(r.t, p), {}, p).digits == r.code);
  }
  CHECK(totp_counter(0, p) == 0);
  CHECK(code_of([&] { totp_counter(-1, p); }) == Errc::input);
}

TEST_CASE("pel hashes match the independently computed golden values") {
  // values from tests/fixtures/gen_golden.py
  const auto key = test::fixed_key();
  const std::vector<ObservedPel> pels{test::op("qwe", L::H, L::S), test::op("rty", L::N, L::H),
                                      test::op("123", L::H, L::R)};
  CHECK(to_hex(encode_pel(pels[0])) == "0100037177654853");
  std::vector<Hp> hps;
  for (const auto& p : pels) hps.push_back(hp(key, p));
  CHECK(to_hex(hps[0].value) == "a8b83764f0c3886991feddad41f68ed48993be8818c47583b00f8e27d58fda3b");
  CHECK(to_hex(hps[1].value) == "9242ea4a1c2193494b51890b7578c7f75681b93c723c2b17fb47ca18bea549d2");
  CHECK(to_hex(hps[2].value) == "bb4419faf0f867bf74df4d41ae94efe2483847b61038315ab01fab743f90f744");
  CHECK(to_hex(hpf_static(key, hps).value) ==
        "651b91a2cdd69caa625b4cf612b2422d6ab509409866829b85f16b26d8a22b47");
  auto reversed = hps;
  std::reverse(reversed.begin(), reversed.end());
  CHECK(to_hex(hpf_static(key, reversed).value) ==
        "2705305edca88e15f65132daedf31adfec7271093f920f20608bfc073def2b0b");
  CHECK(to_hex(hp(key, test::op("\xc3\xa4\xc3\xb6", L::L, L::L)).value) ==
        "a46b038f6881bd6db65f42d9b7e50b39d8ed906ec324d115abb7bc1fe4fee1ab");

  OtpParams p;
  CHECK(hpf_otp(key, 0, hps, p).digits == "823934");
  CHECK(hpf_otp(key, 1, hps, p).digits == "147917");
  CHECK(hpf_otp(key, 7, hps, p).digits == "644272");
  p.digits = 8;
  CHECK(hpf_otp(key, 3, hps, p).digits == "98841243");
  p.digits = 6;
  p.hash = HashAlg::sha1;
  CHECK(hpf_otp(key, 5, hps, p).digits == "362830");
}

TEST_CASE("hp and hpf distinguish content, length and order") {
  const auto key = test::fixed_key();
  const auto a = hp(key, test::op("qwe", L::H, L::N));
  CHECK(a == hp(key, test::op("qwe", L::H, L::N)));
  CHECK(a != hp(key, test::op("qwe", L::H, L::R)));
  CHECK(a != hp(key, test::op("qw", L::H, L::N)));
  const auto b = hp(key, test::op("rty", L::N, L::H));
  const std::vector<Hp> ab{a, b}, ba{b, a};
  CHECK(hpf_static(key, ab) != hpf_static(key, ba));
  const std::vector<Hp> single{a};
  CHECK(hpf_static(key, single).value == hmac(key, a.value));
  CHECK(hpf_otp(key, 0, single, {}) == hotp(key, 0, a.value, {}));
  CHECK(code_of([&] { hpf_static(key, std::vector<Hp>{}); }) == Errc::input);
  CHECK(code_of([&] { hpf_static(key, std::vector<Hp>(7, a)); }) == Errc::input);
}

TEST_CASE("OTP parameter validation") {
  OtpParams p;
  p.digits = 5;
  CHECK(code_of([&] { p.validate(); }) == Errc::input);
  p.digits = 9;
  CHECK(code_of([&] { p.validate(); }) == Errc::input);
  p.digits = 7;
  CHECK(hotp(test::fixed_key(), 0, {}, p).digits.size() == 7);
}

TEST_CASE("wildcard expansion") {
  CHECK(expand_wildcards(test::reference_template()).size() == 125);
  const auto fixed = parse_template("[[ab,H,S],[cd,S,H]]");
  const auto lists = expand_wildcards(fixed);
  REQUIRE(lists.size() == 1);
  CHECK(lists[0] == std::vector<ObservedPel>{test::op("ab", L::H, L::S), test::op("cd", L::S, L::H)});
  CHECK(expand_wildcards(parse_template("[[a,0,0]]")).size() == 25);
  CHECK(pel_variants(Pel{"a", L::H, RequiredLevel::any()}).size() == 5);
  CHECK(code_of([] {
          expand_wildcards(parse_template("[[a,0,0],[b,0,S],[c,0,0],[d,0,S],[e,0,0],[f,0,S]]"));
        }) == Errc::pool_too_large);
}

TEST_CASE("pool equals an independent enumeration of orders and substitutions") {
  const auto key = test::fixed_key();
  const auto tpl = test::reference_template();
  // oracle: nested loops over every order and every wildcard level
  std::set<StaticHpf> oracle;
  std::vector<int> order{0, 1, 2};
  do {
    for (auto w0 : kAllLevels)
      for (auto w1 : kAllLevels)
        for (auto w2 : kAllLevels) {
          const ObservedPel concrete[3] = {test::op("qwe", L::H, w0), test::op("rty", w1, L::H),
                                           test::op("123", L::H, w2)};
          std::vector<Hp> hps;
          for (int i : order) hps.push_back(hp(key, concrete[i]));
          oracle.insert(hpf_static(key, hps));
        }
  } while (std::next_permutation(order.begin(), order.end()));
  const auto pool = hpf_pool(key, tpl);
  CHECK(pool.size() == 750);
  CHECK(oracle.size() == 750);
  CHECK(std::equal(pool.begin(), pool.end(), oracle.begin(), oracle.end()));
  CHECK(std::is_sorted(pool.begin(), pool.end()));
}

TEST_CASE("small pools") {
  const auto key = test::fixed_key();
  CHECK(hpf_pool(key, parse_template("[[a,N,N]]")).size() == 1);
  CHECK(hpf_pool(key, parse_template("[[a,N,N],[b,S,S]]")).size() == 2);
  // identical encodings collapse: the two orders give the same sequence
  CHECK(hpf_pool(key, parse_template("[[a,N,N],[b,S,S],[a,N,N]]")).size() == 3);
  CHECK(code_of([&] {
          hpf_pool(key, parse_template("[[a,0,0],[b,S,S],[c,0,0],[d,S,S],[e,0,0],[f,S,S]]"));
        }) == Errc::pool_too_large);
}

TEST_CASE("arrangement enumeration visits every order and choice once") {
  const auto key = test::fixed_key();
  const auto variants = hp_variants(key, test::reference_template());
  REQUIRE(variants.size() == 3);
  CHECK(arrangement_count(variants) == 750);
  std::size_t visits = 0;
  std::set<std::vector<Hp>> seen;
  for_each_arrangement(std::span<const std::vector<Hp>>(variants), [&](std::span<const Hp> seq) {
    ++visits;
    seen.insert(std::vector<Hp>(seq.begin(), seq.end()));
  });
  CHECK(visits == 750);
  CHECK(seen.size() == 750);
}

TEST_CASE("secret keys and byte helpers") {
  const auto key = test::fixed_key();
  CHECK(SecretKey::from_hex(key.to_hex()) == key);
  CHECK_FALSE(SecretKey::generate() == SecretKey::generate());
  CHECK(code_of([] { SecretKey::from_hex("abcd"); }) == Errc::input);
  CHECK(code_of([] { from_hex("zz"); }) == Errc::parse);
  CHECK(from_hex("00ff10") == Bytes{0x00, 0xff, 0x10});
  CHECK(ct_equal(std::string_view("123456"), std::string_view("123456")));
  CHECK_FALSE(ct_equal(std::string_view("123456"), std::string_view("123457")));
  CHECK_FALSE(ct_equal(std::string_view("12345"), std::string_view("123456")));
  CHECK(to_wire(Hpf{OtpCode{"012345"}}) == "012345");
  CHECK(to_wire(Hpf{StaticHpf{}}) == std::string(64, '0'));
}

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

#include "support.hpp"

#include <numeric>
#include <random>

#include "commands.hpp"
#include "eegpass/error.hpp"

namespace eegpass::test {

SecretKey fixed_key() {
  std::array<std::uint8_t, kKeySize> raw{};
  std::iota(raw.begin(), raw.end(), std::uint8_t{0});
  return SecretKey(raw);
}

PelTemplate reference_template() { return parse_template(kReferenceTemplate); }

ObservedPel op(std::string chars, StateLevel att, StateLevel rel) {
  return ObservedPel{std::move(chars), att, rel};
}

std::vector<Hpf> clean_session(const SecretKey& key, const std::vector<ObservedPel>& pels,
                               const ModeSpec& mode, std::uint64_t counter, Clock clock) {
  AuthSession session("alice", key, mode, {}, std::move(clock));
  session.set_counter(counter);
  std::string password;
  for (const auto& p : pels) password += p.chars;
  cli::play(session, sim::generate(sim::schedule_for(pels)), password);
  return session.candidates();
}

void enroll_active(AuthServer& server, const PelTemplate& tpl, const ModeSpec& mode,
                   const std::string& user, Clock clock) {
  if (!server.has_client("ws1")) server.provision({"ws1", fixed_key()});
  const auto session = server.enroll_begin("ws1", user, mode, tpl);
  std::mt19937_64 rng(7);
  std::vector<std::size_t> order(tpl.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::uint64_t counter = 0;
  for (int i = 0; i < 4; ++i) {
    const auto kind = i < 2 ? OrderKind::linear : OrderKind::permuted;
    if (kind == OrderKind::permuted) std::reverse(order.begin(), order.end());
    const auto pels = cli::render_order(tpl, order, rng);
    const auto progress =
        server.enroll_confirm(session, clean_session(fixed_key(), pels, mode, counter, clock), kind);
    if (!progress.accepted) fail(Errc::state, "fixture confirmation rejected");
    if (mode.mode == AuthMode::hotp) ++counter;
  }
}

Fixture clean_fixture(const std::vector<ObservedPel>& pels, std::uint64_t seed,
                      double noise_sd) {
  auto schedule = sim::schedule_for(pels);
  for (auto& seg : schedule) seg.noise_sd = noise_sd;
  Fixture f;
  for (const auto& p : pels) f.password += p.chars;
  f.samples = sim::generate(schedule, sim::kDefaultSamplePeriodMs, seed).samples;
  f.keys = sim::keystrokes(f.password);
  return f;
}

Fixture flicker_fixture(std::uint64_t seed, double noise_sd) {
  // keys every 500 ms from t=0; samples at segment starts and every 1000 ms
  const sim::Schedule schedule{
      {900, 90, 10, noise_sd},   // q, w
      {100, 50, 10, 0.0},        // dip, no key
      {500, 79, 10, 0.0},        // e
      {1500, 50, 90, noise_sd},  // r, t, y
      {1500, 90, 10, noise_sd},  // 1, 2, 3
  };
  Fixture f;
  f.password = "qwerty123";
  f.samples = sim::generate(schedule, sim::kDefaultSamplePeriodMs, seed).samples;
  f.keys = sim::keystrokes(f.password);
  return f;
}

std::vector<Hpf> run_fixture(AuthSession& session, const Fixture& fixture) {
  for (const auto& s : fixture.samples) session.feed(s);
  for (const auto& k : fixture.keys) session.key(k);
  return session.finish();
}

TempDir::TempDir() {
  static std::atomic<int> serial{0};
  std::random_device rd;
  path_ = std::filesystem::temp_directory_path() /
          ("eegpass-test-" + std::to_string(rd()) + "-" + std::to_string(serial++));
  std::filesystem::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  std::filesystem::remove_all(path_, ec);
}

}  // namespace eegpass::test

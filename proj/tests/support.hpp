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

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "eegpass/client.hpp"
#include "eegpass/crypto.hpp"
#include "eegpass/eeg_sim.hpp"
#include "eegpass/model.hpp"
#include "eegpass/server.hpp"

namespace eegpass::test {

inline constexpr const char* kReferenceTemplate = "[[qwe,H,0],[rty,0,H],[123,H,0]]";

/// Bytes 0x00..0x1f.
SecretKey fixed_key();

PelTemplate reference_template();

ObservedPel op(std::string chars, StateLevel att, StateLevel rel);

/// Manually advanced clock, in unix milliseconds.
struct FakeClock {
  std::shared_ptr<std::atomic<std::int64_t>> now =
      std::make_shared<std::atomic<std::int64_t>>(1'700'000'000'000);
  Clock clock() const {
    auto n = now;
    return [n] { return n->load(); };
  }
  void advance(std::int64_t ms) const { *now += ms; }
};

/// Candidates of a noise-free simulated session that types `pels` in order.
std::vector<Hpf> clean_session(const SecretKey& key, const std::vector<ObservedPel>& pels,
                               const ModeSpec& mode = {}, std::uint64_t counter = 0,
                               Clock clock = system_clock_ms);

/// Server with the fixed key provisioned as client "ws1" and `tpl` enrolled
/// and active for "alice".
void enroll_active(AuthServer& server, const PelTemplate& tpl, const ModeSpec& mode = {},
                   const std::string& user = "alice", Clock clock = system_clock_ms);

/// Keystrokes and samples of one simulated login.
struct Fixture {
  std::vector<SignalSample> samples;
  std::vector<KeyEvent> keys;
  std::string password;
};

/// Types `pels` in order at the default cadence over a schedule holding each
/// pel's band centres, with Gaussian noise of `noise_sd` on every sample.
Fixture clean_fixture(const std::vector<ObservedPel>& pels, std::uint64_t seed,
                      double noise_sd = 0.0);

/// Reference password typed with high attention on qwe and 123 and high
/// relaxation on rty, except that the attention signal dips and comes back
/// at 79 just before `e`: e is quantized R, one level below its run, at a
/// value within the margin of edge 80.
Fixture flicker_fixture(std::uint64_t seed, double noise_sd = 2.0);

/// Feeds a fixture into a session and finishes it.
std::vector<Hpf> run_fixture(AuthSession& session, const Fixture& fixture);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const noexcept { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

}  // namespace eegpass::test

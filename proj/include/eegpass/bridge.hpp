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

// Local bridge between a login session and an interactive console.
//
// Bridge -> console:  LEVELS        t_ms, attention, meditation, att_level,
//                                   rel_level, att_near_edge, rel_near_edge
//                     SESSION_STATE phase, typed, [ok, reason, candidates]
// Console -> bridge:  KEY           ch, [t_ms]
//                     FINISH
//                     STEER         attention, meditation   (synthetic source)
//
// Nothing sent to the console identifies the enrolled pattern or the typed
// characters; only counts and live levels.

#include <atomic>
#include <cstdint>
#include <filesystem>
#include <list>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <thread>

#include "eegpass/client.hpp"
#include "eegpass/eeg_sim.hpp"
#include "eegpass/wire.hpp"

namespace eegpass {

/// Signal source the bridge samples once per period.
class SignalSource {
public:
  virtual ~SignalSource() = default;
  virtual SignalSample sample(std::int64_t t_ms) = 0;
};

/// Gaussian noise around targets that can be moved while running.
class SteerableSource : public SignalSource {
public:
  SteerableSource(int attention, int meditation, double noise_sd, std::uint64_t seed);
  SignalSample sample(std::int64_t t_ms) override;
  void steer(int attention, int meditation);

private:
  std::mutex mutex_;
  int attention_;
  int meditation_;
  double noise_sd_;
  std::mt19937_64 rng_;
};

/// Plays a recorded trace; holds the last sample once the trace ends.
class TraceSource : public SignalSource {
public:
  explicit TraceSource(sim::Trace trace);
  SignalSample sample(std::int64_t t_ms) override;

private:
  sim::Trace trace_;
};

struct BridgeOptions {
  std::string user_id;
  std::string client_id;
  std::optional<SecretKey> key;
  wire::Endpoint server;
  std::optional<std::filesystem::path> counter_file;
  std::string listen_host = "127.0.0.1";
  std::uint16_t port = wire::kDefaultBridgePort;
  std::int64_t sample_period_ms = sim::kDefaultSamplePeriodMs;
  QuantizerConfig cfg;
};

class Bridge {
public:
  Bridge(BridgeOptions options, std::shared_ptr<SignalSource> source);
  ~Bridge();
  Bridge(const Bridge&) = delete;
  Bridge& operator=(const Bridge&) = delete;

  std::uint16_t port() const noexcept { return listener_.port(); }

  /// Number of completed login attempts and the last decision.
  std::size_t attempts() const;
  std::optional<bool> last_result() const;

private:
  struct Console {
    std::shared_ptr<wire::LineConnection> conn;
    std::thread reader;
  };

  void accept_loop();
  void source_loop();
  void console_loop(std::shared_ptr<wire::LineConnection> conn);
  void handle(const wire::Record& record);
  void new_session();
  void broadcast(const wire::Record& record);
  wire::Record session_state(std::string_view phase) const;
  std::int64_t elapsed_ms() const;

  BridgeOptions options_;
  std::shared_ptr<SignalSource> source_;
  ModeSpec mode_;
  wire::Listener listener_;
  std::atomic<bool> stop_{false};

  mutable std::mutex session_mutex_;
  std::unique_ptr<AuthSession> session_;
  std::chrono::steady_clock::time_point origin_;
  std::int64_t last_key_ms_ = -1;
  std::int64_t last_sample_ms_ = -1;
  std::size_t attempts_ = 0;
  std::optional<bool> last_result_;

  std::mutex consoles_mutex_;
  std::list<Console> consoles_;

  std::thread accept_thread_;
  std::thread source_thread_;
};

}  // namespace eegpass

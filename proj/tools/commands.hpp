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

// Command implementations behind the `eegpass` binary. Kept in a library so
// that tests can drive them without spawning processes.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "eegpass/analysis.hpp"
#include "eegpass/client.hpp"
#include "eegpass/eeg_sim.hpp"
#include "eegpass/server.hpp"

namespace eegpass::cli {

inline constexpr int kExitAccept = 0;
inline constexpr int kExitReject = 1;
inline constexpr int kExitError = 2;

/// Concrete levels for the template pels taken in `order`, so that no two
/// neighbours share a pattern (a shared pattern would type as one pel).
/// Wildcard choices are drawn from `rng`. Errc::input when impossible.
std::vector<ObservedPel> render_order(const PelTemplate& tpl, const std::vector<std::size_t>& order,
                                      std::mt19937_64& rng);

/// Feeds the trace and the keystrokes into the session, then finishes it.
void play(AuthSession& session, const sim::Trace& trace, std::string_view password,
          std::int64_t cadence_ms = sim::kDefaultKeyCadenceMs);

struct EnrollOptions {
  std::string user;
  std::string template_text;
  std::string mode = "static";
  std::optional<std::string> server;                // client-side enrolment
  std::optional<std::filesystem::path> store;       // server-side enrolment
  std::optional<std::filesystem::path> key_file;    // client key (and counter) file
  std::optional<std::filesystem::path> keys;        // server key database
  std::optional<std::string> client;
  std::uint64_t seed = 1;
};

struct EnrollOutcome {
  bool active = false;
  int linear = 0;
  int permuted = 0;
  std::uint64_t counter = 0;  // HOTP counter after the confirmations
  analysis::PoolStats stats;
};

EnrollOutcome enroll(const EnrollOptions& options, std::ostream& out);

struct LoginOptions {
  std::string user;
  std::string password;
  std::optional<std::string> schedule;
  std::string server = "127.0.0.1:7311";
  std::filesystem::path key_file;
  std::string source = "synthetic";  // synthetic | trace | bridge
  std::optional<std::filesystem::path> trace;
  std::uint64_t seed = 1;
  std::int64_t cadence_ms = sim::kDefaultKeyCadenceMs;
  std::int64_t period_ms = sim::kDefaultSamplePeriodMs;
  std::uint16_t bridge_port = wire::kDefaultBridgePort;
};

struct LoginOutcome {
  AuthResult result;
  std::size_t candidates = 0;
  double decision_ms = 0.0;  // segmentation, hashing and the round trip
};

LoginOutcome login(const LoginOptions& options, std::ostream& out);

struct AnalyzeOptions {
  std::string template_text;
  std::string attacker = "chars,segmentation";
  std::string format = "text";  // text | records
  std::uint64_t seed = 1;
  std::uint64_t runs = analysis::kDefaultRuns;
};

void analyze(const AnalyzeOptions& options, std::ostream& out);

struct SimulateOptions {
  std::string schedule;
  std::filesystem::path out;
  std::uint64_t seed = 1;
  std::int64_t period_ms = sim::kDefaultSamplePeriodMs;
  std::string label;
};

void simulate(const SimulateOptions& options);

struct ServeOptions {
  std::filesystem::path keys;
  std::filesystem::path store;
  std::string host = "127.0.0.1";
  std::uint16_t port = wire::kDefaultPort;
};

/// Blocks until SIGINT or SIGTERM. Prints "listening on host:port" once bound.
void serve(const ServeOptions& options, std::ostream& out);

struct KeygenOptions {
  std::string client;
  std::filesystem::path out;                 // client key file
  std::optional<std::filesystem::path> keys; // server key database to extend
};

void keygen(const KeygenOptions& options, std::ostream& out);

/// Full command line, including the program name. Returns the exit code.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace eegpass::cli

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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails. Every check is seeded.

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <csignal>
#include <cstdio>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "../../tools/commands.hpp"
#include "eegpass/analysis.hpp"
#include "eegpass/client.hpp"
#include "eegpass/crypto.hpp"
#include "eegpass/error.hpp"
#include "eegpass/utf8.hpp"
#include "eegpass/server.hpp"
#include "support.hpp"

#ifndef EEGPASS_TOOL
#error "EEGPASS_TOOL must name the eegpass binary"
#endif

using namespace eegpass;
using Lv = StateLevel;
using Clock_ = std::chrono::steady_clock;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

double ms_since(Clock_::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock_::now() - start).count();
}

Bytes bytes_of(std::string_view s) { return Bytes(s.begin(), s.end()); }

StaticHpf hash_sequence(const SecretKey& key, const std::vector<ObservedPel>& seq) {
  std::vector<Hp> hps;
  for (const auto& p : seq) hps.push_back(hp(key, p));
  return hpf_static(key, hps);
}

// Direct reading of the acceptance rule: the submission has the template's
// pel count and some ordering of the template pels matches it position by
// position, characters exactly and each level as required.
bool oracle_accepts(const std::vector<Pel>& tpl, const std::vector<ObservedPel>& seq) {
  if (seq.size() != tpl.size()) return false;
  std::vector<std::size_t> order(tpl.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  do {
    bool ok = true;
    for (std::size_t i = 0; i < seq.size() && ok; ++i) {
      const Pel& p = tpl[order[i]];
      const bool att = !p.att.level() || p.att.level() == seq[i].att;
      const bool rel = !p.rel.level() || p.rel.level() == seq[i].rel;
      ok = p.chars == seq[i].chars && att && rel;
    }
    if (ok) return true;
  } while (std::next_permutation(order.begin(), order.end()));
  return false;
}

// Active static record for `tpl`, confirmed with directly hashed
// submissions: the first substitution in template order twice, then the
// reversed order twice.
void enroll_direct(AuthServer& server, const PelTemplate& tpl, const std::string& user) {
  const auto key = test::fixed_key();
  const auto session = server.enroll_begin("ws1", user, {}, tpl);
  std::vector<ObservedPel> seq;
  for (const auto& p : tpl.pels()) seq.push_back(pel_variants(p).front());
  const std::vector<Hpf> linear{hash_sequence(key, seq)};
  std::reverse(seq.begin(), seq.end());
  const std::vector<Hpf> permuted{hash_sequence(key, seq)};
  for (int i = 0; i < 2; ++i) server.enroll_confirm(session, linear, OrderKind::linear);
  for (int i = 0; i < 2; ++i) server.enroll_confirm(session, permuted, OrderKind::permuted);
  if (!server.user(user) || server.user(user)->status != RecordStatus::active)
    fail(Errc::state, "direct enrolment did not activate");
}

Verdict rfc_suite() {
  const auto start = Clock_::now();
  int mismatches = 0;
  int checked = 0;
  auto expect = [&](bool ok) {
    ++checked;
    mismatches += ok ? 0 : 1;
  };

  Bytes key4;
  for (std::uint8_t b = 1; b <= 0x19; ++b) key4.push_back(b);
  const struct {
    Bytes key, data;
    const char* mac;
  } hmac_cases[] = {
      {Bytes(20, 0x0b), bytes_of("Hi There"),
       "b0344c61d8db38535ca8afceaf0bf12b881dc200c9833da726e9376c2e32cff7"},
      {bytes_of("Jefe"), bytes_of("what do ya want for nothing?"),
       "5bdcc146bf60754e6a042426089575c75a003f089d2739839dec58b964ec3843"},
      {Bytes(20, 0xaa), Bytes(50, 0xdd),
       "773ea91e36800e46854db8ebd09181a72959098b3ef8c122d9635514ced565fe"},
      {key4, Bytes(50, 0xcd), "82558a389a443c0ea4cc819899f2083a85f0faa3e578f8077a2e3ff46729665b"},
  };
  for (const auto& c : hmac_cases) expect(to_hex(hmac_raw(HashAlg::sha256, c.key, c.data)) == c.mac);

  const auto rfc_key = bytes_of("12345678901234567890");
  OtpParams sha1;
  sha1.hash = HashAlg::sha1;
  const char* hotp_values[] = {"755224", "287082", "359152", "969429", "338314",
                               "254676", "287922", "162583", "399871", "520489"};
  for (std::uint64_t c = 0; c < 10; ++c) expect(hotp(rfc_key, c, {}, sha1).digits == hotp_values[c]);

  OtpParams totp = sha1;
  totp.mode = OtpMode::totp;
  totp.digits = 8;
  const struct {
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
    expect(totp_counter(r.t, totp) == r.step);
    expect(hotp(rfc_key, r.step, {}, totp).digits == r.code);
  }
  const double elapsed = ms_since(start);
  std::ostringstream d;
  d << checked - mismatches << '/' << checked << " vectors, " << elapsed << " ms";
  return {mismatches == 0 && elapsed < 1000.0, d.str()};
}

Verdict reference_round_trip() {
  const auto start = Clock_::now();
  const auto key = test::fixed_key();
  const auto tpl = test::reference_template();
  test::FakeClock clock;
  AuthServer server({}, clock.clock());
  test::enroll_active(server, tpl, {}, "alice", clock.clock());

  // Every order crossed with every wildcard substitution, hashed directly.
  std::set<std::vector<ObservedPel>> accepted_seqs;
  std::size_t accepted = 0, tried = 0;
  std::vector<std::size_t> order{0, 1, 2};
  do {
    for (auto a : kAllLevels)
      for (auto b : kAllLevels)
        for (auto c : kAllLevels) {
          const Lv free[3] = {a, b, c};
          std::vector<ObservedPel> seq;
          for (std::size_t i = 0; i < 3; ++i) {
            const Pel& p = tpl[order[i]];
            const std::size_t slot = order[i];
            seq.push_back({p.chars, !p.att.level() ? free[slot] : *p.att.level(),
                           !p.rel.level() ? free[slot] : *p.rel.level()});
          }
          if (!accepted_seqs.insert(seq).second) continue;
          ++tried;
          const std::vector<Hpf> cand{hash_sequence(key, seq)};
          accepted += server.authenticate("ws1", "alice", cand).ok ? 1 : 0;
        }
  } while (std::next_permutation(order.begin(), order.end()));

  // Single mutations of accepted sequences.
  std::mt19937_64 rng(637);
  const std::vector<std::vector<ObservedPel>> pool(accepted_seqs.begin(), accepted_seqs.end());
  std::size_t mutants = 0, mutant_accepts = 0, throttled = 0;
  while (mutants < 1000) {
    auto seq = pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
    const auto at = std::uniform_int_distribution<std::size_t>(0, 2)(rng);
    auto& pel = seq[at];
    // find the template pel with these characters
    const Pel* source = nullptr;
    for (const auto& p : tpl.pels())
      if (p.chars == pel.chars) source = &p;
    if (rng() % 2 == 0) {
      auto cps = utf8::code_points(pel.chars);
      const auto ci = std::uniform_int_distribution<std::size_t>(0, cps.size() - 1)(rng);
      cps[ci] = cps[ci] == "x" ? "y" : "x";
      pel.chars = std::accumulate(cps.begin(), cps.end(), std::string{});
    } else {
      // change the constrained level of this pel
      const bool att_constrained = source->att.level().has_value();
      Lv& level = att_constrained ? pel.att : pel.rel;
      const Lv required = att_constrained ? *source->att.level() : *source->rel.level();
      do {
        level = kAllLevels[std::uniform_int_distribution<std::size_t>(0, 4)(rng)];
      } while (level == required);
    }
    ++mutants;
    const std::vector<Hpf> cand{hash_sequence(key, seq)};
    const auto result = server.authenticate("ws1", "alice", cand);
    mutant_accepts += result.ok ? 1 : 0;
    throttled += result.reason == RejectReason::throttled ? 1 : 0;
    clock.advance(61'000);  // keep the failure throttle out of the picture
  }
  const double elapsed = ms_since(start);
  std::ostringstream d;
  d << accepted << '/' << tried << " enumerated accepted, " << mutant_accepts << '/' << mutants
    << " mutants accepted, " << elapsed << " ms";
  return {tried == 750 && accepted == 750 && mutant_accepts == 0 && throttled == 0 && elapsed < 10000.0,
          d.str()};
}

// Exhaustive sweep of the server against the oracle. Templates have up to
// `max_pels` pels drawn from `alphabet` with requirements drawn from
// `levels` plus the wildcard; submissions are every sequence of up to
// `max_pels` observed pels over `alphabet` and `observed`.
std::pair<std::size_t, std::size_t> sweep(std::size_t max_pels, const std::vector<std::string>& alphabet,
                                          const std::vector<Lv>& levels, const std::vector<Lv>& observed,
                                          std::size_t& templates) {
  const auto key = test::fixed_key();
  std::vector<RequiredLevel> reqs{RequiredLevel::any()};
  for (auto l : levels) reqs.emplace_back(l);
  std::vector<Pel> pel_choices;
  for (const auto& c : alphabet)
    for (auto a : reqs)
      for (auto r : reqs) pel_choices.push_back({c, a, r});
  std::vector<ObservedPel> obs_choices;
  for (const auto& c : alphabet)
    for (auto a : observed)
      for (auto r : observed) obs_choices.push_back({c, a, r});

  // submissions and their hashes, computed once
  std::vector<std::vector<ObservedPel>> subs;
  std::function<void(std::vector<ObservedPel>&)> grow = [&](std::vector<ObservedPel>& cur) {
    if (!cur.empty()) subs.push_back(cur);
    if (cur.size() == max_pels) return;
    for (const auto& o : obs_choices) {
      cur.push_back(o);
      grow(cur);
      cur.pop_back();
    }
  };
  std::vector<ObservedPel> cur;
  grow(cur);
  std::vector<std::vector<Hpf>> sub_hpfs;
  for (const auto& s : subs) sub_hpfs.push_back({hash_sequence(key, s)});

  ServerConfig config;
  config.max_failures = std::numeric_limits<std::size_t>::max();
  std::size_t checks = 0, discrepancies = 0;
  std::vector<Pel> tpl;
  std::function<void()> each = [&]() {
    if (!tpl.empty()) {
      // neighbours with one pattern would type as a single pel
      bool adjacent_identical = false;
      for (std::size_t i = 1; i < tpl.size(); ++i) adjacent_identical |= tpl[i].att == tpl[i - 1].att && tpl[i].rel == tpl[i - 1].rel;
      if (!adjacent_identical) {
        ++templates;
        AuthServer server(config);
        server.provision({"ws1", key});
        enroll_direct(server, PelTemplate(tpl), "u");
        for (std::size_t s = 0; s < subs.size(); ++s) {
          ++checks;
          const bool got = server.authenticate("ws1", "u", sub_hpfs[s]).ok;
          if (got != oracle_accepts(tpl, subs[s])) ++discrepancies;
        }
      }
    }
    if (tpl.size() == max_pels) return;
    for (const auto& p : pel_choices) {
      tpl.push_back(p);
      each();
      tpl.pop_back();
    }
  };
  each();
  return {checks, discrepancies};
}

Verdict brute_force_equivalence() {
  const auto start = Clock_::now();
  std::size_t templates_a = 0, templates_b = 0;
  // two characters, two levels, up to three pels
  const auto [checks_a, bad_a] = sweep(3, {"a", "b"}, {Lv::S, Lv::H}, {Lv::S, Lv::H}, templates_a);
  // wildcards against every observable level, up to two pels
  const auto [checks_b, bad_b] =
      sweep(2, {"a", "b"}, {Lv::S, Lv::H}, {kAllLevels.begin(), kAllLevels.end()}, templates_b);
  std::ostringstream d;
  d << templates_a << " templates x submissions = " << checks_a << " checks (" << bad_a
    << " discrepancies); all-level sweep " << templates_b << " templates, " << checks_b << " checks ("
    << bad_b << " discrepancies), " << ms_since(start) << " ms";
  return {bad_a == 0 && bad_b == 0 && checks_a > 0 && checks_b > 0, d.str()};
}

Verdict pool_combinatorics() {
  const auto key = test::fixed_key();
  std::mt19937_64 rng(639);
  const std::vector<std::string> chars{"q", "we", "r", "ty", "12", "3", "ä", "zz"};
  std::size_t formula_misses = 0, stats_misses = 0;
  for (int t = 0; t < 100; ++t) {
    const auto n = std::uniform_int_distribution<std::size_t>(1, 4)(rng);
    auto picks = chars;
    std::shuffle(picks.begin(), picks.end(), rng);
    std::vector<Pel> pels;
    analysis::BigInt expected = 1;
    for (std::size_t i = 0; i < n; ++i) {
      auto req = [&] {
        const auto v = std::uniform_int_distribution<int>(0, 5)(rng);
        return v == 5 ? RequiredLevel::any() : RequiredLevel(kAllLevels[static_cast<std::size_t>(v)]);
      };
      Pel p{picks[i], req(), req()};
      // keep enumeration small: at most one wildcard per pel on large templates
      if (n == 4 && !p.att.level() && !p.rel.level()) p.rel = Lv::N;
      if (i > 0 && p.att == pels.back().att && p.rel == pels.back().rel)
        p.att = pels.back().att == RequiredLevel(Lv::S) ? RequiredLevel(Lv::H) : RequiredLevel(Lv::S);
      pels.push_back(p);
      expected *= i + 1;
      if (!p.att.level()) expected *= 5;
      if (!p.rel.level()) expected *= 5;
    }
    const PelTemplate tpl(pels);
    const auto pool = hpf_pool(key, tpl);
    formula_misses += analysis::BigInt(pool.size()) == expected ? 0 : 1;
    stats_misses += analysis::pool_stats(tpl).pool_size == pool.size() ? 0 : 1;
  }
  const double loss = analysis::pool_stats(test::reference_template()).entropy_loss_bits;
  const double loss_error = std::abs(loss - std::log2(6.0));
  std::ostringstream d;
  d << "100 templates, formula mismatches " << formula_misses << ", pool_stats mismatches " << stats_misses
    << ", |entropy_loss(3) - log2 6| = " << loss_error;
  return {formula_misses == 0 && stats_misses == 0 && loss_error <= 1e-12, d.str()};
}

Verdict otp_replay() {
  const auto key = test::fixed_key();
  const auto tpl = test::reference_template();
  const auto mode = parse_mode("hotp");
  test::FakeClock clock;
  AuthServer server({}, clock.clock());
  test::enroll_active(server, tpl, mode, "alice", clock.clock());
  std::vector<ObservedPel> seq;
  for (const auto& p : tpl.pels()) seq.push_back(pel_variants(p).front());
  auto code_at = [&](std::uint64_t c) {
    return std::vector<Hpf>{compute_hpf(key, seq, mode, c, clock.clock()() / 1000)};
  };

  std::uint64_t counter = server.user("alice")->counter;
  std::vector<std::vector<Hpf>> used;
  std::mt19937_64 rng(640);
  std::size_t fresh_accepts = 0, replays = 0, replay_accepts = 0;
  for (int login = 0; login < 100; ++login) {
    const auto code = code_at(counter++);
    fresh_accepts += server.authenticate("ws1", "alice", code).ok ? 1 : 0;
    used.push_back(code);
    clock.advance(61'000);
    // replay one earlier code, and the one just used
    for (const auto& old : {used[std::uniform_int_distribution<std::size_t>(0, used.size() - 1)(rng)], code}) {
      ++replays;
      replay_accepts += server.authenticate("ws1", "alice", old).ok ? 1 : 0;
      clock.advance(61'000);
    }
  }
  // the whole history once more at the end
  for (const auto& old : used) {
    ++replays;
    replay_accepts += server.authenticate("ws1", "alice", old).ok ? 1 : 0;
    clock.advance(61'000);
  }

  // desynchronisation: the client skips s codes before logging in
  std::size_t recovered = 0;
  for (std::uint64_t s = 1; s <= 4; ++s) {
    counter += s;
    recovered += server.authenticate("ws1", "alice", code_at(counter++)).ok ? 1 : 0;
    clock.advance(61'000);
  }
  std::ostringstream d;
  d << fresh_accepts << "/100 logins accepted, " << replay_accepts << '/' << replays
    << " replays accepted, desync 1..4 recovered " << recovered << "/4";
  return {fresh_accepts == 100 && replay_accepts == 0 && recovered == 4, d.str()};
}

Verdict keyspace_claim() {
  std::size_t misses = 0;
  analysis::BigInt factor = 1;
  for (std::uint64_t length = 1; length <= 64; ++length) {
    factor *= 25;
    const auto with = analysis::keyspace(94, length, true).count;
    const auto without = analysis::keyspace(94, length, false).count;
    misses += (with == without * factor && with % without == 0 && with / without == factor) ? 0 : 1;
  }
  const auto single = analysis::keyspace(94, 1, true).count;
  std::ostringstream d;
  d << "ratio exact for lengths 1..64 (" << misses << " misses), (94,1) -> " << single;
  return {misses == 0 && single == 2350, d.str()};
}

Verdict segmentation_robustness() {
  const auto key = test::fixed_key();
  const auto tpl = test::reference_template();
  test::FakeClock clock;
  AuthServer server({}, clock.clock());
  test::enroll_active(server, tpl, {}, "alice", clock.clock());

  std::size_t flicker_ok = 0, max_flicker = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    AuthSession session("alice", key, {});
    const auto candidates = test::run_fixture(session, test::flicker_fixture(seed));
    max_flicker = std::max(max_flicker, candidates.size());
    if (candidates.size() <= 2 && server.authenticate("ws1", "alice", candidates).ok) ++flicker_ok;
  }

  std::size_t clean_ok = 0;
  std::mt19937_64 rng(642);
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    std::vector<std::size_t> order{0, 1, 2};
    std::shuffle(order.begin(), order.end(), rng);
    const auto pels = cli::render_order(tpl, order, rng);
    AuthSession session("alice", key, {});
    const auto candidates = test::run_fixture(session, test::clean_fixture(pels, seed, 2.0));
    if (candidates.size() == 1 && server.authenticate("ws1", "alice", candidates).ok) ++clean_ok;
  }
  std::ostringstream d;
  d << "flicker traces accepted with <= 2 candidates " << flicker_ok << "/20 (max " << max_flicker
    << "), clean traces with exactly 1 candidate and accepted " << clean_ok << "/20";
  return {flicker_ok == 20 && clean_ok == 20, d.str()};
}

struct Spawned {
  pid_t pid = -1;
  FILE* out = nullptr;
};

Spawned spawn_server(const std::string& keys, const std::string& store) {
  int fds[2];
  if (pipe(fds) != 0) fail(Errc::io, "pipe failed");
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, fds[1], STDOUT_FILENO);
  posix_spawn_file_actions_addclose(&actions, fds[0]);
  posix_spawn_file_actions_addclose(&actions, fds[1]);
  std::vector<std::string> args{EEGPASS_TOOL, "serve", "--keys", keys, "--store", store, "--port", "0"};
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  Spawned s;
  const int rc = posix_spawn(&s.pid, EEGPASS_TOOL, &actions, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  close(fds[1]);
  if (rc != 0) {
    close(fds[0]);
    fail(Errc::io, "could not start the server binary");
  }
  s.out = fdopen(fds[0], "r");
  return s;
}

Verdict end_to_end_latency() {
  test::TempDir dir;
  const auto key_file = (dir / "ws1.key").string();
  const auto keys = (dir / "keys.json").string();
  const auto store = (dir / "store.json").string();
  auto quiet_run = [](std::vector<std::string> args) {
    args.insert(args.begin(), "eegpass");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    return cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  };
  if (quiet_run({"keygen", "--client", "ws1", "--out", key_file, "--keys", keys}) != 0 ||
      quiet_run({"enroll", "--user", "alice", "--template", test::kReferenceTemplate, "--store", store, "--keys",
                 keys, "--client", "ws1", "--key-file", key_file}) != 0)
    return {false, "setup failed"};

  auto server = spawn_server(keys, store);
  std::string endpoint;
  char line[256];
  if (server.out && std::fgets(line, sizeof line, server.out)) {
    std::string text(line);
    const std::string prefix = "listening on ";
    if (text.rfind(prefix, 0) == 0) endpoint = text.substr(prefix.size(), text.find_last_not_of("\r\n") + 1 - prefix.size());
  }
  std::vector<double> times;
  std::size_t accepted = 0;
  if (!endpoint.empty()) {
    for (int i = 0; i < 20; ++i) {
      cli::LoginOptions opts;
      opts.user = "alice";
      opts.password = "qwerty123";
      opts.schedule = "900:90/50/0,900:50/90/0,1500:90/50/0";
      opts.cadence_ms = 300;
      opts.server = endpoint;
      opts.key_file = key_file;
      opts.seed = static_cast<std::uint64_t>(i + 1);
      std::ostringstream sink;
      const auto start = Clock_::now();
      const auto outcome = cli::login(opts, sink);
      times.push_back(ms_since(start));
      accepted += outcome.result.ok ? 1 : 0;
    }
  }
  kill(server.pid, SIGTERM);
  int status = 0;
  waitpid(server.pid, &status, 0);
  if (server.out) std::fclose(server.out);
  if (endpoint.empty()) return {false, "server did not report its port"};

  std::sort(times.begin(), times.end());
  std::ostringstream d;
  d << "pool 750, " << accepted << "/20 accepted, median " << times[times.size() / 2] << " ms, max "
    << times.back() << " ms";
  return {accepted == 20 && times.back() < 50.0, d.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria{
      {"rfc-oracle-suite", rfc_suite},
      {"reference-template-round-trip", reference_round_trip},
      {"brute-force-equivalence", brute_force_equivalence},
      {"pool-combinatorics", pool_combinatorics},
      {"otp-replay", otp_replay},
      {"keyspace-claim", keyspace_claim},
      {"segmentation-robustness", segmentation_robustness},
      {"end-to-end-latency", end_to_end_latency},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += v.pass ? 0 : 1;
    std::cout << (v.pass ? "PASS " : "FAIL ") << name << ": " << v.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}

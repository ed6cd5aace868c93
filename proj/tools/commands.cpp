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

#include "commands.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <csignal>
#include <iomanip>
#include <iostream>
#include <memory>
#include <numeric>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "eegpass/bridge.hpp"
#include "eegpass/error.hpp"
#include "eegpass/service.hpp"
#include "eegpass/store.hpp"
#include "eegpass/utf8.hpp"

namespace eegpass::cli {

namespace {

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop = true; }

void install_signal_handlers() {
  g_stop = false;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
}

bool same_pattern(const ObservedPel& a, const ObservedPel& b) {
  return a.att == b.att && a.rel == b.rel;
}

std::string password_of(const std::vector<ObservedPel>& pels) {
  std::string out;
  for (const auto& p : pels) out += p.chars;
  return out;
}

// Orders used for the permuted confirmations: every non-identity order in a
// seeded shuffle; the identity alone when there is a single pel.
std::vector<std::vector<std::size_t>> permuted_orders(std::size_t n, std::mt19937_64& rng) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::vector<std::size_t>> out;
  while (std::next_permutation(order.begin(), order.end())) out.push_back(order);
  if (out.empty()) out.push_back(order);
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

std::vector<Hpf> confirmation_candidates(const PelTemplate& tpl,
                                         const std::vector<std::size_t>& order,
                                         const std::string& user, const SecretKey& key,
                                         const ModeSpec& mode, std::uint64_t counter,
                                         std::mt19937_64& rng) {
  const auto pels = render_order(tpl, order, rng);
  const auto trace = sim::generate(sim::schedule_for(pels), sim::kDefaultSamplePeriodMs, rng());
  AuthSession session(user, key, mode);
  session.set_counter(counter);
  play(session, trace, password_of(pels));
  return session.candidates();
}

void print_pool(const analysis::PoolStats& stats, std::ostream& out) {
  out << "orders " << stats.orders << '\n'
      << "expansions " << stats.expansions << '\n'
      << "pool " << stats.pool_size << '\n'
      << "entropy_loss_bits " << std::fixed << std::setprecision(3) << stats.entropy_loss_bits
      << std::defaultfloat << '\n';
  if (!stats.unconstrained_pels.empty()) {
    out << "unconstrained pels";
    for (auto i : stats.unconstrained_pels) out << ' ' << i + 1;
    out << " (no state entropy)\n";
  }
}

// Confirms until active: linear orders first, then permuted ones. `confirm`
// returns whether the server verified the submission and whether the record
// became active.
template <typename Confirm>
EnrollOutcome run_confirmations(const PelTemplate& tpl, const std::string& user,
                                const SecretKey& key, const ModeSpec& mode,
                                std::uint64_t seed, Confirm&& confirm) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> linear(tpl.size());
  std::iota(linear.begin(), linear.end(), std::size_t{0});
  const auto permuted = permuted_orders(tpl.size(), rng);

  EnrollOutcome outcome;
  constexpr int kEach = 2;
  for (int i = 0; i < 2 * kEach && !outcome.active; ++i) {
    const bool is_linear = i < kEach;
    const auto& order = is_linear ? linear : permuted[(i - kEach) % permuted.size()];
    const auto candidates =
        confirmation_candidates(tpl, order, user, key, mode, outcome.counter, rng);
    const auto kind = is_linear ? OrderKind::linear : OrderKind::permuted;
    const auto [accepted, active] = confirm(candidates, kind);
    if (!accepted) fail(Errc::enrolment_mismatch, "confirmation was not verified by the server");
    ++(is_linear ? outcome.linear : outcome.permuted);
    if (mode.mode == AuthMode::hotp) ++outcome.counter;
    outcome.active = active;
  }
  if (!outcome.active) fail(Errc::state, "enrolment did not become active");
  return outcome;
}

std::string describe(const AuthResult& r) {
  return r.ok ? "Accept" : "Reject: " + std::string(to_string(r.reason));
}

std::string rational_text(const analysis::Rational& r) {
  const auto num = boost::multiprecision::numerator(r);
  const auto den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

}  // namespace

std::vector<ObservedPel> render_order(const PelTemplate& tpl, const std::vector<std::size_t>& order,
                                      std::mt19937_64& rng) {
  if (order.size() != tpl.size()) fail(Errc::input, "order does not cover the template");
  std::vector<ObservedPel> out;
  for (std::size_t i = 0; i < order.size(); ++i) {
    auto options = pel_variants(tpl[order.at(i)]);
    std::optional<ObservedPel> next_fixed;
    if (i + 1 < order.size()) {
      auto next = pel_variants(tpl[order[i + 1]]);
      if (next.size() == 1) next_fixed = next.front();
    }
    std::erase_if(options, [&](const ObservedPel& p) {
      return (!out.empty() && same_pattern(p, out.back())) ||
             (next_fixed && same_pattern(p, *next_fixed));
    });
    if (options.empty())
      fail(Errc::input, "neighbouring pels share a fixed pattern and would type as one");
    out.push_back(options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)]);
  }
  return out;
}

void play(AuthSession& session, const sim::Trace& trace, std::string_view password,
          std::int64_t cadence_ms) {
  if (trace.samples.empty()) fail(Errc::signal_gap, "trace has no samples");
  for (const auto& s : trace.samples) session.feed(s);
  for (const auto& k : sim::keystrokes(password, cadence_ms, trace.samples.front().t_ms))
    session.key(k);
  session.finish();
}

EnrollOutcome enroll(const EnrollOptions& options, std::ostream& out) {
  const auto tpl = parse_template(options.template_text);
  const auto mode = parse_mode(options.mode);
  if (options.server.has_value() == options.store.has_value())
    fail(Errc::input, "enroll needs exactly one of --server and --store");

  EnrollOutcome outcome;
  if (options.server) {
    if (!options.key_file) fail(Errc::input, "client-side enrolment needs --key-file");
    const auto identity = load_identity(*options.key_file);
    const auto endpoint = wire::Endpoint::parse(*options.server);
    const auto session = enroll_remote(endpoint, identity, options.user, mode, tpl);
    outcome = run_confirmations(
        tpl, options.user, identity.key, mode, options.seed,
        [&](const std::vector<Hpf>& candidates, OrderKind kind) {
          const auto reply = confirm_remote(endpoint, session, candidates, kind);
          return std::pair{reply.accepted, reply.status == "active"};
        });
  } else {
    if (!options.keys) fail(Errc::input, "server-side enrolment needs --keys");
    const auto credentials = load_key_file(*options.keys);
    AuthServer server;
    for (const auto& c : credentials) server.provision(c);
    if (std::filesystem::exists(*options.store)) server.restore(load_store(*options.store));

    std::string client_id;
    if (options.client) client_id = *options.client;
    else if (options.key_file) client_id = load_identity(*options.key_file).client_id;
    else if (credentials.size() == 1) client_id = credentials.front().client_id;
    else fail(Errc::input, "several clients in the key database; pick one with --client");
    const auto it = std::find_if(credentials.begin(), credentials.end(),
                                 [&](const ClientCredential& c) { return c.client_id == client_id; });
    if (it == credentials.end()) fail(Errc::unknown_principal, "no key for client " + client_id);

    const auto session = server.enroll_begin(client_id, options.user, mode, tpl);
    outcome = run_confirmations(tpl, options.user, it->key, mode, options.seed,
                                [&](const std::vector<Hpf>& candidates, OrderKind kind) {
                                  const auto p = server.enroll_confirm(session, candidates, kind);
                                  return std::pair{p.accepted, p.active};
                                });
    save_store(server.state(), *options.store);
  }

  if (mode.mode == AuthMode::hotp && options.key_file)
    CounterFile::beside(*options.key_file).set(options.user, outcome.counter);

  outcome.stats = analysis::pool_stats(tpl);
  out << "enrolled " << options.user << " (" << format_mode(mode) << "), confirmations linear="
      << outcome.linear << " permuted=" << outcome.permuted << '\n';
  print_pool(outcome.stats, out);
  return outcome;
}

LoginOutcome login(const LoginOptions& options, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const auto identity = load_identity(options.key_file);
  const auto endpoint = wire::Endpoint::parse(options.server);
  auto counters = CounterFile::beside(options.key_file);

  LoginOutcome outcome;
  if (options.source == "bridge") {
    BridgeOptions bo;
    bo.user_id = options.user;
    bo.client_id = identity.client_id;
    bo.key = identity.key;
    bo.server = endpoint;
    bo.counter_file = counters.path();
    bo.port = options.bridge_port;
    bo.sample_period_ms = options.period_ms;
    auto source = std::make_shared<SteerableSource>(50, 50, 3.0, options.seed);
    install_signal_handlers();
    Bridge bridge(bo, source);
    out << "bridge listening on 127.0.0.1:" << bridge.port() << std::endl;
    while (bridge.attempts() == 0 && !g_stop)
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    const auto result = bridge.last_result();
    outcome.result = result.value_or(false) ? AuthResult::accept()
                                            : AuthResult::reject(RejectReason::rejected);
    out << describe(outcome.result) << '\n';
    return outcome;
  }

  sim::Trace trace;
  if (options.source == "synthetic") {
    if (!options.schedule) fail(Errc::input, "the synthetic source needs --schedule");
    trace = sim::generate(sim::parse_schedule(*options.schedule), options.period_ms, options.seed);
  } else if (options.source == "trace") {
    if (!options.trace) fail(Errc::input, "the trace source needs --trace");
    trace = sim::load_trace(*options.trace);
  } else {
    fail(Errc::input, "unknown source '" + options.source + "'");
  }

  ModeSpec mode;
  try {
    mode = fetch_mode(endpoint, identity.client_id, options.user);
  } catch (const Error& e) {
    // the server's answer, not a local failure
    if (e.code() != Errc::unknown_principal) throw;
    outcome.result = AuthResult::reject(RejectReason::unknown_principal);
    out << describe(outcome.result) << " (candidates=0)\n";
    return outcome;
  }
  AuthSession session(options.user, identity.key, mode);
  session.set_counter(counters.get(options.user));
  play(session, trace, options.password, options.cadence_ms);
  outcome.candidates = session.candidates().size();
  outcome.result = run_protocol(endpoint, session, identity.client_id, &counters);
  outcome.decision_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  out << describe(outcome.result) << " (candidates=" << outcome.candidates << ")\n";
  return outcome;
}

void analyze(const AnalyzeOptions& options, std::ostream& out) {
  if (options.format != "text" && options.format != "records")
    fail(Errc::input, "format must be text or records");
  const auto tpl = parse_template(options.template_text);
  const auto attacker = analysis::parse_attacker(options.attacker);
  const auto stats = analysis::pool_stats(tpl);
  const auto length = utf8::length(tpl.password());
  const auto plain = analysis::keyspace(attacker.alphabet_size, length, false);
  const auto states = analysis::keyspace(attacker.alphabet_size, length, true);
  const auto guess = analysis::guess_success(tpl, attacker, options.seed, options.runs);

  if (options.format == "records") {
    using nlohmann::json;
    json unconstrained = json::array();
    for (auto i : stats.unconstrained_pels) unconstrained.push_back(i + 1);
    out << json{{"type", "POOL"},
                {"template", format_template(tpl)},
                {"pels", tpl.size()},
                {"orders", stats.orders.str()},
                {"expansions", stats.expansions.str()},
                {"pool", stats.pool_size.str()},
                {"entropy_loss_bits", stats.entropy_loss_bits},
                {"unconstrained_pels", unconstrained}}
               .dump()
        << '\n';
    out << json{{"type", "KEYSPACE"},
                {"alphabet", attacker.alphabet_size},
                {"length", length},
                {"plain", plain.count.str()},
                {"plain_bits", plain.bits},
                {"with_states", states.count.str()},
                {"with_states_bits", states.bits}}
               .dump()
        << '\n';
    json attack{{"type", "ATTACK"},
                {"attacker", analysis::format_attacker(attacker)},
                {"space", guess.space.size.str()},
                {"accepted", guess.space.accepted.str()},
                {"probability", guess.probability},
                {"method", guess.monte_carlo ? "monte-carlo" : "exact"}};
    if (guess.exact) attack["exact"] = rational_text(*guess.exact);
    if (guess.monte_carlo) attack["runs"] = guess.runs;
    out << attack.dump() << '\n';
    return;
  }

  auto row = [&](std::string_view name) -> std::ostream& {
    return out << std::left << std::setw(20) << name;
  };
  row("template") << format_template(tpl) << '\n';
  row("pels") << tpl.size() << '\n';
  row("orders") << stats.orders << '\n';
  row("expansions") << stats.expansions << '\n';
  row("pool") << stats.pool_size << '\n';
  row("entropy loss") << std::fixed << std::setprecision(3) << stats.entropy_loss_bits
                      << std::defaultfloat << " bits\n";
  row("unconstrained pels");
  if (stats.unconstrained_pels.empty()) out << "none";
  for (auto i : stats.unconstrained_pels) out << i + 1 << ' ';
  out << '\n';
  row("keyspace") << attacker.alphabet_size << '^' << length << " = " << plain.count << " ("
                  << std::fixed << std::setprecision(1) << plain.bits << " bits)\n";
  row("with states") << attacker.alphabet_size * analysis::kStatesPerSlot << '^' << length
                     << " = " << states.count << " (" << states.bits << " bits)\n"
                     << std::defaultfloat;
  row("attacker") << analysis::format_attacker(attacker) << '\n';
  row("attack space") << guess.space.size << '\n';
  row("accepted") << guess.space.accepted << '\n';
  row("success") << std::setprecision(6) << guess.probability;
  if (guess.monte_carlo) out << " (Monte Carlo, " << guess.runs << " runs, seed " << options.seed << ')';
  else out << " (exact)";
  out << '\n';
  if (guess.exact) row("exact") << rational_text(*guess.exact) << '\n';
}

void simulate(const SimulateOptions& options) {
  auto trace = sim::generate(sim::parse_schedule(options.schedule), options.period_ms, options.seed);
  if (!options.label.empty()) trace.label = options.label;
  sim::save_trace(trace, options.out);
}

void serve(const ServeOptions& options, std::ostream& out) {
  AuthServer server;
  for (auto& c : load_key_file(options.keys)) server.provision(std::move(c));
  if (std::filesystem::exists(options.store)) server.restore(load_store(options.store));
  else save_store(server.state(), options.store);

  AuthService service(server, options.store);
  wire::Listener listener(options.host, options.port);
  install_signal_handlers();
  out << "listening on " << options.host << ':' << listener.port() << std::endl;
  service.serve(listener, g_stop);
  out << "stopped" << std::endl;
}

void keygen(const KeygenOptions& options, std::ostream& out) {
  if (options.client.empty() || options.client.find(':') != std::string::npos)
    fail(Errc::input, "client id must be non-empty and contain no ':'");
  const ClientCredential credential{options.client, SecretKey::generate()};
  if (options.keys) {
    std::vector<ClientCredential> all;
    if (std::filesystem::exists(*options.keys)) all = load_key_file(*options.keys);
    for (const auto& c : all)
      if (c.client_id == options.client) fail(Errc::input, "client " + options.client + " already has a key");
    all.push_back(credential);
    save_key_file(all, *options.keys);
  }
  save_key_file(std::span(&credential, 1), options.out);
  out << "key for " << options.client << " written to " << options.out.string() << '\n';
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"EEGPass two-factor authentication", "eegpass"};
  app.require_subcommand(1);

  ServeOptions serve_opts;
  auto* serve_cmd = app.add_subcommand("serve", "Run the authentication server");
  serve_cmd->add_option("--keys", serve_opts.keys, "Client key database")->required();
  serve_cmd->add_option("--store", serve_opts.store, "User record store")->required();
  serve_cmd->add_option("--port", serve_opts.port, "TCP port, 0 for any");
  serve_cmd->add_option("--host", serve_opts.host, "Listen address");

  EnrollOptions enroll_opts;
  auto* enroll_cmd = app.add_subcommand("enroll", "Enrol a user and confirm 2 linear + 2 permuted entries");
  enroll_cmd->add_option("--user", enroll_opts.user)->required();
  enroll_cmd->add_option("--template", enroll_opts.template_text, "e.g. [[qwe,H,0],[rty,0,H]]")->required();
  enroll_cmd->add_option("--mode", enroll_opts.mode, "static, hotp or totp[:k=v,...]");
  auto* srv = enroll_cmd->add_option("--server", enroll_opts.server, "Enrol through a running server");
  auto* sto = enroll_cmd->add_option("--store", enroll_opts.store, "Enrol directly into a store file");
  srv->excludes(sto);
  enroll_cmd->add_option("--key-file", enroll_opts.key_file, "Client key file");
  enroll_cmd->add_option("--keys", enroll_opts.keys, "Server key database (with --store)");
  enroll_cmd->add_option("--client", enroll_opts.client, "Client id (with --store)");
  enroll_cmd->add_option("--seed", enroll_opts.seed);

  LoginOptions login_opts;
  auto* login_cmd = app.add_subcommand("login", "Run one login attempt");
  login_cmd->add_option("--user", login_opts.user)->required();
  login_cmd->add_option("--password", login_opts.password);
  login_cmd->add_option("--schedule", login_opts.schedule, "duration:att/med/sd,...");
  login_cmd->add_option("--server", login_opts.server);
  login_cmd->add_option("--key-file", login_opts.key_file)->required();
  login_cmd->add_option("--source", login_opts.source)
      ->check(CLI::IsMember({"synthetic", "trace", "bridge"}));
  login_cmd->add_option("--trace", login_opts.trace, "CSV trace (with --source trace)");
  login_cmd->add_option("--seed", login_opts.seed);
  login_cmd->add_option("--cadence", login_opts.cadence_ms, "Milliseconds between keys");
  login_cmd->add_option("--period", login_opts.period_ms, "Sample period in milliseconds");
  login_cmd->add_option("--bridge-port", login_opts.bridge_port);

  AnalyzeOptions analyze_opts;
  auto* analyze_cmd = app.add_subcommand("analyze", "Security arithmetic for a template");
  analyze_cmd->add_option("--template", analyze_opts.template_text)->required();
  analyze_cmd->add_option("--attacker", analyze_opts.attacker,
                          "chars,segmentation,states,guesses=N,alphabet=N or none");
  analyze_cmd->add_option("--format", analyze_opts.format)->check(CLI::IsMember({"text", "records"}));
  analyze_cmd->add_option("--seed", analyze_opts.seed);
  analyze_cmd->add_option("--runs", analyze_opts.runs, "Monte Carlo runs");

  SimulateOptions simulate_opts;
  auto* simulate_cmd = app.add_subcommand("simulate", "Write a synthetic signal trace");
  simulate_cmd->add_option("--schedule", simulate_opts.schedule)->required();
  simulate_cmd->add_option("--out", simulate_opts.out)->required();
  simulate_cmd->add_option("--seed", simulate_opts.seed);
  simulate_cmd->add_option("--period", simulate_opts.period_ms);
  simulate_cmd->add_option("--label", simulate_opts.label);

  KeygenOptions keygen_opts;
  auto* keygen_cmd = app.add_subcommand("keygen", "Create a workstation key");
  keygen_cmd->add_option("--client", keygen_opts.client)->required();
  keygen_cmd->add_option("--out", keygen_opts.out, "Client key file")->required();
  keygen_cmd->add_option("--keys", keygen_opts.keys, "Server key database to extend");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (*serve_cmd) serve(serve_opts, out);
    else if (*enroll_cmd) enroll(enroll_opts, out);
    else if (*login_cmd) {
      if (login_opts.source != "bridge" && login_opts.password.empty())
        fail(Errc::input, "login needs --password");
      return login(login_opts, out).result.ok ? kExitAccept : kExitReject;
    } else if (*analyze_cmd) analyze(analyze_opts, out);
    else if (*simulate_cmd) simulate(simulate_opts);
    else if (*keygen_cmd) keygen(keygen_opts, out);
  } catch (const Error& e) {
    err << "error: " << to_string(e.code()) << ": " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }
  return 0;
}

}  // namespace eegpass::cli

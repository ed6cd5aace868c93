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

#include "eegpass/bridge.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "eegpass/error.hpp"

namespace eegpass {

using wire::Record;

SteerableSource::SteerableSource(int attention, int meditation, double noise_sd,
                                 std::uint64_t seed)
    : attention_(attention), meditation_(meditation), noise_sd_(noise_sd), rng_(seed) {
  steer(attention, meditation);
}

void SteerableSource::steer(int attention, int meditation) {
  if (attention < kSignalMin || attention > kSignalMax || meditation < kSignalMin ||
      meditation > kSignalMax)
    fail(Errc::range, "steering targets must lie in 0..100");
  std::lock_guard lock(mutex_);
  attention_ = attention;
  meditation_ = meditation;
}

SignalSample SteerableSource::sample(std::int64_t t_ms) {
  std::lock_guard lock(mutex_);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto draw = [&](int target) {
    const double noise = noise_sd_ > 0 ? noise_sd_ * gauss(rng_) : 0.0;
    return static_cast<int>(std::clamp<long>(std::lround(target + noise), kSignalMin, kSignalMax));
  };
  const int att = draw(attention_);
  const int med = draw(meditation_);
  return {t_ms, att, med};
}

TraceSource::TraceSource(sim::Trace trace) : trace_(std::move(trace)) {
  if (trace_.samples.empty()) fail(Errc::input, "trace is empty");
}

SignalSample TraceSource::sample(std::int64_t t_ms) {
  auto it = std::upper_bound(trace_.samples.begin(), trace_.samples.end(), t_ms,
                             [](std::int64_t t, const SignalSample& s) { return t < s.t_ms; });
  const auto& s = it == trace_.samples.begin() ? *it : *std::prev(it);
  return {t_ms, s.attention, s.meditation};
}

Bridge::Bridge(BridgeOptions options, std::shared_ptr<SignalSource> source)
    : options_(std::move(options)),
      source_(std::move(source)),
      listener_(options_.listen_host, options_.port) {
  if (!options_.key) fail(Errc::input, "bridge needs the workstation key");
  if (!source_) fail(Errc::input, "bridge needs a signal source");
  mode_ = fetch_mode(options_.server, options_.client_id, options_.user_id);
  new_session();
  accept_thread_ = std::thread([this] { accept_loop(); });
  source_thread_ = std::thread([this] { source_loop(); });
}

Bridge::~Bridge() {
  stop_ = true;
  accept_thread_.join();
  source_thread_.join();
  std::lock_guard lock(consoles_mutex_);
  for (auto& c : consoles_) {
    c.conn->socket().shutdown();
    c.reader.join();
  }
}

std::size_t Bridge::attempts() const {
  std::lock_guard lock(session_mutex_);
  return attempts_;
}

std::optional<bool> Bridge::last_result() const {
  std::lock_guard lock(session_mutex_);
  return last_result_;
}

std::int64_t Bridge::elapsed_ms() const {
  return std::chrono::duration_cast<std::chrono::milliseconds>(
             std::chrono::steady_clock::now() - origin_)
      .count();
}

void Bridge::new_session() {
  session_ = std::make_unique<AuthSession>(options_.user_id, *options_.key, mode_, options_.cfg);
  if (options_.counter_file && mode_.mode == AuthMode::hotp)
    session_->set_counter(CounterFile(*options_.counter_file).get(options_.user_id));
  origin_ = std::chrono::steady_clock::now();
  last_key_ms_ = -1;
  last_sample_ms_ = -1;
}

Record Bridge::session_state(std::string_view phase) const {
  return Record{{"type", "SESSION_STATE"}, {"phase", phase}, {"typed", session_->typed()}};
}

void Bridge::broadcast(const Record& record) {
  const auto line = wire::to_line(record);
  std::lock_guard lock(consoles_mutex_);
  for (auto& c : consoles_) {
    try {
      c.conn->write_line(line);
    } catch (const Error&) {
      c.conn->socket().shutdown();
    }
  }
}

void Bridge::accept_loop() {
  while (!stop_) {
    std::optional<wire::Socket> socket;
    try {
      socket = listener_.accept(100);
    } catch (const Error&) {
      continue;
    }
    if (!socket) continue;
    auto conn = std::make_shared<wire::LineConnection>(std::move(*socket));
    Record hello;
    {
      std::lock_guard lock(session_mutex_);
      hello = session_state("collecting");
    }
    try {
      conn->send(hello);
    } catch (const Error&) {
      continue;
    }
    std::lock_guard lock(consoles_mutex_);
    consoles_.push_back({conn, std::thread([this, conn] { console_loop(conn); })});
  }
}

void Bridge::source_loop() {
  auto next = std::chrono::steady_clock::now();
  while (!stop_) {
    Record levels;
    {
      std::lock_guard lock(session_mutex_);
      auto t = std::max(elapsed_ms(), last_sample_ms_ + 1);
      auto s = source_->sample(t);
      s.t_ms = t;
      last_sample_ms_ = t;
      session_->feed(s);
      const auto shown = session_->levels();
      levels = Record{{"type", "LEVELS"},
                      {"t_ms", s.t_ms},
                      {"attention", s.attention},
                      {"meditation", s.meditation},
                      {"att_level", std::string(1, to_char(*shown.att))},
                      {"rel_level", std::string(1, to_char(*shown.rel))}};
      auto near_any = [&](int value) {
        for (int edge : options_.cfg.band_edges)
          if (std::abs(value - edge) <= options_.cfg.hysteresis_margin) return true;
        return false;
      };
      levels["att_near_edge"] = near_any(s.attention);
      levels["rel_near_edge"] = near_any(s.meditation);
    }
    broadcast(levels);
    next += std::chrono::milliseconds(options_.sample_period_ms);
    while (!stop_ && std::chrono::steady_clock::now() < next)
      std::this_thread::sleep_for(std::chrono::milliseconds(
          std::min<std::int64_t>(options_.sample_period_ms, 20)));
  }
}

void Bridge::console_loop(std::shared_ptr<wire::LineConnection> conn) {
  try {
    while (!stop_) {
      if (!conn->poll(100)) continue;
      auto line = conn->read_line(1000);
      if (!line) return;
      Record record;
      try {
        record = wire::parse_record(*line, {"KEY", "FINISH", "STEER"},
                                    {"ch", "t_ms", "attention", "meditation"});
      } catch (const Error&) {
        conn->send({{"type", "SESSION_STATE"}, {"phase", "error"}, {"reason", "bad-request"}});
        continue;
      }
      try {
        handle(record);
      } catch (const std::exception&) {
        conn->send({{"type", "SESSION_STATE"}, {"phase", "error"}, {"reason", "bad-request"}});
      }
    }
  } catch (const Error&) {
    // console went away
  }
}

void Bridge::handle(const Record& record) {
  const auto type = record.at("type").get<std::string>();
  if (type == "STEER") {
    auto* steerable = dynamic_cast<SteerableSource*>(source_.get());
    if (steerable && record.contains("attention") && record.contains("meditation"))
      steerable->steer(record["attention"].get<int>(), record["meditation"].get<int>());
    return;
  }

  Record update;
  if (type == "KEY") {
    std::lock_guard lock(session_mutex_);
    if (!record.contains("ch") || !record["ch"].is_string()) return;
    // stamped on the bridge clock so keys and samples share one timeline
    const auto t = std::max(elapsed_ms(), last_key_ms_ + 1);
    last_key_ms_ = t;
    try {
      session_->key({record["ch"].get<std::string>(), t});
    } catch (const Error&) {
      return;
    }
    update = session_state("collecting");
  } else {  // FINISH
    std::unique_lock lock(session_mutex_);
    update = session_state("done");
    try {
      session_->finish();
      update["candidates"] = session_->candidates().size();
      std::optional<CounterFile> counters;
      if (options_.counter_file) counters.emplace(*options_.counter_file);
      const auto outcome = run_protocol(options_.server, *session_, options_.client_id,
                                        counters ? &*counters : nullptr);
      update["ok"] = outcome.ok;
      update["reason"] = to_string(outcome.reason);
      last_result_ = outcome.ok;
    } catch (const Error& e) {
      update["ok"] = false;
      update["reason"] = to_string(e.code());
      last_result_ = false;
    }
    ++attempts_;
    new_session();
  }
  broadcast(update);
}

}  // namespace eegpass

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

#include "eegpass/eeg_sim.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "eegpass/error.hpp"
#include "eegpass/utf8.hpp"

namespace eegpass::sim {

namespace {

template <typename T>
bool parse_number(std::string_view text, T& out) {
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc{} && ptr == end;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (;;) {
    const auto pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

Schedule parse_schedule(std::string_view text) {
  Schedule out;
  for (auto item : split(trim(text), ',')) {
    item = trim(item);
    const auto colon = item.find(':');
    if (colon == std::string_view::npos)
      fail(Errc::parse, "schedule segment needs duration:att/med/sd");
    const auto values = split(item.substr(colon + 1), '/');
    Segment seg;
    if (values.size() != 3 || !parse_number(item.substr(0, colon), seg.duration_ms) ||
        !parse_number(values[0], seg.attention) || !parse_number(values[1], seg.meditation))
      fail(Errc::parse, "malformed schedule segment '" + std::string(item) + "'");
    // from_chars for double is not available everywhere; strtod suffices here
    const std::string sd(values[2]);
    char* end = nullptr;
    seg.noise_sd = std::strtod(sd.c_str(), &end);
    if (sd.empty() || end != sd.c_str() + sd.size())
      fail(Errc::parse, "malformed noise in schedule segment '" + std::string(item) + "'");
    if (seg.duration_ms <= 0) fail(Errc::range, "schedule durations must be positive");
    if (seg.attention < kSignalMin || seg.attention > kSignalMax ||
        seg.meditation < kSignalMin || seg.meditation > kSignalMax)
      fail(Errc::range, "schedule targets must lie in 0..100");
    if (!(seg.noise_sd >= 0.0)) fail(Errc::range, "noise sd must be non-negative");
    out.push_back(seg);
  }
  return out;
}

std::string format_schedule(const Schedule& schedule) {
  std::ostringstream out;
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const auto& s = schedule[i];
    if (i) out << ',';
    out << s.duration_ms << ':' << s.attention << '/' << s.meditation << '/' << s.noise_sd;
  }
  return out.str();
}

Trace generate(const Schedule& schedule, std::int64_t sample_period_ms, std::uint64_t seed) {
  if (schedule.empty()) fail(Errc::input, "schedule is empty");
  if (sample_period_ms < 1) fail(Errc::input, "sample period must be at least 1 ms");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  auto draw = [&](int target, double sd) {
    const double noise = sd > 0.0 ? sd * gauss(rng) : 0.0;
    return static_cast<int>(
        std::clamp<long>(std::lround(target + noise), kSignalMin, kSignalMax));
  };

  Trace trace;
  trace.seed = seed;
  trace.label = "synthetic";
  std::int64_t start = 0;
  for (const auto& seg : schedule) {
    if (seg.duration_ms <= 0) fail(Errc::range, "schedule durations must be positive");
    for (std::int64_t t = start; t < start + seg.duration_ms; t += sample_period_ms) {
      const int att = draw(seg.attention, seg.noise_sd);
      const int med = draw(seg.meditation, seg.noise_sd);
      trace.samples.push_back({t, att, med});
    }
    start += seg.duration_ms;
  }
  return trace;
}

std::string to_csv(const Trace& trace) {
  std::ostringstream out;
  if (!trace.label.empty()) out << "# label=" << trace.label << '\n';
  out << "# seed=" << trace.seed << '\n';
  out << "t_ms,attention,meditation\n";
  for (const auto& s : trace.samples) out << s.t_ms << ',' << s.attention << ',' << s.meditation << '\n';
  return out.str();
}

Trace from_csv(std::string_view text) {
  Trace trace;
  bool header = false;
  std::size_t line_no = 0;
  for (auto line : split(text, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const auto where = "line " + std::to_string(line_no) + ": ";
    if (line.empty()) continue;
    if (line.front() == '#') {
      const auto body = trim(line.substr(1));
      if (body.starts_with("label=")) trace.label = std::string(body.substr(6));
      if (body.starts_with("seed=") && !parse_number(body.substr(5), trace.seed))
        fail(Errc::parse, where + "malformed seed");
      continue;
    }
    if (!header) {
      if (line != "t_ms,attention,meditation")
        fail(Errc::parse, where + "expected header t_ms,attention,meditation");
      header = true;
      continue;
    }
    const auto fields = split(line, ',');
    SignalSample s;
    if (fields.size() != 3 || !parse_number(fields[0], s.t_ms) ||
        !parse_number(fields[1], s.attention) || !parse_number(fields[2], s.meditation))
      fail(Errc::parse, where + "expected three integers");
    try {
      validate(s);
    } catch (const Error& e) {
      fail(Errc::range, where + e.what());
    }
    if (!trace.samples.empty() && s.t_ms <= trace.samples.back().t_ms)
      fail(Errc::parse, where + "timestamps must increase strictly");
    trace.samples.push_back(s);
  }
  if (!header) fail(Errc::parse, "trace has no header");
  return trace;
}

void save_trace(const Trace& trace, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(Errc::io, "cannot write " + path.string());
  out << to_csv(trace);
  if (!out.flush()) fail(Errc::io, "write to " + path.string() + " failed");
}

Trace load_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot read " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_csv(buffer.str());
}

void replay(const Trace& trace, const std::function<void(const SignalSample&)>& sink,
            Pacing pacing) {
  const auto start = std::chrono::steady_clock::now();
  const auto origin = trace.samples.empty() ? 0 : trace.samples.front().t_ms;
  for (const auto& s : trace.samples) {
    if (pacing == Pacing::real_time)
      std::this_thread::sleep_until(start + std::chrono::milliseconds(s.t_ms - origin));
    sink(s);
  }
}

int band_center(StateLevel level, const QuantizerConfig& cfg) {
  const auto i = static_cast<std::size_t>(index_of(level));
  const int lo = i == 0 ? kSignalMin : cfg.band_edges[i - 1];
  const int hi = i == 4 ? kSignalMax : cfg.band_edges[i];
  return (lo + hi) / 2;
}

Schedule schedule_for(const std::vector<ObservedPel>& pels, std::int64_t cadence_ms,
                      const QuantizerConfig& cfg) {
  Schedule out;
  for (const auto& pel : pels) {
    const auto chars = static_cast<std::int64_t>(utf8::length(pel.chars));
    out.push_back({chars * cadence_ms, band_center(pel.att, cfg), band_center(pel.rel, cfg), 0.0});
  }
  return out;
}

std::vector<KeyEvent> keystrokes(std::string_view text, std::int64_t cadence_ms,
                                 std::int64_t start_ms) {
  if (cadence_ms < 1) fail(Errc::input, "key cadence must be at least 1 ms");
  std::vector<KeyEvent> out;
  std::int64_t t = start_ms;
  for (auto& cp : utf8::code_points(text)) {
    out.push_back({std::move(cp), t});
    t += cadence_ms;
  }
  return out;
}

}  // namespace eegpass::sim

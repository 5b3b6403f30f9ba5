#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"
#include "uplink/timesync.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

using namespace uplink;

namespace {

std::vector<TrueEvent> uniform_events(std::size_t n, double duration_s, Rng& rng) {
  std::uniform_real_distribution<double> when(1e6, duration_s * 1e12 - 1e6);
  std::vector<TrueEvent> out(n);
  for (TrueEvent& e : out) e.ground_ps = std::llround(when(rng));
  std::sort(out.begin(), out.end(), [](const TrueEvent& a, const TrueEvent& b) { return a.ground_ps < b.ground_ps; });
  return out;
}

std::size_t count_channel(const TimeTagStream& s, std::uint16_t channel) {
  return static_cast<std::size_t>(
      std::count_if(s.tags.begin(), s.tags.end(), [&](const TimeTag& t) { return t.channel == channel; }));
}

}  // namespace

TEST_CASE("empty and exact streams") {
  Rng rng(1);
  StreamParams p;
  p.duration_s = 1.0;
  auto [g0, s0] = generate_streams({}, p, rng);
  CHECK(g0.tags.empty());
  CHECK(s0.tags.empty());

  p.clock.offset_ps = 1e9;
  const std::vector<TrueEvent> events{{1000}, {2000000, kPortPerpChannel}};
  auto [g, s] = generate_streams(events, p, rng);
  REQUIRE(s.tags.size() == 2);
  CHECK(s.tags[0].time_ps == 1000 + 1000000000);
  CHECK(s.tags[1].time_ps == 2000000 + 1000000000);
  CHECK(s.tags[1].channel == kPortPerpChannel);
  CHECK_NOTHROW(g.validate());
}

TEST_CASE("dark counts follow the configured Poisson rate") {
  Rng rng(150);
  StreamParams p;
  p.duration_s = 350.0;
  p.ground_dark_rate_hz = 150.0;
  auto [g, s] = generate_streams({}, p, rng);
  const double n = static_cast<double>(count_channel(g, kHeraldChannel));
  CHECK(std::abs(n - 52500.0) <= 3 * 229.0);

  // chi-square of 100 independent runs against the known mean
  p.duration_s = 10.0;
  p.ground_dark_rate_hz = 0.0;
  p.satellite_background_hz = 150.0;
  const double mean = 1500.0;
  double chi2 = 0.0;
  for (int run = 0; run < 100; ++run) {
    auto streams = generate_streams({}, p, rng);
    const double k = static_cast<double>(streams.second.tags.size());
    chi2 += (k - mean) * (k - mean) / mean;
  }
  CHECK(chi2 < 135.807);  // 99th percentile, 100 degrees of freedom
  CHECK(chi2 > 70.065);   // 1st percentile
}

TEST_CASE("clock fit") {
  std::vector<std::int64_t> g, s;
  for (int k = 0; k < 1000; ++k) {
    g.push_back(k * 100000000LL);
    s.push_back(k * 100000000LL + 1000000000LL);
  }
  const ClockFit fit = fit_clock(g, s);
  CHECK(std::abs(fit.clock.offset_ps - 1e9) <= 1.0);
  CHECK(std::abs(fit.clock.drift_ppm) < 1e-9);

  CHECK_THROWS_AS(fit_clock(std::span(g.data(), 1), std::span(s.data(), 1)), std::invalid_argument);
  CHECK_THROWS_AS(fit_clock(std::span(g.data(), 3), std::span(s.data(), 2)), std::invalid_argument);
  std::swap(g[3], g[4]);
  CHECK_THROWS_AS(fit_clock(g, s), std::invalid_argument);
}

TEST_CASE("clock fit recovers drift from a full pass of sync pulses") {
  Rng rng(10);
  StreamParams p;
  p.clock = {2.5e8, 10.0};
  p.jitter_ps = 100.0;
  p.duration_s = 350.0;
  p.sync_rate_hz = 1e4;
  auto [g, s] = generate_streams({}, p, rng);
  const auto gs = g.times_on(kSyncChannel);
  const auto ss = s.times_on(kSyncChannel);
  CHECK(gs.size() == 3500000);
  const ClockFit fit = fit_clock(gs, ss);
  CHECK(std::abs(fit.clock.drift_ppm - 10.0) < 0.01);
  CHECK(std::abs(fit.clock.offset_ps - 2.5e8) < 10.0);
  CHECK(fit.residual_rms_ps <= 3 * 100.0);
}

TEST_CASE("matching: nearest tag wins, tags used once") {
  TimeTagStream g{{{10000, kHeraldChannel}}, {}};
  TimeTagStream s{{{9400, kPortChannel}, {10200, kPortPerpChannel}}, {}};
  const CoincidenceResult r = match_coincidences(g, s, ClockModel{}, 3000);
  REQUIRE(r.matches.size() == 1);
  CHECK(r.matches[0].satellite_index == 1);
  CHECK(r.matches[0].delta_ps == 200.0);
  CHECK(r.unmatched_satellite == 1);

  TimeTagStream two{{{10000, kHeraldChannel}, {10500, kHeraldChannel}}, {}};
  TimeTagStream one{{{10400, kPortChannel}}, {}};
  const CoincidenceResult r2 = match_coincidences(two, one, ClockModel{}, 3000);
  REQUIRE(r2.matches.size() == 1);
  CHECK(r2.matches[0].ground_index == 1);

  // sync tags never take part
  TimeTagStream gs{{{10000, kSyncChannel}}, {}};
  TimeTagStream ss{{{10000, kSyncChannel}}, {}};
  CHECK(match_coincidences(gs, ss, ClockModel{}, 3000).matches.empty());

  TimeTagStream unsorted{{{5, kHeraldChannel}, {1, kHeraldChannel}}, {}};
  CHECK_THROWS_AS(match_coincidences(unsorted, one, ClockModel{}, 3000), std::invalid_argument);
}

TEST_CASE("single event with jitter and a recovered clock") {
  Rng rng(21);
  StreamParams p;
  p.clock = {5e6, -3.0};
  p.jitter_ps = 300.0;
  p.duration_s = 1.0;
  p.sync_rate_hz = 1e4;
  const std::vector<TrueEvent> events{{400000000000LL}};
  auto [g, s] = generate_streams(events, p, rng);
  const ClockFit fit = fit_clock(g.times_on(kSyncChannel), s.times_on(kSyncChannel));
  const CoincidenceResult r = match_coincidences(g, s, fit.clock, 3000);
  CHECK(r.matches.size() == 1);
}

TEST_CASE("property: 99% of true events match when the window is six sigma") {
  Rng rng(6);
  StreamParams p;
  p.clock = {1e7, 20.0};
  p.jitter_ps = 500.0;
  p.duration_s = 100.0;
  const auto events = uniform_events(10000, p.duration_s, rng);
  auto [g, s] = generate_streams(events, p, rng);
  const CoincidenceResult r = match_coincidences(g, s, p.clock, 3000);
  CHECK(r.matches.size() >= 9900);
}

TEST_CASE("property: matching is symmetric and monotone in the window") {
  Rng rng(31);
  StreamParams p;
  p.jitter_ps = 400.0;
  p.duration_s = 2.0;
  p.ground_dark_rate_hz = 2e4;
  p.satellite_background_hz = 2e4;
  const auto events = uniform_events(3000, p.duration_s, rng);
  auto [g, s] = generate_streams(events, p, rng);

  const CoincidenceResult forward = match_coincidences(g, s, ClockModel{}, 3000);
  const CoincidenceResult backward = match_coincidences(s, g, ClockModel{}, 3000);
  // swapping the streams swaps the indices and flips the sign of delta
  std::set<std::pair<std::size_t, std::size_t>> a, b;
  for (const Match& m : forward.matches) a.insert({m.ground_index, m.satellite_index});
  for (const Match& m : backward.matches) b.insert({m.satellite_index, m.ground_index});
  CHECK(a == b);
  std::map<std::size_t, double> delta;
  for (const Match& m : forward.matches) delta[m.ground_index] = m.delta_ps;
  for (const Match& m : backward.matches) CHECK(delta.at(m.satellite_index) == -m.delta_ps);

  std::size_t prev = 0;
  for (std::int64_t w : {0, 500, 1000, 2000, 3000, 6000, 20000}) {
    const std::size_t n = match_coincidences(g, s, ClockModel{}, w).matches.size();
    CHECK(n >= prev);
    prev = n;
  }

  // same input, same output
  const CoincidenceResult again = match_coincidences(g, s, ClockModel{}, 3000);
  REQUIRE(again.matches.size() == forward.matches.size());
  for (std::size_t i = 0; i < again.matches.size(); ++i) {
    CHECK(again.matches[i].satellite_index == forward.matches[i].satellite_index);
  }
}

TEST_CASE("accidental coincidences") {
  CHECK(accidental_rate(1e4, 500.0, 0.0) == 0.0);
  CHECK(std::abs(accidental_rate(0.26, 500.0, 3e-9) - 3.9e-7) < 1e-20);
  CHECK(std::abs(accidental_rate(1.0, 500.0, 3e-9) - 1.5e-6) < 1e-20);  // per trigger
  CHECK_THROWS_AS(accidental_rate(-1.0, 1.0, 1.0), std::invalid_argument);

  // Monte Carlo with scaled-up rates: signal off, heralds and background independent
  Rng rng(1500);
  StreamParams p;
  p.duration_s = 10.0;
  p.ground_dark_rate_hz = 2e4;
  p.satellite_background_hz = 2e5;
  auto [g, s] = generate_streams({}, p, rng);
  const double triggers = static_cast<double>(count_channel(g, kHeraldChannel));
  const double expected = triggers * accidental_rate(1.0, p.satellite_background_hz, 3e-9);
  const double found = static_cast<double>(match_coincidences(g, s, ClockModel{}, 3000).matches.size());
  CHECK(std::abs(found - expected) <= 3 * std::sqrt(expected));
}

TEST_CASE("tag dump round trip") {
  Rng rng(2);
  StreamParams p;
  p.clock = {123.5, 1.25};
  p.duration_s = 0.01;
  p.sync_rate_hz = 1e4;
  p.satellite_background_hz = 1e4;
  auto [g, s] = generate_streams({}, p, rng);
  std::stringstream io;
  write_tags(io, s);
  const TimeTagStream back = read_tags(io);
  CHECK(back.tags == s.tags);
  CHECK(back.clock.offset_ps == s.clock.offset_ps);
  CHECK(back.clock.drift_ppm == s.clock.drift_ppm);

  std::istringstream bad("1,200\n2;300\n");
  CHECK_THROWS_AS(read_tags(bad), std::invalid_argument);
  std::istringstream unsorted("1,300\n1,200\n");
  CHECK_THROWS_AS(read_tags(unsorted), std::invalid_argument);
}

TEST_CASE("stream and clock invariants") {
  TimeTagStream s{{}, {0.0, 150.0}};
  CHECK_THROWS_AS(s.validate(), std::invalid_argument);
  const ClockModel c{1e6, 12.0};
  const ClockModel inv = c.inverse();
  for (double t : {0.0, 1e9, 3.5e14}) CHECK(std::abs(inv.to_satellite(c.to_satellite(t)) - t) < 1.0);
}

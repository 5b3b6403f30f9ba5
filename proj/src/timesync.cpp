#include "uplink/timesync.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>

namespace uplink {

ClockModel ClockModel::inverse() const {
  const double scale = 1.0 + drift_ppm * 1e-6;
  return {-offset_ps / scale, (1.0 / scale - 1.0) * 1e6};
}

void TimeTagStream::validate() const {
  if (!std::is_sorted(tags.begin(), tags.end(),
                      [](const TimeTag& a, const TimeTag& b) { return a.time_ps < b.time_ps; })) {
    throw std::invalid_argument("TimeTagStream: tags are not sorted");
  }
  if (!(std::abs(clock.drift_ppm) < 100.0)) throw std::invalid_argument("TimeTagStream: |drift| must be < 100 ppm");
}

std::vector<std::int64_t> TimeTagStream::times_on(std::uint16_t channel) const {
  std::vector<std::int64_t> out;
  for (const TimeTag& t : tags) {
    if (t.channel == channel) out.push_back(t.time_ps);
  }
  return out;
}

namespace {

constexpr double kPsPerS = 1e12;

void add_poisson(std::vector<TimeTag>& tags, double rate_hz, double start_ps, double span_ps,
                 std::span<const std::uint16_t> channels, Rng& rng) {
  if (rate_hz <= 0 || span_ps <= 0) return;
  std::poisson_distribution<long long> count(rate_hz * span_ps / kPsPerS);
  std::uniform_real_distribution<double> when(start_ps, start_ps + span_ps);
  std::uniform_int_distribution<std::size_t> pick(0, channels.size() - 1);
  const long long n = count(rng);
  for (long long k = 0; k < n; ++k) {
    tags.push_back({std::llround(when(rng)), channels[pick(rng)]});
  }
}

void sort_tags(std::vector<TimeTag>& tags) {
  std::sort(tags.begin(), tags.end(),
            [](const TimeTag& a, const TimeTag& b) { return std::tie(a.time_ps, a.channel) < std::tie(b.time_ps, b.channel); });
}

}  // namespace

std::pair<TimeTagStream, TimeTagStream> generate_streams(std::span<const TrueEvent> events,
                                                         const StreamParams& p, Rng& rng) {
  if (p.duration_s < 0 || p.jitter_ps < 0 || p.ground_dark_rate_hz < 0 || p.satellite_background_hz < 0 ||
      p.sync_rate_hz < 0) {
    throw std::invalid_argument("generate_streams: negative parameter");
  }
  TimeTagStream ground{{}, ClockModel{}};
  TimeTagStream satellite{{}, p.clock};
  const double span_ps = p.duration_s * kPsPerS;
  std::normal_distribution<double> jitter(0.0, p.jitter_ps > 0 ? p.jitter_ps : 1.0);
  auto received = [&](double ground_ps) {
    const double t = p.clock.to_satellite(ground_ps);
    return std::llround(p.jitter_ps > 0 ? t + jitter(rng) : t);
  };

  if (p.sync_rate_hz > 0) {
    const double period_ps = kPsPerS / p.sync_rate_hz;
    const auto pulses = static_cast<long long>(std::floor(p.duration_s * p.sync_rate_hz));
    for (long long k = 0; k < pulses; ++k) {
      const auto t = std::llround(k * period_ps);
      ground.tags.push_back({t, kSyncChannel});
      satellite.tags.push_back({received(static_cast<double>(t)), kSyncChannel});
    }
  }
  for (const TrueEvent& e : events) {
    ground.tags.push_back({e.ground_ps, kHeraldChannel});
    satellite.tags.push_back({received(static_cast<double>(e.ground_ps)), e.satellite_channel});
  }
  constexpr std::uint16_t herald[] = {kHeraldChannel};
  constexpr std::uint16_t ports[] = {kPortChannel, kPortPerpChannel};
  add_poisson(ground.tags, p.ground_dark_rate_hz, 0.0, span_ps, herald, rng);
  const double sat_start = p.clock.to_satellite(0.0);
  add_poisson(satellite.tags, p.satellite_background_hz, sat_start, p.clock.to_satellite(span_ps) - sat_start, ports,
              rng);

  sort_tags(ground.tags);
  sort_tags(satellite.tags);
  return {std::move(ground), std::move(satellite)};
}

ClockFit fit_clock(std::span<const std::int64_t> ground_sync, std::span<const std::int64_t> satellite_sync) {
  if (ground_sync.size() != satellite_sync.size()) {
    throw std::invalid_argument("fit_clock: sync pulse counts differ");
  }
  const std::size_t n = ground_sync.size();
  if (n < 2) throw std::invalid_argument("fit_clock: fewer than 2 sync pulses, clock unrecoverable");
  if (!std::is_sorted(ground_sync.begin(), ground_sync.end()) ||
      !std::is_sorted(satellite_sync.begin(), satellite_sync.end())) {
    throw std::invalid_argument("fit_clock: sync pulses are not sorted");
  }
  // centred sums in long double; raw times reach ~1e15 ps
  long double gx = 0, sy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    gx += ground_sync[k];
    sy += satellite_sync[k];
  }
  gx /= n;
  sy /= n;
  long double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const long double dx = ground_sync[k] - gx;
    sxx += dx * dx;
    sxy += dx * (satellite_sync[k] - sy);
  }
  if (sxx <= 0) throw std::invalid_argument("fit_clock: sync pulses span no time");
  const long double slope = sxy / sxx;
  const long double intercept = sy - slope * gx;
  long double ss = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const long double r = satellite_sync[k] - (intercept + slope * ground_sync[k]);
    ss += r * r;
  }
  ClockFit fit;
  fit.clock = {static_cast<double>(intercept), static_cast<double>((slope - 1.0L) * 1e6L)};
  fit.residual_rms_ps = static_cast<double>(std::sqrt(ss / n));
  fit.pulses = n;
  return fit;
}

CoincidenceResult match_coincidences(const TimeTagStream& ground, const TimeTagStream& satellite,
                                     const ClockModel& clock, std::int64_t window_ps) {
  ground.validate();
  satellite.validate();
  if (window_ps < 0) throw std::invalid_argument("match_coincidences: negative window");
  const double half = 0.5 * static_cast<double>(window_ps);

  struct Indexed {
    double t;
    std::size_t index;
  };
  std::vector<Indexed> g, s;
  for (std::size_t i = 0; i < ground.tags.size(); ++i) {
    if (ground.tags[i].channel != kSyncChannel) g.push_back({static_cast<double>(ground.tags[i].time_ps), i});
  }
  for (std::size_t i = 0; i < satellite.tags.size(); ++i) {
    if (satellite.tags[i].channel != kSyncChannel) {
      s.push_back({clock.to_ground(static_cast<double>(satellite.tags[i].time_ps)), i});
    }
  }

  std::vector<Match> candidates;
  std::size_t lo = 0;
  for (const Indexed& gt : g) {
    while (lo < s.size() && s[lo].t < gt.t - half) ++lo;
    for (std::size_t k = lo; k < s.size() && s[k].t <= gt.t + half; ++k) {
      candidates.push_back({gt.index, s[k].index, s[k].t - gt.t});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Match& a, const Match& b) {
    return std::tuple(std::abs(a.delta_ps), a.ground_index, a.satellite_index) <
           std::tuple(std::abs(b.delta_ps), b.ground_index, b.satellite_index);
  });

  std::vector<char> g_used(ground.tags.size(), 0), s_used(satellite.tags.size(), 0);
  CoincidenceResult out;
  for (const Match& m : candidates) {
    if (g_used[m.ground_index] || s_used[m.satellite_index]) continue;
    g_used[m.ground_index] = s_used[m.satellite_index] = 1;
    out.matches.push_back(m);
  }
  std::sort(out.matches.begin(), out.matches.end(),
            [](const Match& a, const Match& b) { return a.ground_index < b.ground_index; });
  out.unmatched_ground = g.size() - out.matches.size();
  out.unmatched_satellite = s.size() - out.matches.size();
  return out;
}

double accidental_rate(double trigger_rate_hz, double background_rate_hz, double window_s) {
  if (trigger_rate_hz < 0 || background_rate_hz < 0 || window_s < 0) {
    throw std::invalid_argument("accidental_rate: negative argument");
  }
  return trigger_rate_hz * background_rate_hz * window_s;
}

void write_tags(std::ostream& out, const TimeTagStream& stream) {
  out.precision(17);
  out << "# clock offset_ps=" << stream.clock.offset_ps << " drift_ppm=" << stream.clock.drift_ppm << '\n';
  for (const TimeTag& t : stream.tags) out << t.channel << ',' << t.time_ps << '\n';
}

TimeTagStream read_tags(std::istream& in) {
  TimeTagStream stream;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream header(line.substr(1));
      std::string word;
      while (header >> word) {
        if (word.rfind("offset_ps=", 0) == 0) stream.clock.offset_ps = std::stod(word.substr(10));
        if (word.rfind("drift_ppm=", 0) == 0) stream.clock.drift_ppm = std::stod(word.substr(10));
      }
      continue;
    }
    const auto comma = line.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument("missing comma");
      std::size_t used = 0;
      const unsigned long channel = std::stoul(line.substr(0, comma), &used);
      if (used != comma || channel > 0xffff) throw std::invalid_argument("bad channel");
      const std::string time_text = line.substr(comma + 1);
      const long long time = std::stoll(time_text, &used);
      if (used != time_text.size()) throw std::invalid_argument("bad time");
      stream.tags.push_back({time, static_cast<std::uint16_t>(channel)});
    } catch (const std::exception&) {
      throw std::invalid_argument("read_tags: malformed line " + std::to_string(number));
    }
  }
  stream.validate();
  return stream;
}

}  // namespace uplink

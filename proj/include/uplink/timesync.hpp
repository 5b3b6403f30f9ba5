#pragma once

// Ground and satellite time-tag streams, sync-pulse clock recovery and
// coincidence matching.
//
// Times are integer picoseconds. The satellite clock reads
//   t_sat = offset_ps + (1 + drift_ppm * 1e-6) * t_ground.

#include "uplink/photonsrc.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

namespace uplink {

enum Channel : std::uint16_t {
  kSyncChannel = 0,
  kHeraldChannel = 1,  // ground: trigger + BSM double click
  kPortChannel = 2,    // satellite analyzer port for |chi>
  kPortPerpChannel = 3 // satellite analyzer port for |chi_perp>
};

struct TimeTag {
  std::int64_t time_ps;
  std::uint16_t channel;

  friend bool operator==(const TimeTag&, const TimeTag&) = default;
};

struct ClockModel {
  double offset_ps = 0.0;
  double drift_ppm = 0.0;

  double to_satellite(double ground_ps) const { return offset_ps + (1.0 + drift_ppm * 1e-6) * ground_ps; }
  double to_ground(double satellite_ps) const { return (satellite_ps - offset_ps) / (1.0 + drift_ppm * 1e-6); }
  ClockModel inverse() const;
};

struct TimeTagStream {
  std::vector<TimeTag> tags;
  ClockModel clock;

  /// Throws std::invalid_argument unless tags are sorted and |drift| < 100 ppm.
  void validate() const;
  std::vector<std::int64_t> times_on(std::uint16_t channel) const;
};

struct SyncConfig {
  double sync_rate_hz = 1e4;
  std::int64_t window_ps = 3000;
  double detector_jitter_ps = 300.0;
};

/// A photon pair seen by both sides: herald at `ground_ps` on the ground clock,
/// detected on `satellite_channel`.
struct TrueEvent {
  std::int64_t ground_ps;
  std::uint16_t satellite_channel = kPortChannel;
};

struct StreamParams {
  ClockModel clock;
  double jitter_ps = 0.0;               // satellite detection jitter, Gaussian sigma
  double ground_dark_rate_hz = 0.0;     // uncorrelated herald-channel clicks
  double satellite_background_hz = 0.0; // dark + stray light over both ports
  double duration_s = 0.0;
  double sync_rate_hz = 0.0;            // 0 disables sync pulses
};

/// Ground stream and satellite stream (in the satellite's own clock).
std::pair<TimeTagStream, TimeTagStream> generate_streams(std::span<const TrueEvent> events,
                                                         const StreamParams& params, Rng& rng);

struct ClockFit {
  ClockModel clock;
  double residual_rms_ps = 0.0;
  std::size_t pulses = 0;
};

/// Least-squares line through matched sync pulses (pulse k on both sides).
ClockFit fit_clock(std::span<const std::int64_t> ground_sync, std::span<const std::int64_t> satellite_sync);

struct Match {
  std::size_t ground_index;     // into ground.tags
  std::size_t satellite_index;  // into satellite.tags
  double delta_ps;              // corrected satellite time minus ground time
};

struct CoincidenceResult {
  std::vector<Match> matches;  // sorted by ground_index
  std::size_t unmatched_ground = 0;
  std::size_t unmatched_satellite = 0;
};

/// Greedy nearest-neighbour matching of non-sync tags with |delta| <= window/2
/// after mapping satellite times to the ground clock through `clock`. Closest
/// pairs are taken first; ties break on ground index, then satellite index.
CoincidenceResult match_coincidences(const TimeTagStream& ground, const TimeTagStream& satellite,
                                     const ClockModel& clock, std::int64_t window_ps);

/// Accidental coincidence rate trigger_rate * background_rate * window.
double accidental_rate(double trigger_rate_hz, double background_rate_hz, double window_s);

/// Line format `channel,time_ps`, one tag per line.
void write_tags(std::ostream& out, const TimeTagStream& stream);
TimeTagStream read_tags(std::istream& in);

}  // namespace uplink

#pragma once

// Campaign orchestration: an exact density-matrix tier that gives expected
// fidelities and counts, and an event-level Monte Carlo tier that reproduces
// the counting statistics of the fourfold coincidences.

#include "uplink/bsm.hpp"
#include "uplink/linkgeom.hpp"
#include "uplink/photonsrc.hpp"
#include "uplink/qstate.hpp"
#include "uplink/timesync.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace uplink {

enum class NoiseSource { DoublePair, Distinguishability, PolarizationDistortion, Background };

inline constexpr std::array<NoiseSource, 4> kNoiseSources{NoiseSource::DoublePair, NoiseSource::Distinguishability,
                                                          NoiseSource::PolarizationDistortion,
                                                          NoiseSource::Background};

std::string_view to_string(NoiseSource source);

struct NoiseToggles {
  bool double_pair = true;
  bool distinguishability = true;
  bool polarization_distortion = true;
  bool background = true;

  static NoiseToggles none() { return {false, false, false, false}; }
  static NoiseToggles only(NoiseSource source);
  bool enabled(NoiseSource source) const;
};

struct OrbitSpec {
  std::string date;
  double max_elevation_deg = 76.0;
};

struct ChannelModel {
  double delta_polarization_rad = 0.0;
  double polarization_jitter_rad = 0.0;
};

struct DetectionModel {
  double receiver_efficiency = 0.5;  // satellite detectors and optics, lumped
  double background_rate_hz = 150.0; // dark counts plus stray light, both ports
  SyncConfig sync;
};

struct CampaignConfig {
  std::uint64_t seed = 0;
  double orbit_duration_s = 350.0;  // collection window centred on culmination
  double slice_s = 1.0;
  std::vector<OrbitSpec> orbits;
  std::vector<Mub> schedule;  // input state per orbit
  SourceModel source;
  BsmModel bsm;
  PassGeometry geometry;  // reference pass: altitude, tracking limit, loss-profile culmination
  LinkModel link;
  ChannelModel channel;
  DetectionModel detection;
  NoiseToggles noise;

  PassGeometry orbit_geometry(std::size_t orbit_index) const;
  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;
};

/// H, V, +, -, R, L, H, V, ...
std::vector<Mub> round_robin_schedule(std::size_t orbits);

struct FidelityEstimate {
  double fidelity = 0.0;
  double sigma = 0.0;
};

/// Correct / (correct + wrong) with independent-Poisson error propagation.
FidelityEstimate estimate_fidelity(std::uint64_t correct, std::uint64_t wrong);

struct OrbitRecord {
  std::size_t index = 0;
  std::string date;
  double max_elevation_deg = 0.0;
  Mub state = Mub::H;
  // Raw fourfolds by BSM outcome (phi+, phi-) and analyzer port (chi, chi_perp).
  std::array<std::array<std::uint64_t, 2>, 2> counts{};
  std::uint64_t correct = 0;  // after the pi-phase post-processing
  std::uint64_t wrong = 0;
  std::uint64_t signal_events = 0;
  std::uint64_t accidental_events = 0;
  double tracked_s = 0.0;

  std::uint64_t total() const { return correct + wrong; }
};

struct StateResult {
  Mub state = Mub::H;
  std::uint64_t correct = 0;
  std::uint64_t wrong = 0;
  std::optional<FidelityEstimate> estimate;  // empty without counts
};

struct CampaignResult {
  std::vector<OrbitRecord> orbits;
  std::array<StateResult, 6> states;
  std::uint64_t total_counts = 0;
  double mean_fidelity = 0.0;
  double mean_sigma = 0.0;
};

/// Per-orbit random stream derived from the campaign seed and orbit index only.
Rng orbit_stream(std::uint64_t seed, std::size_t orbit_index);

OrbitRecord run_orbit(const CampaignConfig& config, std::size_t orbit_index, Rng& rng);
CampaignResult run_campaign(const CampaignConfig& config);

// Exact tier ---------------------------------------------------------------

/// Parameters in force after applying the noise toggles.
struct EffectiveNoise {
  double double_pair_fraction;
  double mode_overlap;
  double delta_polarization_rad;
  double polarization_jitter_rad;
  double background_rate_hz;
};
EffectiveNoise effective_noise(const CampaignConfig& config);

/// Photon-3 states for the two accepted outcomes (before feed-forward) and
/// their probabilities conditional on acceptance.
struct Photon3Branches {
  std::array<DensityMatrix, 2> states;
  std::array<double, 2> probability;
};
Photon3Branches photon3_branches(const PureState& input, double entangled_fidelity, double mode_overlap);

/// Expected fidelity of the delivered photon without accidentals.
double signal_fidelity(const CampaignConfig& config, Mub state, bool feed_forward = true);

struct ExpectedCounts {
  double signal = 0.0;
  double accidental = 0.0;
  double tracked_s = 0.0;
};
ExpectedCounts expected_orbit_counts(const CampaignConfig& config, std::size_t orbit_index);

struct AnalyticResult {
  std::array<double, 6> signal_fidelity{};
  std::array<double, 6> fidelity{};  // raw, accidentals included
  std::array<double, 6> signal_counts{};
  std::array<double, 6> accidental_counts{};
  double mean_fidelity = 0.0;
  double total_counts = 0.0;
};
AnalyticResult analytic_campaign(const CampaignConfig& config, bool feed_forward = true);

struct ErrorBudget {
  std::array<double, 4> deficit{};  // indexed like kNoiseSources, one source on at a time
  double all_on = 0.0;
  double baseline = 0.0;  // all toggles off
};
ErrorBudget error_budget(const CampaignConfig& config);

// Reference calculations ---------------------------------------------------

struct BaselineOptions {
  std::optional<PureState> fixed_input;
  std::optional<Eigen::Vector3d> fixed_axis;  // Bloch measurement axis
};

/// Mean fidelity of measure-in-a-random-basis-and-resend over Haar inputs.
double classical_baseline(std::size_t samples, Rng& rng, const BaselineOptions& options = {});

struct FibreComparison {
  double loss_db = 0.0;
  double transmittance = 0.0;
  double waiting_s = 0.0;
  double waiting_years = 0.0;
};
FibreComparison fibre_comparison(double fourfold_rate_hz, double distance_km, double loss_db_per_km);

}  // namespace uplink

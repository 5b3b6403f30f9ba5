#pragma once

// Circular-orbit pass geometry and the uplink attenuation model.
//
// Time t is measured in seconds from culmination (highest elevation); the
// satellite rises for t < 0. Earth rotation is ignored.

#include "uplink/photonsrc.hpp"
#include "uplink/qstate.hpp"

#include <cmath>
#include <iosfwd>
#include <span>
#include <vector>

namespace uplink {

inline constexpr double kEarthRadiusKm = 6371.0;
inline constexpr double kEarthGmKm3PerS2 = 398600.4418;

struct PassGeometry {
  double earth_radius_km = kEarthRadiusKm;
  double orbit_altitude_km = 500.0;
  double max_elevation_deg = 76.0;
  double min_elevation_deg = 14.5;  // tracking start/stop

  /// Two-body circular-orbit angular rate, rad/s.
  double orbital_rate() const;
  void validate() const;
};

struct LinkModel {
  double divergence_x_urad = 14.0;  // full angle, transmitter
  double divergence_y_urad = 14.0;
  double seeing_urad = 5.0;
  double tracking_error_urad = 3.0;
  double receiver_diameter_m = 0.3;
  double zenith_transmittance = 0.9;
  double system_efficiency_db = 10.0;  // lumped optics and coupling
  double slew_degradation_k = 0.0;
  // Azimuth rate at which the tracking error has grown by a factor (1 + k).
  double slew_reference_rate_deg_s = 1.0;

  void validate() const;
};

double slant_range_km(double elevation_deg, const PassGeometry& geometry);

/// Earth central angle between station and sub-satellite point.
double central_angle_rad(double elevation_deg, const PassGeometry& geometry);

double elevation_deg(const PassGeometry& geometry, double t_s);

/// Mount azimuth angular rate seen from the station, deg/s.
double azimuth_rate_deg_s(const PassGeometry& geometry, double t_s);

/// Positive time from culmination at which the pass is at `elevation_deg`.
double time_from_culmination_s(const PassGeometry& geometry, double elevation_deg);

/// Time spent above the minimum tracking elevation.
double pass_duration_s(const PassGeometry& geometry);

/// Root-sum-square of transmitter divergence and seeing per axis; geometric
/// mean of the two axes.
double effective_divergence_urad(const LinkModel& model);

/// Tracking error inflated by the mount slew rate at time t.
double pointing_error_urad(double t_s, const PassGeometry& geometry, const LinkModel& model);

/// Channel loss in dB at the given elevation; t enters through the slew term.
double link_loss_db(double elevation_deg, double t_s, const PassGeometry& geometry, const LinkModel& model);

/// Loss along the pass, evaluated at elevation_deg(geometry, t).
double pass_loss_db(double t_s, const PassGeometry& geometry, const LinkModel& model);

inline double transmittance_from_db(double loss_db) { return std::pow(10.0, -loss_db / 10.0); }

/// Unitary exp(-i theta G) with G = (X + Y)/sqrt2 and theta = delta + N(0, jitter).
/// The axis lies between the diagonal and circular Bloch axes, so |H>,|V> lose
/// cos^2(theta) fidelity and the four superposition states are hit equally.
Matrix2 polarization_distortion(double delta, double jitter_sigma, Rng& rng);

/// Deterministic rotation used by polarization_distortion.
Matrix2 distortion_rotation(double theta);

/// Exact average of U rho U^dagger over theta ~ N(delta, jitter_sigma^2).
DensityMatrix expected_distortion(const DensityMatrix& rho, double delta, double jitter_sigma);

struct LossSample {
  double t_s;
  double elevation_deg;
  double range_km;
  double loss_db;
};

/// Samples the tracked part of the pass every `step_s` over a window of
/// `window_s` centred on culmination.
std::vector<LossSample> loss_profile(const PassGeometry& geometry, const LinkModel& model, double window_s,
                                     double step_s = 1.0);

/// Columns t_s,elevation_deg,range_km,loss_db.
void write_loss_csv(std::ostream& out, std::span<const LossSample> rows);

}  // namespace uplink

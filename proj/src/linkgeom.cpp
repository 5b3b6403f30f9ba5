#include "uplink/linkgeom.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace uplink {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

}  // namespace

double PassGeometry::orbital_rate() const {
  const double a = earth_radius_km + orbit_altitude_km;
  return std::sqrt(kEarthGmKm3PerS2 / (a * a * a));
}

void PassGeometry::validate() const {
  if (!(earth_radius_km > 0) || !(orbit_altitude_km > 0)) {
    throw std::invalid_argument("PassGeometry: radius and altitude must be positive");
  }
  if (!(min_elevation_deg < max_elevation_deg) || max_elevation_deg > 90.0 || min_elevation_deg <= 0.0) {
    throw std::invalid_argument("PassGeometry: need 0 < min_elevation < max_elevation <= 90 degrees");
  }
}

void LinkModel::validate() const {
  if (!(divergence_x_urad > 0 && divergence_y_urad > 0 && seeing_urad >= 0 && tracking_error_urad >= 0 &&
        receiver_diameter_m > 0 && slew_degradation_k >= 0 && slew_reference_rate_deg_s > 0)) {
    throw std::invalid_argument("LinkModel: parameters must be positive");
  }
  if (!(zenith_transmittance > 0 && zenith_transmittance <= 1)) {
    throw std::invalid_argument("LinkModel: zenith_transmittance must lie in (0, 1]");
  }
}

double slant_range_km(double elevation_deg, const PassGeometry& g) {
  const double r = g.earth_radius_km, h = g.orbit_altitude_km;
  const double s = std::sin(elevation_deg * kDeg);
  return std::sqrt(r * r * s * s + 2 * r * h + h * h) - r * s;
}

double central_angle_rad(double elevation_deg, const PassGeometry& g) {
  const double e = elevation_deg * kDeg;
  const double ratio = g.earth_radius_km / (g.earth_radius_km + g.orbit_altitude_km);
  return std::acos(ratio * std::cos(e)) - e;
}

double elevation_deg(const PassGeometry& g, double t_s) {
  g.validate();
  const double beta_min = central_angle_rad(g.max_elevation_deg, g);
  const double cos_beta = std::cos(beta_min) * std::cos(g.orbital_rate() * t_s);
  const double beta = std::acos(std::clamp(cos_beta, -1.0, 1.0));
  const double ratio = g.earth_radius_km / (g.earth_radius_km + g.orbit_altitude_km);
  return std::atan2(cos_beta - ratio, std::sin(beta)) / kDeg;
}

namespace {

// Topocentric azimuth with the station at central angle beta_min from the
// orbit plane and the orbit in the x-y plane.
double azimuth_rad(const PassGeometry& g, double t_s) {
  const double beta_min = central_angle_rad(g.max_elevation_deg, g);
  const double a = g.earth_radius_km + g.orbit_altitude_km;
  const double wt = g.orbital_rate() * t_s;
  const Eigen::Vector3d up(std::cos(beta_min), 0.0, std::sin(beta_min));
  const Eigen::Vector3d along(0.0, 1.0, 0.0);
  const Eigen::Vector3d across = up.cross(along);
  const Eigen::Vector3d d = a * Eigen::Vector3d(std::cos(wt), std::sin(wt), 0.0) - g.earth_radius_km * up;
  return std::atan2(d.dot(along), d.dot(across));
}

}  // namespace

double azimuth_rate_deg_s(const PassGeometry& g, double t_s) {
  g.validate();
  constexpr double dt = 1e-3;
  double diff = azimuth_rad(g, t_s + dt) - azimuth_rad(g, t_s - dt);
  diff = std::remainder(diff, 2 * std::numbers::pi);
  return std::abs(diff) / (2 * dt) / kDeg;
}

double time_from_culmination_s(const PassGeometry& g, double elevation_deg) {
  g.validate();
  if (elevation_deg > g.max_elevation_deg) throw std::domain_error("pass never reaches that elevation");
  const double c = std::cos(central_angle_rad(elevation_deg, g)) / std::cos(central_angle_rad(g.max_elevation_deg, g));
  return std::acos(std::clamp(c, -1.0, 1.0)) / g.orbital_rate();
}

double pass_duration_s(const PassGeometry& g) { return 2.0 * time_from_culmination_s(g, g.min_elevation_deg); }

double effective_divergence_urad(const LinkModel& m) {
  const double x = std::hypot(m.divergence_x_urad, m.seeing_urad);
  const double y = std::hypot(m.divergence_y_urad, m.seeing_urad);
  return std::sqrt(x * y);
}

double pointing_error_urad(double t_s, const PassGeometry& g, const LinkModel& m) {
  if (m.slew_degradation_k == 0.0) return m.tracking_error_urad;
  const double rate = azimuth_rate_deg_s(g, t_s);
  return m.tracking_error_urad * (1.0 + m.slew_degradation_k * rate / m.slew_reference_rate_deg_s);
}

double link_loss_db(double elevation_deg, double t_s, const PassGeometry& g, const LinkModel& m) {
  if (!(elevation_deg > 0.0)) throw std::domain_error("link_loss_db: elevation must be above the horizon");
  const double theta = effective_divergence_urad(m);
  const double spot_m = theta * 1e-6 * slant_range_km(elevation_deg, g) * 1e3;
  const double ratio = m.receiver_diameter_m / spot_m;
  const double eta_geo = std::min(1.0, ratio * ratio);
  const double jitter = 2.0 * pointing_error_urad(t_s, g, m) / theta;
  const double eta_point = 1.0 / (1.0 + jitter * jitter);
  const double eta_atm = std::pow(m.zenith_transmittance, 1.0 / std::sin(elevation_deg * kDeg));
  return -10.0 * std::log10(eta_geo * eta_point * eta_atm) + m.system_efficiency_db;
}

double pass_loss_db(double t_s, const PassGeometry& g, const LinkModel& m) {
  return link_loss_db(elevation_deg(g, t_s), t_s, g, m);
}

Matrix2 distortion_rotation(double theta) {
  const Matrix2 axis = (pauli_x<double>() + pauli_y<double>()) / std::sqrt(2.0);
  const std::complex<double> i(0.0, 1.0);
  return std::cos(theta) * Matrix2::Identity() - i * std::sin(theta) * axis;
}

Matrix2 polarization_distortion(double delta, double jitter_sigma, Rng& rng) {
  if (jitter_sigma < 0) throw std::invalid_argument("polarization_distortion: negative jitter");
  double theta = delta;
  if (jitter_sigma > 0) theta += std::normal_distribution<double>(0.0, jitter_sigma)(rng);
  return distortion_rotation(theta);
}

DensityMatrix expected_distortion(const DensityMatrix& rho, double delta, double jitter_sigma) {
  if (rho.num_qubits() != 1) throw std::invalid_argument("expected_distortion: single qubit only");
  const Operator g = (pauli_x<double>() + pauli_y<double>()) / std::sqrt(2.0);
  const double damp = std::exp(-2.0 * jitter_sigma * jitter_sigma);
  const double c2 = damp * std::cos(2 * delta);
  const double s2 = damp * std::sin(2 * delta);
  const std::complex<double> i(0.0, 1.0);
  const Operator& r = rho.matrix();
  const Operator out = 0.5 * (1 + c2) * r + 0.5 * (1 - c2) * g * r * g - i * 0.5 * s2 * (g * r - r * g);
  return DensityMatrix(out);
}

std::vector<LossSample> loss_profile(const PassGeometry& g, const LinkModel& m, double window_s, double step_s) {
  g.validate();
  m.validate();
  if (!(window_s > 0) || !(step_s > 0)) throw std::invalid_argument("loss_profile: window and step must be positive");
  std::vector<LossSample> rows;
  const auto n = static_cast<long>(std::floor(window_s / step_s + 1e-9));
  for (long k = 0; k <= n; ++k) {
    const double t = -0.5 * window_s + k * step_s;
    const double e = elevation_deg(g, t);
    if (e < g.min_elevation_deg) continue;
    rows.push_back({t, e, slant_range_km(e, g), link_loss_db(e, t, g, m)});
  }
  return rows;
}

void write_loss_csv(std::ostream& out, std::span<const LossSample> rows) {
  out << "t_s,elevation_deg,range_km,loss_db\n";
  char line[160];
  for (const LossSample& r : rows) {
    std::snprintf(line, sizeof line, "%.3f,%.6f,%.6f,%.6f\n", r.t_s, r.elevation_deg, r.range_km, r.loss_db);
    out << line;
  }
}

}  // namespace uplink

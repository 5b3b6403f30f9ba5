#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"
#include "uplink/linkgeom.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

using namespace uplink;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;
constexpr double kGM = 398600.4418;  // km^3/s^2

// Slant range from the station-satellite triangle in Cartesian coordinates.
double range_oracle(double elevation_deg, double r, double h) {
  const double e = elevation_deg * kDeg;
  const double beta = std::numbers::pi / 2 - e - std::asin(r * std::cos(e) / (r + h));
  const double sx = (r + h) * std::sin(beta), sy = (r + h) * std::cos(beta);
  return std::hypot(sx, sy - r);
}

double duration_oracle(double max_deg, double min_deg, double r, double h) {
  const double omega = std::sqrt(kGM / std::pow(r + h, 3));
  auto beta = [&](double e_deg) {
    const double e = e_deg * kDeg;
    return std::numbers::pi / 2 - e - std::asin(r * std::cos(e) / (r + h));
  };
  return 2.0 * std::acos(std::cos(beta(min_deg)) / std::cos(beta(max_deg))) / omega;
}

}  // namespace

TEST_CASE("slant range against the triangle oracle") {
  PassGeometry g;
  CHECK(std::abs(slant_range_km(90.0, g) - 500.0) < 1e-9);
  CHECK(std::abs(slant_range_km(14.5, g) - 1432.0) < 1.0);
  for (double e = 1.0; e <= 90.0; e += 0.5) {
    CHECK(std::abs(slant_range_km(e, g) - range_oracle(e, 6371.0, 500.0)) < 1e-8);
    if (e > 1.0) CHECK(slant_range_km(e, g) < slant_range_km(e - 0.5, g));
  }
  CHECK(std::abs(slant_range_km(76.0, g) - range_oracle(76.0, 6371.0, 500.0)) < 1e-9);
}

TEST_CASE("elevation profile and pass duration") {
  PassGeometry g;
  CHECK(std::abs(g.orbital_rate() - 1.1085e-3) < 1e-6);
  CHECK(std::abs(elevation_deg(g, 0.0) - 76.0) < 1e-10);
  for (double t = 5; t < 300; t += 17) CHECK(std::abs(elevation_deg(g, t) - elevation_deg(g, -t)) < 1e-10);
  const double d = pass_duration_s(g);
  CHECK(std::abs(d - duration_oracle(76.0, 14.5, 6371.0, 500.0)) < 1e-6);
  CHECK(std::abs(d - 350.0) <= 20.0);
  CHECK(std::abs(elevation_deg(g, 0.5 * d) - 14.5) < 1e-8);

  g.min_elevation_deg = g.max_elevation_deg;
  CHECK_THROWS_AS(elevation_deg(g, 0.0), std::invalid_argument);
  g = PassGeometry{};
  g.max_elevation_deg = 95.0;
  CHECK_THROWS_AS(g.validate(), std::invalid_argument);
}

TEST_CASE("azimuth rate peaks at culmination") {
  PassGeometry g;
  const double peak = azimuth_rate_deg_s(g, 0.0);
  CHECK(peak > 3.0);
  CHECK(peak < 4.0);
  for (double t = 10; t < 180; t += 10) {
    CHECK(azimuth_rate_deg_s(g, t) < azimuth_rate_deg_s(g, t - 10) + 1e-12);
    CHECK(std::abs(azimuth_rate_deg_s(g, t) - azimuth_rate_deg_s(g, -t)) < 1e-6);
  }
}

TEST_CASE("effective divergence") {
  LinkModel m;
  CHECK(std::abs(effective_divergence_urad(m) - std::sqrt(14.0 * 14.0 + 25.0)) < 1e-12);
  CHECK(std::abs(effective_divergence_urad(m) - 15.0) < 0.2);
  m.seeing_urad = 0;
  CHECK(effective_divergence_urad(m) == doctest::Approx(14.0));
  m.divergence_x_urad = 24;
  m.divergence_y_urad = 35;
  CHECK(std::abs(effective_divergence_urad(m) - 28.98) < 0.005);
}

TEST_CASE("loss model limits and monotonicity") {
  PassGeometry g;
  LinkModel m;
  m.receiver_diameter_m = 1e9;
  m.zenith_transmittance = 1.0;
  m.tracking_error_urad = 0.0;
  CHECK(std::abs(link_loss_db(30.0, 0.0, g, m) - m.system_efficiency_db) < 1e-12);

  m = LinkModel{};
  m.zenith_transmittance = 1.0;
  double prev = -1.0;
  for (double e = 89.0; e >= 5.0; e -= 1.0) {
    const double loss = link_loss_db(e, 0.0, g, m);
    CHECK(loss > prev);
    prev = loss;
  }
  CHECK_THROWS_AS(link_loss_db(0.0, 0.0, g, m), std::domain_error);
  CHECK_THROWS_AS(link_loss_db(-3.0, 0.0, g, m), std::domain_error);

  // the slew term only raises the loss, most at culmination
  LinkModel bumpy;
  bumpy.slew_degradation_k = 0.5;
  const double extra0 = pass_loss_db(0.0, g, bumpy) - pass_loss_db(0.0, g, LinkModel{});
  const double extra150 = pass_loss_db(150.0, g, bumpy) - pass_loss_db(150.0, g, LinkModel{});
  CHECK(extra0 > extra150);
  CHECK(extra150 > 0.0);

  CHECK(std::abs(transmittance_from_db(30.0) - 1e-3) < 1e-15);
}

TEST_CASE("link model validation") {
  LinkModel m;
  m.zenith_transmittance = 0.0;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
  m = LinkModel{};
  m.receiver_diameter_m = -1;
  CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}

TEST_CASE("polarization distortion") {
  Rng rng(1);
  const Matrix2 id = polarization_distortion(0.0, 0.0, rng);
  CHECK((id - Matrix2::Identity()).norm() < 1e-15);

  const PureState h = mub_state<double>(Mub::H);
  for (double d : {0.05, 0.2, 0.7}) {
    const Matrix2 u = distortion_rotation(d);
    CHECK(is_unitary<double>(Operator(u), 1e-12));
    const DensityMatrix out = apply_unitary(DensityMatrix::from_pure(h), u, {0});
    CHECK(std::abs(fidelity(h, out) - std::cos(d) * std::cos(d)) < 1e-12);
    // superposition states lose the same amount as each other
    const double fp = fidelity(mub_state<double>(Mub::Plus),
                               apply_unitary(DensityMatrix::from_pure(mub_state<double>(Mub::Plus)), u, {0}));
    for (Mub m : {Mub::Minus, Mub::R, Mub::L}) {
      const PureState s = mub_state<double>(m);
      CHECK(std::abs(fidelity(s, apply_unitary(DensityMatrix::from_pure(s), u, {0})) - fp) < 1e-12);
    }
  }
  CHECK_THROWS_AS(polarization_distortion(0.1, -1.0, rng), std::invalid_argument);
}

TEST_CASE("expected distortion equals the jitter average") {
  Rng rng(99);
  const DensityMatrix rho = testing::random_density(1, rng);
  const double delta = 0.2, sigma = 0.15;
  const DensityMatrix exact = expected_distortion(rho, delta, sigma);
  Operator avg = Operator::Zero(2, 2);
  const int n = 200000;
  for (int k = 0; k < n; ++k) {
    const Matrix2 u = polarization_distortion(delta, sigma, rng);
    avg += u * rho.matrix() * u.adjoint();
  }
  avg /= n;
  CHECK((avg - exact.matrix()).cwiseAbs().maxCoeff() < 5e-3);
  CHECK((expected_distortion(rho, delta, 0.0).matrix() -
         apply_unitary(rho, Operator(distortion_rotation(delta)), {0}).matrix())
            .cwiseAbs()
            .maxCoeff() < 1e-14);
}

TEST_CASE("loss profile rows and csv") {
  PassGeometry g;
  LinkModel m;
  const auto rows = loss_profile(g, m, 350.0, 1.0);
  CHECK(rows.size() == 351);
  CHECK(rows.front().t_s == -175.0);
  CHECK(rows.back().t_s == 175.0);
  for (const LossSample& r : rows) CHECK(r.elevation_deg >= g.min_elevation_deg);

  // a window longer than the pass drops the untracked samples
  const auto wide = loss_profile(g, m, 500.0, 1.0);
  CHECK(wide.size() < 501);
  CHECK(wide.size() >= 365);

  std::ostringstream out;
  write_loss_csv(out, rows);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "t_s,elevation_deg,range_km,loss_db");
  int n = 0;
  while (std::getline(in, line)) ++n;
  CHECK(n == 351);

  CHECK_THROWS_AS(loss_profile(g, m, 0.0, 1.0), std::invalid_argument);
}

// Acceptance suite: one line per criterion, non-zero exit if any fails.

#include "support.hpp"
#include "teleport_oracle.hpp"
#include "uplink/bsm.hpp"
#include "uplink/config.hpp"
#include "uplink/experiment.hpp"
#include "uplink/linkgeom.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <string>

using namespace uplink;

namespace {

using Clock = std::chrono::steady_clock;

int failures = 0;

void report(int id, const char* name, bool ok, const std::string& detail) {
  std::printf("criterion %2d %-28s %s  %s\n", id, name, ok ? "PASS" : "FAIL", detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <typename... Args>
std::string fmt(const char* format, Args... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

CampaignConfig calibrated() { return load_campaign_config(testing::source_dir() / "configs" / "campaign.json"); }

CampaignConfig pipeline(double f_ent, double m) {
  CampaignConfig c = calibrated();
  c.source.entangled_fidelity = f_ent;
  c.bsm.mode_overlap = m;
  c.noise = NoiseToggles::none();
  c.noise.distinguishability = true;  // M is set explicitly above
  return c;
}

void ideal_protocol() {
  const auto start = Clock::now();
  double worst = 0.0;
  for (Mub m : kMubLabels) {
    const TeleportExpectation t = teleport_expected(mub_state<double>(m), 1.0, BsmModel{1.0});
    for (const TeleportBranch& b : t.branches) worst = std::max(worst, std::abs(b.fidelity - 1.0));
    worst = std::max(worst, std::abs(signal_fidelity(pipeline(1.0, 1.0), m) - 1.0));
  }
  const double elapsed = seconds_since(start);
  report(1, "ideal protocol", worst < 1e-12 && elapsed < 1.0,
         fmt("max |F-1| = %.1e over 6 inputs x 2 outcomes, %.3f s", worst, elapsed));
}

void werner_closed_form() {
  const double p = (4 * 0.933 - 1) / 3;
  const double want = (1 + p) / 2;
  double worst = 0.0, first = 0.0, spread = 0.0;
  for (Mub m : kMubLabels) {
    const double f = signal_fidelity(pipeline(0.933, 1.0), m);
    if (m == Mub::H) first = f;
    worst = std::max(worst, std::abs(f - want));
    spread = std::max(spread, std::abs(f - first));
  }
  report(2, "Werner closed form", worst < 1e-9 && spread < 1e-9 && std::abs(want - 0.955333) < 5e-7,
         fmt("F = %.9f, (1+p)/2 = %.9f, max dev %.1e, spread %.1e", first, want, worst, spread));
}

void distinguishability() {
  const double c2 = (1 + (4 * 0.933 - 1) / 3) / 2;
  const CampaignConfig c = pipeline(0.933, 0.0);
  double sup = 0.0, hv = 0.0;
  for (Mub m : {Mub::Plus, Mub::Minus, Mub::R, Mub::L}) sup = std::max(sup, std::abs(signal_fidelity(c, m) - 0.5));
  for (Mub m : {Mub::H, Mub::V}) hv = std::max(hv, std::abs(signal_fidelity(c, m) - c2));
  report(3, "distinguishability M=0", sup < 1e-10 && hv < 1e-12,
         fmt("max |F(+,-,R,L)-0.5| = %.1e, max |F(H,V)-%.6f| = %.1e", sup, c2, hv));
}

void geometry() {
  const PassGeometry g;
  // independent triangle construction
  auto oracle = [&](double e_deg) {
    const double e = e_deg * std::numbers::pi / 180, r = g.earth_radius_km, a = r + g.orbit_altitude_km;
    const double beta = std::numbers::pi / 2 - e - std::asin(r * std::cos(e) / a);
    return std::hypot(a * std::sin(beta), a * std::cos(beta) - r);
  };
  const double l14 = slant_range_km(14.5, g), l76 = slant_range_km(76.0, g);
  const double d = pass_duration_s(g);
  const bool ok = std::abs(l14 - oracle(14.5)) < 1.0 && std::abs(l76 - oracle(76.0)) < 1.0 &&
                  std::abs(l14 - 1432.0) <= 1.0 && std::abs(d - 350.0) <= 20.0;
  report(4, "geometry", ok,
         fmt("L(14.5)=%.2f km, L(76)=%.2f km (closed form %.2f; stated 513), pass above 14.5 = %.1f s", l14, l76,
             oracle(76.0), d));
}

void link_endpoints() {
  const CampaignConfig c = calibrated();
  const PassGeometry& g = c.geometry;
  // rising-half time at which the slant range is 1400 km
  double lo = -pass_duration_s(g) / 2, hi = 0.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (slant_range_km(elevation_deg(g, mid), g) > 1400.0 ? lo : hi) = mid;
  }
  const double loss_1400 = pass_loss_db(lo, g, c.link);
  const double loss_edge = pass_loss_db(-time_from_culmination_s(g, g.min_elevation_deg), g, c.link);
  const double loss_top = pass_loss_db(0.0, g, c.link);
  LinkModel distance_only = c.link;
  distance_only.slew_degradation_k = 0.0;
  const double loss_top_plain = pass_loss_db(0.0, g, distance_only);
  const bool ok = std::abs(loss_1400 - 52.0) <= 2.0 && std::abs(loss_edge - 52.0) <= 2.0 &&
                  std::abs(loss_top - 41.0) <= 2.0 && loss_top > loss_top_plain;
  report(5, "link endpoints", ok,
         fmt("%.2f dB at 1400 km, %.2f dB at 14.5 deg, %.2f dB at culmination (%.2f dB without slew term, k=%.4f)",
             loss_1400, loss_edge, loss_top, loss_top_plain, c.link.slew_degradation_k));
}

void campaign() {
  const CampaignConfig c = calibrated();
  const auto start = Clock::now();
  const CampaignResult r = run_campaign(c);
  const double elapsed = seconds_since(start);
  bool states_ok = true;
  double worst_margin = 1e9;
  const char* worst_state = "";
  for (const StateResult& s : r.states) {
    if (!s.estimate) {
      states_ok = false;
      continue;
    }
    const double margin = (s.estimate->fidelity - 2.0 / 3.0) / s.estimate->sigma;
    if (margin < worst_margin) {
      worst_margin = margin;
      worst_state = to_string(s.state).data();
    }
    states_ok = states_ok && margin >= 3.0;
  }
  const bool counts_ok = r.total_counts >= 700 && r.total_counts <= 1150;
  const bool mean_ok = std::abs(r.mean_fidelity - 0.80) <= 0.03;
  std::string detail = fmt("%llu counts, mean F = %.4f +- %.4f, smallest margin %.2f sigma (%s), %.2f s",
                           static_cast<unsigned long long>(r.total_counts), r.mean_fidelity, r.mean_sigma,
                           worst_margin, worst_state, elapsed);
  report(6, "campaign reproduction", counts_ok && mean_ok && states_ok && elapsed < 60.0, detail);
  for (const StateResult& s : r.states) {
    if (!s.estimate) continue;
    std::printf("             %-2s F = %.4f +- %.4f  (%llu counts, %.2f sigma above 2/3)\n",
                to_string(s.state).data(), s.estimate->fidelity, s.estimate->sigma,
                static_cast<unsigned long long>(s.correct + s.wrong),
                (s.estimate->fidelity - 2.0 / 3.0) / s.estimate->sigma);
  }
}

void error_budget_check() {
  const ErrorBudget b = error_budget(calibrated());
  const std::array<double, 4> want{0.06, 0.10, 0.03, 0.04};
  bool ok = true;
  for (std::size_t k = 0; k < 4; ++k) ok = ok && std::abs(b.deficit[k] - want[k]) <= 0.02;
  report(7, "error budget", ok,
         fmt("deficits %.4f %.4f %.4f %.4f, all on %.4f", b.deficit[0], b.deficit[1], b.deficit[2], b.deficit[3],
             b.all_on));
}

void classical() {
  Rng rng(23);
  const double f = classical_baseline(1000000, rng);
  report(8, "classical baseline", std::abs(f - 2.0 / 3.0) <= 0.002, fmt("F = %.5f at 1e6 samples", f));
}

void statistics() {
  const FidelityEstimate e = estimate_fidelity(8, 2);
  const bool formula = e.fidelity == 0.8 && e.sigma == std::sqrt(8.0 * 2.0 / 1000.0) && std::abs(e.sigma - 0.1265) < 5e-5;

  CampaignConfig c = calibrated();
  const int runs = 100;
  std::array<double, 6> sum{}, sum2{}, sigma{};
  for (int k = 0; k < runs; ++k) {
    c.seed = 1000 + static_cast<std::uint64_t>(k);
    const CampaignResult r = run_campaign(c);
    for (std::size_t s = 0; s < 6; ++s) {
      const double f = r.states[s].estimate->fidelity;
      sum[s] += f;
      sum2[s] += f * f;
      sigma[s] += r.states[s].estimate->sigma / runs;
    }
  }
  bool ok = formula;
  std::string ratios;
  for (std::size_t s = 0; s < 6; ++s) {
    const double mean = sum[s] / runs;
    const double sd = std::sqrt((sum2[s] - runs * mean * mean) / (runs - 1));
    const double ratio = sd / sigma[s];
    ok = ok && std::abs(ratio - 1.0) <= 0.2;
    ratios += fmt(" %s:%.2f", to_string(kMubLabels[s]).data(), ratio);
  }
  report(9, "statistics", ok, fmt("(8,2) -> (%.4f, %.4f); empirical/formula sigma over %d runs:", e.fidelity, e.sigma, runs) + ratios);
}

void fibre() {
  const FibreComparison multiplexed = fibre_comparison(8210.0, 1200.0, 0.2);
  const FibreComparison single = fibre_comparison(4080.0, 1200.0, 0.2);
  auto in_band = [](double y) { return y >= 1e11 && y <= 1e13; };
  report(10, "fibre comparison",
         std::abs(multiplexed.loss_db - 240.0) < 1e-9 && in_band(multiplexed.waiting_years) && in_band(single.waiting_years),
         fmt("240 dB: %.3e years at 8210/s, %.3e years at 4080/s", multiplexed.waiting_years, single.waiting_years));
}

void oracle_equivalence() {
  Rng rng(11);
  std::uniform_real_distribution<double> f_dist(0.25, 1.0), m_dist(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const PureState chi = testing::random_state(1, rng);
    const double f = f_dist(rng), m = m_dist(rng);
    const double got = teleport_expected(chi, f, BsmModel{m}).fidelity;
    worst = std::max(worst, std::abs(got - oracle::teleport_fidelity(chi[0], chi[1], f, m)));
  }
  report(11, "oracle equivalence", worst < 1e-10, fmt("max |diff| = %.1e over 200 random triples", worst));
}

}  // namespace

int main() {
  try {
    ideal_protocol();
    werner_closed_form();
    distinguishability();
    geometry();
    link_endpoints();
    campaign();
    error_budget_check();
    classical();
    statistics();
    fibre();
    oracle_equivalence();
  } catch (const std::exception& e) {
    std::printf("acceptance aborted: %s\n", e.what());
    return 2;
  }
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}

#include "uplink/calibrate.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <functional>
#include <numbers>

namespace uplink {

CalibratedParameters extract_parameters(const CampaignConfig& c) {
  return {c.bsm.mode_overlap,
          c.source.double_pair_fraction,
          c.channel.delta_polarization_rad,
          c.detection.background_rate_hz,
          c.detection.receiver_efficiency,
          c.link.zenith_transmittance,
          c.link.system_efficiency_db,
          c.link.slew_degradation_k};
}

void apply_parameters(CampaignConfig& c, const CalibratedParameters& p) {
  c.bsm.mode_overlap = p.mode_overlap;
  c.source.double_pair_fraction = p.double_pair_fraction;
  c.channel.delta_polarization_rad = p.delta_polarization_rad;
  c.detection.background_rate_hz = p.background_rate_hz;
  c.detection.receiver_efficiency = p.receiver_efficiency;
  c.link.zenith_transmittance = p.zenith_transmittance;
  c.link.system_efficiency_db = p.system_efficiency_db;
  c.link.slew_degradation_k = p.slew_degradation_k;
}

double anchor_time_s(const PassGeometry& reference, double elevation_deg) {
  return -time_from_culmination_s(reference, elevation_deg);
}

Observables observe(const CampaignConfig& config, const std::vector<LossAnchor>& anchors) {
  Observables o;
  o.deficits = error_budget(config).deficit;
  for (const LossAnchor& a : anchors) {
    o.anchor_loss_db.push_back(
        link_loss_db(a.elevation_deg, anchor_time_s(config.geometry, a.elevation_deg), config.geometry, config.link));
  }
  o.total_counts = analytic_campaign(config).total_counts;
  return o;
}

CalibrationTargets targets_from_model(const CampaignConfig& config, const std::vector<double>& anchor_elevations_deg) {
  std::vector<LossAnchor> anchors;
  for (double e : anchor_elevations_deg) anchors.push_back({e, 0.0});
  const Observables o = observe(config, anchors);
  CalibrationTargets t;
  t.deficits = o.deficits;
  for (std::size_t i = 0; i < anchors.size(); ++i) anchors[i].loss_db = o.anchor_loss_db[i];
  t.loss_anchors = anchors;
  t.total_counts = o.total_counts;
  return t;
}

namespace {

constexpr double kLossScaleDb = 10.0;

// Golden-section minimum of a unimodal function on [lo, hi].
double golden_minimum(const std::function<double(double)>& f, double lo, double hi) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < 200 && (b - a) > 1e-15 * (1.0 + std::abs(a) + std::abs(b)); ++i) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = f(x2);
    }
  }
  const double mid = 0.5 * (a + b);
  // the bounds themselves win for monotone objectives
  double best = mid, fbest = f(mid);
  for (double edge : {lo, hi}) {
    const double fe = f(edge);
    if (fe < fbest) {
      best = edge;
      fbest = fe;
    }
  }
  return best;
}

// Per-state exposure, linear in receiver efficiency and background rate.
struct Exposure {
  std::array<double, 6> signal_per_efficiency{};
  std::array<double, 6> accidental_per_hz{};
  std::array<bool, 6> scheduled{};
};

Exposure exposure(const CampaignConfig& config) {
  CampaignConfig c = config;
  c.detection.receiver_efficiency = 1.0;
  c.detection.background_rate_hz = 1.0;
  c.noise.background = true;
  Exposure e;
  for (std::size_t i = 0; i < c.orbits.size(); ++i) {
    const auto s = static_cast<std::size_t>(c.schedule[i]);
    const ExpectedCounts n = expected_orbit_counts(c, i);
    e.signal_per_efficiency[s] += n.signal;
    e.accidental_per_hz[s] += n.accidental;
    e.scheduled[s] = true;
  }
  return e;
}

// Fast equivalent of error_budget(config).deficit[k] for a known exposure.
double deficit(const CampaignConfig& config, const Exposure& e, NoiseSource source) {
  CampaignConfig c = config;
  c.noise = NoiseToggles::only(source);
  double sum = 0.0;
  int used = 0;
  for (std::size_t s = 0; s < kMubLabels.size(); ++s) {
    if (!e.scheduled[s]) continue;
    const double fs = signal_fidelity(c, kMubLabels[s]);
    const double sig = c.detection.receiver_efficiency * e.signal_per_efficiency[s];
    const double acc = source == NoiseSource::Background ? c.detection.background_rate_hz * e.accidental_per_hz[s] : 0.0;
    sum += sig + acc > 0 ? (sig * fs + 0.5 * acc) / (sig + acc) : fs;
    ++used;
  }
  return 1.0 - sum / used;
}

double total_counts(const CampaignConfig& c, const Exposure& e) {
  double n = 0.0;
  for (std::size_t s = 0; s < kMubLabels.size(); ++s) {
    n += c.detection.receiver_efficiency * e.signal_per_efficiency[s];
    if (c.noise.background) n += c.detection.background_rate_hz * e.accidental_per_hz[s];
  }
  return n;
}

double square(double x) { return x * x; }

struct Objective {
  const CalibrationTargets& targets;

  Eigen::VectorXd loss_residuals(const CampaignConfig& c) const {
    Eigen::VectorXd r(static_cast<Eigen::Index>(targets.loss_anchors.size()));
    for (std::size_t i = 0; i < targets.loss_anchors.size(); ++i) {
      const LossAnchor& a = targets.loss_anchors[i];
      const double loss = link_loss_db(a.elevation_deg, anchor_time_s(c.geometry, a.elevation_deg), c.geometry, c.link);
      r(static_cast<Eigen::Index>(i)) = (loss - a.loss_db) / kLossScaleDb;
    }
    return r;
  }

  double deficit_term(const CampaignConfig& c, const Exposure& e, std::size_t k) const {
    return square(deficit(c, e, kNoiseSources[k]) - targets.deficits[k]);
  }

  double counts_term(const CampaignConfig& c, const Exposure& e) const {
    if (!(targets.total_counts > 0)) return 0.0;
    return square(total_counts(c, e) / targets.total_counts - 1.0);
  }

  double total(const CampaignConfig& c) const {
    const Exposure e = exposure(c);
    double r = loss_residuals(c).squaredNorm() + counts_term(c, e);
    for (std::size_t k = 0; k < 4; ++k) r += deficit_term(c, e, k);
    return r;
  }
};

// Damped Gauss-Newton on (T_zenith, system dB / 10, k) with minimum-norm
// steps, so underdetermined anchor sets move the start point as little as
// possible.
void fit_loss_block(CampaignConfig& c, const Objective& obj) {
  if (obj.targets.loss_anchors.empty()) return;
  auto pack = [](const LinkModel& m) { return Eigen::Vector3d(m.zenith_transmittance, m.system_efficiency_db / 10.0, m.slew_degradation_k); };
  auto unpack = [](LinkModel& m, const Eigen::Vector3d& x) {
    m.zenith_transmittance = std::clamp(x(0), 1e-3, 1.0);
    m.system_efficiency_db = std::clamp(x(1) * 10.0, -20.0, 60.0);
    m.slew_degradation_k = std::clamp(x(2), 0.0, 20.0);
  };
  for (int it = 0; it < 50; ++it) {
    const Eigen::VectorXd r = obj.loss_residuals(c);
    if (r.squaredNorm() < 1e-26) return;
    const Eigen::Vector3d x = pack(c.link);
    Eigen::MatrixXd jac(r.size(), 3);
    for (int j = 0; j < 3; ++j) {
      const double h = 1e-6;
      Eigen::Vector3d xp = x, xm = x;
      xp(j) += h;
      xm(j) -= h;
      CampaignConfig cp = c, cm = c;
      unpack(cp.link, xp);
      unpack(cm.link, xm);
      const double dx = pack(cp.link)(j) - pack(cm.link)(j);
      jac.col(j) = dx > 0 ? Eigen::VectorXd((obj.loss_residuals(cp) - obj.loss_residuals(cm)) / dx)
                          : Eigen::VectorXd::Zero(r.size());
    }
    const Eigen::Vector3d step = -jac.completeOrthogonalDecomposition().solve(r);
    double scale = 1.0;
    bool improved = false;
    for (int ls = 0; ls < 30; ++ls, scale *= 0.5) {
      CampaignConfig trial = c;
      unpack(trial.link, x + scale * step);
      if (obj.loss_residuals(trial).squaredNorm() < r.squaredNorm()) {
        c = trial;
        improved = true;
        break;
      }
    }
    if (!improved) return;
  }
}

}  // namespace

CalibrationReport calibrate(const CampaignConfig& base, const CalibrationTargets& targets) {
  base.validate();
  if (targets.max_iterations < 1) throw std::invalid_argument("calibrate: max_iterations must be positive");
  const Objective obj{targets};
  CampaignConfig c = base;
  CalibrationReport report;
  report.residual = obj.total(c);

  for (int sweep = 1; sweep <= targets.max_iterations && report.residual > targets.tolerance; ++sweep) {
    fit_loss_block(c, obj);
    const Exposure e = exposure(c);

    auto solve = [&](double& param, double lo, double hi, const std::function<double()>& term) {
      param = golden_minimum(
          [&](double v) {
            param = v;
            return term();
          },
          lo, hi);
    };
    solve(c.source.double_pair_fraction, 0.0, 0.999, [&] { return obj.deficit_term(c, e, 0); });
    solve(c.bsm.mode_overlap, 0.0, 1.0, [&] { return obj.deficit_term(c, e, 1); });
    solve(c.channel.delta_polarization_rad, 0.0, std::numbers::pi / 2, [&] { return obj.deficit_term(c, e, 2); });
    if (targets.total_counts > 0) {
      solve(c.detection.receiver_efficiency, 1e-9, 1.0, [&] { return obj.counts_term(c, e); });
    }
    solve(c.detection.background_rate_hz, 0.0, 1e5, [&] { return obj.deficit_term(c, e, 3); });

    report.iterations = sweep;
    report.residual = obj.total(c);
  }

  report.params = extract_parameters(c);
  report.achieved = observe(c, targets.loss_anchors);
  report.converged = report.residual <= targets.tolerance;
  if (!report.converged) {
    throw CalibrationError("calibrate: residual " + std::to_string(report.residual) + " above tolerance after " +
                               std::to_string(report.iterations) + " sweeps",
                           report);
  }
  return report;
}

}  // namespace uplink

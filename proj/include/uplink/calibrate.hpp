#pragma once

// Fits the free model parameters to published observables: the one-at-a-time
// fidelity deficits, channel-loss anchors on the reference pass and the total
// fourfold count of the campaign.

#include "uplink/experiment.hpp"

#include <array>
#include <stdexcept>
#include <vector>

namespace uplink {

struct LossAnchor {
  double elevation_deg;  // on the rising half of the reference pass
  double loss_db;
};

struct CalibrationTargets {
  std::array<double, 4> deficits{};  // indexed like kNoiseSources
  std::vector<LossAnchor> loss_anchors;
  double total_counts = 0.0;
  int max_iterations = 100;  // block sweeps
  double tolerance = 1e-12;  // on the summed squared residual
};

struct CalibratedParameters {
  double mode_overlap;
  double double_pair_fraction;
  double delta_polarization_rad;
  double background_rate_hz;
  double receiver_efficiency;
  double zenith_transmittance;
  double system_efficiency_db;
  double slew_degradation_k;
};

CalibratedParameters extract_parameters(const CampaignConfig& config);
void apply_parameters(CampaignConfig& config, const CalibratedParameters& params);

/// Model outputs matching the target layout.
struct Observables {
  std::array<double, 4> deficits{};
  std::vector<double> anchor_loss_db;
  double total_counts = 0.0;
};

/// Evaluated through error_budget, pass_loss_db and analytic_campaign.
Observables observe(const CampaignConfig& config, const std::vector<LossAnchor>& anchors);

/// Time on the reference pass at which an anchor is evaluated.
double anchor_time_s(const PassGeometry& reference, double elevation_deg);

/// Targets that `config` reproduces exactly.
CalibrationTargets targets_from_model(const CampaignConfig& config, const std::vector<double>& anchor_elevations_deg);

struct CalibrationReport {
  CalibratedParameters params{};
  Observables achieved;
  double residual = 0.0;  // sum of squared normalized residuals
  int iterations = 0;
  bool converged = false;
};

class CalibrationError : public std::runtime_error {
 public:
  CalibrationError(const std::string& what, CalibrationReport best)
      : std::runtime_error(what), best_(std::move(best)) {}
  const CalibrationReport& best() const { return best_; }

 private:
  CalibrationReport best_;
};

/// Block coordinate descent starting from the parameters in `base`. Throws
/// CalibrationError carrying the best point found when the residual does not
/// fall below the tolerance within the iteration budget.
CalibrationReport calibrate(const CampaignConfig& base, const CalibrationTargets& targets);

}  // namespace uplink

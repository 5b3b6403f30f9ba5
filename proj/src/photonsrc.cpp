#include "uplink/photonsrc.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace uplink {

double SourceModel::fourfold_ground_rate_hz() const { return multiplex_rate(module_fourfold_rates_hz); }

void SourceModel::validate() const {
  if (rep_rate_hz < 0 || trigger_rate_hz < 0 || pair_rate_hz < 0) {
    throw std::invalid_argument("SourceModel: rates must be non-negative");
  }
  for (double r : module_fourfold_rates_hz) {
    if (!(r >= 0)) throw std::invalid_argument("SourceModel: module rates must be non-negative");
  }
  if (module_fourfold_rates_hz.empty()) throw std::invalid_argument("SourceModel: at least one module");
  if (!(entangled_fidelity >= 0.25 && entangled_fidelity <= 1.0)) {
    throw std::invalid_argument("SourceModel: entangled_fidelity must lie in [1/4, 1]");
  }
  if (!(double_pair_fraction >= 0.0 && double_pair_fraction < 1.0)) {
    throw std::invalid_argument("SourceModel: double_pair_fraction must lie in [0, 1)");
  }
}

namespace {

PureState plate_output(double qwp, double hwp) {
  return apply_unitary(apply_unitary(PureState::basis(1, 0), jones_qwp(qwp), {0}), jones_hwp(hwp), {0});
}

double infidelity(const PureState& target, double qwp, double hwp) {
  return 1.0 - overlap(target, plate_output(qwp, hwp));
}

constexpr std::array<std::pair<double, double>, 4> kCompass{{{1.0, 0.0}, {-1.0, 0.0}, {0.0, 1.0}, {0.0, -1.0}}};

}  // namespace

WaveplateSetting solve_waveplates(const PureState& target) {
  if (target.num_qubits() != 1) throw std::invalid_argument("solve_waveplates: single qubit only");
  constexpr double quarter = std::numbers::pi / 4;
  constexpr int steps = 180;  // 0.5 degree grid
  WaveplateSetting best{};
  double best_cost = 2.0;
  for (int i = 0; i <= steps; ++i) {
    const double q = -quarter + 2 * quarter * i / steps;
    for (int j = 0; j <= steps; ++j) {
      const double h = -quarter + 2 * quarter * j / steps;
      const double c = infidelity(target, q, h);
      // prefer the smallest QWP angle among equal grid optima
      if (c < best_cost - 1e-12 || (std::abs(c - best_cost) <= 1e-12 && std::abs(q) < std::abs(best.qwp_rad))) {
        best_cost = c;
        best = {q, h};
      }
    }
  }
  // compass search
  double step = 2 * quarter / steps;
  while (step > 1e-13 && best_cost > 1e-15) {
    bool moved = false;
    for (auto [dq, dh] : kCompass) {
      WaveplateSetting trial{best.qwp_rad + dq * step, best.hwp_rad + dh * step};
      if (std::abs(trial.qwp_rad) > quarter) continue;
      // HWP(h + pi/2) = -HWP(h): wrap the half-wave angle back into range
      if (trial.hwp_rad > quarter) trial.hwp_rad -= 2 * quarter;
      if (trial.hwp_rad < -quarter) trial.hwp_rad += 2 * quarter;
      const double c = infidelity(target, trial.qwp_rad, trial.hwp_rad);
      if (c < best_cost) {
        best_cost = c;
        best = trial;
        moved = true;
      }
    }
    if (!moved) step /= 2;
  }
  return best;
}

PreparedInput prepare_input(std::complex<double> alpha, std::complex<double> beta) {
  const double norm2 = std::norm(alpha) + std::norm(beta);
  if (!(norm2 > 0.0)) throw std::invalid_argument("prepare_input: alpha = beta = 0");
  PureState state = PureState::qubit(alpha, beta);
  return {state, solve_waveplates(state), std::abs(norm2 - 1.0) > 1e-10};
}

double werner_weight(double entangled_fidelity) {
  if (!(entangled_fidelity >= 0.25 && entangled_fidelity <= 1.0)) {
    throw std::invalid_argument("werner_pair: fidelity must lie in [1/4, 1]");
  }
  return (4.0 * entangled_fidelity - 1.0) / 3.0;
}

DensityMatrix werner_pair(double entangled_fidelity) {
  const double p = werner_weight(entangled_fidelity);
  const Operator mixed = Operator::Identity(4, 4) / 4.0;
  return DensityMatrix(p * projector(bell_state<double>(Bell::PhiPlus)) + (1.0 - p) * mixed);
}

Emission sample_emission(const SourceModel& source, Rng& rng, double emission_probability) {
  if (!(emission_probability >= 0.0 && emission_probability <= 1.0)) {
    throw std::invalid_argument("sample_emission: emission probability must lie in [0, 1]");
  }
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (emission_probability < 1.0 && u(rng) >= emission_probability) return Emission::None;
  if (source.double_pair_fraction > 0.0 && u(rng) < source.double_pair_fraction) return Emission::DoublePair;
  return Emission::SinglePair;
}

double multiplex_rate(std::span<const double> rates_hz) {
  return std::accumulate(rates_hz.begin(), rates_hz.end(), 0.0);
}

}  // namespace uplink

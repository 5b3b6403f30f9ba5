#pragma once

// SPDC four-photon source: heralded input-state preparation, the imperfect
// entangled resource and event-level emission sampling.

#include "uplink/qstate.hpp"

#include <complex>
#include <random>
#include <span>
#include <vector>

namespace uplink {

using Rng = std::mt19937_64;

struct SourceModel {
  double rep_rate_hz = 80e6;
  double trigger_rate_hz = 5.7e5;       // heralded single photons (photon 1)
  double pair_rate_hz = 1e6;            // entangled pairs (photons 2, 3)
  double entangled_fidelity = 0.933;    // with respect to |phi+>
  double double_pair_fraction = 0.0;    // of heralded four-photon events
  // Ground four-photon rate of each multiplexed module. The second entry is
  // inferred as 8210 - 4080.
  std::vector<double> module_fourfold_rates_hz{4080.0, 4130.0};

  int num_modules() const { return static_cast<int>(module_fourfold_rates_hz.size()); }
  double fourfold_ground_rate_hz() const;

  /// Throws std::invalid_argument when an invariant is broken.
  void validate() const;
};

struct WaveplateSetting {
  double qwp_rad = 0.0;
  double hwp_rad = 0.0;
};

struct PreparedInput {
  PureState state;
  // Photon 1 leaves the heralding PBS as |H>, passes the QWP and then the HWP:
  // state = HWP(hwp) * QWP(qwp) * |H> up to a global phase.
  WaveplateSetting plates;
  bool renormalized = false;  // set when |alpha|^2 + |beta|^2 was off by more than 1e-10
};

PreparedInput prepare_input(std::complex<double> alpha, std::complex<double> beta);

/// Numerically inverts HWP(h) QWP(q) |H> = target over q, h in [-pi/4, pi/4].
WaveplateSetting solve_waveplates(const PureState& target);

/// Werner mixing weight p = (4F - 1) / 3.
double werner_weight(double entangled_fidelity);

/// p |phi+><phi+| + (1 - p) I/4 with fidelity `entangled_fidelity` to |phi+>.
DensityMatrix werner_pair(double entangled_fidelity);

enum class Emission { None, SinglePair, DoublePair };

/// Event-level draw. With probability `emission_probability` a four-photon
/// emission happens; given an emission it is a double pair with probability
/// `source.double_pair_fraction`.
Emission sample_emission(const SourceModel& source, Rng& rng, double emission_probability = 1.0);

/// Independent modules add.
double multiplex_rate(std::span<const double> rates_hz);

}  // namespace uplink

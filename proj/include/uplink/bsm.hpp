#pragma once

// Two-outcome Bell-state analyzer built from a PBS and +/-45 degree analysis,
// with partial distinguishability of photons 1 and 2.
//
// Qubit order of the joint state is (photon 1, photon 2, photon 3).

#include "uplink/qstate.hpp"

#include <array>
#include <optional>

namespace uplink {

struct BsmModel {
  // Two-photon interference visibility of photons 1 and 2, in [0, 1].
  double mode_overlap = 1.0;

  void validate() const;
};

enum class BsmOutcome { PhiPlus, PhiMinus, Fail };

struct BsmEffects {
  Operator phi_plus;
  Operator phi_minus;
  Operator fail;  // psi+/psi- coincidences rejected by post-selection
};

/// Effects on photons (1, 2). Only the |HH><VV| coherence, which the +/-45
/// analysis needs, is scaled by the mode overlap.
BsmEffects bsm_effects(const BsmModel& model);

struct BsmBranch {
  BsmOutcome outcome;
  double probability;
  std::optional<DensityMatrix> photon3;  // empty for impossible outcomes
};

/// Branches in the order PhiPlus, PhiMinus, Fail.
std::array<BsmBranch, 3> bsm_apply(const DensityMatrix& joint, const BsmModel& model);

/// pi phase (Pauli Z) correction for PhiMinus; identity for PhiPlus.
/// Throws std::logic_error for Fail.
DensityMatrix feed_forward(BsmOutcome outcome, const DensityMatrix& photon3);

struct TeleportBranch {
  BsmOutcome outcome;
  double probability;                    // unconditional, out of all BSM inputs
  std::optional<DensityMatrix> corrected;
  double fidelity = 0.0;
};

struct TeleportExpectation {
  std::array<TeleportBranch, 2> branches;  // PhiPlus, PhiMinus
  double success_probability = 0.0;
  double fidelity = 0.0;  // averaged over the two accepted outcomes
};

/// Exact expected teleportation of `input` through a Werner resource and the
/// analyzer, no channel.
TeleportExpectation teleport_expected(const PureState& input, double entangled_fidelity,
                                      const BsmModel& model);

}  // namespace uplink

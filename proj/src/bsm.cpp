#include "uplink/bsm.hpp"

#include "uplink/photonsrc.hpp"

#include <stdexcept>

namespace uplink {

void BsmModel::validate() const {
  if (!(mode_overlap >= 0.0 && mode_overlap <= 1.0)) {
    throw std::invalid_argument("BsmModel: mode_overlap must lie in [0, 1]");
  }
}

BsmEffects bsm_effects(const BsmModel& model) {
  model.validate();
  const double m = model.mode_overlap;
  Operator same = Operator::Zero(4, 4);  // |HH><HH| + |VV><VV|
  same(0, 0) = 1.0;
  same(3, 3) = 1.0;
  Operator flip = Operator::Zero(4, 4);  // |HH><VV| + |VV><HH|
  flip(0, 3) = 1.0;
  flip(3, 0) = 1.0;

  BsmEffects e;
  e.phi_plus = 0.5 * same + 0.5 * m * flip;
  e.phi_minus = 0.5 * same - 0.5 * m * flip;
  e.fail = Operator::Identity(4, 4) - same;
  return e;
}

std::array<BsmBranch, 3> bsm_apply(const DensityMatrix& joint, const BsmModel& model) {
  if (joint.num_qubits() != 3) throw std::invalid_argument("bsm_apply: expects a 3-qubit state");
  const BsmEffects e = bsm_effects(model);
  const Qubits measured{0, 1};
  auto branch = [&](BsmOutcome o, const Operator& effect) {
    Conditioned c = condition(joint, effect, measured);
    return BsmBranch{o, c.probability, std::move(c.state)};
  };
  return {branch(BsmOutcome::PhiPlus, e.phi_plus), branch(BsmOutcome::PhiMinus, e.phi_minus),
          branch(BsmOutcome::Fail, e.fail)};
}

DensityMatrix feed_forward(BsmOutcome outcome, const DensityMatrix& photon3) {
  switch (outcome) {
    case BsmOutcome::PhiPlus: return photon3;
    case BsmOutcome::PhiMinus: return apply_unitary(photon3, pauli_z<double>(), {0});
    case BsmOutcome::Fail: break;
  }
  throw std::logic_error("feed_forward: failed Bell-state measurement has no correction");
}

TeleportExpectation teleport_expected(const PureState& input, double entangled_fidelity,
                                      const BsmModel& model) {
  if (input.num_qubits() != 1) throw std::invalid_argument("teleport_expected: single-qubit input");
  const DensityMatrix joint = tensor(DensityMatrix::from_pure(input), werner_pair(entangled_fidelity));
  const auto branches = bsm_apply(joint, model);

  TeleportExpectation out;
  double weighted = 0.0;
  for (std::size_t k = 0; k < 2; ++k) {
    const BsmBranch& b = branches[k];
    TeleportBranch& t = out.branches[k];
    t.outcome = b.outcome;
    t.probability = b.probability;
    if (b.photon3) {
      t.corrected = feed_forward(b.outcome, *b.photon3);
      t.fidelity = fidelity(input, *t.corrected);
      weighted += t.probability * t.fidelity;
    }
    out.success_probability += t.probability;
  }
  if (out.success_probability <= 0.0) throw std::domain_error("teleport_expected: no accepted outcome");
  out.fidelity = weighted / out.success_probability;
  return out;
}

}  // namespace uplink

#pragma once

#include "uplink/photonsrc.hpp"
#include "uplink/qstate.hpp"

#include <complex>
#include <filesystem>
#include <random>

namespace testing {

using uplink::Rng;

inline std::filesystem::path source_dir() { return UPLINK_SOURCE_DIR; }

inline uplink::PureState random_state(int qubits, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  uplink::Ket v(Eigen::Index{1} << qubits);
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = {n(rng), n(rng)};
  return uplink::PureState(v);
}

// Random mixed state: A A^dagger / tr with Gaussian A.
inline uplink::DensityMatrix random_density(int qubits, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const Eigen::Index d = Eigen::Index{1} << qubits;
  uplink::Operator a(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = {n(rng), n(rng)};
  uplink::Operator rho = a * a.adjoint();
  rho /= rho.trace().real();
  return uplink::DensityMatrix(rho);
}

inline uplink::Operator random_unitary(int qubits, Rng& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  const Eigen::Index d = Eigen::Index{1} << qubits;
  uplink::Operator a(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) a(i, j) = {n(rng), n(rng)};
  Eigen::HouseholderQR<uplink::Operator> qr(a);
  return qr.householderQ();
}

}  // namespace testing

#pragma once

// Dense polarization-qubit states for up to four photons.
//
// Basis convention: |H> is index 0 and |V> is index 1 of each qubit, and
// qubit 0 is the most significant bit of the composite index. A two-qubit
// amplitude vector is therefore ordered HH, HV, VH, VV.
//
// Everything here is templated on the real scalar; the rest of the library
// uses the double aliases at the bottom of the file.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <type_traits>
#include <vector>

namespace uplink {

inline constexpr int kMaxQubits = 4;

using Qubits = std::vector<int>;

template <typename Real>
using KetT = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
template <typename Real>
using OperatorT = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using Matrix2T = Eigen::Matrix<std::complex<Real>, 2, 2>;

// Operator parameter that does not take part in scalar deduction, so fixed-size
// Jones matrices convert implicitly.
template <typename Real>
using OperatorArg = std::type_identity_t<OperatorT<Real>>;

namespace tol {
template <typename Real>
inline constexpr Real kNorm = std::max(Real(1e-12), 64 * std::numeric_limits<Real>::epsilon());
template <typename Real>
inline constexpr Real kPsd = std::max(Real(1e-10), 1024 * std::numeric_limits<Real>::epsilon());
template <typename Real>
inline constexpr Real kUnitary = std::max(Real(1e-10), 1024 * std::numeric_limits<Real>::epsilon());
template <typename Real>
inline constexpr Real kImpossible = Real(1e-15);
}  // namespace tol

namespace detail {

inline int qubits_for_dim(Eigen::Index dim) {
  for (int n = 0; n <= kMaxQubits; ++n) {
    if (dim == (Eigen::Index{1} << n)) return n;
  }
  if (dim > 0 && (dim & (dim - 1)) == 0) {
    throw std::length_error("qstate: more than 4 qubits is not supported");
  }
  throw std::invalid_argument("qstate: dimension is not a power of two");
}

// Bit of `index` that holds qubit `q` in an n-qubit register.
inline int qubit_bit(Eigen::Index index, int q, int n) {
  return static_cast<int>((index >> (n - 1 - q)) & 1);
}

inline void check_targets(const Qubits& targets, int n) {
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (targets[i] < 0 || targets[i] >= n) {
      throw std::out_of_range("qstate: qubit index out of range");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (targets[i] == targets[j]) throw std::invalid_argument("qstate: repeated qubit index");
    }
  }
}

// Sub-index formed by the bits of `targets`, targets[0] most significant.
inline Eigen::Index gather(Eigen::Index index, const Qubits& targets, int n) {
  Eigen::Index sub = 0;
  for (int q : targets) sub = (sub << 1) | qubit_bit(index, q, n);
  return sub;
}

inline Eigen::Index mask_of(const Qubits& targets, int n) {
  Eigen::Index mask = 0;
  for (int q : targets) mask |= Eigen::Index{1} << (n - 1 - q);
  return mask;
}

template <typename Real>
OperatorT<Real> kron(const OperatorT<Real>& a, const OperatorT<Real>& b) {
  OperatorT<Real> out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

// Lift an operator on `targets` to the full n-qubit space (identity elsewhere).
template <typename Real>
OperatorT<Real> embed(const OperatorT<Real>& op, const Qubits& targets, int n) {
  check_targets(targets, n);
  const Eigen::Index dim = Eigen::Index{1} << n;
  if (op.rows() != (Eigen::Index{1} << targets.size()) || op.cols() != op.rows()) {
    throw std::invalid_argument("qstate: operator size does not match target count");
  }
  const Eigen::Index mask = mask_of(targets, n);
  OperatorT<Real> full = OperatorT<Real>::Zero(dim, dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    for (Eigen::Index j = 0; j < dim; ++j) {
      if ((i & ~mask) != (j & ~mask)) continue;
      full(i, j) = op(gather(i, targets, n), gather(j, targets, n));
    }
  }
  return full;
}

// Partial trace on an arbitrary square operator; keeps `keep` in the given order.
template <typename Real>
OperatorT<Real> partial_trace(const OperatorT<Real>& m, int n, const Qubits& keep) {
  check_targets(keep, n);
  Qubits traced;
  for (int q = 0; q < n; ++q) {
    if (std::find(keep.begin(), keep.end(), q) == keep.end()) traced.push_back(q);
  }
  const Eigen::Index kd = Eigen::Index{1} << keep.size();
  const Eigen::Index td = Eigen::Index{1} << traced.size();
  auto compose = [&](Eigen::Index k, Eigen::Index t) {
    Eigen::Index full = 0;
    for (std::size_t i = 0; i < keep.size(); ++i) {
      const auto b = (k >> (keep.size() - 1 - i)) & 1;
      full |= b << (n - 1 - keep[i]);
    }
    for (std::size_t i = 0; i < traced.size(); ++i) {
      const auto b = (t >> (traced.size() - 1 - i)) & 1;
      full |= b << (n - 1 - traced[i]);
    }
    return full;
  };
  OperatorT<Real> out = OperatorT<Real>::Zero(kd, kd);
  for (Eigen::Index a = 0; a < kd; ++a) {
    for (Eigen::Index b = 0; b < kd; ++b) {
      std::complex<Real> acc{0};
      for (Eigen::Index t = 0; t < td; ++t) acc += m(compose(a, t), compose(b, t));
      out(a, b) = acc;
    }
  }
  return out;
}

}  // namespace detail

template <typename Real>
bool is_unitary(const OperatorArg<Real>& u, Real tolerance = tol::kUnitary<Real>) {
  if (u.rows() != u.cols()) return false;
  const OperatorT<Real> id = OperatorT<Real>::Identity(u.rows(), u.cols());
  return (u.adjoint() * u - id).cwiseAbs().maxCoeff() <= tolerance;
}

/// Normalized pure state on 0..4 qubits.
template <typename Real>
class PureStateT {
 public:
  /// Normalizes `amplitudes`; a zero vector is rejected.
  explicit PureStateT(KetT<Real> amplitudes)
      : num_qubits_(detail::qubits_for_dim(amplitudes.size())), amplitudes_(std::move(amplitudes)) {
    const Real norm = amplitudes_.norm();
    if (!(norm > Real(0)) || !std::isfinite(static_cast<double>(norm))) {
      throw std::invalid_argument("PureState: zero or non-finite amplitude vector");
    }
    amplitudes_ /= norm;
  }

  static PureStateT basis(int num_qubits, Eigen::Index index) {
    KetT<Real> v = KetT<Real>::Zero(Eigen::Index{1} << num_qubits);
    v(index) = Real(1);
    return PureStateT(std::move(v));
  }

  static PureStateT qubit(std::complex<Real> alpha, std::complex<Real> beta) {
    KetT<Real> v(2);
    v << alpha, beta;
    return PureStateT(std::move(v));
  }

  const KetT<Real>& amplitudes() const { return amplitudes_; }
  std::complex<Real> operator[](Eigen::Index i) const { return amplitudes_(i); }
  int num_qubits() const { return num_qubits_; }
  Eigen::Index dim() const { return amplitudes_.size(); }

 private:
  int num_qubits_;
  KetT<Real> amplitudes_;
};

/// Hermitian, unit-trace, positive semidefinite matrix on 0..4 qubits.
template <typename Real>
class DensityMatrixT {
 public:
  /// Validates the invariants and stores the Hermitian part.
  explicit DensityMatrixT(const OperatorT<Real>& entries)
      : num_qubits_(detail::qubits_for_dim(entries.rows())) {
    if (entries.rows() != entries.cols()) {
      throw std::invalid_argument("DensityMatrix: matrix is not square");
    }
    if (!entries.allFinite()) throw std::invalid_argument("DensityMatrix: non-finite entry");
    if ((entries - entries.adjoint()).cwiseAbs().maxCoeff() > tol::kNorm<Real>) {
      throw std::invalid_argument("DensityMatrix: matrix is not Hermitian");
    }
    entries_ = (entries + entries.adjoint()) / Real(2);
    if (std::abs(entries_.trace().real() - Real(1)) > tol::kNorm<Real>) {
      throw std::invalid_argument("DensityMatrix: trace is not 1");
    }
    Eigen::SelfAdjointEigenSolver<OperatorT<Real>> solver(entries_, Eigen::EigenvaluesOnly);
    if (solver.eigenvalues().minCoeff() < -tol::kPsd<Real>) {
      throw std::invalid_argument("DensityMatrix: negative eigenvalue");
    }
  }

  static DensityMatrixT from_pure(const PureStateT<Real>& psi) {
    return DensityMatrixT(psi.amplitudes() * psi.amplitudes().adjoint());
  }

  static DensityMatrixT maximally_mixed(int num_qubits) {
    const Eigen::Index dim = Eigen::Index{1} << num_qubits;
    return DensityMatrixT(OperatorT<Real>::Identity(dim, dim) / Real(dim));
  }

  const OperatorT<Real>& matrix() const { return entries_; }
  std::complex<Real> operator()(Eigen::Index i, Eigen::Index j) const { return entries_(i, j); }
  int num_qubits() const { return num_qubits_; }
  Eigen::Index dim() const { return entries_.rows(); }
  Real trace() const { return entries_.trace().real(); }

 private:
  int num_qubits_;
  OperatorT<Real> entries_;
};

template <typename Real>
Matrix2T<Real> pauli_x() {
  Matrix2T<Real> m;
  m << Real(0), Real(1), Real(1), Real(0);
  return m;
}

template <typename Real>
Matrix2T<Real> pauli_y() {
  const std::complex<Real> i(0, 1);
  Matrix2T<Real> m;
  m << Real(0), -i, i, Real(0);
  return m;
}

template <typename Real>
Matrix2T<Real> pauli_z() {
  Matrix2T<Real> m;
  m << Real(1), Real(0), Real(0), Real(-1);
  return m;
}

/// Real rotation of the polarization plane, [[cos, sin], [-sin, cos]].
template <typename Real>
Matrix2T<Real> jones_rotation(Real theta) {
  const Real c = std::cos(theta), s = std::sin(theta);
  Matrix2T<Real> m;
  m << c, s, -s, c;
  return m;
}

/// Half-wave plate with fast axis at `theta`: R(-theta) diag(1,-1) R(theta).
template <typename Real>
Matrix2T<Real> jones_hwp(Real theta) {
  Matrix2T<Real> retarder = Matrix2T<Real>::Zero();
  retarder(0, 0) = Real(1);
  retarder(1, 1) = Real(-1);
  return jones_rotation(-theta) * retarder * jones_rotation(theta);
}

/// Quarter-wave plate with fast axis at `theta`: R(-theta) diag(1,i) R(theta).
/// With this sign convention jones_qwp(pi/4) maps |H> to |L> = (|H> - i|V>)/sqrt2
/// up to a global phase.
template <typename Real>
Matrix2T<Real> jones_qwp(Real theta) {
  Matrix2T<Real> retarder = Matrix2T<Real>::Zero();
  retarder(0, 0) = Real(1);
  retarder(1, 1) = std::complex<Real>(0, 1);
  return jones_rotation(-theta) * retarder * jones_rotation(theta);
}

template <typename Real>
PureStateT<Real> tensor(const PureStateT<Real>& a, const PureStateT<Real>& b) {
  if (a.num_qubits() + b.num_qubits() > kMaxQubits) {
    throw std::length_error("tensor: result exceeds 4 qubits");
  }
  KetT<Real> out(a.dim() * b.dim());
  for (Eigen::Index i = 0; i < a.dim(); ++i) out.segment(i * b.dim(), b.dim()) = a[i] * b.amplitudes();
  return PureStateT<Real>(std::move(out));
}

template <typename Real>
DensityMatrixT<Real> tensor(const DensityMatrixT<Real>& a, const DensityMatrixT<Real>& b) {
  if (a.num_qubits() + b.num_qubits() > kMaxQubits) {
    throw std::length_error("tensor: result exceeds 4 qubits");
  }
  return DensityMatrixT<Real>(detail::kron<Real>(a.matrix(), b.matrix()));
}

template <typename Real>
PureStateT<Real> apply_unitary(const PureStateT<Real>& psi, const OperatorArg<Real>& u, const Qubits& targets) {
  if (!is_unitary<Real>(u)) throw std::invalid_argument("apply_unitary: operator is not unitary");
  return PureStateT<Real>(detail::embed<Real>(u, targets, psi.num_qubits()) * psi.amplitudes());
}

template <typename Real>
DensityMatrixT<Real> apply_unitary(const DensityMatrixT<Real>& rho, const OperatorArg<Real>& u,
                                   const Qubits& targets) {
  if (!is_unitary<Real>(u)) throw std::invalid_argument("apply_unitary: operator is not unitary");
  const OperatorT<Real> full = detail::embed<Real>(u, targets, rho.num_qubits());
  return DensityMatrixT<Real>(full * rho.matrix() * full.adjoint());
}

template <typename Real>
DensityMatrixT<Real> partial_trace(const DensityMatrixT<Real>& rho, const Qubits& keep) {
  return DensityMatrixT<Real>(detail::partial_trace<Real>(rho.matrix(), rho.num_qubits(), keep));
}

template <typename Real>
struct ConditionedT {
  Real probability;
  /// Empty when the outcome is impossible (probability below 1e-15).
  std::optional<DensityMatrixT<Real>> state;
};

/// Applies a measurement effect on `targets` and returns the outcome
/// probability together with the normalized state of the other qubits
/// (in ascending qubit order).
template <typename Real>
ConditionedT<Real> condition(const DensityMatrixT<Real>& rho, const OperatorArg<Real>& effect,
                             const Qubits& targets) {
  if ((effect - effect.adjoint()).cwiseAbs().maxCoeff() > tol::kPsd<Real>) {
    throw std::invalid_argument("condition: effect is not Hermitian");
  }
  const OperatorT<Real> herm = (effect + effect.adjoint()) / Real(2);
  Eigen::SelfAdjointEigenSolver<OperatorT<Real>> solver(herm, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues().minCoeff() < -tol::kPsd<Real> ||
      solver.eigenvalues().maxCoeff() > Real(1) + tol::kPsd<Real>) {
    throw std::invalid_argument("condition: effect is not between 0 and identity");
  }
  const int n = rho.num_qubits();
  const OperatorT<Real> weighted = detail::embed<Real>(herm, targets, n) * rho.matrix();
  const Real p = std::clamp(weighted.trace().real(), Real(0), Real(1));
  if (p < tol::kImpossible<Real>) return {p, std::nullopt};

  Qubits rest;
  for (int q = 0; q < n; ++q) {
    if (std::find(targets.begin(), targets.end(), q) == targets.end()) rest.push_back(q);
  }
  OperatorT<Real> reduced = detail::partial_trace<Real>(weighted, n, rest) / p;
  reduced = (reduced + reduced.adjoint().eval()) / Real(2);
  return {p, DensityMatrixT<Real>(reduced)};
}

/// Tr(rho |chi><chi|), clamped to [0, 1].
template <typename Real>
Real fidelity(const PureStateT<Real>& ideal, const DensityMatrixT<Real>& rho) {
  if (ideal.dim() != rho.dim()) throw std::invalid_argument("fidelity: dimension mismatch");
  const Real f = (ideal.amplitudes().adjoint() * rho.matrix() * ideal.amplitudes())(0, 0).real();
  return std::clamp(f, Real(0), Real(1));
}

/// |<a|b>|^2
template <typename Real>
Real overlap(const PureStateT<Real>& a, const PureStateT<Real>& b) {
  if (a.dim() != b.dim()) throw std::invalid_argument("overlap: dimension mismatch");
  return std::norm(a.amplitudes().dot(b.amplitudes()));
}

template <typename Real>
OperatorT<Real> projector(const PureStateT<Real>& psi) {
  return psi.amplitudes() * psi.amplitudes().adjoint();
}

template <typename Real>
bool equal_up_to_phase(const PureStateT<Real>& a, const PureStateT<Real>& b, Real tolerance = Real(1e-10)) {
  return a.dim() == b.dim() && std::abs(Real(1) - overlap(a, b)) <= tolerance;
}

enum class Mub { H, V, Plus, Minus, R, L };

inline constexpr std::array<Mub, 6> kMubLabels{Mub::H, Mub::V, Mub::Plus, Mub::Minus, Mub::R, Mub::L};

constexpr std::string_view to_string(Mub label) {
  switch (label) {
    case Mub::H: return "H";
    case Mub::V: return "V";
    case Mub::Plus: return "+";
    case Mub::Minus: return "-";
    case Mub::R: return "R";
    case Mub::L: return "L";
  }
  return "?";
}

inline std::optional<Mub> parse_mub(std::string_view text) {
  for (Mub m : kMubLabels) {
    if (to_string(m) == text) return m;
  }
  return std::nullopt;
}

/// The orthogonal partner within the same basis.
constexpr Mub orthogonal(Mub label) {
  switch (label) {
    case Mub::H: return Mub::V;
    case Mub::V: return Mub::H;
    case Mub::Plus: return Mub::Minus;
    case Mub::Minus: return Mub::Plus;
    case Mub::R: return Mub::L;
    case Mub::L: return Mub::R;
  }
  return label;
}

template <typename Real>
PureStateT<Real> mub_state(Mub label) {
  const Real s = Real(1) / std::sqrt(Real(2));
  const std::complex<Real> i(0, 1);
  switch (label) {
    case Mub::H: return PureStateT<Real>::qubit(Real(1), Real(0));
    case Mub::V: return PureStateT<Real>::qubit(Real(0), Real(1));
    case Mub::Plus: return PureStateT<Real>::qubit(s, s);
    case Mub::Minus: return PureStateT<Real>::qubit(s, -s);
    case Mub::R: return PureStateT<Real>::qubit(s, i * s);
    case Mub::L: return PureStateT<Real>::qubit(s, -i * s);
  }
  throw std::invalid_argument("mub_state: unknown label");
}

template <typename Real>
std::array<PureStateT<Real>, 6> mub_states() {
  return {mub_state<Real>(Mub::H), mub_state<Real>(Mub::V), mub_state<Real>(Mub::Plus),
          mub_state<Real>(Mub::Minus), mub_state<Real>(Mub::R), mub_state<Real>(Mub::L)};
}

enum class Bell { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

template <typename Real>
PureStateT<Real> bell_state(Bell label) {
  KetT<Real> v = KetT<Real>::Zero(4);
  const Real s = Real(1) / std::sqrt(Real(2));
  switch (label) {
    case Bell::PhiPlus: v(0) = s; v(3) = s; break;
    case Bell::PhiMinus: v(0) = s; v(3) = -s; break;
    case Bell::PsiPlus: v(1) = s; v(2) = s; break;
    case Bell::PsiMinus: v(1) = s; v(2) = -s; break;
  }
  return PureStateT<Real>(std::move(v));
}

using PureState = PureStateT<double>;
using DensityMatrix = DensityMatrixT<double>;
using Conditioned = ConditionedT<double>;
using Ket = KetT<double>;
using Operator = OperatorT<double>;
using Matrix2 = Matrix2T<double>;

}  // namespace uplink

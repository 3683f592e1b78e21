#pragma once

#include "kaonbell/dynamics.hpp"

namespace kaonbell {

using Vector4c = Eigen::Vector4cd;

/// Pure two-kaon state in the ordered basis |K0K0>, |K0K0bar>, |K0barK0>, |K0barK0bar>
/// (left factor first).
class BipartiteState {
 public:
  /// Throws PhysicsError if the squared norm differs from 1 by more than 1e-12.
  BipartiteState(Complex c00, Complex c01, Complex c10, Complex c11);

  static BipartiteState normalized(const Vector4c& amplitudes);

  /// (|K0 K0bar> - |K0bar K0>) / sqrt(2).
  static BipartiteState singlet();

  const Vector4c& amplitudes() const { return amps_; }
  Complex amplitude(int left, int right) const { return amps_(2 * left + right); }

  /// C with C(left, right) = amplitude; the left reduced density is C C^+.
  Matrix2c coefficient_matrix() const;

  /// Tr(rho_left^2): 1/2 for maximally entangled, 1 for product states.
  double reduced_purity() const;

  /// |<this|other>|^2.
  double fidelity(const BipartiteState& other) const;

 private:
  explicit BipartiteState(const Vector4c& amps);
  Vector4c amps_;
};

inline BipartiteState singlet() { return BipartiteState::singlet(); }

/// Probabilities behind one correlator. "No" lumps a surviving kaon orthogonal
/// to the tested quasi-spin together with a kaon that already decayed.
struct JointOutcome {
  double p_yy = 0.0;
  double p_y_left = 0.0;
  double p_y_right = 0.0;

  /// E = P(yy) - P(yn) - P(ny) + P(nn).
  double expectation() const { return 1.0 - 2.0 * p_y_left - 2.0 * p_y_right + 4.0 * p_yy; }
};

JointOutcome joint_probabilities(const BipartiteState& state, const EffectivePropagator& propagator,
                                 const Quasispin& k_left, double t_left, const Quasispin& k_right,
                                 double t_right);

JointOutcome joint_probabilities(const BipartiteState& state, const KaonPhysics& physics,
                                 const Quasispin& k_left, double t_left, const Quasispin& k_right,
                                 double t_right);

double expectation(const BipartiteState& state, const EffectivePropagator& propagator,
                   const Quasispin& k_left, double t_left, const Quasispin& k_right, double t_right);

double expectation(const BipartiteState& state, const KaonPhysics& physics, const Quasispin& k_left,
                   double t_left, const Quasispin& k_right, double t_right);

/// Hermitian O with E = <psi|O|psi> for every initial pure state psi.
Matrix4c correlation_operator(const EffectivePropagator& propagator, const Quasispin& k_left,
                              double t_left, const Quasispin& k_right, double t_right);

/// The same probabilities from the bipartite master equation on (H_s+H_f)^(x)2,
/// evolving each side with its own decay generator. Slow; used for cross-checks.
JointOutcome joint_probabilities_open_system(const BipartiteState& state, const KaonPhysics& physics,
                                             const Quasispin& k_left, double t_left,
                                             const Quasispin& k_right, double t_right,
                                             double step = kDefaultStep);

}  // namespace kaonbell

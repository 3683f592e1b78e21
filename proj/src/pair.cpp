#include "kaonbell/pair.hpp"

#include <cmath>
#include <stdexcept>

namespace kaonbell {

namespace {

void check_times(double t_left, double t_right) {
  if (!(t_left >= 0.0) || !(t_right >= 0.0)) throw std::invalid_argument("detection times must be >= 0");
}

Matrix2c effect(const EffectivePropagator& propagator, const Quasispin& k, double t) {
  const Vector2c v = propagator(t).adjoint() * k.ket();
  return v * v.adjoint();
}

Matrix4c kron2(const Matrix2c& a, const Matrix2c& b) {
  Matrix4c out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) out.block<2, 2>(2 * i, 2 * j) = a(i, j) * b;
  return out;
}

}  // namespace

BipartiteState::BipartiteState(Complex c00, Complex c01, Complex c10, Complex c11)
    : amps_(c00, c01, c10, c11) {
  const double norm2 = amps_.squaredNorm();
  if (!(std::abs(norm2 - 1.0) <= 1e-12)) {
    throw PhysicsError("bipartite state is not normalized (norm^2 = " + std::to_string(norm2) + ")");
  }
}

BipartiteState::BipartiteState(const Vector4c& amps) : amps_(amps) {}

BipartiteState BipartiteState::normalized(const Vector4c& amplitudes) {
  const double n = amplitudes.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw PhysicsError("cannot normalize a zero state");
  return BipartiteState(Vector4c(amplitudes / n));
}

BipartiteState BipartiteState::singlet() {
  const double r = 1.0 / std::sqrt(2.0);
  return {0.0, r, -r, 0.0};
}

Matrix2c BipartiteState::coefficient_matrix() const {
  Matrix2c c;
  c << amps_(0), amps_(1), amps_(2), amps_(3);
  return c;
}

double BipartiteState::reduced_purity() const {
  const Matrix2c c = coefficient_matrix();
  const Matrix2c rho_left = c * c.adjoint();
  return (rho_left * rho_left).trace().real();
}

double BipartiteState::fidelity(const BipartiteState& other) const {
  return std::norm(amps_.dot(other.amps_));
}

JointOutcome joint_probabilities(const BipartiteState& state, const EffectivePropagator& propagator,
                                 const Quasispin& k_left, double t_left, const Quasispin& k_right,
                                 double t_right) {
  check_times(t_left, t_right);
  const Matrix2c c = state.coefficient_matrix();
  const Matrix2c u_left = propagator(t_left);
  const Matrix2c u_right = propagator(t_right);

  // Amplitudes with the left (right) kaon projected and the other side untouched.
  const Eigen::RowVector2cd left = k_left.ket().adjoint() * u_left * c;
  const Eigen::RowVector2cd right = k_right.ket().adjoint() * u_right * c.transpose();
  const Complex both = left * u_right.transpose() * k_right.ket().conjugate();

  return {std::norm(both), left.squaredNorm(), right.squaredNorm()};
}

JointOutcome joint_probabilities(const BipartiteState& state, const KaonPhysics& physics,
                                 const Quasispin& k_left, double t_left, const Quasispin& k_right,
                                 double t_right) {
  return joint_probabilities(state, EffectivePropagator(physics), k_left, t_left, k_right, t_right);
}

double expectation(const BipartiteState& state, const EffectivePropagator& propagator,
                   const Quasispin& k_left, double t_left, const Quasispin& k_right, double t_right) {
  return joint_probabilities(state, propagator, k_left, t_left, k_right, t_right).expectation();
}

double expectation(const BipartiteState& state, const KaonPhysics& physics, const Quasispin& k_left,
                   double t_left, const Quasispin& k_right, double t_right) {
  return expectation(state, EffectivePropagator(physics), k_left, t_left, k_right, t_right);
}

Matrix4c correlation_operator(const EffectivePropagator& propagator, const Quasispin& k_left,
                              double t_left, const Quasispin& k_right, double t_right) {
  check_times(t_left, t_right);
  const Matrix2c m_left = effect(propagator, k_left, t_left);
  const Matrix2c m_right = effect(propagator, k_right, t_right);
  const Matrix2c id = Matrix2c::Identity();
  return Matrix4c::Identity() - 2.0 * kron2(m_left, id) - 2.0 * kron2(id, m_right) +
         4.0 * kron2(m_left, m_right);
}

JointOutcome joint_probabilities_open_system(const BipartiteState& state, const KaonPhysics& physics,
                                             const Quasispin& k_left, double t_left,
                                             const Quasispin& k_right, double t_right, double step) {
  check_times(t_left, t_right);
  const LindbladBundle single = build_lindblad(physics);

  // Enlarged index 4 * a + b with a, b in {s0, s1, f0, f1}.
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(16);
  for (int l = 0; l < 2; ++l)
    for (int r = 0; r < 2; ++r) psi(4 * l + r) = state.amplitude(l, r);
  MatrixXc rho = psi * psi.adjoint();

  rho = evolve(single.lift_left(4), std::move(rho), t_left, step);
  rho = evolve(single.lift_right(4), std::move(rho), t_right, step);

  MatrixXc p_left = MatrixXc::Zero(4, 4);
  p_left.topLeftCorner(2, 2) = k_left.ket() * k_left.ket().adjoint();
  MatrixXc p_right = MatrixXc::Zero(4, 4);
  p_right.topLeftCorner(2, 2) = k_right.ket() * k_right.ket().adjoint();
  const MatrixXc id = MatrixXc::Identity(4, 4);

  JointOutcome out;
  out.p_yy = (kron(p_left, p_right) * rho).trace().real();
  out.p_y_left = (kron(p_left, id) * rho).trace().real();
  out.p_y_right = (kron(id, p_right) * rho).trace().real();
  return out;
}

}  // namespace kaonbell

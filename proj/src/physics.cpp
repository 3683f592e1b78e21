#include "kaonbell/physics.hpp"

#include <cmath>

namespace kaonbell {

void KaonPhysics::validate() const {
  if (!std::isfinite(gamma_s) || !std::isfinite(gamma_l) || !std::isfinite(delta_m) ||
      !std::isfinite(epsilon.real()) || !std::isfinite(epsilon.imag())) {
    throw PhysicsError("kaon constants must be finite");
  }
  if (gamma_s <= 0.0 || gamma_l <= 0.0) throw PhysicsError("decay widths must be positive");
  if (gamma_s <= gamma_l) throw PhysicsError("gamma_s must exceed gamma_l");
  if (delta_m <= 0.0) throw PhysicsError("delta_m must be positive");
  if (std::abs(delta()) >= 1.0) throw PhysicsError("|delta| must stay below 1");
}

double KaonPhysics::delta() const { return cp_delta(epsilon); }

double KaonPhysics::x() const { return delta_m / (0.5 * (gamma_s + gamma_l)); }

double cp_delta(Complex epsilon) { return 2.0 * epsilon.real() / (1.0 + std::norm(epsilon)); }

double epsilon_from_delta(double delta) {
  if (!(std::abs(delta) < 1.0)) throw PhysicsError("|delta| must stay below 1");
  if (delta == 0.0) return 0.0;
  // delta * eps^2 - 2 eps + delta = 0
  return delta / (1.0 + std::sqrt(1.0 - delta * delta));
}

Quasispin::Quasispin(Complex alpha, Complex beta) : ket_(alpha, beta) {
  const double norm2 = ket_.squaredNorm();
  if (!(std::abs(norm2 - 1.0) <= 1e-12)) {
    throw PhysicsError("quasi-spin is not normalized (|alpha|^2+|beta|^2 = " +
                       std::to_string(norm2) + ")");
  }
}

Quasispin Quasispin::normalized(Complex alpha, Complex beta) {
  const double n = std::sqrt(std::norm(alpha) + std::norm(beta));
  if (!(n > 0.0) || !std::isfinite(n)) throw PhysicsError("cannot normalize a zero quasi-spin");
  return {alpha / n, beta / n};
}

Eigen::Vector3d Quasispin::bloch() const {
  const Complex c = std::conj(ket_(0)) * ket_(1);
  return {2.0 * c.real(), 2.0 * c.imag(), std::norm(ket_(0)) - std::norm(ket_(1))};
}

Quasispin Quasispin::orthogonal() const {
  return {-std::conj(ket_(1)), std::conj(ket_(0))};
}

std::pair<Quasispin, Quasispin> mass_eigenstates(const KaonPhysics& physics) {
  const Complex one(1.0, 0.0);
  const Complex p = one + physics.epsilon;
  const Complex q = one - physics.epsilon;
  return {Quasispin::normalized(p, q), Quasispin::normalized(p, -q)};
}

std::pair<Quasispin, Quasispin> cp_eigenstates() {
  const double r = 1.0 / std::sqrt(2.0);
  return {Quasispin(r, r), Quasispin(r, -r)};
}

EffectiveHamiltonian effective_hamiltonian(const KaonPhysics& physics) {
  physics.validate();
  const auto [ks, kl] = mass_eigenstates(physics);

  Matrix2c basis;
  basis.col(0) = ks.ket();
  basis.col(1) = kl.ket();
  const Matrix2c eigenvalues =
      Eigen::Vector2cd(Complex(0.0, -0.5 * physics.gamma_s),
                       Complex(physics.delta_m, -0.5 * physics.gamma_l))
          .asDiagonal();
  const Matrix2c h_eff = basis * eigenvalues * basis.inverse();

  EffectiveHamiltonian out;
  out.mass = 0.5 * (h_eff + h_eff.adjoint());
  out.decay = Complex(0.0, 1.0) * (h_eff - h_eff.adjoint());

  Eigen::SelfAdjointEigenSolver<Matrix2c> solver(out.decay, Eigen::EigenvaluesOnly);
  if (solver.eigenvalues()(0) < -1e-12 * physics.gamma_s) {
    throw PhysicsError("decay matrix is indefinite for these widths and epsilon");
  }
  return out;
}

}  // namespace kaonbell

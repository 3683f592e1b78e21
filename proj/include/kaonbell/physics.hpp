#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

#include <Eigen/Dense>

namespace kaonbell {

using Complex = std::complex<double>;
using Matrix2c = Eigen::Matrix2cd;
using Vector2c = Eigen::Vector2cd;

/// Raised when a physical parameter set or state violates its invariants.
class PhysicsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Neutral-kaon constants in units where time is measured in tau_S = 1/gamma_s.
///
/// Only the mass difference delta_m = m_L - m_S enters any observable, so the
/// absolute masses are not stored. The CP-violation parameter epsilon enters
/// through the mass eigenstates K_S ~ (1+eps)|K0> + (1-eps)|K0bar> and
/// K_L ~ (1+eps)|K0> - (1-eps)|K0bar>.
struct KaonPhysics {
  double gamma_s = 1.0;
  double gamma_l = 1.0 / 600.0;
  double delta_m = 0.474;
  Complex epsilon{0.0, 0.0};

  /// Throws PhysicsError unless gamma_s > gamma_l > 0, delta_m > 0, |delta| < 1.
  void validate() const;

  /// Leptonic asymmetry 2 Re(eps) / (1 + |eps|^2).
  double delta() const;

  /// Oscillation-to-decay ratio delta_m / ((gamma_s + gamma_l) / 2).
  double x() const;
};

double cp_delta(Complex epsilon);

/// Real epsilon reproducing a given delta (the root with |eps| < 1).
double epsilon_from_delta(double delta);

/// A normalized superposition alpha|K0> + beta|K0bar>, i.e. one yes/no test.
class Quasispin {
 public:
  /// Throws PhysicsError if |alpha|^2 + |beta|^2 deviates from 1 by more than 1e-12.
  Quasispin(Complex alpha, Complex beta);

  /// Rescales (alpha, beta) to unit norm; throws on a zero vector.
  static Quasispin normalized(Complex alpha, Complex beta);
  static Quasispin from_ket(const Vector2c& ket) { return normalized(ket(0), ket(1)); }

  static Quasispin k0() { return {1.0, 0.0}; }
  static Quasispin k0bar() { return {0.0, 1.0}; }

  Complex alpha() const { return ket_(0); }
  Complex beta() const { return ket_(1); }
  const Vector2c& ket() const { return ket_; }

  Complex inner(const Quasispin& other) const { return ket_.dot(other.ket_); }

  /// Bloch vector of |k><k| with K0 at the north pole.
  Eigen::Vector3d bloch() const;

  Quasispin orthogonal() const;

 private:
  Vector2c ket_;
};

/// (K_S, K_L) under the (1 +/- eps) convention.
std::pair<Quasispin, Quasispin> mass_eigenstates(const KaonPhysics& physics);

/// (K_1, K_2), the CP = +1 and CP = -1 eigenstates for CP|K0> = |K0bar>.
std::pair<Quasispin, Quasispin> cp_eigenstates();

/// Hermitian mass and decay matrices with H_eff = mass - (i/2) decay.
struct EffectiveHamiltonian {
  Matrix2c mass;
  Matrix2c decay;

  Matrix2c effective() const { return mass - Complex(0.0, 0.5) * decay; }
};

/// Builds H and Gamma from the K_S/K_L eigendecomposition, taking m_S = 0 and
/// m_L = delta_m. Throws PhysicsError when Gamma comes out indefinite.
EffectiveHamiltonian effective_hamiltonian(const KaonPhysics& physics);

}  // namespace kaonbell

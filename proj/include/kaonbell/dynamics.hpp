#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "kaonbell/physics.hpp"

namespace kaonbell {

using Matrix4c = Eigen::Matrix4cd;
using MatrixXc = Eigen::MatrixXcd;

/// Raised when the integrated density leaves the physical cone beyond tolerance.
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultStep = 1e-3;
inline constexpr double kPositivityTolerance = 1e-8;

/// exp(-i H_eff t) in closed form from the K_S/K_L eigendecomposition.
class EffectivePropagator {
 public:
  explicit EffectivePropagator(const KaonPhysics& physics);

  /// Throws std::invalid_argument for t < 0.
  Matrix2c operator()(double t) const;

  const KaonPhysics& physics() const { return physics_; }

 private:
  KaonPhysics physics_;
  Matrix2c basis_;
  Matrix2c basis_inverse_;
};

Matrix2c effective_propagator(const KaonPhysics& physics, double t);

/// Principal square root of a Hermitian positive semidefinite matrix.
MatrixXc principal_sqrt(const MatrixXc& psd);

/// Surviving-sector density rho_ss.
struct SurvivingDensity {
  Matrix2c rho_ss = Matrix2c::Zero();

  double trace() const { return rho_ss.trace().real(); }
  void validate(double tolerance = 1e-12) const;
};

/// Density on H_s (+) H_f stored as its four 2x2 blocks.
class ExtendedDensity {
 public:
  ExtendedDensity() = default;

  /// Embeds a surviving density with rho_sf = rho_ff = 0.
  static ExtendedDensity from_surviving(const Matrix2c& rho_ss);
  static ExtendedDensity pure_surviving(const Quasispin& k);

  /// Splits a full 4x4 matrix; validates Hermiticity, positivity and unit trace.
  static ExtendedDensity from_matrix(const Matrix4c& rho,
                                     double positivity_tolerance = kPositivityTolerance);

  Matrix4c matrix() const;

  const Matrix2c& rho_ss() const { return ss_; }
  const Matrix2c& rho_sf() const { return sf_; }
  Matrix2c rho_fs() const { return sf_.adjoint(); }
  const Matrix2c& rho_ff() const { return ff_; }

  double surviving_trace() const { return ss_.trace().real(); }
  double final_trace() const { return ff_.trace().real(); }

 private:
  Matrix2c ss_ = Matrix2c::Zero();
  Matrix2c sf_ = Matrix2c::Zero();
  Matrix2c ff_ = Matrix2c::Zero();
};

/// A Lindblad operator on the enlarged single-kaon space.
struct LindbladGenerator {
  std::string label;
  Matrix4c op = Matrix4c::Zero();

  /// Extends a 2x2 operator A on H_s to A (+) 0.
  static LindbladGenerator on_surviving(std::string label, const Matrix2c& a);
};

/// sqrt(lambda) * diag(1, -1) in the K_S/K_L basis.
LindbladGenerator dephasing_generator(const KaonPhysics& physics, double lambda);

/// Hamiltonian and jump operators of a master equation
///   d rho/dt = -i[H, rho] - 1/2 sum_j (A_j^+ A_j rho + rho A_j^+ A_j - 2 A_j rho A_j^+).
/// Dimension 4 for one kaon; the pair helpers lift it to 16.
class LindbladBundle {
 public:
  LindbladBundle(MatrixXc hamiltonian, std::vector<MatrixXc> jumps, std::vector<std::string> labels);

  Eigen::Index dim() const { return hamiltonian_.rows(); }
  const MatrixXc& hamiltonian() const { return hamiltonian_; }
  const std::vector<MatrixXc>& jumps() const { return jumps_; }
  const std::vector<std::string>& labels() const { return labels_; }

  /// The 2x2 block B of the decay generator A_0 (only set by build_lindblad).
  const Matrix2c& decay_block() const { return decay_block_; }

  MatrixXc rhs(const MatrixXc& rho) const;

  /// Returns the bundle acting as (this) (x) 1 on a bipartite space.
  LindbladBundle lift_left(Eigen::Index other_dim) const;
  /// Returns the bundle acting as 1 (x) (this) on a bipartite space.
  LindbladBundle lift_right(Eigen::Index other_dim) const;

 private:
  friend LindbladBundle build_lindblad(const KaonPhysics&, std::span<const LindbladGenerator>);

  MatrixXc hamiltonian_;
  std::vector<MatrixXc> jumps_;
  std::vector<std::string> labels_;
  MatrixXc effective_;  // -i H - 1/2 sum A^+ A
  Matrix2c decay_block_ = Matrix2c::Zero();
};

/// Builds H (+) 0, the decay generator A_0 = [[0,0],[B,0]] with B = Gamma^{1/2},
/// plus the given extra generators. Extra generators must act on H_s only.
LindbladBundle build_lindblad(const KaonPhysics& physics,
                              std::span<const LindbladGenerator> extra = {});

/// Fixed-step RK4 on a raw matrix; the step is shortened so that t is hit exactly.
/// The observer, if set, sees (time, rho) at t = 0 and after every step.
MatrixXc evolve(const LindbladBundle& bundle, MatrixXc rho, double t, double step = kDefaultStep,
                const std::function<void(double, const MatrixXc&)>& observer = {});

/// Integrates a valid extended density; throws IntegrationError if the result
/// has an eigenvalue below -kPositivityTolerance or loses trace.
ExtendedDensity integrate_master(const LindbladBundle& bundle, const ExtendedDensity& initial,
                                 double t, double step = kDefaultStep);

struct TrajectorySample {
  double t;
  ExtendedDensity rho;
};

/// Same as integrate_master but keeps every step.
std::vector<TrajectorySample> integrate_master_trajectory(const LindbladBundle& bundle,
                                                          const ExtendedDensity& initial,
                                                          double t, double step = kDefaultStep);

/// Choi matrix sum_ij E_ij (x) Phi_t(E_ij) of the evolution map on the bundle's space.
MatrixXc choi_matrix(const LindbladBundle& bundle, double t, double step = kDefaultStep);

/// Kronecker product of dense complex matrices.
MatrixXc kron(const MatrixXc& a, const MatrixXc& b);

}  // namespace kaonbell

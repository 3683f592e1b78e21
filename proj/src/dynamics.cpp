#include "kaonbell/dynamics.hpp"

#include <cmath>
#include <stdexcept>

namespace kaonbell {

namespace {

constexpr double kTraceTolerance = 1e-10;

Matrix2c mass_basis(const KaonPhysics& physics) {
  const auto [ks, kl] = mass_eigenstates(physics);
  Matrix2c basis;
  basis.col(0) = ks.ket();
  basis.col(1) = kl.ket();
  return basis;
}

double min_hermitian_eigenvalue(const MatrixXc& m) {
  const MatrixXc herm = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<MatrixXc> solver(herm, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

void check_step(double t, double step) {
  if (!(t >= 0.0)) throw std::invalid_argument("evolution time must be >= 0");
  if (!(step > 0.0)) throw std::invalid_argument("integration step must be > 0");
}

ExtendedDensity checked_output(const MatrixXc& rho) {
  const double trace = rho.trace().real();
  if (std::abs(trace - 1.0) > kTraceTolerance) {
    throw IntegrationError("trace drifted to " + std::to_string(trace));
  }
  try {
    return ExtendedDensity::from_matrix(rho);
  } catch (const PhysicsError& e) {
    throw IntegrationError(std::string("integration accuracy failure: ") + e.what());
  }
}

}  // namespace

EffectivePropagator::EffectivePropagator(const KaonPhysics& physics)
    : physics_(physics), basis_(mass_basis(physics)), basis_inverse_(basis_.inverse()) {
  physics_.validate();
}

Matrix2c EffectivePropagator::operator()(double t) const {
  if (!(t >= 0.0)) throw std::invalid_argument("propagation time must be >= 0");
  const Complex short_factor(std::exp(-0.5 * physics_.gamma_s * t), 0.0);
  const Complex long_factor =
      std::exp(-0.5 * physics_.gamma_l * t) * std::polar(1.0, -physics_.delta_m * t);
  return basis_ * Eigen::Vector2cd(short_factor, long_factor).asDiagonal() * basis_inverse_;
}

Matrix2c effective_propagator(const KaonPhysics& physics, double t) {
  return EffectivePropagator(physics)(t);
}

MatrixXc principal_sqrt(const MatrixXc& psd) {
  Eigen::SelfAdjointEigenSolver<MatrixXc> solver(0.5 * (psd + psd.adjoint()));
  Eigen::VectorXd roots = solver.eigenvalues();
  for (Eigen::Index i = 0; i < roots.size(); ++i) {
    if (roots(i) < -1e-12) throw PhysicsError("square root of an indefinite matrix");
    roots(i) = std::sqrt(std::max(roots(i), 0.0));
  }
  return solver.eigenvectors() * roots.cast<Complex>().asDiagonal() * solver.eigenvectors().adjoint();
}

void SurvivingDensity::validate(double tolerance) const {
  if ((rho_ss - rho_ss.adjoint()).norm() > tolerance) throw PhysicsError("rho_ss is not Hermitian");
  if (min_hermitian_eigenvalue(rho_ss) < -kPositivityTolerance) {
    throw PhysicsError("rho_ss is not positive semidefinite");
  }
  const double tr = trace();
  if (tr < -tolerance || tr > 1.0 + tolerance) throw PhysicsError("trace of rho_ss outside [0, 1]");
}

ExtendedDensity ExtendedDensity::from_surviving(const Matrix2c& rho_ss) {
  SurvivingDensity{rho_ss}.validate();
  if (std::abs(rho_ss.trace().real() - 1.0) > kTraceTolerance) {
    throw PhysicsError("initial surviving density must have unit trace");
  }
  ExtendedDensity out;
  out.ss_ = rho_ss;
  return out;
}

ExtendedDensity ExtendedDensity::pure_surviving(const Quasispin& k) {
  return from_surviving(k.ket() * k.ket().adjoint());
}

ExtendedDensity ExtendedDensity::from_matrix(const Matrix4c& rho, double positivity_tolerance) {
  if ((rho - rho.adjoint()).norm() > 1e-10) throw PhysicsError("density is not Hermitian");
  if (std::abs(rho.trace().real() - 1.0) > kTraceTolerance) {
    throw PhysicsError("density trace differs from 1");
  }
  const double min_eig = min_hermitian_eigenvalue(rho);
  if (min_eig < -positivity_tolerance) {
    throw PhysicsError("density has negative eigenvalue " + std::to_string(min_eig));
  }
  const Matrix4c herm = 0.5 * (rho + rho.adjoint());
  ExtendedDensity out;
  out.ss_ = herm.topLeftCorner<2, 2>();
  out.sf_ = herm.topRightCorner<2, 2>();
  out.ff_ = herm.bottomRightCorner<2, 2>();
  return out;
}

Matrix4c ExtendedDensity::matrix() const {
  Matrix4c m;
  m << ss_, sf_, sf_.adjoint(), ff_;
  return m;
}

LindbladGenerator LindbladGenerator::on_surviving(std::string label, const Matrix2c& a) {
  LindbladGenerator g{std::move(label), Matrix4c::Zero()};
  g.op.topLeftCorner<2, 2>() = a;
  return g;
}

LindbladGenerator dephasing_generator(const KaonPhysics& physics, double lambda) {
  if (!(lambda >= 0.0)) throw std::invalid_argument("dephasing strength must be >= 0");
  const Matrix2c basis = mass_basis(physics);
  const Matrix2c z = basis * Eigen::Vector2cd(1.0, -1.0).asDiagonal() * basis.inverse();
  return LindbladGenerator::on_surviving("dephasing", std::sqrt(lambda) * z);
}

LindbladBundle::LindbladBundle(MatrixXc hamiltonian, std::vector<MatrixXc> jumps,
                               std::vector<std::string> labels)
    : hamiltonian_(std::move(hamiltonian)), jumps_(std::move(jumps)), labels_(std::move(labels)) {
  const Eigen::Index n = hamiltonian_.rows();
  if (hamiltonian_.cols() != n) throw std::invalid_argument("Hamiltonian must be square");
  if (labels_.size() != jumps_.size()) throw std::invalid_argument("one label per jump operator");
  effective_ = Complex(0.0, -1.0) * hamiltonian_;
  for (const auto& a : jumps_) {
    if (a.rows() != n || a.cols() != n) throw std::invalid_argument("jump operator dimension mismatch");
    effective_ -= 0.5 * a.adjoint() * a;
  }
}

MatrixXc LindbladBundle::rhs(const MatrixXc& rho) const {
  // rho need not be Hermitian (Choi construction feeds matrix units).
  MatrixXc out = effective_ * rho;
  out.noalias() += rho * effective_.adjoint();
  for (const auto& a : jumps_) out.noalias() += a * rho * a.adjoint();
  return out;
}

LindbladBundle LindbladBundle::lift_left(Eigen::Index other_dim) const {
  const MatrixXc id = MatrixXc::Identity(other_dim, other_dim);
  std::vector<MatrixXc> jumps;
  for (const auto& a : jumps_) jumps.push_back(kron(a, id));
  return {kron(hamiltonian_, id), std::move(jumps), labels_};
}

LindbladBundle LindbladBundle::lift_right(Eigen::Index other_dim) const {
  const MatrixXc id = MatrixXc::Identity(other_dim, other_dim);
  std::vector<MatrixXc> jumps;
  for (const auto& a : jumps_) jumps.push_back(kron(id, a));
  return {kron(id, hamiltonian_), std::move(jumps), labels_};
}

LindbladBundle build_lindblad(const KaonPhysics& physics, std::span<const LindbladGenerator> extra) {
  const EffectiveHamiltonian heff = effective_hamiltonian(physics);
  const Matrix2c b = principal_sqrt(heff.decay);

  MatrixXc hamiltonian = MatrixXc::Zero(4, 4);
  hamiltonian.topLeftCorner(2, 2) = heff.mass;

  MatrixXc decay = MatrixXc::Zero(4, 4);
  decay.bottomLeftCorner(2, 2) = b;

  std::vector<MatrixXc> jumps{decay};
  std::vector<std::string> labels{"decay"};
  for (const auto& g : extra) {
    Matrix4c outside = g.op;
    outside.topLeftCorner<2, 2>().setZero();
    if (outside.cwiseAbs().maxCoeff() > 0.0) {
      throw std::invalid_argument("generator '" + g.label + "' has support on the final-state sector");
    }
    jumps.emplace_back(g.op);
    labels.push_back(g.label);
  }
  LindbladBundle bundle(std::move(hamiltonian), std::move(jumps), std::move(labels));
  bundle.decay_block_ = b;
  return bundle;
}

MatrixXc evolve(const LindbladBundle& bundle, MatrixXc rho, double t, double step,
                const std::function<void(double, const MatrixXc&)>& observer) {
  check_step(t, step);
  if (rho.rows() != bundle.dim() || rho.cols() != bundle.dim()) {
    throw std::invalid_argument("density dimension does not match the generator");
  }
  const auto steps = static_cast<long>(std::ceil(t / step - 1e-9));
  const double h = steps > 0 ? t / static_cast<double>(steps) : 0.0;
  if (observer) observer(0.0, rho);
  for (long i = 0; i < steps; ++i) {
    const MatrixXc k1 = bundle.rhs(rho);
    const MatrixXc k2 = bundle.rhs(rho + 0.5 * h * k1);
    const MatrixXc k3 = bundle.rhs(rho + 0.5 * h * k2);
    const MatrixXc k4 = bundle.rhs(rho + h * k3);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (observer) observer(h * static_cast<double>(i + 1), rho);
  }
  return rho;
}

ExtendedDensity integrate_master(const LindbladBundle& bundle, const ExtendedDensity& initial,
                                 double t, double step) {
  if (bundle.dim() != 4) throw std::invalid_argument("single-kaon integration needs a 4x4 generator");
  return checked_output(evolve(bundle, initial.matrix(), t, step));
}

std::vector<TrajectorySample> integrate_master_trajectory(const LindbladBundle& bundle,
                                                          const ExtendedDensity& initial,
                                                          double t, double step) {
  if (bundle.dim() != 4) throw std::invalid_argument("single-kaon integration needs a 4x4 generator");
  std::vector<TrajectorySample> samples;
  evolve(bundle, initial.matrix(), t, step, [&](double time, const MatrixXc& rho) {
    samples.push_back({time, checked_output(rho)});
  });
  return samples;
}

MatrixXc choi_matrix(const LindbladBundle& bundle, double t, double step) {
  const Eigen::Index d = bundle.dim();
  MatrixXc choi = MatrixXc::Zero(d * d, d * d);
  for (Eigen::Index i = 0; i < d; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) {
      MatrixXc unit = MatrixXc::Zero(d, d);
      unit(i, j) = 1.0;
      choi.block(i * d, j * d, d, d) = evolve(bundle, std::move(unit), t, step);
    }
  }
  return choi;
}

MatrixXc kron(const MatrixXc& a, const MatrixXc& b) {
  MatrixXc out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

}  // namespace kaonbell

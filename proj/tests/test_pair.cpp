#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "kaonbell/pair.hpp"

using namespace kaonbell;

namespace {

KaonPhysics measured() {
  KaonPhysics p;
  p.epsilon = Complex(1.635e-3, 1.5e-3);
  return p;
}

Quasispin random_quasispin(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  return Quasispin::normalized(Complex(g(rng), g(rng)), Complex(g(rng), g(rng)));
}

BipartiteState random_state(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Vector4c v;
  for (auto& c : v) c = Complex(g(rng), g(rng));
  return BipartiteState::normalized(v);
}

Matrix2c random_unitary(std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  Matrix2c a;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) a(i, j) = Complex(g(rng), g(rng));
  return Eigen::HouseholderQR<Matrix2c>(a).householderQ();
}

// Quasi-spin with Bloch angle theta in the x-z plane.
Quasispin bloch_xz(double theta) { return Quasispin(std::cos(theta / 2), std::sin(theta / 2)); }

}  // namespace

TEST_CASE("singlet state") {
  const BipartiteState s = singlet();
  CHECK(s.amplitudes().norm() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(s.amplitude(1, 1) == Complex(0.0));
  CHECK(s.amplitude(0, 0) == Complex(0.0));
  CHECK(s.amplitude(0, 1).real() == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(s.amplitude(1, 0).real() == doctest::Approx(-1.0 / std::sqrt(2.0)));
  CHECK(s.reduced_purity() == doctest::Approx(0.5));
}

TEST_CASE("singlet is invariant under identical local rotations") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 20; ++i) {
    const Matrix2c u = random_unitary(rng);
    // (U (x) U) acting on c: C -> U C U^T
    const Matrix2c c = u * singlet().coefficient_matrix() * u.transpose();
    const BipartiteState rotated(c(0, 0), c(0, 1), c(1, 0), c(1, 1));
    CHECK(rotated.fidelity(singlet()) == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("bipartite state validation and purity") {
  CHECK_THROWS_AS(BipartiteState(1.0, 1.0, 0.0, 0.0), PhysicsError);
  CHECK_THROWS_AS(BipartiteState::normalized(Vector4c::Zero()), PhysicsError);
  const BipartiteState product(1.0, 0.0, 0.0, 0.0);
  CHECK(product.reduced_purity() == doctest::Approx(1.0));
  CHECK(product.fidelity(singlet()) == doctest::Approx(0.0));
}

TEST_CASE("singlet strangeness correlations at t = 0") {
  const KaonPhysics p;
  const JointOutcome o = joint_probabilities(singlet(), p, Quasispin::k0bar(), 0.0, Quasispin::k0bar(), 0.0);
  CHECK(o.p_yy == doctest::Approx(0.0));
  CHECK(o.p_y_left == doctest::Approx(0.5));
  CHECK(o.p_y_right == doctest::Approx(0.5));
  CHECK(o.expectation() == doctest::Approx(-1.0));
}

TEST_CASE("left marginal at t = 0 ignores the right side") {
  std::mt19937_64 rng(2);
  const KaonPhysics p = measured();
  for (int i = 0; i < 20; ++i) {
    const JointOutcome o =
        joint_probabilities(singlet(), p, Quasispin::k0bar(), 0.0, random_quasispin(rng), 3.0 * i);
    CHECK(o.p_y_left == doctest::Approx(0.5).epsilon(1e-15));
  }
}

TEST_CASE("decay-free correlator is -a.b") {
  std::mt19937_64 rng(4);
  const KaonPhysics p = measured();
  for (int i = 0; i < 50; ++i) {
    const Quasispin a = random_quasispin(rng), b = random_quasispin(rng);
    CHECK(std::abs(expectation(singlet(), p, a, 0.0, b, 0.0) + a.bloch().dot(b.bloch())) < 1e-12);
  }
  CHECK(expectation(singlet(), p, bloch_xz(0.0), 0.0, bloch_xz(std::numbers::pi / 3), 0.0) ==
        doctest::Approx(-std::cos(std::numbers::pi / 3)));
  // orthogonal quasi-spins on the two sides
  CHECK(expectation(singlet(), p, Quasispin::k0(), 0.0, Quasispin::k0bar(), 0.0) == doctest::Approx(1.0));
}

TEST_CASE("probability bounds and |E| <= 1") {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> t(0.0, 8.0);
  const EffectivePropagator u(measured());
  for (int i = 0; i < 200; ++i) {
    const JointOutcome o =
        joint_probabilities(random_state(rng), u, random_quasispin(rng), t(rng), random_quasispin(rng), t(rng));
    CHECK(o.p_yy >= 0.0);
    CHECK(o.p_yy <= std::min(o.p_y_left, o.p_y_right) + 1e-15);
    CHECK(o.p_y_left <= 1.0 + 1e-15);
    CHECK(o.p_y_right <= 1.0 + 1e-15);
    CHECK(std::abs(o.expectation()) <= 1.0 + 1e-12);
  }
}

TEST_CASE("no-signalling") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> t(0.0, 6.0);
  const EffectivePropagator u(measured());
  for (int i = 0; i < 50; ++i) {
    const BipartiteState s = random_state(rng);
    const Quasispin kl = random_quasispin(rng), kr = random_quasispin(rng);
    const double tl = t(rng), tr = t(rng);
    const JointOutcome a = joint_probabilities(s, u, kl, tl, kr, tr);
    const JointOutcome b = joint_probabilities(s, u, kl, tl, random_quasispin(rng), t(rng));
    const JointOutcome c = joint_probabilities(s, u, random_quasispin(rng), t(rng), kr, tr);
    CHECK(std::abs(a.p_y_left - b.p_y_left) < 1e-12);
    CHECK(std::abs(a.p_y_right - c.p_y_right) < 1e-12);
  }
}

TEST_CASE("all-left-decayed limit") {
  std::mt19937_64 rng(10);
  const EffectivePropagator u(KaonPhysics{});
  for (int i = 0; i < 10; ++i) {
    const BipartiteState s = random_state(rng);
    const Quasispin kl = random_quasispin(rng), kr = random_quasispin(rng);
    const JointOutcome at_zero = joint_probabilities(s, u, kl, 0.0, kr, 0.0);
    CHECK(expectation(s, u, kl, 3.0e4, kr, 0.0) == doctest::Approx(1.0 - 2.0 * at_zero.p_y_right).epsilon(1e-12));
  }
  // both sides decayed: every event is NO-NO
  CHECK(expectation(singlet(), u, Quasispin::k0bar(), 3.0e4, Quasispin::k0bar(), 3.0e4) ==
        doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("correlation operator reproduces the expectation") {
  std::mt19937_64 rng(12);
  const EffectivePropagator u(measured());
  for (int i = 0; i < 20; ++i) {
    const Quasispin kl = random_quasispin(rng), kr = random_quasispin(rng);
    const Matrix4c o = correlation_operator(u, kl, 0.4 * i, kr, 0.7);
    CHECK((o - o.adjoint()).norm() < 1e-13);
    const BipartiteState s = random_state(rng);
    const double via_operator = s.amplitudes().dot(o * s.amplitudes()).real();
    CHECK(via_operator == doctest::Approx(expectation(s, u, kl, 0.4 * i, kr, 0.7)).epsilon(1e-12));
  }
}

TEST_CASE("negative times are rejected") {
  const KaonPhysics p;
  CHECK_THROWS_AS(joint_probabilities(singlet(), p, Quasispin::k0(), -0.1, Quasispin::k0(), 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(expectation(singlet(), p, Quasispin::k0(), 0.0, Quasispin::k0(), -2.0), std::invalid_argument);
}

TEST_CASE("enlarged-space oracle agrees with the effective propagator") {
  SUBCASE("singlet, strangeness, t = 1 on both sides") {
    const KaonPhysics p;
    const JointOutcome fast = joint_probabilities(singlet(), p, Quasispin::k0bar(), 1.0, Quasispin::k0bar(), 1.0);
    const JointOutcome slow =
        joint_probabilities_open_system(singlet(), p, Quasispin::k0bar(), 1.0, Quasispin::k0bar(), 1.0);
    CHECK(std::abs(fast.p_yy - slow.p_yy) < 1e-8);
    CHECK(std::abs(fast.p_y_left - slow.p_y_left) < 1e-8);
    CHECK(std::abs(fast.p_y_right - slow.p_y_right) < 1e-8);
  }
  SUBCASE("random state and settings, unequal times") {
    std::mt19937_64 rng(14);
    const KaonPhysics p = measured();
    const BipartiteState s = random_state(rng);
    const Quasispin kl = random_quasispin(rng), kr = random_quasispin(rng);
    const JointOutcome fast = joint_probabilities(s, p, kl, 0.35, kr, 1.7);
    const JointOutcome slow = joint_probabilities_open_system(s, p, kl, 0.35, kr, 1.7);
    CHECK(std::abs(fast.p_yy - slow.p_yy) < 1e-8);
    CHECK(std::abs(fast.p_y_left - slow.p_y_left) < 1e-8);
    CHECK(std::abs(fast.p_y_right - slow.p_y_right) < 1e-8);
  }
}

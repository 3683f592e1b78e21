#include "kaonbell/bell.hpp"

#include <cmath>
#include <cstdlib>
#include <stdexcept>

namespace kaonbell {

void BellTimes::validate() const {
  for (double t : {t_n, t_m, t_np, t_mp}) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw std::invalid_argument("Bell setting times must be finite and >= 0");
  }
}

std::array<double, 4> chsh_correlators(const BellSetting& s, const BipartiteState& state,
                                       const EffectivePropagator& propagator) {
  s.times.validate();
  const BellTimes& t = s.times;
  return {expectation(state, propagator, s.k_n, t.t_n, s.k_m, t.t_m),
          expectation(state, propagator, s.k_n, t.t_n, s.k_mp, t.t_mp),
          expectation(state, propagator, s.k_np, t.t_np, s.k_m, t.t_m),
          expectation(state, propagator, s.k_np, t.t_np, s.k_mp, t.t_mp)};
}

double chsh_value(const BellSetting& setting, const BipartiteState& state,
                  const EffectivePropagator& propagator) {
  const auto e = chsh_correlators(setting, state, propagator);
  return std::abs(e[0] - e[1]) + std::abs(e[2] + e[3]);
}

double chsh_value(const BellSetting& setting, const BipartiteState& state, const KaonPhysics& physics) {
  return chsh_value(setting, state, EffectivePropagator(physics));
}

double strangeness_chsh(const BellTimes& times, const BipartiteState& state,
                        const EffectivePropagator& propagator) {
  return chsh_value(BellSetting::strangeness(times), state, propagator);
}

double strangeness_chsh(const BellTimes& times, const BipartiteState& state, const KaonPhysics& physics) {
  return strangeness_chsh(times, state, EffectivePropagator(physics));
}

StateOptimum max_over_states(const BellSetting& s, const EffectivePropagator& propagator) {
  s.times.validate();
  const BellTimes& t = s.times;
  const Matrix4c minus = correlation_operator(propagator, s.k_n, t.t_n, s.k_m, t.t_m) -
                         correlation_operator(propagator, s.k_n, t.t_n, s.k_mp, t.t_mp);
  const Matrix4c plus = correlation_operator(propagator, s.k_np, t.t_np, s.k_m, t.t_m) +
                        correlation_operator(propagator, s.k_np, t.t_np, s.k_mp, t.t_mp);

  StateOptimum best;
  best.value = -1.0;
  Eigen::SelfAdjointEigenSolver<Matrix4c> solver;
  for (double s1 : {1.0, -1.0}) {
    for (double s2 : {1.0, -1.0}) {
      const Matrix4c op = s1 * minus + s2 * plus;
      solver.compute(0.5 * (op + op.adjoint()));
      const double top = solver.eigenvalues()(3);
      if (top > best.value) {
        best.value = top;
        best.state = BipartiteState::normalized(solver.eigenvectors().col(3));
      }
    }
  }
  return best;
}

int LhvStrategy::value() const {
  for (int v : {a1, a2, b1, b2}) {
    if (v != 1 && v != -1) throw std::invalid_argument("LHV outcomes must be +1 or -1");
  }
  return std::abs(a1 * b1 - a1 * b2) + std::abs(a2 * b1 + a2 * b2);
}

std::vector<LhvStrategy> lhv_strategies() {
  std::vector<LhvStrategy> out;
  out.reserve(16);
  for (int bits = 0; bits < 16; ++bits) {
    auto sign = [bits](int k) { return (bits >> k) & 1 ? -1 : 1; };
    out.push_back({sign(0), sign(1), sign(2), sign(3)});
  }
  return out;
}

int lhv_max() {
  int best = 0;
  for (const auto& s : lhv_strategies()) best = std::max(best, s.value());
  return best;
}

CpBellVerdict cp_bell_test(const KaonPhysics& physics) {
  physics.validate();
  CpBellVerdict v;
  v.delta = physics.delta();
  v.violated = v.delta > 0.0;
  v.margin = v.delta;
  return v;
}

}  // namespace kaonbell

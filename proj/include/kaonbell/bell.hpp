#pragma once

#include <array>
#include <vector>

#include "kaonbell/pair.hpp"

namespace kaonbell {

/// Detection times of the four CHSH settings. Alice uses (n, np), Bob (m, mp).
struct BellTimes {
  double t_n = 0.0;
  double t_m = 0.0;
  double t_np = 0.0;
  double t_mp = 0.0;

  void validate() const;
};

/// Four (quasi-spin, time) settings entering
///   S = |E(n,m) - E(n,mp)| + |E(np,m) + E(np,mp)|.
struct BellSetting {
  Quasispin k_n = Quasispin::k0bar();
  Quasispin k_m = Quasispin::k0bar();
  Quasispin k_np = Quasispin::k0bar();
  Quasispin k_mp = Quasispin::k0bar();
  BellTimes times;

  static BellSetting strangeness(const BellTimes& times) { return {.times = times}; }
};

/// The four correlators in CHSH order (nm, nmp, npm, npmp).
std::array<double, 4> chsh_correlators(const BellSetting& setting, const BipartiteState& state,
                                       const EffectivePropagator& propagator);

double chsh_value(const BellSetting& setting, const BipartiteState& state,
                  const EffectivePropagator& propagator);
double chsh_value(const BellSetting& setting, const BipartiteState& state, const KaonPhysics& physics);

/// Strangeness CHSH: all four quasi-spins pinned to |K0bar>. The times enter as
///   |E(t1,t2) - E(t1,t3)| + |E(t4,t2) + E(t4,t3)|, i.e. t1 = t_n, t2 = t_m, t3 = t_mp, t4 = t_np.
double strangeness_chsh(const BellTimes& times, const BipartiteState& state, const KaonPhysics& physics);
double strangeness_chsh(const BellTimes& times, const BipartiteState& state,
                        const EffectivePropagator& propagator);

/// Maximum of the CHSH value over all initial pure states for a fixed setting,
/// i.e. the largest eigenvalue of +/-(O_nm - O_nmp) +/-(O_npm + O_npmp).
struct StateOptimum {
  double value = 0.0;
  BipartiteState state = BipartiteState::singlet();
};
StateOptimum max_over_states(const BellSetting& setting, const EffectivePropagator& propagator);

/// A deterministic local assignment of +/-1 outcomes to each party's two settings.
struct LhvStrategy {
  int a1 = 1;
  int a2 = 1;
  int b1 = 1;
  int b2 = 1;

  /// |a1 b1 - a1 b2| + |a2 b1 + a2 b2|.
  int value() const;
};

std::vector<LhvStrategy> lhv_strategies();

/// Largest CHSH value over all 16 deterministic strategies.
int lhv_max();

struct CpBellVerdict {
  double delta = 0.0;
  bool violated = false;
  /// delta - 0; positive means the local-realistic bound delta <= 0 fails.
  double margin = 0.0;
  /// K_S and K_1 cannot be told apart in a detector, so the probabilities behind
  /// this inequality are not directly measurable.
  bool ks_k1_indistinguishable = true;
};

/// Tests delta <= 0 with delta = 2 Re(eps) / (1 + |eps|^2).
CpBellVerdict cp_bell_test(const KaonPhysics& physics);

}  // namespace kaonbell

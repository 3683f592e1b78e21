#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "kaonbell/bell.hpp"

namespace kaonbell {

/// Quasi-spin cos(theta/2)|K0> + e^{i phi} sin(theta/2)|K0bar>. Any real
/// angles are accepted; the map is periodic.
struct QuasispinParams {
  double theta = 0.0;
  double phi = 0.0;

  Quasispin to_quasispin() const;
  /// Inverse up to a global phase; theta in [0, pi], phi in [0, 2 pi).
  static QuasispinParams from_quasispin(const Quasispin& k);
};

/// Hyperspherical magnitudes and relative phases of a two-kaon pure state:
///   c00 = cos a1
///   c01 = sin a1 cos a2 e^{i p1}
///   c10 = sin a1 sin a2 cos a3 e^{i p2}
///   c11 = sin a1 sin a2 sin a3 e^{i p3}
struct PureStateParams {
  std::array<double, 3> angles{};
  std::array<double, 3> phases{};

  BipartiteState to_state() const;
  /// Fixes the global phase so that the first nonzero amplitude is real and >= 0.
  static PureStateParams from_state(const BipartiteState& state);
};

struct OptimizerConfig {
  int restarts = 3;
  int max_iterations = 2000;
  double tolerance = 1e-8;
  std::uint64_t seed = 20110601;
  double reflection = 1.0;
  double expansion = 2.0;
  double contraction = 0.5;
  double shrink = 0.5;
  /// Edge length of the initial simplex around each start point.
  double initial_step = 0.5;

  /// Throws std::invalid_argument unless restarts >= 1, max_iterations >= 1, tolerance > 0.
  void validate() const;
};

struct OptimizationResult {
  std::vector<double> params;
  double value = 0.0;
  /// True if the restart that produced the best value shrank its simplex below tolerance.
  bool converged = false;
  long iterations = 0;
  long evaluations = 0;
  /// Best value reached by each restart, in restart order.
  std::vector<double> restart_values;
  /// Best-so-far objective after every iteration, across all restarts.
  std::vector<double> history;
};

using Objective = std::function<double(std::span<const double>)>;

/// Maximizes the objective with a restarted Nelder-Mead simplex search.
///
/// Restart r starts from warm_starts[r] when one is supplied and otherwise from
/// a point drawn uniformly from [sample_low, sample_high)^dim with a generator
/// seeded from (config.seed, r), so the first k restarts do not depend on how many
/// follow. Within a restart the simplex is rebuilt around the best vertex each time
/// it collapses, until a rebuild no longer improves the value by more than the
/// tolerance or the iteration budget runs out.
OptimizationResult nelder_mead(const Objective& objective, std::size_t dim, const OptimizerConfig& config,
                               std::span<const std::vector<double>> warm_starts = {},
                               double sample_low = 0.0, double sample_high = 6.283185307179586);

/// Deterministic 64-bit mix of a seed and a stream index.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Parameter layout of the full CHSH search: (theta, phi) for k_n, k_m, k_np, k_mp,
/// then the six PureStateParams values.
inline constexpr std::size_t kChshParams = 14;

BellSetting setting_from_params(std::span<const double> params, const BellTimes& times);
BipartiteState state_from_params(std::span<const double> params);

/// Decay-free Tsirelson-optimal configurations (14 parameters each), rotated
/// locally so that one setting per side points along K_L. All four pairings are
/// returned; the first aligns the setting measured latest on each side.
std::vector<std::vector<double>> decay_free_embeddings(const BellTimes& times, const KaonPhysics& physics);

struct ChshOptimum {
  double s_max = 0.0;
  BipartiteState state = BipartiteState::singlet();
  std::array<Quasispin, 4> quasispins{Quasispin::k0(), Quasispin::k0(), Quasispin::k0(), Quasispin::k0()};
  BellTimes times;
  std::vector<double> params;
  bool converged = false;
  std::vector<double> restart_values;
};

/// Maximizes the CHSH value over the four quasi-spins and the initial pure state
/// at fixed times. The state is first profiled out exactly (top eigenvector of the
/// Bell operator), then all 14 parameters are polished jointly.
ChshOptimum maximize_chsh(const BellTimes& times, const KaonPhysics& physics, const OptimizerConfig& config);

enum class TimeMode { equal, zeros_first, zeros_second };

std::string_view to_string(TimeMode mode);
/// Throws std::invalid_argument on an unknown name.
TimeMode parse_time_mode(std::string_view name);

/// equal: all T; zeros_first: t_n = t_mp = T, t_m = t_np = 0; zeros_second: t_n = t_mp = 0, t_m = t_np = T.
BellTimes mode_times(TimeMode mode, double T);

struct ScanPoint {
  double T = 0.0;
  double s_max = 0.0;
  double purity = 0.0;
  bool converged = false;
  /// Non-empty if this point failed; the scan carries on.
  std::string error;
};

/// Runs maximize_chsh at every grid point with a per-point seed derived from
/// (config.seed, index). Results come back in grid order.
std::vector<ScanPoint> scan_times(TimeMode mode, std::span<const double> grid, const KaonPhysics& physics,
                                  const OptimizerConfig& config, unsigned threads = 0);

struct StrangenessSearch {
  /// If set, only the four times are optimized.
  std::optional<BipartiteState> pinned_state;
  double grid_max = 5.0;
  double grid_step = 0.25;
};

struct StrangenessOptimum {
  double s_max = 0.0;
  BellTimes times;
  BipartiteState state = BipartiteState::singlet();
  bool converged = false;
  std::vector<double> restart_values;
  /// Best value found on the pre-scan grid before refinement.
  double grid_best = 0.0;
};

/// Maximizes the strangeness CHSH over four times (and the state unless pinned):
/// grid pre-scan over [0, grid_max]^4, Nelder-Mead refinement of the best
/// config.restarts grid points, then a joint polish over times and state.
StrangenessOptimum maximize_strangeness(const KaonPhysics& physics, const OptimizerConfig& config,
                                        const StrangenessSearch& search = {});

}  // namespace kaonbell

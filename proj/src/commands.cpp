#include "kaonbell/commands.hpp"

#include <algorithm>
#include <cmath>

namespace kaonbell {

namespace {

std::string time_column(const RunConfig& config, std::string name) {
  return config.physical_units ? name + "_seconds" : name;
}

double display_time(const RunConfig& config, double t) { return config.physical_units ? t * kTauSSeconds : t; }

}  // namespace

std::vector<double> time_grid(double t_max, double step) {
  if (!(t_max >= 0.0) || !std::isfinite(t_max)) throw ConfigError("t_max must be finite and >= 0");
  if (!(step > 0.0)) throw ConfigError("step must be > 0");
  const auto n = static_cast<long>(std::floor(t_max / step + 1e-9));
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(n) + 1);
  for (long i = 0; i <= n; ++i) grid.push_back(static_cast<double>(i) * step);
  return grid;
}

Table oscillation_table(const RunConfig& config, double t_max, double step) {
  if (!(t_max > 0.0)) throw ConfigError("t_max must be > 0");
  const std::vector<double> grid = time_grid(t_max, step);
  const EffectivePropagator propagator(config.physics);
  const LindbladBundle bundle = build_lindblad(config.physics);
  const double rk_step = std::min(kDefaultStep, step);

  Table table{{time_column(config, "t"), "p_k0_k0", "p_k0_k0bar", "trace_rho_ss", "trace_rho_ff"}, {}};
  ExtendedDensity rho = ExtendedDensity::pure_surviving(Quasispin::k0());
  double previous = 0.0;
  for (double t : grid) {
    rho = integrate_master(bundle, rho, t - previous, rk_step);
    previous = t;
    const Vector2c psi = propagator(t) * Quasispin::k0().ket();
    table.add_row({display_time(config, t), std::norm(psi(0)), std::norm(psi(1)), rho.surviving_trace(),
                   rho.final_trace()});
  }
  return table;
}

Table scan_table(const RunConfig& config, TimeMode mode, double t_max, double step, unsigned threads) {
  const std::vector<double> grid = time_grid(t_max, step);
  const auto points = scan_times(mode, grid, config.physics, config.optimizer, threads);
  Table table{{time_column(config, "T"), "S_max", "reduced_purity", "converged"}, {}};
  for (const auto& p : points) {
    table.add_row({display_time(config, p.T), p.s_max, p.purity, p.converged && p.error.empty()});
  }
  return table;
}

Table strangeness_report(const RunConfig& config) {
  const StrangenessOptimum free = maximize_strangeness(config.physics, config.optimizer);
  StrangenessSearch pinned;
  pinned.pinned_state = BipartiteState::singlet();
  const StrangenessOptimum singlet = maximize_strangeness(config.physics, config.optimizer, pinned);

  const auto [lo, hi] = std::minmax_element(free.restart_values.begin(), free.restart_values.end());
  Table table{{"S_max", time_column(config, "t1"), time_column(config, "t2"), time_column(config, "t3"),
               time_column(config, "t4"), "c00_re", "c00_im", "c01_re", "c01_im", "c10_re", "c10_im", "c11_re",
               "c11_im", "reduced_purity", "converged", "restart_max", "restart_spread", "singlet_S_max"},
              {}};
  std::vector<Cell> row{free.s_max,
                        display_time(config, free.times.t_n),
                        display_time(config, free.times.t_m),
                        display_time(config, free.times.t_mp),
                        display_time(config, free.times.t_np)};
  for (Eigen::Index i = 0; i < 4; ++i) {
    row.emplace_back(free.state.amplitudes()(i).real());
    row.emplace_back(free.state.amplitudes()(i).imag());
  }
  row.emplace_back(free.state.reduced_purity());
  row.emplace_back(free.converged);
  row.emplace_back(*hi);
  row.emplace_back(*hi - *lo);
  row.emplace_back(singlet.s_max);
  table.add_row(std::move(row));
  return table;
}

Table cp_check_report(std::optional<double> delta, std::optional<double> epsilon) {
  if (delta.has_value() == epsilon.has_value()) throw ConfigError("give exactly one of delta or epsilon");
  KaonPhysics physics;
  try {
    physics.epsilon = Complex(epsilon ? *epsilon : epsilon_from_delta(*delta), 0.0);
    physics.validate();
  } catch (const PhysicsError& e) {
    throw ConfigError(e.what());
  }
  const CpBellVerdict verdict = cp_bell_test(physics);
  const CpBellVerdict measured = cp_bell_test(KaonPhysics{.epsilon = epsilon_from_delta(kMeasuredDelta)});

  std::string text = verdict.violated ? "VIOLATED" : (verdict.delta == 0.0 ? "not violated (boundary)" : "not violated");
  Table table{{"delta", "epsilon_re", "violated", "margin", "verdict", "measured_delta", "measured_delta_error",
               "measured_violated", "ks_k1_indistinguishable"},
              {}};
  table.add_row({verdict.delta, physics.epsilon.real(), verdict.violated, verdict.margin, std::move(text),
                 kMeasuredDelta, kMeasuredDeltaError, measured.violated, verdict.ks_k1_indistinguishable});
  return table;
}

}  // namespace kaonbell

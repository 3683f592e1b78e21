#include "kaonbell/optimize.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <thread>

namespace kaonbell {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double wrap_angle(double a) {
  double w = std::fmod(a, kTwoPi);
  return w < 0.0 ? w + kTwoPi : w;
}

struct Vertex {
  std::vector<double> x;
  double cost;  // negated objective; NaN mapped to +inf
};

class SimplexRun {
 public:
  SimplexRun(const Objective& objective, const OptimizerConfig& config, OptimizationResult& totals,
             double& global_best)
      : objective_(objective), config_(config), totals_(totals), global_best_(global_best) {}

  /// Runs one restart from `start`; returns (best vertex, converged).
  std::pair<Vertex, bool> run(const std::vector<double>& start) {
    long budget = config_.max_iterations;
    Vertex best = evaluate(start);
    bool converged = false;
    for (int cycle = 0; budget > 0; ++cycle) {
      const double before = best.cost;
      auto [cycle_best, cycle_converged] = descend(best.x, budget);
      if (cycle_best.cost <= best.cost) best = std::move(cycle_best);
      converged = cycle_converged;
      if (!cycle_converged) break;
      if (cycle > 0 && before - best.cost <= config_.tolerance) break;
    }
    return {best, converged};
  }

 private:
  Vertex evaluate(std::vector<double> x) {
    ++totals_.evaluations;
    const double f = objective_(x);
    return {std::move(x), std::isnan(f) ? std::numeric_limits<double>::infinity() : -f};
  }

  Vertex blend(const std::vector<double>& origin, const std::vector<double>& towards, double factor) {
    std::vector<double> x(origin.size());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = origin[i] + factor * (towards[i] - origin[i]);
    return evaluate(std::move(x));
  }

  void record(const Vertex& best) {
    ++totals_.iterations;
    global_best_ = std::max(global_best_, -best.cost);
    totals_.history.push_back(global_best_);
  }

  std::pair<Vertex, bool> descend(const std::vector<double>& start, long& budget) {
    const std::size_t n = start.size();
    std::vector<Vertex> simplex;
    simplex.reserve(n + 1);
    simplex.push_back(evaluate(start));
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> x = start;
      x[i] += config_.initial_step;
      simplex.push_back(evaluate(std::move(x)));
    }
    auto by_cost = [](const Vertex& a, const Vertex& b) { return a.cost < b.cost; };

    std::vector<double> centroid(n);
    while (true) {
      std::stable_sort(simplex.begin(), simplex.end(), by_cost);
      const Vertex& best = simplex.front();

      double diameter = 0.0;
      for (std::size_t v = 1; v <= n; ++v)
        for (std::size_t i = 0; i < n; ++i)
          diameter = std::max(diameter, std::abs(simplex[v].x[i] - best.x[i]));
      if (diameter < config_.tolerance) return {simplex.front(), true};
      if (budget <= 0) return {simplex.front(), false};
      --budget;

      std::fill(centroid.begin(), centroid.end(), 0.0);
      for (std::size_t v = 0; v < n; ++v)
        for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[v].x[i] / static_cast<double>(n);

      Vertex& worst = simplex.back();
      const double second_worst = simplex[n - 1].cost;
      Vertex reflected = blend(centroid, worst.x, -config_.reflection);

      if (reflected.cost < best.cost) {
        Vertex expanded = blend(centroid, reflected.x, config_.expansion);
        worst = expanded.cost < reflected.cost ? std::move(expanded) : std::move(reflected);
      } else if (reflected.cost < second_worst) {
        worst = std::move(reflected);
      } else {
        const bool outside = reflected.cost < worst.cost;
        Vertex contracted = outside ? blend(centroid, reflected.x, config_.contraction)
                                    : blend(centroid, worst.x, config_.contraction);
        if (contracted.cost < (outside ? reflected.cost : worst.cost)) {
          worst = std::move(contracted);
        } else {
          for (std::size_t v = 1; v <= n; ++v) simplex[v] = blend(simplex[0].x, simplex[v].x, config_.shrink);
        }
      }
      record(*std::min_element(simplex.begin(), simplex.end(), by_cost));
    }
  }

  const Objective& objective_;
  const OptimizerConfig& config_;
  OptimizationResult& totals_;
  double& global_best_;
};

Quasispin rotate(const Matrix2c& w, const Quasispin& k) { return Quasispin::from_ket(w * k.ket()); }

/// Unitary with W|from> = |to>.
Matrix2c aligning_unitary(const Quasispin& from, const Quasispin& to) {
  return to.ket() * from.ket().adjoint() + to.orthogonal().ket() * from.orthogonal().ket().adjoint();
}

std::vector<double> pack(const std::array<Quasispin, 4>& ks, const BipartiteState& state) {
  std::vector<double> p;
  p.reserve(kChshParams);
  for (const auto& k : ks) {
    const auto q = QuasispinParams::from_quasispin(k);
    p.push_back(q.theta);
    p.push_back(q.phi);
  }
  const auto s = PureStateParams::from_state(state);
  p.insert(p.end(), s.angles.begin(), s.angles.end());
  p.insert(p.end(), s.phases.begin(), s.phases.end());
  return p;
}

BellTimes times_from_params(std::span<const double> u) {
  return {std::abs(u[0]), std::abs(u[1]), std::abs(u[2]), std::abs(u[3])};
}

}  // namespace

Quasispin QuasispinParams::to_quasispin() const {
  return {std::cos(0.5 * theta), std::polar(1.0, phi) * std::sin(0.5 * theta)};
}

QuasispinParams QuasispinParams::from_quasispin(const Quasispin& k) {
  const double theta = 2.0 * std::atan2(std::abs(k.beta()), std::abs(k.alpha()));
  const double phi = std::abs(k.beta()) > 0.0 && std::abs(k.alpha()) > 0.0
                         ? std::arg(k.beta()) - std::arg(k.alpha())
                         : 0.0;
  return {theta, wrap_angle(phi)};
}

BipartiteState PureStateParams::to_state() const {
  const double s1 = std::sin(angles[0]);
  const double s2 = std::sin(angles[1]);
  return BipartiteState::normalized(Vector4c(
      std::cos(angles[0]), std::polar(s1 * std::cos(angles[1]), phases[0]),
      std::polar(s1 * s2 * std::cos(angles[2]), phases[1]), std::polar(s1 * s2 * std::sin(angles[2]), phases[2])));
}

PureStateParams PureStateParams::from_state(const BipartiteState& state) {
  Vector4c c = state.amplitudes();
  for (Eigen::Index i = 0; i < 4; ++i) {
    if (std::abs(c(i)) > 1e-14) {
      c *= std::polar(1.0, -std::arg(c(i)));
      break;
    }
  }
  const double r0 = std::abs(c(0)), r1 = std::abs(c(1)), r2 = std::abs(c(2)), r3 = std::abs(c(3));
  PureStateParams p;
  p.angles[0] = std::atan2(std::sqrt(r1 * r1 + r2 * r2 + r3 * r3), r0);
  p.angles[1] = std::atan2(std::sqrt(r2 * r2 + r3 * r3), r1);
  p.angles[2] = std::atan2(r3, r2);
  for (int i = 0; i < 3; ++i) p.phases[i] = std::abs(c(i + 1)) > 0.0 ? wrap_angle(std::arg(c(i + 1))) : 0.0;
  return p;
}

void OptimizerConfig::validate() const {
  if (restarts < 1) throw std::invalid_argument("restarts must be >= 1");
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be > 0");
  if (!(initial_step > 0.0)) throw std::invalid_argument("initial_step must be > 0");
  if (!(reflection > 0.0) || !(expansion > 1.0) || !(contraction > 0.0 && contraction < 1.0) ||
      !(shrink > 0.0 && shrink < 1.0)) {
    throw std::invalid_argument("simplex coefficients out of range");
  }
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over the combined words
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

OptimizationResult nelder_mead(const Objective& objective, std::size_t dim, const OptimizerConfig& config,
                               std::span<const std::vector<double>> warm_starts, double sample_low,
                               double sample_high) {
  config.validate();
  if (dim < 1) throw std::invalid_argument("optimization dimension must be >= 1");
  for (const auto& w : warm_starts) {
    if (w.size() != dim) throw std::invalid_argument("warm start has the wrong dimension");
  }

  OptimizationResult result;
  result.value = -std::numeric_limits<double>::infinity();
  double global_best = result.value;
  SimplexRun runner(objective, config, result, global_best);

  for (int r = 0; r < config.restarts; ++r) {
    std::vector<double> start;
    if (static_cast<std::size_t>(r) < warm_starts.size()) {
      start = warm_starts[r];
    } else {
      std::mt19937_64 rng(derive_seed(config.seed, static_cast<std::uint64_t>(r)));
      std::uniform_real_distribution<double> uniform(sample_low, sample_high);
      start.resize(dim);
      for (auto& v : start) v = uniform(rng);
    }
    auto [best, converged] = runner.run(start);
    const double value = -best.cost;
    result.restart_values.push_back(value);
    if (value > result.value || result.params.empty()) {
      result.value = value;
      result.params = std::move(best.x);
      result.converged = converged;
    }
  }
  return result;
}

BellSetting setting_from_params(std::span<const double> p, const BellTimes& times) {
  if (p.size() < 8) throw std::invalid_argument("need 8 quasi-spin parameters");
  return {QuasispinParams{p[0], p[1]}.to_quasispin(), QuasispinParams{p[2], p[3]}.to_quasispin(),
          QuasispinParams{p[4], p[5]}.to_quasispin(), QuasispinParams{p[6], p[7]}.to_quasispin(), times};
}

BipartiteState state_from_params(std::span<const double> p) {
  if (p.size() < 6) throw std::invalid_argument("need 6 state parameters");
  return PureStateParams{{p[0], p[1], p[2]}, {p[3], p[4], p[5]}}.to_state();
}

static std::array<Quasispin, 4> tsirelson_settings() {
  const auto setting = [](double theta) { return QuasispinParams{theta, 0.0}.to_quasispin(); };
  return {setting(0.0), setting(0.25 * std::numbers::pi), setting(0.5 * std::numbers::pi),
          setting(0.75 * std::numbers::pi)};
}

std::vector<std::vector<double>> decay_free_embeddings(const BellTimes& times, const KaonPhysics& physics) {
  const std::array<Quasispin, 4> ks = tsirelson_settings();
  const Quasispin long_lived = mass_eigenstates(physics).second;
  const Matrix2c singlet_c = BipartiteState::singlet().coefficient_matrix();

  auto embed = [&](int alice, int bob) {
    const Matrix2c wa = aligning_unitary(ks[alice], long_lived);
    const Matrix2c wb = aligning_unitary(ks[bob], long_lived);
    const Matrix2c c = wa * singlet_c * wb.transpose();
    const BipartiteState state = BipartiteState::normalized(Vector4c(c(0, 0), c(0, 1), c(1, 0), c(1, 1)));
    return pack({rotate(wa, ks[0]), rotate(wb, ks[1]), rotate(wa, ks[2]), rotate(wb, ks[3])}, state);
  };

  // Latest-measured setting on each side first, then the other three pairings.
  const int alice_late = times.t_np > times.t_n ? 2 : 0;
  const int bob_late = times.t_mp > times.t_m ? 3 : 1;
  std::vector<std::vector<double>> out{embed(alice_late, bob_late)};
  for (int alice : {0, 2})
    for (int bob : {1, 3})
      if (alice != alice_late || bob != bob_late) out.push_back(embed(alice, bob));
  return out;
}

ChshOptimum maximize_chsh(const BellTimes& times, const KaonPhysics& physics, const OptimizerConfig& config) {
  times.validate();
  const EffectivePropagator propagator(physics);

  const Objective profiled = [&](std::span<const double> p) {
    return max_over_states(setting_from_params(p, times), propagator).value;
  };
  std::vector<std::vector<double>> warm;
  for (auto& e : decay_free_embeddings(times, physics)) warm.emplace_back(e.begin(), e.begin() + 8);
  const std::vector<double> plain = pack(tsirelson_settings(), BipartiteState::singlet());
  warm.emplace_back(plain.begin(), plain.begin() + 8);

  // The embeddings together form the first restart; config.restarts - 1 random ones follow.
  OptimizerConfig stage1_config = config;
  stage1_config.restarts = config.restarts + static_cast<int>(warm.size()) - 1;
  const OptimizationResult stage1 = nelder_mead(profiled, 8, stage1_config, warm);

  const BellSetting best_setting = setting_from_params(stage1.params, times);
  const StateOptimum state_opt = max_over_states(best_setting, propagator);

  const Objective full = [&](std::span<const double> p) {
    return chsh_value(setting_from_params(p, times), state_from_params(p.subspan(8)), propagator);
  };
  OptimizerConfig polish_config = config;
  polish_config.restarts = 1;
  polish_config.initial_step = std::min(config.initial_step, 0.05);
  const std::vector<std::vector<double>> polish_start{
      pack({best_setting.k_n, best_setting.k_m, best_setting.k_np, best_setting.k_mp}, state_opt.state)};
  const OptimizationResult stage2 = nelder_mead(full, kChshParams, polish_config, polish_start);

  ChshOptimum out;
  out.params = stage2.params;
  out.times = times;
  const BellSetting final_setting = setting_from_params(out.params, times);
  out.quasispins = {final_setting.k_n, final_setting.k_m, final_setting.k_np, final_setting.k_mp};
  out.state = state_from_params(std::span<const double>(out.params).subspan(8));
  out.s_max = chsh_value(final_setting, out.state, propagator);
  out.converged = stage1.converged;
  out.restart_values = stage1.restart_values;
  return out;
}

std::string_view to_string(TimeMode mode) {
  switch (mode) {
    case TimeMode::equal: return "equal";
    case TimeMode::zeros_first: return "zeros_first";
    case TimeMode::zeros_second: return "zeros_second";
  }
  return "unknown";
}

TimeMode parse_time_mode(std::string_view name) {
  if (name == "equal") return TimeMode::equal;
  if (name == "zeros_first") return TimeMode::zeros_first;
  if (name == "zeros_second") return TimeMode::zeros_second;
  throw std::invalid_argument("unknown time mode '" + std::string(name) + "'");
}

BellTimes mode_times(TimeMode mode, double T) {
  switch (mode) {
    case TimeMode::equal: return {T, T, T, T};
    case TimeMode::zeros_first: return {.t_n = T, .t_m = 0.0, .t_np = 0.0, .t_mp = T};
    case TimeMode::zeros_second: return {.t_n = 0.0, .t_m = T, .t_np = T, .t_mp = 0.0};
  }
  throw std::invalid_argument("unknown time mode");
}

std::vector<ScanPoint> scan_times(TimeMode mode, std::span<const double> grid, const KaonPhysics& physics,
                                  const OptimizerConfig& config, unsigned threads) {
  config.validate();
  physics.validate();
  std::vector<ScanPoint> points(grid.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < grid.size(); i = next++) {
      ScanPoint& point = points[i];
      point.T = grid[i];
      try {
        OptimizerConfig local = config;
        local.seed = derive_seed(config.seed, i);
        const ChshOptimum best = maximize_chsh(mode_times(mode, grid[i]), physics, local);
        point.s_max = best.s_max;
        point.purity = best.state.reduced_purity();
        point.converged = best.converged;
      } catch (const std::exception& e) {
        point.error = e.what();
        point.converged = false;
      }
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(grid.size(), 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  return points;
}

StrangenessOptimum maximize_strangeness(const KaonPhysics& physics, const OptimizerConfig& config,
                                        const StrangenessSearch& search) {
  config.validate();
  if (!(search.grid_step > 0.0) || !(search.grid_max >= 0.0)) {
    throw std::invalid_argument("strangeness grid needs step > 0 and max >= 0");
  }
  const EffectivePropagator propagator(physics);
  const bool pinned = search.pinned_state.has_value();

  auto times_value = [&](const BellTimes& t) {
    return pinned ? strangeness_chsh(t, *search.pinned_state, propagator)
                  : max_over_states(BellSetting::strangeness(t), propagator).value;
  };

  const auto n = static_cast<int>(std::floor(search.grid_max / search.grid_step + 1e-9)) + 1;
  struct GridHit {
    double value;
    std::array<double, 4> u;
  };
  std::vector<GridHit> hits;
  hits.reserve(static_cast<std::size_t>(n) * n * n * n);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b)
      for (int c = 0; c < n; ++c)
        for (int d = 0; d < n; ++d) {
          const std::array<double, 4> u{a * search.grid_step, b * search.grid_step, c * search.grid_step,
                                        d * search.grid_step};
          hits.push_back({times_value(times_from_params(u)), u});
        }
  std::stable_sort(hits.begin(), hits.end(), [](const GridHit& x, const GridHit& y) { return x.value > y.value; });

  // Best grid points that are not grid neighbours of one already taken.
  std::vector<std::vector<double>> starts;
  for (const auto& hit : hits) {
    if (starts.size() >= static_cast<std::size_t>(config.restarts)) break;
    const bool near = std::any_of(starts.begin(), starts.end(), [&](const std::vector<double>& s) {
      for (int i = 0; i < 4; ++i)
        if (std::abs(s[i] - hit.u[i]) > 1.5 * search.grid_step) return false;
      return true;
    });
    if (!near) starts.emplace_back(hit.u.begin(), hit.u.end());
  }

  const Objective over_times = [&](std::span<const double> u) { return times_value(times_from_params(u)); };
  const OptimizationResult refined = nelder_mead(over_times, 4, config, starts, 0.0, search.grid_max);

  StrangenessOptimum out;
  out.grid_best = hits.front().value;
  out.restart_values = refined.restart_values;
  out.converged = refined.converged;
  out.times = times_from_params(refined.params);

  if (pinned) {
    out.state = *search.pinned_state;
    out.s_max = strangeness_chsh(out.times, out.state, propagator);
    return out;
  }

  const BipartiteState profiled_state = max_over_states(BellSetting::strangeness(out.times), propagator).state;
  const Objective joint = [&](std::span<const double> p) {
    return strangeness_chsh(times_from_params(p), state_from_params(p.subspan(4)), propagator);
  };
  std::vector<double> start(refined.params);
  const auto sp = PureStateParams::from_state(profiled_state);
  start.insert(start.end(), sp.angles.begin(), sp.angles.end());
  start.insert(start.end(), sp.phases.begin(), sp.phases.end());

  OptimizerConfig polish_config = config;
  polish_config.restarts = 1;
  polish_config.initial_step = std::min(config.initial_step, 0.05);
  const std::vector<std::vector<double>> polish_start{start};
  const OptimizationResult polished = nelder_mead(joint, 10, polish_config, polish_start);

  out.times = times_from_params(polished.params);
  out.state = state_from_params(std::span<const double>(polished.params).subspan(4));
  out.s_max = strangeness_chsh(out.times, out.state, propagator);
  return out;
}

}  // namespace kaonbell

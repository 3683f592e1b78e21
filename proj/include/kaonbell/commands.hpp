#pragma once

#include <optional>
#include <vector>

#include "kaonbell/config.hpp"
#include "kaonbell/table.hpp"

namespace kaonbell {

/// 0, step, 2 step, ... up to and including t_max (within rounding).
std::vector<double> time_grid(double t_max, double step);

/// Columns: t, p_k0_k0, p_k0_k0bar, trace_rho_ss, trace_rho_ff. Probabilities come
/// from the effective propagator, the traces from the enlarged-space master equation.
Table oscillation_table(const RunConfig& config, double t_max, double step);

/// Columns: T, S_max, reduced_purity, converged.
Table scan_table(const RunConfig& config, TimeMode mode, double t_max, double step, unsigned threads = 0);

/// One-row report of the strangeness CHSH optimum over times and initial state,
/// with the singlet-pinned optimum alongside.
Table strangeness_report(const RunConfig& config);

/// One-row report of the delta <= 0 test. Exactly one of delta, epsilon must be given.
Table cp_check_report(std::optional<double> delta, std::optional<double> epsilon);

/// Measured leptonic asymmetry and its uncertainty.
inline constexpr double kMeasuredDelta = 3.27e-3;
inline constexpr double kMeasuredDeltaError = 0.12e-3;

}  // namespace kaonbell

#pragma once

/// @file experiments.hpp
/// @brief Parameter sweeps and refinement studies shared by the command-line
/// tool and the acceptance suite. Each study returns raw measurements; pass
/// thresholds are applied by the caller.

#include "cfront/diagnostics.hpp"
#include "cfront/profile.hpp"
#include "cfront/runner.hpp"
#include "cfront/sim.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace cfront {

// ---------------------------------------------------------------- profiles

struct RhRow {
    double eps, gamma, v_plus, speed, residual;
};

/// Rankine-Hugoniot residuals for `count` parameter sets drawn with a fixed seed:
/// gamma in [1, 4], v_plus in [1.2, 5], log10 eps in [-8, -1] (redrawn until v_minus < v_plus).
std::vector<RhRow> rankine_hugoniot_sweep(int count, std::uint64_t seed);

struct ValidityRow {
    double eps, gamma, v_plus;
    bool monotone = false;
    bool confined = false;
    double residual = 0.0;
    std::string error;  ///< solver failure, empty on success
};

/// Profile solves on [xi_lo, xi_hi] for every combination, anchored at the transition.
std::vector<ValidityRow> profile_validity_sweep(const std::vector<double>& gammas, const std::vector<double>& eps,
                                                const std::vector<double>& v_plus, double mu, double xi_lo,
                                                double xi_hi);

struct ConvergenceRow {
    double eps, distance, best_shift;
};

/// min_shift_distance to the limit profile along an eps list.
std::vector<ConvergenceRow> convergence_sweep(double gamma, double mu, double v_plus, const std::vector<double>& eps,
                                              double xi_lo, double xi_hi);

// ------------------------------------------------------ matched expansion

struct TransitionRow {
    double eps;
    double K, omega, xi_star, xi_star_asymptotic;
    double matching_value_residual, matching_derivative_residual;
    double sup_error;           ///< on [-R, R]
    double weighted_error;      ///< window with M_weighted; NaN if empty
    double C_hat;               ///< weighted_error / eps^(1/(gamma+1))
    bool nominal_window_empty;  ///< the window with M is empty
};

struct TransitionStudy {
    double gamma = 2.0;
    std::vector<TransitionRow> rows;
    LineFit sup_fit;  ///< log sup_error against log eps
};

TransitionStudy transition_sweep(double gamma, double mu, double v_plus, const std::vector<double>& eps, double R,
                                 double M, double M_weighted, double xi_lo, double xi_hi);

// ---------------------------------------------------------------- barriers

struct BarrierRow {
    double eps;
    double v0;
    double sigma_hat, sigma_lower, sigma_upper, r_squared;
    bool window_shrunk;
    double zeta_upper, zeta_lower, crossing_asymptotic;
    std::size_t points, violations;
    double worst_lower_margin, worst_upper_margin;
};

/// Barriers and decay fit for the transition-anchored profile at each eps.
/// The sandwich grid spans `decay_lengths` e-folds of the lower rate past the crossings.
std::vector<BarrierRow> barrier_sweep(double gamma, double mu, double v_plus, const std::vector<double>& eps,
                                      std::size_t points, double decay_lengths, double xi_lo, double xi_hi);

// ----------------------------------------------------- linearized system

struct LinearizedStudy {
    std::vector<double> dt;
    std::vector<double> residual;  ///< |energy identity residual| at T
    std::vector<double> ratios;    ///< residual[i] / residual[i+1]
    double E0 = 0.0;
};

struct LinearizedSetup {
    double eps = 1e-3, gamma = 2.0, mu = 1.0, v_plus = 1.5;
    double half_width = 3.0;  ///< grid [-L, L]
    double dx = 2e-3;
    double T = 0.5;
    double bump_center = 0.0, bump_width = 0.5;
    std::vector<double> dt{2e-4, 1e-4, 5e-5};
};

/// Compact bump in both W and V, marched to T at each dt.
LinearizedStudy linearized_refinement(const LinearizedSetup& setup);

struct CommutatorStudy {
    std::vector<CommutatorCheck> levels;
    std::vector<double> first_ratios, second_ratios;
};

/// commutator_check on g = sin 2x + cos(3x)/2 at each h.
CommutatorStudy commutator_refinement(double eps, double gamma, double mu, double v_plus, const std::vector<double>& h,
                                      double lo, double hi);

struct BoundVariation {
    std::string bound;
    double min_ratio, max_ratio;  ///< over eps
    double spread;                ///< max / min (1 when both are 0)
};

/// Per-bound spread of the empirical constants across the eps rows of a scan.
std::vector<BoundVariation> bound_variation(const std::vector<BoundRow>& rows);

// ------------------------------------------------------------- simulation

struct StabilitySetup {
    double eps = 1e-2, gamma = 2.0, mu = 1.0, v_plus = 1.5, u_plus = 0.0;
    double x_lo = -150.0, x_hi = 40.0, dx = 0.05;
    double profile_margin = 5.0;  ///< profile solved this far past the grid
    Frame frame = Frame::CoMoving;
    PerturbationSpec pert{};      ///< amplitude < 0 selects amplitude_budget(params) * -amplitude
    double mass_offset = 0.0;     ///< constant added to dv on every cell (out-of-theory control)
    RunConfig run{};
};

/// Acceptance defaults: T = 20, report stride 50, budget amplitude.
StabilitySetup default_stability_setup();

struct StabilityOutcome {
    ModelParams params;
    double amplitude = 0.0;
    InitReport init{};
    std::size_t cells = 0;
    double background_residual = 0.0;
    double background_flux_offset = 0.0;
    RunResult result{};
    DecaySummary decay_u{}, decay_v{};
    double x_norm_initial = 0.0, x_norm_max = 0.0;
    double max_mass = 0.0;  ///< max |mass| over reports and fields
};

/// The state handed to run(), built from a setup.
struct PreparedRun {
    ModelParams params;
    TravelingWave wave;
    Grid grid;
    DiscreteBackground background;  ///< left empty in the lab frame
    SimState reference;
    SimState initial;
    InitReport init{};
    double amplitude = 0.0;
};

/// Profile, grid, discrete background and perturbed state. Throws
/// CongestionViolation when the perturbed data touch v = 1.
PreparedRun prepare_stability_run(const StabilitySetup& setup);

/// Runs a prepared setup and summarizes the report series.
/// MassDefectError from the zero-mass gate propagates.
StabilityOutcome run_prepared(const PreparedRun& prep, const RunConfig& config,
                              std::span<const Observer> observers = {});

/// prepare_stability_run followed by run_prepared.
StabilityOutcome stability_run(const StabilitySetup& setup, std::span<const Observer> observers = {});

}  // namespace cfront

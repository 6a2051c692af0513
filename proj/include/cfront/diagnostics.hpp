#pragma once

/// @file diagnostics.hpp
/// @brief Weighted energies and dissipations of the integrated perturbation,
/// the linearized energy balance, commutator and nonlinearity bound checks,
/// and small fitting helpers.

#include "cfront/numerics.hpp"
#include "cfront/pressure.hpp"
#include "cfront/profile.hpp"
#include "cfront/sim.hpp"

#include <array>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace cfront {

struct EnergyReport {
    double t = 0.0;
    std::array<double, 3> E{};  ///< E_0, E_1, E_2
    std::array<double, 3> D{};  ///< instantaneous D_0, D_1, D_2
    double x_norm_sq = 0.0;     ///< running X-norm up to t
    double mass_u = 0.0;        ///< integral of u - u_ref
    double mass_w = 0.0;        ///< integral of w - w_ref
    double mass_v = 0.0;        ///< integral of v - v_ref
    double sup_u = 0.0;
    double sup_v = 0.0;
};

/// Profile weights sampled once per grid: -1/p'(v_eps) and v_eps' at cells.
struct EnergyWeights {
    Grid grid;
    std::vector<double> inv_stiffness;  ///< -1 / p'(v_eps) = (v_eps - 1)^(gamma+1) / (gamma eps)
    std::vector<double> slope;          ///< v_eps', analytic
};
EnergyWeights energy_weights(const TravelingWave& wave, const Grid& grid);

/// k-th discrete derivative on a uniform grid (k = 0..3): centered in the
/// interior, one-sided second order at the two end points.
std::vector<double> discrete_derivative(std::span<const double> f, double h, int k);

/// E_k = sum over cells of -(d^k W)^2 / p' dx + trapezoid of (d^k V)^2.
double energy_Ek(const IntegratedState& ws, const EnergyWeights& w, int k);
double energy_Ek(const IntegratedState& ws, const TravelingWave& wave, int k);

/// D_k = sum over cells of v_eps' (d^k W)^2 dx + trapezoid of (d^(k+1) V)^2.
double dissipation_Dk(const IntegratedState& ws, const EnergyWeights& w, int k);
double dissipation_Dk(const IntegratedState& ws, const TravelingWave& wave, int k);

struct XNormSample {
    std::array<double, 3> E{};
    std::array<double, 3> D_integral{};  ///< time integral of D_k up to the sample time
};

/// sup over samples of sum_k c^k eps^(2k/gamma) (E_k + int D_k). Throws UsageError on empty input.
double x_norm_sq(std::span<const XNormSample> history, double c, double eps, double gamma);

/// Running time integrals of D_k from a report series (trapezoid in t).
std::vector<XNormSample> accumulate_dissipation(std::span<const EnergyReport> reports);

/// Linearized run record: E_0 and the dissipation rate at every step.
struct LinearizedRun {
    std::vector<double> t;
    std::vector<double> energy;  ///< E_0
    std::vector<double> rate;    ///< s p'' v' / p'^2 W^2 + 2 mu V_x^2 / v, integrated in x
};

/// March `steps` linearized steps of size dt, recording E_0 and the rate.
LinearizedRun linearized_run(LinearizedState st, const LinearizedCoefficients& co, double dt, int steps,
                             const ModelParams& params);

/// E_0(T) + time integral of the rate - E_0(0); the time integral uses the
/// right end point of each step, matching the backward-in-time splitting.
double energy_identity_residual(const LinearizedRun& run);

/// Smooth test function with three derivatives.
struct TestFunction {
    std::function<double(double)> g, g1, g2, g3;
};

struct CommutatorCheck {
    double h = 0.0;
    double first_order_error = 0.0;   ///< max |discrete - closed form| of the first commutator
    double second_order_error = 0.0;  ///< same for the second commutator
    double f_dependence = 0.0;        ///< max change when f is replaced by an unrelated function
    double first_order_scale = 0.0;   ///< max |closed form|, for relative reading
    double second_order_scale = 0.0;
};

/// Compares discrete commutators of L(f, g) = (p'(v_eps) g', -f' - mu (g' / v_eps)')
/// with d/dx and d^2/dx^2 against the closed forms
///   [L, d](f, g)   = (-a g', -mu (b g')'),
///   [L, d^2](f, g) = (-2 a g'' - a' g', -2 mu (b g'')' - mu (b' g')'),
/// a = p''(v_eps) v_eps', b = v_eps' / v_eps^2, on nodes of spacing h covering [lo, hi].
CommutatorCheck commutator_check(const TravelingWave& wave, const TestFunction& g, double h, double lo, double hi);

/// Synthetic perturbations f = alpha (delta/2) sin(k x + phase) for the bound scan.
/// Wavenumbers are in units of 1 / delta so the congested layer is sampled
/// alike for every eps; k = 0 gives constant perturbations. Phases avoid the
/// zeros of sin at x = 0, where both sides of a bound reduce to round-off.
struct BoundSamplePlan {
    std::vector<double> x;  ///< abscissae; the congested plateau v = v_minus is always added
    std::vector<double> alphas{0.25, 0.5, 1.0};
    std::vector<double> wavenumbers{0.0, 0.5, 2.0};
    std::vector<double> phases;  ///< default: pi/2, 3 pi/2 and pi/8 + j pi/4, j = 0..7
};

/// Default plan: uniform on [-3, 3] plus a fine grid on [-60 delta, 0].
BoundSamplePlan default_bound_plan(double delta, std::size_t coarse = 121, std::size_t fine = 121);

struct BoundRow {
    double eps = 0.0;
    std::string bound;  ///< F, dF, d2F, H, dH, d2H and the *_diff variants
    double max_ratio = 0.0;
    std::size_t samples = 0;
    std::size_t rejected = 0;  ///< samples outside the hypothesis
};

/// Max over samples of |LHS| / (RHS without its constant) for each bound on
/// the quadratic remainders F, H and their differences. Samples violating
/// |f| <= delta/2 (resp. |f1| + |f2| <= delta/2) are rejected and counted.
std::vector<BoundRow> lemma_bound_scan(std::span<const double> eps_list, double gamma, double mu, double v_plus,
                                       const BoundSamplePlan* plan = nullptr);

/// Pointwise bound ratios at a single sample, exposed for testing.
struct BoundInputs {
    double v, v1, v2;      ///< profile value and two derivatives
    double f, f1, f2;      ///< perturbation and two derivatives
};
struct BoundInputsPair {
    double v, v1, v2;
    double a, a1, a2;  ///< first perturbation and derivatives
    double b, b1, b2;  ///< second perturbation and derivatives
};
std::array<double, 6> bound_ratios(const BoundInputs& in, const ModelParams& params);
std::array<double, 6> bound_ratios_diff(const BoundInputsPair& in, const ModelParams& params);
extern const std::array<const char*, 6> kBoundNames;

enum class Centering { Cells, Nodes };

/// Cells: sum f dx. Nodes: trapezoid.
double mass_of(std::span<const double> field, double dx, Centering where = Centering::Cells);

struct DecaySummary {
    double peak = 0.0;
    double final = 0.0;
    double ratio = 0.0;  ///< final / peak (0 when peak is 0)
    bool monotone_after_peak = true;
};
DecaySummary sup_norm_decay(std::span<const double> series);

/// Least squares of log err against log eps. Needs >= 3 pairs, all positive.
LineFit rate_fit(std::span<const double> eps, std::span<const double> err);

}  // namespace cfront

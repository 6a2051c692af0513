#pragma once

/// @file profile.hpp
/// @brief Viscous shock profiles of the singular-pressure model, their
/// eps -> 0 limit, the matched inner/outer approximation and the barrier
/// functions that bracket the congested tail.
///
/// Profiles solve v' = A(v) = v/(mu s) [s^2 (v_plus - v) + p(v_plus) - p(v)].
/// Both tails are carried as log gaps, ln(v - v_minus) and ln(v_plus - v),
/// so that the exponentially thin congested layer stays resolved long after
/// v itself has saturated in double precision.

#include "cfront/ode.hpp"
#include "cfront/pressure.hpp"

#include <span>
#include <string>
#include <vector>

namespace cfront {

/// s_eps from the Rankine-Hugoniot relation (positive root).
double shock_speed(const ModelParams& params);

/// |s^2 (v_plus - v_minus) + p(v_plus) - p(v_minus)| / p(v_minus).
double rankine_hugoniot_residual(const ModelParams& params, double s);

/// How the translation invariance of the profile is removed.
struct ShiftSpec {
    enum class Kind { ValueAtZero, TransitionAnchor };
    Kind kind = Kind::TransitionAnchor;
    double v0 = 0.0;  ///< only read for ValueAtZero

    static ShiftSpec value_at_zero(double v0) { return {Kind::ValueAtZero, v0}; }
    static ShiftSpec transition_anchor() { return {Kind::TransitionAnchor, 0.0}; }

    /// v(0) implied for these parameters; TransitionAnchor gives 1 + K eps^(1/(gamma+1)).
    double anchor_value(const ModelParams& params) const;
    std::string describe() const;
};

struct ProfileOptions {
    double tol = 1e-12;         ///< local error tolerance on the log-gap variables
    double max_step = 0.05;     ///< cap on accepted steps, in xi
    double tail_gap = 0.0;      ///< if > 0, stop each side once the gap to the end state drops below it
    int residual_substeps = 32; ///< RK4 substeps used to audit each accepted step
};

/// v together with its exact distances to both end states.
struct WavePoint {
    double v = 0.0;
    double log_gap_below = 0.0;  ///< ln(v - v_minus)
    double log_gap_above = 0.0;  ///< ln(v_plus - v)
    bool extrapolated = false;   ///< xi was outside the integrated range
};

struct ProfileDerivatives {
    double d1 = 0.0;
    double d2 = 0.0;
    double d3 = 0.0;
};

/// A(v) evaluated without cancellation in either tail.
double profile_rhs(const ModelParams& params, double s, const WavePoint& pt);

/// v', v'', v''' from the profile ODE (no differencing).
ProfileDerivatives profile_derivatives(const ModelParams& params, double s, const WavePoint& pt);

/// Immutable sampled profile. Congested side integrated in zeta = xi / eps^(1/gamma).
class TravelingWave {
public:
    const ModelParams& params() const { return params_; }
    double speed() const { return s_; }
    const ShiftSpec& shift() const { return shift_; }
    double tol() const { return tol_; }
    double residual_max() const { return residual_max_; }
    double rh_residual() const { return rh_residual_; }

    const std::vector<double>& xi() const { return xi_; }
    const std::vector<double>& v() const { return v_; }
    const std::vector<double>& u() const { return u_; }
    const std::vector<double>& log_gap_below() const { return gap_below_; }
    const std::vector<double>& log_gap_above() const { return gap_above_; }
    double xi_lo() const { return xi_.front(); }
    double xi_hi() const { return xi_.back(); }

    /// Dense evaluation. Outside [xi_lo, xi_hi] the tails continue at their
    /// asymptotic exponential rates and the point is flagged.
    WavePoint at(double xi) const;
    double value(double xi) const { return at(xi).v; }
    double velocity(double xi) const;
    ProfileDerivatives derivatives(double xi) const;

    /// Strict increase of the stored v in double precision.
    bool v_strictly_increasing() const;

    /// Asymptotic decay rate of ln(v - v_minus) in zeta as xi -> -inf.
    double congested_rate() const;
    /// Asymptotic decay rate of ln(v_plus - v) in xi as xi -> +inf.
    double free_rate() const;

    /// A copy translated by a: new(xi) = old(xi - a).
    TravelingWave translated(double a) const;

private:
    friend TravelingWave solve_profile(const ModelParams&, const ShiftSpec&, double, double, const ProfileOptions&);
    TravelingWave(const ModelParams& p) : params_(p) {}

    ModelParams params_;
    double s_ = 0.0;
    ShiftSpec shift_;
    double tol_ = 0.0;
    double residual_max_ = 0.0;
    double rh_residual_ = 0.0;
    double offset_ = 0.0;  ///< translation applied after solving
    std::vector<double> xi_, v_, u_, gap_below_, gap_above_;
    DenseSolution below_;  ///< zeta -> ln((v - v_minus)/eps^(1/gamma)), xi <= 0
    DenseSolution above_;  ///< xi -> ln(v_plus - v), xi >= 0
};

/// Integrates the profile ODE outward from xi = 0 on [xi_lo, xi_hi].
/// Throws UsageError for a bad domain or v(0) outside (v_minus, v_plus),
/// SolverError on step underflow or loss of monotonicity. The per-step
/// residual audit is recorded in residual_max().
TravelingWave solve_profile(const ModelParams& params, const ShiftSpec& shift, double xi_lo, double xi_hi,
                            const ProfileOptions& opts = {});

/// The eps -> 0 limit: 1 on xi < 0, logistic on xi >= 0.
struct LimitProfile {
    double v_plus = 0.0;
    double mu = 0.0;
    double r = 0.0;
    double s_bar = 0.0;

    LimitProfile(double v_plus, double mu);
    explicit LimitProfile(const ModelParams& params) : LimitProfile(params.v_plus(), params.mu()) {}
};

double limit_profile(double xi, const LimitProfile& lp);
/// Right derivative for xi >= 0, zero for xi < 0.
double limit_profile_derivative(double xi, const LimitProfile& lp);

/// Tabulated solution of w' = rho (1 - w^(-gamma)), w(0) = 2. Shared by the
/// inner corrector (rho = 1/(mu sbar)) and the two barrier functions.
class AutonomousTable {
public:
    AutonomousTable() = default;
    AutonomousTable(double rho, double gamma, double zeta_lo, double zeta_hi, double tol = 1e-12);

    double operator()(double zeta) const;
    /// ln(w(zeta) - 1), exact in the left tail.
    double log_gap(double zeta) const;
    double derivative(double zeta) const;
    bool extrapolated(double zeta) const { return !sol_.inside(zeta); }

    /// zeta with w(zeta) = target (> 1). Throws ExtendDomainError if not tabulated.
    double solve_for(double target) const;

    double rho() const { return rho_; }
    double gamma() const { return gamma_; }
    double zeta_lo() const { return sol_.t_lo(); }
    double zeta_hi() const { return sol_.t_hi(); }
    const DenseSolution& table() const { return sol_; }

private:
    double rho_ = 0.0;
    double gamma_ = 1.0;
    DenseSolution sol_;
};

/// Inner corrector of the matched expansion on [zeta_lo, zeta_hi].
AutonomousTable solve_corrector(const ModelParams& params, double zeta_lo, double zeta_hi);

/// Cut-off used for xi > 0: chi(xi) = (1 - xi) exp(-(xi/L)^2/(1 - (xi/L)^2)) on [0, L)
/// and 0 beyond. chi(0) = 1 and chi'(0) = -1 for every width L in (0, 1].
struct Cutoff {
    double width = 1.0;
    double operator()(double xi) const;
    double derivative(double xi) const;
};

struct TransitionExpansion {
    ModelParams params;
    double K = 0.0;
    double omega = 0.0;
    double zeta_star = 0.0;
    double xi_star = 0.0;
    double xi_star_asymptotic = 0.0;
    double matching_value_residual = 0.0;       ///< |left - right| value at xi = 0
    double matching_derivative_residual = 0.0;  ///< relative one-sided slope mismatch at 0
    AutonomousTable corrector;
    Cutoff cutoff;
};

/// K, omega and xi* by root finding in the corrector table.
TransitionExpansion transition_params(const ModelParams& params, const Cutoff& cutoff = {});

/// The matched approximation. Sets *extrapolated when the corrector is
/// evaluated below its table (exponential tail continuation).
double approx_profile(double xi, const TransitionExpansion& ex, const LimitProfile& lp, bool* extrapolated = nullptr);
double approx_profile_derivative(double xi, const TransitionExpansion& ex, const LimitProfile& lp);

struct BarrierRates {
    double rho_upper = 0.0;
    double rho_lower = 0.0;
};

/// Rates of the two comparison ODEs for a profile with v(0) = v0.
/// Throws UsageError unless v_minus < v0 and the upper rate stays positive.
BarrierRates barrier_rates(const ModelParams& params, double v0);

struct BarrierPair {
    double v0 = 0.0;
    double rho_upper = 0.0;
    double rho_lower = 0.0;
    AutonomousTable v_upper;
    AutonomousTable v_lower;
    double target = 0.0;      ///< (v0 - 1) eps^(-1/gamma)
    double zeta_upper = 0.0;  ///< v_upper(zeta_upper) = target
    double zeta_lower = 0.0;
    double sigma_lower = 0.0; ///< rho_lower gamma
    double sigma_upper = 0.0; ///< rho_upper gamma 2^(-gamma)
    double crossing_asymptotic = 0.0;  ///< mu sbar (v0 - 1) eps^(-1/gamma)
    double xi_eps = 0.0;      ///< -eps^(1/gamma) max(zeta_upper, zeta_lower)
};

BarrierPair solve_barriers(const ModelParams& params, double v0);

struct SandwichReport {
    std::size_t points = 0;
    std::size_t violations = 0;
    double worst_lower_margin = 0.0;  ///< min over grid of ln(w-1) - ln(lower-1)
    double worst_upper_margin = 0.0;  ///< min over grid of ln(upper-1) - ln(w-1)
    double zeta_min = 0.0;
};

/// Pointwise check lower(zeta + zeta_lower) <= w(zeta) <= upper(zeta + zeta_upper)
/// on `points` uniformly spaced zeta in [zeta_min, 0), with w the rescaled profile.
/// Comparison is on log gaps with a relative slack `slack`.
SandwichReport sandwich_check(const BarrierPair& pair, const TravelingWave& wave, std::size_t points,
                              double zeta_min, double slack = 1e-9);

/// Sup over xi of |v(xi + C) - limit(xi)|, minimized over C.
struct ShiftDistance {
    double distance = 0.0;
    double best_shift = 0.0;
    bool unimodal = true;
};

ShiftDistance min_shift_distance(std::span<const double> xi, std::span<const double> v, const LimitProfile& lp,
                                 double v_minus);
ShiftDistance min_shift_distance(const TravelingWave& wave, const LimitProfile& lp);

struct DecayFitOptions {
    double y_floor = 1e-12;  ///< lowest (v - v_minus)/eps^(1/gamma) used
    double y_ceiling = 1e-3; ///< highest
    std::size_t samples = 400;
};

struct DecayFit {
    double sigma_hat = 0.0;
    double C_hat = 0.0;
    double r_squared = 0.0;
    double zeta_a = 0.0;
    double zeta_b = 0.0;
    bool window_shrunk = false;
};

/// Exponential fit of ln(v - v_minus) against zeta on xi < xi_eps.
DecayFit congested_decay_fit(const TravelingWave& wave, double xi_eps, const DecayFitOptions& opts = {});

/// Plain fit of samples log_y = ln C + sigma zeta.
DecayFit exponential_fit(std::span<const double> zeta, std::span<const double> log_y);

struct TransitionError {
    double sup_error = 0.0;       ///< on [-R, R]
    double weighted_error = 0.0;  ///< sup over [xi_min, 0) of |v - approx| / |xi|; NaN if empty
    double xi_min = 0.0;
    bool window_empty = false;
    bool extrapolated = false;
};

TransitionError transition_error(const TravelingWave& wave, const TransitionExpansion& ex, const LimitProfile& lp,
                                 double R, double M = 100.0);

}  // namespace cfront

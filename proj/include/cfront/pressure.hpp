#pragma once

/// @file pressure.hpp
/// @brief Singular pressure law p_eps(v) = eps (v-1)^(-gamma) and the
/// quadratic remainders that appear when the momentum equation is expanded
/// around a reference volume.

namespace cfront {

/// Physical parameters of the singular-pressure Navier-Stokes model.
///
/// The left far-field volume is tied to the pressure intensity,
/// v_minus = 1 + eps^(1/gamma), so that p_eps(v_minus) = 1 for every eps.
class ModelParams {
public:
    /// Throws UsageError unless eps > 0, gamma >= 1, mu > 0, v_plus > 1 and
    /// v_minus < v_plus.
    ModelParams(double epsilon, double gamma, double mu, double v_plus, double u_plus = 0.0);

    double epsilon() const noexcept { return epsilon_; }
    double gamma() const noexcept { return gamma_; }
    double mu() const noexcept { return mu_; }
    double v_plus() const noexcept { return v_plus_; }
    double u_plus() const noexcept { return u_plus_; }
    double v_minus() const noexcept { return v_minus_; }

    /// eps^(1/gamma): the width of the congested layer and v_minus - 1.
    double congested_scale() const noexcept { return v_minus_ - 1.0; }

    /// Limit speed sbar = (v_plus - 1)^(-1/2).
    double limit_speed() const noexcept;

private:
    double epsilon_;
    double gamma_;
    double mu_;
    double v_plus_;
    double u_plus_;
    double v_minus_;
};

/// k-th derivative of p_eps at v, k in 0..4.
/// Throws DomainError for v <= 1 and UsageError for k out of range.
double pressure(double v, int k, const ModelParams& params);

/// F(f) = -[p(v_base + f) - p(v_base) - p'(v_base) f].
///
/// Evaluated as -p(v_base) * phi(f / (v_base - 1)) where phi is the Taylor
/// remainder of (1+t)^(-gamma); closed forms for gamma = 1, 2 and a
/// compensated series otherwise, so the quadratic contact at f = 0 keeps
/// full relative precision.
double nonlinear_F(double f, double v_base, const ModelParams& params);

/// H(f) = ln(1 + f / v_base) - f / v_base.
double nonlinear_H(double f, double v_base, const ModelParams& params);

/// F(f1) - F(f2), with the common factor (f1 - f2) pulled out before evaluation.
double nonlinear_F_diff(double f1, double f2, double v_base, const ModelParams& params);

/// H(f1) - H(f2), factored like nonlinear_F_diff.
double nonlinear_H_diff(double f1, double f2, double v_base, const ModelParams& params);

namespace detail {

/// (1+t)^(-g) - 1 + g t, accurate near t = 0.
double taylor_remainder(double t, double g);

/// [taylor_remainder(a) - taylor_remainder(b)] / (a - b).
double taylor_remainder_slope(double a, double b, double g);

/// log1p(x) - x, accurate near x = 0.
double log_remainder(double x);

/// [log_remainder(a) - log_remainder(b)] / (a - b).
double log_remainder_slope(double a, double b);

}  // namespace detail

}  // namespace cfront

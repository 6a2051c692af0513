#pragma once

/// @file numerics.hpp
/// @brief Small shared numerical helpers: line fits, golden-section search,
/// bracketed root finding, trapezoid quadrature.

#include <functional>
#include <span>
#include <vector>

namespace cfront {

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r_squared = 0.0;
};

/// Ordinary least squares y = slope x + intercept. Needs >= 2 distinct x.
/// r_squared is 1 when y is exactly constant.
LineFit least_squares_line(std::span<const double> x, std::span<const double> y);

struct Minimum {
    double x = 0.0;
    double value = 0.0;
};

/// Golden-section search on [a, b] until the bracket is below xtol.
Minimum golden_section(const std::function<double(double)>& f, double a, double b, double xtol);

/// Root of f on [a, b] with f(a) f(b) <= 0 (TOMS 748). Throws SolverError otherwise.
double find_root(const std::function<double(double)>& f, double a, double b, double xtol = 1e-14);

/// Trapezoid rule on a uniform grid of spacing dx.
double trapezoid(std::span<const double> f, double dx);

/// Uniform grid of n points from a to b inclusive.
std::vector<double> linspace(double a, double b, std::size_t n);

}  // namespace cfront

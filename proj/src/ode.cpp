#include "cfront/ode.hpp"

#include "cfront/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>
#include <utility>

namespace cfront {

namespace {

// Hairer & Wanner SDIRK4 (L-stable, diagonal 1/4) with embedded order 3.
constexpr double kG = 0.25;
constexpr std::array<double, 5> kC = {0.25, 0.75, 11.0 / 20.0, 0.5, 1.0};
constexpr double kA[5][5] = {
    {0.25, 0, 0, 0, 0},
    {0.5, 0.25, 0, 0, 0},
    {17.0 / 50.0, -1.0 / 25.0, 0.25, 0, 0},
    {371.0 / 1360.0, -137.0 / 2720.0, 15.0 / 544.0, 0.25, 0},
    {25.0 / 24.0, -49.0 / 48.0, 125.0 / 16.0, -85.0 / 12.0, 0.25},
};
constexpr std::array<double, 5> kB = {25.0 / 24.0, -49.0 / 48.0, 125.0 / 16.0, -85.0 / 12.0, 0.25};
constexpr std::array<double, 5> kBhat = {59.0 / 48.0, -17.0 / 96.0, 225.0 / 32.0, -85.0 / 12.0, 0.0};

/// Solves Y - h g f(t, Y) = rhs for Y by Newton with a difference Jacobian.
bool solve_stage(const ScalarRhs& f, double t, double h, double rhs, double guess, double& out) {
    double y = guess;
    for (int it = 0; it < 25; ++it) {
        const double fy = f(t, y);
        if (!std::isfinite(fy)) return false;
        const double dy = 1e-7 * std::max(1.0, std::abs(y));
        const double jac = (f(t, y + dy) - fy) / dy;
        const double denom = 1.0 - h * kG * jac;
        const double res = y - h * kG * fy - rhs;
        if (!std::isfinite(denom) || denom == 0.0) return false;
        const double delta = res / denom;
        y -= delta;
        if (!std::isfinite(y)) return false;
        if (std::abs(delta) <= 1e-15 * std::max(1.0, std::abs(y))) {
            out = y;
            return true;
        }
    }
    // Accept a converged-to-roundoff iterate even if the last update was not tiny.
    const double res = y - h * kG * f(t, y) - rhs;
    if (std::abs(res) <= 1e-13 * std::max(1.0, std::abs(y))) {
        out = y;
        return true;
    }
    return false;
}

}  // namespace

Trajectory integrate_sdirk4(const ScalarRhs& f, double t0, double y0, double t_end,
                            const OdeOptions& opts, const std::function<bool(double, double)>& stop) {
    Trajectory tr;
    tr.t.push_back(t0);
    tr.y.push_back(y0);
    if (t_end == t0) return tr;
    const double dir = t_end > t0 ? 1.0 : -1.0;
    double t = t0;
    double y = y0;
    double h = std::min(std::abs(opts.h_init), opts.h_max);
    std::size_t steps = 0;

    while (dir * (t_end - t) > 0.0) {
        if (++steps > opts.max_steps) throw SolverError("SDIRK4 exceeded the maximum number of steps", t);
        const double h_floor = opts.h_min * std::max(1.0, std::abs(t));
        if (h < h_floor) {
            std::ostringstream os;
            os << "SDIRK4 step size underflow at t = " << t;
            throw SolverError(os.str(), t);
        }
        bool last = false;
        if (h >= dir * (t_end - t)) {
            h = dir * (t_end - t);
            last = true;
        }
        // Use the step that the stored abscissae actually realize; far from
        // t = 0 the rounding of t + h is otherwise a visible defect.
        const double t_next = last ? t_end : t + dir * h;
        const double hs = t_next - t;

        std::array<double, 5> k{};
        bool ok = true;
        double guess = y;
        for (int i = 0; i < 5 && ok; ++i) {
            double rhs = y;
            for (int j = 0; j < i; ++j) rhs += hs * kA[i][j] * k[j];
            double yi = 0.0;
            ok = solve_stage(f, t + kC[i] * hs, hs, rhs, guess, yi);
            if (ok) {
                k[i] = (yi - rhs) / (hs * kG);
                guess = yi;
            }
        }
        if (!ok) {
            h *= 0.25;
            ++tr.rejected;
            continue;
        }
        double y_new = y;
        double err = 0.0;
        for (int i = 0; i < 5; ++i) {
            y_new += hs * kB[i] * k[i];
            err += hs * (kB[i] - kBhat[i]) * k[i];
        }
        err = std::abs(err);
        if (!std::isfinite(y_new) || !std::isfinite(err)) {
            h *= 0.25;
            ++tr.rejected;
            continue;
        }
        const double ratio = err > 0.0 ? opts.tol / err : 1e300;
        const double factor = std::clamp(0.9 * std::pow(ratio, 0.25), 0.2, 4.0);
        if (err <= opts.tol) {
            t = t_next;
            y = y_new;
            tr.t.push_back(t);
            tr.y.push_back(y);
            if (stop && stop(t, y)) {
                tr.stopped_early = true;
                break;
            }
            h = std::min(h * factor, opts.h_max);
        } else {
            ++tr.rejected;
            h *= std::min(factor, 0.9);
        }
    }
    return tr;
}

double rk4_advance(const ScalarRhs& f, double t0, double y0, double t1, int n) {
    if (n < 1) n = 1;
    const double h = (t1 - t0) / n;
    double y = y0;
    double t = t0;
    for (int i = 0; i < n; ++i) {
        const double k1 = f(t, y);
        const double k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
        const double k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
        const double k4 = f(t + h, y + h * k3);
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        t = t0 + (i + 1) * h;
    }
    return y;
}

void reverse_trajectory(Trajectory& tr) {
    std::reverse(tr.t.begin(), tr.t.end());
    std::reverse(tr.y.begin(), tr.y.end());
}

DenseSolution::DenseSolution(ScalarRhs f, std::vector<double> t, std::vector<double> y,
                             double slope_lo, double slope_hi, int substeps)
    : f_(std::move(f)), t_(std::move(t)), y_(std::move(y)),
      slope_lo_(slope_lo), slope_hi_(slope_hi), substeps_(substeps) {
    if (t_.empty() || t_.size() != y_.size()) throw UsageError("DenseSolution needs matching non-empty node arrays");
    for (std::size_t i = 1; i < t_.size(); ++i)
        if (!(t_[i] > t_[i - 1])) throw UsageError("DenseSolution nodes must be strictly increasing");
}

double DenseSolution::operator()(double t) const {
    if (t <= t_.front()) return y_.front() + slope_lo_ * (t - t_.front());
    if (t >= t_.back()) return y_.back() + slope_hi_ * (t - t_.back());
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    std::size_t hi = static_cast<std::size_t>(it - t_.begin());
    std::size_t lo = hi - 1;
    if (t == t_[lo]) return y_[lo];
    const std::size_t near = (t - t_[lo] <= t_[hi] - t) ? lo : hi;
    return rk4_advance(f_, t_[near], y_[near], t, substeps_);
}

}  // namespace cfront

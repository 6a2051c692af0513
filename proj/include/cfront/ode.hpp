#pragma once

/// @file ode.hpp
/// @brief Adaptive L-stable SDIRK4 for scalar ODEs y' = f(t, y), and a
/// dense-output table that re-integrates from the nearest accepted node.

#include <cstddef>
#include <functional>
#include <vector>

namespace cfront {

using ScalarRhs = std::function<double(double t, double y)>;

struct OdeOptions {
    double tol = 1e-11;       ///< absolute local error tolerance on y
    double h_init = 1e-3;     ///< first trial step (magnitude)
    double h_min = 1e-14;     ///< underflow threshold, relative to max(1, |t|)
    double h_max = 1e300;     ///< step cap (magnitude)
    std::size_t max_steps = 5'000'000;
};

/// Accepted nodes of an integration, in the direction of travel.
struct Trajectory {
    std::vector<double> t;
    std::vector<double> y;
    std::size_t rejected = 0;
    bool stopped_early = false;  ///< true if the stop predicate fired
};

/// Integrates from (t0, y0) to t_end (either direction).
///
/// The optional predicate is evaluated after every accepted step; when it
/// returns true the integration ends at that node. Throws SolverError
/// carrying the last t reached when the step underflows h_min.
Trajectory integrate_sdirk4(const ScalarRhs& f, double t0, double y0, double t_end,
                            const OdeOptions& opts,
                            const std::function<bool(double, double)>& stop = {});

/// Classical RK4 from (t0, y0) to t1 with n equal substeps.
double rk4_advance(const ScalarRhs& f, double t0, double y0, double t1, int n);

/// Tabulated ODE solution with dense evaluation.
///
/// Nodes are stored in increasing t. Inside the table, values come from
/// RK4 re-integration out of the nearest node. Outside, y is extended
/// linearly with the end slopes given at construction (the log-gap
/// variables used throughout are asymptotically linear).
class DenseSolution {
public:
    DenseSolution() = default;
    DenseSolution(ScalarRhs f, std::vector<double> t, std::vector<double> y,
                  double slope_lo, double slope_hi, int substeps = 8);

    double operator()(double t) const;
    bool inside(double t) const { return !t_.empty() && t >= t_.front() && t <= t_.back(); }

    double t_lo() const { return t_.front(); }
    double t_hi() const { return t_.back(); }
    const std::vector<double>& nodes_t() const { return t_; }
    const std::vector<double>& nodes_y() const { return y_; }
    const ScalarRhs& rhs() const { return f_; }

private:
    ScalarRhs f_;
    std::vector<double> t_;
    std::vector<double> y_;
    double slope_lo_ = 0.0;
    double slope_hi_ = 0.0;
    int substeps_ = 8;
};

/// Reverses a backward trajectory into increasing-t order.
void reverse_trajectory(Trajectory& tr);

}  // namespace cfront

#pragma once

/// @file runner.hpp
/// @brief Time marching of the full system with periodic energy reports.

#include "cfront/diagnostics.hpp"
#include "cfront/sim.hpp"

#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace cfront {

struct RunConfig {
    double T = 1.0;
    int stride = 10;  ///< steps between reports; the final state is always reported
    SchemeConfig scheme;
    double c = 0.25;  ///< X-norm weight
    /// mass gate of integrated_perturbation; infinity forces non-zero-mass data through
    double mass_tolerance = 1e-10;
    std::size_t edge_cells = 20;    ///< width of the boundary watch zone
    double edge_tolerance = 1e-6;   ///< allowed edge perturbation relative to the initial sup norm
    void validate() const;
};

using Observer = std::function<void(const SimState&, const EnergyReport&)>;

struct RunResult {
    SimState final_state;  ///< last accepted state
    std::vector<EnergyReport> reports;
    int steps = 0;
    double min_v = std::numeric_limits<double>::infinity();  ///< over all accepted states
    double max_edge = 0.0;  ///< largest perturbation seen in the boundary zones
    bool boundary_reached = false;  ///< the run stops at the first step that touches a boundary zone
    bool aborted = false;   ///< congestion violation; final_state is the state before the failed step
    std::string error;
};

/// One report of `state` against `reference`. x_norm_sq is left at 0; run()
/// fills it from the running time integrals of D_k.
EnergyReport make_report(const SimState& state, const SimState& reference, const EnergyWeights& weights,
                         const ModelParams& params, double mass_tolerance);

/// Advances `state` to T. A congestion violation ends the run with
/// `aborted` set; a perturbation entering a boundary zone ends it with
/// `boundary_reached` set. Other errors propagate. Throws UsageError for T <= 0.
RunResult run(SimState state, const SimState& reference, const TravelingWave& wave, const ModelParams& params,
              const RunConfig& config, std::span<const Observer> observers = {});

}  // namespace cfront

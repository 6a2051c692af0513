#include "cfront/runner.hpp"

#include "cfront/errors.hpp"

#include <algorithm>
#include <cmath>

namespace cfront {

namespace {

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double edge_diff(const std::vector<double>& a, const std::vector<double>& b, std::size_t width) {
    const std::size_t n = a.size();
    width = std::min(width, n);
    double m = 0.0;
    for (std::size_t i = 0; i < width; ++i)
        m = std::max({m, std::abs(a[i] - b[i]), std::abs(a[n - 1 - i] - b[n - 1 - i])});
    return m;
}

}  // namespace

void RunConfig::validate() const {
    if (!(T > 0.0)) throw UsageError("run.T must be positive");
    if (stride < 1) throw UsageError("run.stride must be at least 1");
    if (!(c > 0.0 && c <= 1.0)) throw UsageError("run.c must lie in (0, 1]");
    if (!(mass_tolerance > 0.0)) throw UsageError("run.mass_tolerance must be positive");
    scheme.validate();
}

EnergyReport make_report(const SimState& state, const SimState& reference, const EnergyWeights& weights,
                         const ModelParams& params, double mass_tolerance) {
    EnergyReport r;
    r.t = state.t;
    const IntegratedState ws = integrated_perturbation(state, reference, params, mass_tolerance);
    for (int k = 0; k < 3; ++k) {
        r.E[k] = energy_Ek(ws, weights, k);
        r.D[k] = dissipation_Dk(ws, weights, k);
    }
    const double dx = state.grid.dx;
    std::vector<double> du(state.u.size()), dv(state.v.size());
    for (std::size_t i = 0; i < du.size(); ++i) du[i] = state.u[i] - reference.u[i];
    for (std::size_t c = 0; c < dv.size(); ++c) dv[c] = state.v[c] - reference.v[c];
    r.mass_u = mass_of(du, dx, Centering::Nodes);
    r.mass_v = mass_of(dv, dx, Centering::Cells);
    r.mass_w = ws.defect_W;
    r.sup_u = sup_diff(state.u, reference.u);
    r.sup_v = sup_diff(state.v, reference.v);
    return r;
}

RunResult run(SimState state, const SimState& reference, const TravelingWave& wave, const ModelParams& params,
              const RunConfig& config, std::span<const Observer> observers) {
    config.validate();
    const EnergyWeights weights = energy_weights(wave, state.grid);
    const double eps = params.epsilon(), gamma = params.gamma();
    const double t_end = state.t + config.T;

    RunResult out;
    std::array<double, 3> integral{};
    EnergyReport last;
    double initial_sup = 0.0;

    auto report = [&](bool first) {
        EnergyReport r = make_report(state, reference, weights, params, config.mass_tolerance);
        if (!first) {
            const double dt = r.t - last.t;
            for (int k = 0; k < 3; ++k) integral[k] += 0.5 * dt * (r.D[k] + last.D[k]);
        } else {
            initial_sup = std::max(r.sup_u, r.sup_v);
        }
        const XNormSample s{r.E, integral};
        r.x_norm_sq = x_norm_sq(std::span<const XNormSample>(&s, 1), config.c, eps, gamma);
        if (!first) r.x_norm_sq = std::max(r.x_norm_sq, last.x_norm_sq);
        out.reports.push_back(r);
        last = r;
        for (const auto& obs : observers) obs(state, r);
    };
    auto watch = [&] {
        out.min_v = std::min(out.min_v, state.min_v());
        const double e = std::max(edge_diff(state.v, reference.v, config.edge_cells),
                                  edge_diff(state.u, reference.u, config.edge_cells));
        out.max_edge = std::max(out.max_edge, e);
        if (initial_sup > 0.0 && e > config.edge_tolerance * initial_sup) out.boundary_reached = true;
    };

    report(true);
    watch();
    const double t_tol = 1e-12 * std::max(1.0, std::abs(t_end));
    int since = 0;
    while (t_end - state.t > t_tol) {
        double dt = stable_dt(state, config.scheme, params);
        const double left = t_end - state.t;
        if (dt >= left) dt = left;
        else if (dt > 0.5 * left) dt = 0.5 * left;  // avoid a sliver step at the end
        SimState next = state;
        try {
            step(next, dt, params);
        } catch (const CongestionViolation& e) {
            out.aborted = true;
            out.error = e.what();
            break;
        }
        state = std::move(next);
        ++out.steps;
        watch();
        /// past this point boundary fluxes spoil the zero-mass balance
        if (out.boundary_reached) {
            out.error = "perturbation reached the boundary zone at t = " + std::to_string(state.t);
            break;
        }
        if (++since == config.stride || t_end - state.t <= t_tol) {
            report(false);
            since = 0;
        }
    }
    if (!out.aborted && !out.boundary_reached && since != 0) report(false);
    out.final_state = std::move(state);
    return out;
}

}  // namespace cfront

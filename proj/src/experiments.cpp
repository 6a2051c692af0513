#include "cfront/experiments.hpp"

#include "cfront/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace cfront {

namespace {

double bump(double z) { return std::abs(z) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - z * z)) : 0.0; }

template <class T>
bool strictly_monotone(const std::vector<T>& a, bool increasing) {
    for (std::size_t i = 1; i < a.size(); ++i)
        if (increasing ? !(a[i] > a[i - 1]) : !(a[i] < a[i - 1])) return false;
    return true;
}

}  // namespace

std::vector<RhRow> rankine_hugoniot_sweep(int count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> le(-8.0, -1.0), g(1.0, 4.0), vp(1.2, 5.0);
    std::vector<RhRow> rows;
    while (static_cast<int>(rows.size()) < count) {
        const double eps = std::pow(10.0, le(rng)), gamma = g(rng), v_plus = vp(rng);
        if (1.0 + std::pow(eps, 1.0 / gamma) >= v_plus) continue;
        const ModelParams p(eps, gamma, 1.0, v_plus);
        const double s = shock_speed(p);
        rows.push_back({eps, gamma, v_plus, s, rankine_hugoniot_residual(p, s)});
    }
    return rows;
}

std::vector<ValidityRow> profile_validity_sweep(const std::vector<double>& gammas, const std::vector<double>& eps,
                                                const std::vector<double>& v_plus, double mu, double xi_lo,
                                                double xi_hi) {
    std::vector<ValidityRow> rows;
    ProfileOptions opts;
    opts.tail_gap = 1e-13;
    for (double g : gammas)
        for (double e : eps)
            for (double vp : v_plus) {
                ValidityRow r{e, g, vp, false, false, 0.0, {}};
                try {
                    const ModelParams p(e, g, mu, vp);
                    const auto w = solve_profile(p, ShiftSpec::transition_anchor(), xi_lo, xi_hi, opts);
                    r.monotone = w.v_strictly_increasing() && strictly_monotone(w.log_gap_below(), true) &&
                                 strictly_monotone(w.log_gap_above(), false);
                    r.confined = std::all_of(w.v().begin(), w.v().end(),
                                             [&](double v) { return v > p.v_minus() && v < p.v_plus(); });
                    r.residual = w.residual_max();
                } catch (const std::exception& ex) {
                    r.error = ex.what();
                }
                rows.push_back(r);
            }
    return rows;
}

std::vector<ConvergenceRow> convergence_sweep(double gamma, double mu, double v_plus, const std::vector<double>& eps,
                                              double xi_lo, double xi_hi) {
    std::vector<ConvergenceRow> rows;
    ProfileOptions opts;
    opts.tail_gap = 1e-13;
    for (double e : eps) {
        const ModelParams p(e, gamma, mu, v_plus);
        const auto w = solve_profile(p, ShiftSpec::transition_anchor(), xi_lo, xi_hi, opts);
        const auto d = min_shift_distance(w, LimitProfile(p));
        rows.push_back({e, d.distance, d.best_shift});
    }
    return rows;
}

TransitionStudy transition_sweep(double gamma, double mu, double v_plus, const std::vector<double>& eps, double R,
                                 double M, double M_weighted, double xi_lo, double xi_hi) {
    TransitionStudy out;
    out.gamma = gamma;
    std::vector<double> es, errs;
    for (double e : eps) {
        const ModelParams p(e, gamma, mu, v_plus);
        const LimitProfile lp(p);
        const auto ex = transition_params(p);
        const auto w = solve_profile(p, ShiftSpec::transition_anchor(), xi_lo, xi_hi);
        const auto nominal = transition_error(w, ex, lp, R, M);
        const auto weighted = transition_error(w, ex, lp, R, M_weighted);
        out.rows.push_back({e, ex.K, ex.omega, ex.xi_star, ex.xi_star_asymptotic, ex.matching_value_residual,
                            ex.matching_derivative_residual, nominal.sup_error, weighted.weighted_error,
                            weighted.weighted_error / std::pow(e, 1.0 / (gamma + 1.0)), nominal.window_empty});
        es.push_back(e);
        errs.push_back(nominal.sup_error);
    }
    if (es.size() >= 3) out.sup_fit = rate_fit(es, errs);
    return out;
}

std::vector<BarrierRow> barrier_sweep(double gamma, double mu, double v_plus, const std::vector<double>& eps,
                                      std::size_t points, double decay_lengths, double xi_lo, double xi_hi) {
    std::vector<BarrierRow> rows;
    for (double e : eps) {
        const ModelParams p(e, gamma, mu, v_plus);
        const auto w = solve_profile(p, ShiftSpec::transition_anchor(), xi_lo, xi_hi);
        const double v0 = w.value(0.0);
        const auto bp = solve_barriers(p, v0);
        const auto fit = congested_decay_fit(w, bp.xi_eps);
        const double zeta_min = -(std::max(bp.zeta_upper, bp.zeta_lower) + decay_lengths / bp.sigma_lower);
        const auto sw = sandwich_check(bp, w, points, zeta_min);
        rows.push_back({e, v0, fit.sigma_hat, bp.sigma_lower, bp.sigma_upper, fit.r_squared, fit.window_shrunk,
                        bp.zeta_upper, bp.zeta_lower, bp.crossing_asymptotic, sw.points, sw.violations,
                        sw.worst_lower_margin, sw.worst_upper_margin});
    }
    return rows;
}

LinearizedStudy linearized_refinement(const LinearizedSetup& s) {
    if (s.dt.size() < 2) throw UsageError("linearized_refinement: need at least two dt levels");
    const ModelParams p(s.eps, s.gamma, s.mu, s.v_plus);
    const double L = s.half_width;
    const auto wave = solve_profile(p, ShiftSpec::transition_anchor(), -L - 1.0, L + 1.0);
    const Grid grid(-L, L, static_cast<std::size_t>(std::lround(2.0 * L / s.dx)));
    const auto co = linearized_coefficients(wave, grid);
    LinearizedState init{grid, std::vector<double>(grid.cells), std::vector<double>(grid.nodes()), 0.0};
    for (std::size_t c = 0; c < grid.cells; ++c) init.W[c] = bump((grid.cell(c) - s.bump_center) / s.bump_width);
    for (std::size_t i = 0; i < grid.nodes(); ++i) init.V[i] = bump((grid.node(i) - s.bump_center) / s.bump_width);
    init.V.front() = init.V.back() = 0.0;

    LinearizedStudy out;
    out.E0 = linearized_energy(init, co);
    for (double dt : s.dt) {
        const int steps = static_cast<int>(std::lround(s.T / dt));
        const auto r = linearized_run(init, co, dt, steps, p);
        out.dt.push_back(dt);
        out.residual.push_back(std::abs(energy_identity_residual(r)));
    }
    for (std::size_t i = 0; i + 1 < out.residual.size(); ++i) out.ratios.push_back(out.residual[i] / out.residual[i + 1]);
    return out;
}

CommutatorStudy commutator_refinement(double eps, double gamma, double mu, double v_plus, const std::vector<double>& h,
                                      double lo, double hi) {
    const ModelParams p(eps, gamma, mu, v_plus);
    const auto wave = solve_profile(p, ShiftSpec::transition_anchor(), lo - 2.0, hi + 2.0);
    const TestFunction g{[](double x) { return std::sin(2 * x) + 0.5 * std::cos(3 * x); },
                         [](double x) { return 2 * std::cos(2 * x) - 1.5 * std::sin(3 * x); },
                         [](double x) { return -4 * std::sin(2 * x) - 4.5 * std::cos(3 * x); },
                         [](double x) { return -8 * std::cos(2 * x) + 13.5 * std::sin(3 * x); }};
    CommutatorStudy out;
    for (double hh : h) out.levels.push_back(commutator_check(wave, g, hh, lo, hi));
    for (std::size_t i = 0; i + 1 < out.levels.size(); ++i) {
        out.first_ratios.push_back(out.levels[i].first_order_error / out.levels[i + 1].first_order_error);
        out.second_ratios.push_back(out.levels[i].second_order_error / out.levels[i + 1].second_order_error);
    }
    return out;
}

std::vector<BoundVariation> bound_variation(const std::vector<BoundRow>& rows) {
    std::vector<BoundVariation> out;
    for (const auto& r : rows) {
        auto it = std::find_if(out.begin(), out.end(), [&](const BoundVariation& b) { return b.bound == r.bound; });
        if (it == out.end()) {
            out.push_back({r.bound, r.max_ratio, r.max_ratio, 1.0});
            continue;
        }
        it->min_ratio = std::min(it->min_ratio, r.max_ratio);
        it->max_ratio = std::max(it->max_ratio, r.max_ratio);
    }
    for (auto& b : out) {
        if (b.max_ratio == 0.0) b.spread = 1.0;
        else if (b.min_ratio == 0.0) b.spread = std::numeric_limits<double>::infinity();
        else b.spread = b.max_ratio / b.min_ratio;
    }
    return out;
}

StabilitySetup default_stability_setup() {
    StabilitySetup s;
    s.pert.shape = PerturbationSpec::Shape::GaussianDipole;
    s.pert.target = PerturbationSpec::Target::Both;
    s.pert.center = 0.0;
    s.pert.width = 1.0;
    s.pert.amplitude = -1.0;
    s.run.T = 20.0;
    s.run.stride = 50;
    return s;
}

PreparedRun prepare_stability_run(const StabilitySetup& s) {
    const ModelParams p(s.eps, s.gamma, s.mu, s.v_plus, s.u_plus);
    if (!(s.x_hi > s.x_lo) || !(s.dx > 0.0)) throw UsageError("grid: need x_hi > x_lo and dx > 0");
    if (!(s.profile_margin > 0.0)) throw UsageError("profile margin must be positive");
    auto wave = solve_profile(p, ShiftSpec::transition_anchor(), s.x_lo - s.profile_margin, s.x_hi + s.profile_margin);
    const Grid grid(s.x_lo, s.x_hi, static_cast<std::size_t>(std::lround((s.x_hi - s.x_lo) / s.dx)));

    DiscreteBackground bg;
    SimState ref;
    if (s.frame == Frame::CoMoving) {
        bg = discrete_background(wave, grid);
        ref = background_state(bg, p);
    } else {
        ref = sample_wave(wave, grid, Frame::Lab);
    }

    PerturbationSpec pert = s.pert;
    const double amplitude = pert.amplitude < 0.0 ? -pert.amplitude * amplitude_budget(p) : pert.amplitude;
    pert.amplitude = amplitude;
    if (s.mass_offset != 0.0) {
        auto r = realize_perturbation(pert, grid);
        for (double& x : r.dv) x += s.mass_offset;
        pert.shape = PerturbationSpec::Shape::Custom;
        pert.custom_v = std::move(r.dv);
        pert.custom_u = std::move(r.du);
    }
    InitReport init;
    SimState initial = init_state(ref, pert, p, &init);
    return {p, std::move(wave), grid, std::move(bg), std::move(ref), std::move(initial), init, amplitude};
}

StabilityOutcome run_prepared(const PreparedRun& prep, const RunConfig& config, std::span<const Observer> observers) {
    StabilityOutcome out{.params = prep.params};
    out.amplitude = prep.amplitude;
    out.init = prep.init;
    out.cells = prep.grid.cells;
    out.background_residual = prep.background.residual;
    out.background_flux_offset = prep.background.flux_offset;
    out.result = run(prep.initial, prep.reference, prep.wave, prep.params, config, observers);

    std::vector<double> su, sv;
    for (const auto& r : out.result.reports) {
        su.push_back(r.sup_u);
        sv.push_back(r.sup_v);
        out.x_norm_max = std::max(out.x_norm_max, r.x_norm_sq);
        out.max_mass = std::max({out.max_mass, std::abs(r.mass_u), std::abs(r.mass_w), std::abs(r.mass_v)});
    }
    out.decay_u = sup_norm_decay(su);
    out.decay_v = sup_norm_decay(sv);
    if (!out.result.reports.empty()) out.x_norm_initial = out.result.reports.front().x_norm_sq;
    return out;
}

StabilityOutcome stability_run(const StabilitySetup& setup, std::span<const Observer> observers) {
    return run_prepared(prepare_stability_run(setup), setup.run, observers);
}

}  // namespace cfront

#include "cfront/diagnostics.hpp"

#include "cfront/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cfront {

namespace {

double square_sum(std::span<const double> f, std::span<const double> w, double dx) {
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += w[i] * f[i] * f[i];
    return s * dx;
}

double trapezoid_of_squares(std::span<const double> f, double dx) {
    std::vector<double> sq(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) sq[i] = f[i] * f[i];
    return trapezoid(sq, dx);
}

void check_k(int k) {
    if (k < 0 || k > 2) throw UsageError("energy order k must be 0, 1 or 2");
}

/// centered first difference, NaN at the two ends
std::vector<double> centered(const std::vector<double>& f, double h) {
    std::vector<double> d(f.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
    return d;
}

/// compact second difference, NaN at the two ends
std::vector<double> centered2(const std::vector<double>& f, double h) {
    std::vector<double> d(f.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) d[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h);
    return d;
}

struct Pair {
    std::vector<double> first, second;
};

/// Pointwise derivative data of the quadratic remainders of the pressure.
struct FDerivs {
    double F, Fx, Fxx;
};

FDerivs f_derivs(double v, double v1, double v2, double f, double f1, double f2, const ModelParams& p) {
    const double g = p.gamma();
    const double t = f / (v - 1.0);
    const double P1 = pressure(v, 1, p), P2 = pressure(v, 2, p);
    const double A = P1 * detail::taylor_remainder(t, g + 1.0);
    const double B = P1 * std::expm1(-(g + 1.0) * std::log1p(t));
    const double A2 = P2 * detail::taylor_remainder(t, g + 2.0);
    const double B2 = P2 * std::expm1(-(g + 2.0) * std::log1p(t));
    const double P2f = pressure(v + f, 2, p);
    return {nonlinear_F(f, v, p), -(A * v1 + B * f1),
            -(A2 * v1 * v1 + 2.0 * B2 * v1 * f1 + A * v2 + P2f * f1 * f1 + B * f2)};
}

FDerivs h_derivs(double v, double v1, double v2, double f, double f1, double f2, const ModelParams& p) {
    const double r = f / v;
    const double rx = f1 / v - f * v1 / (v * v);
    const double rxx = f2 / v - 2.0 * f1 * v1 / (v * v) - f * v2 / (v * v) + 2.0 * f * v1 * v1 / (v * v * v);
    return {nonlinear_H(f, v, p), -r * rx / (1.0 + r), -rx * rx / ((1.0 + r) * (1.0 + r)) - r * rxx / (1.0 + r)};
}

double ratio(double lhs, double rhs) {
    if (rhs == 0.0) return lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return std::abs(lhs) / rhs;
}

}  // namespace

const std::array<const char*, 6> kBoundNames{"F", "dF", "d2F", "H", "dH", "d2H"};

EnergyWeights energy_weights(const TravelingWave& wave, const Grid& grid) {
    EnergyWeights w;
    w.grid = grid;
    w.inv_stiffness.resize(grid.cells);
    w.slope.resize(grid.cells);
    for (std::size_t c = 0; c < grid.cells; ++c) {
        const double x = grid.cell(c);
        w.inv_stiffness[c] = -1.0 / pressure(wave.value(x), 1, wave.params());
        w.slope[c] = wave.derivatives(x).d1;
    }
    return w;
}

std::vector<double> discrete_derivative(std::span<const double> f, double h, int k) {
    const std::size_t n = f.size();
    if (k < 0 || k > 3) throw UsageError("discrete_derivative: k must be in 0..3");
    if (k == 0) return {f.begin(), f.end()};
    if (n < 4) throw UsageError("discrete_derivative: need at least 4 samples");
    std::vector<double> d(n);
    if (k == 1) {
        for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
        d[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h);
        d[n - 1] = (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h);
        return d;
    }
    if (k == 2) {
        for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - 2.0 * f[i] + f[i - 1]) / (h * h);
        d[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (h * h);
        d[n - 1] = (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / (h * h);
        return d;
    }
    return discrete_derivative(discrete_derivative(f, h, 2), h, 1);
}

double energy_Ek(const IntegratedState& ws, const EnergyWeights& w, int k) {
    check_k(k);
    const double dx = ws.grid.dx;
    return square_sum(discrete_derivative(ws.W, dx, k), w.inv_stiffness, dx) +
           trapezoid_of_squares(discrete_derivative(ws.V, dx, k), dx);
}

double energy_Ek(const IntegratedState& ws, const TravelingWave& wave, int k) {
    return energy_Ek(ws, energy_weights(wave, ws.grid), k);
}

double dissipation_Dk(const IntegratedState& ws, const EnergyWeights& w, int k) {
    check_k(k);
    const double dx = ws.grid.dx;
    return square_sum(discrete_derivative(ws.W, dx, k), w.slope, dx) +
           trapezoid_of_squares(discrete_derivative(ws.V, dx, k + 1), dx);
}

double dissipation_Dk(const IntegratedState& ws, const TravelingWave& wave, int k) {
    return dissipation_Dk(ws, energy_weights(wave, ws.grid), k);
}

double x_norm_sq(std::span<const XNormSample> history, double c, double eps, double gamma) {
    if (history.empty()) throw UsageError("x_norm_sq: empty history");
    if (!(c > 0.0 && c <= 1.0)) throw UsageError("x_norm_sq: c must lie in (0, 1]");
    double best = 0.0;
    for (const auto& s : history) {
        double sum = 0.0, weight = 1.0;
        const double step = c * std::pow(eps, 2.0 / gamma);
        for (int k = 0; k < 3; ++k, weight *= step) sum += weight * (s.E[k] + s.D_integral[k]);
        best = std::max(best, sum);
    }
    return best;
}

std::vector<XNormSample> accumulate_dissipation(std::span<const EnergyReport> reports) {
    std::vector<XNormSample> out(reports.size());
    for (std::size_t i = 0; i < reports.size(); ++i) {
        out[i].E = reports[i].E;
        if (i == 0) continue;
        const double dt = reports[i].t - reports[i - 1].t;
        for (int k = 0; k < 3; ++k)
            out[i].D_integral[k] = out[i - 1].D_integral[k] + 0.5 * dt * (reports[i].D[k] + reports[i - 1].D[k]);
    }
    return out;
}

LinearizedRun linearized_run(LinearizedState st, const LinearizedCoefficients& co, double dt, int steps,
                             const ModelParams& params) {
    if (!(dt > 0.0) || steps < 1) throw UsageError("linearized_run: need dt > 0 and at least one step");
    LinearizedRun run;
    run.t.reserve(static_cast<std::size_t>(steps) + 1);
    auto record = [&] {
        run.t.push_back(st.t);
        run.energy.push_back(linearized_energy(st, co));
        run.rate.push_back(linearized_dissipation_rate(st, co, params));
    };
    record();
    for (int n = 0; n < steps; ++n) {
        step_linearized(st, co, dt, params);
        record();
    }
    return run;
}

double energy_identity_residual(const LinearizedRun& run) {
    if (run.t.empty()) throw UsageError("energy_identity_residual: empty run");
    double diss = 0.0;
    for (std::size_t n = 1; n < run.t.size(); ++n) diss += (run.t[n] - run.t[n - 1]) * run.rate[n];
    return run.energy.back() + diss - run.energy.front();
}

CommutatorCheck commutator_check(const TravelingWave& wave, const TestFunction& g, double h, double lo, double hi) {
    if (!(h > 0.0) || !(hi > lo)) throw UsageError("commutator_check: need h > 0 and hi > lo");
    const ModelParams& p = wave.params();
    const double mu = p.mu();
    const auto n_in = static_cast<std::size_t>(std::lround((hi - lo) / h));
    const std::size_t pad = 4;
    const std::size_t n = n_in + 1 + 2 * pad;
    std::vector<double> x(n), v(n), v1(n), v2(n), v3(n), p1(n), gs(n);
    for (std::size_t j = 0; j < n; ++j) {
        x[j] = lo + (static_cast<double>(j) - static_cast<double>(pad)) * h;
        v[j] = wave.value(x[j]);
        const auto d = wave.derivatives(x[j]);
        v1[j] = d.d1;
        v2[j] = d.d2;
        v3[j] = d.d3;
        p1[j] = pressure(v[j], 1, p);
        gs[j] = g.g(x[j]);
    }
    auto L = [&](const std::vector<double>& f, const std::vector<double>& gg) {
        Pair out;
        const auto dg = centered(gg, h);
        std::vector<double> q(n);
        for (std::size_t j = 0; j < n; ++j) q[j] = dg[j] / v[j];
        const auto df = centered(f, h);
        const auto dq = centered(q, h);
        out.first.resize(n);
        out.second.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            out.first[j] = p1[j] * dg[j];
            out.second[j] = -df[j] - mu * dq[j];
        }
        return out;
    };
    auto commutators = [&](const std::vector<double>& f) {
        const Pair base = L(f, gs);
        const Pair c1a = L(centered(f, h), centered(gs, h));
        const Pair c2a = L(centered2(f, h), centered2(gs, h));
        const auto d1f = centered(base.first, h), d1s = centered(base.second, h);
        const auto d2f = centered2(base.first, h), d2s = centered2(base.second, h);
        std::array<std::vector<double>, 4> out;
        for (auto& o : out) o.resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            out[0][j] = c1a.first[j] - d1f[j];
            out[1][j] = c1a.second[j] - d1s[j];
            out[2][j] = c2a.first[j] - d2f[j];
            out[3][j] = c2a.second[j] - d2s[j];
        }
        return out;
    };
    std::vector<double> fa(n), fb(n);
    for (std::size_t j = 0; j < n; ++j) {
        fa[j] = std::cos(1.7 * x[j]) + x[j] * x[j];
        fb[j] = 3.0 * std::exp(-x[j] * x[j]) - std::sin(0.3 * x[j]);
    }
    const auto ca = commutators(fa);
    const auto cb = commutators(fb);

    CommutatorCheck out;
    out.h = h;
    for (std::size_t j = pad; j < pad + n_in + 1; ++j) {
        const double pp2 = pressure(v[j], 2, p), pp3 = pressure(v[j], 3, p);
        const double a = pp2 * v1[j];
        const double a1 = pp3 * v1[j] * v1[j] + pp2 * v2[j];
        const double vv = v[j];
        const double b = v1[j] / (vv * vv);
        const double b1 = v2[j] / (vv * vv) - 2.0 * v1[j] * v1[j] / (vv * vv * vv);
        const double b2 = v3[j] / (vv * vv) - 6.0 * v1[j] * v2[j] / (vv * vv * vv) +
                          6.0 * v1[j] * v1[j] * v1[j] / (vv * vv * vv * vv);
        const double g1 = g.g1(x[j]), g2 = g.g2(x[j]), g3 = g.g3(x[j]);
        const std::array<double, 4> exact{-a * g1, -mu * (b1 * g1 + b * g2), -2.0 * a * g2 - a1 * g1,
                                          -mu * (3.0 * b1 * g2 + 2.0 * b * g3 + b2 * g1)};
        for (int c = 0; c < 4; ++c) {
            const double err = std::abs(ca[c][j] - exact[c]);
            const double scale = std::abs(exact[c]);
            if (c < 2) {
                out.first_order_error = std::max(out.first_order_error, err);
                out.first_order_scale = std::max(out.first_order_scale, scale);
            } else {
                out.second_order_error = std::max(out.second_order_error, err);
                out.second_order_scale = std::max(out.second_order_scale, scale);
            }
            out.f_dependence = std::max(out.f_dependence, std::abs(ca[c][j] - cb[c][j]));
        }
    }
    return out;
}

BoundSamplePlan default_bound_plan(double delta, std::size_t coarse, std::size_t fine) {
    BoundSamplePlan plan;
    plan.x = linspace(-3.0, 3.0, coarse);
    const auto f = linspace(-60.0 * delta, 0.0, fine);
    plan.x.insert(plan.x.end(), f.begin(), f.end());
    std::sort(plan.x.begin(), plan.x.end());
    const double pi = std::acos(-1.0);
    plan.phases = {0.5 * pi, 1.5 * pi};
    for (int j = 0; j < 8; ++j) plan.phases.push_back(pi / 8.0 + j * pi / 4.0);
    return plan;
}

std::array<double, 6> bound_ratios(const BoundInputs& in, const ModelParams& params) {
    const double delta = params.congested_scale();
    const double v = in.v, gap = v - 1.0, gap2 = gap * gap;
    const double pv = pressure(v, 0, params), P1 = std::abs(pressure(v, 1, params));
    const double f = in.f, af = std::abs(f), af1 = std::abs(in.f1), af2 = std::abs(in.f2);
    const double v1 = in.v1, av2 = std::abs(in.v2);
    const FDerivs F = f_derivs(v, v1, in.v2, f, in.f1, in.f2, params);
    const FDerivs H = h_derivs(v, v1, in.v2, f, in.f1, in.f2, params);
    return {
        ratio(F.F, pv * f * f / gap2),
        ratio(F.Fx, v1 * P1 * f * f / gap2 + pv * af * af1 / gap2),
        ratio(F.Fxx, v1 * P1 * f * f / (delta * gap2) + pv * af1 * af1 / gap2 + pv * af * af2 / gap2),
        ratio(H.F, f * f),
        ratio(H.Fx, af * af1 + f * f),
        ratio(H.Fxx, af * af2 + (af + af1) * af1 + (1.0 + av2) * f * f),
    };
}

std::array<double, 6> bound_ratios_diff(const BoundInputsPair& in, const ModelParams& params) {
    const double delta = params.congested_scale();
    const double v = in.v, gap = v - 1.0;
    const double Dd = pressure(v, 0, params) / (gap * gap);
    const double v1 = in.v1, av2 = std::abs(in.v2);
    const double e = std::abs(in.a - in.b), e1 = std::abs(in.a1 - in.b1), e2 = std::abs(in.a2 - in.b2);
    const double a = std::abs(in.a), a1 = std::abs(in.a1), a2 = std::abs(in.a2);
    const double b = std::abs(in.b), b1 = std::abs(in.b1), b2 = std::abs(in.b2);
    const FDerivs Fa = f_derivs(v, v1, in.v2, in.a, in.a1, in.a2, params);
    const FDerivs Fb = f_derivs(v, v1, in.v2, in.b, in.b1, in.b2, params);
    const FDerivs Ha = h_derivs(v, v1, in.v2, in.a, in.a1, in.a2, params);
    const FDerivs Hb = h_derivs(v, v1, in.v2, in.b, in.b1, in.b2, params);
    return {
        ratio(nonlinear_F_diff(in.a, in.b, v, params), Dd * e * (a + b)),
        ratio(Fa.Fx - Fb.Fx, Dd * ((v1 / gap) * e * (a + b) + e1 * a + b1 * e)),
        ratio(Fa.Fxx - Fb.Fxx, Dd * ((v1 / (delta * gap)) * e * (a + b) + (e1 * a + e * a1) / gap + e1 * (a1 + b1) +
                                     e * a2 + e2 * b + b1 * b1 * e / gap)),
        ratio(nonlinear_H_diff(in.a, in.b, v, params), e * (a + b)),
        ratio(Ha.Fx - Hb.Fx, a * e1 + a * e + (b1 + b) * e),
        ratio(Ha.Fxx - Hb.Fxx, a * ((1.0 + av2) * e + e1 + e2) + ((1.0 + av2) * b + b1 + b2) * e +
                                   e1 * (a1 + b1) + (b * b + b1 * b1) * e),
    };
}

std::vector<BoundRow> lemma_bound_scan(std::span<const double> eps_list, double gamma, double mu, double v_plus,
                                       const BoundSamplePlan* plan) {
    std::vector<BoundRow> rows;
    for (double eps : eps_list) {
        const ModelParams p(eps, gamma, mu, v_plus);
        const double delta = p.congested_scale();
        const BoundSamplePlan local = plan ? *plan : default_bound_plan(delta);
        double xmin = 0.0, xmax = 0.0;
        for (double x : local.x) xmin = std::min(xmin, x), xmax = std::max(xmax, x);
        const auto wave = solve_profile(p, ShiftSpec::transition_anchor(), xmin - 1.0, xmax + 1.0, {});

        struct Point {
            double x, v, v1, v2;
        };
        std::vector<Point> pts;
        // this deep in the plateau v', v'' (one exponential) underflow in the bounds before the remainders do
        for (double x : local.x) {
            const auto d = wave.derivatives(x);
            const bool flat = std::abs(d.d1) < 1e-200;
            pts.push_back({x, wave.value(x), flat ? 0.0 : d.d1, flat ? 0.0 : d.d2});
        }
        pts.push_back({0.0, p.v_minus(), 0.0, 0.0});  // congested plateau

        struct Mode {
            double alpha, k, phase;
        };
        std::vector<Mode> modes;
        std::vector<double> constants;  // k = 0 modes are kept once per value
        for (double a : local.alphas)
            for (double k : local.wavenumbers)
                for (double ph : local.phases) {
                    if (k == 0.0) {
                        const double c = a * std::sin(ph);
                        if (std::any_of(constants.begin(), constants.end(),
                                        [&](double o) { return std::abs(o - c) < 1e-12; }))
                            continue;
                        constants.push_back(c);
                    }
                    modes.push_back({a, k / delta, ph});
                }
        auto eval = [&](const Mode& m, double x) {
            const double amp = m.alpha * 0.5 * delta;
            const double arg = m.k * x + m.phase;
            return std::array<double, 3>{amp * std::sin(arg), amp * m.k * std::cos(arg), -amp * m.k * m.k * std::sin(arg)};
        };

        std::array<double, 6> single{}, pair{};
        std::size_t n_single = 0, n_pair = 0, rej_single = 0, rej_pair = 0;
        const double cap = 0.5 * delta * (1.0 + 1e-14);
        for (const Point& pt : pts) {
            for (const Mode& m : modes) {
                const auto f = eval(m, pt.x);
                if (std::abs(f[0]) > cap) {
                    ++rej_single;
                    continue;
                }
                const auto r = bound_ratios({pt.v, pt.v1, pt.v2, f[0], f[1], f[2]}, p);
                for (int i = 0; i < 6; ++i) single[i] = std::max(single[i], r[i]);
                ++n_single;
            }
            for (std::size_t i = 0; i < modes.size(); ++i)
                for (std::size_t j = 0; j < modes.size(); ++j) {
                    if (i == j) continue;
                    const auto fa = eval(modes[i], pt.x);
                    const auto fb = eval(modes[j], pt.x);
                    if (std::abs(fa[0]) + std::abs(fb[0]) > cap) {
                        ++rej_pair;
                        continue;
                    }
                    const auto r = bound_ratios_diff({pt.v, pt.v1, pt.v2, fa[0], fa[1], fa[2], fb[0], fb[1], fb[2]}, p);
                    for (int q = 0; q < 6; ++q) pair[q] = std::max(pair[q], r[q]);
                    ++n_pair;
                }
        }
        for (int i = 0; i < 6; ++i) rows.push_back({eps, kBoundNames[i], single[i], n_single, rej_single});
        for (int i = 0; i < 6; ++i)
            rows.push_back({eps, std::string(kBoundNames[i]) + "_diff", pair[i], n_pair, rej_pair});
    }
    return rows;
}

double mass_of(std::span<const double> field, double dx, Centering where) {
    if (where == Centering::Nodes) return trapezoid(field, dx);
    double s = 0.0;
    for (double x : field) s += x;
    return s * dx;
}

DecaySummary sup_norm_decay(std::span<const double> series) {
    DecaySummary d;
    if (series.empty()) return d;
    std::size_t ip = 0;
    for (std::size_t i = 1; i < series.size(); ++i)
        if (series[i] > series[ip]) ip = i;
    d.peak = series[ip];
    d.final = series.back();
    d.ratio = d.peak > 0.0 ? d.final / d.peak : 0.0;
    for (std::size_t i = ip + 1; i < series.size(); ++i)
        if (series[i] > series[i - 1]) d.monotone_after_peak = false;
    return d;
}

LineFit rate_fit(std::span<const double> eps, std::span<const double> err) {
    if (eps.size() != err.size()) throw UsageError("rate_fit: size mismatch");
    if (eps.size() < 3) throw UsageError("rate_fit: need at least 3 pairs");
    std::vector<double> lx(eps.size()), ly(eps.size());
    for (std::size_t i = 0; i < eps.size(); ++i) {
        if (!(eps[i] > 0.0) || !(err[i] > 0.0)) throw UsageError("rate_fit: inputs must be positive");
        lx[i] = std::log(eps[i]);
        ly[i] = std::log(err[i]);
    }
    return least_squares_line(lx, ly);
}

}  // namespace cfront

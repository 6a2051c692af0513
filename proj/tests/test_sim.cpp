#include "cfront/errors.hpp"
#include "cfront/sim.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

using namespace cfront;

namespace {

ModelParams coarse() { return ModelParams(1e-1, 2.0, 1.0, 1.5); }

double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double sum_diff(const std::vector<double>& a, const std::vector<double>& b, double dx) {
    long double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += static_cast<long double>(a[i]) - b[i];
    return static_cast<double>(s) * dx;
}

/// abscissa where the cell samples cross `level` (linear between cell centers)
double crossing(const SimState& st, double level) {
    for (std::size_t c = 1; c < st.v.size(); ++c)
        if (st.v[c - 1] < level && st.v[c] >= level) {
            const double t = (level - st.v[c - 1]) / (st.v[c] - st.v[c - 1]);
            return st.grid.cell(c - 1) + t * st.grid.dx;
        }
    return std::nan("");
}

double bump(double z) { return std::abs(z) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - z * z)) : 0.0; }

struct Fixture {
    ModelParams p = coarse();
    TravelingWave wave = solve_profile(p, ShiftSpec::transition_anchor(), -45.0, 45.0, {});
    Grid grid{-40.0, 40.0, 800};
    DiscreteBackground bg = discrete_background(wave, grid);
    SimState ref = background_state(bg, p);
};

}  // namespace

TEST(Grid, Geometry) {
    const Grid g(-1.0, 3.0, 8);
    EXPECT_DOUBLE_EQ(g.dx, 0.5);
    EXPECT_EQ(g.nodes(), 9u);
    EXPECT_DOUBLE_EQ(g.x_hi(), 3.0);
    EXPECT_DOUBLE_EQ(g.cell(0), -0.75);
    EXPECT_DOUBLE_EQ(g.node(8), 3.0);
    EXPECT_THROW(Grid(1.0, 0.0, 8), UsageError);
    EXPECT_THROW(Grid(0.0, 1.0, 2), UsageError);
}

TEST(Tridiagonal, MatchesKnownSolution) {
    // x = (1, -2, 3, 0.5) under a diagonally dominant matrix
    const std::vector<double> a{0.0, 1.0, -2.0, 0.5}, b{4.0, 5.0, 6.0, 3.0}, c{1.0, -1.0, 1.0, 0.0};
    const std::vector<double> x{1.0, -2.0, 3.0, 0.5};
    std::vector<double> d(4);
    for (std::size_t i = 0; i < 4; ++i)
        d[i] = b[i] * x[i] + (i > 0 ? a[i] * x[i - 1] : 0.0) + (i < 3 ? c[i] * x[i + 1] : 0.0);
    solve_tridiagonal(a, b, c, d);
    for (std::size_t i = 0; i < 4; ++i) EXPECT_NEAR(d[i], x[i], 1e-14);
    std::vector<double> z{1.0, 1.0};
    EXPECT_THROW(solve_tridiagonal({0.0, 1.0}, {0.0, 1.0}, {1.0, 0.0}, z), SolverError);
}

TEST(DiscreteBackground, IsFixedPointOfStepper) {
    Fixture f;
    EXPECT_LT(f.bg.residual, 1e-12);
    EXPECT_LT(f.bg.max_sample_gap, 5e-3);
    EXPECT_LT(std::abs(f.bg.flux_offset), 1e-6);
    SimState st = f.ref;
    const double dt = stable_dt(st, {}, f.p);
    for (int k = 0; k < 100; ++k) step(st, dt, f.p);
    EXPECT_LT(sup_diff(st.v, f.ref.v), 1e-12);
    EXPECT_LT(sup_diff(st.u, f.ref.u), 1e-12);
}

TEST(DiscreteBackground, RejectsGridPastProfile) {
    Fixture f;
    EXPECT_THROW(discrete_background(f.wave, Grid(-60.0, 40.0, 100)), UsageError);
}

TEST(Step, SampledWaveDriftConverges) {
    const ModelParams p = coarse();
    const auto wave = solve_profile(p, ShiftSpec::transition_anchor(), -25.0, 25.0, {});
    double prev = 0.0;
    const double T = 0.5;
    for (int level = 0; level < 3; ++level) {
        const std::size_t cells = 400u << level;
        const Grid g(-20.0, 20.0, cells);
        SimState st = sample_wave(wave, g, Frame::CoMoving);
        const SimState start = st;
        const double dt = 0.5 * g.dx;
        const int n = static_cast<int>(std::lround(T / dt));
        for (int k = 0; k < n; ++k) step(st, dt, p);
        const double drift = sup_diff(st.v, start.v);
        if (level > 0) EXPECT_GT(prev / drift, 1.8) << "level " << level;
        prev = drift;
    }
}

TEST(Step, LabFrameTranslatesAtShockSpeed) {
    const ModelParams p = coarse();
    const auto wave = solve_profile(p, ShiftSpec::transition_anchor(), -45.0, 45.0, {});
    const Grid g(-40.0, 40.0, 1600);
    SimState st = sample_wave(wave, g, Frame::Lab);
    const double level = 0.5 * (p.v_minus() + p.v_plus());
    const double x0 = crossing(st, level);
    const double dt = 0.5 * stable_dt(st, {}, p);
    const double T = 4.0;
    const int n = static_cast<int>(std::ceil(T / dt));
    for (int k = 0; k < n; ++k) step(st, T / n, p);
    EXPECT_NEAR(crossing(st, level) - x0, wave.speed() * T, g.dx);
}

TEST(Step, ConservesPerturbationMass) {
    Fixture f;
    PerturbationSpec ps;
    ps.center = -2.0;
    ps.width = 1.5;
    ps.amplitude = 1e-3;
    SimState st = init_state(f.ref, ps, f.p);
    const double dt = stable_dt(st, {}, f.p);
    const double dx = f.grid.dx;
    double mv = sum_diff(st.v, f.ref.v, dx), mu = sum_diff(st.u, f.ref.u, dx);
    for (int k = 0; k < 50; ++k) {
        step(st, dt, f.p);
        const double nv = sum_diff(st.v, f.ref.v, dx), nu = sum_diff(st.u, f.ref.u, dx);
        EXPECT_LT(std::abs(nv - mv), 1e-12);
        EXPECT_LT(std::abs(nu - mu), 1e-12);
        mv = nv;
        mu = nu;
    }
}

TEST(Step, CongestionViolationIsRaised) {
    const ModelParams p = coarse();
    SimState st;
    st.grid = Grid(0.0, 1.0, 10);
    st.v.assign(10, 1.01);
    st.u.assign(11, 0.0);
    st.u.back() = -5.0;  // strong compression of the last cell
    st.v_left = st.v_right = 1.01;
    st.frame = Frame::Lab;
    try {
        step(st, 0.01, p);
        FAIL() << "expected CongestionViolation";
    } catch (const CongestionViolation& e) {
        EXPECT_LE(e.min_v(), 1.0);
        EXPECT_NEAR(e.where(), st.grid.cell(9), 1e-12);
    }
}

TEST(Scheme, DtControl) {
    Fixture f;
    SchemeConfig fixed;
    fixed.dt_control = SchemeConfig::DtControl::Fixed;
    fixed.dt = 3e-3;
    EXPECT_DOUBLE_EQ(stable_dt(f.ref, fixed, f.p), 3e-3);
    SchemeConfig cfl;
    cfl.safety = 0.5;
    const double half = stable_dt(f.ref, cfl, f.p);
    cfl.safety = 1.0;
    EXPECT_NEAR(stable_dt(f.ref, cfl, f.p), 2.0 * half, 1e-15);
    // acoustic bound at the congested end: dx / sqrt(|p'(v_minus)| v_plus)
    const double stiff = std::abs(pressure(f.p.v_minus(), 1, f.p)) * f.p.v_plus();
    EXPECT_NEAR(stable_dt(f.ref, cfl, f.p), std::min(f.grid.dx / std::sqrt(stiff), 1.0 / stiff), 1e-6);
    cfl.safety = 1.5;
    EXPECT_THROW(stable_dt(f.ref, cfl, f.p), UsageError);
}

TEST(Perturbation, ZeroMassAndAmplitude) {
    const Grid g(-10.0, 10.0, 400);
    for (auto shape : {PerturbationSpec::Shape::GaussianDipole, PerturbationSpec::Shape::CompactBump}) {
        PerturbationSpec ps;
        ps.shape = shape;
        ps.center = 0.3;
        ps.width = 1.0;
        ps.amplitude = 2e-3;
        const auto r = realize_perturbation(ps, g);
        double sv = 0.0, su = 0.0, mv = 0.0, mu = 0.0;
        for (double x : r.dv) sv += x, mv = std::max(mv, std::abs(x));
        for (double x : r.du) su += x, mu = std::max(mu, std::abs(x));
        EXPECT_LT(std::abs(sv * g.dx), 1e-14 * ps.amplitude * 20.0);
        EXPECT_LT(std::abs(su * g.dx), 1e-14 * ps.amplitude * 20.0);
        EXPECT_NEAR(mv, ps.amplitude, 1e-18);
        EXPECT_NEAR(mu, ps.amplitude, 1e-18);
        EXPECT_EQ(r.du.front(), 0.0);
        EXPECT_EQ(r.du.back(), 0.0);
    }
    PerturbationSpec edge;
    edge.center = 9.5;
    edge.amplitude = 1e-3;
    EXPECT_THROW(realize_perturbation(edge, g), UsageError);
}

TEST(InitState, ZeroAmplitudeAndBudget) {
    const ModelParams p(1e-3, 2.0, 1.0, 1.5);
    const auto wave = solve_profile(p, ShiftSpec::transition_anchor(), -12.0, 12.0, {});
    const Grid g(-10.0, 10.0, 2000);
    const SimState ref = sample_wave(wave, g, Frame::CoMoving);
    PerturbationSpec ps;
    ps.width = 0.5;
    const SimState same = init_state(ref, ps, p);
    EXPECT_EQ(same.v, ref.v);
    EXPECT_EQ(same.u, ref.u);

    ps.amplitude = amplitude_budget(p);
    EXPECT_NEAR(ps.amplitude, 0.1 * std::pow(1e-3, 1.25), 1e-18);
    InitReport rep;
    init_state(ref, ps, p, &rep);
    EXPECT_GT(rep.min_v_margin, 0.5 * p.congested_scale());
    EXPECT_FALSE(rep.above_budget);
    ps.amplitude *= 10.0;
    init_state(ref, ps, p, &rep);
    EXPECT_TRUE(rep.above_budget);
    EXPECT_FALSE(rep.warning.empty());

    ps.amplitude = 1.0;
    ps.target = PerturbationSpec::Target::V;
    EXPECT_THROW(init_state(ref, ps, p), CongestionViolation);
}

TEST(EffectiveVelocity, ClosedForms) {
    const ModelParams p(1e-2, 2.0, 0.7, 1.5);
    SimState st;
    st.grid = Grid(0.0, 2.0, 40);
    st.u.resize(41);
    for (std::size_t i = 0; i < 41; ++i) st.u[i] = std::sin(st.grid.node(i));
    st.v.assign(40, 1.3);
    st.v_left = st.v_right = 1.3;
    auto w = effective_velocity(st, p);
    for (std::size_t i = 0; i < 41; ++i) EXPECT_DOUBLE_EQ(w[i], st.u[i]);
    // ln v linear with unit slope
    for (std::size_t c = 0; c < 40; ++c) st.v[c] = 2.0 * std::exp(st.grid.cell(c));
    st.v_left = 2.0 * std::exp(st.grid.cell(0) - st.grid.dx);
    st.v_right = 2.0 * std::exp(st.grid.cell(39) + st.grid.dx);
    w = effective_velocity(st, p);
    for (std::size_t i = 0; i < 41; ++i) EXPECT_NEAR(w[i], st.u[i] - 0.7, 1e-13);
}

TEST(EffectiveVelocity, MatchesProfileRelation) {
    const ModelParams p = coarse();
    const auto wave = solve_profile(p, ShiftSpec::transition_anchor(), -25.0, 25.0, {});
    double prev = 0.0;
    for (int level = 0; level < 2; ++level) {
        const Grid g(-20.0, 20.0, 400u << level);
        const SimState st = sample_wave(wave, g, Frame::CoMoving);
        const auto w = effective_velocity(st, p);
        double err = 0.0;
        for (std::size_t i = 1; i < g.cells; ++i) {
            const double x = g.node(i);
            const double exact = st.u[i] - p.mu() * wave.derivatives(x).d1 / wave.value(x);
            err = std::max(err, std::abs(w[i] - exact));
        }
        if (level > 0) EXPECT_NEAR(prev / err, 4.0, 0.6);
        prev = err;
    }
}

TEST(IntegratedPerturbation, RecoversPotential) {
    Fixture f;
    EXPECT_NO_THROW({
        const auto I = integrated_perturbation(f.ref, f.ref, f.p);
        EXPECT_EQ(*std::max_element(I.V.begin(), I.V.end()), 0.0);
        EXPECT_EQ(*std::max_element(I.W.begin(), I.W.end()), 0.0);
    });
    PerturbationSpec ps;
    ps.shape = PerturbationSpec::Shape::CompactBump;
    ps.target = PerturbationSpec::Target::V;
    ps.center = 1.0;
    ps.width = 2.0;
    ps.amplitude = 1e-3;
    const SimState st = init_state(f.ref, ps, f.p);
    const auto I = integrated_perturbation(st, f.ref, f.p);
    // V is the potential itself, up to the scale that set the amplitude
    double peak = 0.0, k = 0.0;
    for (std::size_t i = 0; i < f.grid.nodes(); ++i) {
        const double b = bump((f.grid.node(i) - ps.center) / ps.width);
        if (b > peak) peak = b, k = I.V[i] / b;
    }
    for (std::size_t i = 0; i < f.grid.nodes(); ++i)
        EXPECT_NEAR(I.V[i], k * bump((f.grid.node(i) - ps.center) / ps.width), 1e-12);
    EXPECT_LT(std::abs(I.defect_W), 1e-10);
    EXPECT_LT(std::abs(I.defect_V), 1e-10);
}

TEST(IntegratedPerturbation, RejectsNonzeroMass) {
    Fixture f;
    PerturbationSpec ps;
    ps.shape = PerturbationSpec::Shape::Custom;
    ps.target = PerturbationSpec::Target::V;
    ps.custom_v.assign(f.grid.cells, 0.0);
    for (std::size_t c = 0; c < f.grid.cells; ++c) ps.custom_v[c] = 1e-4 * bump(f.grid.cell(c) / 2.0);
    const SimState st = init_state(f.ref, ps, f.p);
    try {
        integrated_perturbation(st, f.ref, f.p);
        FAIL() << "expected MassDefectError";
    } catch (const MassDefectError& e) {
        EXPECT_GT(std::abs(e.defect_v()), 1e-5);
    }
}

TEST(Linearized, ZeroStaysZeroAndEnergyBalances) {
    const ModelParams p(1e-2, 2.0, 1.0, 1.5);
    const auto wave = solve_profile(p, ShiftSpec::transition_anchor(), -6.0, 6.0, {});
    const Grid g(-5.0, 5.0, 1000);
    const auto co = linearized_coefficients(wave, g);
    for (double w : co.dissipation_weight) EXPECT_GE(w, 0.0);
    LinearizedState zero{g, std::vector<double>(g.cells, 0.0), std::vector<double>(g.nodes(), 0.0), 0.0};
    for (int k = 0; k < 10; ++k) step_linearized(zero, co, 1e-3, p);
    EXPECT_EQ(linearized_energy(zero, co), 0.0);

    double prev = 0.0;
    for (double dt : {2e-3, 1e-3}) {
        LinearizedState st{g, std::vector<double>(g.cells), std::vector<double>(g.nodes()), 0.0};
        for (std::size_t c = 0; c < g.cells; ++c) st.W[c] = bump(g.cell(c));
        for (std::size_t i = 0; i < g.nodes(); ++i) st.V[i] = bump(g.node(i));
        const double e0 = linearized_energy(st, co);
        double diss = 0.0;
        const int n = static_cast<int>(std::lround(0.4 / dt));
        for (int k = 0; k < n; ++k) {
            step_linearized(st, co, dt, p);
            diss += dt * linearized_dissipation_rate(st, co, p);
        }
        EXPECT_LT(linearized_energy(st, co), e0);
        const double res = std::abs(linearized_energy(st, co) + diss - e0);
        if (prev > 0.0) EXPECT_NEAR(prev / res, 2.0, 0.4);
        prev = res;
    }
}

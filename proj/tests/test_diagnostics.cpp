#include "cfront/diagnostics.hpp"
#include "cfront/errors.hpp"
#include "cfront/runner.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace cfront;

namespace {

double bump(double z) { return std::abs(z) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - z * z)) : 0.0; }

struct Fixture {
    ModelParams p{1e-1, 2.0, 1.0, 1.5};
    TravelingWave wave = solve_profile(p, ShiftSpec::transition_anchor(), -45.0, 45.0, {});
    Grid grid{-40.0, 40.0, 800};
    EnergyWeights weights = energy_weights(wave, grid);
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

IntegratedState empty_state(const Grid& g) {
    IntegratedState ws;
    ws.grid = g;
    ws.W.assign(g.cells, 0.0);
    ws.V.assign(g.nodes(), 0.0);
    return ws;
}

TestFunction smooth_g() {
    return {[](double x) { return std::sin(2 * x) + 0.5 * std::cos(3 * x); },
            [](double x) { return 2 * std::cos(2 * x) - 1.5 * std::sin(3 * x); },
            [](double x) { return -4 * std::sin(2 * x) - 4.5 * std::cos(3 * x); },
            [](double x) { return -8 * std::cos(2 * x) + 13.5 * std::sin(3 * x); }};
}

}  // namespace

TEST(Energy, ZeroFieldsGiveZero) {
    const auto& f = fixture();
    const auto ws = empty_state(f.grid);
    for (int k = 0; k < 3; ++k) {
        EXPECT_EQ(energy_Ek(ws, f.weights, k), 0.0);
        EXPECT_EQ(dissipation_Dk(ws, f.weights, k), 0.0);
    }
    EXPECT_THROW(energy_Ek(ws, f.weights, 3), UsageError);
}

TEST(Energy, PlateauAndFarFieldWeights) {
    const auto& f = fixture();
    const double eps = f.p.epsilon(), g = f.p.gamma();
    for (double center : {-30.0, 30.0}) {
        auto ws = empty_state(f.grid);
        double sq = 0.0;
        for (std::size_t c = 0; c < f.grid.cells; ++c) {
            ws.W[c] = bump(f.grid.cell(c) - center);
            sq += ws.W[c] * ws.W[c] * f.grid.dx;
        }
        const double weight = energy_Ek(ws, f.weights, 0) / sq;
        const double oracle = center < 0 ? std::pow(eps, 1.0 / g) / g : std::pow(0.5, g + 1.0) / (g * eps);
        EXPECT_NEAR(weight / oracle, 1.0, 1e-3) << center;
        if (center < 0) EXPECT_LT(dissipation_Dk(ws, f.weights, 0), 1e-8 * sq);
    }
}

TEST(Energy, DissipationOfGaussianV) {
    const auto& f = fixture();
    auto ws = empty_state(f.grid);
    for (std::size_t i = 0; i < f.grid.nodes(); ++i) ws.V[i] = std::exp(-f.grid.node(i) * f.grid.node(i));
    // int (2 x e^{-x^2})^2 dx = sqrt(pi / 2)
    EXPECT_NEAR(dissipation_Dk(ws, f.weights, 0), std::sqrt(std::numbers::pi / 2.0), 2e-2);  // O(dx^2) stencil error
    EXPECT_NEAR(energy_Ek(ws, f.weights, 0), std::sqrt(std::numbers::pi / 2.0), 1e-9);
    for (int k = 0; k < 3; ++k) EXPECT_GT(dissipation_Dk(ws, f.weights, k), 0.0);
}

TEST(Energy, DiscreteDerivativeExactOnPolynomials) {
    std::vector<double> f(11);
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double x = 0.1 * static_cast<double>(i);
        f[i] = x * x;
    }
    const auto d1 = discrete_derivative(f, 0.1, 1);
    const auto d2 = discrete_derivative(f, 0.1, 2);
    const auto d3 = discrete_derivative(f, 0.1, 3);
    for (std::size_t i = 0; i < f.size(); ++i) {
        EXPECT_NEAR(d1[i], 0.2 * static_cast<double>(i), 1e-12);
        EXPECT_NEAR(d2[i], 2.0, 1e-10);
        EXPECT_NEAR(d3[i], 0.0, 1e-8);
    }
    EXPECT_THROW(discrete_derivative(f, 0.1, 4), UsageError);
}

TEST(XNorm, Examples) {
    const XNormSample a{{1, 0, 0}, {0, 0, 0}};
    EXPECT_DOUBLE_EQ(x_norm_sq(std::span(&a, 1), 0.3, 0.01, 2.0), 1.0);
    const XNormSample b{{1, 1, 1}, {0, 0, 0}};
    EXPECT_DOUBLE_EQ(x_norm_sq(std::span(&b, 1), 0.5, 1.0, 1.0), 1.75);
    const std::vector<XNormSample> decreasing{{{3, 0, 0}, {}}, {{2, 0, 0}, {}}, {{1, 0, 0}, {}}};
    EXPECT_DOUBLE_EQ(x_norm_sq(decreasing, 0.25, 0.1, 2.0), 3.0);
    EXPECT_THROW(x_norm_sq({}, 0.25, 0.1, 2.0), UsageError);
    EXPECT_THROW(x_norm_sq(std::span(&a, 1), 0.0, 0.1, 2.0), UsageError);
}

TEST(XNorm, AccumulatedDissipationIsTrapezoid) {
    std::vector<EnergyReport> reps(3);
    for (int i = 0; i < 3; ++i) {
        reps[i].t = 0.5 * i;
        reps[i].D = {1.0 * i, 2.0, 0.0};
    }
    const auto acc = accumulate_dissipation(reps);
    EXPECT_DOUBLE_EQ(acc[2].D_integral[0], 1.0);  // int_0^1 2t dt
    EXPECT_DOUBLE_EQ(acc[2].D_integral[1], 2.0);
}

TEST(Commutator, SecondOrderInH) {
    const ModelParams p(1e-2, 2.0, 1.0, 1.5);
    const auto wave = solve_profile(p, ShiftSpec::transition_anchor(), -3.0, 3.0, {});
    const auto g = smooth_g();
    const auto a = commutator_check(wave, g, 0.02, -1.0, 1.0);
    const auto b = commutator_check(wave, g, 0.01, -1.0, 1.0);
    EXPECT_NEAR(a.first_order_error / b.first_order_error, 4.0, 1.0);
    EXPECT_NEAR(a.second_order_error / b.second_order_error, 4.0, 1.0);
    EXPECT_LT(b.f_dependence, 1e-6 * b.second_order_scale);

    // the alternative sign on the (b' g')' term differs by 2 mu (b' g')'
    double gap = 0.0;
    for (double x = -1.0; x <= 1.0; x += 0.01) {
        const auto d = wave.derivatives(x);
        const double v = wave.value(x);
        const double b1 = d.d2 / (v * v) - 2 * d.d1 * d.d1 / (v * v * v);
        const double b2 = d.d3 / (v * v) - 6 * d.d1 * d.d2 / (v * v * v) + 6 * std::pow(d.d1, 3) / std::pow(v, 4);
        gap = std::max(gap, 2 * p.mu() * std::abs(b2 * g.g1(x) + b1 * g.g2(x)));
    }
    EXPECT_GT(gap, 10.0 * b.second_order_error);
}

TEST(Commutator, ConstantGGivesZero) {
    const ModelParams p(1e-2, 2.0, 1.0, 1.5);
    const auto wave = solve_profile(p, ShiftSpec::transition_anchor(), -3.0, 3.0, {});
    const auto zero = [](double) { return 0.0; };
    const TestFunction g{[](double) { return 1.0; }, zero, zero, zero};
    const auto c = commutator_check(wave, g, 0.01, -1.0, 1.0);
    EXPECT_LT(c.first_order_error, 1e-6);
    EXPECT_LT(c.second_order_error, 1e-3);
    EXPECT_EQ(c.first_order_scale, 0.0);
}

TEST(Bounds, ZeroPerturbationGivesZeroRatios) {
    const ModelParams p(1e-3, 2.0, 1.0, 1.5);
    for (double r : bound_ratios({1.2, 0.3, -0.1, 0, 0, 0}, p)) EXPECT_EQ(r, 0.0);
    for (double r : bound_ratios_diff({1.2, 0.3, -0.1, 0, 0, 0, 0, 0, 0}, p)) EXPECT_EQ(r, 0.0);
}

TEST(Bounds, GammaOneClosedForm) {
    const ModelParams p(1e-3, 1.0, 1.0, 1.5);
    const double delta = p.congested_scale();
    for (double v : {p.v_minus(), 1.01, 1.3}) {
        for (double f : {-0.5 * delta, -0.2 * delta, 0.3 * delta, 0.5 * delta}) {
            const auto r = bound_ratios({v, 0.0, 0.0, f, 0.0, 0.0}, p);
            EXPECT_NEAR(r[0], (v - 1) / (v - 1 + f), 1e-9) << v << " " << f;
            EXPECT_LE(r[0], 2.0 + 1e-9);
        }
    }
}

TEST(Bounds, ScanGammaOneStaysBelowTwo) {
    const std::vector<double> eps{1e-2, 1e-4};
    const auto rows = lemma_bound_scan(eps, 1.0, 1.0, 1.5);
    ASSERT_EQ(rows.size(), 24u);
    for (const auto& r : rows) {
        EXPECT_TRUE(std::isfinite(r.max_ratio)) << r.bound;
        EXPECT_GT(r.samples, 0u);
        if (r.bound == "F") EXPECT_LE(r.max_ratio, 2.0 + 1e-9);
    }
}

TEST(Mass, OddAndConstantFields) {
    std::vector<double> odd(100), nodes(101, 2.0), cells(100, 2.0);
    for (std::size_t i = 0; i < odd.size(); ++i) odd[i] = std::sin(-1.0 + 0.02 * (static_cast<double>(i) + 0.5));
    EXPECT_NEAR(mass_of(odd, 0.02), 0.0, 1e-14);
    EXPECT_DOUBLE_EQ(mass_of(cells, 0.02), 4.0);
    EXPECT_DOUBLE_EQ(mass_of(nodes, 0.02, Centering::Nodes), 4.0);
}

TEST(Decay, Summary) {
    const std::vector<double> s{1.0, 3.0, 2.0, 0.3};
    const auto d = sup_norm_decay(s);
    EXPECT_DOUBLE_EQ(d.peak, 3.0);
    EXPECT_DOUBLE_EQ(d.final, 0.3);
    EXPECT_DOUBLE_EQ(d.ratio, 0.1);
    EXPECT_TRUE(d.monotone_after_peak);
    const std::vector<double> z{0.0, 0.0};
    EXPECT_EQ(sup_norm_decay(z).ratio, 0.0);
    const std::vector<double> bumpy{2.0, 1.0, 1.5};
    EXPECT_FALSE(sup_norm_decay(bumpy).monotone_after_peak);
}

TEST(RateFit, PowerLawAndErrors) {
    const std::vector<double> eps{1e-3, 1e-4, 1e-5, 1e-6};
    std::vector<double> err, flat(4, 0.7);
    for (double e : eps) err.push_back(2.5 * std::cbrt(e));
    EXPECT_NEAR(rate_fit(eps, err).slope, 1.0 / 3.0, 1e-12);
    EXPECT_NEAR(rate_fit(eps, flat).slope, 0.0, 1e-12);
    const std::vector<double> two{1e-3, 1e-4}, neg{1e-3, -1e-4, 1e-5};
    EXPECT_THROW(rate_fit(two, two), UsageError);
    EXPECT_THROW(rate_fit(neg, std::vector<double>{1, 1, 1}), UsageError);
    EXPECT_THROW(rate_fit(eps, std::vector<double>{1, 0, 1, 1}), UsageError);
}

TEST(LinearizedIdentity, ZeroDataHasZeroResidual) {
    const auto& f = fixture();
    const auto co = linearized_coefficients(f.wave, f.grid);
    LinearizedState st{f.grid, std::vector<double>(f.grid.cells, 0.0), std::vector<double>(f.grid.nodes(), 0.0), 0.0};
    const auto run = linearized_run(st, co, 1e-2, 5, f.p);
    EXPECT_EQ(energy_identity_residual(run), 0.0);
}

TEST(Runner, BackgroundStaysPut) {
    const auto& f = fixture();
    const auto bg = discrete_background(f.wave, f.grid);
    const SimState ref = background_state(bg, f.p);
    RunConfig cfg;
    cfg.T = 1.0;
    cfg.stride = 20;
    int calls = 0;
    const std::vector<Observer> obs{[&](const SimState&, const EnergyReport&) { ++calls; }};
    const auto res = run(ref, ref, f.wave, f.p, cfg, obs);
    EXPECT_FALSE(res.aborted);
    EXPECT_FALSE(res.boundary_reached);
    EXPECT_NEAR(res.final_state.t, 1.0, 1e-12);
    EXPECT_EQ(static_cast<std::size_t>(calls), res.reports.size());
    EXPECT_LT(res.reports.back().sup_v, 1e-12);
    EXPECT_LT(res.reports.back().x_norm_sq, 1e-20);
    cfg.T = -1.0;
    EXPECT_THROW(run(ref, ref, f.wave, f.p, cfg), UsageError);
}

TEST(Runner, CongestionAbortsWithLastGoodState) {
    const auto& f = fixture();
    const auto bg = discrete_background(f.wave, f.grid);
    const SimState ref = background_state(bg, f.p);
    SimState st = ref;
    // strong compression inside the congested zone: v starts above 1 and is driven below it
    for (std::size_t i = 0; i < f.grid.nodes(); ++i) st.u[i] += 20.0 * bump((f.grid.node(i) + 20.0) / 0.5);
    st.u.front() = ref.u.front();
    st.u.back() = ref.u.back();
    RunConfig cfg;
    cfg.T = 1.0;
    cfg.mass_tolerance = std::numeric_limits<double>::infinity();
    cfg.scheme.dt_control = SchemeConfig::DtControl::Fixed;
    cfg.scheme.dt = 0.05;
    const auto res = run(st, ref, f.wave, f.p, cfg);
    EXPECT_TRUE(res.aborted);
    EXPECT_FALSE(res.error.empty());
    EXPECT_GT(res.final_state.min_v(), 1.0);
    EXPECT_LT(res.final_state.t, 1.0);
}

TEST(Runner, BoundaryZoneStopsRun) {
    const auto& f = fixture();
    const auto bg = discrete_background(f.wave, f.grid);
    const SimState ref = background_state(bg, f.p);
    SimState st = ref;
    for (std::size_t i = 0; i < f.grid.nodes(); ++i) st.u[i] += 1e-3 * bump((f.grid.node(i) + 36.0) / 0.5);
    RunConfig cfg;
    cfg.T = 5.0;
    cfg.mass_tolerance = std::numeric_limits<double>::infinity();
    const auto res = run(st, ref, f.wave, f.p, cfg);
    EXPECT_TRUE(res.boundary_reached);
    EXPECT_FALSE(res.aborted);
    EXPECT_FALSE(res.error.empty());
    EXPECT_LT(res.final_state.t, 5.0);
    EXPECT_LE(res.reports.back().t, res.final_state.t);
}

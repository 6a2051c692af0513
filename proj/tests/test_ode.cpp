#include "cfront/errors.hpp"
#include "cfront/numerics.hpp"
#include "cfront/ode.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace cfront;

namespace {

double fixed_step_error(double h) {
    OdeOptions o;
    o.tol = 1e300;
    o.h_init = h;
    o.h_max = h;
    const auto tr = integrate_sdirk4([](double t, double y) { return -2.0 * t * y + std::cos(t); }, 0.0, 1.0, 1.0, o);
    // reference from a very fine RK4 run
    const double ref = rk4_advance([](double t, double y) { return -2.0 * t * y + std::cos(t); }, 0.0, 1.0, 1.0, 20000);
    return std::abs(tr.y.back() - ref);
}

}  // namespace

TEST(Sdirk4, FourthOrderUnderFixedSteps) {
    const double e1 = fixed_step_error(0.05);
    const double e2 = fixed_step_error(0.025);
    EXPECT_NEAR(std::log2(e1 / e2), 4.0, 0.4);
}

TEST(Sdirk4, AdaptiveMatchesClosedForm) {
    OdeOptions o;
    o.tol = 1e-12;
    const auto tr = integrate_sdirk4([](double t, double y) { return -2.0 * t * y; }, 0.0, 1.0, 2.0, o);
    EXPECT_DOUBLE_EQ(tr.t.back(), 2.0);
    EXPECT_NEAR(tr.y.back(), std::exp(-4.0), 1e-10);
    for (std::size_t i = 0; i < tr.t.size(); ++i) EXPECT_NEAR(tr.y[i], std::exp(-tr.t[i] * tr.t[i]), 1e-10);
}

TEST(Sdirk4, BackwardIntegration) {
    OdeOptions o;
    const auto tr = integrate_sdirk4([](double, double y) { return y; }, 0.0, 1.0, -3.0, o);
    EXPECT_NEAR(tr.y.back(), std::exp(-3.0), 1e-9);
    EXPECT_LT(tr.t.back(), tr.t.front());
}

TEST(Sdirk4, StiffDecayTakesFewSteps) {
    OdeOptions o;
    o.tol = 1e-8;
    const auto tr =
        integrate_sdirk4([](double t, double y) { return -1e6 * (y - std::cos(t)); }, 0.0, 0.0, 1.0, o);
    EXPECT_NEAR(tr.y.back(), std::cos(1.0) + 1e-6 * std::sin(1.0), 1e-7);
    // explicit stability alone would need ~5e5 steps
    EXPECT_LT(tr.t.size(), 20000u);
}

TEST(Sdirk4, UnderflowCarriesPosition) {
    OdeOptions o;
    try {
        integrate_sdirk4([](double, double y) { return y * y; }, 0.0, 1.0, 2.0, o);
        FAIL() << "expected SolverError";
    } catch (const SolverError& e) {
        EXPECT_NEAR(e.position(), 1.0, 1e-3);
    }
}

TEST(Sdirk4, StopPredicateEndsAtNode) {
    OdeOptions o;
    const auto tr = integrate_sdirk4([](double, double) { return 1.0; }, 0.0, 0.0, 10.0, o,
                                     [](double, double y) { return y > 2.5; });
    EXPECT_TRUE(tr.stopped_early);
    EXPECT_GT(tr.y.back(), 2.5);
    EXPECT_LT(tr.t.back(), 10.0);
}

TEST(Rk4, ExactForCubicRhs) {
    const double y = rk4_advance([](double t, double) { return 3.0 * t * t; }, 0.0, 0.0, 2.0, 3);
    EXPECT_NEAR(y, 8.0, 1e-13);
}

TEST(DenseSolution, InterpolatesAndExtrapolates) {
    auto f = [](double, double y) { return -y; };
    OdeOptions o;
    o.tol = 1e-12;
    auto tr = integrate_sdirk4(f, 0.0, 0.0, -4.0, o);
    reverse_trajectory(tr);
    ASSERT_LT(tr.t.front(), tr.t.back());
    auto g = [](double, double) { return -1.0; };
    auto tg = integrate_sdirk4(g, 0.0, 0.0, 5.0, o);
    const DenseSolution d(g, tg.t, tg.y, -1.0, -1.0);
    EXPECT_NEAR(d(2.345), -2.345, 1e-12);
    EXPECT_TRUE(d.inside(2.0));
    EXPECT_FALSE(d.inside(6.0));
    EXPECT_NEAR(d(7.0), -7.0, 1e-12);
    EXPECT_NEAR(d(-1.0), 1.0, 1e-12);

    const DenseSolution e(f, tr.t, tr.y, -1.0, -1.0);
    for (double t : {-3.9, -2.2, -0.7, -0.01}) EXPECT_NEAR(e(t), 0.0, 1e-14);
}

TEST(DenseSolution, ExponentialBetweenNodes) {
    auto f = [](double, double y) { return 0.5 * y; };
    OdeOptions o;
    o.tol = 1e-12;
    o.h_max = 0.5;
    const auto tr = integrate_sdirk4(f, 0.0, 1.0, 3.0, o);
    const DenseSolution d(f, tr.t, tr.y, 0.0, 0.0);
    for (double t = 0.013; t < 3.0; t += 0.171) EXPECT_NEAR(d(t), std::exp(0.5 * t), 1e-9);
}

TEST(Numerics, LineFitExactData) {
    const std::vector<double> x{0.0, 1.0, 2.0, 5.0};
    const std::vector<double> y{1.0, -1.0, -3.0, -9.0};
    const auto f = least_squares_line(x, y);
    EXPECT_NEAR(f.slope, -2.0, 1e-14);
    EXPECT_NEAR(f.intercept, 1.0, 1e-14);
    EXPECT_NEAR(f.r_squared, 1.0, 1e-14);
    EXPECT_THROW(least_squares_line(std::vector<double>{1.0}, std::vector<double>{1.0}), UsageError);
}

TEST(Numerics, GoldenAndRoot) {
    const auto m = golden_section([](double x) { return (x - 0.3) * (x - 0.3) + 2.0; }, -1.0, 2.0, 1e-10);
    EXPECT_NEAR(m.x, 0.3, 1e-7);
    EXPECT_NEAR(m.value, 2.0, 1e-15);
    EXPECT_NEAR(find_root([](double x) { return x * x - 2.0; }, 0.0, 2.0), std::sqrt(2.0), 1e-14);
    EXPECT_THROW(find_root([](double x) { return x * x + 1.0; }, 0.0, 2.0), SolverError);
}

TEST(Numerics, TrapezoidAndLinspace) {
    const auto x = linspace(0.0, 1.0, 101);
    EXPECT_EQ(x.size(), 101u);
    EXPECT_DOUBLE_EQ(x.back(), 1.0);
    std::vector<double> f(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) f[i] = x[i] * x[i];
    // trapezoid error for x^2 is h^2/6 over [0,1]
    EXPECT_NEAR(trapezoid(f, 0.01), 1.0 / 3.0 + 1e-4 / 6.0, 1e-14);
}

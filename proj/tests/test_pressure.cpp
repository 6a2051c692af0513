#include "cfront/errors.hpp"
#include "cfront/pressure.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace cfront;

namespace {

/// Three-term Taylor remainder evaluated in long double, used as an oracle.
long double direct_F(long double f, long double v, long double eps, long double g) {
    auto p = [&](long double x) { return eps * std::pow(x - 1.0L, -g); };
    const long double dp = -g * eps * std::pow(v - 1.0L, -g - 1.0L);
    return -(p(v + f) - p(v) - dp * f);
}

}  // namespace

TEST(ModelParams, DerivedLeftState) {
    const ModelParams p(1e-4, 2.0, 1.0, 1.5);
    EXPECT_DOUBLE_EQ(p.v_minus(), 1.01);
    EXPECT_DOUBLE_EQ(p.congested_scale(), p.v_minus() - 1.0);
    EXPECT_NEAR(p.limit_speed(), std::sqrt(2.0), 1e-15);
}

TEST(ModelParams, RejectsInvalid) {
    EXPECT_THROW(ModelParams(0.0, 2.0, 1.0, 1.5), UsageError);
    EXPECT_THROW(ModelParams(1e-2, 0.5, 1.0, 1.5), UsageError);
    EXPECT_THROW(ModelParams(1e-2, 2.0, -1.0, 1.5), UsageError);
    EXPECT_THROW(ModelParams(1e-2, 2.0, 1.0, 1.0), UsageError);
    // v_minus = 1 + 0.5^(1/2) > 1.5
    EXPECT_THROW(ModelParams(0.5, 2.0, 1.0, 1.5), UsageError);
}

TEST(Pressure, ReferenceValues) {
    const ModelParams p(0.01, 2.0, 1.0, 3.0);
    EXPECT_DOUBLE_EQ(pressure(2.0, 0, p), 0.01);
    for (double g : {1.0, 1.5, 2.0, 3.0}) {
        for (double eps : {1e-2, 1e-4, 1e-6}) {
            const ModelParams q(eps, g, 1.0, 3.0);
            // v_minus - 1 carries one rounding of 1 + eps^(1/g), i.e. a relative
            // error of order ulp(1) / eps^(1/g), amplified by the exponent.
            const double slack = 4.0 * (g + 1.0) * 2.3e-16 / q.congested_scale();
            EXPECT_NEAR(pressure(q.v_minus(), 0, q), 1.0, slack);
            EXPECT_NEAR(pressure(q.v_minus(), 1, q) / (-g * std::pow(eps, -1.0 / g)), 1.0, slack);
        }
    }
}

TEST(Pressure, SignsAlternate) {
    const ModelParams p(1e-3, 2.0, 1.0, 3.0);
    for (double v = 1.01; v < 3.0; v += 0.07) {
        EXPECT_GT(pressure(v, 0, p), 0.0);
        EXPECT_LT(pressure(v, 1, p), 0.0);
        EXPECT_GT(pressure(v, 2, p), 0.0);
        EXPECT_LT(pressure(v, 3, p), 0.0);
        EXPECT_GT(pressure(v, 4, p), 0.0);
    }
}

TEST(Pressure, DerivativesMatchCentralDifferences) {
    const ModelParams p(1e-2, 2.5, 1.0, 3.0);
    for (double v : {1.3, 1.7, 2.4}) {
        double prev_err = 0.0;
        for (double h : {1e-3, 5e-4}) {
            double err = 0.0;
            for (int k = 0; k < 4; ++k) {
                const double fd = (pressure(v + h, k, p) - pressure(v - h, k, p)) / (2 * h);
                err = std::max(err, std::abs(fd / pressure(v, k + 1, p) - 1.0));
            }
            EXPECT_LT(err, 1e-4);
            if (prev_err > 0.0) EXPECT_NEAR(prev_err / err, 4.0, 0.2);
            prev_err = err;
        }
    }
}

TEST(Pressure, DomainAndUsageErrors) {
    const ModelParams p(1e-2, 2.0, 1.0, 3.0);
    try {
        pressure(0.999, 0, p);
        FAIL() << "expected DomainError";
    } catch (const DomainError& e) {
        EXPECT_DOUBLE_EQ(e.value(), 0.999);
    }
    EXPECT_THROW(pressure(1.0, 0, p), DomainError);
    EXPECT_THROW(pressure(2.0, 5, p), UsageError);
    EXPECT_THROW(pressure(2.0, -1, p), UsageError);
}

TEST(NonlinearF, SpecExamples) {
    const ModelParams p(0.01, 1.0, 1.0, 3.0);
    EXPECT_EQ(nonlinear_F(0.0, 2.0, p), 0.0);
    EXPECT_NEAR(nonlinear_F(0.1, 2.0, p), -0.01 * 0.01 / 1.1, 1e-18);
    EXPECT_NEAR(nonlinear_F(0.1, 2.0, p), -9.0909e-5, 1e-9);
    EXPECT_NEAR(nonlinear_F(-0.1, 2.0, p), -0.01 * 0.01 / 0.9, 1e-18);
    EXPECT_NEAR(nonlinear_F(-0.1, 2.0, p), static_cast<double>(direct_F(-0.1L, 2.0L, 0.01L, 1.0L)), 1e-17);
}

TEST(NonlinearF, MatchesDirectEvaluationForGeneralGamma) {
    for (double g : {1.0, 1.5, 2.0, 2.7, 3.0}) {
        const ModelParams p(1e-3, g, 1.0, 3.0);
        for (double v : {1.05, 1.4, 2.5}) {
            for (double t : {-0.6, -0.3, -0.05, 0.02, 0.2, 0.45, 0.8}) {
                const double f = t * (v - 1.0);
                const long double ref = direct_F(f, v, 1e-3L, g);
                EXPECT_NEAR(nonlinear_F(f, v, p) / static_cast<double>(ref), 1.0, 1e-12) << g << " " << v << " " << t;
            }
        }
    }
}

TEST(NonlinearF, QuadraticContactKeepsRelativePrecision) {
    // F(f) ~ -p''(v) f^2 / 2 as f -> 0; a three-term difference would lose all digits here.
    for (double g : {1.0, 2.0, 2.3}) {
        const ModelParams p(1e-2, g, 1.0, 3.0);
        const double v = 1.5;
        for (double f : {1e-6, 1e-9, -1e-12}) {
            const double lead = -0.5 * pressure(v, 2, p) * f * f;
            const double next = -pressure(v, 3, p) * f * f * f / 6.0;
            const double last = -pressure(v, 4, p) * f * f * f * f / 24.0;
            EXPECT_NEAR(nonlinear_F(f, v, p) / (lead + next + last), 1.0, 1e-12) << g << " " << f;
        }
    }
}

TEST(NonlinearF, NonPositive) {
    for (double g : {1.0, 2.0, 3.5}) {
        const ModelParams p(1e-4, g, 1.0, 3.0);
        for (double v = 1.02; v < 3.0; v += 0.13)
            for (double t = -0.9; t < 2.0; t += 0.11) EXPECT_LE(nonlinear_F(t * (v - 1.0), v, p), 0.0);
    }
}

TEST(NonlinearF, DomainError) {
    const ModelParams p(1e-2, 2.0, 1.0, 3.0);
    EXPECT_THROW(nonlinear_F(-1.0, 2.0, p), DomainError);
    EXPECT_THROW(nonlinear_F(0.0, 0.9, p), DomainError);
}

TEST(NonlinearH, SpecExamples) {
    const ModelParams p(0.01, 1.0, 1.0, 3.0);
    EXPECT_EQ(nonlinear_H(0.0, 2.0, p), 0.0);
    EXPECT_NEAR(nonlinear_H(0.1, 2.0, p), std::log(1.05) - 0.05, 1e-16);
    EXPECT_NEAR(nonlinear_H(0.1, 2.0, p), -1.2098e-3, 1e-7);
    EXPECT_NEAR(nonlinear_H(-0.1, 2.0, p), std::log(0.95) + 0.05, 1e-16);
    EXPECT_NEAR(nonlinear_H(-0.1, 2.0, p), -1.29329e-3, 1e-8);
    EXPECT_NEAR(nonlinear_H(1e-9, 2.0, p) / (-0.5 * 0.25e-18), 1.0, 1e-8);
    EXPECT_THROW(nonlinear_H(-2.0, 2.0, p), DomainError);
}

TEST(NonlinearDiff, SpecExamples) {
    const ModelParams p(0.01, 1.0, 1.0, 3.0);
    EXPECT_EQ(nonlinear_F_diff(0.05, 0.05, 2.0, p), 0.0);
    EXPECT_NEAR(nonlinear_F_diff(0.1, 0.0, 2.0, p), nonlinear_F(0.1, 2.0, p), 1e-19);
    const double F005 = -0.01 * 0.0025 / 1.05;
    EXPECT_NEAR(F005, -2.3810e-5, 1e-9);
    EXPECT_NEAR(nonlinear_F_diff(0.1, 0.05, 2.0, p), -0.01 * 0.01 / 1.1 - F005, 1e-18);
    EXPECT_NEAR(nonlinear_F_diff(0.1, 0.05, 2.0, p), -6.7099e-5, 1e-9);
}

TEST(NonlinearDiff, AgreesWithDifferencesAcrossGammas) {
    for (double g : {1.0, 2.0, 1.7, 3.0}) {
        const ModelParams p(1e-3, g, 1.0, 3.0);
        const double v = 1.3;
        for (auto [a, b] : {std::pair{0.01, -0.02}, {0.1, 0.09}, {-0.15, 0.2}, {0.19, 0.05}}) {
            const double fa = a * (v - 1.0) * 2.0;
            const double fb = b * (v - 1.0) * 2.0;
            const long double ref = direct_F(fa, v, 1e-3L, g) - direct_F(fb, v, 1e-3L, g);
            EXPECT_NEAR(nonlinear_F_diff(fa, fb, v, p) / static_cast<double>(ref), 1.0, 1e-10) << g << " " << a;
            const double refH = std::log1p(fa / v) - fa / v - (std::log1p(fb / v) - fb / v);
            EXPECT_NEAR(nonlinear_H_diff(fa, fb, v, p) / refH, 1.0, 1e-9);
        }
    }
}

TEST(NonlinearDiff, CloseArgumentsStayAccurate) {
    // F(f1) - F(f2) ~ F'(f) (f1 - f2) with F'(f) = -(p'(v+f) - p'(v))
    const ModelParams p(1e-2, 2.0, 1.0, 3.0);
    const double v = 1.2;
    const double f = 0.03;
    const double f1 = f + 1e-10;
    const double f2 = f - 1e-10;
    const double d = f1 - f2;  // exact in floating point, unlike 2e-10
    const double slope = -(pressure(v + f, 1, p) - pressure(v, 1, p));
    EXPECT_NEAR(nonlinear_F_diff(f1, f2, v, p) / (d * slope), 1.0, 1e-9);
    const ModelParams q(1e-2, 2.5, 1.0, 3.0);
    const double slope_q = -(pressure(v + f, 1, q) - pressure(v, 1, q));
    EXPECT_NEAR(nonlinear_F_diff(f1, f2, v, q) / (d * slope_q), 1.0, 1e-9);
}

TEST(Remainders, SeriesAndClosedFormsAgree) {
    using detail::taylor_remainder;
    using detail::taylor_remainder_slope;
    for (double t : {-0.45, -0.1, 1e-4, 0.3, 0.49}) {
        // g = 1 and g = 2 closed forms vs the series path (g nudged by nothing: compare to direct)
        for (double g : {1.0, 2.0}) {
            const double direct = std::expm1(-g * std::log1p(t)) + g * t;
            EXPECT_NEAR(taylor_remainder(t, g) / direct, 1.0, 1e-9);
        }
        const double a = t, b = -0.5 * t;
        for (double g : {1.0, 2.0, 2.5}) {
            const double ref = (taylor_remainder(a, g) - taylor_remainder(b, g)) / (a - b);
            EXPECT_NEAR(taylor_remainder_slope(a, b, g) / ref, 1.0, 1e-8);
        }
    }
}

/// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "cfront/errors.hpp"
#include "cfront/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

using namespace cfront;

namespace {

struct Verdict {
    bool pass = true;
    std::string detail;

    void check(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
    void note(const std::string& what) {
        if (pass) detail += (detail.empty() ? "" : "; ") + what;
    }
};

std::string f(const char* fmt, double a) {
    char buf[96];
    std::snprintf(buf, sizeof buf, fmt, a);
    return buf;
}

std::string g(double x) { return f("%.3g", x); }

// ------------------------------------------------------------------ 1

Verdict rankine_hugoniot() {
    Verdict v;
    const auto rows = rankine_hugoniot_sweep(20, 20240611);
    double worst = 0.0;
    for (const auto& r : rows) {
        worst = std::max(worst, r.residual);
        v.check(r.residual < 1e-12, "residual " + g(r.residual) + " at eps=" + g(r.eps) + " gamma=" + g(r.gamma));
    }
    v.check(rows.size() == 20, "expected 20 draws");
    v.note("20 draws, max relative residual " + g(worst));
    return v;
}

// ------------------------------------------------------------------ 2

Verdict profile_validity() {
    Verdict v;
    const auto rows = profile_validity_sweep({1, 2, 3}, {1e-2, 1e-4, 1e-6}, {1.5, 3.0}, 1.0, -60.0, 200.0);
    double worst = 0.0;
    for (const auto& r : rows) {
        const std::string at = " at gamma=" + g(r.gamma) + " eps=" + g(r.eps) + " v+=" + g(r.v_plus);
        v.check(r.error.empty(), "solver failed" + at + ": " + r.error);
        v.check(r.monotone, "not strictly monotone" + at);
        v.check(r.confined, "leaves (v-, v+)" + at);
        v.check(r.residual < 1e-8, "residual " + g(r.residual) + at);
        worst = std::max(worst, r.residual);
    }
    v.check(rows.size() == 18, "expected 18 configurations");
    v.note("18 configurations, max ODE residual " + g(worst));
    return v;
}

// ------------------------------------------------------------------ 3

Verdict convergence() {
    Verdict v;
    const auto rows = convergence_sweep(2.0, 1.0, 1.5, {1e-1, 1e-2, 1e-3, 1e-4, 1e-5}, -60.0, 80.0);
    std::string seq;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        seq += (i ? " > " : "") + g(rows[i].distance);
        if (i > 0) v.check(rows[i].distance < rows[i - 1].distance, "not decreasing at eps=" + g(rows[i].eps));
    }
    v.check(rows.back().distance < 0.05, "distance " + g(rows.back().distance) + " at eps=1e-5 is not < 0.05");
    v.note("distances " + seq);
    return v;
}

// ------------------------------------------------------------------ 4

Verdict transition_rate() {
    Verdict v;
    for (double gamma : {1.0, 2.0}) {
        const auto st = transition_sweep(gamma, 1.0, 1.5, {1e-3, 1e-4, 1e-5, 1e-6, 1e-7}, 1.0, 100.0, 1.0, -3.0, 40.0);
        const double expected = 1.0 / (gamma + 1.0);
        v.check(std::abs(st.sup_fit.slope - expected) <= 0.15,
                "gamma=" + g(gamma) + " slope " + g(st.sup_fit.slope) + " vs " + g(expected));
        double lo = HUGE_VAL, hi = 0.0;
        for (const auto& r : st.rows) {
            v.check(std::isfinite(r.C_hat) && r.C_hat > 0.0, "gamma=" + g(gamma) + " no weighted constant at eps=" + g(r.eps));
            lo = std::min(lo, r.C_hat);
            hi = std::max(hi, r.C_hat);
        }
        v.check(hi <= 2.0 * lo, "gamma=" + g(gamma) + " weighted constant spread " + g(hi / lo));
        v.note("gamma=" + g(gamma) + " slope " + f("%.3f", st.sup_fit.slope) + " (" + f("%.3f", expected) +
               "), C spread " + f("%.2f", hi / lo));
    }
    return v;
}

// -------------------------------------------------------------- 5, 6

Verdict congested_decay() {
    Verdict v;
    for (double gamma : {1.0, 2.0}) {
        const auto rows = barrier_sweep(gamma, 1.0, 1.5, {1e-3, 1e-5}, 1000, 40.0, -3.0, 40.0);
        for (const auto& r : rows) {
            const std::string at = " at gamma=" + g(gamma) + " eps=" + g(r.eps);
            v.check(r.r_squared > 0.99, "r^2 " + g(r.r_squared) + at);
            v.check(r.sigma_hat >= r.sigma_lower * (1.0 - 0.05),
                    "sigma_hat/sigma_lower " + f("%.3f", r.sigma_hat / r.sigma_lower) + " < 0.95" + at);
            v.note("gamma=" + g(gamma) + " eps=" + g(r.eps) + " ratio " + f("%.3f", r.sigma_hat / r.sigma_lower));
        }
    }
    return v;
}

Verdict barrier_sandwich() {
    Verdict v;
    for (double gamma : {1.0, 2.0}) {
        const auto rows = barrier_sweep(gamma, 1.0, 1.5, {1e-3, 1e-4}, 1000, 40.0, -3.0, 40.0);
        for (const auto& r : rows) {
            const std::string at = " at gamma=" + g(gamma) + " eps=" + g(r.eps);
            v.check(r.points == 1000 && r.violations == 0,
                    std::to_string(r.violations) + " violations on " + std::to_string(r.points) + " points" + at);
            const double eu = r.zeta_upper / r.crossing_asymptotic - 1.0;
            const double el = r.zeta_lower / r.crossing_asymptotic - 1.0;
            v.check(std::abs(eu) <= 0.15, "upper crossing off by " + f("%+.1f%%", 100 * eu) + at);
            v.check(std::abs(el) <= 0.15, "lower crossing off by " + f("%+.1f%%", 100 * el) + at);
        }
    }
    v.note("no violations, crossings within 15%");
    return v;
}

// -------------------------------------------------------------- 7-9

Verdict energy_identity() {
    Verdict v;
    const auto st = linearized_refinement(LinearizedSetup{});
    v.check(st.ratios.size() == 2, "expected three dt levels");
    std::string rs;
    for (double r : st.ratios) {
        v.check(r >= 1.6 && r <= 2.4, "ratio " + g(r) + " outside [1.6, 2.4]");
        rs += (rs.empty() ? "" : ", ") + f("%.3f", r);
    }
    v.note("residual ratios " + rs);
    return v;
}

Verdict commutators() {
    Verdict v;
    const auto st = commutator_refinement(1e-2, 2.0, 1.0, 1.5, {0.02, 0.01, 0.005, 0.0025}, -1.0, 1.0);
    std::string rs;
    for (std::size_t i = 0; i < st.first_ratios.size(); ++i) {
        for (double r : {st.first_ratios[i], st.second_ratios[i]}) {
            v.check(std::abs(r - 4.0) <= 1.0, "ratio " + g(r) + " not within 4 +- 1");
            rs += (rs.empty() ? "" : ", ") + f("%.2f", r);
        }
    }
    v.note("ratios " + rs);
    return v;
}

Verdict remainder_bounds() {
    Verdict v;
    double worst_spread = 0.0, worst_F = 0.0;
    const std::vector<double> eps{1e-2, 1e-3, 1e-4, 1e-5, 1e-6};
    for (double gamma : {1.0, 2.0}) {
        const auto rows = lemma_bound_scan(eps, gamma, 1.0, 1.5);
        for (const auto& b : bound_variation(rows)) {
            v.check(b.spread < 2.0, b.bound + " spread " + g(b.spread) + " at gamma=" + g(gamma));
            worst_spread = std::max(worst_spread, b.spread);
        }
        if (gamma == 1.0)
            for (const auto& r : rows)
                if (r.bound == "F") {
                    v.check(r.max_ratio <= 2.0 + 1e-9, "F ratio " + f("%.12g", r.max_ratio) + " at eps=" + g(r.eps));
                    worst_F = std::max(worst_F, r.max_ratio);
                }
    }
    v.note("max spread " + f("%.3f", worst_spread) + ", gamma=1 F ratio " + f("%.12g", worst_F));
    return v;
}

// ------------------------------------------------------------ 10, 11

Verdict stability() {
    Verdict v;
    const auto out = stability_run(default_stability_setup());
    const auto& res = out.result;
    v.check(!res.aborted, "congestion violation: " + res.error);
    v.check(res.min_v > 1.0, "min v = " + f("%.17g", res.min_v));
    v.check(!res.boundary_reached, "perturbation reached the boundary zone");
    v.check(out.max_mass <= 1e-10, "mass " + g(out.max_mass));
    v.check(out.decay_v.ratio <= 0.1, "v decay ratio " + g(out.decay_v.ratio));
    v.check(out.decay_u.ratio <= 0.1, "u decay ratio " + g(out.decay_u.ratio));
    v.check(out.x_norm_initial > 0.0 && out.x_norm_max <= 10.0 * out.x_norm_initial,
            "X-norm grew by " + g(out.x_norm_max / out.x_norm_initial));
    v.note("min v - 1 " + g(res.min_v - 1.0) + ", masses " + g(out.max_mass) + ", decay v " + g(out.decay_v.ratio) +
           " u " + g(out.decay_u.ratio) + ", X-norm factor " + g(out.x_norm_max / out.x_norm_initial));
    return v;
}

Verdict mass_control() {
    Verdict v;
    StabilitySetup s = default_stability_setup();
    s.mass_offset = 1e-4;
    try {
        stability_run(s);
        v.check(false, "non-zero-mass run was not rejected");
    } catch (const MassDefectError& e) {
        v.note("rejected: defect v " + g(e.defect_v()) + ", w " + g(e.defect_w()));
    }
    return v;
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria{
        {"Rankine-Hugoniot exactness", rankine_hugoniot},
        {"profile validity", profile_validity},
        {"convergence to the limit profile", convergence},
        {"transition rate", transition_rate},
        {"congested-zone decay", congested_decay},
        {"barrier sandwich", barrier_sandwich},
        {"linearized energy identity", energy_identity},
        {"commutator identities", commutators},
        {"nonlinearity bounds", remainder_bounds},
        {"nonlinear stability", stability},
        {"non-zero-mass control", mass_control},
    };
    int failed = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try {
            v = criteria[k].second();
        } catch (const std::exception& e) {
            v.pass = false;
            v.detail = std::string("exception: ") + e.what();
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!v.pass) ++failed;
        std::printf("%s  criterion %2zu  %-34s %6.2fs  %s\n", v.pass ? "PASS" : "FAIL", k + 1, criteria[k].first, secs,
                    v.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failed, criteria.size());
    return failed == 0 ? 0 : 1;
}

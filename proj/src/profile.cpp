#include "cfront/profile.hpp"

#include "cfront/errors.hpp"
#include "cfront/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

namespace cfront {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// (1 - (1+y)^(-g)) / y, with its limit g at y = 0.
double decay_slope(double y, double g) {
    if (std::abs(y) < 1e-100) return g;
    return -std::expm1(-g * std::log1p(y)) / y;
}

/// eps (v-1)^(-g), NaN instead of throwing so that trial Newton iterates can fail softly.
double raw_pressure(double v, const ModelParams& p) {
    if (!(v > 1.0)) return kNaN;
    return p.epsilon() * std::exp(-p.gamma() * std::log(v - 1.0));
}

double transition_K(const ModelParams& p) {
    return std::pow(p.mu() * p.limit_speed(), -1.0 / (p.gamma() + 1.0));
}

}  // namespace

double shock_speed(const ModelParams& params) {
    const double pm = pressure(params.v_minus(), 0, params);
    const double pp = pressure(params.v_plus(), 0, params);
    return std::sqrt((pm - pp) / (params.v_plus() - params.v_minus()));
}

double rankine_hugoniot_residual(const ModelParams& params, double s) {
    const double pm = pressure(params.v_minus(), 0, params);
    const double pp = pressure(params.v_plus(), 0, params);
    return std::abs(s * s * (params.v_plus() - params.v_minus()) + pp - pm) / pm;
}

double ShiftSpec::anchor_value(const ModelParams& params) const {
    if (kind == Kind::ValueAtZero) return v0;
    return 1.0 + transition_K(params) * std::pow(params.epsilon(), 1.0 / (params.gamma() + 1.0));
}

std::string ShiftSpec::describe() const {
    std::ostringstream os;
    os.precision(17);
    if (kind == Kind::ValueAtZero)
        os << "ValueAtZero(" << v0 << ")";
    else
        os << "TransitionAnchor";
    return os.str();
}

double profile_rhs(const ModelParams& params, double s, const WavePoint& pt) {
    const double g = params.gamma();
    const double ms = params.mu() * s;
    const double delta = params.congested_scale();
    const double v = pt.v;
    if (pt.log_gap_below <= pt.log_gap_above) {
        const double y = std::exp(pt.log_gap_below) / delta;
        const double pm = raw_pressure(params.v_minus(), params);
        return v / ms * y * (pm * decay_slope(y, g) - s * s * delta);
    }
    const double z = std::exp(pt.log_gap_above);
    const double x = z / (v - 1.0);
    return v / ms * z * (s * s - raw_pressure(v, params) * decay_slope(x, g) / (v - 1.0));
}

ProfileDerivatives profile_derivatives(const ModelParams& params, double s, const WavePoint& pt) {
    const double ms = params.mu() * s;
    const double v = pt.v;
    const double a = profile_rhs(params, s, pt);
    const double p1 = pressure(v, 1, params);
    const double p2 = pressure(v, 2, params);
    const double a1 = a / v + v / ms * (-s * s - p1);
    const double a2 = 2.0 / ms * (-s * s - p1) - v / ms * p2;
    ProfileDerivatives d;
    d.d1 = a;
    d.d2 = a1 * a;
    d.d3 = a2 * a * a + a1 * a1 * a;
    return d;
}

WavePoint TravelingWave::at(double xi) const {
    const double x = xi - offset_;
    const double delta = params_.congested_scale();
    const double jump = params_.v_plus() - params_.v_minus();
    WavePoint pt;
    if (x <= 0.0) {
        const double zeta = x / delta;
        const double q = below_(zeta);
        const double gap = delta * std::exp(q);
        pt.v = params_.v_minus() + gap;
        pt.log_gap_below = std::log(delta) + q;
        pt.log_gap_above = std::log(jump - gap);
        pt.extrapolated = zeta < below_.t_lo();
    } else {
        const double q = above_(x);
        const double z = std::exp(q);
        pt.v = params_.v_plus() - z;
        pt.log_gap_above = q;
        pt.log_gap_below = std::log(jump - z);
        pt.extrapolated = x > above_.t_hi();
    }
    return pt;
}

double TravelingWave::velocity(double xi) const {
    const WavePoint pt = at(xi);
    return params_.u_plus() + s_ * std::exp(pt.log_gap_above);
}

ProfileDerivatives TravelingWave::derivatives(double xi) const {
    return profile_derivatives(params_, s_, at(xi));
}

bool TravelingWave::v_strictly_increasing() const {
    for (std::size_t i = 1; i < v_.size(); ++i)
        if (!(v_[i] > v_[i - 1])) return false;
    return true;
}

double TravelingWave::congested_rate() const {
    const double pm = pressure(params_.v_minus(), 0, params_);
    return params_.v_minus() * (params_.gamma() * pm - s_ * s_ * params_.congested_scale()) / (params_.mu() * s_);
}

double TravelingWave::free_rate() const {
    return params_.v_plus() * (s_ * s_ + pressure(params_.v_plus(), 1, params_)) / (params_.mu() * s_);
}

TravelingWave TravelingWave::translated(double a) const {
    TravelingWave w = *this;
    w.offset_ += a;
    for (double& x : w.xi_) x += a;
    return w;
}

TravelingWave solve_profile(const ModelParams& params, const ShiftSpec& shift, double xi_lo, double xi_hi,
                            const ProfileOptions& opts) {
    if (!(xi_lo < 0.0 && xi_hi > 0.0)) throw UsageError("profile domain must satisfy xi_lo < 0 < xi_hi");
    if (!(opts.tol > 0.0)) throw UsageError("profile tolerance must be > 0");
    const double s = shock_speed(params);
    const double v0 = shift.anchor_value(params);
    const double vm = params.v_minus();
    const double vp = params.v_plus();
    if (!(v0 > vm && v0 < vp)) {
        std::ostringstream os;
        os.precision(17);
        os << "v(0) = " << v0 << " is outside (v_minus, v_plus) = (" << vm << ", " << vp << ")";
        throw UsageError(os.str());
    }
    const double g = params.gamma();
    const double ms = params.mu() * s;
    const double delta = params.congested_scale();
    const double s2 = s * s;
    // p(v_minus) is 1 up to the rounding of v_minus; keep the computed value so
    // that v_minus stays an exact equilibrium of the discrete right-hand side.
    const double pm = pressure(vm, 0, params);

    ScalarRhs below_rhs = [=](double, double q) {
        const double y = std::exp(q);
        const double v = vm + delta * y;
        return v / ms * (pm * decay_slope(y, g) - s2 * delta);
    };
    ScalarRhs above_rhs = [=, pp = params](double, double q) {
        const double z = std::exp(q);
        const double v = vp - z;
        if (!(v > 1.0)) return kNaN;
        return -v / ms * (s2 - raw_pressure(v, pp) * decay_slope(z / (v - 1.0), g) / (v - 1.0));
    };

    OdeOptions ob;
    ob.tol = opts.tol;
    // q varies on the scale 1 + y in zeta; a tiny first step would only sample roundoff
    ob.h_init = 1e-3 * (1.0 + (v0 - vm) / delta);
    ob.h_max = opts.max_step / delta;
    std::function<bool(double, double)> stop_below;
    std::function<bool(double, double)> stop_above;
    if (opts.tail_gap > 0.0) {
        const double lim_below = std::log(opts.tail_gap / delta);
        const double lim_above = std::log(opts.tail_gap);
        stop_below = [lim_below](double, double q) { return q < lim_below; };
        stop_above = [lim_above](double, double q) { return q < lim_above; };
    }
    Trajectory tb = integrate_sdirk4(below_rhs, 0.0, std::log((v0 - vm) / delta), xi_lo / delta, ob, stop_below);
    reverse_trajectory(tb);

    OdeOptions oa;
    oa.tol = opts.tol;
    oa.h_init = 1e-4;
    oa.h_max = opts.max_step;
    Trajectory ta = integrate_sdirk4(above_rhs, 0.0, std::log(vp - v0), xi_hi, oa, stop_above);

    TravelingWave w(params);
    w.s_ = s;
    w.shift_ = shift;
    w.tol_ = opts.tol;
    w.rh_residual_ = rankine_hugoniot_residual(params, s);

    // Monotonicity on the exact representation, then audit each step against RK4.
    for (std::size_t i = 1; i < tb.y.size(); ++i)
        if (!(tb.y[i] > tb.y[i - 1]))
            throw SolverError("profile lost monotonicity on the congested side", delta * tb.t[i]);
    for (std::size_t i = 1; i < ta.y.size(); ++i)
        if (!(ta.y[i] < ta.y[i - 1])) throw SolverError("profile lost monotonicity on the free side", ta.t[i]);

    double res_max = 0.0;
    for (std::size_t i = 1; i < tb.y.size(); ++i) {
        // step taken from right (closer to 0) to left
        const double ref = rk4_advance(below_rhs, tb.t[i], tb.y[i], tb.t[i - 1], opts.residual_substeps);
        const double dq = std::abs(ref - tb.y[i - 1]);
        const double dzeta = tb.t[i] - tb.t[i - 1];
        res_max = std::max(res_max, std::exp(tb.y[i - 1]) * dq / dzeta);
    }
    for (std::size_t i = 1; i < ta.y.size(); ++i) {
        const double ref = rk4_advance(above_rhs, ta.t[i - 1], ta.y[i - 1], ta.t[i], opts.residual_substeps);
        const double dq = std::abs(ref - ta.y[i]);
        const double dxi = ta.t[i] - ta.t[i - 1];
        res_max = std::max(res_max, std::exp(ta.y[i]) * dq / dxi);
    }
    w.residual_max_ = res_max;

    const double jump = vp - vm;
    auto push = [&](double xi, double v, double gb, double ga) {
        w.xi_.push_back(xi);
        w.v_.push_back(v);
        w.u_.push_back(params.u_plus() + s * std::exp(ga));
        w.gap_below_.push_back(gb);
        w.gap_above_.push_back(ga);
    };
    const double ln_delta = std::log(delta);
    for (std::size_t i = 0; i + 1 < tb.y.size(); ++i) {
        const double gap = delta * std::exp(tb.y[i]);
        push(delta * tb.t[i], vm + gap, ln_delta + tb.y[i], std::log(jump - gap));
    }
    for (std::size_t i = 0; i < ta.y.size(); ++i) {
        const double z = std::exp(ta.y[i]);
        push(ta.t[i], vp - z, std::log(jump - z), ta.y[i]);
    }

    const double rate_lo = w.congested_rate();
    const double rate_hi = -w.free_rate();
    w.below_ = DenseSolution(below_rhs, tb.t, tb.y, rate_lo, below_rhs(0.0, tb.y.back()));
    w.above_ = DenseSolution(above_rhs, ta.t, ta.y, above_rhs(0.0, ta.y.front()), rate_hi);
    return w;
}

LimitProfile::LimitProfile(double vp, double m) : v_plus(vp), mu(m) {
    if (!(vp > 1.0)) throw UsageError("limit profile needs v_plus > 1");
    if (!(m > 0.0)) throw UsageError("limit profile needs mu > 0");
    s_bar = 1.0 / std::sqrt(vp - 1.0);
    r = vp / (m * std::sqrt(vp - 1.0));
}

double limit_profile(double xi, const LimitProfile& lp) {
    if (xi <= 0.0) return 1.0;
    return lp.v_plus / (1.0 + (lp.v_plus - 1.0) * std::exp(-lp.r * xi));
}

double limit_profile_derivative(double xi, const LimitProfile& lp) {
    if (xi < 0.0) return 0.0;
    const double v = limit_profile(xi, lp);
    return lp.r * v * (lp.v_plus - v) / lp.v_plus;
}

AutonomousTable::AutonomousTable(double rho, double gamma, double zeta_lo, double zeta_hi, double tol)
    : rho_(rho), gamma_(gamma) {
    if (!(rho > 0.0)) throw UsageError("autonomous table needs rho > 0");
    if (!(zeta_lo < 0.0 && zeta_hi > 0.0)) throw UsageError("autonomous table domain must contain 0");
    ScalarRhs f = [rho, gamma](double, double q) { return rho * decay_slope(std::exp(q), gamma); };
    OdeOptions o;
    o.tol = tol;
    o.h_init = 1e-3;
    o.h_max = 5.0;
    Trajectory back = integrate_sdirk4(f, 0.0, 0.0, zeta_lo, o);
    Trajectory fwd = integrate_sdirk4(f, 0.0, 0.0, zeta_hi, o);
    reverse_trajectory(back);
    std::vector<double> t(back.t.begin(), back.t.end() - 1);
    std::vector<double> y(back.y.begin(), back.y.end() - 1);
    t.insert(t.end(), fwd.t.begin(), fwd.t.end());
    y.insert(y.end(), fwd.y.begin(), fwd.y.end());
    const double slope_hi = f(0.0, y.back());
    sol_ = DenseSolution(f, std::move(t), std::move(y), rho * gamma, slope_hi);
}

double AutonomousTable::log_gap(double zeta) const { return sol_(zeta); }

double AutonomousTable::operator()(double zeta) const { return 1.0 + std::exp(sol_(zeta)); }

double AutonomousTable::derivative(double zeta) const {
    const double y = std::exp(sol_(zeta));
    return rho_ * y * decay_slope(y, gamma_);
}

double AutonomousTable::solve_for(double target) const {
    if (!(target > 1.0)) throw UsageError("autonomous table target must exceed 1");
    const double q = std::log(target - 1.0);
    const auto& ts = sol_.nodes_t();
    const auto& ys = sol_.nodes_y();
    if (q < ys.front() || q > ys.back()) {
        std::ostringstream os;
        os << "value " << target << " is not tabulated on [" << ts.front() << ", " << ts.back()
           << "]; extend the zeta domain";
        throw ExtendDomainError(os.str());
    }
    auto it = std::lower_bound(ys.begin(), ys.end(), q);
    std::size_t hi = static_cast<std::size_t>(it - ys.begin());
    if (ys[hi] == q) return ts[hi];
    const std::size_t lo = hi - 1;
    return find_root([&](double z) { return sol_(z) - q; }, ts[lo], ts[hi]);
}

AutonomousTable solve_corrector(const ModelParams& params, double zeta_lo, double zeta_hi) {
    const double rho = 1.0 / (params.mu() * params.limit_speed());
    return AutonomousTable(rho, params.gamma(), zeta_lo, zeta_hi);
}

double Cutoff::operator()(double xi) const {
    if (xi <= 0.0) return 1.0;
    if (xi >= width) return 0.0;
    const double t = xi / width;
    return (1.0 - xi) * std::exp(-t * t / (1.0 - t * t));
}

double Cutoff::derivative(double xi) const {
    if (xi < 0.0 || xi >= width) return 0.0;
    const double t = xi / width;
    const double d = 1.0 - t * t;
    const double e = std::exp(-t * t / d);
    // d/dxi [t^2/(1-t^2)] = 2t / (L (1-t^2)^2)
    const double dexp = -2.0 * t / (width * d * d);
    return -e + (1.0 - xi) * e * dexp;
}

TransitionExpansion transition_params(const ModelParams& params, const Cutoff& cutoff) {
    if (!(cutoff.width > 0.0 && cutoff.width <= 1.0)) throw UsageError("cutoff width must lie in (0, 1]");
    const double g = params.gamma();
    const double eps = params.epsilon();
    const double msb = params.mu() * params.limit_speed();
    TransitionExpansion ex{params, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, {}, cutoff};
    ex.K = transition_K(params);
    ex.omega = ex.K * std::pow(eps, -1.0 / (g * (g + 1.0)));
    const double zeta_hi = 2.0 * msb * ex.omega + 20.0;
    ex.corrector = solve_corrector(params, -60.0, zeta_hi);
    ex.zeta_star = ex.corrector.solve_for(ex.omega);
    const double delta = params.congested_scale();
    ex.xi_star = -delta * ex.zeta_star;
    ex.xi_star_asymptotic = -std::pow(msb, g / (g + 1.0)) * std::pow(eps, 1.0 / (g + 1.0));

    const double amp = ex.K * std::pow(eps, 1.0 / (g + 1.0));
    const double left = 1.0 + delta * ex.corrector(ex.zeta_star);
    const double right = 1.0 + amp;
    ex.matching_value_residual = std::abs(left - right);
    const double dleft = ex.corrector.derivative(ex.zeta_star);
    const double dright = 1.0 / msb + amp * cutoff.derivative(0.0);
    ex.matching_derivative_residual = std::abs(dleft - dright) / std::abs(dright);
    return ex;
}

double approx_profile(double xi, const TransitionExpansion& ex, const LimitProfile& lp, bool* extrapolated) {
    const double g = ex.params.gamma();
    if (xi <= 0.0) {
        const double delta = ex.params.congested_scale();
        const double zeta = (xi - ex.xi_star) / delta;
        if (extrapolated && ex.corrector.extrapolated(zeta)) *extrapolated = true;
        return limit_profile(xi, lp) + delta * ex.corrector(zeta);
    }
    const double amp = ex.K * std::pow(ex.params.epsilon(), 1.0 / (g + 1.0));
    return limit_profile(xi, lp) + amp * ex.cutoff(xi);
}

double approx_profile_derivative(double xi, const TransitionExpansion& ex, const LimitProfile& lp) {
    const double g = ex.params.gamma();
    if (xi <= 0.0) {
        const double zeta = (xi - ex.xi_star) / ex.params.congested_scale();
        return ex.corrector.derivative(zeta);
    }
    const double amp = ex.K * std::pow(ex.params.epsilon(), 1.0 / (g + 1.0));
    return limit_profile_derivative(xi, lp) + amp * ex.cutoff.derivative(xi);
}

BarrierRates barrier_rates(const ModelParams& params, double v0) {
    const double g = params.gamma();
    const double eps = params.epsilon();
    const double s = shock_speed(params);
    const double ms = params.mu() * s;
    if (!(v0 > params.v_minus() && v0 < params.v_plus()))
        throw UsageError("barrier rates need v_minus < v(0) < v_plus");
    const double load = s * s * std::pow(eps, -(g - 1.0) / g) * std::pow(v0 - 1.0, g) / g;
    if (!(load < 1.0)) {
        std::ostringstream os;
        os << "v(0) - 1 = " << v0 - 1.0 << " is too large for the barrier construction: need "
           << "eps^(-(gamma-1)/gamma) (v(0)-1)^gamma << 1 (here s^2 * that / gamma = " << load << ")";
        throw UsageError(os.str());
    }
    BarrierRates r;
    r.rho_upper = (1.0 + params.congested_scale()) / ms * (1.0 - load);
    r.rho_lower = v0 / ms;
    return r;
}

BarrierPair solve_barriers(const ModelParams& params, double v0) {
    const BarrierRates rates = barrier_rates(params, v0);
    const double g = params.gamma();
    const double delta = params.congested_scale();
    BarrierPair bp;
    bp.v0 = v0;
    bp.rho_upper = rates.rho_upper;
    bp.rho_lower = rates.rho_lower;
    bp.target = (v0 - 1.0) / delta;
    const double zeta_hi = 1.5 * bp.target / std::min(rates.rho_upper, rates.rho_lower) + 20.0;
    bp.v_upper = AutonomousTable(rates.rho_upper, g, -80.0, zeta_hi);
    bp.v_lower = AutonomousTable(rates.rho_lower, g, -80.0, zeta_hi);
    bp.zeta_upper = bp.v_upper.solve_for(bp.target);
    bp.zeta_lower = bp.v_lower.solve_for(bp.target);
    bp.sigma_lower = rates.rho_lower * g;
    bp.sigma_upper = rates.rho_upper * g * std::pow(2.0, -g);
    bp.crossing_asymptotic = params.mu() * params.limit_speed() * (v0 - 1.0) / delta;
    bp.xi_eps = -delta * std::max(bp.zeta_upper, bp.zeta_lower);
    return bp;
}

SandwichReport sandwich_check(const BarrierPair& pair, const TravelingWave& wave, std::size_t points,
                              double zeta_min, double slack) {
    if (points < 2 || !(zeta_min < 0.0)) throw UsageError("sandwich check needs >= 2 points and zeta_min < 0");
    const double v0 = wave.value(0.0);
    if (std::abs(v0 - pair.v0) > 1e-12 * v0) throw UsageError("barriers were built for a different v(0)");
    const double delta = wave.params().congested_scale();
    const double ln_delta = std::log(delta);
    SandwichReport rep;
    rep.points = points;
    rep.zeta_min = zeta_min;
    rep.worst_lower_margin = std::numeric_limits<double>::infinity();
    rep.worst_upper_margin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < points; ++j) {
        const double zeta = zeta_min * (1.0 - static_cast<double>(j) / static_cast<double>(points));
        const double qw = wave.at(delta * zeta).log_gap_below - ln_delta;
        const double ql = pair.v_lower.log_gap(zeta + pair.zeta_lower);
        const double qu = pair.v_upper.log_gap(zeta + pair.zeta_upper);
        const double lm = qw - ql;
        const double um = qu - qw;
        rep.worst_lower_margin = std::min(rep.worst_lower_margin, lm);
        rep.worst_upper_margin = std::min(rep.worst_upper_margin, um);
        const double tol = slack * std::max(1.0, std::abs(qw));
        if (lm < -tol || um < -tol) ++rep.violations;
    }
    return rep;
}

namespace {

/// Scan plus golden-section refinement of the shift objective. `extra(C)` adds
/// points that are only available through a dense evaluator.
ShiftDistance minimize_shift(std::span<const double> xi, std::span<const double> v, const LimitProfile& lp,
                             double v_minus, const std::function<double(double)>& extra) {
    if (xi.size() != v.size() || xi.size() < 4) throw UsageError("min_shift_distance needs >= 4 matching samples");
    const double tail_tol = 1e-6;
    if (std::abs(v.back() - lp.v_plus) > tail_tol || v.front() - v_minus > tail_tol) {
        std::ostringstream os;
        os << "profile domain too narrow: tails not resolved (v_first - v_minus = " << v.front() - v_minus
           << ", v_plus - v_last = " << lp.v_plus - v.back() << ")";
        throw ExtendDomainError(os.str());
    }
    const double center = 0.5 * (xi.front() + xi.back());
    const double half = 0.5 * (xi.back() - xi.front());
    auto objective = [&](double C) {
        double m = extra ? extra(C) : 0.0;
        for (std::size_t i = 0; i < xi.size(); ++i) m = std::max(m, std::abs(v[i] - limit_profile(xi[i] - C, lp)));
        return m;
    };
    // the layer sits where v crosses the midpoint of its range; scan around it
    std::size_t j = 0;
    const double vmid = 0.5 * (v.front() + v.back());
    while (j + 1 < v.size() && v[j] < vmid) ++j;
    const double L = std::min(0.5 * half, 10.0 / lp.r + 5.0);
    const double c0 = std::clamp(xi[j], center - half + L, center + half - L);
    const std::size_t n = 401;
    const std::vector<double> cs = linspace(c0 - L, c0 + L, n);
    std::vector<double> vals(n);
    for (std::size_t i = 0; i < n; ++i) vals[i] = objective(cs[i]);
    const std::size_t k = static_cast<std::size_t>(std::min_element(vals.begin(), vals.end()) - vals.begin());
    ShiftDistance out;
    for (std::size_t i = 1; i <= k; ++i)
        if (vals[i] > vals[i - 1]) out.unimodal = false;
    for (std::size_t i = k + 1; i < n; ++i)
        if (vals[i] < vals[i - 1]) out.unimodal = false;
    const double a = cs[k == 0 ? 0 : k - 1];
    const double b = cs[k + 1 >= n ? n - 1 : k + 1];
    const Minimum m = golden_section(objective, a, b, 1e-12);
    out.distance = std::min(m.value, vals[k]);
    out.best_shift = m.value <= vals[k] ? m.x : cs[k];
    return out;
}

}  // namespace

ShiftDistance min_shift_distance(std::span<const double> xi, std::span<const double> v, const LimitProfile& lp,
                                 double v_minus) {
    return minimize_shift(xi, v, lp, v_minus, {});
}

ShiftDistance min_shift_distance(const TravelingWave& wave, const LimitProfile& lp) {
    const auto& xi = wave.xi();
    std::vector<double> mid(xi.size() - 1), mid_v(xi.size() - 1);
    for (std::size_t i = 0; i + 1 < xi.size(); ++i) {
        mid[i] = 0.5 * (xi[i] + xi[i + 1]);
        mid_v[i] = wave.value(mid[i]);
    }
    /// midpoints and the kink of the limit, both from the wave's dense output
    auto extra = [&](double C) {
        double m = std::abs(wave.value(C) - 1.0);
        for (std::size_t i = 0; i < mid.size(); ++i) m = std::max(m, std::abs(mid_v[i] - limit_profile(mid[i] - C, lp)));
        return m;
    };
    return minimize_shift(xi, wave.v(), lp, wave.params().v_minus(), extra);
}

DecayFit exponential_fit(std::span<const double> zeta, std::span<const double> log_y) {
    const LineFit f = least_squares_line(zeta, log_y);
    DecayFit out;
    out.sigma_hat = f.slope;
    out.C_hat = std::exp(f.intercept);
    out.r_squared = f.r_squared;
    out.zeta_a = zeta.front();
    out.zeta_b = zeta.back();
    return out;
}

DecayFit congested_decay_fit(const TravelingWave& wave, double xi_eps, const DecayFitOptions& opts) {
    if (!(opts.y_floor > 0.0 && opts.y_ceiling > opts.y_floor)) throw UsageError("decay fit needs 0 < y_floor < y_ceiling");
    const double delta = wave.params().congested_scale();
    const double ln_delta = std::log(delta);
    auto lny = [&](double zeta) { return wave.at(delta * zeta).log_gap_below - ln_delta; };
    const double sigma = wave.congested_rate();
    // bracket far enough left that even the extrapolated tail passes y_floor
    const double z_left = std::min(wave.xi_lo() / delta, 0.0) - (std::abs(std::log(opts.y_floor)) + 10.0) / sigma;
    auto level = [&](double target) {
        if (lny(0.0) <= target) return 0.0;
        return find_root([&](double z) { return lny(z) - target; }, z_left, 0.0, 1e-13);
    };
    const double z_floor = level(std::log(opts.y_floor));
    const double z_ceil = level(std::log(opts.y_ceiling));
    const double zeta_b = std::min(xi_eps / delta, z_ceil);
    const double zeta_tab = wave.xi_lo() / delta;
    const double zeta_a = std::max(z_floor, zeta_tab);
    if (!(zeta_b > zeta_a)) throw ExtendDomainError("congested fit window is empty; widen the profile domain");
    const std::vector<double> zs = linspace(zeta_a, zeta_b, std::max<std::size_t>(opts.samples, 3));
    std::vector<double> ly(zs.size());
    for (std::size_t i = 0; i < zs.size(); ++i) ly[i] = wave.at(delta * zs[i]).log_gap_below;
    const LineFit f = least_squares_line(zs, ly);
    DecayFit out;
    out.sigma_hat = f.slope;
    out.C_hat = std::exp(f.intercept) / delta;
    out.r_squared = f.r_squared;
    out.zeta_a = zeta_a;
    out.zeta_b = zeta_b;
    const double intended = zeta_b - std::min(z_floor, zeta_b);
    out.window_shrunk = intended > 0.0 && (zeta_b - zeta_a) < 0.5 * intended;
    return out;
}

TransitionError transition_error(const TravelingWave& wave, const TransitionExpansion& ex, const LimitProfile& lp,
                                 double R, double M) {
    if (!(R > 0.0)) throw UsageError("transition error needs R > 0");
    if (wave.shift().kind != ShiftSpec::Kind::TransitionAnchor)
        throw UsageError("transition error needs a profile anchored with TransitionAnchor");
    const double delta = wave.params().congested_scale();
    TransitionError out;
    auto diff = [&](double x) {
        const WavePoint pt = wave.at(x);
        if (pt.extrapolated) out.extrapolated = true;
        bool ext = false;
        const double a = approx_profile(x, ex, lp, &ext);
        return std::abs(pt.v - a);
    };
    std::vector<double> grid = linspace(-R, R, 20001);
    const double la = std::max(-R, ex.xi_star - 50.0 * delta);
    const double lb = std::min(R, 50.0 * delta);
    if (lb > la) {
        const std::vector<double> fine = linspace(la, lb, 4001);
        grid.insert(grid.end(), fine.begin(), fine.end());
    }
    for (double x : wave.xi())
        if (x >= -R && x <= R) grid.push_back(x);
    for (double x : grid) out.sup_error = std::max(out.sup_error, diff(x));

    out.xi_min = ex.xi_star + M * delta;
    if (!(out.xi_min < 0.0)) {
        out.window_empty = true;
        out.weighted_error = kNaN;
        return out;
    }
    double w = 0.0;
    const std::size_t n = 4000;
    for (std::size_t j = 0; j < n; ++j) {
        const double x = out.xi_min * (1.0 - static_cast<double>(j) / static_cast<double>(n));
        w = std::max(w, diff(x) / std::abs(x));
    }
    for (int k = 1; k <= 600; ++k) {
        const double x = out.xi_min * std::pow(10.0, -k / 100.0);
        w = std::max(w, diff(x) / std::abs(x));
    }
    out.weighted_error = w;
    return out;
}

}  // namespace cfront

#include "cfront/sim.hpp"

#include "cfront/errors.hpp"

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cfront {

namespace {

double left_velocity(const ModelParams& params, double s) {
    return params.u_plus() + s * (params.v_plus() - params.v_minus());
}

void check_congestion(const SimState& st) {
    std::size_t worst = 0;
    for (std::size_t c = 1; c < st.v.size(); ++c)
        if (st.v[c] < st.v[worst]) worst = c;
    if (!(st.v[worst] > 1.0)) {
        std::ostringstream os;
        os << "congestion constraint violated: min v = " << st.v[worst] << " at x = " << st.grid.cell(worst)
           << " (t = " << st.t << "); reduce dt or the perturbation amplitude";
        throw CongestionViolation(os.str(), st.v[worst], st.grid.cell(worst));
    }
}

/// phi(z) potential of each perturbation shape, compactly supported in z.
double potential(PerturbationSpec::Shape shape, double z) {
    switch (shape) {
    case PerturbationSpec::Shape::GaussianDipole:
        return std::abs(z) < 8.0 ? std::exp(-z * z) : 0.0;
    case PerturbationSpec::Shape::CompactBump:
        return std::abs(z) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - z * z)) : 0.0;
    case PerturbationSpec::Shape::Custom:
        break;
    }
    return 0.0;
}

void scale_to(std::vector<double>& f, double amplitude) {
    double m = 0.0;
    for (double x : f) m = std::max(m, std::abs(x));
    if (m == 0.0) return;
    const double k = amplitude / m;
    for (double& x : f) x *= k;
}

}  // namespace

Grid::Grid(double lo, double hi, std::size_t n) : x_lo(lo), cells(n) {
    if (!(hi > lo) || n < 4) throw UsageError("grid needs x_hi > x_lo and at least 4 cells");
    dx = (hi - lo) / static_cast<double>(n);
}

std::vector<double> Grid::node_points() const {
    std::vector<double> x(nodes());
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = node(i);
    return x;
}

std::vector<double> Grid::cell_points() const {
    std::vector<double> x(cells);
    for (std::size_t c = 0; c < x.size(); ++c) x[c] = cell(c);
    return x;
}

double SimState::min_v() const { return *std::min_element(v.begin(), v.end()); }

ProfileSamples sample_profile(const TravelingWave& wave, std::span<const double> x) {
    ProfileSamples out;
    out.v.resize(x.size());
    out.d1.resize(x.size());
    out.d2.resize(x.size());
    out.d3.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        out.v[i] = wave.value(x[i]);
        const auto d = wave.derivatives(x[i]);
        out.d1[i] = d.d1;
        out.d2[i] = d.d2;
        out.d3[i] = d.d3;
    }
    return out;
}

void solve_tridiagonal(std::vector<double> a, std::vector<double> b, std::vector<double> c, std::vector<double>& d) {
    const std::size_t n = b.size();
    if (a.size() != n || c.size() != n || d.size() != n) throw UsageError("tridiagonal: size mismatch");
    for (std::size_t i = 1; i < n; ++i) {
        if (b[i - 1] == 0.0) throw SolverError("tridiagonal: zero pivot", static_cast<double>(i - 1));
        const double m = a[i] / b[i - 1];
        b[i] -= m * c[i - 1];
        d[i] -= m * d[i - 1];
    }
    if (b[n - 1] == 0.0) throw SolverError("tridiagonal: zero pivot", static_cast<double>(n - 1));
    d[n - 1] /= b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) d[i] = (d[i] - c[i] * d[i + 1]) / b[i];
}

DiscreteBackground discrete_background(const TravelingWave& wave, const Grid& grid, double tol, int max_iter) {
    const ModelParams& p = wave.params();
    const double slack = 1e-9 * std::max(1.0, std::abs(grid.x_lo));
    if (grid.x_lo < wave.xi_lo() - slack || grid.x_hi() > wave.xi_hi() + slack)
        throw UsageError("grid extends past the solved profile domain");
    const std::size_t n = grid.cells;
    const double s = wave.speed();
    const double mu = p.mu();
    const double dx = grid.dx;
    const double vl = p.v_minus();
    const double vr = p.v_plus();
    const double pm = pressure(vl, 0, p);

    std::vector<double> sampled(n);
    for (std::size_t c = 0; c < n; ++c) sampled[c] = wave.value(grid.cell(c));
    double mass = 0.0;
    for (double x : sampled) mass += x;

    std::vector<double> v = sampled;
    double lambda = 0.0;
    auto nb = [&](std::size_t c, int off) {
        if (off < 0) return c == 0 ? vl : v[c - 1];
        return c + 1 == n ? vr : v[c + 1];
    };
    /// steady momentum-flux defect of cell c with u eliminated through the mass balance
    auto G = [&](std::size_t c) {
        const double a = nb(c, -1), b = v[c], d = nb(c, +1);
        return -s * s * ((a + 2.0 * b + d) / 4.0 - vl) - (pressure(b, 0, p) - pm) - mu * s * (d - a) / (2.0 * dx * b);
    };

    DiscreteBackground out;
    out.grid = grid;
    out.speed = s;
    const auto iLam = static_cast<Eigen::Index>(n);
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    Eigen::VectorXd rhs(iLam + 1);
    int it = 0;
    double res = 0.0;
    for (; it < max_iter; ++it) {
        res = 0.0;
        double msum = 0.0;
        for (std::size_t c = 0; c < n; ++c) {
            const double r = G(c) + lambda;
            rhs[static_cast<Eigen::Index>(c)] = -r;
            res = std::max(res, std::abs(r));
            msum += v[c];
        }
        rhs[iLam] = -(msum - mass);
        if (res < tol) break;

        std::vector<Eigen::Triplet<double>> trip;
        trip.reserve(5 * n);
        for (std::size_t c = 0; c < n; ++c) {
            const auto i = static_cast<Eigen::Index>(c);
            const double a = nb(c, -1), b = v[c], d = nb(c, +1);
            if (c > 0) trip.emplace_back(i, i - 1, -s * s / 4.0 + mu * s / (2.0 * dx * b));
            trip.emplace_back(i, i, -s * s / 2.0 - pressure(b, 1, p) + mu * s * (d - a) / (2.0 * dx * b * b));
            if (c + 1 < n) trip.emplace_back(i, i + 1, -s * s / 4.0 - mu * s / (2.0 * dx * b));
            trip.emplace_back(i, iLam, 1.0);
            trip.emplace_back(iLam, i, 1.0);
        }
        Eigen::SparseMatrix<double> J(iLam + 1, iLam + 1);
        J.setFromTriplets(trip.begin(), trip.end());
        lu.compute(J);
        if (lu.info() != Eigen::Success) throw SolverError("discrete background: singular Newton matrix", it);
        const Eigen::VectorXd dv = lu.solve(rhs);
        // keep every cell strictly on the free side of the constraint
        double theta = 1.0;
        for (std::size_t c = 0; c < n; ++c) {
            const double step_c = dv[static_cast<Eigen::Index>(c)];
            if (step_c < 0.0) theta = std::min(theta, 0.5 * (v[c] - 1.0) / -step_c);
        }
        for (std::size_t c = 0; c < n; ++c) v[c] += theta * dv[static_cast<Eigen::Index>(c)];
        lambda += theta * dv[iLam];
    }
    if (res >= tol) {
        std::ostringstream os;
        os << "discrete background: Newton did not converge (residual " << res << " after " << it << " iterations)";
        throw SolverError(os.str(), res);
    }
    out.v = v;
    out.flux_offset = lambda;
    out.residual = res;
    out.newton_iterations = it;
    for (std::size_t c = 0; c < n; ++c) {
        out.max_sample_gap = std::max(out.max_sample_gap, std::abs(v[c] - sampled[c]));
        if (c > 0 && !(v[c] >= v[c - 1])) out.monotone = false;
    }
    const double um = left_velocity(p, s);
    out.u.assign(grid.nodes(), 0.0);
    // Dirichlet u from the steady mass balance, so the boundary cells are steady as well
    for (std::size_t i = 0; i <= n; ++i) out.u[i] = um + s * vl - 0.5 * s * (nb(i, -1) + (i == n ? vr : v[i]));
    return out;
}

SimState sample_wave(const TravelingWave& wave, const Grid& grid, Frame frame) {
    const ModelParams& p = wave.params();
    SimState st;
    st.grid = grid;
    st.frame = frame;
    st.speed = wave.speed();
    st.v_left = p.v_minus();
    st.v_right = p.v_plus();
    st.v.resize(grid.cells);
    for (std::size_t c = 0; c < grid.cells; ++c) st.v[c] = wave.value(grid.cell(c));
    st.u.resize(grid.nodes());
    for (std::size_t i = 0; i < grid.nodes(); ++i)
        st.u[i] = p.u_plus() + wave.speed() * (p.v_plus() - wave.value(grid.node(i)));
    st.u.front() = left_velocity(p, wave.speed());
    st.u.back() = p.u_plus();
    return st;
}

SimState background_state(const DiscreteBackground& bg, const ModelParams& params) {
    SimState st;
    st.grid = bg.grid;
    st.v = bg.v;
    st.u = bg.u;
    st.frame = Frame::CoMoving;
    st.speed = bg.speed;
    st.v_left = params.v_minus();
    st.v_right = params.v_plus();
    return st;
}

RealizedPerturbation realize_perturbation(const PerturbationSpec& spec, const Grid& grid) {
    RealizedPerturbation out;
    out.dv.assign(grid.cells, 0.0);
    out.du.assign(grid.nodes(), 0.0);
    const bool on_v = spec.target != PerturbationSpec::Target::U;
    const bool on_u = spec.target != PerturbationSpec::Target::V;
    if (spec.shape == PerturbationSpec::Shape::Custom) {
        if (on_v) {
            if (spec.custom_v.size() != grid.cells) throw UsageError("custom v perturbation must have one sample per cell");
            out.dv = spec.custom_v;
        }
        if (on_u) {
            if (spec.custom_u.size() != grid.nodes())
                throw UsageError("custom u perturbation must have one sample per node");
            out.du = spec.custom_u;
            out.du.front() = 0.0;
            out.du.back() = 0.0;
        }
        return out;
    }
    if (!(spec.width > 0.0)) throw UsageError("perturbation width must be positive");
    auto phi = [&](double x) { return potential(spec.shape, (x - spec.center) / spec.width); };
    const double support = spec.shape == PerturbationSpec::Shape::GaussianDipole ? 8.0 : 1.0;
    if (spec.center - support * spec.width <= grid.x_lo + grid.dx ||
        spec.center + support * spec.width >= grid.x_hi() - grid.dx)
        throw UsageError("perturbation support must lie strictly inside the grid");
    if (on_v) {
        for (std::size_t c = 0; c < grid.cells; ++c) out.dv[c] = (phi(grid.node(c + 1)) - phi(grid.node(c))) / grid.dx;
        scale_to(out.dv, spec.amplitude);
    }
    if (on_u) {
        for (std::size_t i = 1; i + 1 < grid.nodes(); ++i) out.du[i] = (phi(grid.cell(i)) - phi(grid.cell(i - 1))) / grid.dx;
        scale_to(out.du, spec.amplitude);
    }
    return out;
}

double amplitude_budget(const ModelParams& params, double delta0) {
    return delta0 * std::pow(params.epsilon(), 2.5 / params.gamma());
}

SimState init_state(const SimState& reference, const PerturbationSpec& pert, const ModelParams& params,
                    InitReport* report) {
    const RealizedPerturbation r = realize_perturbation(pert, reference.grid);
    SimState st = reference;
    for (std::size_t c = 0; c < st.v.size(); ++c) st.v[c] += r.dv[c];
    for (std::size_t i = 0; i < st.u.size(); ++i) st.u[i] += r.du[i];
    check_congestion(st);
    if (report) {
        report->min_v_margin = st.min_v() - 1.0;
        const double budget = amplitude_budget(params);
        report->above_budget = pert.shape != PerturbationSpec::Shape::Custom && pert.amplitude > budget;
        if (report->above_budget) {
            std::ostringstream os;
            os << "perturbation amplitude " << pert.amplitude << " exceeds the small-data scale 0.1 eps^(5/(2 gamma)) = "
               << budget << "; running outside the theory";
            report->warning = os.str();
        }
    }
    return st;
}

void SchemeConfig::validate() const {
    if (dt_control == DtControl::Cfl && !(safety > 0.0 && safety <= 1.0))
        throw UsageError("scheme.safety must lie in (0, 1]");
    if (dt_control == DtControl::Fixed && !(dt > 0.0)) throw UsageError("scheme.dt must be positive");
}

double stable_dt(const SimState& state, const SchemeConfig& config, const ModelParams& params) {
    config.validate();
    if (config.dt_control == SchemeConfig::DtControl::Fixed) return config.dt;
    const double vmin = std::min(state.min_v(), state.v_left);
    const double vmax = std::max(*std::max_element(state.v.begin(), state.v.end()), state.v_right);
    const double stiff = std::abs(pressure(vmin, 1, params)) * vmax;
    const double acoustic = state.grid.dx / std::sqrt(stiff);
    const double relax = params.mu() / stiff;
    return config.safety * std::min(acoustic, relax);
}

void step(SimState& st, double dt, const ModelParams& params) {
    const std::size_t n = st.grid.cells;
    const double dx = st.grid.dx;
    const double k = st.frame == Frame::CoMoving ? dt * st.speed / (2.0 * dx) : 0.0;

    // v: (1 - dt s D0) v^{n+1} = v^n + dt (u_{i+1} - u_i) / dx
    {
        std::vector<double> a(n, k), b(n, 1.0), c(n, -k), d(n);
        for (std::size_t j = 0; j < n; ++j) d[j] = st.v[j] + dt * (st.u[j + 1] - st.u[j]) / dx;
        d.front() -= k * st.v_left;
        d.back() += k * st.v_right;
        solve_tridiagonal(std::move(a), std::move(b), std::move(c), d);
        st.v = std::move(d);
    }
    st.t += dt;
    check_congestion(st);

    // u at interior nodes: implicit viscosity and advection, pressure from the new v
    const std::size_t m = n - 1;
    std::vector<double> a(m), b(m), c(m), d(m);
    std::vector<double> pc(n);
    for (std::size_t j = 0; j < n; ++j) pc[j] = pressure(st.v[j], 0, params);
    const double mu = params.mu();
    for (std::size_t r = 0; r < m; ++r) {
        const std::size_t i = r + 1;
        const double al = dt * mu / (dx * dx * st.v[i - 1]);
        const double ar = dt * mu / (dx * dx * st.v[i]);
        a[r] = -al + k;
        b[r] = 1.0 + al + ar;
        c[r] = -ar - k;
        d[r] = st.u[i] - dt * (pc[i] - pc[i - 1]) / dx;
    }
    d.front() -= a.front() * st.u.front();
    d.back() -= c.back() * st.u.back();
    solve_tridiagonal(std::move(a), std::move(b), std::move(c), d);
    std::copy(d.begin(), d.end(), st.u.begin() + 1);
}

std::vector<double> effective_velocity(const SimState& st, const ModelParams& params) {
    const std::size_t n = st.grid.cells;
    std::vector<double> w(st.u.size());
    for (std::size_t i = 0; i <= n; ++i) {
        const double vl = i == 0 ? st.v_left : st.v[i - 1];
        const double vr = i == n ? st.v_right : st.v[i];
        w[i] = st.u[i] - params.mu() * std::log1p((vr - vl) / vl) / st.grid.dx;
    }
    return w;
}

IntegratedState integrated_perturbation(const SimState& st, const SimState& ref, const ModelParams& params,
                                        double tol) {
    if (st.grid.cells != ref.grid.cells || st.grid.dx != ref.grid.dx || st.grid.x_lo != ref.grid.x_lo)
        throw UsageError("integrated_perturbation: state and reference grids differ");
    const std::size_t n = st.grid.cells;
    const double dx = st.grid.dx;
    IntegratedState out;
    out.grid = st.grid;
    out.V.assign(n + 1, 0.0);
    for (std::size_t c = 0; c < n; ++c) out.V[c + 1] = out.V[c] + (st.v[c] - ref.v[c]) * dx;
    const auto w = effective_velocity(st, params);
    const auto wr = effective_velocity(ref, params);
    out.W.assign(n, 0.0);
    double acc = 0.0;
    for (std::size_t i = 0; i <= n; ++i) {
        acc += (w[i] - wr[i]) * dx;
        if (i < n) out.W[i] = acc;
    }
    out.defect_W = acc;
    out.defect_V = out.V.back();
    if (std::abs(out.defect_W) > tol || std::abs(out.defect_V) > tol) {
        std::ostringstream os;
        os << "perturbation has nonzero mass (w: " << out.defect_W << ", v: " << out.defect_V << ", tolerance " << tol
           << "); integrated variables do not vanish at the right end";
        throw MassDefectError(os.str(), out.defect_W, out.defect_V);
    }
    return out;
}

LinearizedCoefficients linearized_coefficients(const TravelingWave& wave, const Grid& grid) {
    const ModelParams& p = wave.params();
    LinearizedCoefficients co;
    co.grid = grid;
    co.speed = wave.speed();
    const auto xc = grid.cell_points();
    const ProfileSamples ps = sample_profile(wave, xc);
    co.p1.resize(grid.cells);
    co.inv_v.resize(grid.cells);
    co.dissipation_weight.resize(grid.cells);
    for (std::size_t c = 0; c < grid.cells; ++c) {
        const double p1 = pressure(ps.v[c], 1, p);
        co.p1[c] = p1;
        co.inv_v[c] = 1.0 / ps.v[c];
        co.dissipation_weight[c] = co.speed * pressure(ps.v[c], 2, p) * ps.d1[c] / (p1 * p1);
    }
    return co;
}

void step_linearized(LinearizedState& st, const LinearizedCoefficients& co, double dt, const ModelParams& params) {
    const std::size_t n = st.grid.cells;
    const double dx = st.grid.dx;
    const double k = dt * co.speed / (2.0 * dx);
    {
        std::vector<double> a(n, k), b(n, 1.0), c(n, -k), d(n);
        for (std::size_t j = 0; j < n; ++j) d[j] = st.W[j] - dt * co.p1[j] * (st.V[j + 1] - st.V[j]) / dx;
        solve_tridiagonal(std::move(a), std::move(b), std::move(c), d);
        st.W = std::move(d);
    }
    const std::size_t m = n - 1;
    std::vector<double> a(m), b(m), c(m), d(m);
    const double mu = params.mu();
    for (std::size_t r = 0; r < m; ++r) {
        const std::size_t i = r + 1;
        const double al = dt * mu * co.inv_v[i - 1] / (dx * dx);
        const double ar = dt * mu * co.inv_v[i] / (dx * dx);
        a[r] = -al + k;
        b[r] = 1.0 + al + ar;
        c[r] = -ar - k;
        d[r] = st.V[i] + dt * (st.W[i] - st.W[i - 1]) / dx;
    }
    solve_tridiagonal(std::move(a), std::move(b), std::move(c), d);
    std::copy(d.begin(), d.end(), st.V.begin() + 1);
    st.V.front() = 0.0;
    st.V.back() = 0.0;
    st.t += dt;
}

double linearized_energy(const LinearizedState& st, const LinearizedCoefficients& co) {
    double e = 0.0;
    for (std::size_t c = 0; c < st.W.size(); ++c) e += -st.W[c] * st.W[c] / co.p1[c];
    for (double x : st.V) e += x * x;
    return e * st.grid.dx;
}

double linearized_dissipation_rate(const LinearizedState& st, const LinearizedCoefficients& co,
                                   const ModelParams& params) {
    const double dx = st.grid.dx;
    double r = 0.0;
    for (std::size_t c = 0; c < st.W.size(); ++c) {
        const double dV = (st.V[c + 1] - st.V[c]) / dx;
        r += co.dissipation_weight[c] * st.W[c] * st.W[c] + 2.0 * params.mu() * dV * dV * co.inv_v[c];
    }
    return r * dx;
}

}  // namespace cfront

#pragma once

/// @file sim.hpp
/// @brief Semi-implicit finite differences for the Lagrangian Navier-Stokes
/// system with singular pressure, around a traveling wave.
///
/// Staggered grid on [x_lo, x_lo + cells dx]: velocity u and effective
/// velocity w live on the cells + 1 nodes, specific volume v on the cells.
/// In the co-moving frame both equations carry the advection term s d/dx.
/// The integrated perturbation V lives on nodes and W on cells, so that
/// the discrete derivative of V is exactly the cell perturbation of v.

#include "cfront/pressure.hpp"
#include "cfront/profile.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace cfront {

struct Grid {
    double x_lo = 0.0;
    double dx = 0.0;
    std::size_t cells = 0;

    Grid() = default;
    /// Uniform grid with `cells` cells covering [x_lo, x_hi].
    Grid(double x_lo, double x_hi, std::size_t cells);

    std::size_t nodes() const { return cells + 1; }
    double x_hi() const { return x_lo + dx * static_cast<double>(cells); }
    double node(std::size_t i) const { return x_lo + dx * static_cast<double>(i); }
    double cell(std::size_t c) const { return x_lo + dx * (static_cast<double>(c) + 0.5); }
    std::vector<double> node_points() const;
    std::vector<double> cell_points() const;
};

enum class Frame { Lab, CoMoving };

struct SimState {
    Grid grid;
    std::vector<double> v;  ///< cells
    std::vector<double> u;  ///< nodes; u.front(), u.back() are Dirichlet data
    double t = 0.0;
    Frame frame = Frame::CoMoving;
    double speed = 0.0;     ///< s_eps; only used by the co-moving frame
    double v_left = 0.0;    ///< ghost volume left of cell 0
    double v_right = 0.0;   ///< ghost volume right of the last cell
    double min_v() const;
};

/// Profile values and analytic xi-derivatives at a set of points.
struct ProfileSamples {
    std::vector<double> v, d1, d2, d3;
};
ProfileSamples sample_profile(const TravelingWave& wave, std::span<const double> x);

/// Exact steady state of the co-moving scheme with the same discrete mass
/// as the sampled wave. A centered discrete front cannot join v_minus to
/// v_plus exactly: the momentum flux carries a small constant
/// `flux_offset`, and the Dirichlet velocities u.front(), u.back() are
/// taken from the steady mass balance, off u_minus, u_plus by O(flux_offset).
struct DiscreteBackground {
    Grid grid;
    std::vector<double> v;  ///< cells
    std::vector<double> u;  ///< nodes
    double speed = 0.0;
    double flux_offset = 0.0;
    double residual = 0.0;  ///< max |steady residual| over cells after Newton
    int newton_iterations = 0;
    double max_sample_gap = 0.0;  ///< max |v - sampled wave| over cells
    bool monotone = true;
};

/// Newton iteration on the steady scheme, bordered by a mass constraint.
/// Throws SolverError if Newton stalls and UsageError if the grid extends
/// past the tabulated profile.
DiscreteBackground discrete_background(const TravelingWave& wave, const Grid& grid, double tol = 1e-13,
                                       int max_iter = 50);

/// Plain sampling of the wave: v at cells, u = u_plus + s (v_plus - v) at nodes.
SimState sample_wave(const TravelingWave& wave, const Grid& grid, Frame frame);

/// Background as a state (t = 0, co-moving frame).
SimState background_state(const DiscreteBackground& bg, const ModelParams& params);

struct PerturbationSpec {
    enum class Shape { GaussianDipole, CompactBump, Custom };
    enum class Target { V, U, Both };
    Shape shape = Shape::GaussianDipole;
    Target target = Target::Both;
    double center = 0.0;
    double width = 1.0;
    double amplitude = 0.0;        ///< sup norm of each realized field
    std::vector<double> custom_v;  ///< Custom: raw cell samples (not mass-corrected)
    std::vector<double> custom_u;  ///< Custom: raw node samples, zero at both ends
};

/// Realized zero-mass fields on the grid: discrete derivatives of a compact
/// potential, scaled to the requested sup norm. Custom samples are passed through.
struct RealizedPerturbation {
    std::vector<double> dv;  ///< cells
    std::vector<double> du;  ///< nodes
};
RealizedPerturbation realize_perturbation(const PerturbationSpec& spec, const Grid& grid);

/// Budget amplitude scale of the small-data theory, 0.1 eps^(5/(2 gamma)).
double amplitude_budget(const ModelParams& params, double delta0 = 0.1);

struct InitReport {
    double min_v_margin = 0.0;  ///< min(v) - 1
    bool above_budget = false;
    std::string warning;
};

/// reference + perturbation. Throws CongestionViolation if min(v) <= 1.
SimState init_state(const SimState& reference, const PerturbationSpec& pert, const ModelParams& params,
                    InitReport* report = nullptr);

struct SchemeConfig {
    enum class DtControl { Fixed, Cfl };
    DtControl dt_control = DtControl::Cfl;
    double dt = 1e-3;      ///< Fixed
    double safety = 0.9;   ///< Cfl, in (0, 1]
    void validate() const;
};

/// dt from the acoustic bound dx / sqrt(max|p'| max v) and the pressure
/// relaxation bound mu / (max|p'| max v), times the safety factor.
double stable_dt(const SimState& state, const SchemeConfig& config, const ModelParams& params);

/// One semi-implicit step. v first (implicit frame advection, explicit
/// velocity divergence), then u (implicit viscosity and advection,
/// explicit pressure from the new v). Throws CongestionViolation.
void step(SimState& state, double dt, const ModelParams& params);

/// w = u - mu d/dx ln v at nodes (ghost volumes at both ends).
std::vector<double> effective_velocity(const SimState& state, const ModelParams& params);

struct IntegratedState {
    Grid grid;
    std::vector<double> W;  ///< cells: running sum of (w - w_ref) dx over nodes left of the cell
    std::vector<double> V;  ///< nodes: running sum of (v - v_ref) dx over cells left of the node
    double defect_W = 0.0;  ///< full sum of (w - w_ref) dx
    double defect_V = 0.0;  ///< full sum of (v - v_ref) dx
};

/// Integrated perturbation relative to `reference`. Throws MassDefectError
/// when either mass exceeds `tol`.
IntegratedState integrated_perturbation(const SimState& state, const SimState& reference, const ModelParams& params,
                                        double tol = 1e-10);

/// Coefficients of the linearized system sampled from the analytic profile.
struct LinearizedCoefficients {
    Grid grid;
    double speed = 0.0;
    std::vector<double> p1;  ///< p'(v_eps) at cells
    std::vector<double> inv_v;  ///< 1 / v_eps at cells
    std::vector<double> dissipation_weight;  ///< s p''(v_eps) v_eps' / p'(v_eps)^2 at cells
};
LinearizedCoefficients linearized_coefficients(const TravelingWave& wave, const Grid& grid);

struct LinearizedState {
    Grid grid;
    std::vector<double> W;  ///< cells
    std::vector<double> V;  ///< nodes, zero at both ends
    double t = 0.0;
};

/// One step of W_t - s W_x + p'(v_eps) V_x = 0, V_t - s V_x - W_x - mu (V_x / v_eps)_x = 0:
/// W first with implicit advection, then V with implicit advection and diffusion.
void step_linearized(LinearizedState& st, const LinearizedCoefficients& co, double dt, const ModelParams& params);

/// E_0 of the linearized energy identity: sum -W^2 / p' dx + sum V^2 dx.
double linearized_energy(const LinearizedState& st, const LinearizedCoefficients& co);
/// Integrand rate: sum (s p'' v' / p'^2) W^2 dx + 2 mu sum (V_x)^2 / v dx.
double linearized_dissipation_rate(const LinearizedState& st, const LinearizedCoefficients& co,
                                   const ModelParams& params);

/// Thomas algorithm for a tridiagonal system; a[0] and c[n-1] are ignored.
/// Throws SolverError on a zero pivot.
void solve_tridiagonal(std::vector<double> a, std::vector<double> b, std::vector<double> c, std::vector<double>& d);

}  // namespace cfront

#pragma once

// Full-order models: first-order Eulerian finite differences, the
// characteristic-following Lagrangian scheme, and closed-form reference
// solutions used to generate training and test data.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "lagrom/core.hpp"
#include "lagrom/lagframe.hpp"
#include "lagrom/linalg.hpp"

namespace lagrom {

struct Boundary {
    enum class Kind { periodic, dirichlet };
    Kind kind = Kind::periodic;
    double left = 0.0;
    double right = 0.0;

    static Boundary periodic() { return {}; }
    static Boundary dirichlet(double l, double r) { return {Kind::dirichlet, l, r}; }
};

/// u_t + F(u)_x = (D u_x)_x on one axis. All closures receive the parameter row.
struct AdvectionDiffusionProblem1D {
    std::function<double(double u, const Vec& mu)> flux;
    std::function<double(double u, const Vec& mu)> speed;
    std::function<double(double x, double t, double u, const Vec& mu)> diffusion;
    std::function<double(double x, const Vec& mu)> initial;
    Boundary boundary;

    /// Checks speed = dF/du by central differences at the given states.
    void check_consistency(const Vec& mu, const std::vector<double>& samples, double tol = 1e-6) const {
        for (double u : samples) {
            const double h = 1e-6 * std::max(1.0, std::abs(u));
            const double fd = (flux(u + h, mu) - flux(u - h, mu)) / (2 * h);
            if (std::abs(fd - speed(u, mu)) > tol * std::max(1.0, std::abs(fd))) {
                throw UsageError("flux derivative inconsistent with speed at u=" + std::to_string(u));
            }
        }
    }
};

struct CflReport {
    double advective = 0.0;  ///< max dt*|f|/dx (or the 2D sum)
    double diffusive = 0.0;  ///< max 2*D*dt*sum(1/dx^2)
    double max_speed = 0.0;

    std::string describe() const {
        std::ostringstream os;
        os << "advective CFL " << advective << ", diffusive number " << diffusive << ", max |f| "
           << max_speed;
        return os.str();
    }
};

class CflViolation : public NumericalError {
public:
    CflViolation(const std::string& what, CflReport report)
        : NumericalError(what + " (" + report.describe() + ")"), report_(report) {}
    const CflReport& report() const { return report_; }

private:
    CflReport report_;
};

struct SolveReport {
    CflReport cfl;
    double max_solve_residual = 0.0;  ///< max ||A u - rhs||_inf / ||rhs||_inf over implicit solves
    int steps = 0;
};

struct SolveResult {
    SnapshotSet snapshots;
    SolveReport report;
};

/// How the Lagrangian schemes bring the diffused Eulerian field back to the nodes.
/// increment: node += interpolated diffusion increment (no remap error; with
///            D = 0 node values stay frozen exactly).
/// remap:     node = interpolated diffused field, the literal L->E->L cycle;
///            the interpolation adds grid-scale dissipation every step.
enum class LagrangianUpdate { increment, remap };

inline LagrangianUpdate lagrangian_update_from_string(const std::string& s) {
    if (s == "increment") return LagrangianUpdate::increment;
    if (s == "remap") return LagrangianUpdate::remap;
    throw UsageError("unknown Lagrangian update '" + s + "'");
}

struct SolverOptions {
    int substeps = 1;  ///< solver steps per output interval
    LagrangianUpdate update = LagrangianUpdate::increment;
    /// Lagrangian grids are declared tangled when a neighbour gap falls below
    /// -tangle_tolerance * dx (1D) or a cell area below -tangle_tolerance * dx*dy (2D).
    double tangle_tolerance = 1e-10;
};

namespace detail {

inline void check_finite(const Vec& v, int step, const char* what) {
    if (!v.allFinite()) {
        throw NumericalError(std::string("non-finite ") + what + " at step " + std::to_string(step));
    }
}

inline ParamSet require_single(const ParamSet& p) {
    if (p.count() != 1) throw UsageError("solver takes exactly one parameter row");
    return p;
}

// One implicit diffusion step (I - dt/dx^2 * div D grad) u_new = rhs on the
// Eulerian axis. D evaluated at (x_j, t_new, rhs_j); faces average neighbours.
inline Vec implicit_diffusion(const AdvectionDiffusionProblem1D& p, const Axis& ax, const Vec& rhs,
                              double t_new, double dt, const Vec& mu, double& residual) {
    const int m = ax.points;
    const double h = ax.spacing();
    const bool periodic = p.boundary.kind == Boundary::Kind::periodic;
    std::vector<double> d(static_cast<std::size_t>(m + 2));
    double dmax = 0.0;
    for (int j = -1; j <= m; ++j) {
        double u;
        if (j < 0) u = periodic ? rhs[m - 1] : p.boundary.left;
        else if (j >= m) u = periodic ? rhs[0] : p.boundary.right;
        else u = rhs[j];
        const double dj = p.diffusion(ax.lo + j * h, t_new, u, mu);
        if (!(dj >= 0.0)) throw UsageError("diffusion coefficient must be non-negative");
        d[static_cast<std::size_t>(j + 1)] = dj;
        dmax = std::max(dmax, dj);
    }
    if (dmax == 0.0) {
        residual = 0.0;
        return rhs;
    }
    if (periodic) {
        // ghosts wrap: D_{-1} = D_{m-1}, D_{m} = D_0
        d[0] = d[static_cast<std::size_t>(m)];
        d[static_cast<std::size_t>(m + 1)] = d[1];
    }
    const double r = dt / (h * h);
    linalg::Tridiagonal t(static_cast<std::size_t>(m));
    std::vector<double> b(rhs.data(), rhs.data() + m);
    for (int j = 0; j < m; ++j) {
        const double dm = 0.5 * (d[static_cast<std::size_t>(j)] + d[static_cast<std::size_t>(j + 1)]);
        const double dp = 0.5 * (d[static_cast<std::size_t>(j + 1)] + d[static_cast<std::size_t>(j + 2)]);
        const auto js = static_cast<std::size_t>(j);
        t.diag[js] = 1.0 + r * (dm + dp);
        t.lower[js] = -r * dm;
        t.upper[js] = -r * dp;
    }
    std::vector<double> x;
    if (periodic) {
        x = linalg::solve_cyclic(t, b);
        residual = linalg::residual_inf(t, x, b, true);
    } else {
        b[0] -= t.lower[0] * p.boundary.left;
        b[static_cast<std::size_t>(m - 1)] -= t.upper[static_cast<std::size_t>(m - 1)] * p.boundary.right;
        x = linalg::solve_thomas(t, b);
        residual = linalg::residual_inf(t, x, b, false);
    }
    double bnorm = 0.0;
    for (double v : b) bnorm = std::max(bnorm, std::abs(v));
    residual = bnorm > 0.0 ? residual / bnorm : residual;
    return Eigen::Map<const Vec>(x.data(), m);
}

}  // namespace detail

/// Upwind-flux explicit advection with implicit diffusion (first-order IMEX).
inline SolveResult solve_eulerian_1d(const AdvectionDiffusionProblem1D& p, const Grid& g,
                                     const TimeAxis& times, const ParamSet& mu_set,
                                     const SolverOptions& opt = {}) {
    if (g.dim() != 1) throw UsageError("1D solver needs a 1D grid");
    const ParamSet ps = detail::require_single(mu_set);
    const Vec mu = ps.row(0);
    const Axis& ax = g.axis(0);
    if ((p.boundary.kind == Boundary::Kind::periodic) != ax.periodic) {
        throw UsageError("boundary kind must match the grid's periodic flag");
    }
    const int m = ax.points;
    const double h = ax.spacing();
    const int sub = std::max(1, opt.substeps);
    const double dt = times.dt / sub;
    const double lam = dt / h;
    const bool periodic = ax.periodic;

    Vec u(m);
    for (int j = 0; j < m; ++j) u[j] = p.initial(ax.node(j), mu);
    detail::check_finite(u, 0, "initial state");

    Mat out(m, times.count);
    out.col(0) = u;
    SolveReport rep;
    Vec ue(m + 2), face(m + 1), ustar(m);
    for (int k = 1; k < times.count; ++k) {
        for (int s = 0; s < sub; ++s) {
            const int step = (k - 1) * sub + s;
            const double t_new = times.t0 + (step + 1) * dt;
            ue[0] = periodic ? u[m - 1] : p.boundary.left;
            ue[m + 1] = periodic ? u[0] : p.boundary.right;
            ue.segment(1, m) = u;
            double fmax = 0.0;
            for (int j = 0; j < m + 2; ++j) fmax = std::max(fmax, std::abs(p.speed(ue[j], mu)));
            rep.cfl.max_speed = std::max(rep.cfl.max_speed, fmax);
            rep.cfl.advective = std::max(rep.cfl.advective, lam * fmax);
            if (lam * fmax > 1.0) throw CflViolation("CFL violation at step " + std::to_string(step), rep.cfl);
            // face k sits between ue[k] and ue[k+1]
            for (int f = 0; f <= m; ++f) {
                const double ul = ue[f];
                const double ur = ue[f + 1];
                const double fl = p.flux(ul, mu);
                const double fr = p.flux(ur, mu);
                double a;
                if (std::abs(ur - ul) < 1e-14 * std::max(1.0, std::abs(ul))) a = p.speed(ul, mu);
                else a = (fr - fl) / (ur - ul);
                face[f] = 0.5 * (fr + fl) - 0.5 * std::abs(a) * (ur - ul);
            }
            for (int j = 0; j < m; ++j) ustar[j] = u[j] - lam * (face[j + 1] - face[j]);
            double res = 0.0;
            u = detail::implicit_diffusion(p, ax, ustar, t_new, dt, mu, res);
            rep.max_solve_residual = std::max(rep.max_solve_residual, res);
            for (int j = 0; j < m; ++j) {
                const double dd = p.diffusion(ax.node(j), t_new, u[j], mu);
                rep.cfl.diffusive = std::max(rep.cfl.diffusive, 2.0 * dd * dt / (h * h));
            }
            detail::check_finite(u, step + 1, "state");
            ++rep.steps;
        }
        out.col(k) = u;
    }
    return {SnapshotSet::from_trajectories(g, ps, times, Frame::eulerian, {"u"}, {out}), rep};
}

/// Characteristic-following scheme: diffuse on the Eulerian grid, bring the
/// result back to the nodes (see LagrangianUpdate), advance nodes by the
/// trapezoidal rule. Steps where the diffusion is identically zero leave node
/// values untouched in either mode.
inline SolveResult solve_lagrangian_1d(const AdvectionDiffusionProblem1D& p, const Grid& g,
                                       const TimeAxis& times, const ParamSet& mu_set,
                                       const SolverOptions& opt = {}) {
    if (g.dim() != 1) throw UsageError("1D solver needs a 1D grid");
    const ParamSet ps = detail::require_single(mu_set);
    const Vec mu = ps.row(0);
    const Axis& ax = g.axis(0);
    if ((p.boundary.kind == Boundary::Kind::periodic) != ax.periodic) {
        throw UsageError("boundary kind must match the grid's periodic flag");
    }
    const int m = ax.points;
    const double h = ax.spacing();
    const int sub = std::max(1, opt.substeps);
    const double dt = times.dt / sub;

    Vec chi = g.coordinates(0);
    Vec u(m);
    for (int j = 0; j < m; ++j) u[j] = p.initial(ax.node(j), mu);
    detail::check_finite(u, 0, "initial state");

    Mat out(2 * m, times.count);
    out.col(0) << chi, u;
    SolveReport rep;
    const ReconstructOptions ropt{opt.tangle_tolerance, 1e-9, 8};
    for (int k = 1; k < times.count; ++k) {
        for (int s = 0; s < sub; ++s) {
            const int step = (k - 1) * sub + s;
            const double t_new = times.t0 + (step + 1) * dt;
            Vec f0(m);
            for (int j = 0; j < m; ++j) f0[j] = p.speed(u[j], mu);
            const double fmax = f0.cwiseAbs().maxCoeff();
            rep.cfl.max_speed = std::max(rep.cfl.max_speed, fmax);
            rep.cfl.advective = std::max(rep.cfl.advective, dt * fmax / h);
            if (dt * fmax / h > 1.0) throw CflViolation("CFL violation at step " + std::to_string(step), rep.cfl);

            const LagrangianState st{g, {chi}, {u}};
            const Vec ut = reconstruct_eulerian(st, g, ReconstructMethod::linear, ropt)[0];
            double res = 0.0;
            const Vec ut_new = detail::implicit_diffusion(p, ax, ut, t_new, dt, mu, res);
            rep.max_solve_residual = std::max(rep.max_solve_residual, res);
            const Vec inc = ut_new - ut;
            Vec u_new = u;
            if (inc.cwiseAbs().maxCoeff() > 0.0) {
                if (opt.update == LagrangianUpdate::remap) u_new = interp_grid_to_points(ut_new, ax, chi);
                else u_new += interp_grid_to_points(inc, ax, chi);
            }
            for (int j = 0; j < m; ++j) {
                const double dd = p.diffusion(ax.node(j), t_new, ut_new[j], mu);
                rep.cfl.diffusive = std::max(rep.cfl.diffusive, 2.0 * dd * dt / (h * h));
            }
            Vec f1(m);
            for (int j = 0; j < m; ++j) f1[j] = p.speed(u_new[j], mu);
            chi += 0.5 * dt * (f0 + f1);
            u = u_new;
            detail::check_finite(u, step + 1, "state");
            detail::check_finite(chi, step + 1, "coordinates");
            const double gap = min_gap_1d(chi);
            if (gap < -opt.tangle_tolerance * h) {
                throw NumericalError("Lagrangian grid tangled at step " + std::to_string(step + 1) +
                                     " (min gap " + std::to_string(gap) + ")");
            }
            ++rep.steps;
        }
        out.col(k) << chi, u;
    }
    return {SnapshotSet::from_trajectories(g, ps, times, Frame::lagrangian, {"chi", "u"}, {out}), rep};
}

// ---------------------------------------------------------------------------
// Closed-form solutions

/// Viscous Burgers on x >= 0: u = (x/(t+1)) / (1 + sqrt((t+1)/t0) exp(Re x^2/(4t+4))),
/// t0 = exp(Re/8). Evaluated in log space so large Re does not overflow.
inline double burgers1d_exact(double x, double t, double re) {
    const double tp = t + 1.0;
    // sqrt((t+1)/t0) * exp(Re x^2 / (4t+4)) = exp(0.5 log(t+1) - Re/16 + Re x^2/(4(t+1)))
    const double e = 0.5 * std::log(tp) - re / 16.0 + re * x * x / (4.0 * tp);
    if (e > 700.0) return (x / tp) * std::exp(-e);
    return (x / tp) / (1.0 + std::exp(e));
}

inline Vec burgers1d_exact(const Vec& x, double t, double re) {
    if (!(re > 0.0) || t < 0.0) throw UsageError("burgers1d_exact needs Re > 0 and t >= 0");
    Vec u(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) u[i] = burgers1d_exact(x[i], t, re);
    return u;
}

/// Standard normal CDF via erfc.
inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Translated, heat-smoothed window: F((x-t-0.35)/s) - F((x-t-0.65)/s), s = sqrt(2 mu (t+sigma0)).
inline Vec advdiff1d_exact(const Vec& x, double t, double mu, double sigma0) {
    if (!(mu > 0.0) || !(sigma0 > 0.0)) throw UsageError("advdiff1d_exact needs mu > 0 and sigma0 > 0");
    const double s = std::sqrt(2.0 * mu * (t + sigma0));
    Vec u(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double y = x[i] - t;
        u[i] = normal_cdf((y - 0.35) / s) - normal_cdf((y - 0.65) / s);
    }
    return u;
}

/// Lagrangian frame of the analytic viscous Burgers solution: nodes follow
/// d chi/dt = u(chi, t) (RK4, `substeps` per output interval), values are the
/// analytic solution at the nodes.
inline SnapshotSet burgers1d_lagrangian_exact(const Grid& g, const TimeAxis& times, double re,
                                              int substeps = 40, const std::string& name = "Re") {
    if (g.dim() != 1) throw UsageError("1D grid required");
    Vec chi = g.coordinates(0);
    const Eigen::Index m = chi.size();
    Mat out(2 * m, times.count);
    auto vel = [re](const Vec& x, double t) { return burgers1d_exact(x, t, re); };
    double t = times.t0;
    out.col(0) << chi, vel(chi, t);
    const double h = times.dt / substeps;
    for (int k = 1; k < times.count; ++k) {
        for (int s = 0; s < substeps; ++s) {
            const double ts = times.t0 + ((k - 1) * substeps + s) * h;
            const Vec k1 = vel(chi, ts);
            const Vec k2 = vel(chi + 0.5 * h * k1, ts + 0.5 * h);
            const Vec k3 = vel(chi + 0.5 * h * k2, ts + 0.5 * h);
            const Vec k4 = vel(chi + h * k3, ts + h);
            chi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        t = times.instant(k);
        out.col(k) << chi, vel(chi, t);
    }
    return SnapshotSet::from_trajectories(g, ParamSet::scalar(name, {re}), times, Frame::lagrangian,
                                          {"chi", "u"}, {out});
}

inline SnapshotSet burgers1d_eulerian_exact(const Grid& g, const TimeAxis& times, double re,
                                            const std::string& name = "Re") {
    const Vec x = g.coordinates(0);
    Mat out(x.size(), times.count);
    for (int k = 0; k < times.count; ++k) out.col(k) = burgers1d_exact(x, times.instant(k), re);
    return SnapshotSet::from_trajectories(g, ParamSet::scalar(name, {re}), times, Frame::eulerian, {"u"}, {out});
}

/// Exact solution of the periodic 2D advection-diffusion problem with the
/// Gaussian exp(-|x - c|^2 / w) initial state: the heat kernel widens the
/// Gaussian to w + 4Dt and the centre moves with (cos theta, sin theta).
/// Periodic images within `images` periods in each direction are summed.
inline Vec advdiff2d_exact(const Grid& g, double t, double theta, double d, double cx = 2.0, double cy = 2.0,
                           double w = 0.1, int images = 1) {
    if (g.dim() != 2) throw UsageError("advdiff2d_exact needs a 2D grid");
    if (!(d >= 0.0) || !(w > 0.0)) throw UsageError("advdiff2d_exact needs D >= 0 and w > 0");
    const Vec x = g.coordinates(0);
    const Vec y = g.coordinates(1);
    const double lx = g.axis(0).length();
    const double ly = g.axis(1).length();
    const double wt = w + 4.0 * d * t;
    const double amp = w / wt;
    const double px = cx + t * std::cos(theta);
    const double py = cy + t * std::sin(theta);
    Vec u = Vec::Zero(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        for (int a = -images; a <= images; ++a) {
            for (int b = -images; b <= images; ++b) {
                const double dx = x[i] - px + a * lx;
                const double dy = y[i] - py + b * ly;
                u[i] += amp * std::exp(-(dx * dx + dy * dy) / wt);
            }
        }
    }
    return u;
}

// ---------------------------------------------------------------------------
// Problem factories

namespace problems {

/// u_t + c u_x = D u_xx with a fixed initial profile.
inline AdvectionDiffusionProblem1D linear_advection(double c, std::function<double(double)> u0,
                                                    double diffusion = 0.0,
                                                    Boundary bc = Boundary::periodic()) {
    AdvectionDiffusionProblem1D p;
    p.flux = [c](double u, const Vec&) { return c * u; };
    p.speed = [c](double, const Vec&) { return c; };
    p.diffusion = [diffusion](double, double, double, const Vec&) { return diffusion; };
    p.initial = [u0 = std::move(u0)](double x, const Vec&) { return u0(x); };
    p.boundary = bc;
    return p;
}

/// Localized pulse 0.5 exp(-(x-0.3)^2/0.005^2) advected at unit speed on periodic [0, 2].
inline AdvectionDiffusionProblem1D pulse_advection() {
    return linear_advection(1.0, [](double x) { return 0.5 * std::exp(-(x - 0.3) * (x - 0.3) / (0.005 * 0.005)); });
}

/// Unit-speed transport of a jump entering from the left: u(x,0)=0, u(0,t)=1.
inline AdvectionDiffusionProblem1D jump_transport() {
    return linear_advection(1.0, [](double) { return 0.0; }, 0.0, Boundary::dirichlet(1.0, 0.0));
}

/// Viscous Burgers, F = u^2/2, D = 1/Re with Re = mu[0]; initial data is the
/// analytic profile at t = 0; Dirichlet zero at both ends.
inline AdvectionDiffusionProblem1D viscous_burgers() {
    AdvectionDiffusionProblem1D p;
    p.flux = [](double u, const Vec&) { return 0.5 * u * u; };
    p.speed = [](double u, const Vec&) { return u; };
    p.diffusion = [](double, double, double, const Vec& mu) { return 1.0 / mu[0]; };
    p.initial = [](double x, const Vec& mu) { return burgers1d_exact(x, 0.0, mu[0]); };
    p.boundary = Boundary::dirichlet(0.0, 0.0);
    return p;
}

}  // namespace problems

// ---------------------------------------------------------------------------
// Two-dimensional problems (periodic in both axes)

struct Problem2D {
    enum class Kind { advection_diffusion, burgers };
    Kind kind = Kind::advection_diffusion;
    double theta = 0.0;      ///< advection direction (advection_diffusion)
    double diffusion = 0.0;  ///< D or nu
    std::function<double(double x, double y)> u0;
    std::function<double(double x, double y)> v0;  ///< burgers only

    int n_states() const { return kind == Kind::burgers ? 2 : 1; }

    static Problem2D advection_diffusion(double theta, double d, std::function<double(double, double)> u0) {
        if (theta < 0.0 || theta > 2.0 * std::numbers::pi + 1e-12) throw UsageError("theta must lie in [0, 2pi]");
        if (d < 0.0) throw UsageError("diffusion must be non-negative");
        return {Kind::advection_diffusion, theta, d, std::move(u0), {}};
    }

    static Problem2D burgers(double nu, std::function<double(double, double)> u0,
                             std::function<double(double, double)> v0) {
        if (nu < 0.0) throw UsageError("viscosity must be non-negative");
        return {Kind::burgers, 0.0, nu, std::move(u0), std::move(v0)};
    }
};

namespace problems {

/// Gaussian exp(-((x-2)^2+(y-2)^2)/0.1) on periodic [0,4]^2, D = 0.001.
inline Problem2D advdiff2d(double theta, double d = 0.001) {
    return Problem2D::advection_diffusion(theta, d, [](double x, double y) {
        return std::exp(-((x - 2) * (x - 2) + (y - 2) * (y - 2)) / 0.1);
    });
}

/// u = v = mu sin(pi(x-0.2)) sin(pi(y-0.2)) on [0.2,1.2]^2, plus 1, on periodic [0,5]^2.
inline Problem2D burgers2d(double mu, double nu = 0.01) {
    auto ic = [mu](double x, double y) {
        const bool inside = x >= 0.2 && x <= 1.2 && y >= 0.2 && y <= 1.2;
        return (inside ? mu * std::sin(std::numbers::pi * (x - 0.2)) * std::sin(std::numbers::pi * (y - 0.2)) : 0.0) + 1.0;
    };
    return Problem2D::burgers(nu, ic, ic);
}

/// Indicator of the disc of radius r at the origin, pure advection in direction theta.
inline Problem2D disc_advection(double theta, double radius) {
    return Problem2D::advection_diffusion(theta, 0.0, [radius](double x, double y) {
        return x * x + y * y <= radius * radius ? 1.0 : 0.0;
    });
}

}  // namespace problems

namespace detail {

inline void require_periodic_2d(const Grid& g) {
    if (g.dim() != 2 || !g.axis(0).periodic || !g.axis(1).periodic) {
        throw UsageError("2D solvers need a grid periodic in both axes");
    }
}

inline Vec laplacian_2d(const Vec& u, const Grid& g) {
    const int nx = g.axis(0).points;
    const int ny = g.axis(1).points;
    const double ix2 = 1.0 / (g.axis(0).spacing() * g.axis(0).spacing());
    const double iy2 = 1.0 / (g.axis(1).spacing() * g.axis(1).spacing());
    Vec out(u.size());
    for (int i = 0; i < nx; ++i) {
        const int ip = (i + 1) % nx, im = (i + nx - 1) % nx;
        for (int j = 0; j < ny; ++j) {
            const int jp = (j + 1) % ny, jm = (j + ny - 1) % ny;
            const double c = u[i * ny + j];
            out[i * ny + j] = (u[ip * ny + j] - 2 * c + u[im * ny + j]) * ix2 + (u[i * ny + jp] - 2 * c + u[i * ny + jm]) * iy2;
        }
    }
    return out;
}

// a * q_x + b * q_y with first-order upwinding by the sign of the local velocity.
inline double upwind_advection(const Vec& q, int i, int j, int nx, int ny, double a, double b, double hx, double hy) {
    const int ip = (i + 1) % nx, im = (i + nx - 1) % nx;
    const int jp = (j + 1) % ny, jm = (j + ny - 1) % ny;
    const double c = q[i * ny + j];
    const double qx = a >= 0 ? (c - q[im * ny + j]) / hx : (q[ip * ny + j] - c) / hx;
    const double qy = b >= 0 ? (c - q[i * ny + jm]) / hy : (q[i * ny + jp] - c) / hy;
    return a * qx + b * qy;
}

inline std::vector<Vec> initial_states_2d(const Problem2D& p, const Grid& g) {
    const Vec x = g.coordinates(0);
    const Vec y = g.coordinates(1);
    std::vector<Vec> s(static_cast<std::size_t>(p.n_states()), Vec(g.size()));
    for (Eigen::Index n = 0; n < g.size(); ++n) {
        s[0][n] = p.u0(x[n], y[n]);
        if (p.kind == Problem2D::Kind::burgers) s[1][n] = p.v0(x[n], y[n]);
    }
    return s;
}

inline void check_stability_2d(const Problem2D& p, const Grid& g, const std::vector<Vec>& s, double dt,
                               int step, CflReport& rep) {
    const double hx = g.axis(0).spacing();
    const double hy = g.axis(1).spacing();
    double ax, ay;
    if (p.kind == Problem2D::Kind::advection_diffusion) {
        ax = std::abs(std::cos(p.theta));
        ay = std::abs(std::sin(p.theta));
    } else {
        ax = s[0].cwiseAbs().maxCoeff();
        ay = s[1].cwiseAbs().maxCoeff();
    }
    const double adv = dt * (ax / hx + ay / hy);
    const double dif = 2.0 * p.diffusion * dt * (1.0 / (hx * hx) + 1.0 / (hy * hy));
    rep.max_speed = std::max(rep.max_speed, std::max(ax, ay));
    rep.advective = std::max(rep.advective, adv);
    rep.diffusive = std::max(rep.diffusive, dif);
    if (adv > 1.0 || dif > 1.0) throw CflViolation("forward-Euler stability violated at step " + std::to_string(step), rep);
}

inline std::vector<std::string> state_channels_2d(const Problem2D& p) {
    return p.kind == Problem2D::Kind::burgers ? std::vector<std::string>{"u", "v"} : std::vector<std::string>{"u"};
}

}  // namespace detail

/// Forward Euler, upwind advection, central Laplacian; Burgers components
/// advance simultaneously from the same time level.
inline SolveResult solve_eulerian_2d(const Problem2D& p, const Grid& g, const TimeAxis& times,
                                     const ParamSet& mu_set, const SolverOptions& opt = {}) {
    detail::require_periodic_2d(g);
    const ParamSet ps = detail::require_single(mu_set);
    const int nx = g.axis(0).points;
    const int ny = g.axis(1).points;
    const double hx = g.axis(0).spacing();
    const double hy = g.axis(1).spacing();
    const int sub = std::max(1, opt.substeps);
    const double dt = times.dt / sub;
    const int ns = p.n_states();
    const Eigen::Index n = g.size();

    std::vector<Vec> s = detail::initial_states_2d(p, g);
    Mat out(ns * n, times.count);
    for (int c = 0; c < ns; ++c) out.col(0).segment(c * n, n) = s[static_cast<std::size_t>(c)];
    SolveReport rep;
    const double ca = std::cos(p.theta), sa = std::sin(p.theta);
    for (int k = 1; k < times.count; ++k) {
        for (int st = 0; st < sub; ++st) {
            const int step = (k - 1) * sub + st;
            detail::check_stability_2d(p, g, s, dt, step, rep.cfl);
            std::vector<Vec> next = s;
            for (int c = 0; c < ns; ++c) {
                const Vec& q = s[static_cast<std::size_t>(c)];
                const Vec lap = p.diffusion > 0.0 ? detail::laplacian_2d(q, g) : Vec::Zero(n);
                for (int i = 0; i < nx; ++i) {
                    for (int j = 0; j < ny; ++j) {
                        const int f = i * ny + j;
                        const double a = p.kind == Problem2D::Kind::burgers ? s[0][f] : ca;
                        const double b = p.kind == Problem2D::Kind::burgers ? s[1][f] : sa;
                        next[static_cast<std::size_t>(c)][f] =
                            q[f] - dt * detail::upwind_advection(q, i, j, nx, ny, a, b, hx, hy) + dt * p.diffusion * lap[f];
                    }
                }
                detail::check_finite(next[static_cast<std::size_t>(c)], step + 1, "state");
            }
            s = std::move(next);
            ++rep.steps;
        }
        for (int c = 0; c < ns; ++c) out.col(k).segment(c * n, n) = s[static_cast<std::size_t>(c)];
    }
    return {SnapshotSet::from_trajectories(g, ps, times, Frame::eulerian, detail::state_channels_2d(p), {out}), rep};
}

/// 2D counterpart of the characteristic scheme: bilinear map to the Eulerian
/// grid, explicit diffusion step there, result brought back to the nodes
/// (see LagrangianUpdate), trapezoidal node update per axis.
inline SolveResult solve_lagrangian_2d(const Problem2D& p, const Grid& g, const TimeAxis& times,
                                       const ParamSet& mu_set, const SolverOptions& opt = {}) {
    detail::require_periodic_2d(g);
    const ParamSet ps = detail::require_single(mu_set);
    const int sub = std::max(1, opt.substeps);
    const double dt = times.dt / sub;
    const int ns = p.n_states();
    const Eigen::Index n = g.size();

    Vec chi = g.coordinates(0);
    Vec zeta = g.coordinates(1);
    std::vector<Vec> s = detail::initial_states_2d(p, g);
    const bool burgers = p.kind == Problem2D::Kind::burgers;
    const double ca = std::cos(p.theta), sa = std::sin(p.theta);
    auto velocity = [&](const std::vector<Vec>& q, Vec& a, Vec& b) {
        if (burgers) {
            a = q[0];
            b = q[1];
        } else {
            a = Vec::Constant(n, ca);
            b = Vec::Constant(n, sa);
        }
    };

    Mat out((2 + ns) * n, times.count);
    auto record = [&](int k) {
        out.col(k).segment(0, n) = chi;
        out.col(k).segment(n, n) = zeta;
        for (int c = 0; c < ns; ++c) out.col(k).segment((2 + c) * n, n) = s[static_cast<std::size_t>(c)];
    };
    record(0);
    SolveReport rep;
    const ReconstructOptions ropt{opt.tangle_tolerance, 1e-9, 8};
    for (int k = 1; k < times.count; ++k) {
        for (int st = 0; st < sub; ++st) {
            const int step = (k - 1) * sub + st;
            detail::check_stability_2d(p, g, s, dt, step, rep.cfl);
            Vec a0, b0;
            velocity(s, a0, b0);
            std::vector<Vec> next = s;
            if (p.diffusion > 0.0) {
                const LagrangianState lst{g, {chi, zeta}, s};
                const std::vector<Vec> eul = reconstruct_eulerian(lst, g, ReconstructMethod::linear, ropt);
                for (int c = 0; c < ns; ++c) {
                    const Vec& e = eul[static_cast<std::size_t>(c)];
                    const Vec inc = dt * p.diffusion * detail::laplacian_2d(e, g);
                    if (opt.update == LagrangianUpdate::remap) {
                        next[static_cast<std::size_t>(c)] = interp_grid_to_points(Vec(e + inc), g, chi, zeta);
                    } else {
                        next[static_cast<std::size_t>(c)] += interp_grid_to_points(inc, g, chi, zeta);
                    }
                }
            }
            Vec a1, b1;
            velocity(next, a1, b1);
            chi += 0.5 * dt * (a0 + a1);
            zeta += 0.5 * dt * (b0 + b1);
            s = std::move(next);
            for (int c = 0; c < ns; ++c) detail::check_finite(s[static_cast<std::size_t>(c)], step + 1, "state");
            detail::check_finite(chi, step + 1, "coordinates");
            detail::check_finite(zeta, step + 1, "coordinates");
            const double orient = min_cell_orientation_2d(chi, zeta, g);
            if (orient < -opt.tangle_tolerance) {
                throw NumericalError("Lagrangian grid tangled at step " + std::to_string(step + 1) +
                                     " (min relative cell area " + std::to_string(orient) + ")");
            }
            ++rep.steps;
        }
        record(k);
    }
    std::vector<std::string> channels{"chi", "zeta"};
    for (const auto& c : detail::state_channels_2d(p)) channels.push_back(c);
    return {SnapshotSet::from_trajectories(g, ps, times, Frame::lagrangian, channels, {out}), rep};
}

/// Stacks single-parameter solves into one set (same grid, times, frame, channels).
inline SnapshotSet concat_params(const std::vector<SnapshotSet>& sets) {
    if (sets.empty()) throw UsageError("nothing to concatenate");
    const SnapshotSet& first = sets.front();
    Mat values(0, first.params().dim());
    std::vector<Mat> traj;
    for (const SnapshotSet& s : sets) {
        if (!(s.grid() == first.grid()) || !(s.times() == first.times()) || s.frame() != first.frame() ||
            s.channels() != first.channels() || s.params().names() != first.params().names()) {
            throw UsageError("snapshot sets disagree on grid/time/frame/channels");
        }
        for (int p = 0; p < s.n_params(); ++p) {
            values.conservativeResize(values.rows() + 1, Eigen::NoChange);
            values.row(values.rows() - 1) = s.params().values().row(p);
            traj.push_back(flatten_snapshots(s, p));
        }
    }
    return SnapshotSet::from_trajectories(first.grid(), ParamSet(first.params().names(), values), first.times(),
                                          first.frame(), first.channels(), traj, first.metadata());
}

}  // namespace lagrom

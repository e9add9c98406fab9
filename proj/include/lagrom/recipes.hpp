#pragma once

// Experiment recipes shared by the command-line driver and the benchmark
// suite: parameter grids, time axes, deterministic parallel sweeps and the
// dataset builders for every supported problem in both frames.

#include <atomic>
#include <cmath>
#include <exception>
#include <functional>
#include <mutex>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "lagrom/core.hpp"
#include "lagrom/fom.hpp"

namespace lagrom::recipes {

/// Runs fn(i) for i in [0, n) on up to `jobs` threads. Results must be written
/// to per-index slots so the output order never depends on scheduling.
inline void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
    jobs = std::max(1, std::min(jobs, n));
    if (jobs == 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (int t = 0; t < jobs; ++t) {
        pool.emplace_back([&] {
            for (int i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(mu);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

/// "a:b:n" -> inclusive linspace.
inline std::vector<double> parse_param_grid(const std::string& spec) {
    const auto c1 = spec.find(':');
    const auto c2 = c1 == std::string::npos ? std::string::npos : spec.find(':', c1 + 1);
    if (c2 == std::string::npos) throw UsageError("parameter grid must look like a:b:n, got '" + spec + "'");
    try {
        std::size_t used = 0;
        const double a = std::stod(spec.substr(0, c1));
        const double b = std::stod(spec.substr(c1 + 1, c2 - c1 - 1));
        const std::string ns = spec.substr(c2 + 1);
        const int n = std::stoi(ns, &used);
        if (used != ns.size() || n < 1) throw UsageError("bad count");
        return linspace(a, b, n);
    } catch (const std::logic_error&) {
        throw UsageError("parameter grid must look like a:b:n, got '" + spec + "'");
    }
}

/// Output axis over [0, tmax]: `snapshots` instants if given, otherwise one per dt.
inline TimeAxis make_times(double tmax, int snapshots, double dt) {
    if (!(tmax > 0.0)) throw UsageError("tmax must be positive");
    if (snapshots < 1) {
        if (!(dt > 0.0)) throw UsageError("either --snapshots or --dt is required");
        snapshots = static_cast<int>(std::lround(tmax / dt)) + 1;
    }
    if (snapshots < 2) throw UsageError("need at least 2 snapshots");
    return TimeAxis(0.0, tmax / (snapshots - 1), snapshots);
}

/// Solver steps per output interval for a requested solver step (0 = one step per output).
inline int substeps_for(const TimeAxis& t, double solver_dt) {
    if (!(solver_dt > 0.0)) return 1;
    const double ratio = t.dt / solver_dt;
    const int n = static_cast<int>(std::lround(ratio));
    if (n < 1 || std::abs(ratio - n) > 1e-9 * ratio) {
        throw UsageError("solver step must divide the output interval");
    }
    return n;
}

/// `count` seeded uniform draws in [lo, hi] (deterministic for a given seed).
inline std::vector<double> seeded_uniform(int count, double lo, double hi, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::vector<double> v;
    for (int i = 0; i < count; ++i) {
        // manual affine map keeps results independent of the library's distribution code
        const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
        v.push_back(lo + (hi - lo) * u);
    }
    return v;
}

enum class Problem { adv1d, burgers1d, advdiff1d, advdiff2d, burgers2d };

inline Problem problem_from_string(const std::string& s) {
    if (s == "adv1d") return Problem::adv1d;
    if (s == "burgers1d") return Problem::burgers1d;
    if (s == "advdiff1d") return Problem::advdiff1d;
    if (s == "advdiff2d") return Problem::advdiff2d;
    if (s == "burgers2d") return Problem::burgers2d;
    throw UsageError("unknown problem '" + s + "'");
}

inline std::string param_name(Problem p) {
    switch (p) {
        case Problem::adv1d: return "c";
        case Problem::burgers1d: return "Re";
        case Problem::advdiff1d: return "mu";
        case Problem::advdiff2d: return "theta";
        case Problem::burgers2d: return "mu";
    }
    return "mu";
}

/// Default grids matching the benchmark setups.
inline Grid default_grid(Problem p, int n1, int n2) {
    switch (p) {
        case Problem::adv1d: return Grid::line(0.0, 2.0, n1 > 0 ? n1 : 128, true);
        case Problem::burgers1d: return Grid::line(0.0, 1.5, n1 > 0 ? n1 : 128, false);
        case Problem::advdiff1d: return Grid::line(0.0, 2.0, n1 > 0 ? n1 : 256, false);
        case Problem::advdiff2d:
            return Grid::plane({0.0, 4.0, n1 > 0 ? n1 : 40, true}, {0.0, 4.0, n2 > 0 ? n2 : (n1 > 0 ? n1 : 40), true});
        case Problem::burgers2d:
            return Grid::plane({0.0, 5.0, n1 > 0 ? n1 : 128, true}, {0.0, 5.0, n2 > 0 ? n2 : (n1 > 0 ? n1 : 128), true});
    }
    throw UsageError("unknown problem");
}

/// Localized pulse 0.5 exp(-(x-0.3)^2/0.005^2).
inline double pulse(double x) { return 0.5 * std::exp(-(x - 0.3) * (x - 0.3) / (0.005 * 0.005)); }

/// Exact pulse data at speed c: Eulerian periodic translate, or Lagrangian
/// (chi = x + c t unwrapped, u frozen).
inline SnapshotSet pulse_exact(const Grid& g, const TimeAxis& times, Frame frame, double c = 1.0) {
    const Axis& ax = g.axis(0);
    const Vec x = g.coordinates(0);
    const Eigen::Index n = x.size();
    Mat out(frame == Frame::lagrangian ? 2 * n : n, times.count);
    Vec u0(n);
    for (Eigen::Index j = 0; j < n; ++j) u0[j] = pulse(x[j]);
    for (int k = 0; k < times.count; ++k) {
        const double t = times.instant(k);
        if (frame == Frame::lagrangian) {
            out.col(k) << (x.array() + c * t).matrix(), u0;
        } else {
            for (Eigen::Index j = 0; j < n; ++j) {
                // nearest periodic image of the pulse centre
                const double shifted = wrap_coordinate(x[j] - c * t, ax.lo, ax.hi, true);
                out(j, k) = pulse(shifted) + pulse(shifted + ax.length()) + pulse(shifted - ax.length());
            }
        }
    }
    const std::vector<std::string> ch =
        frame == Frame::lagrangian ? std::vector<std::string>{"chi", "u"} : std::vector<std::string>{"u"};
    return SnapshotSet::from_trajectories(g, ParamSet::scalar("c", {c}), times, frame, ch, {out});
}

/// Exact smoothed-window data for diffusion mu and sigma0 at unit speed.
/// Lagrangian nodes follow chi = x + t; values are the exact solution at the nodes.
inline SnapshotSet advdiff1d_exact_set(const Grid& g, const TimeAxis& times, Frame frame, double mu, double sigma0) {
    const Vec x = g.coordinates(0);
    const Eigen::Index n = x.size();
    Mat out(frame == Frame::lagrangian ? 2 * n : n, times.count);
    for (int k = 0; k < times.count; ++k) {
        const double t = times.instant(k);
        if (frame == Frame::lagrangian) {
            const Vec chi = (x.array() + t).matrix();
            out.col(k) << chi, advdiff1d_exact(chi, t, mu, sigma0);
        } else {
            out.col(k) = advdiff1d_exact(x, t, mu, sigma0);
        }
    }
    const std::vector<std::string> ch =
        frame == Frame::lagrangian ? std::vector<std::string>{"chi", "u"} : std::vector<std::string>{"u"};
    return SnapshotSet::from_trajectories(g, ParamSet::scalar("mu", {mu}), times, frame, ch, {out});
}

/// Default node update of the Lagrangian solver per problem. The 2D Burgers
/// front is narrower than the grid, so the increment form lets nodes overtake
/// each other there; the remap form's grid-scale dissipation keeps them ordered.
inline LagrangianUpdate default_update(Problem p) {
    return p == Problem::burgers2d ? LagrangianUpdate::remap : LagrangianUpdate::increment;
}

struct BuildOptions {
    int jobs = 1;
    double solver_dt = 0.0;  ///< 0: one solver step per output interval
    double sigma0 = 0.1;     ///< advdiff1d initial smoothing time
    std::optional<LagrangianUpdate> update;  ///< unset: default_update(problem)
};

/// Snapshot set of `problem` in `frame` at every parameter value.
inline SnapshotSet build_dataset(Problem problem, Frame frame, const std::vector<double>& params, const Grid& g,
                                 const TimeAxis& times, const BuildOptions& opt = {}) {
    if (params.empty()) throw UsageError("no parameter values given");
    if (frame == Frame::latent) throw UsageError("full-order data cannot be latent");
    std::vector<std::optional<SnapshotSet>> parts(params.size());
    const std::string name = param_name(problem);
    const bool lag = frame == Frame::lagrangian;
    const int dim = (problem == Problem::advdiff2d || problem == Problem::burgers2d) ? 2 : 1;
    if (g.dim() != dim) throw UsageError("grid dimension does not match the problem");
    parallel_for(static_cast<int>(params.size()), opt.jobs, [&](int i) {
        const double mu = params[static_cast<std::size_t>(i)];
        const ParamSet ps = ParamSet::scalar(name, {mu});
        SolverOptions so;
        so.substeps = substeps_for(times, opt.solver_dt);
        so.update = opt.update.value_or(default_update(problem));
        SnapshotSet s = [&]() -> SnapshotSet {
            switch (problem) {
                case Problem::adv1d: {
                    const auto p = problems::linear_advection(mu, pulse, 0.0, Boundary::periodic());
                    return lag ? solve_lagrangian_1d(p, g, times, ps, so).snapshots
                               : solve_eulerian_1d(p, g, times, ps, so).snapshots;
                }
                case Problem::burgers1d:
                    return lag ? burgers1d_lagrangian_exact(g, times, mu, 40, name)
                               : burgers1d_eulerian_exact(g, times, mu, name);
                case Problem::advdiff1d: {
                    SnapshotSet e = advdiff1d_exact_set(g, times, frame, mu, opt.sigma0);
                    return SnapshotSet::from_trajectories(g, ps, times, frame, e.channels(), {flatten_snapshots(e, 0)});
                }
                case Problem::advdiff2d: {
                    const Problem2D p = problems::advdiff2d(mu);
                    return lag ? solve_lagrangian_2d(p, g, times, ps, so).snapshots
                               : solve_eulerian_2d(p, g, times, ps, so).snapshots;
                }
                case Problem::burgers2d: {
                    const Problem2D p = problems::burgers2d(mu);
                    return lag ? solve_lagrangian_2d(p, g, times, ps, so).snapshots
                               : solve_eulerian_2d(p, g, times, ps, so).snapshots;
                }
            }
            throw UsageError("unknown problem");
        }();
        parts[static_cast<std::size_t>(i)] = std::move(s);
    });
    std::vector<SnapshotSet> done;
    for (auto& p : parts) done.push_back(std::move(*p));
    return concat_params(done);
}

}  // namespace lagrom::recipes

#include "support.hpp"

namespace lagrom {
namespace {

using testing::observed_order;

const ParamSet kOne = ParamSet::scalar("mu", {1.0});

/// One output interval of length t, split into steps at advective CFL `cfl` for unit speed.
std::pair<TimeAxis, SolverOptions> single_interval(double t, double h, double cfl) {
    SolverOptions so;
    so.substeps = static_cast<int>(std::lround(t / (cfl * h)));
    return {TimeAxis(0.0, t, 2), so};
}

double rel(const Vec& a, const Vec& b) { return (a - b).norm() / b.norm(); }

AdvectionDiffusionProblem1D inviscid_burgers(std::function<double(double)> u0) {
    AdvectionDiffusionProblem1D p = problems::viscous_burgers();
    p.diffusion = [](double, double, double, const Vec&) { return 0.0; };
    p.initial = [u0 = std::move(u0)](double x, const Vec&) { return u0(x); };
    p.boundary = Boundary::periodic();
    return p;
}

// --- one-dimensional Eulerian scheme --------------------------------------------

TEST(Eulerian1D, ZeroDynamicsPreservesState) {
    const Grid g = Grid::line(0.0, 1.0, 64, true);
    const auto p = problems::linear_advection(0.0, [](double x) { return std::sin(2 * std::numbers::pi * x); });
    const SolveResult r = solve_eulerian_1d(p, g, TimeAxis(0.0, 0.1, 5), kOne);
    for (int k = 0; k < 5; ++k) EXPECT_EQ(Vec(r.snapshots.snapshot(0, k)), Vec(r.snapshots.snapshot(0, 0)));
}

TEST(Eulerian1D, ConstantStatePreserved) {
    const Grid g = Grid::line(0.0, 1.0, 50, true);
    const auto p = problems::linear_advection(1.0, [](double) { return 0.7; }, 1e-3);
    const SolveResult r = solve_eulerian_1d(p, g, TimeAxis(0.0, 0.01, 20), kOne);
    EXPECT_LT((r.snapshots.snapshot(0, 19).array() - 0.7).abs().maxCoeff(), 1e-13);
}

TEST(Eulerian1D, UpwindTranslateConvergesAtFirstOrder) {
    auto u0 = [](double x) { return std::exp(-(x - 0.5) * (x - 0.5) / 0.01); };
    std::vector<double> err;
    for (int n : {128, 256, 512, 1024}) {
        const Grid g = Grid::line(0.0, 2.0, n, true);
        const auto [t, so] = single_interval(0.5, g.axis(0).spacing(), 0.5);
        const SolveResult r = solve_eulerian_1d(problems::linear_advection(1.0, u0), g, t, kOne, so);
        const Vec x = g.coordinates(0);
        Vec exact(n);
        for (int j = 0; j < n; ++j) exact[j] = u0(x[j] - 0.5);
        err.push_back(testing::grid_l2(Vec(r.snapshots.snapshot(0, 1)) - exact, g.axis(0).spacing()));
    }
    for (std::size_t i = 1; i < err.size(); ++i) EXPECT_LT(err[i], err[i - 1]);
    EXPECT_NEAR(observed_order(err[2], err[3]), 1.0, 0.2);
}

TEST(Eulerian1D, PeriodicSchemeConservesMass) {
    const Grid g = Grid::line(0.0, 1.0, 100, true);
    const auto p = problems::linear_advection(
        0.8, [](double x) { return 1.0 + std::sin(2 * std::numbers::pi * x); }, 2e-3);
    const SolveResult r = solve_eulerian_1d(p, g, TimeAxis(0.0, 0.005, 60), kOne);
    const double m0 = r.snapshots.snapshot(0, 0).sum();
    for (int k = 1; k < 60; ++k) EXPECT_NEAR(r.snapshots.snapshot(0, k).sum(), m0, 1e-11 * m0);
}

TEST(Eulerian1D, MaximumPrincipleUnderCfl) {
    const Grid g = Grid::line(0.0, 2.0, 200, true);
    const SolveResult r = solve_eulerian_1d(problems::pulse_advection(), g, TimeAxis(0.0, 0.005, 100), kOne);
    const Vec first = r.snapshots.snapshot(0, 0);
    for (int k = 1; k < 100; ++k) {
        EXPECT_LE(r.snapshots.snapshot(0, k).maxCoeff(), first.maxCoeff() + 1e-15);
        EXPECT_GE(r.snapshots.snapshot(0, k).minCoeff(), first.minCoeff() - 1e-15);
    }
}

TEST(Eulerian1D, CflViolationCarriesReport) {
    const Grid g = Grid::line(0.0, 1.0, 100, true);
    const auto p = problems::linear_advection(1.0, [](double x) { return x; });
    try {
        solve_eulerian_1d(p, g, TimeAxis(0.0, 0.02, 3), kOne);
        FAIL() << "expected CflViolation";
    } catch (const CflViolation& e) {
        EXPECT_NEAR(e.report().advective, 2.0, 1e-12);
        EXPECT_EQ(e.kind(), ErrorKind::numerical);
        EXPECT_NE(std::string(e.what()).find("advective CFL"), std::string::npos);
    }
}

TEST(Eulerian1D, ImplicitSolveResidualIsNegligible) {
    const Grid g = Grid::line(0.0, 2.0, 256, false);
    const auto p = problems::linear_advection(1.0, [](double x) {
        return advdiff1d_exact((Vec(1) << x).finished(), 0.0, 1e-3, 0.1)[0];
    }, 1e-3, Boundary::dirichlet(0.0, 0.0));
    const SolveResult r = solve_eulerian_1d(p, g, TimeAxis(0.0, 0.005, 11), kOne);
    EXPECT_LE(r.report.max_solve_residual, 1e-12);
    EXPECT_EQ(r.report.steps, 10);
}

TEST(Eulerian1D, BoundaryKindMustMatchGrid) {
    const Grid g = Grid::line(0.0, 1.0, 20, false);
    const auto p = problems::linear_advection(1.0, [](double) { return 0.0; });
    EXPECT_THROW(solve_eulerian_1d(p, g, TimeAxis(0.0, 0.01, 2), kOne), UsageError);
    EXPECT_THROW(solve_lagrangian_1d(p, g, TimeAxis(0.0, 0.01, 2), kOne), UsageError);
    EXPECT_THROW(solve_eulerian_1d(p, Grid::line(0.0, 1.0, 20, true), TimeAxis(0.0, 0.01, 2),
                                   ParamSet::scalar("mu", {1.0, 2.0})),
                 UsageError);
}

TEST(Problems, FluxAndSpeedAreConsistent) {
    const auto p = problems::viscous_burgers();
    EXPECT_NO_THROW(p.check_consistency((Vec(1) << 300.0).finished(), {-1.0, 0.0, 0.3, 2.0}));
    auto broken = p;
    broken.speed = [](double u, const Vec&) { return 2.0 * u; };
    EXPECT_THROW(broken.check_consistency((Vec(1) << 300.0).finished(), {0.5}), UsageError);
}

// --- one-dimensional Lagrangian scheme --------------------------------------------

TEST(Lagrangian1D, PureAdvectionIsExact) {
    const Grid g = Grid::line(0.0, 2.0, 128, true);
    const SolveResult r = solve_lagrangian_1d(problems::pulse_advection(), g, TimeAxis(0.0, 0.01, 101), kOne);
    const SnapshotSet exact = recipes::pulse_exact(g, TimeAxis(0.0, 0.01, 101), Frame::lagrangian);
    for (int k = 0; k < 101; k += 10) {
        EXPECT_EQ(Vec(r.snapshots.channel(0, k, 1)), Vec(exact.channel(0, k, 1)));
        EXPECT_LT((r.snapshots.channel(0, k, 0) - exact.channel(0, k, 0)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Lagrangian1D, ZeroDynamicsKeepsNodesInPlace) {
    const Grid g = Grid::line(0.0, 1.0, 40, true);
    const auto p = problems::linear_advection(0.0, [](double x) { return std::cos(6 * x); });
    const SolveResult r = solve_lagrangian_1d(p, g, TimeAxis(0.0, 0.1, 4), kOne);
    EXPECT_EQ(Vec(r.snapshots.snapshot(0, 3)), Vec(r.snapshots.snapshot(0, 0)));
}

TEST(Lagrangian1D, InviscidBurgersValuesConstantAlongCharacteristics) {
    auto u0 = [](double x) { return 0.5 + 0.2 * std::sin(2 * std::numbers::pi * x); };
    const Grid g = Grid::line(0.0, 1.0, 200, true);
    // characteristics cross at t = 1 / (0.4 pi) ~ 0.8
    SolverOptions so;
    so.substeps = 10;
    const SolveResult r = solve_lagrangian_1d(inviscid_burgers(u0), g, TimeAxis(0.0, 0.05, 11), kOne, so);
    const Vec x = g.coordinates(0);
    const Vec u_init = r.snapshots.channel(0, 0, 1);
    for (int k = 1; k < 11; ++k) {
        const double t = 0.05 * k;
        EXPECT_EQ(Vec(r.snapshots.channel(0, k, 1)), u_init);
        EXPECT_LT((r.snapshots.channel(0, k, 0) - (x + t * u_init)).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Lagrangian1D, ShockFormationIsReportedAsTangle) {
    auto u0 = [](double x) { return 0.5 + 0.2 * std::sin(2 * std::numbers::pi * x); };
    const Grid g = Grid::line(0.0, 1.0, 200, true);
    SolverOptions so;
    so.substeps = 10;
    try {
        solve_lagrangian_1d(inviscid_burgers(u0), g, TimeAxis(0.0, 0.05, 25), kOne, so);
        FAIL() << "expected a tangling error";
    } catch (const CflViolation& e) {
        FAIL() << "step size should be admissible: " << e.what();
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("tangl"), std::string::npos) << e.what();
    }
}

TEST(Lagrangian1D, UpdateModesAgreeWithoutDiffusion) {
    const Grid g = Grid::line(0.0, 2.0, 128, true);
    SolverOptions remap;
    remap.update = LagrangianUpdate::remap;
    const TimeAxis t(0.0, 0.01, 30);
    const SnapshotSet a = solve_lagrangian_1d(problems::pulse_advection(), g, t, kOne).snapshots;
    const SnapshotSet b = solve_lagrangian_1d(problems::pulse_advection(), g, t, kOne, remap).snapshots;
    EXPECT_TRUE(a.same_as(b));
}

TEST(Lagrangian1D, AdvectionDiffusionBeatsEulerianAndConverges) {
    auto u0 = [](double x) { return advdiff1d_exact((Vec(1) << x).finished(), 0.0, 1e-3, 0.1)[0]; };
    std::vector<double> lag, eul;
    for (int n : {128, 256, 512}) {
        const Grid g = Grid::line(0.0, 2.0, n, false);
        const auto [t, so] = single_interval(0.5, g.axis(0).spacing(), 0.5);
        const auto p = problems::linear_advection(1.0, u0, 1e-3, Boundary::dirichlet(0.0, 0.0));
        const SolveResult rl = solve_lagrangian_1d(p, g, t, kOne, so);
        const SolveResult re = solve_eulerian_1d(p, g, t, kOne, so);
        const Vec exact = advdiff1d_exact(g.coordinates(0), 0.5, 1e-3, 0.1);
        lag.push_back(rel(to_eulerian(rl.snapshots, g, ReconstructMethod::linear).snapshot(0, 1), exact));
        eul.push_back(rel(re.snapshots.snapshot(0, 1), exact));
        EXPECT_LE(rl.report.max_solve_residual, 1e-12);
        EXPECT_LT(lag.back() * 10.0, eul.back());
    }
    EXPECT_LT(lag[1], 3e-3);
    EXPECT_GT(observed_order(lag[1], lag[2]), 1.5);
    EXPECT_GT(observed_order(eul[1], eul[2]), 0.6);
}

TEST(Lagrangian1D, ViscousBurgersTracksAnalyticSolution) {
    const auto p = problems::viscous_burgers();
    const ParamSet re = ParamSet::scalar("Re", {200.0});
    std::vector<double> eul, inc, rem;
    for (int n : {256, 512}) {
        const Grid g = Grid::line(0.0, 1.5, n, false);
        auto [t, so] = single_interval(1.0, g.axis(0).spacing(), 0.5);
        const Vec exact = burgers1d_exact(g.coordinates(0), 1.0, 200.0);
        eul.push_back(rel(solve_eulerian_1d(p, g, t, re, so).snapshots.snapshot(0, 1), exact));
        inc.push_back(rel(to_eulerian(solve_lagrangian_1d(p, g, t, re, so).snapshots, g, ReconstructMethod::linear)
                              .snapshot(0, 1),
                          exact));
        so.update = LagrangianUpdate::remap;
        rem.push_back(rel(to_eulerian(solve_lagrangian_1d(p, g, t, re, so).snapshots, g, ReconstructMethod::linear)
                              .snapshot(0, 1),
                          exact));
    }
    EXPECT_LT(eul[0], 0.025);
    EXPECT_LT(inc[0], 0.01);
    EXPECT_LT(rem[1], 0.05);
    EXPECT_NEAR(observed_order(eul[0], eul[1]), 1.0, 0.2);
    EXPECT_NEAR(observed_order(rem[0], rem[1]), 1.0, 0.2);
    EXPECT_LT(inc[1], inc[0]);
}

// --- closed forms -----------------------------------------------------------------

TEST(ClosedForm, BurgersMatchesHighPrecisionValue) {
    // 50-digit evaluation of the same formula
    EXPECT_NEAR(burgers1d_exact(0.75, 2.0, 400.0), 0.24916687451416288458657623490573736521523645575158, 1e-15);
    for (double t : {0.0, 0.5, 3.2}) EXPECT_EQ(burgers1d_exact(0.0, t, 500.0), 0.0);
    // log-space branch: no overflow far from the front
    EXPECT_GE(burgers1d_exact(1.5, 0.0, 600.0), 0.0);
    EXPECT_TRUE(std::isfinite(burgers1d_exact(1.5, 0.0, 600.0)));
    EXPECT_THROW(burgers1d_exact(Vec::Zero(2), 0.0, -1.0), UsageError);
}

TEST(ClosedForm, AdvectionDiffusionMatchesHighPrecisionValue) {
    const Vec x = (Vec(1) << 0.9).finished();
    EXPECT_NEAR(advdiff1d_exact(x, 0.3, 1e-4, 0.1)[0], 0.99999998865762570369956919232330134468936918689698, 1e-15);
}

TEST(ClosedForm, AdvectionDiffusionWindowIsSymmetric) {
    for (double t : {0.0, 0.4, 1.0}) {
        const Vec z = Vec::LinSpaced(21, 0.0, 0.4);
        const Vec right = advdiff1d_exact((0.5 + t + z.array()).matrix(), t, 1e-3, 0.1);
        const Vec left = advdiff1d_exact((0.5 + t - z.array()).matrix(), t, 1e-3, 0.1);
        EXPECT_LT((right - left).cwiseAbs().maxCoeff(), 1e-13);
    }
}

TEST(ClosedForm, GaussianMassAndPeakEvolve) {
    const Grid g = Grid::plane({0.0, 4.0, 200, true}, {0.0, 4.0, 200, true});
    const double area = g.axis(0).spacing() * g.axis(1).spacing();
    const double w = 0.1, d = 0.001;
    for (double t : {0.0, 0.5, 1.0}) {
        const Vec u = advdiff2d_exact(g, t, 0.0, d);
        EXPECT_NEAR(u.sum() * area, std::numbers::pi * w, 1e-10);
        // peak at (2 + t, 2): on a node for these t
        EXPECT_NEAR(u.maxCoeff(), w / (w + 4 * d * t), 1e-9);
    }
    const Vec x = g.coordinates(0), y = g.coordinates(1);
    const Vec u0 = advdiff2d_exact(g, 0.0, 1.0, d, 2.0, 2.0, w, 0);
    const Problem2D p = problems::advdiff2d(1.0);
    for (Eigen::Index i = 0; i < x.size(); i += 97) EXPECT_DOUBLE_EQ(u0[i], p.u0(x[i], y[i]));
}

// --- two-dimensional schemes ------------------------------------------------------

TEST(Eulerian2D, AxisAlignedTranslateConvergesAtFirstOrder) {
    std::vector<double> err;
    for (int n : {32, 64, 128}) {
        const Grid g = Grid::plane({0.0, 4.0, n, true}, {0.0, 4.0, n, true});
        const auto [t, so] = single_interval(0.5, g.axis(0).spacing(), 0.5);
        const SolveResult r = solve_eulerian_2d(problems::advdiff2d(0.0, 0.0), g, t, kOne, so);
        err.push_back(rel(r.snapshots.snapshot(0, 1), advdiff2d_exact(g, 0.5, 0.0, 0.0)));
    }
    EXPECT_LT(err[2], err[1]);
    EXPECT_LT(err[1], err[0]);
    EXPECT_NEAR(observed_order(err[1], err[2]), 1.0, 0.25);
}

TEST(Eulerian2D, TrainingResolutionRunsWithoutCflFailure) {
    const Grid g = recipes::default_grid(recipes::Problem::advdiff2d, 40, 40);
    for (double theta : {0.0, std::numbers::pi / 4, 10 * std::numbers::pi / 7}) {
        const SolveResult r = solve_eulerian_2d(problems::advdiff2d(theta), g, TimeAxis(0.0, 0.01, 101), kOne);
        EXPECT_EQ(r.report.steps, 100);
        EXPECT_LT(r.report.cfl.advective, 1.0);
        EXPECT_LT(r.report.cfl.diffusive, 1.0);
    }
}

TEST(Eulerian2D, ConstantBurgersStatePreserved) {
    const Grid g = Grid::plane({0.0, 5.0, 32, true}, {0.0, 5.0, 32, true});
    const Problem2D p = Problem2D::burgers(0.01, [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
    const SnapshotSet s = solve_eulerian_2d(p, g, TimeAxis(0.0, 0.02, 11), kOne).snapshots;
    EXPECT_LT((s.snapshot(0, 10).array() - 1.0).abs().maxCoeff(), 1e-14);
}

TEST(Eulerian2D, StabilityViolationRejected) {
    const Grid g = Grid::plane({0.0, 4.0, 40, true}, {0.0, 4.0, 40, true});
    EXPECT_THROW(solve_eulerian_2d(problems::advdiff2d(0.3), g, TimeAxis(0.0, 0.2, 3), kOne), CflViolation);
    EXPECT_THROW(solve_eulerian_2d(problems::advdiff2d(0.3), Grid::line(0.0, 1.0, 10, true), TimeAxis(0.0, 0.1, 2),
                                   kOne),
                 UsageError);
}

TEST(Lagrangian2D, PureAdvectionIsExact) {
    const Grid g = Grid::plane({0.0, 4.0, 30, true}, {0.0, 4.0, 30, true});
    const double theta = 2.0;
    const SnapshotSet s =
        solve_lagrangian_2d(problems::advdiff2d(theta, 0.0), g, TimeAxis(0.0, 0.05, 21), kOne).snapshots;
    const Vec x = g.coordinates(0), y = g.coordinates(1);
    for (int k = 0; k < 21; k += 5) {
        const double t = 0.05 * k;
        EXPECT_LT((s.channel(0, k, 0) - (x.array() + t * std::cos(theta)).matrix()).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_LT((s.channel(0, k, 1) - (y.array() + t * std::sin(theta)).matrix()).cwiseAbs().maxCoeff(), 1e-12);
        EXPECT_EQ(Vec(s.channel(0, k, 2)), Vec(s.channel(0, 0, 2)));
    }
}

TEST(Lagrangian2D, ConstantBurgersNodesTranslate) {
    const Grid g = Grid::plane({0.0, 5.0, 24, true}, {0.0, 5.0, 24, true});
    const Problem2D p = Problem2D::burgers(0.01, [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
    const SnapshotSet s = solve_lagrangian_2d(p, g, TimeAxis(0.0, 0.05, 11), kOne).snapshots;
    EXPECT_EQ(s.channels(), (std::vector<std::string>{"chi", "zeta", "u", "v"}));
    const Vec x = g.coordinates(0), y = g.coordinates(1);
    EXPECT_LT((s.channel(0, 10, 0) - (x.array() + 0.5).matrix()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((s.channel(0, 10, 1) - (y.array() + 0.5).matrix()).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LT((s.channel(0, 10, 2).array() - 1.0).abs().maxCoeff(), 1e-13);
}

TEST(Lagrangian2D, AdvectionDiffusionTracksAnalyticSolution) {
    const Grid g = recipes::default_grid(recipes::Problem::advdiff2d, 40, 40);
    const double theta = 10 * std::numbers::pi / 7;
    const SnapshotSet lag = solve_lagrangian_2d(problems::advdiff2d(theta), g, TimeAxis(0.0, 0.01, 101), kOne).snapshots;
    const SnapshotSet eul = solve_eulerian_2d(problems::advdiff2d(theta), g, TimeAxis(0.0, 0.01, 101), kOne).snapshots;
    const Vec exact = advdiff2d_exact(g, 1.0, theta, 0.001);
    const double e_lag = rel(to_eulerian(lag, g, ReconstructMethod::linear).snapshot(0, 100), exact);
    const double e_eul = rel(eul.snapshot(0, 100), exact);
    EXPECT_LT(e_lag, 0.05);
    EXPECT_LT(e_lag * 5.0, e_eul);
}

TEST(Burgers2D, EnergyIsNonIncreasing) {
    const Grid g = recipes::default_grid(recipes::Problem::burgers2d, 64, 64);
    SolverOptions so;
    so.substeps = 5;
    so.update = LagrangianUpdate::remap;
    const TimeAxis t(0.0, 0.05, 11);
    const SnapshotSet lag =
        to_eulerian(solve_lagrangian_2d(problems::burgers2d(0.6), g, t, kOne, so).snapshots, g, ReconstructMethod::linear);
    const SnapshotSet eul = solve_eulerian_2d(problems::burgers2d(0.6), g, t, kOne, so).snapshots;
    auto energy = [](const SnapshotSet& s, int k) {
        return (s.channel(0, k, 0).array() - 1.0).square().sum() + (s.channel(0, k, 1).array() - 1.0).square().sum();
    };
    for (int k = 1; k < 11; ++k) {
        EXPECT_LE(energy(eul, k), energy(eul, k - 1) * (1.0 + 1e-12)) << "k=" << k;
        EXPECT_LE(energy(lag, k), energy(lag, k - 1) * (1.0 + 1e-12)) << "k=" << k;
    }
}

TEST(Burgers2D, DatasetShapeAndUpdateDefault) {
    EXPECT_EQ(recipes::default_update(recipes::Problem::burgers2d), LagrangianUpdate::remap);
    EXPECT_EQ(recipes::default_update(recipes::Problem::advdiff2d), LagrangianUpdate::increment);
    const Grid g = recipes::default_grid(recipes::Problem::burgers2d, 16, 16);
    const SnapshotSet s =
        recipes::build_dataset(recipes::Problem::burgers2d, Frame::lagrangian, {0.4, 0.5}, g, TimeAxis(0.0, 0.05, 3));
    EXPECT_EQ(s.shape(), (std::vector<std::size_t>{2, 3, 4, 16, 16}));
}

}  // namespace
}  // namespace lagrom

#include "support.hpp"

namespace lagrom {
namespace {

using testing::random_matrix;

SnapshotSet random_set(int np, int nt, int nc, const Grid& g, std::uint64_t seed) {
    std::vector<Mat> traj;
    for (int p = 0; p < np; ++p) traj.push_back(random_matrix(nc * g.size(), nt, seed + p));
    std::vector<std::string> ch;
    for (int c = 0; c < nc; ++c) ch.push_back("c" + std::to_string(c));
    return SnapshotSet::from_trajectories(g, ParamSet::scalar("mu", linspace(1.0, 2.0, np)), TimeAxis(0.0, 0.1, nt),
                                          Frame::eulerian, ch, traj);
}

TEST(Grid, LineSpacingPeriodicAndBounded) {
    const Grid p = Grid::line(0.0, 2.0, 128, true);
    EXPECT_DOUBLE_EQ(p.axis(0).spacing(), 2.0 / 128);
    const Grid b = Grid::line(0.0, 1.5, 128, false);
    EXPECT_DOUBLE_EQ(b.axis(0).spacing(), 1.5 / 127);
    EXPECT_DOUBLE_EQ(b.coordinates(0)[127], 1.5);
}

TEST(Grid, PlaneFlatteningIsRowMajorWithYFastest) {
    const Grid g = Grid::plane({0.0, 1.0, 3, false}, {0.0, 2.0, 4, false});
    const Vec x = g.coordinates(0);
    const Vec y = g.coordinates(1);
    ASSERT_EQ(x.size(), 12);
    EXPECT_DOUBLE_EQ(x[1 * 4 + 2], 0.5);
    EXPECT_DOUBLE_EQ(y[1 * 4 + 2], 2.0 * 2 / 3);
}

TEST(Grid, RejectsDegenerateAxes) {
    EXPECT_THROW(Grid::line(0.0, 1.0, 2, false), UsageError);
    EXPECT_THROW(Grid::line(1.0, 1.0, 8, false), UsageError);
    EXPECT_THROW(Grid(std::vector<Axis>{}), UsageError);
}

TEST(TimeAxis, EmptyAxisRejected) {
    EXPECT_THROW(TimeAxis(0.0, 0.01, 0), UsageError);
    EXPECT_THROW(TimeAxis(0.0, 0.0, 5), UsageError);
}

TEST(TimeAxis, IndexOfMatchesInstants) {
    const TimeAxis t(0.0, 0.01, 101);
    EXPECT_EQ(t.index_of(0.8), 80);
    EXPECT_EQ(t.index_of(0.805), -1);
    EXPECT_EQ(t.index_of(1.2), -1);
    EXPECT_NEAR(t.last(), 1.0, 1e-15);
}

TEST(ParamSet, DuplicateRowsRejected) {
    EXPECT_THROW(ParamSet::scalar("mu", {1.0, 2.0, 1.0}), UsageError);
    EXPECT_THROW(ParamSet({"a", "b"}, Mat::Zero(2, 1)), UsageError);
}

TEST(SnapshotSet, ShapeMismatchRejected) {
    const Grid g = Grid::line(0.0, 1.0, 3, false);
    EXPECT_THROW(SnapshotSet(g, ParamSet::scalar("mu", {1.0}), TimeAxis(0.0, 1.0, 2), Frame::eulerian, {"u"},
                             std::vector<double>(5, 0.0)),
                 UsageError);
}

TEST(SnapshotSet, NonFiniteEntriesRejected) {
    const Grid g = Grid::line(0.0, 1.0, 3, false);
    std::vector<double> d(3, 1.0);
    d[1] = std::nan("");
    EXPECT_THROW(SnapshotSet(g, ParamSet::scalar("mu", {1.0}), TimeAxis(0.0, 1.0, 1), Frame::eulerian, {"u"}, d),
                 NumericalError);
}

TEST(FlattenSnapshots, ColumnsAreSnapshots) {
    const Grid g = Grid::line(0.0, 1.0, 3, false);
    const SnapshotSet s(g, ParamSet::scalar("mu", {1.0}), TimeAxis(0.0, 1.0, 2), Frame::eulerian, {"u"},
                        {1, 2, 3, 4, 5, 6});
    Mat expected(3, 2);
    expected << 1, 4, 2, 5, 3, 6;
    EXPECT_EQ(flatten_snapshots(s, 0), expected);
}

TEST(FlattenSnapshots, TwoChannelColumnStacksCoordinatesThenValues) {
    const Grid g = Grid::line(0.0, 2.0, 3, false);
    Mat traj(6, 1);
    traj << 0, 1, 2, 5, 6, 7;
    const SnapshotSet s = SnapshotSet::from_trajectories(g, ParamSet::scalar("c", {1.0}), TimeAxis(0.0, 1.0, 1),
                                                         Frame::lagrangian, {"chi", "u"}, {traj});
    const Mat m = flatten_snapshots(s, 0);
    EXPECT_EQ(m.col(0).head(3), (Vec(3) << 0, 1, 2).finished());
    EXPECT_EQ(m.col(0).tail(3), (Vec(3) << 5, 6, 7).finished());
    EXPECT_EQ(s.channel(0, 0, 1), (Vec(3) << 5, 6, 7).finished());
}

TEST(FlattenSnapshots, RoundTripIsBitExact) {
    const Grid g = Grid::plane({0.0, 1.0, 4, true}, {0.0, 1.0, 5, true});
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const SnapshotSet s = random_set(3, 7, 2, g, 100 * seed);
        std::vector<Mat> per;
        for (int p = 0; p < s.n_params(); ++p) per.push_back(flatten_snapshots(s, p));
        EXPECT_TRUE(unflatten_snapshots(s, per).same_as(s));
    }
}

TEST(SnapshotSet, ConstructionIsDeterministic) {
    const Grid g = Grid::line(0.0, 1.0, 16, false);
    EXPECT_TRUE(random_set(2, 4, 1, g, 7).same_as(random_set(2, 4, 1, g, 7)));
    EXPECT_FALSE(random_set(2, 4, 1, g, 7).same_as(random_set(2, 4, 1, g, 8)));
}

TEST(SubsetTime, FullRangeIsIdentity) {
    const SnapshotSet s = random_set(2, 9, 1, Grid::line(0.0, 1.0, 5, false), 3);
    EXPECT_TRUE(subset_time(s, 0, 8).same_as(s));
}

TEST(SubsetTime, TrainingSplitOfHundredOneSnapshots) {
    const Grid g = Grid::line(0.0, 2.0, 128, true);
    const SnapshotSet s = recipes::pulse_exact(g, TimeAxis(0.0, 0.01, 101), Frame::eulerian);
    const SnapshotSet train = subset_time(s, 0, 80);
    EXPECT_EQ(train.n_times(), 81);
    EXPECT_DOUBLE_EQ(train.times().dt, 0.01);
    EXPECT_NEAR(train.times().last(), 0.8, 1e-14);
    const SnapshotSet test = subset_time(s, 81, 100);
    EXPECT_EQ(test.n_times(), 20);
    EXPECT_NEAR(test.times().t0, 0.81, 1e-14);
}

TEST(SubsetTime, ReversedRangeRejected) {
    const SnapshotSet s = random_set(1, 5, 1, Grid::line(0.0, 1.0, 5, false), 1);
    EXPECT_THROW(subset_time(s, 3, 2), UsageError);
    EXPECT_THROW(subset_time(s, 0, 5), UsageError);
}

TEST(SubsetParams, KeepsRequestedRowsInOrder) {
    const SnapshotSet s = random_set(4, 3, 1, Grid::line(0.0, 1.0, 5, false), 11);
    const SnapshotSet sub = subset_params(s, {2, 0});
    EXPECT_EQ(sub.n_params(), 2);
    EXPECT_EQ(sub.params().row(0), s.params().row(2));
    EXPECT_EQ(Vec(sub.snapshot(1, 2)), Vec(s.snapshot(0, 2)));
}

TEST(ConcatParams, JoinsCompatibleSets) {
    const Grid g = Grid::line(0.0, 1.0, 5, false);
    const SnapshotSet a = SnapshotSet::from_trajectories(g, ParamSet::scalar("mu", {1.0}), TimeAxis(0.0, 1.0, 2),
                                                         Frame::eulerian, {"u"}, {random_matrix(5, 2, 1)});
    const SnapshotSet b = SnapshotSet::from_trajectories(g, ParamSet::scalar("mu", {2.0}), TimeAxis(0.0, 1.0, 2),
                                                         Frame::eulerian, {"u"}, {random_matrix(5, 2, 2)});
    const SnapshotSet c = concat_params({a, b});
    EXPECT_EQ(c.n_params(), 2);
    EXPECT_EQ(Vec(c.snapshot(1, 1)), Vec(b.snapshot(0, 1)));
}

TEST(Linspace, InclusiveEndpoints) {
    const auto v = linspace(200.0, 600.0, 21);
    ASSERT_EQ(v.size(), 21u);
    EXPECT_DOUBLE_EQ(v.front(), 200.0);
    EXPECT_DOUBLE_EQ(v.back(), 600.0);
    EXPECT_DOUBLE_EQ(v[1], 220.0);
}

TEST(Recipes, ParamGridParsing) {
    EXPECT_EQ(recipes::parse_param_grid("0.4:0.8:17").size(), 17u);
    EXPECT_THROW(recipes::parse_param_grid("1:2"), UsageError);
    EXPECT_THROW(recipes::parse_param_grid("a:2:3"), UsageError);
    EXPECT_THROW(recipes::parse_param_grid("1:2:0"), UsageError);
}

TEST(Recipes, TimeAxisFromDtOrCount) {
    const TimeAxis a = recipes::make_times(0.8, 0, 0.01);
    EXPECT_EQ(a.count, 81);
    EXPECT_NEAR(a.dt, 0.01, 1e-15);
    const TimeAxis b = recipes::make_times(3.2, 81, 0.0);
    EXPECT_NEAR(b.dt, 0.04, 1e-15);
    EXPECT_THROW(recipes::make_times(1.0, 0, 0.0), UsageError);
    EXPECT_EQ(recipes::substeps_for(a, 0.0025), 4);
    EXPECT_THROW(recipes::substeps_for(a, 0.003), UsageError);
}

TEST(Recipes, SeededSamplingIsDeterministicAndBounded) {
    const auto a = recipes::seeded_uniform(8, 0.4, 0.8, 0);
    EXPECT_EQ(a, recipes::seeded_uniform(8, 0.4, 0.8, 0));
    EXPECT_NE(a, recipes::seeded_uniform(8, 0.4, 0.8, 1));
    for (double v : a) {
        EXPECT_GE(v, 0.4);
        EXPECT_LE(v, 0.8);
    }
}

TEST(Recipes, ParallelSweepOrderIndependentOfThreads) {
    std::vector<double> one(37), four(37);
    recipes::parallel_for(37, 1, [&](int i) { one[static_cast<std::size_t>(i)] = std::sin(i * 0.3); });
    recipes::parallel_for(37, 4, [&](int i) { four[static_cast<std::size_t>(i)] = std::sin(i * 0.3); });
    EXPECT_EQ(one, four);
    EXPECT_THROW(recipes::parallel_for(8, 3, [](int i) {
                     if (i == 5) throw NumericalError("boom");
                 }),
                 NumericalError);
}

TEST(Recipes, DatasetIndependentOfJobCount) {
    const Grid g = recipes::default_grid(recipes::Problem::adv1d, 64, 0);
    const TimeAxis t(0.0, 0.02, 6);
    recipes::BuildOptions one, three;
    three.jobs = 3;
    const std::vector<double> c{0.5, 0.75, 1.0};
    const SnapshotSet a = recipes::build_dataset(recipes::Problem::adv1d, Frame::lagrangian, c, g, t, one);
    const SnapshotSet b = recipes::build_dataset(recipes::Problem::adv1d, Frame::lagrangian, c, g, t, three);
    EXPECT_TRUE(a.same_as(b));
    EXPECT_THROW(recipes::build_dataset(recipes::Problem::adv1d, Frame::latent, c, g, t), UsageError);
}

}  // namespace
}  // namespace lagrom

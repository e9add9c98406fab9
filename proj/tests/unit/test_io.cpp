#include "support.hpp"

#include <fstream>
#include <sstream>

namespace lagrom {
namespace {

using testing::random_matrix;
using testing::ScratchDir;

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

SnapshotSet random_lagrangian_2d(std::uint64_t seed) {
    const Grid g = Grid::plane({0.0, 4.0, 6, true}, {0.0, 2.0, 5, true});
    std::vector<Mat> traj{random_matrix(3 * 30, 4, seed), random_matrix(3 * 30, 4, seed + 1)};
    return SnapshotSet::from_trajectories(g, ParamSet::scalar("theta", {0.5, 1.5}), TimeAxis(0.0, 0.01, 4),
                                          Frame::lagrangian, {"chi", "zeta", "u"}, traj);
}

TEST(Container, RoundTripIsBitExact) {
    ScratchDir dir;
    for (std::uint64_t seed = 0; seed < 4; ++seed) {
        const SnapshotSet s = random_lagrangian_2d(10 * seed);
        io::write_container(s, dir / "a.lrom");
        const SnapshotSet back = io::read_container(dir / "a.lrom");
        EXPECT_TRUE(back.same_as(s));
        EXPECT_EQ(back.grid(), s.grid());
        EXPECT_EQ(back.params(), s.params());
        EXPECT_EQ(back.channels(), s.channels());
        // re-export is byte-identical
        io::write_container(back, dir / "b.lrom");
        EXPECT_EQ(slurp(dir / "a.lrom"), slurp(dir / "b.lrom"));
    }
}

TEST(Container, ExtraHeaderKeysSurvive) {
    ScratchDir dir;
    const SnapshotSet s = random_lagrangian_2d(3);
    nlohmann::json meta = {{"origin", "unit"}, {"seed", 3}};
    const SnapshotSet tagged(s.grid(), s.params(), s.times(), s.frame(), s.channels(),
                             std::vector<double>(s.data().begin(), s.data().end()), meta);
    io::write_container(tagged, dir / "m.lrom");
    const SnapshotSet back = io::read_container(dir / "m.lrom");
    EXPECT_EQ(back.metadata().at("origin"), "unit");
    EXPECT_EQ(back.metadata().at("seed"), 3);
}

TEST(Container, TruncatedFileRejected) {
    ScratchDir dir;
    io::write_container(random_lagrangian_2d(1), dir / "t.lrom");
    const std::string bytes = slurp(dir / "t.lrom");
    for (std::size_t cut : {bytes.size() - 8, bytes.size() / 2, std::size_t{12}}) {
        std::ofstream(dir / "cut.lrom", std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(cut));
        EXPECT_THROW(io::read_container(dir / "cut.lrom"), IoError) << "cut=" << cut;
    }
    EXPECT_THROW(io::read_container(dir / "missing.lrom"), IoError);
}

TEST(Container, BadMagicRejected) {
    ScratchDir dir;
    io::write_container(random_lagrangian_2d(1), dir / "t.lrom");
    std::string bytes = slurp(dir / "t.lrom");
    bytes[0] = 'X';
    std::ofstream(dir / "bad.lrom", std::ios::binary).write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    EXPECT_THROW(io::read_container(dir / "bad.lrom"), IoError);
}

TEST(Container, NonFinitePayloadRejectedUnlessAllowed) {
    ScratchDir dir;
    const SnapshotSet s = random_lagrangian_2d(2);
    std::vector<double> d(s.data().begin(), s.data().end());
    d[7] = std::numeric_limits<double>::infinity();
    const SnapshotSet bad(s.grid(), s.params(), s.times(), s.frame(), s.channels(), d, {}, false);
    io::write_container(bad, dir / "inf.lrom");
    EXPECT_THROW(io::read_container(dir / "inf.lrom"), IoError);
    EXPECT_NO_THROW(io::read_container(dir / "inf.lrom", true));
}

TEST(Container, LatentShapeIsParamsTimesRank) {
    ScratchDir dir;
    const std::vector<Mat> traj(21, random_matrix(14, 81, 5));
    std::vector<double> re = linspace(200.0, 600.0, 21);
    std::vector<Mat> distinct;
    for (std::size_t i = 0; i < traj.size(); ++i) distinct.push_back(traj[i] * (1.0 + i));
    const SnapshotSet h = SnapshotSet::from_trajectories(Grid::index(14), ParamSet::scalar("Re", re),
                                                         TimeAxis(0.0, 0.04, 81), Frame::latent, {"h"}, distinct);
    io::write_container(h, dir / "h.lrom");
    const io::RawContainer raw = io::read_raw(dir / "h.lrom");
    EXPECT_EQ(raw.header.at("shape"), (nlohmann::json{21, 81, 14}));
    EXPECT_EQ(raw.header.at("frame"), "latent");
    EXPECT_TRUE(io::read_container(dir / "h.lrom").same_as(h));
}

TEST(Model, RoundTripIsExact) {
    ScratchDir dir;
    const Grid g = recipes::default_grid(recipes::Problem::burgers1d, 64, 0);
    const SnapshotSet s = recipes::build_dataset(recipes::Problem::burgers1d, Frame::lagrangian, {200, 300, 400}, g,
                                                 recipes::make_times(1.0, 21, 0.0));
    PdmdOptions opt;
    opt.latent_cutoff = 1e-10;
    const PdmdModel m = fit_pdmd(s, fit_pod(s, 6, true), opt);
    io::write_model(m, dir / "m.lrom");
    const PdmdModel back = io::read_model(dir / "m.lrom");
    EXPECT_EQ(back.compressor.basis, m.compressor.basis);
    EXPECT_EQ(back.compressor.normalization.mean, m.compressor.normalization.mean);
    EXPECT_EQ(back.latent_cutoff, 1e-10);
    EXPECT_EQ(back.frame, Frame::lagrangian);
    EXPECT_EQ(back.grid, m.grid);
    for (std::size_t i = 0; i < m.operators.size(); ++i) {
        EXPECT_EQ(back.operators[i], m.operators[i]);
        EXPECT_EQ(back.anchors[i], m.anchors[i]);
    }
    const Vec mu = (Vec(1) << 250.0).finished();
    EXPECT_EQ(predict_pdmd(back, mu, 5), predict_pdmd(m, mu, 5));
    EXPECT_THROW(io::read_container(dir / "m.lrom"), IoError);
}

TEST(Operator, RoundTripIsExact) {
    ScratchDir dir;
    const Mat u = random_matrix(20, 3, 1) * random_matrix(3, 9, 2);
    const ReducedOperator op = fit_dmd(u, 3, Frame::lagrangian, (Vec(1) << 0.5).finished());
    io::write_operator(op, dir / "op.lrom");
    const ReducedOperator back = io::read_operator(dir / "op.lrom");
    EXPECT_EQ(back.basis(), op.basis());
    EXPECT_EQ(back.atilde(), op.atilde());
    EXPECT_EQ(back.frame(), Frame::lagrangian);
    EXPECT_EQ(back.param(), op.param());
    EXPECT_THROW(io::read_model(dir / "op.lrom"), IoError);
}

TEST(Csv, SchemasAndFormatting) {
    NWidthCurve c;
    c.n = {0, 1};
    c.d_hat = (Vec(2) << 2.0, 0.5).finished();
    c.d0 = 2.0;
    EXPECT_EQ(io::format_csv(io::to_csv(c)), "n,d_hat,d_hat_normalized\n0,2,1\n1,0.5,0.25\n");

    CoherenceSeries s;
    s.times = (Vec(1) << 0.81).finished();
    s.gamma = (Vec(1) << 0.1).finished();
    EXPECT_EQ(io::format_csv(io::to_csv(s)), "t,gamma\n0.81000000000000005,0.10000000000000001\n");

    EXPECT_EQ(io::format_csv(io::singular_values_csv((Vec(2) << 1.0, 0.25).finished())),
              "n,sigma_normalized\n1,1\n2,0.25\n");

    ErrorTable e{ParamSet::scalar("Re", {250.0}), TimeAxis(3.0, 0.5, 2), (Mat(1, 2) << 0.5, 0.125).finished(), 0.3125};
    EXPECT_EQ(io::format_csv(io::to_csv(e)), "param_index,Re,t,rel_l2_error\n0,250,3,0.5\n0,250,3.5,0.125\n");
}

TEST(Csv, EmptyTableIsHeaderOnly) {
    EXPECT_EQ(io::format_csv(io::CsvTable{{"t", "gamma"}, {}}), "t,gamma\n");
    EXPECT_THROW(io::format_csv(io::CsvTable{{"a", "b"}, {{1.0}}}), UsageError);
}

TEST(Csv, ValuesRoundTripThroughText) {
    ScratchDir dir;
    const Vec v = testing::random_vector(50, 8).cwiseAbs();
    io::export_csv(io::singular_values_csv(v), dir / "s.csv");
    std::ifstream is(dir / "s.csv");
    std::string line;
    std::getline(is, line);
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        ASSERT_TRUE(std::getline(is, line));
        EXPECT_EQ(std::stod(line.substr(line.find(',') + 1)), v[i]);
    }
    io::export_csv(io::singular_values_csv(v), dir / "t.csv");
    EXPECT_EQ(slurp(dir / "s.csv"), slurp(dir / "t.csv"));
}

}  // namespace
}  // namespace lagrom

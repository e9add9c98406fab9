// lagrom: experiment driver for the Lagrangian/Eulerian reduced-order pipelines.
//
//   lagrom fom         full-order snapshot sets for every supported problem
//   lagrom train       offline pDMD training (POD or externally produced latents)
//   lagrom predict     online prediction at new parameters, optional error table
//   lagrom reconstruct Lagrangian (or externally decoded) data -> Eulerian fields
//   lagrom coherence | nwidth | svd   evaluation curves as CSV
//
// Exit codes: 0 success, 2 usage error, 3 numerical failure, 4 I/O error.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lagrom/lagrom.hpp"

namespace fs = std::filesystem;
using namespace lagrom;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitNumerical = 3;

std::string shape_string(const SnapshotSet& s) {
    std::string out = "[";
    const auto shape = s.shape();
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(shape[i]);
    }
    return out + "]";
}

/// "N" -> (N, 0); "NxM" -> (N, M).
std::pair<int, int> parse_grid_size(const std::string& spec) {
    if (spec.empty()) return {0, 0};
    try {
        const auto x = spec.find('x');
        std::size_t used = 0;
        if (x == std::string::npos) {
            const int n = std::stoi(spec, &used);
            if (used != spec.size() || n < 2) throw UsageError("bad grid");
            return {n, 0};
        }
        const std::string a = spec.substr(0, x);
        const std::string b = spec.substr(x + 1);
        const int n = std::stoi(a, &used);
        if (used != a.size()) throw UsageError("bad grid");
        const int m = std::stoi(b, &used);
        if (used != b.size() || n < 2 || m < 2) throw UsageError("bad grid");
        return {n, m};
    } catch (const std::logic_error&) {
        throw UsageError("grid must look like N or NxM, got '" + spec + "'");
    }
}

/// One value per line (first column); '#' comments, blank lines and a
/// non-numeric header row are skipped.
std::vector<double> read_param_file(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw IoError("cannot open parameter file '" + path.string() + "'");
    std::vector<double> values;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        const std::string cell = line.substr(first, line.find(',', first) - first);
        try {
            std::size_t used = 0;
            const double v = std::stod(cell, &used);
            values.push_back(v);
        } catch (const std::logic_error&) {
            if (values.empty() && lineno == 1) continue;  // header row
            throw UsageError(path.string() + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
        }
    }
    if (values.empty()) throw UsageError("parameter file '" + path.string() + "' holds no values");
    return values;
}

/// "n:a:b" -> n seeded uniform draws in [a, b].
std::vector<double> parse_random_params(const std::string& spec, std::uint64_t seed) {
    std::stringstream ss(spec);
    std::string n_s, a_s, b_s;
    if (!std::getline(ss, n_s, ':') || !std::getline(ss, a_s, ':') || !std::getline(ss, b_s)) {
        throw UsageError("random parameters must look like n:a:b, got '" + spec + "'");
    }
    try {
        const int n = std::stoi(n_s);
        if (n < 1) throw UsageError("random parameter count must be positive");
        return recipes::seeded_uniform(n, std::stod(a_s), std::stod(b_s), seed);
    } catch (const std::logic_error&) {
        throw UsageError("random parameters must look like n:a:b, got '" + spec + "'");
    }
}

/// Parameter values from exactly one of the accepted sources.
std::vector<double> collect_params(const std::vector<double>& list, const std::string& grid, const std::string& file,
                                   const std::string& random, std::uint64_t seed) {
    const int given = static_cast<int>(!list.empty()) + static_cast<int>(!grid.empty()) +
                      static_cast<int>(!file.empty()) + static_cast<int>(!random.empty());
    if (given != 1) throw UsageError("give exactly one parameter source (list, grid, file or random)");
    if (!list.empty()) return list;
    if (!grid.empty()) return recipes::parse_param_grid(grid);
    if (!file.empty()) return read_param_file(file);
    return parse_random_params(random, seed);
}

/// Target grid for reconstruction: explicit size on the model's bounds, or the model grid.
Grid target_grid(const Grid& reference, const std::string& size) {
    const auto [n1, n2] = parse_grid_size(size);
    if (n1 == 0) return reference;
    if (reference.is_index()) throw UsageError("latent grids cannot be resized");
    std::vector<Axis> axes = reference.axes();
    if (axes.size() == 1 && n2 != 0) throw UsageError("1D grid takes a single size");
    axes[0].points = n1;
    if (axes.size() == 2) axes[1].points = n2 != 0 ? n2 : n1;
    return Grid(axes);
}

/// Truth snapshots at the prediction's parameters and instants (matched by value).
SnapshotSet align_truth(const SnapshotSet& truth, const SnapshotSet& pred, ReconstructMethod method,
                        const ReconstructOptions& ropt) {
    SnapshotSet t = truth.frame() == Frame::lagrangian ? to_eulerian(truth, pred.grid(), method, ropt) : truth;
    if (t.frame() != Frame::eulerian) throw UsageError("truth must be an Eulerian or Lagrangian field container");
    if (!(t.grid() == pred.grid())) throw UsageError("truth grid does not match the prediction grid");
    if (t.channels() != pred.channels()) throw UsageError("truth channels do not match the prediction");
    std::vector<int> rows;
    for (int p = 0; p < pred.n_params(); ++p) {
        int found = -1;
        for (int q = 0; q < t.n_params() && found < 0; ++q) {
            if ((t.params().row(q) - pred.params().row(p)).cwiseAbs().maxCoeff() <=
                1e-9 * std::max(1.0, pred.params().row(p).cwiseAbs().maxCoeff())) {
                found = q;
            }
        }
        if (found < 0) throw UsageError("truth has no row for prediction parameter row " + std::to_string(p));
        rows.push_back(found);
    }
    const double tol = 1e-6 * pred.times().dt;
    const double k0 = (pred.times().t0 - t.times().t0) / t.times().dt;
    const int first = static_cast<int>(std::lround(k0));
    const double ratio = pred.times().dt / t.times().dt;
    const int stride = static_cast<int>(std::lround(ratio));
    const int last = first + stride * (pred.n_times() - 1);
    if (std::abs(t.times().instant(std::clamp(first, 0, t.n_times() - 1)) - pred.times().t0) > tol ||
        std::abs(ratio - stride) > 1e-6 || stride < 1 || first < 0 || last >= t.n_times()) {
        throw UsageError("truth time axis does not cover the predicted instants");
    }
    std::vector<Mat> traj;
    for (int row : rows) {
        Mat m(static_cast<Eigen::Index>(t.snapshot_size()), pred.n_times());
        for (int k = 0; k < pred.n_times(); ++k) m.col(k) = t.snapshot(row, first + stride * k);
        traj.push_back(std::move(m));
    }
    return SnapshotSet::from_trajectories(pred.grid(), pred.params(), pred.times(), Frame::eulerian, pred.channels(),
                                          traj);
}

void report_errors(const SnapshotSet& truth, const SnapshotSet& pred, const fs::path& csv) {
    const ErrorTable e = relative_l2_error(truth, pred);
    io::export_csv(io::to_csv(e), csv);
    std::cout << "mean relative L2 error " << e.mean << " (table: " << csv.string() << ")\n";
}

fs::path default_error_path(const fs::path& out) {
    fs::path p = out;
    p += ".errors.csv";
    return p;
}

// ---------------------------------------------------------------------------

struct FomArgs {
    std::string problem;
    std::string frame;
    std::vector<double> params;
    std::string param_grid;
    std::string params_file;
    std::string random_params;
    std::string grid;
    double tmax = 0.0;
    double dt = 0.0;
    int snapshots = 0;
    double solver_dt = 0.0;
    double sigma0 = 0.1;
    std::string update;
    std::string out;
};

int run_fom(const FomArgs& a, std::uint64_t seed, int jobs) {
    const recipes::Problem problem = recipes::problem_from_string(a.problem);
    const Frame frame = frame_from_string(a.frame);
    const auto [n1, n2] = parse_grid_size(a.grid);
    const bool two_d = problem == recipes::Problem::advdiff2d || problem == recipes::Problem::burgers2d;
    if (!two_d && n2 != 0) throw UsageError("1D problems take a single grid size");
    const Grid g = recipes::default_grid(problem, n1, n2);
    const TimeAxis times = recipes::make_times(a.tmax, a.snapshots, a.dt);
    const std::vector<double> params = collect_params(a.params, a.param_grid, a.params_file, a.random_params, seed);
    recipes::BuildOptions bo;
    bo.jobs = jobs;
    bo.solver_dt = a.solver_dt;
    bo.sigma0 = a.sigma0;
    if (!a.update.empty()) bo.update = lagrangian_update_from_string(a.update);
    log::info("building " + a.problem + " (" + a.frame + ") at " + std::to_string(params.size()) + " parameters");
    const SnapshotSet s = recipes::build_dataset(problem, frame, params, g, times, bo);
    io::write_container(s, a.out);
    std::cout << "wrote " << a.out << " " << shape_string(s) << "\n";
    return 0;
}

struct TrainArgs {
    std::string in;
    std::string compressor = "pod";
    int rank = 0;
    bool normalize = false;
    double latent_cutoff = kSigmaFloor;
    std::string tail = "linear";
    std::string latents_out;
    std::string out;
};

int run_train(const TrainArgs& a) {
    const SnapshotSet train = io::read_container(a.in);
    PdmdOptions opt;
    opt.tail = rbf_tail_from_string(a.tail);
    opt.latent_cutoff = a.latent_cutoff;
    Compressor c;
    const std::string ext_prefix = "external:";
    if (a.compressor == "pod") {
        if (a.rank < 1) throw UsageError("--rank is required for the pod compressor");
        c = fit_pod(train, a.rank, a.normalize);
    } else if (a.compressor.rfind(ext_prefix, 0) == 0) {
        const std::string path = a.compressor.substr(ext_prefix.size());
        if (path.empty()) throw UsageError("external compressor needs a latent container path");
        auto latents = std::make_shared<const SnapshotSet>(io::read_container(path));
        if (a.rank > 0 && a.rank != latents->grid().size()) {
            throw UsageError("--rank " + std::to_string(a.rank) + " does not match the latent width " +
                             std::to_string(latents->grid().size()));
        }
        c = Compressor::external(std::move(latents), path);
    } else {
        throw UsageError("unknown compressor '" + a.compressor + "' (pod or external:<path>)");
    }
    const PdmdModel m = fit_pdmd(train, std::move(c), opt);
    io::write_model(m, a.out);
    if (!a.latents_out.empty()) {
        if (m.compressor.kind != Compressor::Kind::pod) throw UsageError("--latents-out needs the pod compressor");
        io::write_container(encode_latents(m.compressor, train), a.latents_out);
    }
    std::cout << "wrote " << a.out << " (rank " << m.rank() << ", " << m.params.count() << " parameters)\n";
    return 0;
}

struct PredictArgs {
    std::string model;
    std::vector<double> mu;
    std::string mu_random;
    int steps = 0;
    std::string truth;
    std::string grid;
    std::string method;
    double tangle_tolerance = ReconstructOptions{}.tangle_tolerance;
    std::string errors;
    std::string out;
};

ReconstructOptions reconstruct_options(double tangle_tolerance) {
    ReconstructOptions o;
    o.tangle_tolerance = tangle_tolerance;
    return o;
}

int run_predict(const PredictArgs& a, std::uint64_t seed) {
    const PdmdModel m = io::read_model(a.model);
    const std::vector<double> mu = collect_params(a.mu, "", "", a.mu_random, seed);
    if (m.params.dim() != 1) throw UsageError("--mu takes scalar parameters; the model has dimension " +
                                              std::to_string(m.params.dim()));
    const ParamSet targets = ParamSet::scalar(m.params.names().front(), mu);
    if (m.compressor.kind == Compressor::Kind::external) {
        // Decoding happens outside; hand back the latent predictions.
        const std::vector<Mat> lat = predict_pdmd_series(m, targets.values(), a.steps);
        const TimeAxis times(m.anchor_time() + m.times.dt, m.times.dt, a.steps);
        const SnapshotSet s = SnapshotSet::from_trajectories(Grid::index(m.rank()), targets, times, Frame::latent,
                                                             {"h"}, lat);
        io::write_container(s, a.out);
        std::cout << "wrote latent predictions " << a.out << " " << shape_string(s) << "\n";
        if (!a.truth.empty()) log::warn("--truth ignored: decode the latents, then run `reconstruct --truth`");
        return 0;
    }
    const ReconstructMethod method =
        a.method.empty() ? default_reconstruct_method(m.grid) : reconstruct_method_from_string(a.method);
    const ReconstructOptions ropt = reconstruct_options(a.tangle_tolerance);
    std::optional<SnapshotSet> truth;
    if (!a.truth.empty()) truth = io::read_container(a.truth);
    Grid target = target_grid(m.grid, a.grid);
    if (truth && a.grid.empty()) target = truth->grid();
    if (m.frame == Frame::eulerian && !(target == m.grid)) throw UsageError("Eulerian models predict on their own grid");
    const SnapshotSet pred = predict_fields(m, targets, a.steps, target, method, {}, ropt);
    io::write_container(pred, a.out);
    std::cout << "wrote " << a.out << " " << shape_string(pred) << "\n";
    if (truth) report_errors(align_truth(*truth, pred, method, ropt), pred, a.errors.empty() ? default_error_path(a.out) : fs::path(a.errors));
    return 0;
}

struct ReconstructArgs {
    std::string in;
    std::string model;
    std::string grid;
    std::string method;
    double tangle_tolerance = ReconstructOptions{}.tangle_tolerance;
    std::string truth;
    std::string errors;
    std::string out;
};

int run_reconstruct(const ReconstructArgs& a) {
    const SnapshotSet in = io::read_container(a.in);
    const ReconstructOptions ropt = reconstruct_options(a.tangle_tolerance);
    SnapshotSet out = [&]() -> SnapshotSet {
        if (a.model.empty()) {
            const ReconstructMethod method =
                a.method.empty() ? default_reconstruct_method(in.grid()) : reconstruct_method_from_string(a.method);
            return to_eulerian(in, target_grid(in.grid(), a.grid), method, ropt);
        }
        // Externally decoded full-order vectors laid out like the model's training data.
        const PdmdModel m = io::read_model(a.model);
        if (!(in.grid() == m.grid) || in.channels() != m.channels) {
            throw UsageError("decoded container does not match the model's grid and channels");
        }
        const ReconstructMethod method =
            a.method.empty() ? default_reconstruct_method(m.grid) : reconstruct_method_from_string(a.method);
        const Grid target = target_grid(m.grid, a.grid);
        const std::vector<std::string> states = m.state_channels();
        const Eigen::Index nt = target.size();
        std::vector<Mat> traj;
        for (int p = 0; p < in.n_params(); ++p) {
            Mat mat(static_cast<Eigen::Index>(states.size()) * nt, in.n_times());
            for (int k = 0; k < in.n_times(); ++k) {
                const std::vector<Vec> f = reconstruct_decoded(m, Vec(in.snapshot(p, k)), target, method, ropt);
                for (std::size_t c = 0; c < f.size(); ++c) mat.col(k).segment(static_cast<Eigen::Index>(c) * nt, nt) = f[c];
            }
            traj.push_back(std::move(mat));
        }
        return SnapshotSet::from_trajectories(target, in.params(), in.times(), Frame::eulerian, states, traj);
    }();
    io::write_container(out, a.out);
    std::cout << "wrote " << a.out << " " << shape_string(out) << "\n";
    if (!a.truth.empty()) {
        const ReconstructMethod method =
            a.method.empty() ? default_reconstruct_method(out.grid()) : reconstruct_method_from_string(a.method);
        report_errors(align_truth(io::read_container(a.truth), out, method, ropt), out,
                      a.errors.empty() ? default_error_path(a.out) : fs::path(a.errors));
    }
    return 0;
}

struct CoherenceArgs {
    std::string in;
    std::string eval;
    double train_until = std::nan("");
    int param_index = 0;
    std::string out;
};

int run_coherence(const CoherenceArgs& a) {
    const SnapshotSet s = io::read_container(a.in);
    SnapshotSet train = s;
    std::optional<SnapshotSet> eval;
    if (!a.eval.empty()) {
        eval = io::read_container(a.eval);
    } else {
        if (std::isnan(a.train_until)) throw UsageError("give --eval or --train-until");
        int split = -1;
        for (int k = 0; k < s.n_times(); ++k) {
            if (s.times().instant(k) <= a.train_until + 1e-9 * s.times().dt) split = k;
        }
        if (split < 0 || split + 1 >= s.n_times()) throw UsageError("--train-until leaves an empty training or evaluation window");
        train = subset_time(s, 0, split);
        eval = subset_time(s, split + 1, s.n_times() - 1);
    }
    if (a.param_index < 0 || a.param_index >= eval->n_params()) throw UsageError("--param-index out of range");
    const CoherenceSeries c = coherence(train, *eval, a.param_index);
    io::export_csv(io::to_csv(c), a.out);
    std::cout << "wrote " << a.out << " (min gamma " << c.gamma.minCoeff() << ")\n";
    return 0;
}

int run_nwidth(const std::string& in, int n_max, const std::string& out) {
    const SnapshotSet s = io::read_container(in);
    const int cols = s.n_params() * s.n_times();
    const NWidthCurve c = nwidth_proxy(s, n_max < 0 ? std::min(cols, 50) : n_max);
    io::export_csv(io::to_csv(c), out);
    std::cout << "wrote " << out << "\n";
    return 0;
}

int run_svd(const std::string& in, int count, const std::string& out) {
    const SnapshotSet s = io::read_container(in);
    Vec sv = singular_value_decay(s);
    if (count > 0 && count < sv.size()) sv.conservativeResize(count);
    io::export_csv(io::singular_values_csv(sv), out);
    const int rank = linalg::numerical_rank(sv, kRankThreshold);
    std::cout << "wrote " << out << " (numerical rank " << rank << " at " << kRankThreshold << ")\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"lagrom: Lagrangian/Eulerian reduced-order modeling driver"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand
    std::uint64_t seed = 0;
    int jobs = 1;
    app.add_option("--seed", seed, "Seed for random parameter sampling")->capture_default_str();
    app.add_option("--jobs", jobs, "Worker threads over parameters")->check(CLI::PositiveNumber)->capture_default_str();

    FomArgs fa;
    CLI::App* fom = app.add_subcommand("fom", "Generate full-order snapshots");
    fom->add_option("--problem", fa.problem, "adv1d | burgers1d | advdiff1d | advdiff2d | burgers2d")->required();
    fom->add_option("--frame", fa.frame, "eulerian | lagrangian")->required();
    fom->add_option("--params", fa.params, "Comma-separated parameter values")->delimiter(',');
    fom->add_option("--param-grid", fa.param_grid, "Inclusive linspace a:b:n");
    fom->add_option("--params-file", fa.params_file, "CSV file, one parameter per row");
    fom->add_option("--random-params", fa.random_params, "n:a:b seeded uniform draws");
    fom->add_option("--grid", fa.grid, "N or NxM (default: problem grid)");
    fom->add_option("--tmax", fa.tmax, "Final time")->required();
    fom->add_option("--dt", fa.dt, "Output interval");
    fom->add_option("--snapshots", fa.snapshots, "Number of output instants over [0, tmax]");
    fom->add_option("--solver-dt", fa.solver_dt, "Solver step (must divide the output interval)");
    fom->add_option("--sigma0", fa.sigma0, "advdiff1d initial smoothing time")->capture_default_str();
    fom->add_option("--lagrangian-update", fa.update, "increment | remap (default per problem)");
    fom->add_option("--out", fa.out, "Output container")->required();

    TrainArgs ta;
    CLI::App* train = app.add_subcommand("train", "Offline pDMD training");
    train->add_option("--in", ta.in, "Training container")->required();
    train->add_option("--compressor", ta.compressor, "pod | external:<latent container>")->capture_default_str();
    train->add_option("--rank", ta.rank, "Latent dimension r");
    train->add_flag("--normalize", ta.normalize, "Per-channel z-score before POD");
    train->add_option("--latent-cutoff", ta.latent_cutoff, "Relative pseudo-inverse cutoff of the operator fits")
        ->capture_default_str();
    train->add_option("--tail", ta.tail, "RBF polynomial tail: none | constant | linear")->capture_default_str();
    train->add_option("--latents-out", ta.latents_out, "Also write the training latents (pod only)");
    train->add_option("--out", ta.out, "Output model")->required();

    PredictArgs pa;
    CLI::App* predict = app.add_subcommand("predict", "Online prediction at new parameters");
    predict->add_option("--model", pa.model, "Model file")->required();
    predict->add_option("--mu", pa.mu, "Comma-separated target parameters")->delimiter(',');
    predict->add_option("--mu-random", pa.mu_random, "n:a:b seeded uniform targets");
    predict->add_option("--steps", pa.steps, "Steps beyond the final training instant")->required();
    predict->add_option("--truth", pa.truth, "Truth container for the error table");
    predict->add_option("--grid", pa.grid, "Target grid size (default: truth or model grid)");
    predict->add_option("--method", pa.method, "Reconstruction: rbf | linear (default 1D rbf, 2D linear)");
    predict->add_option("--tangle-tolerance", pa.tangle_tolerance, "Allowed node-order inversion depth")
        ->capture_default_str();
    predict->add_option("--errors", pa.errors, "Error table CSV (default <out>.errors.csv)");
    predict->add_option("--out", pa.out, "Output container")->required();

    ReconstructArgs ra;
    CLI::App* recon = app.add_subcommand("reconstruct", "Eulerian fields from Lagrangian or decoded data");
    recon->add_option("--in", ra.in, "Lagrangian container, or decoded container with --model")->required();
    recon->add_option("--model", ra.model, "Model whose layout the decoded container follows");
    recon->add_option("--grid", ra.grid, "Target grid size (default: reference grid)");
    recon->add_option("--method", ra.method, "rbf | linear");
    recon->add_option("--tangle-tolerance", ra.tangle_tolerance, "Allowed node-order inversion depth")
        ->capture_default_str();
    recon->add_option("--truth", ra.truth, "Truth container for the error table");
    recon->add_option("--errors", ra.errors, "Error table CSV (default <out>.errors.csv)");
    recon->add_option("--out", ra.out, "Output container")->required();

    CoherenceArgs ca;
    CLI::App* coh = app.add_subcommand("coherence", "Coherence of evaluation snapshots against training snapshots");
    coh->add_option("--in", ca.in, "Training container (or full container with --train-until)")->required();
    coh->add_option("--eval", ca.eval, "Evaluation container");
    coh->add_option("--train-until", ca.train_until, "Split one container at this time");
    coh->add_option("--param-index", ca.param_index, "Parameter row")->capture_default_str();
    coh->add_option("--out", ca.out, "Output CSV")->required();

    std::string nw_in, nw_out;
    int nw_max = -1;
    CLI::App* nw = app.add_subcommand("nwidth", "POD n-width proxy curve");
    nw->add_option("--in", nw_in, "Container")->required();
    nw->add_option("--n-max", nw_max, "Largest n (default min(samples, 50))");
    nw->add_option("--out", nw_out, "Output CSV")->required();

    std::string sv_in, sv_out;
    int sv_count = 0;
    CLI::App* svd = app.add_subcommand("svd", "Normalized singular values of the global snapshot matrix");
    svd->add_option("--in", sv_in, "Container")->required();
    svd->add_option("--count", sv_count, "Keep only the leading values");
    svd->add_option("--out", sv_out, "Output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*fom) return run_fom(fa, seed, jobs);
        if (*train) return run_train(ta);
        if (*predict) return run_predict(pa, seed);
        if (*recon) return run_reconstruct(ra);
        if (*coh) return run_coherence(ca);
        if (*nw) return run_nwidth(nw_in, nw_max, nw_out);
        if (*svd) return run_svd(sv_in, sv_count, sv_out);
    } catch (const Error& e) {
        const char* what = e.kind() == ErrorKind::numerical ? "numerical failure: "
                           : e.kind() == ErrorKind::io      ? "I/O error: "
                                                            : "";
        std::cerr << "lagrom: " << what << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "lagrom: numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitUsage;
}

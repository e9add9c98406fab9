#pragma once

// Parametric DMD in either frame: a global compressor, one latent operator per
// training parameter anchored at the final training instant, and per-step
// radial-basis interpolation of the evolved latents across parameters.

#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "lagrom/core.hpp"
#include "lagrom/dmd.hpp"
#include "lagrom/lagframe.hpp"
#include "lagrom/linalg.hpp"
#include "lagrom/rbf.hpp"

namespace lagrom {

/// Per-channel affine map x -> (x - mean) / scale. Empty means identity.
struct ChannelNormalization {
    std::vector<double> mean;
    std::vector<double> scale;

    bool enabled() const { return !mean.empty(); }

    static ChannelNormalization zscore(const SnapshotSet& s) {
        ChannelNormalization n;
        const int nc = s.n_channels();
        const Eigen::Index ns = s.grid().size();
        n.mean.assign(static_cast<std::size_t>(nc), 0.0);
        n.scale.assign(static_cast<std::size_t>(nc), 0.0);
        for (int c = 0; c < nc; ++c) {
            double sum = 0.0, sq = 0.0, count = 0.0;
            for (int p = 0; p < s.n_params(); ++p) {
                for (int k = 0; k < s.n_times(); ++k) {
                    const auto ch = s.channel(p, k, c);
                    sum += ch.sum();
                    sq += ch.squaredNorm();
                    count += static_cast<double>(ns);
                }
            }
            const double mean = sum / count;
            const double var = std::max(sq / count - mean * mean, 0.0);
            n.mean[static_cast<std::size_t>(c)] = mean;
            n.scale[static_cast<std::size_t>(c)] = var > 0.0 ? std::sqrt(var) : 1.0;
        }
        return n;
    }

    Vec apply(const Vec& x, Eigen::Index channel_size) const {
        if (!enabled()) return x;
        Vec y = x;
        for (std::size_t c = 0; c < mean.size(); ++c) {
            auto seg = y.segment(static_cast<Eigen::Index>(c) * channel_size, channel_size);
            seg = (seg.array() - mean[c]) / scale[c];
        }
        return y;
    }

    Vec invert(const Vec& y, Eigen::Index channel_size) const {
        if (!enabled()) return y;
        Vec x = y;
        for (std::size_t c = 0; c < mean.size(); ++c) {
            auto seg = x.segment(static_cast<Eigen::Index>(c) * channel_size, channel_size);
            seg = seg.array() * scale[c] + mean[c];
        }
        return x;
    }
};

/// Global linear (POD) compressor or a handle on latents produced externally.
struct Compressor {
    enum class Kind { pod, external };
    Kind kind = Kind::pod;
    Mat basis;                          ///< pod: n x r orthonormal
    Vec sigma;                          ///< pod: retained singular values
    ChannelNormalization normalization;
    std::string source;                 ///< external: latent container path (informational)
    std::shared_ptr<const SnapshotSet> latents;  ///< external: [n_p, n_t, r]

    int rank() const {
        if (kind == Kind::pod) return static_cast<int>(basis.cols());
        return latents ? latents->grid().size() : 0;
    }

    Vec encode(const Vec& snapshot, Eigen::Index channel_size) const {
        if (kind != Kind::pod) throw UsageError("external compressor cannot encode in-process");
        return basis.transpose() * normalization.apply(snapshot, channel_size);
    }

    Vec decode(const Vec& latent, Eigen::Index channel_size) const {
        if (kind != Kind::pod) throw UsageError("external compressor cannot decode in-process");
        if (latent.size() != basis.cols()) throw UsageError("latent length does not match compressor rank");
        return normalization.invert(basis * latent, channel_size);
    }

    /// Leading `r` POD modes; identical to refitting at rank r, without the SVD.
    Compressor truncated(int r) const {
        if (kind != Kind::pod) throw UsageError("only POD compressors can be truncated");
        if (r < 1 || r > basis.cols()) throw UsageError("truncation rank must lie in [1, current rank]");
        Compressor c = *this;
        c.basis = basis.leftCols(r);
        c.sigma = sigma.head(r);
        return c;
    }

    static Compressor external(std::shared_ptr<const SnapshotSet> latent_set, std::string source = {}) {
        if (!latent_set || latent_set->frame() != Frame::latent) {
            throw UsageError("external compressor needs a latent-frame container");
        }
        Compressor c;
        c.kind = Kind::external;
        c.latents = std::move(latent_set);
        c.source = std::move(source);
        return c;
    }
};

/// Global POD basis of all parameters and training times.
inline Compressor fit_pod(const SnapshotSet& snaps, int r, bool normalize = false) {
    if (r < 1) throw UsageError("POD rank must be at least 1");
    Compressor c;
    if (normalize) c.normalization = ChannelNormalization::zscore(snaps);
    Mat m = global_matrix(snaps);
    if (c.normalization.enabled()) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) m.col(j) = c.normalization.apply(m.col(j), snaps.grid().size());
    }
    const int cols = static_cast<int>(m.cols());
    const linalg::ThinSvd svd = linalg::thin_svd(m, r);
    const int achievable = linalg::numerical_rank(svd.S, kSigmaFloor);
    if (cols < r || achievable < r) {
        throw RankError("requested rank " + std::to_string(r) + " exceeds achievable rank " +
                            std::to_string(achievable),
                        achievable);
    }
    c.basis = svd.U.leftCols(r);
    c.sigma = svd.S.head(r);
    return c;
}

struct PdmdModel {
    Compressor compressor;
    ParamSet params;
    std::vector<Mat> operators;  ///< one r x r per parameter
    std::vector<Vec> anchors;    ///< latent state at the final training instant
    RbfTail tail = RbfTail::linear;
    double latent_cutoff = kSigmaFloor;  ///< relative pseudo-inverse cutoff of the operator fits
    Frame frame = Frame::eulerian;
    Grid grid;                   ///< reference grid of the training data
    std::vector<std::string> channels;
    TimeAxis times;              ///< training time axis

    int rank() const { return operators.empty() ? 0 : static_cast<int>(operators.front().rows()); }
    int n_coords() const { return frame == Frame::lagrangian ? grid.dim() : 0; }
    std::vector<std::string> state_channels() const {
        return {channels.begin() + n_coords(), channels.end()};
    }
    double anchor_time() const { return times.last(); }

    void validate() const {
        if (operators.size() != static_cast<std::size_t>(params.count()) || anchors.size() != operators.size()) {
            throw UsageError("model needs one operator and one anchor per parameter");
        }
        const int r = rank();
        for (std::size_t i = 0; i < operators.size(); ++i) {
            if (operators[i].rows() != r || operators[i].cols() != r || anchors[i].size() != r) {
                throw UsageError("model operators must share rank " + std::to_string(r));
            }
            if (!anchors[i].allFinite() || !operators[i].allFinite()) throw NumericalError("non-finite model entries");
        }
    }
};

/// Latent trajectory (r x n_t) of parameter p under the model's compressor.
inline Mat encode_trajectory(const Compressor& c, const SnapshotSet& s, int p) {
    if (c.kind == Compressor::Kind::external) {
        const SnapshotSet& l = *c.latents;
        Mat h(l.grid().size(), l.n_times());
        for (int k = 0; k < l.n_times(); ++k) h.col(k) = l.snapshot(p, k);
        return h;
    }
    Mat h(c.rank(), s.n_times());
    for (int k = 0; k < s.n_times(); ++k) h.col(k) = c.encode(s.snapshot(p, k), s.grid().size());
    return h;
}

struct PdmdOptions {
    RbfTail tail = RbfTail::linear;
    /// Relative singular-value cutoff of H- in every per-parameter fit. Latent
    /// directions a trajectory barely excites sit near this level; raising it
    /// keeps discretization noise from being inverted.
    double latent_cutoff = kSigmaFloor;
};

/// Offline stage: encode, fit one latent operator per parameter, keep anchors.
inline PdmdModel fit_pdmd(const SnapshotSet& train, Compressor compressor, const PdmdOptions& opt = {}) {
    if (!(opt.latent_cutoff >= 0.0 && opt.latent_cutoff < 1.0)) throw UsageError("latent cutoff must lie in [0, 1)");
    if (compressor.kind == Compressor::Kind::external) {
        const SnapshotSet& l = *compressor.latents;
        if (l.n_params() != train.n_params() || l.n_times() != train.n_times()) {
            throw UsageError("latent container shape [" + std::to_string(l.n_params()) + ", " +
                             std::to_string(l.n_times()) + ", r] does not match the training set");
        }
    } else if (compressor.basis.rows() != static_cast<Eigen::Index>(train.snapshot_size())) {
        throw UsageError("compressor basis does not match the training snapshot size");
    }
    PdmdModel m;
    m.params = train.params();
    m.tail = opt.tail;
    m.latent_cutoff = opt.latent_cutoff;
    m.frame = train.frame();
    m.grid = train.grid();
    m.channels = train.channels();
    m.times = train.times();
    const int r = compressor.rank();
    if (train.n_times() - 1 < r) {
        throw UsageError("trajectory of " + std::to_string(train.n_times()) + " snapshots is too short for rank " +
                         std::to_string(r));
    }
    double worst_radius = 0.0;
    int worst_param = 0;
    for (int p = 0; p < train.n_params(); ++p) {
        const Mat h = encode_trajectory(compressor, train, p);
        Mat a;
        try {
            a = fit_latent_dmd(h, opt.latent_cutoff);
        } catch (const Error& e) {
            std::ostringstream os;
            os << "parameter " << p << " (" << train.params().row(p).transpose() << "): " << e.what();
            if (e.kind() == ErrorKind::usage) throw UsageError(os.str());
            throw NumericalError(os.str());
        }
        const double rho = spectral_radius(a);
        if (rho > worst_radius) {
            worst_radius = rho;
            worst_param = p;
        }
        m.operators.push_back(std::move(a));
        m.anchors.push_back(h.col(h.cols() - 1));
    }
    if (worst_radius > 1.0) {
        log::warn("latent operator spectral radius " + std::to_string(worst_radius) + " > 1 at parameter " +
                  std::to_string(worst_param));
    }
    m.compressor = std::move(compressor);
    m.validate();
    return m;
}

/// Online stage, steps 1-2: evolved latents at t_n + k dt for k = 1..steps,
/// interpolated to every requested parameter. Returns one r x steps matrix per row of `targets`.
inline std::vector<Mat> predict_pdmd_series(const PdmdModel& model, const Mat& targets, int steps) {
    if (steps < 1) throw UsageError("prediction needs at least one step");
    if (targets.cols() != model.params.dim()) throw UsageError("target parameters have the wrong dimension");
    model.validate();
    const Mat& nodes = model.params.values();
    const Vec lo = nodes.colwise().minCoeff().transpose();
    const Vec hi = nodes.colwise().maxCoeff().transpose();
    for (Eigen::Index t = 0; t < targets.rows(); ++t) {
        const Vec mu = targets.row(t).transpose();
        if ((mu.array() < lo.array()).any() || (mu.array() > hi.array()).any()) {
            log::warn("parameter row " + std::to_string(t) + " lies outside the training bounding box");
        }
    }
    const RbfBasis basis(nodes, model.tail);
    const int np = model.params.count();
    const int r = model.rank();
    std::vector<Vec> h = model.anchors;
    std::vector<Mat> out(static_cast<std::size_t>(targets.rows()), Mat(r, steps));
    Mat values(np, r);
    for (int k = 1; k <= steps; ++k) {
        for (int i = 0; i < np; ++i) {
            const Vec next = model.operators[static_cast<std::size_t>(i)] * h[static_cast<std::size_t>(i)];
            detail::guard_growth(next.norm(), model.anchors[static_cast<std::size_t>(i)].norm(),
                                 model.operators[static_cast<std::size_t>(i)], k);
            h[static_cast<std::size_t>(i)] = next;
            values.row(i) = next.transpose();
        }
        const RbfInterpolant interp = basis.fit(values);
        for (Eigen::Index t = 0; t < targets.rows(); ++t) {
            out[static_cast<std::size_t>(t)].col(k - 1) = interp.evaluate(targets.row(t).transpose());
        }
    }
    return out;
}

/// Latent state at mu* after k steps beyond the final training instant.
inline Vec predict_pdmd(const PdmdModel& model, const Vec& mu, int k) {
    return predict_pdmd_series(model, mu.transpose(), k).front().col(k - 1);
}

inline ReconstructMethod default_reconstruct_method(const Grid& g) {
    return g.dim() == 1 ? ReconstructMethod::rbf : ReconstructMethod::linear;
}

/// Turns one decoded full-order vector (channel-stacked, model layout) into
/// Eulerian state fields on `target`.
inline std::vector<Vec> reconstruct_decoded(const PdmdModel& model, const Vec& decoded, const Grid& target,
                                            ReconstructMethod method, const ReconstructOptions& opt = {}) {
    const Eigen::Index ns = model.grid.size();
    const int nc = static_cast<int>(model.channels.size());
    if (decoded.size() != nc * ns) throw UsageError("decoded vector does not match the model's channel layout");
    if (model.frame == Frame::lagrangian) {
        const LagrangianState st = unstack(decoded, model.grid, model.n_coords(), nc - model.n_coords());
        return reconstruct_eulerian(st, target, method, opt);
    }
    if (!(target == model.grid)) throw UsageError("Eulerian models reconstruct on their own grid only");
    std::vector<Vec> out;
    for (int c = 0; c < nc; ++c) out.push_back(decoded.segment(c * ns, ns));
    return out;
}

/// Decoder used for latent -> full-order vectors (pod in-process by default).
using Decoder = std::function<Vec(const Vec& latent)>;

inline Decoder pod_decoder(const PdmdModel& model) {
    return [&model](const Vec& h) { return model.compressor.decode(h, model.grid.size()); };
}

inline std::vector<Vec> decode_and_reconstruct(const PdmdModel& model, const Vec& latent, const Grid& target,
                                               ReconstructMethod method, const ReconstructOptions& opt = {}) {
    return reconstruct_decoded(model, model.compressor.decode(latent, model.grid.size()), target, method, opt);
}

/// Full online stage: Eulerian predictions on `target` for every row of `targets`
/// at the `steps` instants following the final training time.
inline SnapshotSet predict_fields(const PdmdModel& model, const ParamSet& targets, int steps, const Grid& target,
                                  ReconstructMethod method, const Decoder& decoder = {},
                                  const ReconstructOptions& opt = {}) {
    const std::vector<Mat> latents = predict_pdmd_series(model, targets.values(), steps);
    const Decoder dec = decoder ? decoder : pod_decoder(model);
    std::vector<Mat> traj;
    const std::vector<std::string> states = model.state_channels();
    const Eigen::Index nt = target.size();
    for (std::size_t t = 0; t < latents.size(); ++t) {
        Mat m(static_cast<Eigen::Index>(states.size()) * nt, steps);
        for (int k = 0; k < steps; ++k) {
            std::vector<Vec> fields;
            try {
                fields = reconstruct_decoded(model, dec(latents[t].col(k)), target, method, opt);
            } catch (const NumericalError& e) {
                throw NumericalError("parameter row " + std::to_string(t) + ", step " + std::to_string(k + 1) +
                                     ": " + e.what());
            }
            for (std::size_t c = 0; c < fields.size(); ++c) m.col(k).segment(static_cast<Eigen::Index>(c) * nt, nt) = fields[c];
        }
        traj.push_back(std::move(m));
    }
    const TimeAxis times(model.anchor_time() + model.times.dt, model.times.dt, steps);
    return SnapshotSet::from_trajectories(target, targets, times, Frame::eulerian, states, traj);
}

/// Latent container [n_p, n_t, r] of every training trajectory under a POD compressor.
inline SnapshotSet encode_latents(const Compressor& c, const SnapshotSet& s) {
    std::vector<Mat> traj;
    for (int p = 0; p < s.n_params(); ++p) traj.push_back(encode_trajectory(c, s, p));
    return SnapshotSet::from_trajectories(Grid::index(c.rank()), s.params(), s.times(), Frame::latent, {"h"}, traj);
}

}  // namespace lagrom

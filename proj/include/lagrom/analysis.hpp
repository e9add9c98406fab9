#pragma once

// Evaluation mathematics: coherence coefficient, relative L2 error tables,
// normalized singular-value decay and a POD-based n-width proxy.

#include <cmath>
#include <string>
#include <vector>

#include "lagrom/core.hpp"
#include "lagrom/linalg.hpp"

namespace lagrom {

/// Relative threshold for counting numerically nonzero singular values.
inline constexpr double kRankThreshold = 1e-10;

struct CoherenceSeries {
    Vec times;
    Vec gamma;
    Frame frame = Frame::eulerian;
};

/// gamma(t) = max_s |<w(t), w(s)>| / (|w(t)| |w(s)|) with plain dot products of
/// flattened snapshots, s ranging over every training time of the same
/// parameter row (or of every parameter when the sets differ in parameter count).
inline CoherenceSeries coherence(const SnapshotSet& train, const SnapshotSet& eval, int param_index = 0) {
    if (!(train.grid() == eval.grid()) || train.channels() != eval.channels()) {
        throw UsageError("coherence needs matching grids and channels");
    }
    std::vector<int> rows;
    if (train.n_params() == eval.n_params()) rows.push_back(param_index);
    else for (int p = 0; p < train.n_params(); ++p) rows.push_back(p);

    std::vector<Vec> refs;
    std::vector<double> ref_norms;
    for (int p : rows) {
        for (int s = 0; s < train.n_times(); ++s) {
            refs.emplace_back(train.snapshot(p, s));
            const double n = refs.back().norm();
            if (n == 0.0) throw NumericalError("zero-norm training snapshot at time index " + std::to_string(s));
            ref_norms.push_back(n);
        }
    }
    CoherenceSeries out;
    out.frame = eval.frame();
    out.times.resize(eval.n_times());
    out.gamma.resize(eval.n_times());
    for (int k = 0; k < eval.n_times(); ++k) {
        const auto w = eval.snapshot(param_index, k);
        const double nw = w.norm();
        if (nw == 0.0) throw NumericalError("zero-norm evaluation snapshot at time index " + std::to_string(k));
        double best = 0.0;
        for (std::size_t i = 0; i < refs.size(); ++i) {
            best = std::max(best, std::abs(w.dot(refs[i])) / (nw * ref_norms[i]));
        }
        out.times[k] = eval.times().instant(k);
        out.gamma[k] = std::min(best, 1.0);
    }
    return out;
}

/// Per-(parameter, time) relative errors and their mean.
struct ErrorTable {
    ParamSet params;
    TimeAxis times;
    Mat errors;  ///< n_params x n_times
    double mean = 0.0;
};

/// ||u - u_hat||_2 / ||u||_2 per snapshot, averaged over all parameters and times.
inline ErrorTable relative_l2_error(const SnapshotSet& truth, const SnapshotSet& pred) {
    if (truth.n_params() != pred.n_params() || truth.n_times() != pred.n_times() ||
        truth.snapshot_size() != pred.snapshot_size()) {
        throw UsageError("relative error needs matching shapes");
    }
    ErrorTable t{truth.params(), truth.times(), Mat(truth.n_params(), truth.n_times()), 0.0};
    for (int p = 0; p < truth.n_params(); ++p) {
        for (int k = 0; k < truth.n_times(); ++k) {
            const auto u = truth.snapshot(p, k);
            const double nu = u.norm();
            if (nu == 0.0) {
                throw NumericalError("zero-norm truth snapshot at (" + std::to_string(p) + ", " + std::to_string(k) + ")");
            }
            t.errors(p, k) = (u - pred.snapshot(p, k)).norm() / nu;
        }
    }
    t.mean = t.errors.mean();
    return t;
}

/// Singular values of the global snapshot matrix divided by sigma_1.
inline Vec singular_value_decay(const SnapshotSet& s) {
    Vec sv = linalg::singular_values(global_matrix(s));
    if (sv.size() == 0 || sv[0] == 0.0) return sv;
    return sv / sv[0];
}

struct NWidthCurve {
    std::vector<int> n;
    Vec d_hat;
    double d0 = 0.0;  ///< max sample norm
};

/// d_hat_n = max over samples of the residual after projecting onto the leading
/// n POD modes of the samples, computed without cancellation as
/// sqrt(sum_{i>=n} sigma_i^2 V_ji^2).
inline NWidthCurve nwidth_proxy(const Mat& samples, int n_max) {
    if (n_max < 0 || n_max > samples.cols()) throw UsageError("n_max must lie in [0, sample count]");
    const linalg::ThinSvd svd = linalg::thin_svd(samples);
    const Eigen::Index k = svd.S.size();
    // tail[j, n] = sum_{i>=n} sigma_i^2 V_ji^2, accumulated from the smallest term.
    Mat w = (svd.V.leftCols(k) * svd.S.asDiagonal()).array().square().matrix();
    NWidthCurve c;
    c.d_hat = Vec::Zero(n_max + 1);
    Vec tail = Vec::Zero(samples.cols());
    for (Eigen::Index n = k; n >= 0; --n) {
        if (n < k) tail += w.col(n);
        if (n <= n_max) c.d_hat[n] = std::sqrt(tail.maxCoeff());
    }
    for (int n = 0; n <= n_max; ++n) c.n.push_back(n);
    c.d0 = samples.colwise().norm().maxCoeff();
    return c;
}

inline NWidthCurve nwidth_proxy(const SnapshotSet& s, int n_max) { return nwidth_proxy(global_matrix(s), n_max); }

}  // namespace lagrom

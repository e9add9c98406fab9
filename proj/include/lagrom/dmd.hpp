#pragma once

// Single-parameter dynamic mode decomposition: truncated SVD of the shifted
// snapshot pair, reduced operator, lazy eigendecomposition and k-step
// prediction through either repeated reduced products or the spectral form.

#include <cmath>
#include <complex>
#include <memory>
#include <optional>
#include <string>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "lagrom/core.hpp"
#include "lagrom/linalg.hpp"

namespace lagrom {

using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;

/// Relative singular-value floor below which a direction counts as absent.
inline constexpr double kSigmaFloor = 1e-12;
/// Predictions whose norm exceeds this multiple of the input norm are rejected.
inline constexpr double kOverflowGuard = 1e12;

struct EigenData {
    CVec values;   ///< Lambda
    CMat vectors;  ///< W, columns are eigenvectors
};

/// Computes eigenvalues/eigenvectors of a real square matrix.
inline EigenData eigen_decompose(const Mat& a) {
    Eigen::EigenSolver<Mat> es(a, true);
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition did not converge");
    return {es.eigenvalues(), es.eigenvectors()};
}

inline double spectral_radius(const Mat& a) {
    if (a.size() == 0) return 0.0;
    Eigen::EigenSolver<Mat> es(a, false);
    if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition did not converge");
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

class ReducedOperator {
public:
    ReducedOperator(Mat basis, Mat atilde, Vec sigma, Frame frame = Frame::eulerian, Vec param = {},
                    bool degenerate = false)
        : basis_(std::move(basis)),
          atilde_(std::move(atilde)),
          sigma_(std::move(sigma)),
          frame_(frame),
          param_(std::move(param)),
          degenerate_(degenerate) {
        if (atilde_.rows() != atilde_.cols() || basis_.cols() != atilde_.rows()) {
            throw UsageError("basis columns must match the reduced operator size");
        }
    }

    int rank() const { return static_cast<int>(atilde_.rows()); }
    const Mat& basis() const { return basis_; }
    const Mat& atilde() const { return atilde_; }
    const Vec& sigma() const { return sigma_; }
    Frame frame() const { return frame_; }
    const Vec& param() const { return param_; }
    /// True when sigma_r and sigma_{r+1} coincide within the floor (ordering is the SVD's).
    bool degenerate() const { return degenerate_; }

    bool has_eigen() const { return eigen_ != nullptr; }
    const EigenData& eigen() const {
        if (!eigen_) eigen_ = std::make_shared<EigenData>(eigen_decompose(atilde_));
        return *eigen_;
    }
    double spectral_radius() const { return eigen().values.cwiseAbs().maxCoeff(); }

private:
    Mat basis_;
    Mat atilde_;
    Vec sigma_;
    Frame frame_;
    Vec param_;
    bool degenerate_;
    mutable std::shared_ptr<EigenData> eigen_;
};

/// sum_{i<r} s_i^2 / sum_i s_i^2.
inline double truncation_energy(const Vec& s, int r) {
    const double total = s.squaredNorm();
    if (total == 0.0) return 0.0;
    const int k = std::clamp(r, 0, static_cast<int>(s.size()));
    return s.head(k).squaredNorm() / total;
}

/// snapshots: n x (m+1). U- = columns 0..m-1, U+ = columns 1..m.
inline ReducedOperator fit_dmd(const Mat& snapshots, int r, Frame frame = Frame::eulerian, Vec param = {}) {
    const Eigen::Index m = snapshots.cols() - 1;
    if (r < 1) throw UsageError("DMD rank must be at least 1");
    if (m < r) {
        throw UsageError("DMD needs at least r+1 snapshots (have " + std::to_string(snapshots.cols()) +
                         ", r=" + std::to_string(r) + ")");
    }
    if (!snapshots.allFinite()) throw NumericalError("non-finite snapshot data");
    const Mat um = snapshots.leftCols(m);
    const Mat up = snapshots.rightCols(m);
    const linalg::ThinSvd svd = linalg::thin_svd(um, r);
    const int achievable = linalg::numerical_rank(svd.S, kSigmaFloor);
    if (achievable < r) {
        throw RankError("requested rank " + std::to_string(r) + " exceeds achievable rank " +
                            std::to_string(achievable),
                        achievable);
    }
    const bool degenerate = svd.S.size() > r && svd.S[r - 1] - svd.S[r] <= kSigmaFloor * svd.S[0];
    if (degenerate) log::debug("dmd: sigma_r and sigma_{r+1} coincide; keeping the SVD ordering");
    const Mat phi = svd.U.leftCols(r);
    const Vec s = svd.S.head(r);
    const Mat atilde = phi.transpose() * up * svd.V.leftCols(r) * s.cwiseInverse().asDiagonal();
    return ReducedOperator(phi, atilde, s, frame, std::move(param), degenerate);
}

enum class PredictPath { power, eigen };

namespace detail {

inline void guard_growth(double out_norm, double in_norm, const Mat& a, int step) {
    if (!std::isfinite(out_norm) || out_norm > kOverflowGuard * std::max(in_norm, 1e-300)) {
        throw NumericalError("prediction blew up at step " + std::to_string(step) +
                             " (unstable |lambda|max = " + std::to_string(spectral_radius(a)) + ")");
    }
}

}  // namespace detail

/// h_{k} = A^k h_0 by repeated products, guarded against blow-up.
inline Vec evolve_latent(const Mat& a, const Vec& h0, int k) {
    if (k < 0) throw UsageError("step count must be non-negative");
    Vec h = h0;
    const double n0 = h0.norm();
    for (int i = 0; i < k; ++i) {
        h = a * h;
        detail::guard_growth(h.norm(), n0, a, i + 1);
    }
    return h;
}

/// u^{n+k} from u^n. power: Phi (A^k (Phi^T u)); eigen: Re(Phi W Lambda^k W^{-1} Phi^T u).
inline Vec predict(const ReducedOperator& op, const Vec& u, int k, PredictPath path = PredictPath::power) {
    if (k < 0) throw UsageError("step count must be non-negative");
    if (u.size() != op.basis().rows()) throw UsageError("state length does not match the DMD basis");
    const Vec h0 = op.basis().transpose() * u;
    if (path == PredictPath::power) return op.basis() * evolve_latent(op.atilde(), h0, k);
    const EigenData& e = op.eigen();
    const CVec c = e.vectors.partialPivLu().solve(h0.cast<std::complex<double>>());
    CVec lk(c.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) lk[i] = std::pow(e.values[i], k) * c[i];
    const Vec h = (e.vectors * lk).real();
    detail::guard_growth(h.norm(), h0.norm(), op.atilde(), k);
    return op.basis() * h;
}

/// r x n_t latent coordinates of one parameter, column k at t_k.
struct LatentTrajectory {
    Mat coords;
    TimeAxis times;
    Vec param;
    std::string compressor = "pod";
};

/// A = H+ pinv(H-) with a relative singular-value cutoff (1e-12 by default).
/// Off the trajectory's span the operator is the minimum-norm least-squares solution.
inline Mat fit_latent_dmd(const Mat& h, double rel_cutoff = kSigmaFloor) {
    const Eigen::Index r = h.rows();
    const Eigen::Index pairs = h.cols() - 1;
    if (pairs < r) {
        throw UsageError("latent DMD is underdetermined: " + std::to_string(pairs) + " snapshot pairs for r=" +
                         std::to_string(r));
    }
    if (!h.allFinite()) throw NumericalError("non-finite latent trajectory");
    return h.rightCols(pairs) * linalg::pinv(h.leftCols(pairs), rel_cutoff);
}

inline Mat fit_latent_dmd(const LatentTrajectory& t) { return fit_latent_dmd(t.coords); }

/// max_k ||h^{k+1} - A h^k|| / ||h^k||.
inline double one_step_residual(const Mat& a, const Mat& h) {
    double worst = 0.0;
    for (Eigen::Index k = 0; k + 1 < h.cols(); ++k) {
        const double d = h.col(k).norm();
        if (d == 0.0) continue;
        worst = std::max(worst, (h.col(k + 1) - a * h.col(k)).norm() / d);
    }
    return worst;
}

}  // namespace lagrom

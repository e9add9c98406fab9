#pragma once

// Dense linear-algebra helpers: thin SVD, pseudo-inverse, and the
// (cyclic) tridiagonal solves used by the implicit diffusion step.

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "lagrom/core.hpp"

namespace lagrom::linalg {

struct ThinSvd {
    Mat U;  ///< left singular vectors, one column per retained value
    Vec S;  ///< non-increasing
    Mat V;
};

namespace detail {

// Tall matrices above this work estimate go through the Gram route; its
// singular values are accurate to ~sqrt(eps) relative to sigma_1.
inline constexpr double kGramWork = 2e10;

inline bool prefer_gram(const Mat& a) {
    const double rows = static_cast<double>(a.rows());
    const double cols = static_cast<double>(a.cols());
    return rows >= 4.0 * cols && rows * cols * cols > kGramWork;
}

inline ThinSvd gram_svd(const Mat& a, int keep) {
    Mat g = Mat::Zero(a.cols(), a.cols());
    g.selfadjointView<Eigen::Lower>().rankUpdate(a.transpose());
    g = g.selfadjointView<Eigen::Lower>();
    Eigen::SelfAdjointEigenSolver<Mat> es(g);
    const Eigen::Index n = a.cols();
    ThinSvd out;
    out.S.resize(n);
    out.V.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.S[i] = std::sqrt(std::max(es.eigenvalues()[n - 1 - i], 0.0));
        out.V.col(i) = es.eigenvectors().col(n - 1 - i);
    }
    const Eigen::Index k = std::min<Eigen::Index>(keep < 0 ? n : keep, n);
    Mat u = a * out.V.leftCols(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        if (out.S[i] > 0.0) u.col(i) /= out.S[i];
    }
    // Re-orthonormalize; sign-fix so columns keep the direction of A v_i / s_i.
    Eigen::HouseholderQR<Mat> qr(u);
    Mat q = qr.householderQ() * Mat::Identity(u.rows(), k);
    for (Eigen::Index i = 0; i < k; ++i) {
        if (q.col(i).dot(u.col(i)) < 0.0) q.col(i) *= -1.0;
    }
    out.U = std::move(q);
    return out;
}

}  // namespace detail

/// Thin SVD. `keep` < 0 keeps every left vector; otherwise only the leading `keep`.
inline ThinSvd thin_svd(const Mat& a, int keep = -1) {
    if (a.size() == 0) throw UsageError("SVD of an empty matrix");
    if (detail::prefer_gram(a)) return detail::gram_svd(a, keep);
    Eigen::BDCSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    ThinSvd out{svd.matrixU(), svd.singularValues(), svd.matrixV()};
    if (keep >= 0 && keep < out.U.cols()) out.U.conservativeResize(Eigen::NoChange, keep);
    return out;
}

inline Vec singular_values(const Mat& a) {
    if (a.size() == 0) throw UsageError("SVD of an empty matrix");
    if (detail::prefer_gram(a)) return detail::gram_svd(a, 0).S;
    Eigen::BDCSVD<Mat> svd(a);
    return svd.singularValues();
}

/// Number of singular values at or above rel_floor * sigma_1.
inline int numerical_rank(const Vec& s, double rel_floor) {
    if (s.size() == 0 || s[0] <= 0.0) return 0;
    int r = 0;
    while (r < s.size() && s[r] >= rel_floor * s[0]) ++r;
    return r;
}

/// Moore-Penrose pseudo-inverse with a relative singular-value cutoff.
inline Mat pinv(const Mat& a, double rel_cutoff = 1e-12) {
    Eigen::BDCSVD<Mat> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& s = svd.singularValues();
    Vec inv = Vec::Zero(s.size());
    if (s.size() > 0 && s[0] > 0.0) {
        for (Eigen::Index i = 0; i < s.size(); ++i) {
            if (s[i] > rel_cutoff * s[0]) inv[i] = 1.0 / s[i];
        }
    }
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

/// Tridiagonal system: lower[i] * x[i-1] + diag[i] * x[i] + upper[i] * x[i+1] = rhs[i].
/// lower[0] and upper[n-1] couple the ends in the cyclic case and are ignored otherwise.
struct Tridiagonal {
    std::vector<double> lower;
    std::vector<double> diag;
    std::vector<double> upper;

    explicit Tridiagonal(std::size_t n) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}
    std::size_t size() const { return diag.size(); }
};

/// Thomas algorithm (no pivoting; expects diagonal dominance).
inline std::vector<double> solve_thomas(const Tridiagonal& t, const std::vector<double>& rhs) {
    const std::size_t n = t.size();
    if (rhs.size() != n || n == 0) throw UsageError("tridiagonal system size mismatch");
    std::vector<double> c(n), d(n), x(n);
    double beta = t.diag[0];
    if (beta == 0.0) throw NumericalError("zero pivot in tridiagonal solve");
    c[0] = t.upper[0] / beta;
    d[0] = rhs[0] / beta;
    for (std::size_t i = 1; i < n; ++i) {
        beta = t.diag[i] - t.lower[i] * c[i - 1];
        if (beta == 0.0) throw NumericalError("zero pivot in tridiagonal solve");
        c[i] = t.upper[i] / beta;
        d[i] = (rhs[i] - t.lower[i] * d[i - 1]) / beta;
    }
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    return x;
}

/// Cyclic tridiagonal solve via the Sherman-Morrison correction of a Thomas solve.
/// Corner couplings: upper[n-1] multiplies x[0], lower[0] multiplies x[n-1].
inline std::vector<double> solve_cyclic(const Tridiagonal& t, const std::vector<double>& rhs) {
    const std::size_t n = t.size();
    if (n < 3) throw UsageError("cyclic tridiagonal solve needs n >= 3");
    const double alpha = t.upper[n - 1];
    const double beta = t.lower[0];
    const double gamma = -t.diag[0];
    Tridiagonal m = t;
    m.diag[0] -= gamma;
    m.diag[n - 1] -= alpha * beta / gamma;
    const std::vector<double> x = solve_thomas(m, rhs);
    std::vector<double> u(n, 0.0);
    u[0] = gamma;
    u[n - 1] = alpha;
    const std::vector<double> z = solve_thomas(m, u);
    const double fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - fact * z[i];
    return out;
}

/// max_i |(A x - rhs)_i| for the (optionally cyclic) tridiagonal A.
inline double residual_inf(const Tridiagonal& t, const std::vector<double>& x,
                           const std::vector<double>& rhs, bool cyclic) {
    const std::size_t n = t.size();
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double ax = t.diag[i] * x[i];
        if (i > 0) ax += t.lower[i] * x[i - 1];
        else if (cyclic) ax += t.lower[0] * x[n - 1];
        if (i + 1 < n) ax += t.upper[i] * x[i + 1];
        else if (cyclic) ax += t.upper[n - 1] * x[0];
        worst = std::max(worst, std::abs(ax - rhs[i]));
    }
    return worst;
}

}  // namespace lagrom::linalg

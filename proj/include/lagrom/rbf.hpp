#pragma once

// Polyharmonic cubic radial basis interpolation, phi(r) = r^3, with an
// optional affine polynomial tail. Shared by frame reconstruction (1D nodes)
// and parameter-space interpolation of latent states.

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "lagrom/core.hpp"

namespace lagrom {

enum class RbfTail { none, constant, linear };

inline std::string to_string(RbfTail t) {
    switch (t) {
        case RbfTail::none: return "none";
        case RbfTail::constant: return "constant";
        case RbfTail::linear: return "linear";
    }
    return "unknown";
}

inline RbfTail rbf_tail_from_string(const std::string& s) {
    if (s == "none") return RbfTail::none;
    if (s == "constant") return RbfTail::constant;
    if (s == "linear") return RbfTail::linear;
    throw UsageError("unknown RBF tail '" + s + "'");
}

class RbfInterpolant;

/// Factorized interpolation system for a fixed node set. Nodes are mapped to
/// their bounding box before assembly; in one dimension this leaves the cubic
/// interpolant unchanged and only improves conditioning.
class RbfBasis {
public:
    /// nodes: n x d, one node per row.
    explicit RbfBasis(Mat nodes, RbfTail tail = RbfTail::linear) : nodes_(std::move(nodes)) {
        const Eigen::Index n = nodes_.rows();
        const Eigen::Index d = nodes_.cols();
        if (n < 1 || d < 1) throw UsageError("RBF needs at least one node");
        lo_ = nodes_.colwise().minCoeff().transpose();
        scale_ = (nodes_.colwise().maxCoeff().transpose() - lo_);
        for (Eigen::Index j = 0; j < d; ++j) {
            if (!(scale_[j] > 0.0)) scale_[j] = 1.0;
        }
        scaled_ = Mat(n, d);
        for (Eigen::Index i = 0; i < n; ++i) scaled_.row(i) = to_unit(nodes_.row(i).transpose()).transpose();

        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = i + 1; j < n; ++j) {
                if ((scaled_.row(i) - scaled_.row(j)).norm() == 0.0) {
                    throw NumericalError("singular RBF system: duplicate nodes " + std::to_string(i) +
                                         " and " + std::to_string(j));
                }
            }
        }
        // An affine tail needs at least d+1 nodes to be unisolvent.
        tail_ = tail;
        if (tail_ == RbfTail::linear && n <= d) tail_ = RbfTail::constant;
        const Eigen::Index m = tail_columns();

        Mat a = Mat::Zero(n + m, n + m);
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) a(i, j) = kernel((scaled_.row(i) - scaled_.row(j)).norm());
            const Vec p = poly_row(scaled_.row(i).transpose());
            a.block(i, n, 1, m) = p.transpose();
            a.block(n, i, m, 1) = p;
        }
        lu_.compute(a);
        if (lu_.rank() < a.rows()) {
            throw NumericalError("singular RBF system (rank " + std::to_string(lu_.rank()) + " of " +
                                 std::to_string(a.rows()) + ")");
        }
    }

    static double kernel(double r) { return r * r * r; }

    Eigen::Index size() const { return nodes_.rows(); }
    Eigen::Index dim() const { return nodes_.cols(); }
    RbfTail tail() const { return tail_; }
    const Mat& nodes() const { return nodes_; }

    /// values: n x outputs. One scalar interpolant per output column.
    RbfInterpolant fit(const Mat& values) const;

    Vec to_unit(const Vec& x) const { return (x - lo_).cwiseQuotient(scale_); }

    Eigen::Index tail_columns() const {
        switch (tail_) {
            case RbfTail::none: return 0;
            case RbfTail::constant: return 1;
            case RbfTail::linear: return 1 + nodes_.cols();
        }
        return 0;
    }

    Vec poly_row(const Vec& unit_x) const {
        Vec p(tail_columns());
        if (p.size() == 0) return p;
        p[0] = 1.0;
        if (tail_ == RbfTail::linear) p.tail(unit_x.size()) = unit_x;
        return p;
    }

    /// Kernel row [phi(|x - x_i|)]_i followed by the tail row at unit-box x.
    Vec design_row(const Vec& x) const {
        const Vec u = to_unit(x);
        const Eigen::Index n = size();
        Vec row(n + tail_columns());
        for (Eigen::Index i = 0; i < n; ++i) row[i] = kernel((u - scaled_.row(i).transpose()).norm());
        row.tail(tail_columns()) = poly_row(u);
        return row;
    }

    const Eigen::FullPivLU<Mat>& lu() const { return lu_; }

private:
    Mat nodes_;
    Mat scaled_;
    Vec lo_;
    Vec scale_;
    RbfTail tail_ = RbfTail::linear;
    Eigen::FullPivLU<Mat> lu_;
};

/// Weights per output dimension for one factorized basis. Holds a pointer to
/// the basis, which must outlive it.
class RbfInterpolant {
public:
    RbfInterpolant(const RbfBasis& basis, Mat coefficients)
        : basis_(&basis), coefficients_(std::move(coefficients)) {}

    /// Value of every output at point x (length d).
    Vec evaluate(const Vec& x) const {
        return coefficients_.transpose() * basis_->design_row(x);
    }

    /// Kernel weights (n x outputs) followed by tail coefficients.
    const Mat& coefficients() const { return coefficients_; }

private:
    const RbfBasis* basis_;
    Mat coefficients_;
};

inline RbfInterpolant RbfBasis::fit(const Mat& values) const {
    if (values.rows() != size()) throw UsageError("RBF values must have one row per node");
    Mat rhs = Mat::Zero(size() + tail_columns(), values.cols());
    rhs.topRows(size()) = values;
    return RbfInterpolant(*this, lu_.solve(rhs));
}

}  // namespace lagrom

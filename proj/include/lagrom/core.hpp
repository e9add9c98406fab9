#pragma once

// Shared domain types: grids, parameter sets, time axes and the immutable
// snapshot tensor that every other module reads.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstring>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "lagrom/error.hpp"

namespace lagrom {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// One uniform grid axis. Periodic axes omit the right endpoint.
struct Axis {
    double lo = 0.0;
    double hi = 1.0;
    int points = 3;
    bool periodic = false;

    double length() const { return hi - lo; }
    double spacing() const {
        return periodic ? (hi - lo) / points : (hi - lo) / (points - 1);
    }
    double node(int j) const { return lo + j * spacing(); }

    bool operator==(const Axis&) const = default;
};

class Grid {
public:
    Grid() : Grid(std::vector<Axis>{Axis{}}) {}

    explicit Grid(std::vector<Axis> axes) : axes_(std::move(axes)) {
        if (axes_.empty() || axes_.size() > 2) {
            throw UsageError("grid dimension must be 1 or 2");
        }
        for (const Axis& a : axes_) {
            if (a.points < 3) throw UsageError("grid needs at least 3 points per axis");
            if (!(a.spacing() > 0.0) || !std::isfinite(a.spacing())) {
                throw UsageError("grid spacing must be positive and finite");
            }
        }
    }

    static Grid line(double lo, double hi, int points, bool periodic) {
        return Grid({Axis{lo, hi, points, periodic}});
    }
    static Grid plane(Axis x, Axis y) { return Grid({x, y}); }

    /// Unit-spaced index axis used to carry latent coordinates (any length >= 1).
    static Grid index(int length) {
        if (length < 1) throw UsageError("index grid needs length >= 1");
        Grid g;
        g.axes_ = {Axis{0.0, static_cast<double>(length - 1), length, false}};
        g.index_ = true;
        return g;
    }

    int dim() const { return static_cast<int>(axes_.size()); }
    const Axis& axis(int i) const { return axes_.at(static_cast<std::size_t>(i)); }
    const std::vector<Axis>& axes() const { return axes_; }
    bool is_index() const { return index_; }

    int size() const {
        int n = 1;
        for (const Axis& a : axes_) n *= a.points;
        return n;
    }

    /// Node coordinate along `ax` for every flattened node. 2D flattening is
    /// row-major with y fastest: flat = i * ny + j.
    Vec coordinates(int ax) const {
        Vec c(size());
        if (dim() == 1) {
            for (int j = 0; j < axes_[0].points; ++j) c[j] = index_ ? j : axes_[0].node(j);
            return c;
        }
        const int nx = axes_[0].points;
        const int ny = axes_[1].points;
        for (int i = 0; i < nx; ++i) {
            for (int j = 0; j < ny; ++j) {
                c[i * ny + j] = ax == 0 ? axes_[0].node(i) : axes_[1].node(j);
            }
        }
        return c;
    }

    bool operator==(const Grid& o) const { return axes_ == o.axes_ && index_ == o.index_; }

private:
    std::vector<Axis> axes_;
    bool index_ = false;
};

struct TimeAxis {
    double t0 = 0.0;
    double dt = 1.0;
    int count = 1;

    TimeAxis() = default;
    TimeAxis(double t0_, double dt_, int count_) : t0(t0_), dt(dt_), count(count_) {
        if (!(dt > 0.0)) throw UsageError("time step must be positive");
        if (count < 1) throw UsageError("time axis must hold at least one instant");
    }

    double instant(int k) const { return t0 + k * dt; }
    double last() const { return instant(count - 1); }

    /// Index of the instant equal to t within tol*dt, or -1.
    int index_of(double t, double tol = 1e-9) const {
        const double k = std::round((t - t0) / dt);
        if (k < 0 || k >= count) return -1;
        return std::abs(instant(static_cast<int>(k)) - t) <= tol * dt ? static_cast<int>(k) : -1;
    }

    bool operator==(const TimeAxis&) const = default;
};

class ParamSet {
public:
    ParamSet() = default;

    ParamSet(std::vector<std::string> names, Mat values)
        : names_(std::move(names)), values_(std::move(values)) {
        if (values_.rows() < 1) throw UsageError("parameter set must hold at least one row");
        if (static_cast<std::size_t>(values_.cols()) != names_.size()) {
            throw UsageError("parameter names do not match parameter columns");
        }
        for (Eigen::Index i = 0; i < values_.rows(); ++i) {
            for (Eigen::Index j = i + 1; j < values_.rows(); ++j) {
                if (values_.row(i) == values_.row(j)) {
                    throw UsageError("duplicate parameter rows " + std::to_string(i) + " and " +
                                     std::to_string(j));
                }
            }
        }
    }

    /// Single named scalar parameter sampled at the given values.
    static ParamSet scalar(std::string name, const std::vector<double>& values) {
        Mat m(static_cast<Eigen::Index>(values.size()), 1);
        for (std::size_t i = 0; i < values.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = values[i];
        return ParamSet({std::move(name)}, std::move(m));
    }

    int count() const { return static_cast<int>(values_.rows()); }
    int dim() const { return static_cast<int>(values_.cols()); }
    const std::vector<std::string>& names() const { return names_; }
    const Mat& values() const { return values_; }
    Vec row(int i) const { return values_.row(i).transpose(); }

    bool operator==(const ParamSet& o) const { return names_ == o.names_ && values_ == o.values_; }

private:
    std::vector<std::string> names_;
    Mat values_;
};

enum class Frame { eulerian, lagrangian, latent };

inline std::string to_string(Frame f) {
    switch (f) {
        case Frame::eulerian: return "eulerian";
        case Frame::lagrangian: return "lagrangian";
        case Frame::latent: return "latent";
    }
    return "unknown";
}

inline Frame frame_from_string(const std::string& s) {
    if (s == "eulerian") return Frame::eulerian;
    if (s == "lagrangian") return Frame::lagrangian;
    if (s == "latent") return Frame::latent;
    throw UsageError("unknown frame '" + s + "'");
}

/// Dense tensor [param, time, channel, space...] of 64-bit values.
/// Immutable once built; all accessors are read-only.
class SnapshotSet {
public:
    SnapshotSet(Grid grid, ParamSet params, TimeAxis times, Frame frame,
                std::vector<std::string> channels, std::vector<double> data,
                nlohmann::json metadata = nlohmann::json::object(), bool require_finite = true)
        : grid_(std::move(grid)),
          params_(std::move(params)),
          times_(times),
          frame_(frame),
          channels_(std::move(channels)),
          data_(std::move(data)),
          metadata_(std::move(metadata)) {
        if (channels_.empty()) throw UsageError("snapshot set needs at least one channel");
        if (params_.count() < 1) throw UsageError("snapshot set needs at least one parameter");
        const std::size_t expected = static_cast<std::size_t>(params_.count()) *
                                     static_cast<std::size_t>(times_.count) * snapshot_size();
        if (data_.size() != expected) {
            throw UsageError("snapshot tensor holds " + std::to_string(data_.size()) +
                             " values, shape requires " + std::to_string(expected));
        }
        if (require_finite) {
            for (std::size_t i = 0; i < data_.size(); ++i) {
                if (!std::isfinite(data_[i])) {
                    throw NumericalError("non-finite snapshot entry at flat index " + std::to_string(i));
                }
            }
        }
        if (!metadata_.is_object()) metadata_ = nlohmann::json::object();
    }

    /// Builds a set from one (snapshot_size x n_time) matrix per parameter.
    static SnapshotSet from_trajectories(Grid grid, ParamSet params, TimeAxis times, Frame frame,
                                         std::vector<std::string> channels,
                                         const std::vector<Mat>& trajectories,
                                         nlohmann::json metadata = nlohmann::json::object()) {
        const std::size_t rows = channels.size() * static_cast<std::size_t>(grid.size());
        if (trajectories.size() != static_cast<std::size_t>(params.count())) {
            throw UsageError("one trajectory per parameter required");
        }
        std::vector<double> data;
        data.reserve(trajectories.size() * rows * static_cast<std::size_t>(times.count));
        for (const Mat& m : trajectories) {
            if (static_cast<std::size_t>(m.rows()) != rows || m.cols() != times.count) {
                throw UsageError("trajectory shape does not match grid/channels/time axis");
            }
            data.insert(data.end(), m.data(), m.data() + m.size());
        }
        return SnapshotSet(std::move(grid), std::move(params), times, frame, std::move(channels),
                           std::move(data), std::move(metadata));
    }

    const Grid& grid() const { return grid_; }
    const ParamSet& params() const { return params_; }
    const TimeAxis& times() const { return times_; }
    Frame frame() const { return frame_; }
    const std::vector<std::string>& channels() const { return channels_; }
    const nlohmann::json& metadata() const { return metadata_; }
    std::span<const double> data() const { return data_; }

    int n_params() const { return params_.count(); }
    int n_times() const { return times_.count; }
    int n_channels() const { return static_cast<int>(channels_.size()); }
    std::size_t snapshot_size() const {
        return channels_.size() * static_cast<std::size_t>(grid_.size());
    }

    /// Tensor shape [n_param, n_time, n_channel, space...].
    std::vector<std::size_t> shape() const {
        std::vector<std::size_t> s{static_cast<std::size_t>(n_params()),
                                   static_cast<std::size_t>(n_times()), channels_.size()};
        for (const Axis& a : grid_.axes()) s.push_back(static_cast<std::size_t>(a.points));
        return s;
    }

    Eigen::Map<const Vec> snapshot(int p, int k) const {
        check_index(p, k);
        const std::size_t n = snapshot_size();
        const std::size_t off = (static_cast<std::size_t>(p) * static_cast<std::size_t>(n_times()) +
                                 static_cast<std::size_t>(k)) * n;
        return Eigen::Map<const Vec>(data_.data() + off, static_cast<Eigen::Index>(n));
    }

    Eigen::Map<const Vec> channel(int p, int k, int c) const {
        auto s = snapshot(p, k);
        const Eigen::Index ns = grid_.size();
        return Eigen::Map<const Vec>(s.data() + c * ns, ns);
    }

    int channel_index(const std::string& name) const {
        for (std::size_t i = 0; i < channels_.size(); ++i) {
            if (channels_[i] == name) return static_cast<int>(i);
        }
        return -1;
    }

    /// Bit-exact equality of tensor and metadata (created_at ignored).
    bool same_as(const SnapshotSet& o) const {
        auto strip = [](nlohmann::json j) {
            j.erase("created_at");
            return j;
        };
        return grid_ == o.grid_ && params_ == o.params_ && times_ == o.times_ &&
               frame_ == o.frame_ && channels_ == o.channels_ &&
               strip(metadata_) == strip(o.metadata_) && data_.size() == o.data_.size() &&
               std::equal(data_.begin(), data_.end(), o.data_.begin(), [](double a, double b) {
                   return std::memcmp(&a, &b, sizeof(double)) == 0;
               });
    }

private:
    void check_index(int p, int k) const {
        if (p < 0 || p >= n_params()) {
            throw UsageError("parameter index " + std::to_string(p) + " out of range");
        }
        if (k < 0 || k >= n_times()) {
            throw UsageError("time index " + std::to_string(k) + " out of range");
        }
    }

    Grid grid_;
    ParamSet params_;
    TimeAxis times_;
    Frame frame_;
    std::vector<std::string> channels_;
    std::vector<double> data_;
    nlohmann::json metadata_;
};

/// Column k is the channel-stacked flattening of snapshot (param_index, t_k).
inline Mat flatten_snapshots(const SnapshotSet& s, int param_index) {
    if (param_index < 0 || param_index >= s.n_params()) {
        throw UsageError("parameter index " + std::to_string(param_index) + " out of range");
    }
    const auto n = static_cast<Eigen::Index>(s.snapshot_size());
    Mat m(n, s.n_times());
    for (int k = 0; k < s.n_times(); ++k) m.col(k) = s.snapshot(param_index, k);
    return m;
}

/// All parameters side by side: [M^{p_0}, M^{p_1}, ...].
inline Mat global_matrix(const SnapshotSet& s) {
    const auto n = static_cast<Eigen::Index>(s.snapshot_size());
    Mat m(n, static_cast<Eigen::Index>(s.n_params()) * s.n_times());
    for (int p = 0; p < s.n_params(); ++p) {
        m.middleCols(static_cast<Eigen::Index>(p) * s.n_times(), s.n_times()) = flatten_snapshots(s, p);
    }
    return m;
}

/// Inverse of flatten_snapshots over all parameters.
inline SnapshotSet unflatten_snapshots(const SnapshotSet& like, const std::vector<Mat>& per_param) {
    return SnapshotSet::from_trajectories(like.grid(), like.params(), like.times(), like.frame(),
                                          like.channels(), per_param, like.metadata());
}

/// Copy of time slice [k0, k1] re-anchored at t0 + k0*dt.
inline SnapshotSet subset_time(const SnapshotSet& s, int k0, int k1) {
    if (k0 < 0 || k0 > k1 || k1 >= s.n_times()) {
        throw UsageError("invalid time range [" + std::to_string(k0) + ", " + std::to_string(k1) + "]");
    }
    std::vector<Mat> traj;
    traj.reserve(static_cast<std::size_t>(s.n_params()));
    for (int p = 0; p < s.n_params(); ++p) traj.push_back(flatten_snapshots(s, p).middleCols(k0, k1 - k0 + 1));
    const TimeAxis t(s.times().instant(k0), s.times().dt, k1 - k0 + 1);
    return SnapshotSet::from_trajectories(s.grid(), s.params(), t, s.frame(), s.channels(), traj, s.metadata());
}

/// Copy restricted to the listed parameter rows.
inline SnapshotSet subset_params(const SnapshotSet& s, const std::vector<int>& rows) {
    Mat values(static_cast<Eigen::Index>(rows.size()), s.params().dim());
    std::vector<Mat> traj;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        values.row(static_cast<Eigen::Index>(i)) = s.params().values().row(rows[i]);
        traj.push_back(flatten_snapshots(s, rows[i]));
    }
    return SnapshotSet::from_trajectories(s.grid(), ParamSet(s.params().names(), values), s.times(),
                                          s.frame(), s.channels(), traj, s.metadata());
}

/// Inclusive linspace a:b:n.
inline std::vector<double> linspace(double a, double b, int n) {
    if (n < 1) throw UsageError("linspace needs n >= 1");
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = n == 1 ? a : a + (b - a) * i / (n - 1);
    return v;
}

}  // namespace lagrom

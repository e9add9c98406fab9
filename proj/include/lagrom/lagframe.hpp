#pragma once

// Conversions between the Lagrangian and Eulerian frames: channel stacking of
// (coordinates, states), periodic wrapping, grid <-> node interpolation and
// Eulerian reconstruction of Lagrangian states.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "lagrom/core.hpp"
#include "lagrom/rbf.hpp"

namespace lagrom {

/// Coordinates (chi, and zeta in 2D) and state values of every reference node.
struct LagrangianState {
    Grid reference;
    std::vector<Vec> coords;
    std::vector<Vec> values;

    int n_nodes() const { return reference.size(); }
};

/// Channel-stacked state: coordinates first, then values.
struct AugmentedSnapshot {
    Vec data;
    int n_coords = 0;
    int n_values = 0;
};

inline AugmentedSnapshot stack(const LagrangianState& s) {
    const Eigen::Index ns = s.reference.size();
    if (static_cast<int>(s.coords.size()) != s.reference.dim()) {
        throw UsageError("Lagrangian state needs one coordinate array per grid axis");
    }
    const auto channels = static_cast<Eigen::Index>(s.coords.size() + s.values.size());
    AugmentedSnapshot out{Vec(channels * ns), static_cast<int>(s.coords.size()),
                          static_cast<int>(s.values.size())};
    Eigen::Index c = 0;
    for (const auto* group : {&s.coords, &s.values}) {
        for (const Vec& v : *group) {
            if (v.size() != ns) throw UsageError("Lagrangian arrays must match the reference grid");
            out.data.segment(c * ns, ns) = v;
            ++c;
        }
    }
    return out;
}

inline LagrangianState unstack(const Vec& data, const Grid& reference, int n_coords, int n_values) {
    const Eigen::Index ns = reference.size();
    if (n_coords != reference.dim() || data.size() != (n_coords + n_values) * ns) {
        throw UsageError("augmented snapshot of length " + std::to_string(data.size()) +
                         " does not hold " + std::to_string(n_coords) + "+" +
                         std::to_string(n_values) + " channels of " + std::to_string(ns) + " nodes");
    }
    LagrangianState s{reference, {}, {}};
    for (int c = 0; c < n_coords; ++c) s.coords.push_back(data.segment(c * ns, ns));
    for (int c = 0; c < n_values; ++c) s.values.push_back(data.segment((n_coords + c) * ns, ns));
    return s;
}

inline LagrangianState unstack(const AugmentedSnapshot& a, const Grid& reference) {
    return unstack(a.data, reference, a.n_coords, a.n_values);
}

/// a + mod(x - a, L) on a periodic axis; identity otherwise.
inline double wrap_coordinate(double x, double lo, double hi, bool periodic) {
    if (!periodic) return x;
    const double len = hi - lo;
    if (!(len > 0.0)) throw UsageError("wrap needs a positive domain length");
    double w = lo + std::fmod(x - lo, len);
    if (w < lo) w += len;
    if (w >= hi) w -= len;
    return w;
}

inline Vec wrap_coordinates(const Vec& x, double lo, double hi, bool periodic) {
    Vec out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = wrap_coordinate(x[i], lo, hi, periodic);
    return out;
}

/// Piecewise-linear interpolation from strictly increasing nodes, constant
/// extrapolation outside [from.front, from.back].
inline Vec interp_between_frames(const Vec& values, const Vec& from_nodes, const Vec& to_nodes) {
    const Eigen::Index n = from_nodes.size();
    if (values.size() != n || n < 1) throw UsageError("node/value size mismatch");
    for (Eigen::Index i = 0; i + 1 < n; ++i) {
        if (!(from_nodes[i + 1] > from_nodes[i])) {
            throw UsageError("source nodes must be strictly increasing (index " + std::to_string(i) + ")");
        }
    }
    Vec out(to_nodes.size());
    for (Eigen::Index k = 0; k < to_nodes.size(); ++k) {
        const double x = to_nodes[k];
        if (x <= from_nodes[0]) {
            out[k] = values[0];
        } else if (x >= from_nodes[n - 1]) {
            out[k] = values[n - 1];
        } else {
            const auto it = std::upper_bound(from_nodes.data(), from_nodes.data() + n, x);
            const Eigen::Index j = (it - from_nodes.data()) - 1;
            const double w = (x - from_nodes[j]) / (from_nodes[j + 1] - from_nodes[j]);
            out[k] = (1.0 - w) * values[j] + w * values[j + 1];
        }
    }
    return out;
}

/// Linear interpolation of a field on a 1D grid at arbitrary points; periodic
/// axes wrap, bounded axes extrapolate by the end value.
inline Vec interp_grid_to_points(const Vec& values, const Axis& ax, const Vec& x) {
    if (values.size() != ax.points) throw UsageError("field does not match grid");
    Vec out(x.size());
    const double h = ax.spacing();
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        if (ax.periodic) {
            const double s = (wrap_coordinate(x[k], ax.lo, ax.hi, true) - ax.lo) / h;
            int j = static_cast<int>(std::floor(s));
            const double w = s - j;
            j = std::clamp(j, 0, ax.points - 1);
            const int j1 = (j + 1) % ax.points;
            out[k] = (1.0 - w) * values[j] + w * values[j1];
        } else {
            const double s = (x[k] - ax.lo) / h;
            if (s <= 0.0) {
                out[k] = values[0];
            } else if (s >= ax.points - 1) {
                out[k] = values[ax.points - 1];
            } else {
                const int j = std::min(static_cast<int>(std::floor(s)), ax.points - 2);
                const double w = s - j;
                out[k] = (1.0 - w) * values[j] + w * values[j + 1];
            }
        }
    }
    return out;
}

/// Bilinear interpolation of a field on a 2D grid (flat index i*ny+j) at points.
inline Vec interp_grid_to_points(const Vec& values, const Grid& g, const Vec& x, const Vec& y) {
    if (g.dim() != 2 || values.size() != g.size()) throw UsageError("field does not match 2D grid");
    const Axis& ax = g.axis(0);
    const Axis& ay = g.axis(1);
    const int nx = ax.points;
    const int ny = ay.points;
    auto locate = [](const Axis& a, double p, int& j0, int& j1, double& w) {
        const double s = (wrap_coordinate(p, a.lo, a.hi, a.periodic) - a.lo) / a.spacing();
        if (a.periodic) {
            j0 = std::clamp(static_cast<int>(std::floor(s)), 0, a.points - 1);
            w = s - j0;
            j1 = (j0 + 1) % a.points;
        } else if (s <= 0.0) {
            j0 = j1 = 0;
            w = 0.0;
        } else if (s >= a.points - 1) {
            j0 = j1 = a.points - 1;
            w = 0.0;
        } else {
            j0 = std::min(static_cast<int>(std::floor(s)), a.points - 2);
            j1 = j0 + 1;
            w = s - j0;
        }
    };
    Vec out(x.size());
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        int i0, i1, j0, j1;
        double wx, wy;
        locate(ax, x[k], i0, i1, wx);
        locate(ay, y[k], j0, j1, wy);
        out[k] = (1 - wx) * (1 - wy) * values[i0 * ny + j0] + wx * (1 - wy) * values[i1 * ny + j0] +
                 (1 - wx) * wy * values[i0 * ny + j1] + wx * wy * values[i1 * ny + j1];
    }
    (void)nx;
    return out;
}

/// Smallest neighbour gap chi_{j+1} - chi_j in reference order.
inline double min_gap_1d(const Vec& chi) {
    double g = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j + 1 < chi.size(); ++j) g = std::min(g, chi[j + 1] - chi[j]);
    return g;
}

/// Smallest signed triangle area over the two triangles of every displaced cell,
/// relative to the reference cell area. Negative values mean a folded cell.
inline double min_cell_orientation_2d(const Vec& chi, const Vec& zeta, const Grid& ref) {
    const int nx = ref.axis(0).points;
    const int ny = ref.axis(1).points;
    const double ref_area = ref.axis(0).spacing() * ref.axis(1).spacing();
    double worst = std::numeric_limits<double>::infinity();
    auto cross = [&](int a, int b, int c) {
        return (chi[b] - chi[a]) * (zeta[c] - zeta[a]) - (zeta[b] - zeta[a]) * (chi[c] - chi[a]);
    };
    for (int i = 0; i + 1 < nx; ++i) {
        for (int j = 0; j + 1 < ny; ++j) {
            const int p00 = i * ny + j, p10 = (i + 1) * ny + j, p01 = i * ny + j + 1,
                      p11 = (i + 1) * ny + j + 1;
            worst = std::min({worst, cross(p00, p10, p11) / ref_area, cross(p00, p11, p01) / ref_area});
        }
    }
    return worst;
}

enum class ReconstructMethod { rbf, linear };

inline ReconstructMethod reconstruct_method_from_string(const std::string& s) {
    if (s == "rbf") return ReconstructMethod::rbf;
    if (s == "linear") return ReconstructMethod::linear;
    throw UsageError("unknown reconstruction method '" + s + "'");
}

struct ReconstructOptions {
    /// Index-order inversions deeper than this fraction of the reference
    /// spacing (1D) or reference cell area (2D) count as tangling.
    double tangle_tolerance = 1e-10;
    /// Nodes closer than this fraction of the reference spacing are merged
    /// (values averaged) before interpolation.
    double merge_tolerance = 1e-9;
    /// Period-shifted copies appended at each seam for periodic 1D rbf.
    int seam_padding = 8;
};

namespace detail {

struct Nodes1D {
    std::vector<double> x;
    std::vector<std::vector<double>> v;  // per channel
};

inline Nodes1D sorted_nodes_1d(const LagrangianState& s, const ReconstructOptions& opt) {
    const Axis& ref = s.reference.axis(0);
    const Vec& chi = s.coords.at(0);
    const Eigen::Index n = chi.size();
    const double h = ref.spacing();
    const double gap = min_gap_1d(chi);
    if (gap < -opt.tangle_tolerance * h) {
        throw NumericalError("tangled Lagrangian grid: min gap " + std::to_string(gap));
    }
    std::vector<double> xw(static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) xw[j] = wrap_coordinate(chi[j], ref.lo, ref.hi, ref.periodic);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return xw[a] < xw[b]; });

    Nodes1D out;
    out.v.resize(s.values.size());
    const double merge = opt.merge_tolerance * h;
    std::size_t run = 0;
    for (Eigen::Index idx : order) {
        const double x = xw[static_cast<std::size_t>(idx)];
        if (!out.x.empty() && x - out.x.back() <= merge) {
            // running mean of merged nodes
            ++run;
            for (std::size_t c = 0; c < s.values.size(); ++c) {
                out.v[c].back() += (s.values[c][idx] - out.v[c].back()) / static_cast<double>(run);
            }
            continue;
        }
        run = 1;
        out.x.push_back(x);
        for (std::size_t c = 0; c < s.values.size(); ++c) out.v[c].push_back(s.values[c][idx]);
    }
    if (ref.periodic && out.x.size() >= 2 && out.x.back() - out.x.front() >= ref.length() - merge) {
        // first and last coincide across the seam
        out.x.pop_back();
        for (auto& c : out.v) c.pop_back();
    }
    if (out.x.size() < 2) throw NumericalError("reconstruction needs at least 2 distinct nodes");
    return out;
}

inline Nodes1D pad_periodic(const Nodes1D& in, double period, int pad) {
    const int n = static_cast<int>(in.x.size());
    const int p = std::min(pad, n);
    Nodes1D out;
    out.v.resize(in.v.size());
    auto push = [&](int j, double shift) {
        out.x.push_back(in.x[j] + shift);
        for (std::size_t c = 0; c < in.v.size(); ++c) out.v[c].push_back(in.v[c][j]);
    };
    for (int j = n - p; j < n; ++j) push(j, -period);
    for (int j = 0; j < n; ++j) push(j, 0.0);
    for (int j = 0; j < p; ++j) push(j, period);
    return out;
}

// Piecewise-linear interpolation along the reference ordering: every segment
// (chi_j, chi_{j+1}) covering a target point contributes, and the contributions
// are averaged. For monotone chi this is ordinary linear interpolation; where
// chi folds back within the tolerance the overlapping branches are blended
// instead of being zig-zagged through by a sort.
inline std::vector<Vec> reconstruct_1d_linear(const LagrangianState& s, const Grid& target) {
    const Axis& ref = s.reference.axis(0);
    const Vec& chi = s.coords.at(0);
    const Eigen::Index n = chi.size();
    const double period = ref.length();
    const Eigen::Index segments = ref.periodic ? n : n - 1;
    const Vec tx = target.coordinates(0);
    std::vector<Vec> out(s.values.size(), Vec::Zero(tx.size()));
    Vec count = Vec::Zero(tx.size());
    const double tlo = tx.minCoeff();
    const double thi = tx.maxCoeff();
    for (Eigen::Index j = 0; j < segments; ++j) {
        const Eigen::Index k = (j + 1) % n;
        const double a = chi[j];
        const double b = k == 0 ? chi[k] + period : chi[k];
        const double lo = std::min(a, b);
        const double hi = std::max(a, b);
        // periodic images of the target points that can fall inside [lo, hi]
        int m0 = 0, m1 = 0;
        if (ref.periodic) {
            m0 = static_cast<int>(std::floor((lo - thi) / period));
            m1 = static_cast<int>(std::ceil((hi - tlo) / period));
        }
        for (int m = m0; m <= m1; ++m) {
            for (Eigen::Index q = 0; q < tx.size(); ++q) {
                const double x = tx[q] + m * period;
                if (x < lo || x > hi) continue;
                const double w = hi > lo ? (x - a) / (b - a) : 0.5;
                for (std::size_t c = 0; c < s.values.size(); ++c) {
                    out[c][q] += (1.0 - w) * s.values[c][j] + w * s.values[c][k];
                }
                count[q] += 1.0;
            }
        }
    }
    // Points outside the node hull take the nearest node's value.
    for (Eigen::Index q = 0; q < tx.size(); ++q) {
        if (count[q] > 0.0) {
            for (auto& c : out) c[q] /= count[q];
            continue;
        }
        Eigen::Index arg = 0;
        (chi.array() - tx[q]).abs().minCoeff(&arg);
        for (std::size_t c = 0; c < s.values.size(); ++c) out[c][q] = s.values[c][arg];
    }
    return out;
}

inline std::vector<Vec> reconstruct_1d(const LagrangianState& s, const Grid& target,
                                       ReconstructMethod method, const ReconstructOptions& opt) {
    const Axis& ref = s.reference.axis(0);
    Nodes1D nodes = sorted_nodes_1d(s, opt);
    if (method == ReconstructMethod::linear) return reconstruct_1d_linear(s, target);
    if (ref.periodic) nodes = pad_periodic(nodes, ref.length(), opt.seam_padding);
    const Vec tx = target.coordinates(0);
    const auto nn = static_cast<Eigen::Index>(nodes.x.size());
    const Vec xs = Eigen::Map<const Vec>(nodes.x.data(), nn);
    const double lo = xs[0];
    const double hi = xs[nn - 1];
    std::vector<Vec> out;
    Mat vals(nn, static_cast<Eigen::Index>(nodes.v.size()));
    for (std::size_t c = 0; c < nodes.v.size(); ++c) vals.col(static_cast<Eigen::Index>(c)) = Eigen::Map<const Vec>(nodes.v[c].data(), nn);
    const RbfBasis basis(Mat(xs), RbfTail::linear);
    const RbfInterpolant interp = basis.fit(vals);
    for (std::size_t c = 0; c < nodes.v.size(); ++c) out.emplace_back(tx.size());
    Vec pt(1);
    for (Eigen::Index k = 0; k < tx.size(); ++k) {
        Vec v;
        if (tx[k] <= lo) {
            v = vals.row(0).transpose();
        } else if (tx[k] >= hi) {
            v = vals.row(nn - 1).transpose();
        } else {
            pt[0] = tx[k];
            v = interp.evaluate(pt);
        }
        for (std::size_t c = 0; c < out.size(); ++c) out[c][k] = v[static_cast<Eigen::Index>(c)];
    }
    return out;
}

// Inverse bilinear map of point p in quad (p00, p10, p11, p01); returns false
// when Newton fails to land inside the unit square.
inline bool inverse_bilinear(const double qx[4], const double qy[4], double px, double py, double& s,
                             double& t) {
    s = 0.5;
    t = 0.5;
    constexpr double eps = 1e-10;
    for (int it = 0; it < 30; ++it) {
        const double x = (1 - s) * (1 - t) * qx[0] + s * (1 - t) * qx[1] + s * t * qx[2] + (1 - s) * t * qx[3];
        const double y = (1 - s) * (1 - t) * qy[0] + s * (1 - t) * qy[1] + s * t * qy[2] + (1 - s) * t * qy[3];
        const double rx = x - px;
        const double ry = y - py;
        const double xs = (1 - t) * (qx[1] - qx[0]) + t * (qx[2] - qx[3]);
        const double xt = (1 - s) * (qx[3] - qx[0]) + s * (qx[2] - qx[1]);
        const double ys = (1 - t) * (qy[1] - qy[0]) + t * (qy[2] - qy[3]);
        const double yt = (1 - s) * (qy[3] - qy[0]) + s * (qy[2] - qy[1]);
        const double det = xs * yt - xt * ys;
        if (det == 0.0 || !std::isfinite(det)) return false;
        const double ds = (rx * yt - ry * xt) / det;
        const double dt = (xs * ry - ys * rx) / det;
        s -= ds;
        t -= dt;
        if (std::abs(ds) + std::abs(dt) < 1e-14) break;
    }
    return s >= -eps && s <= 1 + eps && t >= -eps && t <= 1 + eps;
}

inline std::vector<Vec> reconstruct_2d_linear(const LagrangianState& s, const Grid& target,
                                              const ReconstructOptions& opt) {
    const Grid& ref = s.reference;
    const Vec& chi = s.coords.at(0);
    const Vec& zeta = s.coords.at(1);
    const double orient = min_cell_orientation_2d(chi, zeta, ref);
    if (orient < -opt.tangle_tolerance) {
        throw NumericalError("tangled Lagrangian grid: min relative cell area " + std::to_string(orient));
    }
    const Axis& rx = ref.axis(0);
    const Axis& ry = ref.axis(1);
    const int nx = rx.points;
    const int ny = ry.points;
    const int px = rx.periodic ? 1 : 0;
    const int py = ry.periodic ? 1 : 0;
    const int NX = nx + px;
    const int NY = ny + py;
    const std::size_t nc = s.values.size();

    // Extended node arrays with one period-shifted column/row across each seam.
    std::vector<double> ex(static_cast<std::size_t>(NX * NY)), ey(ex.size());
    std::vector<double> ev(ex.size() * nc);
    for (int I = 0; I < NX; ++I) {
        for (int J = 0; J < NY; ++J) {
            const int i = I % nx;
            const int j = J % ny;
            const int src = i * ny + j;
            const std::size_t dst = static_cast<std::size_t>(I * NY + J);
            ex[dst] = chi[src] + (I >= nx ? rx.length() : 0.0);
            ey[dst] = zeta[src] + (J >= ny ? ry.length() : 0.0);
            for (std::size_t c = 0; c < nc; ++c) ev[dst * nc + c] = s.values[c][src];
        }
    }

    const Axis& tx = target.axis(0);
    const Axis& ty = target.axis(1);
    const int mx = tx.points;
    const int my = ty.points;
    std::vector<Vec> out(nc, Vec::Zero(target.size()));
    std::vector<char> filled(static_cast<std::size_t>(target.size()), 0);
    std::size_t n_filled = 0;

    auto image_range = [](const Axis& a, double lo, double hi, int& k0, int& k1) {
        if (!a.periodic) {
            k0 = k1 = 0;
            return;
        }
        const double len = a.length();
        k0 = static_cast<int>(std::ceil((lo - a.hi) / len));
        k1 = static_cast<int>(std::floor((hi - a.lo) / len));
    };

    for (int I = 0; I + 1 < NX; ++I) {
        for (int J = 0; J + 1 < NY; ++J) {
            const std::size_t q[4] = {static_cast<std::size_t>(I * NY + J), static_cast<std::size_t>((I + 1) * NY + J),
                                      static_cast<std::size_t>((I + 1) * NY + J + 1),
                                      static_cast<std::size_t>(I * NY + J + 1)};
            double qx[4], qy[4];
            for (int c = 0; c < 4; ++c) {
                qx[c] = ex[q[c]];
                qy[c] = ey[q[c]];
            }
            const double xmin = std::min({qx[0], qx[1], qx[2], qx[3]});
            const double xmax = std::max({qx[0], qx[1], qx[2], qx[3]});
            const double ymin = std::min({qy[0], qy[1], qy[2], qy[3]});
            const double ymax = std::max({qy[0], qy[1], qy[2], qy[3]});
            int kx0, kx1, ky0, ky1;
            image_range(tx, xmin, xmax, kx0, kx1);
            image_range(ty, ymin, ymax, ky0, ky1);
            for (int kx = kx0; kx <= kx1; ++kx) {
                const double shx = kx * tx.length();
                const int i0 = std::max(0, static_cast<int>(std::ceil((xmin - shx - tx.lo) / tx.spacing() - 1e-9)));
                const int i1 = std::min(mx - 1, static_cast<int>(std::floor((xmax - shx - tx.lo) / tx.spacing() + 1e-9)));
                for (int ky = ky0; ky <= ky1; ++ky) {
                    const double shy = ky * ty.length();
                    const int j0 = std::max(0, static_cast<int>(std::ceil((ymin - shy - ty.lo) / ty.spacing() - 1e-9)));
                    const int j1 = std::min(my - 1, static_cast<int>(std::floor((ymax - shy - ty.lo) / ty.spacing() + 1e-9)));
                    for (int i = i0; i <= i1; ++i) {
                        for (int j = j0; j <= j1; ++j) {
                            const std::size_t flat = static_cast<std::size_t>(i * my + j);
                            if (filled[flat]) continue;
                            double ss, tt;
                            if (!inverse_bilinear(qx, qy, tx.node(i) + shx, ty.node(j) + shy, ss, tt)) continue;
                            ss = std::clamp(ss, 0.0, 1.0);
                            tt = std::clamp(tt, 0.0, 1.0);
                            const double w[4] = {(1 - ss) * (1 - tt), ss * (1 - tt), ss * tt, (1 - ss) * tt};
                            for (std::size_t c = 0; c < nc; ++c) {
                                double v = 0.0;
                                for (int m = 0; m < 4; ++m) v += w[m] * ev[q[m] * nc + c];
                                out[c][static_cast<Eigen::Index>(flat)] = v;
                            }
                            filled[flat] = 1;
                            ++n_filled;
                        }
                    }
                }
            }
        }
    }

    if (n_filled < filled.size()) {
        // Outside the displaced hull: nearest node (periodic distance where applicable).
        for (int i = 0; i < mx; ++i) {
            for (int j = 0; j < my; ++j) {
                const std::size_t flat = static_cast<std::size_t>(i * my + j);
                if (filled[flat]) continue;
                double best = std::numeric_limits<double>::infinity();
                std::size_t arg = 0;
                for (std::size_t n = 0; n < static_cast<std::size_t>(nx * ny); ++n) {
                    double dx = chi[static_cast<Eigen::Index>(n)] - tx.node(i);
                    double dy = zeta[static_cast<Eigen::Index>(n)] - ty.node(j);
                    if (tx.periodic) dx -= tx.length() * std::round(dx / tx.length());
                    if (ty.periodic) dy -= ty.length() * std::round(dy / ty.length());
                    const double d = dx * dx + dy * dy;
                    if (d < best) {
                        best = d;
                        arg = n;
                    }
                }
                for (std::size_t c = 0; c < nc; ++c) out[c][static_cast<Eigen::Index>(flat)] = s.values[c][static_cast<Eigen::Index>(arg)];
            }
        }
    }
    return out;
}

}  // namespace detail

/// Eulerian field of every state channel on `target`.
/// 1D: rbf (cubic, linear tail) through the wrapped, sorted nodes, or linear
/// along the reference ordering.
/// 2D: bilinear on the displaced structured grid. Target points outside the
/// node hull take the nearest node's value.
inline std::vector<Vec> reconstruct_eulerian(const LagrangianState& s, const Grid& target,
                                             ReconstructMethod method,
                                             const ReconstructOptions& opt = {}) {
    if (s.reference.dim() != target.dim()) throw UsageError("reference and target grids differ in dimension");
    if (s.n_nodes() < 2) throw NumericalError("reconstruction needs at least 2 nodes");
    for (const Vec& c : s.coords) {
        if (!c.allFinite()) throw NumericalError("non-finite Lagrangian coordinates");
    }
    if (s.reference.dim() == 1) return detail::reconstruct_1d(s, target, method, opt);
    if (method != ReconstructMethod::linear) throw UsageError("2D reconstruction supports the linear method only");
    return detail::reconstruct_2d_linear(s, target, opt);
}

/// Eulerian view of a Lagrangian snapshot set: every snapshot reconstructed on
/// `target`, keeping the state channels only.
inline SnapshotSet to_eulerian(const SnapshotSet& s, const Grid& target, ReconstructMethod method,
                               const ReconstructOptions& opt = {}) {
    if (s.frame() != Frame::lagrangian) throw UsageError("to_eulerian needs a Lagrangian snapshot set");
    const int nc = s.grid().dim();
    const int nv = s.n_channels() - nc;
    if (nv < 1) throw UsageError("Lagrangian set carries no state channels");
    const Eigen::Index nt = target.size();
    std::vector<Mat> traj;
    for (int p = 0; p < s.n_params(); ++p) {
        Mat m(nv * nt, s.n_times());
        for (int k = 0; k < s.n_times(); ++k) {
            const std::vector<Vec> f = reconstruct_eulerian(unstack(Vec(s.snapshot(p, k)), s.grid(), nc, nv), target, method, opt);
            for (int c = 0; c < nv; ++c) m.col(k).segment(c * nt, nt) = f[static_cast<std::size_t>(c)];
        }
        traj.push_back(std::move(m));
    }
    return SnapshotSet::from_trajectories(target, s.params(), s.times(), Frame::eulerian,
                                          {s.channels().begin() + nc, s.channels().end()}, traj);
}

}  // namespace lagrom

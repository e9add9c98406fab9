#pragma once

// Persistence: the binary snapshot container (magic, little-endian header
// length, JSON header, little-endian float64 payload), model and operator
// files in the same framing, and CSV export of analysis results.
//
// Container layout:
//   bytes 0..7    ASCII "LROMSNP1"
//   bytes 8..15   u64 little-endian header length H
//   next H bytes  UTF-8 JSON header
//   remainder     float64 little-endian, row-major [n_param, n_time, n_channel, space...]
// Latent containers omit the channel axis: [n_param, n_time, r].

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lagrom/analysis.hpp"
#include "lagrom/core.hpp"
#include "lagrom/dmd.hpp"
#include "lagrom/pdmd.hpp"

namespace lagrom::io {

using nlohmann::json;

inline constexpr std::array<char, 8> kMagic{'L', 'R', 'O', 'M', 'S', 'N', 'P', '1'};
inline constexpr int kVersion = 1;

/// Header and payload of any container-framed file.
struct RawContainer {
    json header;
    std::vector<double> payload;
};

namespace detail {

inline std::uint64_t bswap64(std::uint64_t v) {
    std::uint64_t r = 0;
    for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
    return r;
}

inline std::uint64_t to_le(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::big) return bswap64(v);
    return v;
}

inline void write_u64(std::ostream& os, std::uint64_t v) {
    const std::uint64_t le = to_le(v);
    os.write(reinterpret_cast<const char*>(&le), sizeof le);
}

inline std::uint64_t product(const std::vector<std::uint64_t>& shape) {
    std::uint64_t n = 1;
    for (auto s : shape) n *= s;
    return n;
}

inline const std::vector<std::string>& reserved_keys() {
    static const std::vector<std::string> keys{"version", "frame", "shape", "channel_names", "param_names",
                                               "param_values", "time", "grid"};
    return keys;
}

}  // namespace detail

/// Writes header + payload. The header's "shape" must describe the payload.
inline void write_raw(const std::filesystem::path& path, const json& header, std::span<const double> payload) {
    const std::string text = header.dump();
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    os.write(kMagic.data(), kMagic.size());
    detail::write_u64(os, text.size());
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    if constexpr (std::endian::native == std::endian::little) {
        os.write(reinterpret_cast<const char*>(payload.data()), static_cast<std::streamsize>(payload.size() * 8));
    } else {
        for (double d : payload) {
            const std::uint64_t le = detail::to_le(std::bit_cast<std::uint64_t>(d));
            os.write(reinterpret_cast<const char*>(&le), 8);
        }
    }
    os.flush();
    if (!os) throw IoError("write to '" + path.string() + "' failed");
}

inline RawContainer read_raw(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open '" + path.string() + "'");
    is.seekg(0, std::ios::end);
    const auto file_size = static_cast<std::uint64_t>(is.tellg());
    is.seekg(0);
    std::array<char, 8> magic{};
    if (file_size < 16 || !is.read(magic.data(), 8) || magic != kMagic) {
        throw IoError("'" + path.string() + "' is not a container (bad magic)");
    }
    std::uint64_t hlen = 0;
    is.read(reinterpret_cast<char*>(&hlen), 8);
    hlen = detail::to_le(hlen);
    if (hlen > file_size - 16) throw IoError("header length exceeds file size in '" + path.string() + "'");
    std::string text(hlen, '\0');
    is.read(text.data(), static_cast<std::streamsize>(hlen));
    RawContainer out;
    try {
        out.header = json::parse(text);
    } catch (const json::exception& e) {
        throw IoError("malformed container header: " + std::string(e.what()));
    }
    if (!out.header.is_object() || !out.header.contains("shape") || !out.header["shape"].is_array()) {
        throw IoError("container header lacks a shape");
    }
    std::vector<std::uint64_t> shape;
    for (const auto& s : out.header["shape"]) {
        if (!s.is_number_unsigned()) throw IoError("container shape must hold non-negative integers");
        shape.push_back(s.get<std::uint64_t>());
    }
    const std::uint64_t n = detail::product(shape);
    const std::uint64_t payload_bytes = file_size - 16 - hlen;
    if (payload_bytes != 8 * n) {
        throw IoError("payload length mismatch: header declares " + std::to_string(8 * n) + " bytes, file holds " +
                      std::to_string(payload_bytes));
    }
    out.payload.resize(n);
    is.read(reinterpret_cast<char*>(out.payload.data()), static_cast<std::streamsize>(8 * n));
    if (!is) throw IoError("short read from '" + path.string() + "'");
    if constexpr (std::endian::native == std::endian::big) {
        for (double& d : out.payload) d = std::bit_cast<double>(detail::bswap64(std::bit_cast<std::uint64_t>(d)));
    }
    return out;
}

inline json grid_to_json(const Grid& g) {
    json j;
    j["dim"] = g.dim();
    j["bounds"] = json::array();
    j["points"] = json::array();
    j["periodic"] = json::array();
    for (const Axis& a : g.axes()) {
        j["bounds"].push_back({a.lo, a.hi});
        j["points"].push_back(a.points);
        j["periodic"].push_back(a.periodic);
    }
    if (g.is_index()) j["index"] = true;
    return j;
}

inline Grid grid_from_json(const json& j) {
    if (j.value("index", false)) return Grid::index(j.at("points").at(0).get<int>());
    const int dim = j.at("dim").get<int>();
    std::vector<Axis> axes;
    for (int d = 0; d < dim; ++d) {
        axes.push_back(Axis{j.at("bounds").at(d).at(0).get<double>(), j.at("bounds").at(d).at(1).get<double>(),
                            j.at("points").at(d).get<int>(), j.at("periodic").at(d).get<bool>()});
    }
    return Grid(std::move(axes));
}

inline json params_to_json(const ParamSet& p) {
    json rows = json::array();
    for (int i = 0; i < p.count(); ++i) {
        json r = json::array();
        for (int d = 0; d < p.dim(); ++d) r.push_back(p.values()(i, d));
        rows.push_back(r);
    }
    return rows;
}

inline ParamSet params_from_json(const json& names, const json& values) {
    const auto n = names.get<std::vector<std::string>>();
    Mat m(static_cast<Eigen::Index>(values.size()), static_cast<Eigen::Index>(n.size()));
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i].size() != n.size()) throw IoError("parameter row width does not match param_names");
        for (std::size_t d = 0; d < n.size(); ++d) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(d)) = values[i][d].get<double>();
    }
    return ParamSet(n, m);
}

inline json time_to_json(const TimeAxis& t) { return {{"t0", t.t0}, {"dt", t.dt}, {"count", t.count}}; }
inline TimeAxis time_from_json(const json& j) {
    return TimeAxis(j.at("t0").get<double>(), j.at("dt").get<double>(), j.at("count").get<int>());
}

/// Header of a snapshot container; metadata keys (normalization, created_at,
/// unknown keys read from an earlier file) are carried through.
inline json container_header(const SnapshotSet& s) {
    json h = s.metadata();
    h["version"] = kVersion;
    h["frame"] = to_string(s.frame());
    std::vector<std::uint64_t> shape;
    if (s.frame() == Frame::latent) {
        shape = {static_cast<std::uint64_t>(s.n_params()), static_cast<std::uint64_t>(s.n_times()),
                 static_cast<std::uint64_t>(s.grid().size())};
        if (s.n_channels() != 1) throw UsageError("latent sets carry exactly one channel");
    } else {
        for (auto d : s.shape()) shape.push_back(d);
    }
    h["shape"] = shape;
    h["channel_names"] = s.channels();
    h["param_names"] = s.params().names();
    h["param_values"] = params_to_json(s.params());
    h["time"] = time_to_json(s.times());
    h["grid"] = grid_to_json(s.grid());
    return h;
}

inline void write_container(const SnapshotSet& s, const std::filesystem::path& path) {
    write_raw(path, container_header(s), s.data());
}

/// Reads a snapshot container. NaN/Inf payload entries are rejected unless allow_nonfinite.
inline SnapshotSet read_container(const std::filesystem::path& path, bool allow_nonfinite = false) {
    RawContainer raw = read_raw(path);
    const json& h = raw.header;
    try {
        if (h.at("version").get<int>() != kVersion) throw IoError("unsupported container version");
        const Frame frame = frame_from_string(h.at("frame").get<std::string>());
        const Grid grid = grid_from_json(h.at("grid"));
        const ParamSet params = params_from_json(h.at("param_names"), h.at("param_values"));
        const TimeAxis times = time_from_json(h.at("time"));
        auto channels = h.at("channel_names").get<std::vector<std::string>>();
        std::vector<std::uint64_t> shape = h.at("shape").get<std::vector<std::uint64_t>>();
        std::vector<std::uint64_t> expect{static_cast<std::uint64_t>(params.count()),
                                          static_cast<std::uint64_t>(times.count)};
        if (frame == Frame::latent) {
            expect.push_back(static_cast<std::uint64_t>(grid.size()));
        } else {
            expect.push_back(channels.size());
            for (const Axis& a : grid.axes()) expect.push_back(static_cast<std::uint64_t>(a.points));
        }
        if (shape != expect) throw IoError("container shape disagrees with its grid/params/time/channels");
        if (!allow_nonfinite) {
            for (std::size_t i = 0; i < raw.payload.size(); ++i) {
                if (!std::isfinite(raw.payload[i])) {
                    throw IoError("non-finite payload entry at flat index " + std::to_string(i));
                }
            }
        }
        json meta = json::object();
        for (auto it = h.begin(); it != h.end(); ++it) {
            if (std::find(detail::reserved_keys().begin(), detail::reserved_keys().end(), it.key()) ==
                detail::reserved_keys().end()) {
                meta[it.key()] = it.value();
            }
        }
        return SnapshotSet(grid, params, times, frame, std::move(channels), std::move(raw.payload), std::move(meta),
                           !allow_nonfinite);
    } catch (const json::exception& e) {
        throw IoError("invalid container header: " + std::string(e.what()));
    } catch (const UsageError& e) {
        throw IoError("invalid container: " + std::string(e.what()));
    }
}

// ---------------------------------------------------------------------------
// Named-block files (models, operators)

namespace detail {

struct BlockWriter {
    json blocks = json::array();
    std::vector<double> payload;

    void add(const std::string& name, const Mat& m) {
        blocks.push_back({{"name", name}, {"shape", {m.rows(), m.cols()}}, {"offset", payload.size()}});
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) payload.push_back(m(i, j));
        }
    }
};

inline Mat block(const RawContainer& raw, const std::string& name) {
    for (const auto& b : raw.header.at("blocks")) {
        if (b.at("name") != name) continue;
        const auto rows = b.at("shape").at(0).get<Eigen::Index>();
        const auto cols = b.at("shape").at(1).get<Eigen::Index>();
        const auto off = b.at("offset").get<std::size_t>();
        if (off + static_cast<std::size_t>(rows * cols) > raw.payload.size()) throw IoError("block '" + name + "' overruns payload");
        Mat m(rows, cols);
        for (Eigen::Index i = 0; i < rows; ++i) {
            for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = raw.payload[off + static_cast<std::size_t>(i * cols + j)];
        }
        return m;
    }
    throw IoError("missing block '" + name + "'");
}

inline json normalization_to_json(const ChannelNormalization& n) {
    if (!n.enabled()) return nullptr;
    return {{"kind", "zscore"}, {"mean", n.mean}, {"scale", n.scale}};
}

inline ChannelNormalization normalization_from_json(const json& j) {
    ChannelNormalization n;
    if (j.is_null()) return n;
    n.mean = j.at("mean").get<std::vector<double>>();
    n.scale = j.at("scale").get<std::vector<double>>();
    for (double s : n.scale) {
        if (s == 0.0) throw IoError("normalization scale must be nonzero");
    }
    return n;
}

}  // namespace detail

inline void write_model(const PdmdModel& m, const std::filesystem::path& path) {
    m.validate();
    detail::BlockWriter w;
    const int r = m.rank();
    if (m.compressor.kind == Compressor::Kind::pod) {
        w.add("basis", m.compressor.basis);
        w.add("sigma", m.compressor.sigma.transpose());
    }
    for (std::size_t i = 0; i < m.operators.size(); ++i) w.add("operator/" + std::to_string(i), m.operators[i]);
    Mat anchors(static_cast<Eigen::Index>(m.anchors.size()), r);
    for (std::size_t i = 0; i < m.anchors.size(); ++i) anchors.row(static_cast<Eigen::Index>(i)) = m.anchors[i].transpose();
    w.add("anchors", anchors);

    json h;
    h["version"] = kVersion;
    h["frame"] = "model";
    h["shape"] = {w.payload.size()};
    h["blocks"] = w.blocks;
    h["data_frame"] = to_string(m.frame);
    h["rank"] = r;
    h["rbf"] = {{"kernel", "cubic"}, {"tail", to_string(m.tail)}};
    h["latent_cutoff"] = m.latent_cutoff;
    h["compressor"] = {{"kind", m.compressor.kind == Compressor::Kind::pod ? "pod" : "external"},
                       {"source", m.compressor.source},
                       {"normalization", detail::normalization_to_json(m.compressor.normalization)}};
    h["channel_names"] = m.channels;
    h["param_names"] = m.params.names();
    h["param_values"] = params_to_json(m.params);
    h["time"] = time_to_json(m.times);
    h["grid"] = grid_to_json(m.grid);
    write_raw(path, h, w.payload);
}

inline PdmdModel read_model(const std::filesystem::path& path) {
    const RawContainer raw = read_raw(path);
    const json& h = raw.header;
    try {
        if (h.at("frame") != "model") throw IoError("'" + path.string() + "' is not a model file");
        PdmdModel m;
        m.frame = frame_from_string(h.at("data_frame").get<std::string>());
        m.tail = rbf_tail_from_string(h.at("rbf").at("tail").get<std::string>());
        m.latent_cutoff = h.value("latent_cutoff", kSigmaFloor);
        m.channels = h.at("channel_names").get<std::vector<std::string>>();
        m.params = params_from_json(h.at("param_names"), h.at("param_values"));
        m.times = time_from_json(h.at("time"));
        m.grid = grid_from_json(h.at("grid"));
        const json& c = h.at("compressor");
        if (c.at("kind") == "pod") {
            m.compressor.kind = Compressor::Kind::pod;
            m.compressor.basis = detail::block(raw, "basis");
            m.compressor.sigma = detail::block(raw, "sigma").transpose();
        } else {
            m.compressor.kind = Compressor::Kind::external;
        }
        m.compressor.source = c.value("source", "");
        m.compressor.normalization = detail::normalization_from_json(c.value("normalization", json(nullptr)));
        const Mat anchors = detail::block(raw, "anchors");
        for (int i = 0; i < m.params.count(); ++i) {
            m.operators.push_back(detail::block(raw, "operator/" + std::to_string(i)));
            m.anchors.push_back(anchors.row(i).transpose());
        }
        m.validate();
        return m;
    } catch (const json::exception& e) {
        throw IoError("invalid model header: " + std::string(e.what()));
    } catch (const UsageError& e) {
        throw IoError("invalid model: " + std::string(e.what()));
    }
}

inline void write_operator(const ReducedOperator& op, const std::filesystem::path& path) {
    detail::BlockWriter w;
    w.add("basis", op.basis());
    w.add("atilde", op.atilde());
    w.add("sigma", op.sigma().transpose());
    json h;
    h["version"] = kVersion;
    h["frame"] = "operator";
    h["shape"] = {w.payload.size()};
    h["blocks"] = w.blocks;
    h["data_frame"] = to_string(op.frame());
    h["param"] = std::vector<double>(op.param().data(), op.param().data() + op.param().size());
    h["degenerate"] = op.degenerate();
    write_raw(path, h, w.payload);
}

inline ReducedOperator read_operator(const std::filesystem::path& path) {
    const RawContainer raw = read_raw(path);
    const json& h = raw.header;
    try {
        if (h.at("frame") != "operator") throw IoError("'" + path.string() + "' is not an operator file");
        const auto p = h.at("param").get<std::vector<double>>();
        return ReducedOperator(detail::block(raw, "basis"), detail::block(raw, "atilde"),
                               detail::block(raw, "sigma").transpose(), frame_from_string(h.at("data_frame")),
                               Eigen::Map<const Vec>(p.data(), static_cast<Eigen::Index>(p.size())),
                               h.value("degenerate", false));
    } catch (const json::exception& e) {
        throw IoError("invalid operator header: " + std::string(e.what()));
    }
}

// ---------------------------------------------------------------------------
// CSV

struct CsvTable {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

/// %.17g, LF line endings, header row first.
inline std::string format_csv(const CsvTable& t) {
    std::string out;
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
        if (c) out += ',';
        out += t.columns[c];
    }
    out += '\n';
    char buf[40];
    for (const auto& row : t.rows) {
        if (row.size() != t.columns.size()) throw UsageError("CSV row width does not match the header");
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            std::snprintf(buf, sizeof buf, "%.17g", row[c]);
            out += buf;
        }
        out += '\n';
    }
    return out;
}

inline void export_csv(const CsvTable& t, const std::filesystem::path& path) {
    const std::string text = format_csv(t);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw IoError("cannot open '" + path.string() + "' for writing");
    os.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!os) throw IoError("write to '" + path.string() + "' failed");
}

inline CsvTable to_csv(const NWidthCurve& c) {
    CsvTable t{{"n", "d_hat", "d_hat_normalized"}, {}};
    for (std::size_t i = 0; i < c.n.size(); ++i) {
        const double d = c.d_hat[static_cast<Eigen::Index>(i)];
        t.rows.push_back({static_cast<double>(c.n[i]), d, c.d0 > 0.0 ? d / c.d0 : 0.0});
    }
    return t;
}

inline CsvTable to_csv(const CoherenceSeries& s) {
    CsvTable t{{"t", "gamma"}, {}};
    for (Eigen::Index i = 0; i < s.times.size(); ++i) t.rows.push_back({s.times[i], s.gamma[i]});
    return t;
}

/// Normalized singular values, n counted from 1.
inline CsvTable singular_values_csv(const Vec& normalized) {
    CsvTable t{{"n", "sigma_normalized"}, {}};
    for (Eigen::Index i = 0; i < normalized.size(); ++i) t.rows.push_back({static_cast<double>(i + 1), normalized[i]});
    return t;
}

/// Rows param-major then time: param_index, <param names...>, t, rel_l2_error.
inline CsvTable to_csv(const ErrorTable& e) {
    CsvTable t;
    t.columns.push_back("param_index");
    for (const auto& n : e.params.names()) t.columns.push_back(n);
    t.columns.push_back("t");
    t.columns.push_back("rel_l2_error");
    for (int p = 0; p < e.params.count(); ++p) {
        for (int k = 0; k < e.times.count; ++k) {
            std::vector<double> row{static_cast<double>(p)};
            for (int d = 0; d < e.params.dim(); ++d) row.push_back(e.params.values()(p, d));
            row.push_back(e.times.instant(k));
            row.push_back(e.errors(p, k));
            t.rows.push_back(std::move(row));
        }
    }
    return t;
}

}  // namespace lagrom::io

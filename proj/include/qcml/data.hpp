#pragma once

// Synthetic manifold generators, noise models, feature scaling and the
// comma-separated table format.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qcml/kv.hpp"

namespace qcml {

using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

struct GeneratorParams {
    std::uint64_t seed = 0;
    double noise = 0.0;
    std::size_t t = 0;
    std::size_t d = 0;
    std::map<std::string, std::string> extra;
};

// Rows are points.
struct Dataset {
    RMatrix points;
    std::string name;
    std::optional<int> true_dim;
    GeneratorParams params;

    std::size_t size() const noexcept { return static_cast<std::size_t>(points.rows()); }
    Eigen::Index dim() const noexcept { return points.cols(); }
};

// splitmix64 step, used to derive independent RNG streams from one seed.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kNoiseStream = 1;
inline constexpr std::uint64_t kRotationStream = 2;

// Adds N(0, noise^2) to every coordinate; the noise stream is independent of
// the stream that drew the clean sample.
inline void add_gaussian_noise(RMatrix& x, double noise, std::uint64_t seed) {
    if (noise < 0.0) throw InvalidInput("noise level must be nonnegative");
    if (noise == 0.0) return;
    std::mt19937_64 rng(derive_seed(seed, kNoiseStream));
    std::normal_distribution<double> g(0.0, 1.0);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (Eigen::Index k = 0; k < x.cols(); ++k) x(i, k) += noise * g(rng);
}

inline Dataset make_dataset(RMatrix pts, std::string name, std::optional<int> true_dim, std::uint64_t seed,
                            double noise) {
    Dataset ds;
    ds.params = {seed, noise, static_cast<std::size_t>(pts.rows()), static_cast<std::size_t>(pts.cols()), {}};
    ds.points = std::move(pts);
    ds.name = std::move(name);
    ds.true_dim = true_dim;
    return ds;
}

inline Dataset gen_sphere(std::size_t t, int ambient_pad, double noise, std::uint64_t seed) {
    if (t == 0) throw InvalidInput("gen_sphere: T must be >= 1");
    if (ambient_pad < 0) throw InvalidInput("gen_sphere: ambient_pad must be >= 0");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    RMatrix x = RMatrix::Zero(static_cast<Eigen::Index>(t), 3 + ambient_pad);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        Eigen::Vector3d v;
        do {
            v = {g(rng), g(rng), g(rng)};
        } while (v.norm() < 1e-12);
        x.row(i).head<3>() = v.normalized().transpose();
    }
    add_gaussian_noise(x, noise, seed);
    auto ds = make_dataset(std::move(x), "sphere", 2, seed, noise);
    ds.params.extra["ambient_pad"] = std::to_string(ambient_pad);
    return ds;
}

inline Dataset gen_circle(std::size_t t, double noise, std::uint64_t seed) {
    if (t == 0) throw InvalidInput("gen_circle: T must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
    RMatrix x(static_cast<Eigen::Index>(t), 2);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double a = u(rng);
        x(i, 0) = std::cos(a);
        x(i, 1) = std::sin(a);
    }
    add_gaussian_noise(x, noise, seed);
    return make_dataset(std::move(x), "circle", 1, seed, noise);
}

inline constexpr double kSwissRollTMin = 1.5 * std::numbers::pi;
inline constexpr double kSwissRollTMax = 4.5 * std::numbers::pi;
inline constexpr double kSwissRollHeight = 21.0;

// (t, h) -> (t cos t, h, t sin t), t ~ U[1.5 pi, 4.5 pi], h ~ U[0, 21]; each
// coordinate is then centred and scaled to unit std. The affine map is kept
// in params.extra (center_k, scale_k) so the surface can be inverted.
inline Dataset gen_swiss_roll(std::size_t t, double noise, std::uint64_t seed) {
    if (t == 0) throw InvalidInput("gen_swiss_roll: T must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ut(kSwissRollTMin, kSwissRollTMax), uh(0.0, kSwissRollHeight);
    RMatrix x(static_cast<Eigen::Index>(t), 3);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        const double tt = ut(rng);
        const double h = uh(rng);
        x(i, 0) = tt * std::cos(tt);
        x(i, 1) = h;
        x(i, 2) = tt * std::sin(tt);
    }
    Dataset ds;
    std::map<std::string, std::string> extra;
    for (Eigen::Index k = 0; k < 3; ++k) {
        const double c = x.col(k).mean();
        double s = std::sqrt((x.col(k).array() - c).square().mean());
        if (!(s > 0.0)) s = 1.0;
        x.col(k) = (x.col(k).array() - c) / s;
        extra["center_" + std::to_string(k)] = format_double(c);
        extra["scale_" + std::to_string(k)] = format_double(s);
    }
    add_gaussian_noise(x, noise, seed);
    ds = make_dataset(std::move(x), "swissroll", 2, seed, noise);
    ds.params.extra = std::move(extra);
    return ds;
}

// Haar-distributed orthogonal matrix from the QR factorization of a Gaussian
// matrix, with the sign of R's diagonal folded into Q.
inline RMatrix random_rotation(Eigen::Index n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    RMatrix m(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i) m(i, j) = g(rng);
    Eigen::HouseholderQR<RMatrix> qr(m);
    RMatrix q = qr.householderQ() * RMatrix::Identity(n, n);
    const RMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (Eigen::Index j = 0; j < n; ++j)
        if (r(j, j) < 0) q.col(j) = -q.col(j);
    return q;
}

inline RMatrix hypercube_rotation(Eigen::Index ambient, std::uint64_t seed) {
    return random_rotation(ambient, derive_seed(seed, kRotationStream));
}

// Uniform [0,1]^d zero-padded to D, then rotated: row x -> R x.
inline Dataset gen_hypercube(int d, int ambient, std::size_t t, double noise, std::uint64_t seed) {
    if (d < 1 || d >= ambient) throw InvalidInput("gen_hypercube: need 1 <= d < D");
    if (t == 0) throw InvalidInput("gen_hypercube: T must be >= 1");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    RMatrix x = RMatrix::Zero(static_cast<Eigen::Index>(t), ambient);
    for (Eigen::Index i = 0; i < x.rows(); ++i)
        for (int k = 0; k < d; ++k) x(i, k) = u(rng);
    const RMatrix rot = hypercube_rotation(ambient, seed);
    RMatrix y = x * rot.transpose();
    add_gaussian_noise(y, noise, seed);
    auto ds = make_dataset(std::move(y), "hypercube", d, seed, noise);
    ds.params.extra["intrinsic_d"] = std::to_string(d);
    return ds;
}

// Y_i = X_i + eps * sigma_i * Z_i per feature, sigma_i the population std.
inline Dataset add_feature_scaled_noise(const Dataset& x, double eps, std::uint64_t seed) {
    if (eps < 0.0) throw InvalidInput("add_feature_scaled_noise: epsilon must be nonnegative");
    Dataset y = x;
    y.params.extra["feature_noise_eps"] = format_double(eps);
    y.params.extra["feature_noise_seed"] = std::to_string(seed);
    if (eps == 0.0) return y;
    std::mt19937_64 rng(derive_seed(seed, kNoiseStream));
    std::normal_distribution<double> g(0.0, 1.0);
    for (Eigen::Index k = 0; k < x.points.cols(); ++k) {
        const auto col = x.points.col(k);
        const double sd = std::sqrt((col.array() - col.mean()).square().mean());
        for (Eigen::Index i = 0; i < x.points.rows(); ++i) {
            const double z = g(rng);
            y.points(i, k) += eps * sd * z;
        }
    }
    return y;
}

enum class ScaleMode { none, zscore, minmax };

inline ScaleMode parse_scale_mode(const std::string& s) {
    if (s == "none") return ScaleMode::none;
    if (s == "zscore") return ScaleMode::zscore;
    if (s == "minmax") return ScaleMode::minmax;
    throw InvalidInput("unknown scaling '" + s + "' (expected none, zscore, minmax)");
}

inline std::string to_string(ScaleMode m) {
    switch (m) {
        case ScaleMode::none: return "none";
        case ScaleMode::zscore: return "zscore";
        case ScaleMode::minmax: return "minmax";
    }
    return "?";
}

// y = (x - offset) / scale per feature.
struct Scaler {
    ScaleMode mode = ScaleMode::none;
    RVector offset;
    RVector scale;
    std::vector<std::string> warnings;
};

inline std::pair<Dataset, Scaler> standardize(const Dataset& x, ScaleMode mode) {
    const auto d = x.points.cols();
    Scaler sc{mode, RVector::Zero(d), RVector::Ones(d), {}};
    Dataset y = x;
    if (mode == ScaleMode::none || x.points.rows() == 0) return {y, sc};
    for (Eigen::Index k = 0; k < d; ++k) {
        const auto col = x.points.col(k);
        double off = 0.0, s = 1.0;
        if (mode == ScaleMode::zscore) {
            off = col.mean();
            s = std::sqrt((col.array() - off).square().mean());
        } else {
            off = col.minCoeff();
            s = col.maxCoeff() - off;
        }
        if (!(s > 0.0)) {
            sc.warnings.push_back("feature " + std::to_string(k) + " has zero spread; passed through unscaled");
            continue;
        }
        sc.offset[k] = off;
        sc.scale[k] = s;
        y.points.col(k) = (col.array() - off) / s;
    }
    y.params.extra["scaling"] = to_string(mode);
    return {y, sc};
}

// ---- delimited tables ----------------------------------------------------

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline Dataset load_table(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ParseError("cannot open table '" + path + "'");
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    std::size_t width = 0;
    bool first_content = true;
    while (std::getline(f, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        std::vector<double> values;
        values.reserve(cells.size());
        std::optional<std::size_t> bad;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const auto v = parse_double(cells[c]);
            if (!v) {
                bad = c;
                break;
            }
            values.push_back(*v);
        }
        if (first_content) {
            first_content = false;
            width = cells.size();
            if (bad) continue;  // header row
        }
        if (bad)
            throw ParseError(path + ": non-numeric cell at row " + std::to_string(line_no) + ", column " +
                                 std::to_string(*bad + 1),
                             line_no, *bad + 1);
        if (values.size() != width)
            throw ParseError(path + ": row " + std::to_string(line_no) + " has " + std::to_string(values.size()) +
                                 " cells, expected " + std::to_string(width),
                             line_no, std::min(values.size(), width) + 1);
        rows.push_back(std::move(values));
    }
    if (rows.empty()) throw ParseError(path + ": table has no data rows");

    Dataset ds;
    ds.points.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t k = 0; k < width; ++k)
            ds.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
    ds.name = "table";
    ds.params.t = rows.size();
    ds.params.d = width;
    return ds;
}

inline std::string table_string(const RMatrix& x, bool header = true) {
    std::string out;
    if (header) {
        for (Eigen::Index k = 0; k < x.cols(); ++k) out += (k ? ",x" : "x") + std::to_string(k + 1);
        out += "\n";
    }
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index k = 0; k < x.cols(); ++k) {
            if (k) out += ',';
            out += format_double(x(i, k));
        }
        out += '\n';
    }
    return out;
}

inline void save_table(const Dataset& x, const std::string& path, bool header = true) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write table '" + path + "'");
    f << table_string(x.points, header);
}

inline std::string metadata_path(const std::string& table_path) { return table_path + ".meta"; }

inline KeyValueDoc dataset_metadata(const Dataset& x) {
    KeyValueDoc doc;
    doc.set("name", x.name);
    doc.set("true_dim", x.true_dim ? std::to_string(*x.true_dim) : std::string("unknown"));
    doc.set("t", static_cast<unsigned long long>(x.points.rows()));
    doc.set("d", static_cast<unsigned long long>(x.points.cols()));
    doc.set("seed", static_cast<unsigned long long>(x.params.seed));
    doc.set("noise", x.params.noise);
    for (const auto& [k, v] : x.params.extra) doc.set(k, v);
    return doc;
}

inline void save_metadata(const Dataset& x, const std::string& table_path) {
    dataset_metadata(x).write(metadata_path(table_path));
}

// Loads a table and, when present, its metadata sidecar.
inline Dataset load_dataset(const std::string& path) {
    Dataset ds = load_table(path);
    std::ifstream probe(metadata_path(path));
    if (!probe) return ds;
    const auto meta = KeyValueDoc::read(metadata_path(path));
    if (auto v = meta.get("name")) ds.name = *v;
    if (auto v = meta.get("true_dim"); v && *v != "unknown") ds.true_dim = std::stoi(*v);
    if (auto v = meta.get("seed")) ds.params.seed = std::stoull(*v);
    if (auto v = meta.get("noise")) ds.params.noise = parse_double(*v).value_or(0.0);
    for (const auto& [k, v] : meta.entries())
        if (k != "name" && k != "true_dim" && k != "seed" && k != "noise" && k != "t" && k != "d")
            ds.params.extra[k] = v;
    return ds;
}

}  // namespace qcml

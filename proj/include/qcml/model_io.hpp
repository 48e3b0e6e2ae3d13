#pragma once

// Binary container for a MatrixConfiguration. All integers and doubles are
// little-endian; doubles are IEEE-754 binary64.
//
//   offset  size      field
//   0       8         magic "QCMLCFG\0"
//   8       4  u32    format version (1)
//   12      4  u32    D (feature dimension)
//   16      4  u32    N (Hilbert dimension)
//   20      8  u64    training seed
//   28      8  f64    fluctuation weight w
//   36      4  u32    L, length of the free-form text block
//   40      L         text block (UTF-8 "key = value" lines)
//   40+L    16*D*N*N  operators A_1..A_D, each row-major, entry = (re f64, im f64)

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qcml/matrix_config.hpp"

namespace qcml {

inline constexpr std::array<char, 8> kModelMagic{'Q', 'C', 'M', 'L', 'C', 'F', 'G', '\0'};
inline constexpr std::uint32_t kModelVersion = 1;

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_u64(std::string& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}
inline void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
public:
    explicit Reader(const std::string& bytes) : b_(bytes) {}
    std::uint64_t uint(int width) {
        need(static_cast<std::size_t>(width));
        std::uint64_t v = 0;
        for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
        pos_ += static_cast<std::size_t>(width);
        return v;
    }
    double f64() { return std::bit_cast<double>(uint(8)); }
    std::string bytes(std::size_t n) {
        need(n);
        std::string s = b_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::size_t remaining() const { return b_.size() - pos_; }

private:
    void need(std::size_t n) const {
        if (b_.size() - pos_ < n) throw ParseError("model file is truncated");
    }
    const std::string& b_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline std::string encode_model(const MatrixConfiguration& a, const std::string& text = {}) {
    std::string out(kModelMagic.begin(), kModelMagic.end());
    detail::put_u32(out, kModelVersion);
    detail::put_u32(out, static_cast<std::uint32_t>(a.feature_dim()));
    detail::put_u32(out, static_cast<std::uint32_t>(a.hilbert_dim()));
    detail::put_u64(out, a.metadata().seed);
    detail::put_f64(out, a.metadata().fluctuation_weight);
    detail::put_u32(out, static_cast<std::uint32_t>(text.size()));
    out += text;
    for (const auto& op : a.operators())
        for (Eigen::Index i = 0; i < op.dim(); ++i)
            for (Eigen::Index j = 0; j < op.dim(); ++j) {
                detail::put_f64(out, op(i, j).real());
                detail::put_f64(out, op(i, j).imag());
            }
    return out;
}

struct DecodedModel {
    MatrixConfiguration config;
    std::string text;
};

inline DecodedModel decode_model(const std::string& bytes) {
    if (bytes.size() < kModelMagic.size() || std::memcmp(bytes.data(), kModelMagic.data(), kModelMagic.size()) != 0)
        throw ParseError("not a matrix-configuration file (bad magic)");
    detail::Reader r(bytes);
    r.bytes(kModelMagic.size());
    const auto version = r.uint(4);
    if (version != kModelVersion) throw ParseError("unsupported model format version " + std::to_string(version));
    const auto d = static_cast<Eigen::Index>(r.uint(4));
    const auto n = static_cast<Eigen::Index>(r.uint(4));
    ConfigMetadata meta;
    meta.seed = r.uint(8);
    meta.fluctuation_weight = r.f64();
    const auto len = static_cast<std::size_t>(r.uint(4));
    DecodedModel out;
    out.text = r.bytes(len);
    if (d < 1 || n < 2) throw ParseError("model file has invalid dimensions");
    if (r.remaining() != static_cast<std::size_t>(16 * d * n * n)) throw ParseError("model file size does not match D and N");
    std::vector<HermitianOperator> ops;
    for (Eigen::Index k = 0; k < d; ++k) {
        CMatrix m(n, n);
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j) {
                const double re = r.f64();
                const double im = r.f64();
                m(i, j) = cdouble(re, im);
            }
        if (!all_finite(m)) throw ParseError("model file contains non-finite entries");
        if (hermiticity_residual(m) > 1e-12 * (1.0 + m.cwiseAbs().maxCoeff()))
            throw ParseError("model file operator " + std::to_string(k + 1) + " is not Hermitian");
        ops.emplace_back(m);
    }
    out.config = MatrixConfiguration(std::move(ops), meta);
    return out;
}

inline void save_model(const MatrixConfiguration& a, const std::string& path, const std::string& text = {}) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write model '" + path + "'");
    const auto bytes = encode_model(a, text);
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline DecodedModel load_model(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open model '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return decode_model(ss.str());
}

}  // namespace qcml

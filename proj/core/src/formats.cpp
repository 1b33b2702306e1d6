#include "phi/formats.hpp"

#include <array>
#include <cstring>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>

#include "phi/error.hpp"

namespace phi {
namespace {

using Magic = std::array<char, 4>;

constexpr Magic kActs{'P', 'H', 'I', 'A'};
constexpr Magic kWeights{'P', 'H', 'I', 'W'};
constexpr Magic kTernary{'P', 'H', 'I', 'T'};
constexpr Magic kPatterns{'P', 'H', 'I', 'P'};
constexpr Magic kIndices{'P', 'H', 'I', 'I'};
constexpr Magic kPwp{'P', 'H', 'P', 'W'};

std::string magic_str(const Magic& m) { return std::string(m.data(), m.size()); }

void put_u32(std::ostream& os, std::uint32_t v) {
    const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                       static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
    os.write(b, 4);
}

void put_u16(std::ostream& os, std::uint16_t v) {
    const char b[2] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff)};
    os.write(b, 2);
}

void put_i32(std::ostream& os, std::int32_t v) { put_u32(os, static_cast<std::uint32_t>(v)); }

void read_exact(std::istream& is, void* dst, std::size_t n, const char* what) {
    is.read(static_cast<char*>(dst), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(is.gcount()) != n)
        throw FormatError(std::string("truncated ") + what + " payload");
}

std::uint32_t get_u32(std::istream& is, const char* what) {
    unsigned char b[4];
    read_exact(is, b, 4, what);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

void expect_magic(std::istream& is, const Magic& want) {
    Magic got{};
    is.read(got.data(), 4);
    if (is.gcount() != 4) throw FormatError("missing " + magic_str(want) + " header");
    if (got != want)
        throw FormatError("bad magic: expected " + magic_str(want) + ", got '" + magic_str(got) +
                          "'");
}

void write_magic(std::ostream& os, const Magic& m) { os.write(m.data(), 4); }

std::uint32_t checked_u32(std::size_t v, const char* what) {
    if (v > std::numeric_limits<std::uint32_t>::max())
        throw RangeError(std::string(what) + " does not fit in a 32-bit header field");
    return static_cast<std::uint32_t>(v);
}

template <class Fn>
void with_output(const std::filesystem::path& path, Fn&& fn) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw Error("cannot open " + path.string() + " for writing");
    fn(os);
    os.flush();
    if (!os) throw Error("write failed: " + path.string());
}

template <class Fn>
auto with_input(const std::filesystem::path& path, Fn&& fn) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path.string());
    return fn(is);
}

} // namespace

// --- PHIA ------------------------------------------------------------------

void write_bitmatrix(std::ostream& os, const BitMatrix& A) {
    write_magic(os, kActs);
    put_u32(os, checked_u32(A.rows(), "M"));
    put_u32(os, checked_u32(A.cols(), "K"));
    os.write(reinterpret_cast<const char*>(A.bytes().data()),
             static_cast<std::streamsize>(A.bytes().size()));
}

BitMatrix read_bitmatrix(std::istream& is) {
    expect_magic(is, kActs);
    const auto M = get_u32(is, "PHIA header");
    const auto K = get_u32(is, "PHIA header");
    if (M == 0 || K == 0) throw FormatError("PHIA: empty matrix (M*K = 0)");
    BitMatrix A(M, K);
    std::vector<std::uint8_t> row(A.row_stride());
    for (std::size_t r = 0; r < M; ++r) {
        read_exact(is, row.data(), row.size(), "PHIA");
        A.assign_row_bytes(r, row);
    }
    return A;
}

void store_bitmatrix(const std::filesystem::path& path, const BitMatrix& A) {
    with_output(path, [&](std::ostream& os) { write_bitmatrix(os, A); });
}

BitMatrix load_bitmatrix(const std::filesystem::path& path) {
    return with_input(path, [](std::istream& is) { return read_bitmatrix(is); });
}

// --- PHIW ------------------------------------------------------------------

void write_weights(std::ostream& os, const WeightMatrix& W) {
    write_magic(os, kWeights);
    put_u32(os, checked_u32(W.rows(), "K"));
    put_u32(os, checked_u32(W.cols(), "N"));
    for (auto v : W.data()) put_i32(os, v);
}

WeightMatrix read_weights(std::istream& is) {
    expect_magic(is, kWeights);
    const auto K = get_u32(is, "PHIW header");
    const auto N = get_u32(is, "PHIW header");
    if (K == 0 || N == 0) throw FormatError("PHIW: empty matrix (K*N = 0)");
    WeightMatrix W(K, N);
    std::vector<unsigned char> buf(static_cast<std::size_t>(N) * 4);
    for (std::size_t r = 0; r < K; ++r) {
        read_exact(is, buf.data(), buf.size(), "PHIW");
        auto dst = W.row(r);
        for (std::size_t c = 0; c < N; ++c) {
            const unsigned char* b = buf.data() + 4 * c;
            const std::uint32_t u = static_cast<std::uint32_t>(b[0]) |
                                    (static_cast<std::uint32_t>(b[1]) << 8) |
                                    (static_cast<std::uint32_t>(b[2]) << 16) |
                                    (static_cast<std::uint32_t>(b[3]) << 24);
            dst[c] = static_cast<std::int32_t>(u);
        }
    }
    return W;
}

void store_weights(const std::filesystem::path& path, const WeightMatrix& W) {
    with_output(path, [&](std::ostream& os) { write_weights(os, W); });
}

WeightMatrix load_weights(const std::filesystem::path& path) {
    return with_input(path, [](std::istream& is) { return read_weights(is); });
}

// --- PHIT ------------------------------------------------------------------

void write_ternary(std::ostream& os, const TernaryMatrix& T) {
    write_magic(os, kTernary);
    put_u32(os, checked_u32(T.rows(), "M"));
    put_u32(os, checked_u32(T.cols(), "K"));
    const std::size_t stride = (T.cols() + 3) / 4;
    std::vector<char> row(stride);
    for (std::size_t r = 0; r < T.rows(); ++r) {
        std::fill(row.begin(), row.end(), 0);
        for (std::size_t c = 0; c < T.cols(); ++c) {
            const int v = T.get(r, c);
            const unsigned code = v == 1 ? 0b01u : (v == -1 ? 0b11u : 0u);
            row[c / 4] = static_cast<char>(static_cast<unsigned char>(row[c / 4]) |
                                           (code << (2 * (c % 4))));
        }
        os.write(row.data(), static_cast<std::streamsize>(stride));
    }
}

TernaryMatrix read_ternary(std::istream& is) {
    expect_magic(is, kTernary);
    const auto M = get_u32(is, "PHIT header");
    const auto K = get_u32(is, "PHIT header");
    if (M == 0 || K == 0) throw FormatError("PHIT: empty matrix (M*K = 0)");
    TernaryMatrix T(M, K);
    const std::size_t stride = (static_cast<std::size_t>(K) + 3) / 4;
    std::vector<unsigned char> row(stride);
    for (std::size_t r = 0; r < M; ++r) {
        read_exact(is, row.data(), stride, "PHIT");
        for (std::size_t c = 0; c < K; ++c) {
            const unsigned code = (row[c / 4] >> (2 * (c % 4))) & 0b11u;
            if (code == 0b10u)
                throw FormatError("PHIT: invalid 2-bit code at row " + std::to_string(r) +
                                  ", col " + std::to_string(c));
            if (code == 0b01u) T.set(r, c, 1);
            else if (code == 0b11u) T.set(r, c, -1);
        }
    }
    return T;
}

void store_ternary(const std::filesystem::path& path, const TernaryMatrix& T) {
    with_output(path, [&](std::ostream& os) { write_ternary(os, T); });
}

TernaryMatrix load_ternary(const std::filesystem::path& path) {
    return with_input(path, [](std::istream& is) { return read_ternary(is); });
}

// --- PHIP ------------------------------------------------------------------

void write_patterns(std::ostream& os, std::span<const PatternSet> sets) {
    if (sets.empty()) throw RangeError("write_patterns: no pattern sets");
    const std::uint32_t k = sets.front().k();
    std::size_t q = 0;
    for (const auto& s : sets) {
        if (s.k() != k && !s.empty()) throw ShapeError("write_patterns: mixed pattern lengths");
        q = std::max(q, s.size());
    }
    write_magic(os, kPatterns);
    put_u32(os, k);
    put_u32(os, checked_u32(q, "q"));
    put_u32(os, checked_u32(sets.size(), "P"));
    const std::size_t bytes = (k + 7) / 8;
    for (const auto& s : sets) {
        for (std::size_t i = 0; i < q; ++i) {
            const std::uint64_t bits = i < s.size() ? s.patterns()[i] : 0;
            for (std::size_t b = 0; b < bytes; ++b) os.put(static_cast<char>((bits >> (8 * b)) & 0xff));
        }
    }
}

std::vector<PatternSet> read_patterns(std::istream& is) {
    expect_magic(is, kPatterns);
    const auto k = get_u32(is, "PHIP header");
    const auto q = get_u32(is, "PHIP header");
    const auto P = get_u32(is, "PHIP header");
    if (k < 2 || k > kMaxPartitionWidth) throw FormatError("PHIP: unsupported k " + std::to_string(k));
    if (P == 0) throw FormatError("PHIP: zero partitions");
    if (q > std::numeric_limits<PatternId>::max()) throw FormatError("PHIP: q too large");
    const std::size_t bytes = (k + 7) / 8;
    std::vector<PatternSet> sets;
    sets.reserve(P);
    std::vector<unsigned char> buf(bytes);
    for (std::uint32_t j = 0; j < P; ++j) {
        std::vector<std::uint64_t> pats;
        bool padding = false;
        for (std::uint32_t i = 0; i < q; ++i) {
            read_exact(is, buf.data(), bytes, "PHIP");
            std::uint64_t bits = 0;
            for (std::size_t b = 0; b < bytes; ++b) bits |= static_cast<std::uint64_t>(buf[b]) << (8 * b);
            if (bits & ~low_mask(k)) throw FormatError("PHIP: pattern bits beyond k");
            if (bits == 0) {
                padding = true;
                continue;
            }
            if (padding) throw FormatError("PHIP: pattern after zero padding in partition " + std::to_string(j));
            pats.push_back(bits);
        }
        try {
            sets.emplace_back(k, std::move(pats));
        } catch (const RangeError& e) {
            throw FormatError(std::string("PHIP: ") + e.what());
        }
    }
    return sets;
}

void store_patterns(const std::filesystem::path& path, std::span<const PatternSet> sets) {
    with_output(path, [&](std::ostream& os) { write_patterns(os, sets); });
}

std::vector<PatternSet> load_patterns(const std::filesystem::path& path) {
    return with_input(path, [](std::istream& is) { return read_patterns(is); });
}

// --- PHII ------------------------------------------------------------------

void write_indices(std::ostream& os, const L1IndexMatrix& l1) {
    write_magic(os, kIndices);
    put_u32(os, checked_u32(l1.rows(), "M"));
    put_u32(os, checked_u32(l1.partitions(), "P"));
    put_u32(os, l1.q());
    const bool narrow = l1.q() <= 255;
    for (auto id : l1.ids()) {
        if (narrow) os.put(static_cast<char>(id));
        else put_u16(os, id);
    }
}

L1IndexMatrix read_indices(std::istream& is) {
    expect_magic(is, kIndices);
    const auto M = get_u32(is, "PHII header");
    const auto P = get_u32(is, "PHII header");
    const auto q = get_u32(is, "PHII header");
    if (M == 0 || P == 0) throw FormatError("PHII: empty index matrix");
    if (q > std::numeric_limits<PatternId>::max()) throw FormatError("PHII: q too large");
    L1IndexMatrix l1(M, P, q);
    const std::size_t width = q <= 255 ? 1 : 2;
    std::vector<unsigned char> buf(static_cast<std::size_t>(P) * width);
    for (std::size_t r = 0; r < M; ++r) {
        read_exact(is, buf.data(), buf.size(), "PHII");
        for (std::size_t j = 0; j < P; ++j) {
            const unsigned id = width == 1 ? buf[j] : (buf[2 * j] | (buf[2 * j + 1] << 8));
            if (id > q) throw FormatError("PHII: ID " + std::to_string(id) + " exceeds q");
            l1.at(r, j) = static_cast<PatternId>(id);
        }
    }
    return l1;
}

void store_indices(const std::filesystem::path& path, const L1IndexMatrix& l1) {
    with_output(path, [&](std::ostream& os) { write_indices(os, l1); });
}

L1IndexMatrix load_indices(const std::filesystem::path& path) {
    return with_input(path, [](std::istream& is) { return read_indices(is); });
}

// --- PHPW ------------------------------------------------------------------

void write_pwp(std::ostream& os, const PwpTable& table) {
    std::size_t q = 0;
    for (std::size_t j = 0; j < table.partitions(); ++j) q = std::max(q, table.patterns(j));
    write_magic(os, kPwp);
    put_u32(os, checked_u32(table.partitions(), "P"));
    put_u32(os, checked_u32(q, "q"));
    put_u32(os, checked_u32(table.cols(), "N"));
    for (std::size_t j = 0; j < table.partitions(); ++j) {
        const auto& part = table.partition(j);
        for (std::size_t p = 0; p < q; ++p) {
            for (std::size_t c = 0; c < table.cols(); ++c) {
                const std::int64_t v = p < part.rows() ? part.at(p, c) : 0;
                if (v < std::numeric_limits<std::int32_t>::min() ||
                    v > std::numeric_limits<std::int32_t>::max())
                    throw RangeError("PHPW: PWP value does not fit in int32");
                put_i32(os, static_cast<std::int32_t>(v));
            }
        }
    }
}

PwpTable read_pwp(std::istream& is) {
    expect_magic(is, kPwp);
    const auto P = get_u32(is, "PHPW header");
    const auto q = get_u32(is, "PHPW header");
    const auto N = get_u32(is, "PHPW header");
    if (P == 0 || N == 0) throw FormatError("PHPW: empty table");
    std::vector<DenseMatrix<std::int64_t>> parts;
    parts.reserve(P);
    for (std::uint32_t j = 0; j < P; ++j) {
        DenseMatrix<std::int64_t> part(q, N);
        for (std::size_t i = 0; i < static_cast<std::size_t>(q) * N; ++i)
            part.data()[i] = static_cast<std::int32_t>(get_u32(is, "PHPW"));
        parts.push_back(std::move(part));
    }
    return PwpTable(std::move(parts), N);
}

void store_pwp(const std::filesystem::path& path, const PwpTable& table) {
    with_output(path, [&](std::ostream& os) { write_pwp(os, table); });
}

PwpTable load_pwp(const std::filesystem::path& path) {
    return with_input(path, [](std::istream& is) { return read_pwp(is); });
}

} // namespace phi

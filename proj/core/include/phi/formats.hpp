#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "phi/binmat.hpp"
#include "phi/calibration.hpp"
#include "phi/compute.hpp"
#include "phi/decompose.hpp"

namespace phi {

// On-disk formats. Every file starts with a 4-byte ASCII magic followed by
// 32-bit little-endian unsigned header fields.
//
//   PHIA  activations  M, K; rows of ceil(K/8) bytes, LSB-first
//   PHIW  weights      K, N; K*N int32 LE, row-major
//   PHIT  ternary      M, K; rows of ceil(K/4) bytes, 2 bits per entry
//                      (00 = 0, 01 = +1, 11 = -1), entry c at bit 2*(c%4)
//   PHIP  patterns     k, q, P; P*q patterns of ceil(k/8) bytes,
//                      partition-major, ID order; trailing all-zero
//                      entries pad sets with fewer than q patterns
//   PHII  L1 indices   M, P, q; IDs as u8 (q <= 255) or u16 LE, row-major
//   PHPW  PWP table    P, q, N; P*q*N int32 LE (rows of missing IDs are 0)

void write_bitmatrix(std::ostream& os, const BitMatrix& A);
BitMatrix read_bitmatrix(std::istream& is);
void store_bitmatrix(const std::filesystem::path& path, const BitMatrix& A);
BitMatrix load_bitmatrix(const std::filesystem::path& path);

void write_weights(std::ostream& os, const WeightMatrix& W);
WeightMatrix read_weights(std::istream& is);
void store_weights(const std::filesystem::path& path, const WeightMatrix& W);
WeightMatrix load_weights(const std::filesystem::path& path);

void write_ternary(std::ostream& os, const TernaryMatrix& T);
TernaryMatrix read_ternary(std::istream& is);
void store_ternary(const std::filesystem::path& path, const TernaryMatrix& T);
TernaryMatrix load_ternary(const std::filesystem::path& path);

void write_patterns(std::ostream& os, std::span<const PatternSet> sets);
std::vector<PatternSet> read_patterns(std::istream& is);
void store_patterns(const std::filesystem::path& path, std::span<const PatternSet> sets);
std::vector<PatternSet> load_patterns(const std::filesystem::path& path);

void write_indices(std::ostream& os, const L1IndexMatrix& l1);
L1IndexMatrix read_indices(std::istream& is);
void store_indices(const std::filesystem::path& path, const L1IndexMatrix& l1);
L1IndexMatrix load_indices(const std::filesystem::path& path);

/// RangeError if a PWP value does not fit in int32.
void write_pwp(std::ostream& os, const PwpTable& table);
PwpTable read_pwp(std::istream& is);
void store_pwp(const std::filesystem::path& path, const PwpTable& table);
PwpTable load_pwp(const std::filesystem::path& path);

} // namespace phi

#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <vector>

namespace rmaccess {

inline constexpr int kMinOrder = 2;
inline constexpr int kMaxOrder = 16;

// A user ID occupies m(m-1)/2 bits, up to 120 bits at the maximum order.
using IdValue = unsigned __int128;

// Number of distinct IDs at order m: 2^(m(m-1)/2).
IdValue id_capacity(int m);
int id_bits(int m);

std::string id_to_string(IdValue v);
IdValue id_from_string(const std::string& s);

struct UserId {
    IdValue value = 0;
    int m = kMinOrder;

    friend bool operator==(const UserId&, const UserId&) = default;
};

// Symmetric binary matrix with zero diagonal plus its parity vector: the
// discrete identity of one sequence. b is stored highest index first, so
// b[0] pairs with the most significant bit of a sequence position index.
struct RmPair {
    int m = kMinOrder;
    std::vector<std::uint8_t> p;  // m*m entries, row-major
    std::vector<std::uint8_t> b;  // [b_m, ..., b_1]

    std::uint8_t& at(int i, int j) { return p[static_cast<std::size_t>(i) * m + j]; }
    std::uint8_t at(int i, int j) const { return p[static_cast<std::size_t>(i) * m + j]; }

    friend bool operator==(const RmPair&, const RmPair&) = default;
};

// One recovered detection unit: the leading row of the order-s trailing
// principal submatrix (without its zero corner) and the matching parity bit.
struct Layer {
    int s = kMinOrder;
    std::vector<std::uint8_t> alpha;  // length s-1
    std::uint8_t b_s = 0;

    friend bool operator==(const Layer&, const Layer&) = default;
};

// Bipolar chip vector of length 2^m. chips[0] is always +1.
struct RmSequence {
    int m = 0;
    std::vector<std::int8_t> chips;

    friend bool operator==(const RmSequence&, const RmSequence&) = default;
};

// True iff symmetry, zero diagonal and the parity construction of b all hold.
bool pair_valid(const RmPair& pair) noexcept;

// Bijective ID <-> pair mapping. The ID bits fill the strict upper triangle
// row by row (most significant bit first); b is rebuilt from the parity rule,
// so its Hamming weight is always even.
RmPair id_to_pair(const UserId& id);
UserId pair_to_id(const RmPair& pair);

// Bipolar second-order sequence, unnormalized: chip j has sign parity
// b.a + sum_{i<k} P[i][k] a_i a_k, with a the m-bit big-endian expansion of j.
// Needs only the structural part of the invariants (symmetric binary P with
// zero diagonal); sub-pairs, whose trailing parity bit is inherited rather
// than rebuilt, generate fine.
RmSequence generate_sequence(const RmPair& pair);

// The unsimplified fourth-root-of-unity generator with the (-1)^wt(b) factor
// and 1/sqrt(2^m) normalization. For any pair satisfying the invariants the
// result is real and equals generate_sequence scaled by 1/sqrt(2^m); kept as
// an independent cross-check of the bipolar generator.
std::vector<std::complex<double>> quaternary_sequence(const RmPair& pair);

// Layer s of the pair, 2 <= s <= m.
Layer extract_layer(const RmPair& pair, int s);

// Walsh row of length 2^(s-1): v_j = (-1)^(alpha . ~a_j) where ~a flips
// every bit of the (s-1)-bit position index.
std::vector<std::int8_t> walsh_row(const Layer& layer);

// (half, half .* v): glues an order-(s-1) sequence and a Walsh row into the
// order-s sequence.
RmSequence nested_compose(const RmSequence& half, const std::vector<std::int8_t>& v);

std::int64_t inner_product(const RmSequence& c1, const RmSequence& c2);

}  // namespace rmaccess

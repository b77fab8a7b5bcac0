#include "rmaccess/rm_core.hpp"

#include <bit>
#include <cstddef>
#include <stdexcept>

namespace rmaccess {

namespace {

void require_order(int m) {
    if (m < kMinOrder || m > kMaxOrder)
        throw std::invalid_argument("order must be in [" + std::to_string(kMinOrder) + ", " +
                                    std::to_string(kMaxOrder) + "], got " + std::to_string(m));
}

// Shape, symmetry, zero diagonal, binary entries: what the bipolar generator
// needs. The parity construction of b is checked on top of this only where
// the ID mapping is involved; sub-pairs of a valid pair keep the original
// last parity bit and so satisfy just the structural part.
bool structurally_valid(const RmPair& pair) noexcept {
    const int m = pair.m;
    if (m < kMinOrder || m > kMaxOrder) return false;
    if (pair.p.size() != static_cast<std::size_t>(m) * m || pair.b.size() != static_cast<std::size_t>(m))
        return false;
    for (int i = 0; i < m; ++i) {
        if (pair.at(i, i) != 0) return false;
        if (pair.b[i] > 1) return false;
        for (int j = 0; j < m; ++j) {
            if (pair.at(i, j) > 1) return false;
            if (pair.at(i, j) != pair.at(j, i)) return false;
        }
    }
    return true;
}

void require_structure(const RmPair& pair) {
    if (!structurally_valid(pair))
        throw std::invalid_argument("matrix-vector pair is not symmetric binary with zero diagonal");
}

void require_valid(const RmPair& pair) {
    if (!pair_valid(pair)) throw std::invalid_argument("matrix-vector pair violates its invariants");
}

// Strict upper-triangle rows packed as bitmasks in index-bit space: bit
// (m-1-j) of row i set iff P[i][j] = 1, j > i. Lets the quadratic exponent
// reduce to one parity per row.
struct PackedPair {
    int m;
    std::uint32_t bmask = 0;
    std::uint32_t rows[kMaxOrder] = {};

    explicit PackedPair(const RmPair& pair) : m(pair.m) {
        for (int i = 0; i < m; ++i) {
            if (pair.b[i]) bmask |= 1u << (m - 1 - i);
            for (int j = i + 1; j < m; ++j)
                if (pair.at(i, j)) rows[i] |= 1u << (m - 1 - j);
        }
    }

    // Parity of b.a + sum_{i<k} P[i][k] a_i a_k for the index word a.
    int exponent_parity(std::uint32_t a) const {
        std::uint32_t x = bmask & a;
        for (int i = 0; i < m; ++i)
            if (a & (1u << (m - 1 - i))) x ^= rows[i] & a;
        return std::popcount(x) & 1;
    }
};

}  // namespace

int id_bits(int m) { return m * (m - 1) / 2; }

IdValue id_capacity(int m) {
    require_order(m);
    return IdValue{1} << id_bits(m);
}

std::string id_to_string(IdValue v) {
    if (v == 0) return "0";
    std::string s;
    while (v != 0) {
        s.insert(s.begin(), static_cast<char>('0' + static_cast<int>(v % 10)));
        v /= 10;
    }
    return s;
}

IdValue id_from_string(const std::string& s) {
    if (s.empty()) throw std::invalid_argument("empty ID string");
    IdValue v = 0;
    constexpr IdValue max = ~IdValue{0};
    for (char c : s) {
        if (c < '0' || c > '9') throw std::invalid_argument("ID string must be decimal digits");
        int d = c - '0';
        if (v > (max - d) / 10) throw std::out_of_range("ID string exceeds 128 bits");
        v = v * 10 + d;
    }
    return v;
}

bool pair_valid(const RmPair& pair) noexcept {
    if (!structurally_valid(pair)) return false;
    const int m = pair.m;
    // b_s must be the parity of layer s, and b_1 the parity of b_m..b_2.
    std::uint8_t acc = 0;
    for (int s = m; s >= 2; --s) {
        const int r = m - s;
        std::uint8_t par = 0;
        for (int j = r + 1; j < m; ++j) par ^= pair.at(r, j);
        if (pair.b[r] != par) return false;
        acc ^= par;
    }
    return pair.b[m - 1] == acc;
}

RmPair id_to_pair(const UserId& id) {
    require_order(id.m);
    const int m = id.m;
    if (id.value >= id_capacity(m)) throw std::out_of_range("user ID out of range for order");

    RmPair pair;
    pair.m = m;
    pair.p.assign(static_cast<std::size_t>(m) * m, 0);
    pair.b.assign(m, 0);

    const int nbits = id_bits(m);
    int t = 0;
    for (int i = 0; i < m; ++i) {
        for (int j = i + 1; j < m; ++j, ++t) {
            const auto bit = static_cast<std::uint8_t>((id.value >> (nbits - 1 - t)) & 1);
            pair.at(i, j) = bit;
            pair.at(j, i) = bit;
        }
    }

    std::uint8_t acc = 0;
    for (int s = m; s >= 2; --s) {
        const int r = m - s;
        std::uint8_t par = 0;
        for (int j = r + 1; j < m; ++j) par ^= pair.at(r, j);
        pair.b[r] = par;
        acc ^= par;
    }
    pair.b[m - 1] = acc;
    return pair;
}

UserId pair_to_id(const RmPair& pair) {
    require_valid(pair);
    const int m = pair.m;
    IdValue v = 0;
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) v = (v << 1) | pair.at(i, j);
    return UserId{v, m};
}

RmSequence generate_sequence(const RmPair& pair) {
    require_structure(pair);
    const PackedPair packed(pair);
    const std::uint32_t n = 1u << pair.m;
    RmSequence seq;
    seq.m = pair.m;
    seq.chips.resize(n);
    for (std::uint32_t j = 0; j < n; ++j)
        seq.chips[j] = packed.exponent_parity(j) ? -1 : 1;
    return seq;
}

std::vector<std::complex<double>> quaternary_sequence(const RmPair& pair) {
    require_structure(pair);
    const int m = pair.m;
    const std::uint32_t n = 1u << m;

    int wt = 0;
    for (auto bit : pair.b) wt += bit;
    const double sign = (wt & 1) ? -1.0 : 1.0;
    const double scale = sign / std::sqrt(static_cast<double>(n));
    static const std::complex<double> kRoots[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};

    std::vector<std::complex<double>> out(n);
    for (std::uint32_t j = 0; j < n; ++j) {
        // (2b + Pa)^T a, evaluated mod 4
        int e = 0;
        for (int i = 0; i < m; ++i) {
            const int a_i = (j >> (m - 1 - i)) & 1;
            if (!a_i) continue;
            int row = 2 * pair.b[i];
            for (int k = 0; k < m; ++k) row += pair.at(i, k) * ((j >> (m - 1 - k)) & 1);
            e += row;
        }
        out[j] = scale * kRoots[e & 3];
    }
    return out;
}

Layer extract_layer(const RmPair& pair, int s) {
    require_structure(pair);
    if (s < 2 || s > pair.m) throw std::out_of_range("layer index must be in [2, m]");
    const int r = pair.m - s;
    Layer layer;
    layer.s = s;
    layer.alpha.resize(s - 1);
    for (int j = 0; j < s - 1; ++j) layer.alpha[j] = pair.at(r, r + 1 + j);
    layer.b_s = pair.b[r];
    return layer;
}

std::vector<std::int8_t> walsh_row(const Layer& layer) {
    const int bits = layer.s - 1;
    const std::uint32_t n = 1u << bits;
    std::uint32_t amask = 0;
    for (int i = 0; i < bits; ++i)
        if (layer.alpha[i]) amask |= 1u << (bits - 1 - i);

    std::vector<std::int8_t> v(n);
    const std::uint32_t full = n - 1;
    for (std::uint32_t j = 0; j < n; ++j)
        v[j] = (std::popcount(amask & (j ^ full)) & 1) ? -1 : 1;
    return v;
}

RmSequence nested_compose(const RmSequence& half, const std::vector<std::int8_t>& v) {
    if (half.chips.size() != v.size())
        throw std::invalid_argument("sub-sequence and Walsh row lengths differ");
    RmSequence out;
    out.m = half.m + 1;
    out.chips.reserve(2 * half.chips.size());
    out.chips = half.chips;
    for (std::size_t j = 0; j < v.size(); ++j)
        out.chips.push_back(static_cast<std::int8_t>(half.chips[j] * v[j]));
    return out;
}

std::int64_t inner_product(const RmSequence& c1, const RmSequence& c2) {
    if (c1.chips.size() != c2.chips.size()) throw std::invalid_argument("sequence lengths differ");
    std::int64_t acc = 0;
    for (std::size_t j = 0; j < c1.chips.size(); ++j)
        acc += static_cast<std::int64_t>(c1.chips[j]) * c2.chips[j];
    return acc;
}

}  // namespace rmaccess

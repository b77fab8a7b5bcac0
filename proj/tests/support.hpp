// Shared test oracles, kept independent of the library's fast paths.
#pragma once

#include <bit>
#include <complex>
#include <cstdint>
#include <limits>
#include <vector>

#include "rmaccess/channel.hpp"
#include "rmaccess/rm_core.hpp"
#include "rmaccess/transform.hpp"

namespace testsupport {

using rmaccess::CVec;

// Direct double loop over the kernel t_{i,j} = (-1)^(a_i . ~a_j).
inline CVec naive_flipped_transform(const CVec& x) {
    const std::size_t n = x.size();
    const int bits = std::bit_width(n) - 1;
    const std::uint32_t full = static_cast<std::uint32_t>(n - 1);
    CVec out(n, {0.0, 0.0});
    for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j) {
            const int par = std::popcount(i & (j ^ full)) & 1;
            out[i] += par ? -x[j] : x[j];
        }
    (void)bits;
    return out;
}

// Rank over GF(2) by elimination on packed rows.
inline int gf2_rank(std::vector<std::uint32_t> rows) {
    int rank = 0;
    for (int bit = 31; bit >= 0; --bit) {
        std::size_t piv = rows.size();
        for (std::size_t i = rank; i < rows.size(); ++i)
            if (rows[i] & (1u << bit)) {
                piv = i;
                break;
            }
        if (piv == rows.size()) continue;
        std::swap(rows[piv], rows[static_cast<std::size_t>(rank)]);
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (i != static_cast<std::size_t>(rank) && (rows[i] & (1u << bit)))
                rows[i] ^= rows[static_cast<std::size_t>(rank)];
        ++rank;
    }
    return rank;
}

inline int pair_difference_rank(const rmaccess::RmPair& a, const rmaccess::RmPair& b) {
    std::vector<std::uint32_t> rows(a.m, 0);
    for (int i = 0; i < a.m; ++i)
        for (int j = 0; j < a.m; ++j)
            if (a.at(i, j) != b.at(i, j)) rows[i] |= 1u << j;
    return gf2_rank(rows);
}

// Trailing principal submatrix of order s with the matching tail of b.
inline rmaccess::RmPair sub_pair(const rmaccess::RmPair& pair, int s) {
    rmaccess::RmPair sub;
    sub.m = s;
    sub.p.assign(static_cast<std::size_t>(s) * s, 0);
    sub.b.assign(s, 0);
    const int r = pair.m - s;
    for (int i = 0; i < s; ++i) {
        sub.b[i] = pair.b[r + i];
        for (int j = 0; j < s; ++j) sub.at(i, j) = pair.at(r + i, r + j);
    }
    return sub;
}

inline CVec scaled_sequence(const rmaccess::RmPair& pair, std::complex<double> h) {
    const auto seq = rmaccess::generate_sequence(pair);
    CVec y(seq.chips.size());
    for (std::size_t j = 0; j < y.size(); ++j) y[j] = h * static_cast<double>(seq.chips[j]);
    return y;
}

inline void add_noise(CVec& y, rmaccess::Rng& rng, double n0) {
    for (auto& v : y) v += rng.complex_normal(n0);
}

struct MlseDecision {
    rmaccess::IdValue id = 0;
    std::complex<double> h_hat{0.0, 0.0};
    double residual = 0.0;
    bool tie = false;  // runner-up within 1e-9 relative of the winner
};

// Exhaustive minimum-residual search with the per-candidate scalar LS fit
// h = <c, y> / 2^m, so the metric is ||y||^2 - |<c, y>|^2 / 2^m.
inline MlseDecision mlse_oracle(const CVec& y, int m) {
    const double n = static_cast<double>(y.size());
    double energy = 0.0;
    for (const auto& v : y) energy += std::norm(v);

    MlseDecision best;
    double best_r = std::numeric_limits<double>::infinity();
    double second_r = std::numeric_limits<double>::infinity();
    for (rmaccess::IdValue d = 0; d < rmaccess::id_capacity(m); ++d) {
        const auto seq = rmaccess::generate_sequence(rmaccess::id_to_pair({d, m}));
        std::complex<double> corr{0.0, 0.0};
        for (std::size_t j = 0; j < y.size(); ++j)
            corr += static_cast<double>(seq.chips[j]) * y[j];
        const double residual = energy - std::norm(corr) / n;
        if (residual < best_r) {
            second_r = best_r;
            best_r = residual;
            best.id = d;
            best.h_hat = corr / n;
            best.residual = residual;
        } else if (residual < second_r) {
            second_r = residual;
        }
    }
    best.tie = second_r - best_r <= 1e-9 * std::max(1.0, std::abs(best_r));
    return best;
}

}  // namespace testsupport

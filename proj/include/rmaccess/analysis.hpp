#pragma once

#include <cstdint>
#include <vector>

namespace rmaccess {

struct BoundInputs {
    int m = 2;
    int s = 2;          // 2 <= s <= m
    double h_mag2 = 1;  // |h|^2
    double n0 = 1;
};

// Union-bound probability that layer s is recovered correctly given all
// layers above it were:
//   max{0, 1 - (2^(s-1)-1) Phi(-2^(s-1)|h|^2 / sqrt(2^(s-1) sigma^2))}
// with sigma^2 = 2|h|^2 N0/2^(m-s) + (N0/2^(m-s))^2, the variance of the
// conjugate-multiplied noise at that depth.
double layer_success_bound(const BoundInputs& in);

// Product of layer_success_bound over s = m..2: a lower bound on the
// whole-sequence success probability of the greedy detector.
double sequence_success_bound(int m, double h_mag2, double n0);

// Two-user SINR after descending to layer s: 2^(m-s) |h1|^2 / (|h2|^2 + N0).
// Doubles for each layer descended.
double sinr_layer(int s, int m, double h1_mag2, double h2_mag2, double n0);

// Multiplication count of the greedy detector: (m+1) 2^m.
std::uint64_t multiplication_count_lld(int m);

// Multiplication count of the list detector with per-layer widths
// [L_m, ..., L_{m-F+1}], evaluated term by term:
//   (m+2) 2^(m-1)
//   + sum_{s1=m-F+1}^{m} (prod_{s2=s1}^{m} L_{s2}) (s1+1) 2^(s1-2)
//   + (prod_{s1=m-F+1}^{m} L_{s1}) sum_{s2=4}^{m-F} (s2+1) 2^(s2-2).
std::uint64_t multiplication_count_list(const std::vector<int>& widths, int m);

}  // namespace rmaccess

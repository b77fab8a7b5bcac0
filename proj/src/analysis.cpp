#include "rmaccess/analysis.hpp"

#include <cmath>
#include <stdexcept>

namespace rmaccess {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

double layer_success_bound(const BoundInputs& in) {
    if (in.s < 2 || in.s > in.m) throw std::invalid_argument("layer index must be in [2, m]");
    if (!(in.h_mag2 > 0) || !(in.n0 > 0))
        throw std::invalid_argument("|h|^2 and N0 must be positive");

    const double n_eff = in.n0 / std::ldexp(1.0, in.m - in.s);
    const double sigma2 = 2.0 * in.h_mag2 * n_eff + n_eff * n_eff;
    const double half = std::ldexp(1.0, in.s - 1);
    const double phi = normal_cdf(-half * in.h_mag2 / std::sqrt(half * sigma2));
    return std::max(0.0, 1.0 - (half - 1.0) * phi);
}

double sequence_success_bound(int m, double h_mag2, double n0) {
    double p = 1.0;
    for (int s = m; s >= 2; --s) p *= layer_success_bound({m, s, h_mag2, n0});
    return p;
}

double sinr_layer(int s, int m, double h1_mag2, double h2_mag2, double n0) {
    if (s < 1 || s > m) throw std::invalid_argument("layer index must be in [1, m]");
    return std::ldexp(h1_mag2, m - s) / (h2_mag2 + n0);
}

std::uint64_t multiplication_count_lld(int m) {
    return static_cast<std::uint64_t>(m + 1) << m;
}

std::uint64_t multiplication_count_list(const std::vector<int>& widths, int m) {
    const int f = static_cast<int>(widths.size());
    if (f < 1 || f > m - 1) throw std::invalid_argument("list depth must be in [1, m-1]");
    for (int w : widths)
        if (w < 1) throw std::invalid_argument("list widths must be >= 1");

    const auto width_at = [&](int s) { return static_cast<std::uint64_t>(widths[m - s]); };

    std::uint64_t total = static_cast<std::uint64_t>(m + 2) << (m - 1);
    for (int s1 = m - f + 1; s1 <= m; ++s1) {
        std::uint64_t prod = 1;
        for (int s2 = s1; s2 <= m; ++s2) prod *= width_at(s2);
        total += prod * static_cast<std::uint64_t>(s1 + 1) << (s1 - 2);
    }
    std::uint64_t all_paths = 1;
    for (int s1 = m - f + 1; s1 <= m; ++s1) all_paths *= width_at(s1);
    std::uint64_t tail = 0;
    for (int s2 = 4; s2 <= m - f; ++s2)
        tail += static_cast<std::uint64_t>(s2 + 1) << (s2 - 2);
    return total + all_paths * tail;
}

}  // namespace rmaccess

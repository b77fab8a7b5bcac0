#include "rmaccess/channel.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <stdexcept>

namespace rmaccess {

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

constexpr std::uint64_t kTagIds = 0x1d5;
constexpr std::uint64_t kTagChannels = 0x2c8;
constexpr std::uint64_t kTagNoise = 0x3e1;

IdValue draw_id(Rng& rng, int m) {
    const int bits = id_bits(m);
    IdValue v = rng.next();
    if (bits > 64) v |= IdValue{rng.next()} << 64;
    return v & (id_capacity(m) - 1);
}

}  // namespace

std::uint64_t substream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
    return mix64(seed ^ mix64(tag ^ mix64(index)));
}

std::complex<double> Rng::complex_normal(double variance) {
    // Polar form: |z|^2 exponential with mean `variance`, phase uniform.
    const double r = std::sqrt(-variance * std::log1p(-uniform()));
    const double th = 2.0 * std::numbers::pi * uniform();
    return {r * std::cos(th), r * std::sin(th)};
}

double snr_to_n0(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

Scenario make_scenario(int m, int k, double n0, std::uint64_t seed, ChannelModel model) {
    if (k < 0) throw std::invalid_argument("active user count must be >= 0");
    if (!(n0 > 0)) throw std::invalid_argument("noise variance must be positive");
    id_capacity(m);  // validates the order

    Scenario sc;
    sc.m = m;
    sc.n0 = n0;
    sc.seed = seed;

    Rng id_rng(substream(seed, kTagIds));
    std::set<IdValue> seen;
    while (static_cast<int>(sc.ids.size()) < k) {
        const IdValue v = draw_id(id_rng, m);
        if (seen.insert(v).second) sc.ids.push_back(UserId{v, m});
    }

    Rng h_rng(substream(seed, kTagChannels));
    sc.h.reserve(k);
    for (int i = 0; i < k; ++i) {
        if (model == ChannelModel::rayleigh) {
            sc.h.push_back(h_rng.complex_normal(1.0));
        } else {
            const double th = 2.0 * std::numbers::pi * h_rng.uniform();
            sc.h.emplace_back(std::cos(th), std::sin(th));
        }
    }
    return sc;
}

CVec synthesize(const Scenario& sc) {
    if (!(sc.n0 > 0)) throw std::invalid_argument("noise variance must be positive");
    if (sc.ids.size() != sc.h.size())
        throw std::invalid_argument("one channel coefficient per active user required");
    {
        std::set<IdValue> seen;
        for (const UserId& id : sc.ids)
            if (id.m != sc.m || !seen.insert(id.value).second)
                throw std::invalid_argument("active IDs must be distinct and of the scenario order");
    }

    const std::size_t n = std::size_t{1} << sc.m;
    CVec y(n, {0.0, 0.0});
    for (std::size_t k = 0; k < sc.ids.size(); ++k) {
        const RmSequence seq = generate_sequence(id_to_pair(sc.ids[k]));
        for (std::size_t j = 0; j < n; ++j) y[j] += sc.h[k] * static_cast<double>(seq.chips[j]);
    }

    Rng noise(substream(sc.seed, kTagNoise));
    for (std::size_t j = 0; j < n; ++j) y[j] += noise.complex_normal(sc.n0);
    return y;
}

}  // namespace rmaccess

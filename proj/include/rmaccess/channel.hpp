#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

#include "rmaccess/rm_core.hpp"
#include "rmaccess/transform.hpp"

namespace rmaccess {

// Deterministic stream splitting: runs that share a seed agree exactly no
// matter how trials are scheduled across threads.
std::uint64_t substream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index = 0);

// Random draws with an explicit bit-to-double mapping so the produced values
// depend only on the engine output, not on library internals.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    // Circularly symmetric complex Gaussian with E|z|^2 = variance.
    std::complex<double> complex_normal(double variance);

private:
    std::mt19937_64 eng_;
};

enum class ChannelModel {
    rayleigh,        // h ~ CN(0,1)
    unit_magnitude,  // |h| = 1, uniform phase
};

struct Scenario {
    int m = kMinOrder;
    std::vector<UserId> ids;              // K distinct active IDs
    std::vector<std::complex<double>> h;  // matching channel coefficients
    double n0 = 1.0;                      // complex noise variance, > 0
    std::uint64_t seed = 0;
};

// N0 = 10^(-snr_db/10). With E|h|^2 = 1 and unit-magnitude chips the
// per-user average receive SNR per sample is 1/N0.
double snr_to_n0(double snr_db);

// Draws K distinct IDs and K channel coefficients from substreams of seed.
Scenario make_scenario(int m, int k, double n0, std::uint64_t seed,
                       ChannelModel model = ChannelModel::rayleigh);

// y_j = sum_k h_k c_{k,j} + e_j with e_j i.i.d. CN(0, n0). Fully determined
// by the scenario seed; the noise stream does not depend on K.
CVec synthesize(const Scenario& sc);

}  // namespace rmaccess

#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <vector>

#include "rmaccess/rm_core.hpp"
#include "rmaccess/transform.hpp"

namespace rmaccess {

// Multiplication-equivalent operation counts, split between the detection
// pipeline itself and residual-energy validation. The transform contributes
// s*2^s per call, elementwise products and scalings one per element.
struct OpCount {
    std::uint64_t pipeline = 0;
    std::uint64_t validation = 0;

    std::uint64_t total() const { return pipeline + validation; }
};

struct DetectionResult {
    RmPair pair;
    UserId id;
    std::complex<double> h_hat{0.0, 0.0};
    double residual = 0.0;
};

// Per-layer list widths, highest layer first: widths[0] applies at layer m,
// widths[1] at layer m-1, ... Below the listed depth the search is greedy.
struct ListParams {
    std::vector<int> widths{1};

    int depth() const { return static_cast<int>(widths.size()); }
};

void validate_list_params(const ListParams& params, int m);

struct LayerDecision {
    Layer layer;
    CVec reduced;  // half length
};

// Elementwise product of the first half with the conjugated second half.
CVec conj_multiply_halves(const CVec& y, OpCount* ops = nullptr);

// (y' + v .* y'') / 2, the half-length signal carried to the next layer.
CVec combine_halves(const CVec& y, std::span<const std::int8_t> v, OpCount* ops = nullptr);

// One recovery step on a length-2^s signal, s >= 2: conjugate-multiply the
// halves, transform, take the argmax of the real parts (ties resolve to the
// lowest index), rebuild the Walsh row and fold the signal in half.
LayerDecision detect_layer(const CVec& y, OpCount* ops = nullptr);

// h_hat = (y[0] + (-1)^b1 * y[1]) / 2 on the final length-2 signal.
std::complex<double> estimate_channel(const CVec& y1, int b1_hat, OpCount* ops = nullptr);

// ||y - h_hat * c(pair)||^2.
double residual_energy(const CVec& y, std::complex<double> h_hat, const RmPair& pair,
                       OpCount* ops = nullptr);

// Greedy layer-by-layer recovery of a single sequence plus the direct channel
// estimate. Always returns a hypothesis; the residual tells how well it fits.
DetectionResult detect_single(const CVec& y, OpCount* ops = nullptr);

// Breadth-first variant keeping widths[f] candidate positions per surviving
// path for the first depth() layers, greedy below. Of the prod(widths) full
// paths the one with minimum residual energy wins (ties resolve to the
// earlier path). widths == {1} reproduces detect_single exactly.
DetectionResult detect_list(const CVec& y, const ListParams& params, OpCount* ops = nullptr);

}  // namespace rmaccess

#include "rmaccess/detect.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace rmaccess {

namespace {

int order_of(std::size_t n) {
    if (n < 4 || !std::has_single_bit(n))
        throw std::invalid_argument("signal length must be a power of two >= 4");
    return std::bit_width(n) - 1;
}

Layer layer_from_index(int s, std::uint32_t w) {
    Layer layer;
    layer.s = s;
    layer.alpha.resize(s - 1);
    std::uint8_t par = 0;
    for (int i = 0; i < s - 1; ++i) {
        layer.alpha[i] = static_cast<std::uint8_t>((w >> (s - 2 - i)) & 1);
        par ^= layer.alpha[i];
    }
    layer.b_s = par;
    return layer;
}

// Peak positions ordered by decreasing real part, lowest index first on ties.
std::vector<std::uint32_t> top_indices_by_real(const CVec& v, int k) {
    std::vector<std::uint32_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0u);
    const auto better = [&](std::uint32_t a, std::uint32_t b) {
        if (v[a].real() != v[b].real()) return v[a].real() > v[b].real();
        return a < b;
    };
    std::partial_sort(idx.begin(), idx.begin() + k, idx.end(), better);
    idx.resize(k);
    return idx;
}

// Layer decisions accumulated along one path, highest layer first.
RmPair assemble_pair(int m, const std::vector<Layer>& layers, std::uint8_t b1) {
    RmPair pair;
    pair.m = m;
    pair.p.assign(static_cast<std::size_t>(m) * m, 0);
    pair.b.assign(m, 0);
    for (const Layer& layer : layers) {
        const int r = m - layer.s;
        for (int j = 0; j < layer.s - 1; ++j) {
            pair.at(r, r + 1 + j) = layer.alpha[j];
            pair.at(r + 1 + j, r) = layer.alpha[j];
        }
        pair.b[r] = layer.b_s;
    }
    pair.b[m - 1] = b1;
    return pair;
}

DetectionResult finalize_path(const CVec& y, int m, const std::vector<Layer>& layers,
                              const CVec& y1, OpCount* ops) {
    std::uint8_t b1 = 0;
    for (const Layer& layer : layers) b1 ^= layer.b_s;

    DetectionResult res;
    res.h_hat = estimate_channel(y1, b1, ops);
    res.pair = assemble_pair(m, layers, b1);
    res.id = pair_to_id(res.pair);
    res.residual = residual_energy(y, res.h_hat, res.pair, ops);
    return res;
}

}  // namespace

void validate_list_params(const ListParams& params, int m) {
    const int f = params.depth();
    if (f < 1 || f > m - 1) throw std::invalid_argument("list depth must be in [1, m-1]");
    for (int i = 0; i < f; ++i) {
        const int s = m - i;
        if (params.widths[i] < 1 || params.widths[i] > (1 << (s - 1)))
            throw std::invalid_argument("list width at layer " + std::to_string(s) +
                                        " must be in [1, 2^(s-1)]");
    }
}

CVec conj_multiply_halves(const CVec& y, OpCount* ops) {
    const std::size_t n = y.size();
    order_of(n);
    const std::size_t half = n / 2;
    CVec out(half);
    for (std::size_t j = 0; j < half; ++j) out[j] = y[j] * std::conj(y[j + half]);
    if (ops) ops->pipeline += half;
    return out;
}

CVec combine_halves(const CVec& y, std::span<const std::int8_t> v, OpCount* ops) {
    const std::size_t half = y.size() / 2;
    if (v.size() != half || y.size() != 2 * half)
        throw std::invalid_argument("Walsh row length must be half the signal length");
    CVec out(half);
    for (std::size_t j = 0; j < half; ++j)
        out[j] = 0.5 * (y[j] + static_cast<double>(v[j]) * y[j + half]);
    if (ops) ops->pipeline += 2 * half;  // one sign application and one scaling per element
    return out;
}

LayerDecision detect_layer(const CVec& y, OpCount* ops) {
    const int s = order_of(y.size());
    auto v_hat = fwht_flipped(conj_multiply_halves(y, ops), ops ? &ops->pipeline : nullptr);
    const auto w = top_indices_by_real(v_hat, 1)[0];

    LayerDecision dec;
    dec.layer = layer_from_index(s, w);
    dec.reduced = combine_halves(y, walsh_row(dec.layer), ops);
    return dec;
}

std::complex<double> estimate_channel(const CVec& y1, int b1_hat, OpCount* ops) {
    if (y1.size() != 2) throw std::invalid_argument("channel estimate needs a length-2 signal");
    const double sign = (b1_hat & 1) ? -1.0 : 1.0;
    if (ops) ops->pipeline += 2;
    return 0.5 * (y1[0] + sign * y1[1]);
}

double residual_energy(const CVec& y, std::complex<double> h_hat, const RmPair& pair,
                       OpCount* ops) {
    const RmSequence seq = generate_sequence(pair);
    if (seq.chips.size() != y.size())
        throw std::invalid_argument("signal length does not match the pair's order");
    double acc = 0.0;
    for (std::size_t j = 0; j < y.size(); ++j)
        acc += std::norm(y[j] - h_hat * static_cast<double>(seq.chips[j]));
    if (ops) ops->validation += 2 * y.size();
    return acc;
}

DetectionResult detect_single(const CVec& y, OpCount* ops) {
    const int m = order_of(y.size());
    std::vector<Layer> layers;
    layers.reserve(m - 1);
    CVec cur = y;
    for (int s = m; s >= 2; --s) {
        LayerDecision dec = detect_layer(cur, ops);
        layers.push_back(std::move(dec.layer));
        cur = std::move(dec.reduced);
    }
    return finalize_path(y, m, layers, cur, ops);
}

DetectionResult detect_list(const CVec& y, const ListParams& params, OpCount* ops) {
    const int m = order_of(y.size());
    validate_list_params(params, m);

    struct Path {
        CVec y;
        std::vector<Layer> layers;
    };
    std::vector<Path> paths;
    paths.push_back({y, {}});

    for (int s = m; s >= 2; --s) {
        const int f = m - s;
        const int width = f < params.depth() ? params.widths[f] : 1;
        std::vector<Path> next;
        next.reserve(paths.size() * width);
        for (Path& path : paths) {
            auto v_hat =
                fwht_flipped(conj_multiply_halves(path.y, ops), ops ? &ops->pipeline : nullptr);
            for (auto w : top_indices_by_real(v_hat, width)) {
                Path child;
                child.layers = path.layers;
                child.layers.push_back(layer_from_index(s, w));
                child.y = combine_halves(path.y, walsh_row(child.layers.back()), ops);
                next.push_back(std::move(child));
            }
        }
        paths = std::move(next);
    }

    DetectionResult best;
    bool have = false;
    for (const Path& path : paths) {
        DetectionResult cand = finalize_path(y, m, path.layers, path.y, ops);
        if (!have || cand.residual < best.residual) {
            best = std::move(cand);
            have = true;
        }
    }
    return best;
}

}  // namespace rmaccess

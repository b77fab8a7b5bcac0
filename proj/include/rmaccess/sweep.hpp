#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rmaccess/channel.hpp"
#include "rmaccess/detect.hpp"

namespace rmaccess {

enum class Algorithm { lld, list, iterative, sic };

std::string algorithm_name(Algorithm a);
Algorithm algorithm_from_name(const std::string& name);

struct SweepConfig {
    int m = 8;
    std::vector<double> snr_db{0.0};
    std::vector<int> users{1};  // K grid
    int trials = 1000;
    Algorithm algo = Algorithm::lld;
    std::vector<int> list_widths{1};
    int n_max = 5;
    int k_max = 0;  // 0 = automatic (K + 2) for the multi-user algorithms
    double prune_tau = 3.0;
    ChannelModel channel = ChannelModel::rayleigh;
    std::uint64_t seed = 1;
    std::string out;  // empty = stdout
};

// Throws std::invalid_argument with a message on any violated constraint.
void validate(const SweepConfig& cfg);

struct MetricsRow {
    int m = 0;
    double snr_db = 0;
    int k = 0;
    Algorithm algo = Algorithm::lld;
    std::vector<int> list_widths;
    int n_max = 0;
    int k_max = 0;
    std::uint64_t seed = 0;
    int trials = 0;
    double success_prob = 0;   // detected true users / true users; NaN when K = 0
    double channel_mse = 0;    // over successfully detected users; NaN when none
    double far = 0;            // reported-but-inactive users / (C - K), per trial
    double mean_iterations = 0;
    double mean_mult_count = 0;
    double bound_value = 0;    // unit-channel success bound; NaN unless K = 1
};

// One row per (snr, K) grid point, snr outer. Trials run on a worker pool
// capped by the RM_ACCESS_THREADS environment variable; every trial draws its
// own substream of cfg.seed, so the output is byte-identical however the
// work is scheduled.
std::vector<MetricsRow> run_sweep(const SweepConfig& cfg);

// Header plus one comma-separated line per row, floats with 6 significant
// digits, locale-independent, newline-terminated.
std::string to_csv(const std::vector<MetricsRow>& rows);
void emit_csv(const std::vector<MetricsRow>& rows, const std::string& path);

// "lo:hi:step" (inclusive) or a comma-separated list.
std::vector<double> parse_snr_spec(const std::string& spec);
std::vector<int> parse_int_list(const std::string& spec);

// Flat "key = value" file; unknown keys are an error. Keys match the CLI
// flag names: m, snr, users, trials, algo, list, iters, kmax, prune-tau,
// channel, seed, out.
void apply_config_file(SweepConfig& cfg, const std::string& path);

}  // namespace rmaccess

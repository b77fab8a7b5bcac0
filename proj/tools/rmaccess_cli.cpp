// Monte-Carlo sweep driver: runs the configured detector over an SNR x K
// grid and writes one CSV row of aggregate metrics per grid point.

#include <cstdint>
#include <exception>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "rmaccess/sweep.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Monte-Carlo harness for sequence-based random access detection"};

    int m = 0, trials = 0, iters = 0, kmax = 0;
    double prune_tau = 0;
    std::uint64_t seed = 0;
    std::string snr_spec, users_spec, list_spec, algo_name, channel_name, config_path, out_path;

    app.add_option("--m", m, "Sequence order (length 2^m)");
    app.add_option("--snr", snr_spec, "SNR grid in dB: lo:hi:step or comma list");
    app.add_option("--users", users_spec, "Active user counts, comma list");
    app.add_option("--trials", trials, "Trials per grid point");
    app.add_option("--algo", algo_name, "Detector: lld, list, iterative or sic");
    app.add_option("--list", list_spec, "List widths per layer, highest first");
    app.add_option("--iters", iters, "Max iterations of the iterative detector");
    app.add_option("--kmax", kmax, "Detection slots (0 = K + 2)");
    app.add_option("--prune-tau", prune_tau, "Active-user declaration threshold");
    app.add_option("--channel", channel_name, "Channel model: rayleigh or unit");
    app.add_option("--seed", seed, "RNG seed");
    app.add_option("--out", out_path, "Output CSV path (default: stdout)");
    app.add_option("--config", config_path, "Config file (key = value); flags override");

    CLI11_PARSE(app, argc, argv);

    try {
        rmaccess::SweepConfig cfg;
        if (!config_path.empty()) rmaccess::apply_config_file(cfg, config_path);

        if (app.count("--m")) cfg.m = m;
        if (app.count("--snr")) cfg.snr_db = rmaccess::parse_snr_spec(snr_spec);
        if (app.count("--users")) cfg.users = rmaccess::parse_int_list(users_spec);
        if (app.count("--trials")) cfg.trials = trials;
        if (app.count("--algo")) cfg.algo = rmaccess::algorithm_from_name(algo_name);
        if (app.count("--list")) cfg.list_widths = rmaccess::parse_int_list(list_spec);
        if (app.count("--iters")) cfg.n_max = iters;
        if (app.count("--kmax")) cfg.k_max = kmax;
        if (app.count("--prune-tau")) cfg.prune_tau = prune_tau;
        if (app.count("--channel")) {
            if (channel_name == "rayleigh") cfg.channel = rmaccess::ChannelModel::rayleigh;
            else if (channel_name == "unit") cfg.channel = rmaccess::ChannelModel::unit_magnitude;
            else throw std::invalid_argument("channel must be rayleigh or unit");
        }
        if (app.count("--seed")) cfg.seed = seed;
        if (app.count("--out")) cfg.out = out_path;

        const auto rows = rmaccess::run_sweep(cfg);
        if (cfg.out.empty())
            std::cout << rmaccess::to_csv(rows);
        else
            rmaccess::emit_csv(rows, cfg.out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

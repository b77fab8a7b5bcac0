#include "rmaccess/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "rmaccess/analysis.hpp"
#include "rmaccess/multiuser.hpp"

namespace rmaccess {

namespace {

constexpr std::uint64_t kTagGrid = 0x6721;
constexpr std::uint64_t kTagTrial = 0x77a3;

struct TrialOutcome {
    int true_users = 0;
    int detected_true = 0;
    int false_alarms = 0;
    double sqerr_sum = 0.0;  // over correctly detected users
    int iterations = 0;
    std::uint64_t mults = 0;
};

int worker_count() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("RM_ACCESS_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
    }
    return static_cast<int>(n);
}

TrialOutcome run_trial(const SweepConfig& cfg, int k, double n0, std::uint64_t trial_seed) {
    const Scenario sc = make_scenario(cfg.m, k, n0, trial_seed, cfg.channel);
    const CVec y = synthesize(sc);

    OpCount ops;
    std::vector<UserId> reported;
    std::vector<std::complex<double>> h_hats;
    int iterations = 1;

    switch (cfg.algo) {
        case Algorithm::lld: {
            const DetectionResult d = detect_single(y, &ops);
            reported.push_back(d.id);
            h_hats.push_back(d.h_hat);
            break;
        }
        case Algorithm::list: {
            const DetectionResult d = detect_list(y, ListParams{cfg.list_widths}, &ops);
            reported.push_back(d.id);
            h_hats.push_back(d.h_hat);
            break;
        }
        case Algorithm::iterative:
        case Algorithm::sic: {
            MultiUserOptions opt;
            opt.k_max = cfg.k_max > 0 ? cfg.k_max : std::max(1, k + 2);
            opt.n_max = cfg.n_max;
            opt.list = ListParams{cfg.list_widths};
            opt.prune_tau = cfg.prune_tau;
            const ActiveSetReport rep = cfg.algo == Algorithm::iterative
                                            ? detect_iterative(y, opt, &ops)
                                            : detect_sic(y, opt, &ops);
            reported = rep.ids;
            h_hats = rep.h_hats;
            iterations = rep.iterations_used;
            break;
        }
    }

    TrialOutcome out;
    out.true_users = k;
    out.iterations = iterations;
    out.mults = ops.total();
    for (std::size_t r = 0; r < reported.size(); ++r) {
        bool matched = false;
        for (std::size_t u = 0; u < sc.ids.size(); ++u) {
            if (reported[r].value == sc.ids[u].value) {
                matched = true;
                ++out.detected_true;
                out.sqerr_sum += std::norm(h_hats[r] - sc.h[u]);
                break;
            }
        }
        if (!matched) ++out.false_alarms;
    }
    return out;
}

void append_field(std::string& line, double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 6);
    line.append(buf, res.ptr);
}

std::string widths_field(const std::vector<int>& widths) {
    std::string s;
    for (std::size_t i = 0; i < widths.size(); ++i) {
        if (i) s.push_back(';');
        s += std::to_string(widths[i]);
    }
    return s;
}

}  // namespace

std::string algorithm_name(Algorithm a) {
    switch (a) {
        case Algorithm::lld: return "lld";
        case Algorithm::list: return "list";
        case Algorithm::iterative: return "iterative";
        case Algorithm::sic: return "sic";
    }
    return "?";
}

Algorithm algorithm_from_name(const std::string& name) {
    if (name == "lld") return Algorithm::lld;
    if (name == "list") return Algorithm::list;
    if (name == "iterative") return Algorithm::iterative;
    if (name == "sic") return Algorithm::sic;
    throw std::invalid_argument("unknown algorithm '" + name +
                                "' (expected lld, list, iterative or sic)");
}

void validate(const SweepConfig& cfg) {
    if (cfg.m < kMinOrder || cfg.m > kMaxOrder) throw std::invalid_argument("m out of range");
    if (cfg.trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (cfg.snr_db.empty()) throw std::invalid_argument("SNR grid is empty");
    if (cfg.users.empty()) throw std::invalid_argument("user grid is empty");
    for (int k : cfg.users)
        if (k < 0 || IdValue(k) > id_capacity(cfg.m))
            throw std::invalid_argument("user count out of range");
    if (cfg.n_max < 1) throw std::invalid_argument("iters must be >= 1");
    if (cfg.k_max < 0) throw std::invalid_argument("kmax must be >= 0");
    if (!(cfg.prune_tau >= 0)) throw std::invalid_argument("prune-tau must be >= 0");
    validate_list_params(ListParams{cfg.list_widths}, cfg.m);
}

std::vector<MetricsRow> run_sweep(const SweepConfig& cfg) {
    validate(cfg);
    const int threads = worker_count();
    std::vector<MetricsRow> rows;
    rows.reserve(cfg.snr_db.size() * cfg.users.size());

    std::uint64_t grid_index = 0;
    for (double snr : cfg.snr_db) {
        const double n0 = snr_to_n0(snr);
        for (int k : cfg.users) {
            const std::uint64_t grid_seed = substream(cfg.seed, kTagGrid, grid_index++);
            std::vector<TrialOutcome> outcomes(cfg.trials);

            std::atomic<int> next{0};
            auto work = [&] {
                for (int t = next.fetch_add(1); t < cfg.trials; t = next.fetch_add(1))
                    outcomes[t] = run_trial(cfg, k, n0, substream(grid_seed, kTagTrial, t));
            };
            if (threads <= 1 || cfg.trials == 1) {
                work();
            } else {
                std::vector<std::thread> pool;
                const int nw = std::min(threads, cfg.trials);
                pool.reserve(nw);
                for (int w = 0; w < nw; ++w) pool.emplace_back(work);
                for (auto& th : pool) th.join();
            }

            // Sequential fold in trial order keeps the output byte-stable.
            std::int64_t users_total = 0, detected = 0, fas = 0;
            double sqerr = 0.0, iters = 0.0, mults = 0.0;
            for (const TrialOutcome& o : outcomes) {
                users_total += o.true_users;
                detected += o.detected_true;
                fas += o.false_alarms;
                sqerr += o.sqerr_sum;
                iters += o.iterations;
                mults += static_cast<double>(o.mults);
            }

            const double nan = std::numeric_limits<double>::quiet_NaN();
            const double inactive = std::ldexp(1.0, id_bits(cfg.m)) - k;

            MetricsRow row;
            row.m = cfg.m;
            row.snr_db = snr;
            row.k = k;
            row.algo = cfg.algo;
            row.list_widths = cfg.list_widths;
            row.n_max = cfg.n_max;
            row.k_max = cfg.k_max > 0 ? cfg.k_max
                        : (cfg.algo == Algorithm::iterative || cfg.algo == Algorithm::sic)
                            ? std::max(1, k + 2)
                            : 1;
            row.seed = cfg.seed;
            row.trials = cfg.trials;
            row.success_prob = users_total > 0
                                   ? static_cast<double>(detected) / static_cast<double>(users_total)
                                   : nan;
            row.channel_mse = detected > 0 ? sqerr / static_cast<double>(detected) : nan;
            row.far = static_cast<double>(fas) / (inactive * cfg.trials);
            row.mean_iterations = iters / cfg.trials;
            row.mean_mult_count = mults / cfg.trials;
            row.bound_value = k == 1 ? sequence_success_bound(cfg.m, 1.0, n0) : nan;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::string to_csv(const std::vector<MetricsRow>& rows) {
    std::string out =
        "m,snr_db,K,algorithm,L,n_max,k_max,seed,trials,success_prob,channel_mse,far,"
        "mean_iterations,mean_mult_count,bound_value\n";
    for (const MetricsRow& r : rows) {
        std::string line = std::to_string(r.m);
        line.push_back(',');
        append_field(line, r.snr_db);
        line.push_back(',');
        line += std::to_string(r.k);
        line.push_back(',');
        line += algorithm_name(r.algo);
        line.push_back(',');
        line += widths_field(r.list_widths);
        line.push_back(',');
        line += std::to_string(r.n_max);
        line.push_back(',');
        line += std::to_string(r.k_max);
        line.push_back(',');
        line += std::to_string(r.seed);
        line.push_back(',');
        line += std::to_string(r.trials);
        for (double v : {r.success_prob, r.channel_mse, r.far, r.mean_iterations,
                         r.mean_mult_count, r.bound_value}) {
            line.push_back(',');
            append_field(line, v);
        }
        line.push_back('\n');
        out += line;
    }
    return out;
}

void emit_csv(const std::vector<MetricsRow>& rows, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open output file: " + path);
    f << to_csv(rows);
    if (!f) throw std::runtime_error("write failed: " + path);
}

std::vector<double> parse_snr_spec(const std::string& spec) {
    std::vector<double> out;
    const auto to_double = [](const std::string& s) {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("bad number in SNR spec: '" + s + "'");
        return v;
    };
    if (spec.find(':') != std::string::npos) {
        std::stringstream ss(spec);
        std::string lo, hi, step;
        if (!std::getline(ss, lo, ':') || !std::getline(ss, hi, ':') || !std::getline(ss, step))
            throw std::invalid_argument("SNR range must be lo:hi:step");
        const double a = to_double(lo), b = to_double(hi), d = to_double(step);
        if (!(d > 0)) throw std::invalid_argument("SNR step must be positive");
        for (double v = a; v <= b + 1e-9; v += d) out.push_back(v);
    } else {
        std::stringstream ss(spec);
        std::string tok;
        while (std::getline(ss, tok, ',')) out.push_back(to_double(tok));
    }
    if (out.empty()) throw std::invalid_argument("empty SNR spec");
    return out;
}

std::vector<int> parse_int_list(const std::string& spec) {
    std::vector<int> out;
    std::stringstream ss(spec);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        std::size_t pos = 0;
        const int v = std::stoi(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument("bad integer in list: '" + tok + "'");
        out.push_back(v);
    }
    if (out.empty()) throw std::invalid_argument("empty integer list");
    return out;
}

void apply_config_file(SweepConfig& cfg, const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config file: " + path);

    const auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };

    std::string line;
    int lineno = 0;
    while (std::getline(f, line)) {
        ++lineno;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                        ": expected 'key = value'");
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));

        if (key == "m") cfg.m = std::stoi(value);
        else if (key == "snr") cfg.snr_db = parse_snr_spec(value);
        else if (key == "users") cfg.users = parse_int_list(value);
        else if (key == "trials") cfg.trials = std::stoi(value);
        else if (key == "algo") cfg.algo = algorithm_from_name(value);
        else if (key == "list") cfg.list_widths = parse_int_list(value);
        else if (key == "iters") cfg.n_max = std::stoi(value);
        else if (key == "kmax") cfg.k_max = std::stoi(value);
        else if (key == "prune-tau") cfg.prune_tau = std::stod(value);
        else if (key == "channel") {
            if (value == "rayleigh") cfg.channel = ChannelModel::rayleigh;
            else if (value == "unit") cfg.channel = ChannelModel::unit_magnitude;
            else throw std::invalid_argument("channel must be rayleigh or unit");
        }
        else if (key == "seed") cfg.seed = std::stoull(value);
        else if (key == "out") cfg.out = value;
        else
            throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": unknown key '" +
                                        key + "'");
    }
}

}  // namespace rmaccess

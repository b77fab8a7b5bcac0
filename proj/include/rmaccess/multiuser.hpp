#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include "rmaccess/detect.hpp"
#include "rmaccess/rm_core.hpp"

namespace rmaccess {

// Working state of the multi-user detector: one column per detection slot,
// empty until the slot has produced a hypothesis. Slots are updated in place,
// so while slot k is being processed the slots before it already carry this
// iteration's results and the slots after it last iteration's.
struct MultiUserState {
    int m = kMinOrder;
    std::vector<std::vector<std::int8_t>> cols;  // empty or 2^m chips each
    std::vector<std::complex<double>> h;
    int iteration = 0;
};

// Superposed contribution of every slot except `slot`.
CVec mai(const MultiUserState& st, int slot);

// Least-squares channel coefficients minimizing ||y - C h||^2. Empty columns
// and duplicate columns beyond their first occurrence get h = 0; the reduced
// system is solved exactly by normal equations (columns are +-1 chips, so the
// Gram matrix is real with diagonal 2^m).
std::vector<std::complex<double>> ls_channels(const CVec& y,
                                              const std::vector<std::vector<std::int8_t>>& cols,
                                              std::uint64_t* mult_count = nullptr);

struct MultiUserOptions {
    int k_max = 1;
    int n_max = 5;
    ListParams list{};        // {1} = greedy single-sequence detector per slot
    double prune_tau = 3.0;   // declaration threshold, in units of the final residual
};

struct ActiveSetReport {
    std::vector<UserId> ids;                     // deduplicated, declaration test passed
    std::vector<std::complex<double>> h_hats;    // matching estimates
    std::vector<double> residual_gain;           // residual increase if the user's term is removed
    int iterations_used = 0;
    double final_residual = 0.0;
};

// Round-robin detection with interference subtraction and a joint LS refit
// after every sweep. Stops once the detected ID multiset repeats between
// consecutive iterations, or after n_max sweeps. A detected user is declared
// active only if removing its term raises the residual energy by more than
// prune_tau times the final residual.
ActiveSetReport detect_iterative(const CVec& y, const MultiUserOptions& opt, OpCount* ops = nullptr);

// One-pass detect-and-subtract baseline: k_max stages, each detecting on the
// residual after cancelling everything found so far, with an LS refit over
// the detected set after each stage. No revisiting; same declaration rule.
ActiveSetReport detect_sic(const CVec& y, const MultiUserOptions& opt, OpCount* ops = nullptr);

}  // namespace rmaccess

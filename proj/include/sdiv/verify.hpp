#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sdiv/divergence.hpp"
#include "sdiv/oracle.hpp"
#include "sdiv/simulation.hpp"

namespace sdiv {

struct VerifyOptions {
    std::size_t cases = 100;
    std::uint64_t seed = kDefaultBaseSeed;
    double fit_tolerance = 5e-4;
    double power_sum_tolerance = 1e-10;
    double oracle_step = 5e-4;
    /// Lower bound on the oracle's summation range; raised for large data.
    Support oracle_cutoff = 150;
    Support long_sum_cutoff = 500;
    /// Added to every oracle objective value (negative-control hook).
    oracle::ObjectivePerturbation perturb;
};

struct FitCheck {
    std::size_t index;
    std::uint64_t n;
    double theta_true;
    double alpha;
    double lambda;
    double h;
    Mode mode;
    double fit_theta;
    bool fit_converged;
    double oracle_theta;
    double oracle_hi;
    double abs_diff;
    bool pass;
};

struct PowerSumCheck {
    double theta;
    double c;
    double power_sum;
    double long_sum;
    double abs_diff;
    bool pass;
};

struct VerifyReport {
    VerifyOptions options;
    std::vector<FitCheck> fits;
    std::vector<PowerSumCheck> power_sums;

    bool passed() const;
    std::size_t failures() const;
    /// Deterministic for fixed options: no timings or host data.
    std::string to_json() const;
};

/// Random Poisson cases (theta in [1, 9], n in {10, 20, 50}, alpha, lambda and
/// h from the standard grids; msde only where A > 0) cross-checked against
/// the brute-force oracle, plus power sums against direct long sums.
VerifyReport run_verification(const VerifyOptions& opts);

}  // namespace sdiv

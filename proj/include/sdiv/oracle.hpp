#pragma once

#include <functional>
#include <span>
#include <vector>

#include "sdiv/divergence.hpp"
#include "sdiv/frequency_table.hpp"
#include "sdiv/model.hpp"

// Brute-force reference computations. Nothing in here calls into the
// divergence or estimation sources: sums are accumulated directly over the
// support in linear space and minimization is exhaustive.
namespace sdiv::oracle {

struct OracleConfig {
    double theta_lo = 0.05;
    double theta_hi = 10.0;
    double step = 5e-4;
    Support long_sum_cutoff = 500;

    /// Throws std::invalid_argument unless lo < hi and step <= (hi - lo) / 10.
    void validate() const;
};

/// Test hook: an additive term applied to every oracle objective value.
using ObjectivePerturbation = std::function<double(double theta)>;

/// Direct evaluation of the (penalized) divergence for a scalar model over
/// x = 0..max(long_sum_cutoff, largest observation).
double naive_objective(const FrequencyTable& data, const DiscreteModel& model, double theta, double alpha,
                       double lambda, double h, double beta, Mode mode, Support cutoff);

/// Grid point in [theta_lo, theta_hi] minimizing the objective.
/// Throws EmptyCellUndefined for msde with A <= 0 and empty cells.
double grid_minimize(const FrequencyTable& data, const DiscreteModel& model, const DivergenceParams& params, Mode mode,
                     const OracleConfig& config, const ObjectivePerturbation& perturb = {});

/// Same as grid_minimize over an explicit grid.
double brute_force_fit(const FrequencyTable& data, const DiscreteModel& model, const DivergenceParams& params,
                       Mode mode, std::span<const double> theta_grid, Support long_sum_cutoff = 500,
                       const ObjectivePerturbation& perturb = {});

/// sum_{x=0}^{cutoff} f^c(x), accumulated term by term.
double long_sum_check(const DiscreteModel& model, std::span<const double> theta, double c, Support cutoff = 500);

}  // namespace sdiv::oracle

#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "sdiv/divergence.hpp"
#include "sdiv/frequency_table.hpp"
#include "sdiv/model.hpp"

namespace sdiv {

/// sum_x K_h(delta(x)) f^{1+alpha}(x) u(x) over the truncated support.
///
/// Observed cells are summed directly; the empty-cell block is
/// -w * (sum_x f^{1+beta} u - sum_{r>0} f^{1+beta} u) with w = h (1+beta)/(1+alpha)
/// for Mpsde and w = 1/A for Msde, which makes the result -1/(1+alpha) times
/// the gradient of the matching objective.
/// Throws EmptyCellUndefined for Msde when A <= 0 and an empty cell exists.
std::vector<double> estimating_function(const FrequencyTable& data, const DiscreteModel& model,
                                        std::span<const double> theta, const DivergenceParams& params, Mode mode,
                                        const EvalOptions& opts = {});

enum class Method { Newton, BisectionFallback, GridRefine };

const char* to_string(Method m);

struct FitOptions {
    double tail_eps = kDefaultTailEps;
    /// Bound on residual_norm for a fit to count as converged.
    double residual_tol = 1e-8;
    int newton_budget = 200;
    int bisection_budget = 200;
    /// Log-spaced points of the root scan over the model's search box (p = 1).
    int scan_points = 48;
    Initializer initializer = Initializer::SampleMean;
    std::optional<std::vector<double>> theta0;
};

struct EstimationResult {
    std::vector<double> theta_hat;
    /// Divergence at theta_hat (ordinary or penalized, per mode).
    double objective = 0.0;
    /// max_i max(1, |theta_i|) |psi_i(theta_hat)|.
    double residual_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    Method method_trace = Method::Newton;
};

/// Minimum (penalized) S-divergence estimate.
///
/// Damped Newton from the initializer plus, for scalar models, a scan of the
/// estimating function over the search box; every bracketed sign change that
/// marks a local minimum is polished (Newton, falling back to bisection).
/// Among the roots found the one with the smallest objective wins, ties
/// going to the root nearest the initializer. With no root the objective
/// is minimized on the scan grid and refined, and converged is false.
EstimationResult fit(const FrequencyTable& data, const DiscreteModel& model, const DivergenceParams& params, Mode mode,
                     const FitOptions& opts = {});

struct AsymptoticVariance {
    Eigen::MatrixXd M_alpha;
    Eigen::MatrixXd M_2alpha;
    Eigen::VectorXd N_alpha;
    Eigen::MatrixXd J;
    Eigen::MatrixXd V;
    Eigen::MatrixXd sandwich;
};

/// Model-based covariance J^{-1} V J^{-1} of sqrt(n)(theta_hat - theta),
/// J = M_alpha, V = M_2alpha - N_alpha N_alpha^T. Independent of lambda.
/// Throws SingularInformation when J is numerically singular.
AsymptoticVariance asymptotic_variance(const DiscreteModel& model, std::span<const double> theta, double alpha,
                                       double tail_eps = kDefaultTailEps);

}  // namespace sdiv

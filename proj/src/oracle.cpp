#include "sdiv/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sdiv/errors.hpp"

namespace sdiv::oracle {

void OracleConfig::validate() const {
    if (!(theta_lo < theta_hi)) throw std::invalid_argument("oracle: theta_lo must be below theta_hi");
    if (!(step > 0.0) || step > (theta_hi - theta_lo) / 10.0)
        throw std::invalid_argument("oracle: step must be positive and at most a tenth of the range");
}

double naive_objective(const FrequencyTable& data, const DiscreteModel& model, double theta, double alpha,
                       double lambda, double h, double beta, Mode mode, Support cutoff) {
    const double A = 1.0 + lambda * (1.0 - alpha);
    const double B = alpha - lambda * (1.0 - alpha);
    const double c = 1.0 + alpha;
    const bool a_limit = std::abs(A) < 1e-9;
    const bool b_limit = !a_limit && std::abs(B) < 1e-9;
    const double n = static_cast<double>(data.n());
    const Support top = std::max(cutoff, data.max_support());
    const double th[1] = {theta};

    double total = 0.0;
    auto cells = data.cells();
    std::size_t next = 0;
    for (Support x = 0; x <= top; ++x) {
        double f = model.pmf(th, x);
        if (next < cells.size() && cells[next].x == x) {
            const double r = static_cast<double>(cells[next].count) / n;
            ++next;
            f = std::max(f, 1e-320);
            if (a_limit)
                total += std::pow(f, c) * std::log(f / r) - (std::pow(f, c) - std::pow(r, c)) / c;
            else if (b_limit)
                total += std::pow(r, c) * std::log(r / f) - (std::pow(r, c) - std::pow(f, c)) / c;
            else
                total += std::pow(f, c) / A - c / (A * B) * std::pow(f, B) * std::pow(r, A) + std::pow(r, c) / B;
        } else if (f == 0.0) {
            continue;
        } else if (mode == Mode::Msde) {
            if (a_limit || A <= 0.0) throw EmptyCellUndefined(alpha, lambda, A);
            total += std::pow(f, c) / A;
        } else {
            total += h * std::pow(f, 1.0 + beta);
        }
    }
    return total;
}

double brute_force_fit(const FrequencyTable& data, const DiscreteModel& model, const DivergenceParams& params,
                       Mode mode, std::span<const double> theta_grid, Support long_sum_cutoff,
                       const ObjectivePerturbation& perturb) {
    if (theta_grid.empty()) throw std::invalid_argument("oracle: empty grid");
    double best = theta_grid.front();
    double best_val = std::numeric_limits<double>::infinity();
    for (double t : theta_grid) {
        double v = naive_objective(data, model, t, params.alpha(), params.lambda(), params.h(), params.beta(), mode,
                                   long_sum_cutoff);
        if (perturb) v += perturb(t);
        if (v < best_val) {
            best_val = v;
            best = t;
        }
    }
    return best;
}

double grid_minimize(const FrequencyTable& data, const DiscreteModel& model, const DivergenceParams& params, Mode mode,
                     const OracleConfig& config, const ObjectivePerturbation& perturb) {
    config.validate();
    const auto points = static_cast<std::size_t>(std::floor((config.theta_hi - config.theta_lo) / config.step + 1e-9)) + 1;
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i) grid[i] = config.theta_lo + config.step * static_cast<double>(i);
    return brute_force_fit(data, model, params, mode, grid, config.long_sum_cutoff, perturb);
}

double long_sum_check(const DiscreteModel& model, std::span<const double> theta, double c, Support cutoff) {
    if (!(c > 0.0)) throw std::invalid_argument("long_sum_check: c must be positive");
    double s = 0.0;
    for (Support x = 0; x <= cutoff; ++x) s += std::pow(model.pmf(theta, x), c);
    return s;
}

}  // namespace sdiv::oracle

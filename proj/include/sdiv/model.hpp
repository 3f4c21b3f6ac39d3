#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "sdiv/frequency_table.hpp"
#include "sdiv/rng.hpp"

namespace sdiv {

inline constexpr double kDefaultTailEps = 1e-12;

enum class Initializer { SampleMean, Robust };

/// Axis-aligned region scanned for roots of the estimating equation.
struct SearchBox {
    std::vector<double> lo;
    std::vector<double> hi;
};

/// Parametric family of pmfs on {0, 1, 2, ...} indexed by a p-vector theta.
///
/// Truncation: sums over the infinite support stop at support_cutoff(), the
/// smallest X_max >= min_cover whose upper-tail mass is below tail_eps.
class DiscreteModel {
public:
    virtual ~DiscreteModel() = default;

    virtual std::string_view name() const = 0;
    virtual std::size_t param_dim() const = 0;
    virtual bool in_domain(std::span<const double> theta) const = 0;

    virtual double log_pmf(std::span<const double> theta, Support x) const = 0;
    double pmf(std::span<const double> theta, Support x) const;

    /// u_theta(x) = grad log f_theta(x), written into out (size param_dim()).
    virtual void score(std::span<const double> theta, Support x, std::span<double> out) const = 0;
    std::vector<double> score(std::span<const double> theta, Support x) const;

    virtual Support support_cutoff(std::span<const double> theta, double tail_eps, Support min_cover) const = 0;

    /// sum_{x <= X_max} f^c(x).
    virtual double power_sum(std::span<const double> theta, double c, double tail_eps,
                             Support min_cover = 0) const;

    /// sum_{x <= X_max} f^c(x) u(x), written into out.
    virtual void weighted_power_sum(std::span<const double> theta, double c, double tail_eps, Support min_cover,
                                    std::span<double> out) const;

    /// One draw from f_theta.
    virtual Support draw(std::span<const double> theta, Rng& rng) const = 0;

    FrequencyTable sample(std::span<const double> theta, std::size_t n, Rng& rng) const;
    FrequencyTable sample(std::span<const double> theta, std::size_t n, std::uint64_t seed) const;

    virtual SearchBox search_box(const FrequencyTable& data) const = 0;
    virtual std::vector<double> initial_guess(const FrequencyTable& data, Initializer how) const = 0;
};

/// Poisson(theta), theta > 0.
class PoissonModel final : public DiscreteModel {
public:
    using DiscreteModel::score;

    std::string_view name() const override { return "poisson"; }
    std::size_t param_dim() const override { return 1; }
    bool in_domain(std::span<const double> theta) const override;

    double log_pmf(std::span<const double> theta, Support x) const override;
    void score(std::span<const double> theta, Support x, std::span<double> out) const override;

    Support support_cutoff(std::span<const double> theta, double tail_eps, Support min_cover) const override;
    double power_sum(std::span<const double> theta, double c, double tail_eps, Support min_cover = 0) const override;
    void weighted_power_sum(std::span<const double> theta, double c, double tail_eps, Support min_cover,
                            std::span<double> out) const override;

    Support draw(std::span<const double> theta, Rng& rng) const override;

    /// [max(1e-3, 0.05 mean), 20 mean]; an all-zero sample gets [1e-3, 1].
    SearchBox search_box(const FrequencyTable& data) const override;
    /// Sample mean, or the sample median (at least 0.5) for Initializer::Robust.
    std::vector<double> initial_guess(const FrequencyTable& data, Initializer how) const override;

    // Scalar conveniences.
    double log_pmf(double theta, Support x) const;
    Support support_cutoff(double theta, double tail_eps, Support min_cover) const;
    double power_sum(double theta, double c, double tail_eps = kDefaultTailEps, Support min_cover = 0) const;
};

/// log(x!) from a precomputed table, falling back to lgamma_r beyond it.
double log_factorial(Support x);

}  // namespace sdiv

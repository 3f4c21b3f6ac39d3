#pragma once

#include <optional>
#include <span>

#include "sdiv/frequency_table.hpp"
#include "sdiv/model.hpp"

namespace sdiv {

/// |A| or |B| below this routes evaluation to the continuous-limit forms.
inline constexpr double kLimitThreshold = 1e-9;

/// log of the floor applied to model probabilities on observed cells.
inline constexpr double kLogPmfFloor = -736.8272149474527;  // log(1e-320)

enum class Regime { General, ALimitZero, BLimitZero };

struct Exponents {
    double A;
    double B;
    Regime regime;
};

/// A = 1 + lambda (1 - alpha), B = alpha - lambda (1 - alpha).
Exponents derive_exponents(double alpha, double lambda);

/// Tuning parameters of the (penalized) S-divergence.
class DivergenceParams {
public:
    /// Throws std::invalid_argument unless alpha >= 0, h >= 0 and beta >= 0.
    DivergenceParams(double alpha, double lambda, double h = 1.0, std::optional<double> beta = std::nullopt);

    double alpha() const noexcept { return alpha_; }
    double lambda() const noexcept { return lambda_; }
    double h() const noexcept { return h_; }
    /// Exponent of the empty-cell term is 1 + beta; beta defaults to alpha.
    double beta() const noexcept { return beta_.value_or(alpha_); }
    bool has_beta() const noexcept { return beta_.has_value(); }

    double A() const noexcept { return exp_.A; }
    double B() const noexcept { return exp_.B; }
    Regime regime() const noexcept { return exp_.regime; }
    const Exponents& exponents() const noexcept { return exp_; }

    /// True when the ordinary S-divergence is infinite on any empty cell.
    bool empty_cell_undefined() const noexcept { return exp_.regime == Regime::ALimitZero || exp_.A <= 0.0; }

    DivergenceParams with_h(double h) const { return {alpha_, lambda_, h, beta_}; }
    DivergenceParams with_beta(std::optional<double> beta) const { return {alpha_, lambda_, h_, beta}; }

private:
    double alpha_;
    double lambda_;
    double h_;
    std::optional<double> beta_;
    Exponents exp_;
};

enum class Mode { Msde, Mpsde };

/// K(delta) = ((delta + 1)^A - 1) / A, or log(1 + delta) in the A-limit.
/// Throws DomainError at delta = -1 when A <= 0.
double k_fn(double delta, const Exponents& e);
double k_fn(double delta, const DivergenceParams& p);

/// K_h: equals K off delta = -1 and -h at delta = -1.
double k_h_fn(double delta, const DivergenceParams& p);

/// Per-cell divergence term for an observed cell (r > 0), from log r and log f.
double nonempty_cell(double log_r, double log_f, double alpha, const Exponents& e);

/// K(delta) f^{1+alpha} for an observed cell, from log r and log f.
double k_weighted(double log_r, double log_f, double alpha, const Exponents& e);

struct EvalOptions {
    double tail_eps = kDefaultTailEps;
};

/// Ordinary S-divergence S_(alpha, lambda)(r_n, f_theta).
/// Throws EmptyCellUndefined when A <= 0 and the data has an empty cell in
/// the truncated support [0, X_max].
double s_divergence(const FrequencyTable& data, const DiscreteModel& model, std::span<const double> theta,
                    const DivergenceParams& params, const EvalOptions& opts = {});

/// Penalized S-divergence: observed cells as in s_divergence, empty cells
/// weighted by h f^{1+beta}. Finite for every (alpha, lambda).
double penalized_s_divergence(const FrequencyTable& data, const DiscreteModel& model, std::span<const double> theta,
                              const DivergenceParams& params, const EvalOptions& opts = {});

/// s_divergence for Mode::Msde, penalized_s_divergence for Mode::Mpsde.
double divergence_objective(const FrequencyTable& data, const DiscreteModel& model, std::span<const double> theta,
                            const DivergenceParams& params, Mode mode, const EvalOptions& opts = {});

/// Sum of f^c over unobserved points of [0, X_max], by complement against
/// the model's power sum. Zero when the truncated support has no empty cell.
double empty_cell_power_sum(const FrequencyTable& data, const DiscreteModel& model, std::span<const double> theta,
                            double c, double tail_eps);

/// True when [0, X_max] (X_max covering the largest observation) has an
/// unobserved point.
bool has_empty_cell(const FrequencyTable& data, const DiscreteModel& model, std::span<const double> theta,
                    double tail_eps);

const char* to_string(Regime r);
const char* to_string(Mode m);

}  // namespace sdiv

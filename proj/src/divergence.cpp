#include "sdiv/divergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sdiv/errors.hpp"

namespace sdiv {

Exponents derive_exponents(double alpha, double lambda) {
    const double A = 1.0 + lambda * (1.0 - alpha);
    const double B = alpha - lambda * (1.0 - alpha);
    Regime regime = Regime::General;
    if (std::abs(A) < kLimitThreshold)
        regime = Regime::ALimitZero;
    else if (std::abs(B) < kLimitThreshold)
        regime = Regime::BLimitZero;
    return {A, B, regime};
}

DivergenceParams::DivergenceParams(double alpha, double lambda, double h, std::optional<double> beta)
    : alpha_(alpha), lambda_(lambda), h_(h), beta_(beta), exp_(derive_exponents(alpha, lambda)) {
    if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw std::invalid_argument("alpha must be finite and >= 0");
    if (!std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite");
    if (!(h >= 0.0) || !std::isfinite(h)) throw std::invalid_argument("h must be finite and >= 0");
    if (beta && (!(*beta >= 0.0) || !std::isfinite(*beta))) throw std::invalid_argument("beta must be finite and >= 0");
}

double k_fn(double delta, const Exponents& e) {
    if (delta < -1.0) throw DomainError("K(delta) requires delta >= -1");
    if (delta == -1.0) {
        if (e.regime == Regime::ALimitZero || e.A <= 0.0) throw DomainError("K(-1) is undefined for A <= 0");
        return -1.0 / e.A;
    }
    if (e.regime == Regime::ALimitZero) return std::log1p(delta);
    return std::expm1(e.A * std::log1p(delta)) / e.A;
}

double k_fn(double delta, const DivergenceParams& p) { return k_fn(delta, p.exponents()); }

double k_h_fn(double delta, const DivergenceParams& p) {
    if (delta == -1.0) return -p.h();
    return k_fn(delta, p.exponents());
}

double nonempty_cell(double log_r, double log_f, double alpha, const Exponents& e) {
    const double c = 1.0 + alpha;
    log_f = std::max(log_f, kLogPmfFloor);
    const double fc = std::exp(c * log_f);
    const double rc = std::exp(c * log_r);
    switch (e.regime) {
        case Regime::ALimitZero:
            return fc * (log_f - log_r) - (fc - rc) / c;
        case Regime::BLimitZero:
            return rc * (log_r - log_f) - (rc - fc) / c;
        case Regime::General:
            break;
    }
    const double cross = std::exp(e.B * log_f + e.A * log_r);
    return fc / e.A - c / (e.A * e.B) * cross + rc / e.B;
}

double k_weighted(double log_r, double log_f, double alpha, const Exponents& e) {
    const double c = 1.0 + alpha;
    log_f = std::max(log_f, kLogPmfFloor);
    const double d = log_r - log_f;
    if (e.regime == Regime::ALimitZero) return std::exp(c * log_f) * d;
    const double t = e.A * d;
    if (t < 50.0) return std::exp(c * log_f) * std::expm1(t) / e.A;
    // f^B r^A dominates; keep it in one exponent so a tiny f cannot overflow.
    return (std::exp(e.B * log_f + e.A * log_r) - std::exp(c * log_f)) / e.A;
}

bool has_empty_cell(const FrequencyTable& data, const DiscreteModel& model, std::span<const double> theta,
                    double tail_eps) {
    const Support top = data.max_support();
    if (data.has_empty_cell_upto(top)) return true;
    return model.support_cutoff(theta, tail_eps, top) > top;
}

double empty_cell_power_sum(const FrequencyTable& data, const DiscreteModel& model, std::span<const double> theta,
                            double c, double tail_eps) {
    if (!has_empty_cell(data, model, theta, tail_eps)) return 0.0;
    double observed = 0.0;
    for (const auto& cell : data.cells()) observed += std::exp(c * model.log_pmf(theta, cell.x));
    const double total = model.power_sum(theta, c, tail_eps, data.max_support());
    return std::max(total - observed, 0.0);
}

namespace {

double observed_part(const FrequencyTable& data, const DiscreteModel& model, std::span<const double> theta,
                     const DivergenceParams& params) {
    const double log_n = std::log(static_cast<double>(data.n()));
    double s = 0.0;
    for (const auto& cell : data.cells()) {
        const double log_r = std::log(static_cast<double>(cell.count)) - log_n;
        s += nonempty_cell(log_r, model.log_pmf(theta, cell.x), params.alpha(), params.exponents());
    }
    return s;
}

}  // namespace

double s_divergence(const FrequencyTable& data, const DiscreteModel& model, std::span<const double> theta,
                    const DivergenceParams& params, const EvalOptions& opts) {
    const double observed = observed_part(data, model, theta, params);
    if (!has_empty_cell(data, model, theta, opts.tail_eps)) return observed;
    if (params.empty_cell_undefined()) throw EmptyCellUndefined(params.alpha(), params.lambda(), params.A());
    // For A > 0 the per-cell term at r = 0 reduces to f^{1+alpha} / A.
    return observed + empty_cell_power_sum(data, model, theta, 1.0 + params.alpha(), opts.tail_eps) / params.A();
}

double penalized_s_divergence(const FrequencyTable& data, const DiscreteModel& model, std::span<const double> theta,
                              const DivergenceParams& params, const EvalOptions& opts) {
    const double observed = observed_part(data, model, theta, params);
    return observed + params.h() * empty_cell_power_sum(data, model, theta, 1.0 + params.beta(), opts.tail_eps);
}

double divergence_objective(const FrequencyTable& data, const DiscreteModel& model, std::span<const double> theta,
                            const DivergenceParams& params, Mode mode, const EvalOptions& opts) {
    return mode == Mode::Msde ? s_divergence(data, model, theta, params, opts)
                              : penalized_s_divergence(data, model, theta, params, opts);
}

const char* to_string(Regime r) {
    switch (r) {
        case Regime::General: return "general";
        case Regime::ALimitZero: return "A-limit";
        case Regime::BLimitZero: return "B-limit";
    }
    return "?";
}

const char* to_string(Mode m) { return m == Mode::Msde ? "msde" : "mpsde"; }

}  // namespace sdiv

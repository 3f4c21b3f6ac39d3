#include "sdiv/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace sdiv {

// ---------------------------------------------------------------------------
// DiscreteModel defaults

double DiscreteModel::pmf(std::span<const double> theta, Support x) const { return std::exp(log_pmf(theta, x)); }

std::vector<double> DiscreteModel::score(std::span<const double> theta, Support x) const {
    std::vector<double> u(param_dim());
    score(theta, x, u);
    return u;
}

double DiscreteModel::power_sum(std::span<const double> theta, double c, double tail_eps, Support min_cover) const {
    const Support xmax = support_cutoff(theta, tail_eps, min_cover);
    double s = 0.0;
    for (Support x = 0; x <= xmax; ++x) s += std::exp(c * log_pmf(theta, x));
    return s;
}

void DiscreteModel::weighted_power_sum(std::span<const double> theta, double c, double tail_eps, Support min_cover,
                                       std::span<double> out) const {
    const Support xmax = support_cutoff(theta, tail_eps, min_cover);
    std::vector<double> u(param_dim());
    std::fill(out.begin(), out.end(), 0.0);
    for (Support x = 0; x <= xmax; ++x) {
        const double w = std::exp(c * log_pmf(theta, x));
        score(theta, x, u);
        for (std::size_t i = 0; i < u.size(); ++i) out[i] += w * u[i];
    }
}

FrequencyTable DiscreteModel::sample(std::span<const double> theta, std::size_t n, Rng& rng) const {
    if (n == 0) throw std::invalid_argument("sample size must be positive");
    std::vector<Support> xs(n);
    for (auto& x : xs) x = draw(theta, rng);
    return FrequencyTable::from_observations(xs);
}

FrequencyTable DiscreteModel::sample(std::span<const double> theta, std::size_t n, std::uint64_t seed) const {
    Rng rng(seed);
    return sample(theta, n, rng);
}

// ---------------------------------------------------------------------------
// log-factorial table

namespace {

constexpr std::size_t kLogFactTable = 4096;

const std::array<double, kLogFactTable>& log_fact_table() {
    static const auto table = [] {
        std::array<double, kLogFactTable> t{};
        t[0] = 0.0;
        for (std::size_t k = 1; k < kLogFactTable; ++k) t[k] = t[k - 1] + std::log(static_cast<double>(k));
        return t;
    }();
    return table;
}

double checked_theta(std::span<const double> theta) {
    if (theta.size() != 1) throw std::invalid_argument("poisson: theta must have dimension 1");
    return theta[0];
}

// k^{-c} for k = 0..size-1, rebuilt when c changes. A fit evaluates many
// power sums with the same exponent, so the table is almost always warm.
const std::vector<double>& inverse_powers(double c, Support xmax) {
    static thread_local double cached_c = std::numeric_limits<double>::quiet_NaN();
    static thread_local std::vector<double> table;
    if (c != cached_c) {
        table.assign(1, 0.0);
        cached_c = c;
    }
    for (std::size_t k = table.size(); k <= xmax; ++k) table.push_back(std::pow(static_cast<double>(k), -c));
    return table;
}

// Calls visit(x, f(x)^c) for x = 0..xmax. The terms follow the ratio
// f(x)^c = f(x-1)^c (theta / x)^c unless exp(-c theta) is too small to start it.
template <class Visit>
void for_each_powered_term(double theta, double c, Support xmax, Visit&& visit) {
    const double log_theta = std::log(theta);
    if (c * theta > 650.0) {
        for (Support x = 0; x <= xmax; ++x)
            visit(x, std::exp(c * (static_cast<double>(x) * log_theta - theta - log_factorial(x))));
        return;
    }
    const auto& inv = inverse_powers(c, xmax);
    const double theta_c = std::exp(c * log_theta);
    double g = std::exp(-c * theta);
    visit(Support{0}, g);
    for (Support x = 1; x <= xmax; ++x) {
        g *= theta_c * inv[x];
        visit(x, g);
    }
}

}  // namespace

double log_factorial(Support x) {
    if (x < kLogFactTable) return log_fact_table()[x];
    int sign = 0;
    return ::lgamma_r(static_cast<double>(x) + 1.0, &sign);
}

// ---------------------------------------------------------------------------
// PoissonModel

bool PoissonModel::in_domain(std::span<const double> theta) const {
    return theta.size() == 1 && std::isfinite(theta[0]) && theta[0] > 0.0;
}

double PoissonModel::log_pmf(double theta, Support x) const {
    return static_cast<double>(x) * std::log(theta) - theta - log_factorial(x);
}

double PoissonModel::log_pmf(std::span<const double> theta, Support x) const {
    return log_pmf(checked_theta(theta), x);
}

void PoissonModel::score(std::span<const double> theta, Support x, std::span<double> out) const {
    out[0] = static_cast<double>(x) / checked_theta(theta) - 1.0;
}

Support PoissonModel::support_cutoff(double theta, double tail_eps, Support min_cover) const {
    if (!(theta > 0.0)) throw std::invalid_argument("poisson: theta must be positive");
    if (!(tail_eps > 0.0 && tail_eps < 1.0)) throw std::invalid_argument("tail_eps must lie in (0, 1)");

    // Terms f(k) for k > min_cover until the remaining tail is negligible
    // against tail_eps, then suffix sums from the far end. For k > theta the
    // tail after k is bounded by f(k+1) / (1 - theta / (k + 2)). Terms come
    // from the ratio f(k+1) = f(k) theta / (k+1) unless the first one
    // underflows below the mode, where each term is evaluated directly.
    const double log_theta = std::log(theta);
    const double negligible = tail_eps * 1e-6;
    static thread_local std::vector<double> terms;
    terms.clear();
    const Support first = min_cover + 1;
    double fk = std::exp(static_cast<double>(first) * log_theta - theta - log_factorial(first));
    const bool direct = fk < 1e-280 && static_cast<double>(first) < theta;
    for (Support k = first;; ++k) {
        const double kk = static_cast<double>(k);
        if (k != first)
            fk = direct ? std::exp(kk * log_theta - theta - log_factorial(k)) : fk * theta / kk;
        terms.push_back(fk);
        if (kk + 1.0 > theta) {
            const double next = fk * theta / (kk + 1.0);
            const double bound = next / (1.0 - theta / (kk + 2.0));
            if (bound < negligible) break;
        }
    }
    // terms[i] = f(min_cover + 1 + i). Walk down from the far end.
    double tail = 0.0;
    for (std::size_t i = terms.size(); i-- > 0;) {
        tail += terms[i];  // now tail = P(X > min_cover + i)
        if (tail >= tail_eps) return min_cover + i + 1;
    }
    return min_cover;
}

Support PoissonModel::support_cutoff(std::span<const double> theta, double tail_eps, Support min_cover) const {
    return support_cutoff(checked_theta(theta), tail_eps, min_cover);
}

double PoissonModel::power_sum(double theta, double c, double tail_eps, Support min_cover) const {
    const Support xmax = support_cutoff(theta, tail_eps, min_cover);
    double s = 0.0;
    for_each_powered_term(theta, c, xmax, [&](Support, double g) { s += g; });
    return s;
}

double PoissonModel::power_sum(std::span<const double> theta, double c, double tail_eps, Support min_cover) const {
    return power_sum(checked_theta(theta), c, tail_eps, min_cover);
}

void PoissonModel::weighted_power_sum(std::span<const double> theta, double c, double tail_eps, Support min_cover,
                                      std::span<double> out) const {
    const double t = checked_theta(theta);
    const Support xmax = support_cutoff(t, tail_eps, min_cover);
    double s = 0.0;
    for_each_powered_term(t, c, xmax, [&](Support x, double g) { s += g * (static_cast<double>(x) / t - 1.0); });
    out[0] = s;
}

Support PoissonModel::draw(std::span<const double> theta, Rng& rng) const {
    const double t = checked_theta(theta);
    const double u = rng.uniform();
    if (t <= 30.0) {
        // Sequential inversion from x = 0.
        double p = std::exp(-t);
        double cdf = p;
        Support x = 0;
        while (u > cdf) {
            ++x;
            p *= t / static_cast<double>(x);
            if (p == 0.0) break;
            cdf += p;
        }
        return x;
    }
    // Inversion started at the mode: F(mode) from a downward sum, then a
    // sequential search in whichever direction u lies.
    const Support mode = static_cast<Support>(std::floor(t));
    const double p_mode = std::exp(log_pmf(t, mode));
    double cdf = 0.0;
    {
        double p = p_mode;
        for (Support k = mode;; --k) {
            cdf += p;
            if (k == 0) break;
            p *= static_cast<double>(k) / t;
            if (p < cdf * 1e-20) break;
        }
    }
    Support x = mode;
    double p = p_mode;
    if (u <= cdf) {
        while (x > 0 && u <= cdf - p) {
            cdf -= p;
            p *= static_cast<double>(x) / t;
            --x;
        }
        return x;
    }
    while (u > cdf) {
        ++x;
        p *= t / static_cast<double>(x);
        if (p == 0.0) break;
        cdf += p;
    }
    return x;
}

SearchBox PoissonModel::search_box(const FrequencyTable& data) const {
    const double m = data.mean();
    if (!(m > 0.0)) return {{1e-3}, {1.0}};
    const double lo = std::max(1e-3, 0.05 * m);
    const double hi = std::max(20.0 * m, 10.0 * lo);
    return {{lo}, {hi}};
}

std::vector<double> PoissonModel::initial_guess(const FrequencyTable& data, Initializer how) const {
    const SearchBox box = search_box(data);
    double guess = data.mean();
    if (how == Initializer::Robust) {
        // Lower median of the observations.
        const std::uint64_t target = (data.n() + 1) / 2;
        std::uint64_t seen = 0;
        for (const auto& c : data.cells()) {
            seen += c.count;
            if (seen >= target) {
                guess = static_cast<double>(c.x);
                break;
            }
        }
        guess = std::max(guess, 0.5);
    }
    return {std::clamp(guess, box.lo[0], box.hi[0])};
}

}  // namespace sdiv

#include "sdiv/verify.hpp"

#include <algorithm>
#include <cmath>

#include <json.hpp>

#include "sdiv/errors.hpp"
#include "sdiv/estimation.hpp"
#include "sdiv/rng.hpp"

namespace sdiv {

bool VerifyReport::passed() const { return failures() == 0; }

std::size_t VerifyReport::failures() const {
    const auto f = std::count_if(fits.begin(), fits.end(), [](const FitCheck& c) { return !c.pass; });
    const auto p = std::count_if(power_sums.begin(), power_sums.end(), [](const PowerSumCheck& c) { return !c.pass; });
    return static_cast<std::size_t>(f + p);
}

std::string VerifyReport::to_json() const {
    nlohmann::ordered_json j;
    j["seed"] = options.seed;
    j["cases"] = options.cases;
    j["tolerances"] = {{"fit", options.fit_tolerance}, {"power_sum", options.power_sum_tolerance}};
    j["oracle"] = {{"step", options.oracle_step},
                   {"min_cutoff", options.oracle_cutoff},
                   {"long_sum_cutoff", options.long_sum_cutoff},
                   {"perturbed", static_cast<bool>(options.perturb)}};
    j["passed"] = passed();
    j["failures"] = failures();
    auto& fj = j["fit_checks"] = nlohmann::ordered_json::array();
    for (const auto& c : fits) {
        fj.push_back({{"index", c.index},
                      {"n", c.n},
                      {"theta_true", c.theta_true},
                      {"alpha", c.alpha},
                      {"lambda", c.lambda},
                      {"h", c.mode == Mode::Mpsde ? nlohmann::ordered_json(c.h) : nlohmann::ordered_json()},
                      {"mode", to_string(c.mode)},
                      {"fit_theta", c.fit_theta},
                      {"fit_converged", c.fit_converged},
                      {"oracle_theta", c.oracle_theta},
                      {"oracle_theta_hi", c.oracle_hi},
                      {"abs_diff", c.abs_diff},
                      {"pass", c.pass}});
    }
    auto& pj = j["power_sum_checks"] = nlohmann::ordered_json::array();
    for (const auto& c : power_sums) {
        pj.push_back({{"theta", c.theta},
                      {"c", c.c},
                      {"power_sum", c.power_sum},
                      {"long_sum", c.long_sum},
                      {"abs_diff", c.abs_diff},
                      {"pass", c.pass}});
    }
    return j.dump(2) + "\n";
}

namespace {

template <class T>
const T& pick(const std::vector<T>& v, Rng& rng) {
    auto i = static_cast<std::size_t>(rng.uniform() * static_cast<double>(v.size()));
    return v[std::min(i, v.size() - 1)];
}

}  // namespace

VerifyReport run_verification(const VerifyOptions& opts) {
    const PoissonModel model;
    const std::vector<std::uint64_t> ns{10, 20, 50};
    const std::vector<double> alphas{0.0, 0.1, 0.25, 0.5};
    const std::vector<double> lambdas{0.0, -0.5, -1.0, -1.5, -2.0};
    std::vector<double> hs = default_h_grid();

    VerifyReport report;
    report.options = opts;
    Rng rng(splitmix64(opts.seed));

    for (std::size_t i = 0; i < opts.cases; ++i) {
        const double theta = 1.0 + 8.0 * rng.uniform();
        const std::uint64_t n = pick(ns, rng);
        const double alpha = pick(alphas, rng);
        const double lambda = pick(lambdas, rng);
        const double h = pick(hs, rng);
        const bool coin = rng.uniform() < 0.5;
        const std::uint64_t data_seed = rng.next();

        const DivergenceParams params(alpha, lambda, h);
        const Mode mode = (!params.empty_cell_undefined() && coin) ? Mode::Msde : Mode::Mpsde;
        const double th[1] = {theta};
        const FrequencyTable data = model.sample(th, n, data_seed);

        oracle::OracleConfig cfg;
        cfg.step = opts.oracle_step;
        cfg.theta_hi = std::max(10.0, std::ceil(1.5 * data.mean() + 3.0));
        cfg.long_sum_cutoff = std::max<Support>(opts.oracle_cutoff, 3 * static_cast<Support>(cfg.theta_hi) + 40);

        FitCheck check{i, n, theta, alpha, lambda, h, mode, NAN, false, NAN, cfg.theta_hi, NAN, false};
        try {
            const EstimationResult r = fit(data, model, params, mode);
            check.fit_theta = r.theta_hat.front();
            check.fit_converged = r.converged;
            check.oracle_theta = oracle::grid_minimize(data, model, params, mode, cfg, opts.perturb);
            check.abs_diff = std::abs(check.fit_theta - check.oracle_theta);
            check.pass = check.abs_diff <= opts.fit_tolerance;
        } catch (const Error&) {
            check.pass = false;
        }
        report.fits.push_back(check);

        const double c = 1.0 + alpha;
        const double ps = model.power_sum(theta, c);
        const double ls = oracle::long_sum_check(model, th, c, opts.long_sum_cutoff);
        const double d = std::abs(ps - ls);
        report.power_sums.push_back({theta, c, ps, ls, d, d <= opts.power_sum_tolerance});
    }
    return report;
}

}  // namespace sdiv

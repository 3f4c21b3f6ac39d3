#include "sdiv/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "sdiv/errors.hpp"

namespace sdiv {

std::vector<double> estimating_function(const FrequencyTable& data, const DiscreteModel& model,
                                        std::span<const double> theta, const DivergenceParams& params, Mode mode,
                                        const EvalOptions& opts) {
    const std::size_t p = model.param_dim();
    std::vector<double> psi(p, 0.0);
    // scratch: score u, observed part of the empty-cell sum, model total
    static thread_local std::vector<double> scratch;
    scratch.assign(3 * p, 0.0);
    const std::span<double> u(scratch.data(), p);
    const std::span<double> observed_empty_weight(scratch.data() + p, p);
    const std::span<double> total(scratch.data() + 2 * p, p);
    const double log_n = std::log(static_cast<double>(data.n()));
    const double alpha = params.alpha();

    const bool empties = has_empty_cell(data, model, theta, opts.tail_eps);
    double weight = 0.0;
    double c_empty = 1.0 + alpha;
    if (empties) {
        if (mode == Mode::Msde) {
            if (params.empty_cell_undefined()) throw EmptyCellUndefined(alpha, params.lambda(), params.A());
            weight = 1.0 / params.A();
        } else {
            c_empty = 1.0 + params.beta();
            weight = params.h() * c_empty / (1.0 + alpha);
        }
    }

    for (const auto& cell : data.cells()) {
        const double log_r = std::log(static_cast<double>(cell.count)) - log_n;
        const double log_f = model.log_pmf(theta, cell.x);
        model.score(theta, cell.x, u);
        const double kw = k_weighted(log_r, log_f, alpha, params.exponents());
        const double fe = empties ? std::exp(c_empty * log_f) : 0.0;
        for (std::size_t i = 0; i < p; ++i) {
            psi[i] += kw * u[i];
            observed_empty_weight[i] += fe * u[i];
        }
    }
    if (empties && weight != 0.0) {
        model.weighted_power_sum(theta, c_empty, opts.tail_eps, data.max_support(), total);
        for (std::size_t i = 0; i < p; ++i) psi[i] -= weight * (total[i] - observed_empty_weight[i]);
    }
    return psi;
}

const char* to_string(Method m) {
    switch (m) {
        case Method::Newton: return "newton";
        case Method::BisectionFallback: return "bisection_fallback";
        case Method::GridRefine: return "grid_refine";
    }
    return "?";
}

namespace {

struct Candidate {
    std::vector<double> theta;
    double residual = std::numeric_limits<double>::infinity();
    int iterations = 0;
    Method method = Method::Newton;
    bool converged = false;
    double objective = std::numeric_limits<double>::infinity();
};

double scaled_residual(std::span<const double> theta, std::span<const double> psi) {
    double r = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) r = std::max(r, std::max(1.0, std::abs(theta[i])) * std::abs(psi[i]));
    return r;
}

double norm2(std::span<const double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

class Problem {
public:
    Problem(const FrequencyTable& data, const DiscreteModel& model, const DivergenceParams& params, Mode mode,
            const FitOptions& opts)
        : data_(data), model_(model), params_(params), mode_(mode), eval_{opts.tail_eps}, opts_(opts) {}

    std::vector<double> psi(std::span<const double> theta) const {
        return estimating_function(data_, model_, theta, params_, mode_, eval_);
    }
    double psi1(double theta) const { return psi(std::span<const double>(&theta, 1))[0]; }

    double objective(std::span<const double> theta) const {
        return divergence_objective(data_, model_, theta, params_, mode_, eval_);
    }
    double objective1(double theta) const { return objective(std::span<const double>(&theta, 1)); }

    bool in_domain(std::span<const double> theta) const { return model_.in_domain(theta); }
    bool in_domain1(double theta) const { return in_domain(std::span<const double>(&theta, 1)); }

    const FitOptions& opts() const { return opts_; }
    std::size_t dim() const { return model_.param_dim(); }

    // Central difference of psi along coordinate j; one-sided at the domain edge.
    std::vector<double> jacobian_column(std::span<const double> theta, std::size_t j) const {
        const double step = 1e-5 * std::max(1.0, std::abs(theta[j]));
        std::vector<double> up(theta.begin(), theta.end());
        std::vector<double> dn(theta.begin(), theta.end());
        up[j] += step;
        dn[j] -= step;
        double width = 2.0 * step;
        if (!in_domain(dn)) {
            dn[j] = theta[j];
            width = step;
        }
        if (!in_domain(up)) {
            up[j] = theta[j];
            width = step;
        }
        const auto fu = psi(up);
        const auto fd = psi(dn);
        std::vector<double> col(fu.size());
        for (std::size_t i = 0; i < col.size(); ++i) col[i] = (fu[i] - fd[i]) / width;
        return col;
    }

private:
    const FrequencyTable& data_;
    const DiscreteModel& model_;
    const DivergenceParams& params_;
    Mode mode_;
    EvalOptions eval_;
    const FitOptions& opts_;
};

bool inside(const SearchBox& box, std::span<const double> theta) {
    for (std::size_t i = 0; i < theta.size(); ++i)
        if (!(theta[i] >= box.lo[i] && theta[i] <= box.hi[i])) return false;
    return true;
}

// Damped Newton on psi from theta0, with every iterate kept inside the box.
// psi vanishes as theta runs off to the edge of the parameter space, so an
// unconstrained search can chase a shrinking residual towards infinity.
Candidate newton(const Problem& prob, std::vector<double> theta, const SearchBox& box) {
    Candidate out;
    out.method = Method::Newton;
    const std::size_t p = prob.dim();
    std::vector<double> psi;
    try {
        psi = prob.psi(theta);
        int it = 0;
        for (; it < prob.opts().newton_budget; ++it) {
            if (norm2(psi) == 0.0) break;
            Eigen::MatrixXd J(p, p);
            for (std::size_t j = 0; j < p; ++j) {
                const auto col = prob.jacobian_column(theta, j);
                for (std::size_t i = 0; i < p; ++i) J(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
            }
            Eigen::VectorXd rhs = -Eigen::Map<const Eigen::VectorXd>(psi.data(), static_cast<Eigen::Index>(p));
            Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
            if (!lu.isInvertible()) break;
            const Eigen::VectorXd d = lu.solve(rhs);
            if (!d.allFinite()) break;

            const double base = norm2(psi);
            double t = 1.0;
            bool accepted = false;
            std::vector<double> trial(p);
            std::vector<double> trial_psi;
            for (int k = 0; k < 40; ++k, t *= 0.5) {
                for (std::size_t i = 0; i < p; ++i) trial[i] = theta[i] + t * d(static_cast<Eigen::Index>(i));
                if (!prob.in_domain(trial) || !inside(box, trial)) continue;
                trial_psi = prob.psi(trial);
                if (norm2(trial_psi) < base) {
                    accepted = true;
                    break;
                }
            }
            if (!accepted) break;
            theta = trial;
            psi = std::move(trial_psi);
            if (t * d.norm() <= 1e-12 * std::max(1.0, norm2(theta))) {
                ++it;
                break;
            }
        }
        out.iterations = it;
    } catch (const EmptyCellUndefined&) {
        return out;
    }
    out.theta = theta;
    out.residual = scaled_residual(theta, psi);
    out.converged = std::isfinite(out.residual) && out.residual < prob.opts().residual_tol;
    return out;
}

// Root of psi in (a, b) with psi(a) > 0 > psi(b): Newton steps kept inside
// the bracket, bisection whenever a step leaves it.
Candidate polish_bracket(const Problem& prob, double a, double fa, double b) {
    Candidate out;
    out.method = Method::Newton;
    int newton_steps = 0;
    int bisect_steps = 0;
    double x = 0.5 * (a + b);
    double fx = prob.psi1(x);
    while (newton_steps + bisect_steps < prob.opts().newton_budget + prob.opts().bisection_budget) {
        if (fx == 0.0) break;
        if ((fx > 0.0) == (fa > 0.0)) {
            a = x;
            fa = fx;
        } else {
            b = x;
        }
        const double scale = std::max(1.0, std::abs(x));
        if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * scale) break;

        double next = std::numeric_limits<double>::quiet_NaN();
        if (newton_steps < prob.opts().newton_budget) {
            const double step = 1e-5 * scale;
            const double lo = x - step;
            const double hi = x + step;
            if (prob.in_domain1(lo)) {
                const double d = (prob.psi1(hi) - prob.psi1(lo)) / (hi - lo);
                if (d != 0.0 && std::isfinite(d)) next = x - fx / d;
            }
        }
        const bool newton_ok = std::isfinite(next) && next > a && next < b;
        if (newton_ok) {
            ++newton_steps;
        } else {
            next = 0.5 * (a + b);
            ++bisect_steps;
            out.method = Method::BisectionFallback;
            if (bisect_steps > prob.opts().bisection_budget) break;
        }
        const bool tiny = std::abs(next - x) <= 1e-15 * scale;
        x = next;
        fx = prob.psi1(x);
        if (tiny) break;
    }
    out.theta = {x};
    out.iterations = newton_steps + bisect_steps;
    const double psi_arr[1] = {fx};
    out.residual = scaled_residual(out.theta, psi_arr);
    out.converged = std::isfinite(out.residual) && out.residual < prob.opts().residual_tol;
    return out;
}

std::vector<double> log_grid(double lo, double hi, int points) {
    points = std::max(points, 2);
    std::vector<double> g(static_cast<std::size_t>(points));
    const double llo = std::log(lo);
    const double step = (std::log(hi) - llo) / (points - 1);
    for (int i = 0; i < points; ++i) g[static_cast<std::size_t>(i)] = std::exp(llo + step * i);
    g.front() = lo;
    g.back() = hi;
    return g;
}

// Objective minimum over the scan grid, refined by golden section between
// the neighbours of the best grid point.
Candidate grid_refine(const Problem& prob, const std::vector<double>& grid) {
    std::size_t best = 0;
    double best_val = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double v = prob.objective1(grid[i]);
        if (v < best_val) {
            best_val = v;
            best = i;
        }
    }
    double a = grid[best == 0 ? 0 : best - 1];
    double b = grid[std::min(best + 1, grid.size() - 1)];
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - gr * (b - a);
    double d = a + gr * (b - a);
    double fc = prob.objective1(c);
    double fd = prob.objective1(d);
    int it = 0;
    while (b - a > 1e-12 * std::max(1.0, std::abs(a)) && it < 200) {
        ++it;
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = prob.objective1(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = prob.objective1(d);
        }
    }
    Candidate out;
    out.method = Method::GridRefine;
    out.theta = {0.5 * (a + b)};
    out.iterations = it;
    const double psi_arr[1] = {prob.psi1(out.theta[0])};
    out.residual = scaled_residual(out.theta, psi_arr);
    out.converged = false;
    return out;
}

bool is_local_min_1d(const Problem& prob, double x) {
    const double step = 1e-5 * std::max(1.0, std::abs(x));
    if (!prob.in_domain1(x - step)) return true;
    return prob.psi1(x + step) - prob.psi1(x - step) < 0.0;
}

}  // namespace

EstimationResult fit(const FrequencyTable& data, const DiscreteModel& model, const DivergenceParams& params, Mode mode,
                     const FitOptions& opts) {
    if (data.n() == 0) throw std::invalid_argument("fit: empty data");
    const SearchBox box = model.search_box(data);
    const std::size_t p = model.param_dim();

    if (mode == Mode::Msde && params.empty_cell_undefined() && has_empty_cell(data, model, box.hi, opts.tail_eps))
        throw EmptyCellUndefined(params.alpha(), params.lambda(), params.A());

    const Problem prob(data, model, params, mode, opts);
    const std::vector<double> init = opts.theta0 ? *opts.theta0 : model.initial_guess(data, opts.initializer);
    if (init.size() != p || !model.in_domain(init)) throw std::invalid_argument("fit: initial value outside the model domain");

    std::vector<Candidate> found;
    {
        Candidate c = newton(prob, init, box);
        if (c.converged && (p != 1 || is_local_min_1d(prob, c.theta[0]))) found.push_back(std::move(c));
    }

    std::vector<double> grid;
    if (p == 1) {
        grid = log_grid(box.lo[0], box.hi[0], opts.scan_points);
        std::vector<double> vals(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = prob.psi1(grid[i]);
        for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
            if (vals[i] > 0.0 && vals[i + 1] < 0.0) {
                found.push_back(polish_bracket(prob, grid[i], vals[i], grid[i + 1]));
            } else if (vals[i] == 0.0 && i > 0 && vals[i - 1] > 0.0 && vals[i + 1] < 0.0) {
                Candidate c;
                c.theta = {grid[i]};
                c.residual = 0.0;
                c.converged = true;
                found.push_back(std::move(c));
            }
        }
    }

    std::vector<Candidate> pool;
    for (auto& c : found)
        if (c.converged) pool.push_back(c);
    if (pool.empty())
        for (auto& c : found)
            if (!c.theta.empty() && std::isfinite(c.residual)) pool.push_back(c);
    if (pool.empty() && p == 1) pool.push_back(grid_refine(prob, grid));

    EstimationResult result;
    if (pool.empty()) {
        result.theta_hat = init;
        result.objective = prob.objective(init);
        result.residual_norm = scaled_residual(init, prob.psi(init));
        result.converged = false;
        return result;
    }

    for (auto& c : pool) c.objective = prob.objective(c.theta);

    auto distance_to_init = [&](const Candidate& c) {
        double s = 0.0;
        for (std::size_t i = 0; i < p; ++i) s += (c.theta[i] - init[i]) * (c.theta[i] - init[i]);
        return s;
    };
    const Candidate* best = &pool.front();
    for (const auto& c : pool) {
        const double tol = 1e-13 * (1.0 + std::abs(best->objective));
        if (c.objective < best->objective - tol ||
            (std::abs(c.objective - best->objective) <= tol && distance_to_init(c) < distance_to_init(*best)))
            best = &c;
    }

    result.theta_hat = best->theta;
    result.objective = best->objective;
    result.residual_norm = best->residual;
    result.iterations = best->iterations;
    result.converged = best->converged;
    result.method_trace = best->method;
    return result;
}

AsymptoticVariance asymptotic_variance(const DiscreteModel& model, std::span<const double> theta, double alpha,
                                       double tail_eps) {
    if (!(alpha >= 0.0)) throw std::invalid_argument("alpha must be >= 0");
    if (!model.in_domain(theta)) throw std::invalid_argument("theta outside the model domain");
    const auto p = static_cast<Eigen::Index>(model.param_dim());
    AsymptoticVariance av;
    av.M_alpha = Eigen::MatrixXd::Zero(p, p);
    av.M_2alpha = Eigen::MatrixXd::Zero(p, p);
    av.N_alpha = Eigen::VectorXd::Zero(p);
    std::vector<double> ubuf(static_cast<std::size_t>(p));
    const Support xmax = model.support_cutoff(theta, tail_eps, 0);
    for (Support x = 0; x <= xmax; ++x) {
        const double lf = model.log_pmf(theta, x);
        model.score(theta, x, ubuf);
        const Eigen::Map<const Eigen::VectorXd> u(ubuf.data(), p);
        const double w1 = std::exp((1.0 + alpha) * lf);
        const double w2 = std::exp((1.0 + 2.0 * alpha) * lf);
        av.M_alpha += w1 * u * u.transpose();
        av.M_2alpha += w2 * u * u.transpose();
        av.N_alpha += w1 * u;
    }
    av.J = av.M_alpha;
    av.V = av.M_2alpha - av.N_alpha * av.N_alpha.transpose();
    Eigen::FullPivLU<Eigen::MatrixXd> lu(av.J);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) throw SingularInformation("information matrix J = M_alpha is singular");
    const Eigen::MatrixXd Jinv = lu.inverse();
    av.sandwich = Jinv * av.V * Jinv;
    return av;
}

}  // namespace sdiv

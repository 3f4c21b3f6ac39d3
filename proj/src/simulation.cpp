#include "sdiv/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <json.hpp>

#include "sdiv/errors.hpp"
#include "sdiv/rng.hpp"

namespace sdiv {

std::vector<double> default_h_grid() {
    std::vector<double> h;
    for (int i = 0; i <= 15; ++i) h.push_back(i / 10.0);
    return h;
}

std::vector<double> default_beta_grid() { return {0.0, 0.1, 0.25, 0.5, 0.7, 1.0}; }

void ExperimentGrid::validate() const {
    auto need = [](bool ok, const char* what) {
        if (!ok) throw std::invalid_argument(what);
    };
    need(!n_values.empty(), "grid: n list is empty");
    need(!theta_values.empty(), "grid: theta list is empty");
    need(!alpha_values.empty(), "grid: alpha list is empty");
    need(!lambda_values.empty(), "grid: lambda list is empty");
    need(mode == Mode::Msde || !h_values.empty(), "grid: h list is empty");
    need(replicates >= 1, "grid: replicates must be >= 1");
    for (auto n : n_values) need(n >= 1, "grid: n must be >= 1");
    for (double t : theta_values) need(t > 0.0 && std::isfinite(t), "grid: theta must be positive");
    for (double a : alpha_values) need(a >= 0.0 && std::isfinite(a), "grid: alpha must be >= 0");
    for (double l : lambda_values) need(std::isfinite(l), "grid: lambda must be finite");
    for (double h : h_values) need(h >= 0.0 && std::isfinite(h), "grid: h must be >= 0");
    for (double b : beta_values) need(b >= 0.0 && std::isfinite(b), "grid: beta must be >= 0");
}

const CellStats& MseSurface::at(const CellKey& key) const {
    auto it = cells.find(key);
    if (it == cells.end()) throw MissingCells("surface has no such cell");
    return it->second;
}

namespace {

// Runs body(i) for i in [0, count) on a small pool; the first exception is
// rethrown after all workers stop.
template <class Body>
void parallel_for(std::size_t count, unsigned threads, Body&& body) {
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, count));
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next.store(count);
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

constexpr double kFailed = std::numeric_limits<double>::quiet_NaN();

std::optional<double> fit_or_fail(const FrequencyTable& data, const PoissonModel& model, const DivergenceParams& params,
                                  Mode mode, const FitOptions& opts) {
    try {
        const auto r = fit(data, model, params, mode, opts);
        if (!r.converged) return std::nullopt;
        return r.theta_hat[0];
    } catch (const Error&) {
        return std::nullopt;
    }
}

CellStats reduce(const std::vector<double>& estimates, std::uint64_t n, double theta, std::uint64_t base_seed,
                 std::uint64_t key) {
    CellStats s;
    s.base_seed = base_seed;
    s.data_cell_key = key;
    double sum = 0.0;
    for (double e : estimates) {
        if (std::isnan(e)) {
            ++s.fail_count;
            continue;
        }
        sum += (e - theta) * (e - theta);
        ++s.r_effective;
    }
    s.mse = s.r_effective > 0 ? sum / static_cast<double>(s.r_effective) : kFailed;
    s.n_times_mse = static_cast<double>(n) * s.mse;
    return s;
}

struct ParamCell {
    CellKey key;  // n and theta filled per data cell
    DivergenceParams params;
};

std::vector<ParamCell> expand_params(const ExperimentGrid& grid, const std::vector<double>& betas) {
    std::vector<ParamCell> out;
    for (double a : grid.alpha_values) {
        for (double l : grid.lambda_values) {
            if (grid.mode == Mode::Msde) {
                out.push_back({CellKey{0, 0.0, a, l, std::nullopt, a}, DivergenceParams(a, l)});
                continue;
            }
            for (double h : grid.h_values) {
                if (betas.empty()) {
                    out.push_back({CellKey{0, 0.0, a, l, h, a}, DivergenceParams(a, l, h)});
                } else {
                    for (double b : betas) out.push_back({CellKey{0, 0.0, a, l, h, b}, DivergenceParams(a, l, h, b)});
                }
            }
        }
    }
    return out;
}

MseSurface sweep(const ExperimentGrid& grid, const std::vector<double>& betas, const FitOptions& fit_opts) {
    grid.validate();
    const PoissonModel model;
    const auto param_cells = expand_params(grid, betas);
    const std::size_t R = grid.replicates;

    MseSurface surface;
    surface.replicates = R;
    surface.base_seed = grid.base_seed;
    surface.mode = grid.mode;

    for (auto n : grid.n_values) {
        for (double theta : grid.theta_values) {
            const std::uint64_t key = data_cell_key(n, theta);
            // estimates[j * R + r]
            std::vector<double> estimates(param_cells.size() * R, kFailed);
            const double th[1] = {theta};
            parallel_for(R, grid.threads, [&](std::size_t r) {
                const auto data = model.sample(th, n, replicate_seed(grid.base_seed, key, r));
                for (std::size_t j = 0; j < param_cells.size(); ++j) {
                    const auto est = fit_or_fail(data, model, param_cells[j].params, grid.mode, fit_opts);
                    if (est) estimates[j * R + r] = *est;
                }
            });
            for (std::size_t j = 0; j < param_cells.size(); ++j) {
                std::vector<double> slice(estimates.begin() + static_cast<std::ptrdiff_t>(j * R),
                                          estimates.begin() + static_cast<std::ptrdiff_t>((j + 1) * R));
                CellKey k = param_cells[j].key;
                k.n = n;
                k.theta = theta;
                surface.cells.emplace(k, reduce(slice, n, theta, grid.base_seed, key));
            }
        }
    }
    return surface;
}

}  // namespace

CellStats run_mse_cell(std::uint64_t n, double theta, const ReplicateEstimator& estimator, std::size_t replicates,
                       std::uint64_t base_seed) {
    if (n == 0 || replicates == 0) throw std::invalid_argument("run_mse_cell: n and replicates must be positive");
    const PoissonModel model;
    const std::uint64_t key = data_cell_key(n, theta);
    const double th[1] = {theta};
    std::vector<double> estimates(replicates, kFailed);
    parallel_for(replicates, 0, [&](std::size_t r) {
        const auto data = model.sample(th, n, replicate_seed(base_seed, key, r));
        if (auto e = estimator(data)) estimates[r] = *e;
    });
    CellStats s = reduce(estimates, n, theta, base_seed, key);
    if (s.r_effective == 0) throw AllReplicatesFailed("every replicate failed");
    return s;
}

CellStats run_mse_cell(std::uint64_t n, double theta, const DivergenceParams& params, Mode mode,
                       std::size_t replicates, std::uint64_t base_seed, const FitOptions& fit_opts) {
    const PoissonModel model;
    return run_mse_cell(
        n, theta, [&](const FrequencyTable& data) { return fit_or_fail(data, model, params, mode, fit_opts); },
        replicates, base_seed);
}

MseSurface sweep_h(const ExperimentGrid& grid, const FitOptions& fit_opts) { return sweep(grid, {}, fit_opts); }

MseSurface sweep_beta(const ExperimentGrid& grid, const FitOptions& fit_opts) {
    if (grid.mode != Mode::Mpsde) throw std::invalid_argument("sweep_beta requires mpsde mode");
    return sweep(grid, grid.beta_values.empty() ? default_beta_grid() : grid.beta_values, fit_opts);
}

OptimalH optimal_h(const MseSurface& surface, std::uint64_t n, double theta, double alpha, double lambda,
                   std::optional<double> beta) {
    const double b = beta.value_or(alpha);
    std::optional<OptimalH> best;
    for (const auto& [k, s] : surface.cells) {
        if (k.n != n || k.theta != theta || k.alpha != alpha || k.lambda != lambda || k.beta != b || !k.h) continue;
        if (!std::isfinite(s.mse)) continue;
        // Map order visits h ascending, so strict < keeps the smaller h on ties.
        if (!best || s.mse < best->mse) best = OptimalH{*k.h, s.mse};
    }
    if (!best) throw MissingCells("no finite penalized cells for the requested (n, theta, alpha, lambda)");
    return *best;
}

OptimalHBeta optimal_h_beta(const MseSurface& surface, std::uint64_t n, double theta, double alpha, double lambda) {
    std::optional<OptimalHBeta> best;
    for (const auto& [k, s] : surface.cells) {
        if (k.n != n || k.theta != theta || k.alpha != alpha || k.lambda != lambda || !k.h) continue;
        if (!std::isfinite(s.mse)) continue;
        if (!best || s.mse < best->mse) best = OptimalHBeta{*k.h, k.beta, s.mse};
    }
    if (!best) throw MissingCells("no finite penalized cells for the requested (n, theta, alpha, lambda)");
    return *best;
}

double relative_increase(const MseSurface& surface, double h_star, std::uint64_t n, double theta, double alpha,
                         double lambda) {
    const OptimalH opt = optimal_h(surface, n, theta, alpha, lambda);
    const CellStats& star = surface.at(CellKey{n, theta, alpha, lambda, h_star, alpha});
    if (opt.mse == 0.0) return star.mse == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return (star.mse - opt.mse) / opt.mse;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void write_surface_csv(const MseSurface& surface, std::ostream& os) {
    os << "n,theta,alpha,lambda,h,beta,mse,n_mse,fail_count,R_eff,base_seed\n";
    for (const auto& [k, s] : surface.cells) {
        os << k.n << ',' << format_double(k.theta) << ',' << format_double(k.alpha) << ',' << format_double(k.lambda)
           << ',' << (k.h ? format_double(*k.h) : std::string("NA")) << ',' << format_double(k.beta) << ','
           << format_double(s.mse) << ',' << format_double(s.n_times_mse) << ',' << s.fail_count << ','
           << s.r_effective << ',' << s.base_seed << '\n';
    }
}

std::string manifest_json(const ExperimentGrid& grid, const MseSurface& surface, bool fast) {
    nlohmann::ordered_json j;
    j["model"] = "poisson";
    j["mode"] = to_string(grid.mode);
    j["grid"] = {{"n", grid.n_values},         {"theta", grid.theta_values}, {"alpha", grid.alpha_values},
                 {"lambda", grid.lambda_values}, {"h", grid.h_values},         {"beta", grid.beta_values}};
    j["replicates"] = grid.replicates;
    j["fast"] = fast;
    j["base_seed"] = grid.base_seed;
    j["seed_schedule"] = {
        {"generator", "mt19937_64, uniform = (next() >> 11) * 2^-53"},
        {"cell_key", "splitmix64(n) ^ splitmix64(bits(theta) + 0x632be59bd9b4e019)"},
        {"replicate_seed", "splitmix64(splitmix64(splitmix64(base_seed) ^ cell_key) ^ replicate_index)"},
        {"sampler", "Poisson inversion by sequential CDF accumulation"},
    };
    j["tolerances"] = {{"tail_eps", kDefaultTailEps}, {"residual_tol", FitOptions{}.residual_tol}};
    j["cells"] = surface.cells.size();
    return j.dump(2) + "\n";
}

void write_file_atomic(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
        out << contents;
        if (!out) throw std::runtime_error("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

}  // namespace sdiv

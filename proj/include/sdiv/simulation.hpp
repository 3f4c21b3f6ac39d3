#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "sdiv/divergence.hpp"
#include "sdiv/estimation.hpp"
#include "sdiv/model.hpp"

namespace sdiv {

inline constexpr std::uint64_t kDefaultBaseSeed = 20150601;
inline constexpr std::size_t kDefaultReplicates = 1000;
inline constexpr std::size_t kFastReplicates = 200;

/// {0.0, 0.1, ..., 1.5}
std::vector<double> default_h_grid();
/// {0, 0.1, 0.25, 0.5, 0.7, 1}
std::vector<double> default_beta_grid();

struct ExperimentGrid {
    std::vector<std::uint64_t> n_values;
    std::vector<double> theta_values;
    std::vector<double> alpha_values;
    std::vector<double> lambda_values;
    std::vector<double> h_values = default_h_grid();
    /// Empty: the empty-cell exponent follows alpha.
    std::vector<double> beta_values;
    std::size_t replicates = kDefaultReplicates;
    std::uint64_t base_seed = kDefaultBaseSeed;
    Mode mode = Mode::Mpsde;
    /// Worker threads; 0 picks hardware_concurrency.
    unsigned threads = 0;

    /// Throws std::invalid_argument on an empty list, R = 0, negative h or beta,
    /// n = 0, non-positive theta, or negative alpha.
    void validate() const;
};

struct CellKey {
    std::uint64_t n;
    double theta;
    double alpha;
    double lambda;
    /// nullopt for Msde cells, which have no penalty.
    std::optional<double> h;
    double beta;

    auto operator<=>(const CellKey&) const = default;
};

struct CellStats {
    double mse = 0.0;
    double n_times_mse = 0.0;
    std::size_t fail_count = 0;
    std::size_t r_effective = 0;
    std::uint64_t base_seed = 0;
    std::uint64_t data_cell_key = 0;
};

struct MseSurface {
    std::map<CellKey, CellStats> cells;
    std::size_t replicates = 0;
    std::uint64_t base_seed = 0;
    Mode mode = Mode::Mpsde;

    const CellStats& at(const CellKey& key) const;
};

/// Estimator used per replicate; nullopt marks a failed replicate.
using ReplicateEstimator = std::function<std::optional<double>(const FrequencyTable&)>;

/// Poisson draws of size n at theta for replicates 0..R-1 under the seed
/// schedule, estimate each, and average squared errors over the successes.
/// Throws AllReplicatesFailed when no replicate succeeds.
CellStats run_mse_cell(std::uint64_t n, double theta, const ReplicateEstimator& estimator, std::size_t replicates,
                       std::uint64_t base_seed);

/// Same, with the minimum (penalized) S-divergence estimator; undefined or
/// non-converged fits count as failures.
CellStats run_mse_cell(std::uint64_t n, double theta, const DivergenceParams& params, Mode mode,
                       std::size_t replicates, std::uint64_t base_seed, const FitOptions& fit_opts = {});

/// Full surface over the grid. Cells where every replicate failed are kept
/// with fail_count = R and a NaN mse.
MseSurface sweep_h(const ExperimentGrid& grid, const FitOptions& fit_opts = {});

/// sweep_h with beta_values (default_beta_grid() if the grid has none) as an
/// extra axis. Requires Mode::Mpsde.
MseSurface sweep_beta(const ExperimentGrid& grid, const FitOptions& fit_opts = {});

struct OptimalH {
    double h;
    double mse;
};

/// Argmin over h of the cells with beta == alpha (or the given beta); ties
/// go to the smaller h. Throws MissingCells when no finite cell matches.
OptimalH optimal_h(const MseSurface& surface, std::uint64_t n, double theta, double alpha, double lambda,
                   std::optional<double> beta = std::nullopt);

struct OptimalHBeta {
    double h;
    double beta;
    double mse;
};

/// Joint argmin over (h, beta); ties go to smaller h, then smaller beta.
OptimalHBeta optimal_h_beta(const MseSurface& surface, std::uint64_t n, double theta, double alpha, double lambda);

/// (MSE(h*) - MSE(h_opt)) / MSE(h_opt) along the beta == alpha slice.
/// Returns 0 when both are zero and +infinity when only MSE(h_opt) is.
double relative_increase(const MseSurface& surface, double h_star, std::uint64_t n, double theta, double alpha,
                         double lambda);

/// One row per cell: n,theta,alpha,lambda,h,beta,mse,n_mse,fail_count,R_eff,base_seed
void write_surface_csv(const MseSurface& surface, std::ostream& os);

/// Grid, replicate count and seed schedule as JSON text.
std::string manifest_json(const ExperimentGrid& grid, const MseSurface& surface, bool fast);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double v);

/// Writes to path.tmp and renames over path.
void write_file_atomic(const std::string& path, const std::string& contents);

}  // namespace sdiv

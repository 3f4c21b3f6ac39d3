#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <sstream>

#include <json.hpp>

#include "sdiv/errors.hpp"
#include "sdiv/simulation.hpp"

using namespace sdiv;

namespace {

ExperimentGrid small_grid() {
    ExperimentGrid g;
    g.n_values = {10};
    g.theta_values = {3.0, 6.0};
    g.alpha_values = {0.0, 0.25};
    g.lambda_values = {-1.0, 0.0};
    g.h_values = {0.0, 0.5, 1.0};
    g.replicates = 40;
    g.base_seed = 99;
    return g;
}

std::string csv_of(const MseSurface& s) {
    std::ostringstream os;
    write_surface_csv(s, os);
    return os.str();
}

MseSurface synthetic_surface(const std::vector<std::pair<double, double>>& h_mse) {
    MseSurface s;
    s.replicates = 10;
    for (auto [h, mse] : h_mse) {
        CellStats c;
        c.mse = mse;
        c.n_times_mse = 10 * mse;
        c.r_effective = 10;
        s.cells.emplace(CellKey{10, 5.0, 0.0, -1.0, h, 0.0}, c);
    }
    return s;
}

}  // namespace

TEST(Grid, Defaults) {
    const auto h = default_h_grid();
    ASSERT_EQ(h.size(), 16u);
    EXPECT_EQ(h.front(), 0.0);
    EXPECT_DOUBLE_EQ(h.back(), 1.5);
    EXPECT_EQ(default_beta_grid(), (std::vector<double>{0.0, 0.1, 0.25, 0.5, 0.7, 1.0}));
    EXPECT_EQ(ExperimentGrid{}.replicates, 1000u);
}

TEST(Grid, Validation) {
    auto g = small_grid();
    EXPECT_NO_THROW(g.validate());
    g.replicates = 0;
    EXPECT_THROW(g.validate(), std::invalid_argument);
    g = small_grid();
    g.h_values = {-0.1};
    EXPECT_THROW(g.validate(), std::invalid_argument);
    g = small_grid();
    g.theta_values.clear();
    EXPECT_THROW(g.validate(), std::invalid_argument);
}

TEST(MseCell, ExactEstimatorHasZeroError) {
    const auto s = run_mse_cell(10, 4.0, [](const FrequencyTable&) { return std::optional<double>(4.0); }, 1, 5);
    EXPECT_EQ(s.mse, 0.0);
    EXPECT_EQ(s.r_effective, 1u);
}

TEST(MseCell, FailuresAreCountedNotImputed) {
    int calls = 0;
    const auto s = run_mse_cell(
        10, 4.0,
        [&](const FrequencyTable& d) -> std::optional<double> {
            ++calls;
            if (d.count(0) > 0) return std::nullopt;
            return d.mean();
        },
        200, 5);
    EXPECT_EQ(calls, 200);
    EXPECT_EQ(s.fail_count + s.r_effective, 200u);
    EXPECT_GT(s.fail_count, 0u);
    EXPECT_EQ(s.n_times_mse, 10.0 * s.mse);
    EXPECT_THROW(run_mse_cell(10, 4.0, [](const FrequencyTable&) { return std::optional<double>(); }, 5, 5),
                 AllReplicatesFailed);
}

TEST(MseCell, CommonRandomNumbersAcrossEstimators) {
    std::mutex mu;
    std::vector<std::map<Support, std::uint64_t>> a, b;
    auto collect = [&](std::vector<std::map<Support, std::uint64_t>>& into, double value) {
        return [&into, &mu, value](const FrequencyTable& d) {
            std::lock_guard lock(mu);
            into.push_back(d.to_map());
            return std::optional<double>(value);
        };
    };
    (void)run_mse_cell(10, 5.0, collect(a, 5.0), 30, 7);
    (void)run_mse_cell(10, 5.0, collect(b, 1.0), 30, 7);
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    EXPECT_EQ(a, b);
}

TEST(MseCell, MsdeFailureAccountingWhenANonPositive) {
    // Poisson support is unbounded, so every sample has empty cells and the
    // ordinary divergence with A <= 0 fails on every replicate.
    EXPECT_THROW(run_mse_cell(10, 5.0, DivergenceParams(0.0, -1.5), Mode::Msde, 20, 3), AllReplicatesFailed);
    auto g = small_grid();
    g.mode = Mode::Msde;
    g.alpha_values = {0.0};
    g.lambda_values = {-1.5, -0.5};
    const auto s = sweep_h(g);
    const auto& undefined = s.at(CellKey{10, 3.0, 0.0, -1.5, std::nullopt, 0.0});
    EXPECT_EQ(undefined.fail_count, g.replicates);
    EXPECT_EQ(undefined.r_effective, 0u);
    EXPECT_TRUE(std::isnan(undefined.mse));
    const auto& fine = s.at(CellKey{10, 3.0, 0.0, -0.5, std::nullopt, 0.0});
    EXPECT_EQ(fine.fail_count, 0u);
    EXPECT_NE(csv_of(s).find(",NA,"), std::string::npos);
}

TEST(Sweep, DeterministicAndComplete) {
    const auto g = small_grid();
    const auto a = sweep_h(g);
    const auto b = sweep_h(g);
    EXPECT_EQ(a.cells.size(), 2u * 2u * 2u * 3u);
    EXPECT_EQ(csv_of(a), csv_of(b));
    for (const auto& [k, c] : a.cells) {
        EXPECT_EQ(c.fail_count + c.r_effective, g.replicates);
        EXPECT_EQ(c.n_times_mse, static_cast<double>(k.n) * c.mse);
        EXPECT_EQ(c.base_seed, 99u);
    }
}

TEST(Sweep, ThreadCountDoesNotChangeResults) {
    auto g = small_grid();
    g.threads = 1;
    const auto one = csv_of(sweep_h(g));
    g.threads = 3;
    EXPECT_EQ(one, csv_of(sweep_h(g)));
}

TEST(Sweep, CellMatchesStandaloneRun) {
    const auto g = small_grid();
    const auto s = sweep_h(g);
    const auto c = run_mse_cell(10, 6.0, DivergenceParams(0.25, -1.0, 0.5), Mode::Mpsde, g.replicates, g.base_seed);
    EXPECT_EQ(s.at(CellKey{10, 6.0, 0.25, -1.0, 0.5, 0.25}).mse, c.mse);
}

TEST(Sweep, BetaSliceIsBitIdentical) {
    auto g = small_grid();
    g.beta_values = {0.0, 0.25, 0.7};
    const auto hs = sweep_h(g);
    const auto bs = sweep_beta(g);
    for (const auto& [k, c] : hs.cells) {
        const auto& other = bs.at(k);
        EXPECT_EQ(c.mse, other.mse);
        EXPECT_EQ(c.fail_count, other.fail_count);
    }
    for (double t : g.theta_values)
        for (double a : g.alpha_values)
            for (double l : g.lambda_values)
                EXPECT_LE(optimal_h_beta(bs, 10, t, a, l).mse, optimal_h(hs, 10, t, a, l).mse);
    g.mode = Mode::Msde;
    EXPECT_THROW(sweep_beta(g), std::invalid_argument);
}

TEST(OptimalH, SingleValueAndParabola) {
    EXPECT_EQ(optimal_h(synthetic_surface({{0.7, 3.0}}), 10, 5.0, 0.0, -1.0).h, 0.7);
    std::vector<std::pair<double, double>> cells;
    for (double h : default_h_grid()) cells.push_back({h, 1.0 + (h - 0.6) * (h - 0.6)});
    const auto o = optimal_h(synthetic_surface(cells), 10, 5.0, 0.0, -1.0);
    EXPECT_DOUBLE_EQ(o.h, 0.6);
    EXPECT_DOUBLE_EQ(o.mse, 1.0);
}

TEST(OptimalH, TiesGoToSmallerH) {
    EXPECT_EQ(optimal_h(synthetic_surface({{0.3, 2.0}, {0.9, 2.0}, {1.2, 2.5}}), 10, 5.0, 0.0, -1.0).h, 0.3);
}

TEST(OptimalH, MissingCells) {
    EXPECT_THROW(optimal_h(synthetic_surface({{0.3, 2.0}}), 20, 5.0, 0.0, -1.0), MissingCells);
}

TEST(RelativeIncrease, Definitions) {
    const auto s = synthetic_surface({{0.0, 2.0}, {0.5, 1.0}, {1.0, 1.2}});
    EXPECT_EQ(relative_increase(s, 0.5, 10, 5.0, 0.0, -1.0), 0.0);
    EXPECT_NEAR(relative_increase(s, 1.0, 10, 5.0, 0.0, -1.0), 0.2, 1e-15);
    EXPECT_GE(relative_increase(s, 0.0, 10, 5.0, 0.0, -1.0), 0.0);
    const auto z = synthetic_surface({{0.0, 0.0}, {0.5, 0.0}, {1.0, 1.0}});
    EXPECT_EQ(relative_increase(z, 0.5, 10, 5.0, 0.0, -1.0), 0.0);
    EXPECT_TRUE(std::isinf(relative_increase(z, 1.0, 10, 5.0, 0.0, -1.0)));
    EXPECT_THROW(relative_increase(s, 0.7, 10, 5.0, 0.0, -1.0), MissingCells);
}

TEST(Sweep, OptimalPenaltyForLambdaMinusOne) {
    ExperimentGrid g;
    g.n_values = {10};
    g.theta_values = {5.0};
    g.alpha_values = {0.0};
    g.lambda_values = {-1.0};
    const auto s = sweep_h(g);
    const auto o = optimal_h(s, 10, 5.0, 0.0, -1.0);
    EXPECT_GE(o.h, 0.0);
    EXPECT_LE(o.h, 1.5);
    EXPECT_NEAR(o.h, 0.4, 0.3 + 1e-12);
}

TEST(Sweep, LargePenaltyPreferredWhenALimitAtNTwenty) {
    ExperimentGrid g;
    g.n_values = {20};
    g.theta_values = {3.0};
    g.alpha_values = {0.5};
    g.lambda_values = {-2.0};
    const auto o = optimal_h(sweep_h(g), 20, 3.0, 0.5, -2.0);
    EXPECT_GE(o.h, 0.8);
}

TEST(Sweep, JointOptimumBeatsNaturalWeight) {
    // lambda = -0.5, alpha = 0: natural weight 1/A = 2 lies outside the h grid,
    // so it is added explicitly.
    ExperimentGrid g;
    g.n_values = {10};
    g.theta_values = {5.0};
    g.alpha_values = {0.0};
    g.lambda_values = {-0.5};
    g.h_values = default_h_grid();
    g.h_values.push_back(2.0);
    g.replicates = 300;
    const auto s = sweep_beta(g);
    const auto best = optimal_h_beta(s, 10, 5.0, 0.0, -0.5);
    EXPECT_LE(best.mse, s.at(CellKey{10, 5.0, 0.0, -0.5, 2.0, 0.0}).mse);
}

TEST(Output, CsvAndManifest) {
    auto g = small_grid();
    g.replicates = 5;
    const auto s = sweep_h(g);
    const auto csv = csv_of(s);
    EXPECT_EQ(csv.substr(0, csv.find('\n')), "n,theta,alpha,lambda,h,beta,mse,n_mse,fail_count,R_eff,base_seed");
    const auto m = nlohmann::json::parse(manifest_json(g, s, true));
    EXPECT_EQ(m["replicates"], 5);
    EXPECT_EQ(m["fast"], true);
    EXPECT_EQ(m["base_seed"], 99);
    EXPECT_EQ(m["cells"], s.cells.size());
}

TEST(Output, FormatDoubleRoundTrips) {
    for (double v : {0.1, 1.0 / 3.0, 3.0588235294117645, 1e-300, 12345.678}) EXPECT_EQ(std::stod(format_double(v)), v);
    EXPECT_EQ(format_double(0.5), "0.5");
    EXPECT_EQ(format_double(2.0), "2");
}

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sdiv/divergence.hpp"
#include "sdiv/errors.hpp"
#include "test_support.hpp"

using namespace sdiv;
using sdiv::testing::BinomialModel;

namespace {

const FrequencyTable kDrosophila({{0, 23}, {1, 7}, {2, 3}, {91, 1}});

// Every value of {0..m} observed at least once.
FrequencyTable random_full_table(std::mt19937_64& g, Support m) {
    std::map<Support, std::uint64_t> c;
    std::uniform_int_distribution<int> cnt(1, 12);
    for (Support x = 0; x <= m; ++x) c[x] = static_cast<std::uint64_t>(cnt(g));
    return FrequencyTable(c);
}

FrequencyTable random_sparse_table(std::mt19937_64& g) {
    std::map<Support, std::uint64_t> c;
    std::uniform_int_distribution<int> xs(0, 12);
    std::uniform_int_distribution<int> cnt(1, 5);
    const int k = std::uniform_int_distribution<int>(1, 6)(g);
    for (int i = 0; i < k; ++i) c[static_cast<Support>(xs(g))] += static_cast<std::uint64_t>(cnt(g));
    return FrequencyTable(c);
}

}  // namespace

TEST(Exponents, TableValues) {
    auto e = derive_exponents(0.0, -2.0);
    EXPECT_DOUBLE_EQ(e.A, -1.0);
    EXPECT_DOUBLE_EQ(e.B, 2.0);
    EXPECT_EQ(e.regime, Regime::General);

    e = derive_exponents(0.5, -2.0);
    EXPECT_EQ(e.A, 0.0);
    EXPECT_DOUBLE_EQ(e.B, 1.5);
    EXPECT_EQ(e.regime, Regime::ALimitZero);

    for (double l : {-2.0, -0.5, 0.0, 3.0}) {
        e = derive_exponents(1.0, l);
        EXPECT_DOUBLE_EQ(e.A, 1.0);
        EXPECT_DOUBLE_EQ(e.B, 1.0);
    }

    e = derive_exponents(0.0, 0.0);
    EXPECT_DOUBLE_EQ(e.A, 1.0);
    EXPECT_EQ(e.B, 0.0);
    EXPECT_EQ(e.regime, Regime::BLimitZero);
}

TEST(Exponents, SumIdentityOnRandomInputs) {
    std::mt19937_64 g(1);
    std::uniform_real_distribution<double> a(0.0, 2.0);
    std::uniform_real_distribution<double> l(-5.0, 5.0);
    for (int i = 0; i < 10000; ++i) {
        const double alpha = a(g);
        const auto e = derive_exponents(alpha, l(g));
        ASSERT_NEAR(e.A + e.B, 1.0 + alpha, 1e-14 * (1.0 + std::abs(e.A) + std::abs(e.B)));
    }
}

TEST(Params, ValidationAndDefaults) {
    EXPECT_THROW(DivergenceParams(-0.1, 0.0), std::invalid_argument);
    EXPECT_THROW(DivergenceParams(0.1, 0.0, -1.0), std::invalid_argument);
    EXPECT_THROW(DivergenceParams(0.1, 0.0, 1.0, -0.5), std::invalid_argument);
    const DivergenceParams p(0.25, -1.0, 0.5);
    EXPECT_EQ(p.beta(), 0.25);
    EXPECT_FALSE(p.has_beta());
    EXPECT_EQ(p.with_beta(0.7).beta(), 0.7);
    EXPECT_EQ(p.with_h(1.5).h(), 1.5);
    EXPECT_TRUE(DivergenceParams(0.0, -1.0).empty_cell_undefined());
    EXPECT_TRUE(DivergenceParams(0.0, -2.0).empty_cell_undefined());
    EXPECT_FALSE(DivergenceParams(0.1, -1.0).empty_cell_undefined());
}

TEST(Kernel, KValues) {
    for (double A : {-1.0, 0.5, 1.0, 2.0}) EXPECT_EQ(k_fn(0.0, Exponents{A, 0.3, Regime::General}), 0.0);
    EXPECT_DOUBLE_EQ(k_fn(1.0, Exponents{1.0, 0.0, Regime::BLimitZero}), 1.0);
    EXPECT_NEAR(k_fn(1.0, Exponents{0.0, 1.0, Regime::ALimitZero}), std::log(2.0), 1e-15);
    // The general form approaches ln 2 from both sides.
    EXPECT_NEAR(k_fn(1.0, Exponents{1e-8, 1.0, Regime::General}), 0.693147, 1e-6);
    EXPECT_NEAR(k_fn(1.0, Exponents{-1e-8, 1.0, Regime::General}), 0.693147, 1e-6);
    EXPECT_THROW(k_fn(-1.0, Exponents{-1.0, 2.0, Regime::General}), DomainError);
    EXPECT_THROW(k_fn(-1.0, Exponents{0.0, 1.0, Regime::ALimitZero}), DomainError);
    EXPECT_DOUBLE_EQ(k_fn(-1.0, Exponents{2.0, -1.0, Regime::General}), -0.5);
}

TEST(Kernel, KhValues) {
    // alpha = 0, lambda = -1.5 gives A = -0.5.
    EXPECT_EQ(k_h_fn(-1.0, DivergenceParams(0.0, -1.5, 0.5)), -0.5);
    EXPECT_EQ(k_h_fn(0.0, DivergenceParams(0.3, -1.0, 1.3)), 0.0);
    // alpha = 0, lambda = -0.5 gives A = 0.5.
    const DivergenceParams p(0.0, -0.5, 0.9);
    EXPECT_NEAR(p.A(), 0.5, 1e-15);
    EXPECT_NEAR(k_h_fn(3.0, p), 2.0, 1e-14);
    EXPECT_EQ(k_h_fn(3.0, p), k_fn(3.0, p));
}

TEST(SDivergence, ZeroWhenDataMatchesModel) {
    const BinomialModel m(1);
    const FrequencyTable d({{0, 7}, {1, 3}});
    const double th[1] = {0.3};
    for (double a : {0.0, 0.25, 1.0})
        for (double l : {-2.0, -1.0, 0.0, 0.5}) EXPECT_NEAR(s_divergence(d, m, th, DivergenceParams(a, l)), 0.0, 1e-15);
}

TEST(SDivergence, PearsonChiSquareHalf) {
    // alpha = 0, lambda = 1: A = 2, B = -1.
    const BinomialModel m(1);
    const FrequencyTable d({{0, 1}, {1, 1}});
    const double th[1] = {0.75};
    const double r[2] = {0.5, 0.5};
    const double f[2] = {0.25, 0.75};
    double pearson = 0.0;
    for (int i = 0; i < 2; ++i) pearson += 0.5 * (r[i] - f[i]) * (r[i] - f[i]) / f[i];
    const double v = s_divergence(d, m, th, DivergenceParams(0.0, 1.0));
    EXPECT_NEAR(v, 0.166667, 1e-6);
    EXPECT_NEAR(v, pearson, 1e-14);
}

TEST(SDivergence, L2AtAlphaOne) {
    const BinomialModel m(1);
    const FrequencyTable d(std::map<Support, std::uint64_t>{{0, 4}});
    const double th[1] = {0.5};
    for (double l : {-2.0, 0.0, 0.7}) EXPECT_NEAR(s_divergence(d, m, th, DivergenceParams(1.0, l)), 0.5, 1e-14);
}

TEST(SDivergence, UndefinedWithEmptyCellsWhenANonPositive) {
    const PoissonModel m;
    const double th[1] = {0.4};
    try {
        (void)s_divergence(kDrosophila, m, th, DivergenceParams(0.0, -2.0));
        FAIL() << "expected EmptyCellUndefined";
    } catch (const EmptyCellUndefined& e) {
        EXPECT_EQ(e.A(), -1.0);
        EXPECT_EQ(e.lambda(), -2.0);
        EXPECT_NE(std::string(e.what()).find("A"), std::string::npos);
    }
    EXPECT_THROW((void)s_divergence(kDrosophila, m, th, DivergenceParams(0.5, -2.0)), EmptyCellUndefined);
    const double v = penalized_s_divergence(kDrosophila, m, th, DivergenceParams(0.0, -2.0, 0.5));
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GE(v, 0.0);
}

TEST(PenalizedDivergence, EqualsOrdinaryWithoutEmptyCells) {
    std::mt19937_64 g(11);
    std::uniform_real_distribution<double> th(0.05, 0.95);
    std::uniform_real_distribution<double> al(0.0, 1.0);
    std::uniform_real_distribution<double> la(-2.0, 1.0);
    std::uniform_real_distribution<double> hh(0.0, 2.0);
    const BinomialModel m(6);
    for (int i = 0; i < 500; ++i) {
        const auto d = random_full_table(g, 6);
        const double t[1] = {th(g)};
        const DivergenceParams p(al(g), la(g), hh(g));
        const double sd = s_divergence(d, m, t, p);
        ASSERT_NEAR(penalized_s_divergence(d, m, t, p), sd, 1e-12 * (1.0 + std::abs(sd)));
    }
}

TEST(PenalizedDivergence, NaturalWeightReproducesOrdinary) {
    std::mt19937_64 g(12);
    std::uniform_real_distribution<double> th(0.3, 12.0);
    std::uniform_real_distribution<double> al(0.0, 1.0);
    std::uniform_real_distribution<double> la(-1.5, 1.0);
    const PoissonModel m;
    int checked = 0;
    while (checked < 500) {
        const double alpha = al(g);
        const double lambda = la(g);
        const auto e = derive_exponents(alpha, lambda);
        if (!(e.A > 1e-3)) continue;
        const auto d = random_sparse_table(g);
        const double t[1] = {th(g)};
        const DivergenceParams p(alpha, lambda, 1.0 / e.A);
        const double sd = s_divergence(d, m, t, p);
        ASSERT_NEAR(penalized_s_divergence(d, m, t, p), sd, 1e-12 * (1.0 + std::abs(sd)));
        ++checked;
    }
}

TEST(Divergences, NonNegativeOnRandomInputs) {
    std::mt19937_64 g(13);
    std::uniform_real_distribution<double> th(0.2, 10.0);
    std::uniform_real_distribution<double> al(0.0, 1.0);
    std::uniform_real_distribution<double> la(-2.0, 1.0);
    std::uniform_real_distribution<double> hh(0.0, 1.5);
    const PoissonModel m;
    for (int i = 0; i < 1000; ++i) {
        const auto d = random_sparse_table(g);
        const double t[1] = {th(g)};
        const DivergenceParams p(al(g), la(g), hh(g));
        const double tol = 1e-13;
        ASSERT_GE(penalized_s_divergence(d, m, t, p), -tol);
        if (!p.empty_cell_undefined()) ASSERT_GE(s_divergence(d, m, t, p), -tol);
    }
}

TEST(Divergences, LimitContinuityInA) {
    // alpha = 0.5: A = 1 + lambda / 2, so lambda = -2 is the A-limit.
    const BinomialModel m(5);
    std::mt19937_64 g(14);
    for (int i = 0; i < 100; ++i) {
        const auto d = random_full_table(g, 5);
        const double t[1] = {std::uniform_real_distribution<double>(0.1, 0.9)(g)};
        const double lim = s_divergence(d, m, t, DivergenceParams(0.5, -2.0));
        for (double A : {1e-6, -1e-6}) {
            const DivergenceParams p(0.5, (A - 1.0) / 0.5);
            ASSERT_EQ(p.regime(), Regime::General);
            ASSERT_LT(std::abs(s_divergence(d, m, t, p) - lim), 1e-6 * (1.0 + std::abs(lim)));
        }
    }
}

TEST(Divergences, LimitContinuityInB) {
    // alpha = 0: B = -lambda. The gap grows like B * sum r log^2(r/f), so the
    // data are drawn from the model rather than placed deep in its tail.
    const PoissonModel m;
    std::mt19937_64 g(15);
    for (int i = 0; i < 100; ++i) {
        const double t[1] = {std::uniform_real_distribution<double>(0.3, 9.0)(g)};
        const auto d = m.sample(t, 20, g());
        const double lim = s_divergence(d, m, t, DivergenceParams(0.0, 0.0));
        for (double B : {1e-6, -1e-6}) {
            const DivergenceParams p(0.0, -B);
            ASSERT_EQ(p.regime(), Regime::General);
            ASSERT_LT(std::abs(s_divergence(d, m, t, p) - lim), 1e-6 * (1.0 + std::abs(lim)));
            const double plim = penalized_s_divergence(d, m, t, DivergenceParams(0.0, 0.0, 0.7));
            ASSERT_LT(std::abs(penalized_s_divergence(d, m, t, p.with_h(0.7)) - plim), 1e-6 * (1.0 + std::abs(plim)));
        }
    }
}

TEST(Divergences, FiniteWithTinyModelProbabilities) {
    // At theta = 0.05 the pmf at x = 91 is far below 1e-300.
    const PoissonModel m;
    for (double t : {0.05, 0.36, 3.0}) {
        const double th[1] = {t};
        for (double A : {-2.0, -1.0, -0.3, 1e-12, 0.4, 1.0, 2.0}) {
            for (double alpha : {0.0, 0.25, 0.5}) {
                const double lambda = (A - 1.0) / (1.0 - alpha);
                const DivergenceParams p(alpha, lambda, 0.5);
                ASSERT_TRUE(std::isfinite(penalized_s_divergence(kDrosophila, m, th, p))) << t << " " << A;
                if (!p.empty_cell_undefined()) ASSERT_TRUE(std::isfinite(s_divergence(kDrosophila, m, th, p)));
            }
        }
    }
}

TEST(Divergences, EmptyCellPowerSumByComplement) {
    const PoissonModel m;
    const double th[1] = {2.0};
    const double c = 1.3;
    double direct = 0.0;
    for (Support x = 0; x < 200; ++x)
        if (kDrosophila.count(x) == 0) direct += std::pow(m.pmf(th, x), c);
    EXPECT_NEAR(empty_cell_power_sum(kDrosophila, m, th, c, 1e-14), direct, 1e-13);
}

TEST(Divergences, BetaChangesOnlyTheEmptyCellTerm) {
    const PoissonModel m;
    const double th[1] = {1.0};
    const DivergenceParams p(0.25, -0.5, 0.8);
    const double base = penalized_s_divergence(kDrosophila, m, th, p);
    const double alt = penalized_s_divergence(kDrosophila, m, th, p.with_beta(0.7));
    const double e1 = empty_cell_power_sum(kDrosophila, m, th, 1.25, kDefaultTailEps);
    const double e2 = empty_cell_power_sum(kDrosophila, m, th, 1.7, kDefaultTailEps);
    EXPECT_NEAR(alt - base, 0.8 * (e2 - e1), 1e-14);
}

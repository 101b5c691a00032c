#include "fxrp/regressions.hpp"
#include "fxrp/simulate.hpp"
#include "support/fixtures.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace fxrp;

namespace {

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no fxrp::Error thrown";
    return ErrorKind::io;
}

double sample_cov(const std::vector<double>& a, const std::vector<double>& b) {
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= a.size();
    mb /= b.size();
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
    return s / a.size();
}

std::vector<double> add(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
    return out;
}

AlignedSeries simulated_market(double phi, double R, double Q, ExpectedSpotChange dse, std::size_t T,
                               std::uint64_t seed, SimulatedPath* path_out = nullptr) {
    const double phis[] = {phi};
    const auto spec = build_arma_spec(1, 0, phis, {}, R, Q, 0.0);
    auto path = simulate(spec, T, seed, dse);
    auto s = build_aligned(synthesize_rates(path, YearMonth{1979, 1}));
    if (path_out) *path_out = std::move(path);
    return s;
}

AlignedSeries random_dataset(std::mt19937_64& rng, std::size_t T) {
    std::normal_distribution<double> z;
    std::vector<RateObservation> obs;
    double ls = 0.3;
    YearMonth d{1990, 1};
    for (std::size_t t = 0; t <= T; ++t, d = d.next()) {
        obs.push_back({d, std::exp(ls), std::exp(ls + 0.002 + 0.005 * z(rng))});
        ls += 0.03 * z(rng);
    }
    return build_aligned(obs);
}

}  // namespace

TEST(Ols, IdentityRegression) {
    const std::vector<double> x{0.3, -1.2, 2.5, 0.0, 4.1, -0.7};
    const auto f = ols(x, x);
    EXPECT_NEAR(f.alpha, 0.0, 1e-14);
    EXPECT_NEAR(f.beta, 1.0, 1e-14);
    EXPECT_NEAR(f.r_squared, 1.0, 1e-14);
    for (double e : f.residuals) EXPECT_NEAR(e, 0.0, 1e-14);
}

TEST(Ols, ExactLine) {
    const std::vector<double> x{1, 2, 3, 4, 5, 6, 7};
    std::vector<double> y;
    for (double v : x) y.push_back(2.0 * v + 1.0);
    const auto f = ols(y, x);
    EXPECT_NEAR(f.alpha, 1.0, 1e-13);
    EXPECT_NEAR(f.beta, 2.0, 1e-13);
}

TEST(Ols, MatchesNormalEquationsOracle) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> z;
    for (int rep = 0; rep < 20; ++rep) {
        Eigen::MatrixXd X(50, 2);
        Eigen::VectorXd Y(50);
        std::vector<double> x(50), y(50);
        for (int i = 0; i < 50; ++i) {
            x[i] = z(rng);
            y[i] = 0.4 - 1.3 * x[i] + z(rng);
            X(i, 0) = 1.0;
            X(i, 1) = x[i];
            Y(i) = y[i];
        }
        const Eigen::Vector2d b = (X.transpose() * X).inverse() * (X.transpose() * Y);
        const auto f = ols(y, x);
        EXPECT_NEAR(f.alpha, b(0), 1e-10);
        EXPECT_NEAR(f.beta, b(1), 1e-10);
        const Eigen::VectorXd e = Y - X * b;
        const double s2 = e.squaredNorm() / 48.0;
        const Eigen::Matrix2d V = s2 * (X.transpose() * X).inverse();
        EXPECT_NEAR(f.se_beta, std::sqrt(V(1, 1)), 1e-10);
        EXPECT_NEAR(f.se_alpha, std::sqrt(V(0, 0)), 1e-10);
    }
}

TEST(Ols, InvariantsHold) {
    std::mt19937_64 rng(9);
    std::normal_distribution<double> z;
    std::vector<double> x(200), y(200);
    for (int i = 0; i < 200; ++i) {
        x[i] = 1e-3 * z(rng);
        y[i] = 0.02 * z(rng);
    }
    const auto f = ols(y, x);
    EXPECT_DOUBLE_EQ(f.t_beta, f.beta / f.se_beta);
    double sum = 0.0, cross = 0.0, scale = 0.0;
    for (int i = 0; i < 200; ++i) {
        sum += f.residuals[i];
        cross += f.residuals[i] * x[i];
        scale += std::abs(f.residuals[i] * x[i]);
    }
    EXPECT_LE(std::abs(sum), 1e-12);
    EXPECT_LE(std::abs(cross), 1e-8 * scale);
}

TEST(Ols, MatchesFrozenStatsmodels) {
    const auto cols = fxrp::testing::read_columns(FXRP_FIXTURE_DIR "/reference_series.csv");
    const auto f = ols(cols.at("ar1"), cols.at("x"));
    EXPECT_NEAR(f.alpha, 0.028324928986405415, 1e-10);
    EXPECT_NEAR(f.beta, 0.05920482287620107, 1e-10);
    EXPECT_NEAR(f.se_beta, 0.06736929348505272, 1e-10);
    EXPECT_NEAR(f.p_two_tail_beta, 0.3802122374017354, 1e-9);
}

TEST(Ols, RobustStandardErrorsMatchSandwich) {
    std::mt19937_64 rng(10);
    std::normal_distribution<double> z;
    const int n = 80;
    std::vector<double> x(n), y(n);
    Eigen::MatrixXd X(n, 2);
    for (int i = 0; i < n; ++i) {
        x[i] = z(rng);
        y[i] = 0.5 * x[i] + (1.0 + std::abs(x[i])) * z(rng);
        X(i, 0) = 1.0;
        X(i, 1) = x[i];
    }
    const auto f = ols(y, x, {.robust = true});
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(2, 2);
    for (int i = 0; i < n; ++i) meat += f.residuals[i] * f.residuals[i] * X.row(i).transpose() * X.row(i);
    const Eigen::MatrixXd bread = (X.transpose() * X).inverse();
    const Eigen::MatrixXd V = bread * meat * bread;
    EXPECT_NEAR(f.se_alpha, std::sqrt(V(0, 0)), 1e-12);
    EXPECT_NEAR(f.se_beta, std::sqrt(V(1, 1)), 1e-12);
    EXPECT_NEAR(f.beta, ols(y, x).beta, 1e-15);
}

TEST(Ols, Errors) {
    const std::vector<double> c(10, 2.0), y(10, 1.0), shorter(9, 1.0);
    EXPECT_EQ(kind_of([&] { ols(y, c); }), ErrorKind::singular_design);
    EXPECT_EQ(kind_of([&] { ols(shorter, c); }), ErrorKind::parameter);
    const std::vector<double> two{1.0, 2.0};
    EXPECT_EQ(kind_of([&] { ols(two, two); }), ErrorKind::insufficient_data);
}

TEST(RegressionProperty, FamaAndAdjustedIdentities) {
    std::mt19937_64 rng(12);
    for (int rep = 0; rep < 100; ++rep) {
        const auto s = random_dataset(rng, 60 + rep);
        const auto [f1, f2] = run_fama(s);
        const auto [f3, f4] = run_adjusted(s);
        EXPECT_NEAR(f1.alpha + f2.alpha, 0.0, 1e-10);
        EXPECT_NEAR(f1.beta + f2.beta, 1.0, 1e-10);
        EXPECT_NEAR(f4.beta - (f1.beta - f2.beta), 0.0, 1e-10);
        EXPECT_NEAR(f4.alpha - (f1.alpha - f2.alpha), 0.0, 1e-10);
        for (std::size_t t = 0; t < s.t_count(); ++t) {
            EXPECT_NEAR(f1.residuals[t] + f2.residuals[t], 0.0, 1e-10);
            EXPECT_NEAR(f4.residuals[t] - (f1.residuals[t] - f2.residuals[t]), 0.0, 1e-10);
        }
    }
}

TEST(RegressionProperty, Beta3IsSignFlipOfBeta1) {
    std::mt19937_64 rng(13);
    for (int rep = 0; rep < 50; ++rep) {
        const auto s = random_dataset(rng, 100);
        const auto f1 = run_fama(s).fit1;
        const auto f3 = run_adjusted(s).fit3;
        EXPECT_NEAR(f3.beta, -f1.beta, 1e-10);
        EXPECT_NEAR(f3.alpha, -f1.alpha, 1e-12);
        EXPECT_NEAR(f3.se_beta, f1.se_beta, 1e-12);
        EXPECT_NEAR(f3.se_alpha, f1.se_alpha, 1e-12);
        EXPECT_NEAR(f3.t_beta, -f1.t_beta, 1e-9);
        EXPECT_NEAR(f3.p_two_tail_beta, f1.p_two_tail_beta, 1e-12);
        for (std::size_t t = 0; t < s.t_count(); ++t) EXPECT_NEAR(f3.residuals[t], -f1.residuals[t], 1e-12);
    }
}

TEST(OneTail, HalvesTwoTailForPositiveT) {
    EXPECT_NEAR(one_tail_upper(0.000270643, 3.7), 0.0001353215, 1e-12);
    EXPECT_NEAR(one_tail_upper(0.2, -1.3), 0.9, 1e-15);
}

TEST(Verdict, RejectsBadLevel) {
    std::mt19937_64 rng(14);
    const auto s = random_dataset(rng, 100);
    EXPECT_EQ(kind_of([&] { test_time_varying_premia(s, 0.0); }), ErrorKind::parameter);
    EXPECT_EQ(kind_of([&] { test_time_varying_premia(s, 1.0); }), ErrorKind::parameter);
}

TEST(Verdict, ConjunctionOfItsParts) {
    std::mt19937_64 rng(15);
    for (int rep = 0; rep < 20; ++rep) {
        const auto s = random_dataset(rng, 200);
        const auto v = test_time_varying_premia(s, 0.05);
        const bool expect = v.p_beta3_two_tail < 0.05 && v.p_beta4_one_tail < 0.05 &&
                            v.resid_adf_beta3.p_value < 0.05 && v.resid_adf_beta4.p_value < 0.05;
        EXPECT_EQ(v.premia_exist_and_vary, expect);
        EXPECT_EQ(v.reject_level, 0.05);
    }
}

TEST(VerdictMonteCarlo, Beta3SizeUnderZeroPremium) {
    int insignificant = 0;
    const int seeds = 300;
    for (int seed = 0; seed < seeds; ++seed) {
        const auto s = simulated_market(0.0, 7.27e-4, 0.0, {0.0, 0.006}, 446, 1000 + seed);
        if (test_time_varying_premia(s).p_beta3_two_tail >= 0.05) ++insignificant;
    }
    EXPECT_GE(insignificant, 276);  // 95% nominal, about -2.5 sd
    EXPECT_LE(insignificant, 294);
}

TEST(VerdictMonteCarlo, PowerWhenPremiumDominates) {
    int verdicts = 0;
    for (int seed = 0; seed < 100; ++seed) {
        const auto s = simulated_market(0.55, 7.27e-4, 1.12e-4, {0.0, 0.002}, 446, 2000 + seed);
        if (test_time_varying_premia(s).premia_exist_and_vary) ++verdicts;
    }
    EXPECT_GE(verdicts, 95);
}

TEST(PopulationSlopes, Beta1ConvergesToComponentRatio) {
    SimulatedPath path;
    const std::size_t T = 50'000;
    const auto s = simulated_market(0.55, 2e-4, 1.12e-4, {0.3, 0.006}, T, 77, &path);
    const auto& dse = *path.spot_chg_e;
    const auto fs = add(path.rp, dse);
    const double target = (sample_cov(path.rp, path.rp) + sample_cov(path.rp, dse)) / sample_cov(fs, fs);
    const double mc_sd = std::sqrt(sample_cov(path.re, path.re) / sample_cov(fs, fs) / T);
    EXPECT_LE(std::abs(run_fama(s).fit1.beta - target), 4.0 * mc_sd);
}

TEST(PopulationSlopes, Beta4DecomposesExactly) {
    // beta4 - (var rp - var dse) / var fs = 2 cov(re, fs) / var fs in any sample.
    SimulatedPath path;
    const auto s = simulated_market(0.55, 7.27e-4, 1.12e-4, {0.0, 0.006}, 5000, 21, &path);
    const auto& dse = *path.spot_chg_e;
    const auto fs = add(path.rp, dse);
    const double vfs = sample_cov(fs, fs);
    const double target = (sample_cov(path.rp, path.rp) - sample_cov(dse, dse)) / vfs;
    const double noise = 2.0 * sample_cov(path.re, fs) / vfs;
    EXPECT_NEAR(run_adjusted(s).fit4.beta, target + noise, 1e-8);
}

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "acov/bounds.hpp"
#include "acov/estimators.hpp"
#include "oracles.hpp"

using namespace acov;

namespace {

ModelSpec var1(double a, Eigen::Index p) {
    return ModelSpec::var_scaled_identity({a}, InnovationSpec::gaussian_identity(p));
}

}  // namespace

TEST(SampleAutocov, MatchesLoopOracle)
{
    std::mt19937_64 g(11);
    for (int trial = 0; trial < 50; ++trial) {
        const Matrix y = oracle::random_matrix(g, 5, 7);
        for (int m = 0; m < 7; ++m) {
            EXPECT_LE((sample_autocov(y, m) - oracle::autocov_loop(y, m)).cwiseAbs().maxCoeff(), 1e-12);
        }
    }
    const Matrix y = oracle::random_matrix(g, 5, 7);
    EXPECT_LE((sample_autocov(y, 2) - oracle::autocov_loop(y, 2)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SampleAutocov, SmallExamples)
{
    Matrix y(3, 2);
    y << 1, 4, 2, 5, 3, 6;
    EXPECT_EQ(sample_autocov(y, 1), Matrix(y.col(0) * y.col(1).transpose()));

    Vector v(3);
    v << 0.5, -1.0, 2.0;
    const Matrix c = v.replicate(1, 9);
    for (std::size_t m = 0; m < 9; ++m) EXPECT_TRUE(sample_autocov(c, m).isApprox(v * v.transpose(), 1e-14));

    std::mt19937_64 g(1);
    const Matrix s0 = sample_autocov(oracle::random_matrix(g, 4, 30), 0);
    EXPECT_EQ(s0, s0.transpose());
    EXPECT_THROW(sample_autocov(y, 2), InputError);
}

TEST(SampleAutocov, PathOverload)
{
    const SeriesPath path = simulate(var1(0.3, 3), 40, 2);
    EXPECT_EQ(sample_autocov(path, 3).eigen(), sample_autocov(path.data, 3));
}

TEST(Deviation, Examples)
{
    std::mt19937_64 g(12);
    const DenseMatrix pop(oracle::random_matrix(g, 4, 4));
    EXPECT_EQ(deviation_spectral(pop, pop), 0.0);
    for (double c : {-3.0, 0.25, 7.0}) {
        const Vector u = oracle::random_unit(g, 4);
        const Vector v = oracle::random_unit(g, 4);
        const DenseMatrix est(Matrix(pop.eigen() + c * u * v.transpose()));
        EXPECT_NEAR(deviation_spectral(est, pop), std::abs(c), 1e-12 * std::abs(c));
    }
    EXPECT_THROW(deviation_spectral(pop, DenseMatrix::zeros(3, 4)), InputError);
}

TEST(Deviation, DilationOracle)
{
    std::mt19937_64 g(13);
    for (int t = 0; t < 100; ++t) {
        const Matrix a = oracle::random_matrix(g, 5, 5);
        const Matrix b = oracle::random_matrix(g, 5, 5);
        Matrix dil = Matrix::Zero(10, 10);
        dil.topRightCorner(5, 5) = a - b;
        dil.bottomLeftCorner(5, 5) = (a - b).transpose();
        Eigen::SelfAdjointEigenSolver<Matrix> es(dil, Eigen::EigenvaluesOnly);
        EXPECT_NEAR(deviation_spectral(DenseMatrix(a), DenseMatrix(b)), es.eigenvalues().maxCoeff(), 1e-10);
    }
}

TEST(Kappa, IdentityAndRankOne)
{
    for (Eigen::Index p : {1, 3, 8}) {
        const KappaPair k = kappa_pair(SymmetricMatrix::identity(p), KappaMode::gaussian_exact);
        EXPECT_NEAR(k.kappa1, std::sqrt(8.0 / 3.0), 1e-12);
        EXPECT_NEAR(k.kappa_star * k.kappa_star, 8.0 / 3.0 * p, 1e-10);
        EXPECT_NEAR(k.r_star(), double(p), 1e-10);
    }
    Vector d = Vector::Zero(5);
    d(0) = 1.0;
    const KappaPair k = kappa_pair(SymmetricMatrix::diagonal(d), KappaMode::enumerate);
    EXPECT_NEAR(k.kappa_star, k.kappa1, 1e-12);
    EXPECT_NEAR(k.r_star(), 1.0, 1e-12);
}

TEST(Kappa, Invariants)
{
    std::mt19937_64 g(14);
    for (int t = 0; t < 50; ++t) {
        const int p = 2 + t % 9;
        const Matrix b = oracle::random_matrix(g, p, p);
        const SymmetricMatrix s(Matrix(b * b.transpose()));
        const KappaPair e = kappa_pair(s, KappaMode::enumerate);
        const KappaPair tr = kappa_pair(s, KappaMode::trace_proxy);
        EXPECT_GE(e.kappa_star * e.kappa_star, e.kappa1 * e.kappa1 * (1 - 1e-12));
        EXPECT_GE(e.kappa_star * e.kappa_star, 8.0 / 3.0 * s.trace() * (1 - 1e-12));
        EXPECT_NEAR(tr.kappa_star * tr.kappa_star, 8.0 / 3.0 * s.trace(), 1e-9 * s.trace());
        EXPECT_EQ(e.kappa_star, kappa_pair(s, KappaMode::gaussian_exact).kappa_star);
    }
    EXPECT_THROW(kappa_pair(SymmetricMatrix::identity(21), KappaMode::enumerate), CapabilityError);
    EXPECT_NO_THROW(kappa_pair(SymmetricMatrix::identity(21), KappaMode::trace_proxy));
    EXPECT_THROW(kappa_pair(SymmetricMatrix(Matrix(-Matrix::Identity(2, 2))), KappaMode::enumerate), DomainError);
}

TEST(LinearFitTest, ExactLine)
{
    const LinearFit f = linear_fit({1, 2, 3, 4}, {3, 5, 7, 9});
    EXPECT_NEAR(f.slope, 2.0, 1e-14);
    EXPECT_NEAR(f.intercept, 1.0, 1e-14);
    EXPECT_NEAR(f.r2, 1.0, 1e-14);
    EXPECT_NEAR(f.slope_se, 0.0, 1e-14);
    EXPECT_THROW(linear_fit({1}, {1}), InputError);
    EXPECT_THROW(linear_fit({1, 1}, {1, 2}), InputError);
}

TEST(Tau, ZeroCoefficientGivesZeros)
{
    const TauEstimate t = tau_hat(var1(0.0, 3), 10, {1, 2, 3, 4}, 1.0, 30, 1);
    for (double v : t.values) EXPECT_EQ(v, 0.0);
    EXPECT_TRUE(t.fit_skipped());
}

TEST(Tau, Var1RateMatchesContraction)
{
    std::vector<std::size_t> lags;
    for (std::size_t k = 1; k <= 12; ++k) lags.push_back(k);
    const TauEstimate t = tau_hat(var1(0.6, 4), 20, lags, 1.0, 2000, 99, 0);
    for (double v : t.values) EXPECT_GE(v, 0.0);
    EXPECT_NEAR(t.fit_rate, std::log(0.6), 0.1);
    EXPECT_GT(t.fit_r2, 0.99);
}

TEST(Tau, ArchDecaysAtLeastAsFastAsContraction)
{
    const ModelSpec spec = ModelSpec::arch(DenseMatrix(Matrix(0.4 * Matrix::Identity(3, 3))), 0.4, 0.3, 1.0,
                                           InnovationSpec::gaussian_identity(3));
    const TauEstimate t = tau_hat(spec, 20, {1, 2, 3, 4, 5, 6, 7, 8}, 1.0, 500, 5, 0);
    EXPECT_LE(t.fit_rate, std::log(0.7) + 0.1);
}

TEST(Tau, RejectsBadInput)
{
    EXPECT_THROW(tau_hat(var1(0.5, 2), 10, {1, 2}, 1.0, 29, 1), InputError);
    EXPECT_THROW(tau_hat(var1(0.5, 2), 10, {2, 2}, 1.0, 30, 1), InputError);
    EXPECT_THROW(tau_hat(var1(0.5, 2), 10, {}, 1.0, 30, 1), InputError);
}

TEST(Tau, WorkerCountDoesNotChangeResult)
{
    const auto a = tau_hat(var1(0.5, 2), 10, {1, 2, 3}, 1.0, 64, 7, 1);
    const auto b = tau_hat(var1(0.5, 2), 10, {1, 2, 3}, 1.0, 64, 7, 8);
    EXPECT_EQ(a.values, b.values);
}

TEST(NuWindows, IidSignsGiveOne)
{
    CounterRng rng(3, Stream::innovation, 0);
    std::vector<std::vector<Matrix>> samples(4000, std::vector<Matrix>(32, Matrix(1, 1)));
    for (auto& rep : samples)
        for (auto& x : rep) x(0, 0) = rng.sign();
    EXPECT_NEAR(nu_squared_windows(samples), 1.0, 0.1);
}

TEST(NuWindows, IidMatricesCollapseToSecondMoment)
{
    // Y ~ N(0, I_2): E (YY^T - I)^2 = (p + 1) I.
    const double est = nu_squared_window_estimate(var1(0.0, 2), 16, 1e9, 0, 4000, 21, 0);
    EXPECT_NEAR(est, 3.0, 0.45);
}

TEST(NuWindows, WindowGrid)
{
    EXPECT_EQ(window_lengths(10), (std::vector<std::size_t>{1, 2, 4, 8, 10}));
    EXPECT_EQ(window_lengths(8), (std::vector<std::size_t>{1, 2, 4, 8}));
    EXPECT_EQ(window_starts(10, 8, 8), (std::vector<std::size_t>{0, 1, 2}));
    const auto s = window_starts(100, 1, 8);
    EXPECT_EQ(s.size(), 8u);
    EXPECT_EQ(s.front(), 0u);
    EXPECT_EQ(s.back(), 99u);
    EXPECT_THROW(nu_squared_window_estimate(var1(0.0, 2), 16, 1.0, 0, 99, 1), InputError);
}

TEST(NuWindows, TruncationCapsNorm)
{
    std::mt19937_64 g(15);
    const Matrix y = 3 * oracle::random_matrix(g, 3, 20);
    for (std::size_t m : {0, 2}) {
        for (const Matrix& x : truncated_products(y, m, 1.5)) {
            EXPECT_LE(oracle::svd_norm(x), 1.5 * (1 + 1e-12));
        }
    }
    EXPECT_EQ(truncated_products(y, 2, 1.0).front().rows(), 6);
}

TEST(MonteCarlo, DegenerateInnovationsGiveZero)
{
    const InnovationSpec zero(InnovationKind::gaussian, SymmetricMatrix(Matrix(Matrix::Zero(3, 3))));
    const auto stats = monte_carlo_deviation(ModelSpec::var_scaled_identity({0.5}, zero), 64, 1, 30, 1);
    for (double d : stats.raw) EXPECT_EQ(d, 0.0);
    EXPECT_EQ(stats.std_error, 0.0);
}

TEST(MonteCarlo, StatsInvariants)
{
    const auto stats = monte_carlo_deviation(var1(0.3, 3), 128, 1, 100, 4);
    EXPECT_GE(stats.std_error, 0.0);
    double prev = 0.0;
    for (const auto& [q, v] : stats.quantiles) {
        EXPECT_GE(v, prev);
        prev = v;
    }
    EXPECT_EQ(stats.population_source, "exact");
    EXPECT_EQ(stats.raw.size(), 100u);
    EXPECT_THROW(monte_carlo_deviation(var1(0.3, 3), 128, 1, 29, 4), InputError);
    EXPECT_THROW(monte_carlo_deviation(var1(0.3, 3), 128, 128, 30, 4), InputError);
}

TEST(MonteCarlo, ReferencePathForNonVar1)
{
    const auto spec = ModelSpec::banna(0.5, 1.0, InnovationSpec::gaussian_identity(2));
    const auto stats = monte_carlo_deviation(spec, 64, 0, 30, 4);
    EXPECT_EQ(stats.population_source, "reference-path");
    EXPECT_EQ(stats.reference_length, 50u * 64u);
}

TEST(MonteCarlo, NearestRank)
{
    const std::vector<double> s{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    EXPECT_EQ(nearest_rank(s, 0.5), 5);
    EXPECT_EQ(nearest_rank(s, 0.9), 9);
    EXPECT_EQ(nearest_rank(s, 0.95), 10);
    EXPECT_EQ(nearest_rank(s, 0.0), 1);
}

TEST(MonteCarlo, MeanInvariantUnderSeed)
{
    const auto a = monte_carlo_deviation(var1(0.0, 4), 512, 0, 200, 1, 0);
    const auto b = monte_carlo_deviation(var1(0.0, 4), 512, 0, 200, 2, 0);
    EXPECT_LE(std::abs(a.mean - b.mean), 3 * std::hypot(a.std_error, b.std_error));
}

TEST(MonteCarlo, IidGaussianBelowGaussianBound)
{
    const auto stats = monte_carlo_deviation(var1(0.0, 4), 1024, 0, 200, 3, 0);
    const double bound = gaussian_moment_bound(std::vector<DenseMatrix>{DenseMatrix::identity(4)}, 1024);
    EXPECT_LE(stats.mean, bound);
    const double scale = std::sqrt(4.0 / 1024.0);
    RecordProperty("mean_over_scale", std::to_string(stats.mean / scale));
    EXPECT_GT(stats.mean, 0.0);
}

TEST(MonteCarlo, QuadruplingNHalvesDeviation)
{
    const auto a = monte_carlo_deviation(var1(0.0, 4), 1024, 0, 300, 8, 0);
    const auto b = monte_carlo_deviation(var1(0.0, 4), 4096, 0, 300, 8, 0, 1);
    EXPECT_NEAR(a.mean / b.mean, 2.0, 0.5);
}

TEST(MonteCarlo, WorkerCountDoesNotChangeResult)
{
    const auto a = monte_carlo_deviation(var1(0.4, 3), 128, 2, 40, 6, 1, 5);
    const auto b = monte_carlo_deviation(var1(0.4, 3), 128, 2, 40, 6, 8, 5);
    EXPECT_EQ(a.raw, b.raw);
    EXPECT_EQ(a.mean, b.mean);
}

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "acov/bounds.hpp"
#include "acov/estimators.hpp"
#include "acov/models.hpp"
#include "oracles.hpp"

using namespace acov;

namespace {

BoundParams unit_params() {
    return BoundParams{};
}

BoundParams random_params(std::mt19937_64& g) {
    std::uniform_real_distribution<double> u(0.1, 3.0);
    BoundParams bp;
    bp.kappa1 = u(g);
    bp.kappa_star = bp.kappa1 * (1.0 + u(g));
    bp.gamma1 = u(g);
    bp.gamma2 = u(g);
    bp.gamma3 = u(g);
    bp.gamma4 = u(g);
    bp.epsilon = u(g);
    bp.c_universal = u(g);
    bp.c_prime = u(g);
    return bp;
}

void expect_rel(double got, double want, double tol = 1e-10) {
    EXPECT_NEAR(got, want, tol * std::max(1.0, std::abs(want)));
}

}  // namespace

TEST(MainBound, Examples)
{
    for (std::size_t n : {10, 100, 5000}) {
        const double ln = std::log(double(n));
        expect_rel(main_moment_bound(unit_params(), n, 0, 1), std::sqrt(1.0 / n) + ln * ln * ln / n);
    }
    BoundParams bp;
    bp.kappa_star = std::sqrt(2.0);
    const double lep = 1.0 + std::log(10.0);
    expect_rel(main_moment_bound(bp, 1000, 0, 10),
               std::sqrt(2 * lep / 1000) + 2 * lep * std::pow(std::log(1e4), 3) / 1000);
    // 0.0813 + 5.160 rounded; the unrounded sum is 5.2420
    EXPECT_NEAR(main_moment_bound(bp, 1000, 0, 10), 5.241, 1.5e-3);
    BoundParams twice = bp;
    twice.kappa1 = 2.0;
    twice.kappa_star = 2.0 * bp.kappa_star;
    expect_rel(main_moment_bound(twice, 1000, 0, 10), 4.0 * main_moment_bound(bp, 1000, 0, 10));
    EXPECT_THROW(main_moment_bound(bp, 10, 10, 2), InputError);
}

TEST(GaussianBound, IidExample)
{
    const std::vector<DenseMatrix> seq{DenseMatrix::identity(4)};
    EXPECT_NEAR(gaussian_moment_bound(seq, 100), 0.16 + 4.0 * std::sqrt(0.08), 1e-12);
    EXPECT_NEAR(gaussian_moment_bound(seq, 100), 1.2914, 1e-4);
}

TEST(GaussianBound, Homogeneous)
{
    std::mt19937_64 g(21);
    const Matrix a = 0.3 * oracle::random_matrix(g, 3, 3);
    const SymmetricMatrix s0 = stationary_var1_covariance(DenseMatrix(a), SymmetricMatrix::identity(3));
    std::vector<DenseMatrix> seq, scaled;
    for (std::size_t m = 0; m < 40; ++m) {
        seq.push_back(var1_autocovariance(DenseMatrix(a), s0, m));
        scaled.push_back(DenseMatrix(Matrix(2.5 * seq.back().eigen())));
    }
    expect_rel(gaussian_moment_bound(scaled, 500), 2.5 * gaussian_moment_bound(seq, 500), 1e-12);
}

TEST(GaussianBound, Var1AgainstOracle)
{
    const DenseMatrix a(Matrix(0.5 * Matrix::Identity(4, 4)));
    const SymmetricMatrix s0 = stationary_var1_covariance(a, SymmetricMatrix::identity(4));
    std::vector<oracle::Mat> seq;
    for (std::size_t m = 0; m < 1024; ++m) seq.push_back(var1_autocovariance(a, s0, m).eigen());
    const double lib = gaussian_moment_bound([&](std::size_t m) { return var1_autocovariance(a, s0, m); }, 1024);
    expect_rel(lib, oracle::gau_bound(seq, 1024));
}

TEST(GaussianBound, RejectsNonPsd)
{
    EXPECT_THROW(gaussian_moment_bound(std::vector<DenseMatrix>{DenseMatrix(Matrix(-Matrix::Identity(2, 2)))}, 10),
                 DomainError);
}

TEST(Theorem22, Examples)
{
    for (int p : {1, 4, 16})
        for (std::size_t n : {64, 4096}) {
            const double r = double(p) / n;
            expect_rel(theorem22_bound(SymmetricMatrix::identity(p), n, 0, 1.0), std::sqrt(r) + r);
        }
    EXPECT_EQ(theorem22_bound(SymmetricMatrix::identity(16), 4096, 0, 1.0), 0.06640625);
    const SymmetricMatrix s = SymmetricMatrix::diagonal((Vector(3) << 2, 1, 0.5).finished());
    const double r = effective_rank(s);
    const double lead = theorem22_bound(s, 100, 0, 1.0) - 2.0 * r / 100;
    const double lead4 = theorem22_bound(s, 400, 0, 1.0) - 2.0 * r / 400;
    expect_rel(lead4, lead / 2);
}

TEST(MDelta, Examples)
{
    BoundParams bp;
    bp.kappa_star = 2.0;
    bp.gamma1 = 4.0;
    EXPECT_NEAR(m_delta(bp, 100, 0, 1.0), 4 * std::log(100.0), 1e-12);
    EXPECT_NEAR(m_delta(bp, 100, 0, 1.0), 18.42, 5e-3);
    BoundParams flat;
    flat.gamma1 = 0.0;
    EXPECT_EQ(m_delta(flat, 2, 0, 1.0), 1.0);
    double prev = 0;
    for (double d : {1.0, 0.5, 0.1, 1e-3, 1e-9}) {
        const double v = m_delta(bp, 100, 0, d);
        EXPECT_GE(v, prev);
        prev = v;
    }
    EXPECT_THROW(m_delta(bp, 100, 0, 0.0), DomainError);
}

TEST(TailBound, Examples)
{
    BoundParams bp;
    EXPECT_EQ(tail_terms(bp, 100, 0, 3, 0.1).a2, 205209.0);
    for (std::size_t p : {1, 5}) EXPECT_DOUBLE_EQ(tail_bound(0.0, 0.05, bp, 100, 1, p), 2.0 * p + 0.05);
    double prev = tail_bound(0.0, 0.05, bp, 1000, 2, 4);
    for (double x = 0.5; x < 200; x *= 1.7) {
        const double v = tail_bound(x, 0.05, bp, 1000, 2, 4);
        EXPECT_LT(v, prev);
        prev = v;
    }
    EXPECT_THROW(tail_bound(-1.0, 0.05, bp, 10, 0, 1), DomainError);
}

TEST(PsiTilde, Examples)
{
    EXPECT_NEAR(psi_tilde(1.0, 1e12, 16, 2), 4.0, 1e-12);
    const double psi2 = 8 * std::log(std::pow(16.0, 6) * 2);
    EXPECT_NEAR(psi2, 138.63, 5e-3);
    EXPECT_NEAR(psi_tilde(1.0, psi2, 16, 2), 4.0, 1e-12);
    double prev = psi_tilde(1.0, 0.01, 64, 3);
    for (double s = 0.02; s < 1e4; s *= 2) {
        const double v = psi_tilde(1.0, s, 64, 3);
        EXPECT_LE(v, prev);
        prev = v;
    }
    EXPECT_LE(psi_tilde(1.0, 0.5, 64, 3), psi_tilde(1.0, 0.5, 128, 3));
    EXPECT_LE(psi_tilde(1.0, 0.5, 64, 3), psi_tilde(1.0, 0.5, 64, 9));
    // psi1 below 1/p is lifted to 1/p
    EXPECT_EQ(psi_tilde(1e-6, 0.5, 64, 4), psi_tilde(0.25, 0.5, 64, 4));
}

TEST(Bernstein, Examples)
{
    const double psi2 = 8 * std::log(std::pow(16.0, 6) * 2);
    const MixingParams mp{1.0, psi2, 1.0, 1.0};
    EXPECT_EQ(bernstein_tail(0.0, mp, 16, 2), 2.0);
    const double denom = 8 * (225.0 * 16 + 3600 / psi2) + 2 * 100 * 4;
    EXPECT_NEAR(denom, 29807.8, 0.1);
    EXPECT_NEAR(bernstein_tail(100.0, mp, 16, 2), 2 * std::exp(-10000 / denom), 1e-12);
    EXPECT_NEAR(bernstein_tail(100.0, mp, 16, 2), 1.430, 1e-3);
}

TEST(Bernstein, Monotone)
{
    const MixingParams base{0.5, 2.0, 1.5, 3.0};
    double prev = bernstein_tail(0.0, base, 64, 3);
    for (double x = 1; x < 1e4; x *= 1.5) {
        const double v = bernstein_tail(x, base, 64, 3);
        EXPECT_LE(v, prev);
        prev = v;
    }
    MixingParams more = base;
    more.nu_sq = 6.0;
    EXPECT_GE(bernstein_tail(200, more, 64, 3), bernstein_tail(200, base, 64, 3));
    more = base;
    more.bound_m = 3.0;
    EXPECT_GE(bernstein_tail(200, more, 64, 3), bernstein_tail(200, base, 64, 3));
    EXPECT_GE(bernstein_tail(200, base, 64, 6), bernstein_tail(200, base, 64, 3));
}

TEST(NuSquared, Examples)
{
    BoundParams bp;
    bp.gamma1 = 0.0;
    bp.gamma3 = 0.0;
    bp.gamma2 = 100.0;
    bp.gamma4 = std::log(2.0);
    EXPECT_NEAR(nu_squared_analytic_bound(bp, 0), 6.0, 1e-12);
    BoundParams more = bp;
    more.gamma1 = 1.0;
    BoundParams most = bp;
    most.gamma1 = 2.0;
    const double d1 = nu_squared_analytic_bound(more, 0) - nu_squared_analytic_bound(bp, 0);
    const double d2 = nu_squared_analytic_bound(most, 0) - nu_squared_analytic_bound(more, 0);
    EXPECT_NEAR(d1, d2, 1e-12);
    EXPECT_GT(d1, 0);
    for (std::size_t m = 0; m < 5; ++m) {
        EXPECT_GE(nu_squared_analytic_bound(bp, m + 1), nu_squared_analytic_bound(bp, m));
    }
}

TEST(TauBound, Examples)
{
    BoundParams bp;
    bp.gamma1 = 1.7;
    bp.kappa1 = 0.8;
    bp.kappa_star = 1.3;
    EXPECT_NEAR(tau_analytic_bound(bp, 1, 0, 1.0), 1.7 * 0.8 * 1.3, 1e-12);
    for (std::size_t m : {0, 2})
        for (std::size_t k = m + 1; k < 10; ++k) {
            EXPECT_NEAR(tau_analytic_bound(bp, k + 1, m, 1.0) / tau_analytic_bound(bp, k, m, 1.0),
                        std::exp(-bp.gamma2), 1e-12);
        }
}

TEST(TauBound, Var1CoupledProductsStayBelow)
{
    const double a = 0.5;
    const ModelSpec spec = ModelSpec::var_scaled_identity({a}, InnovationSpec::gaussian_identity(2));
    const SymmetricMatrix s0 = stationary_var1_covariance(spec.var_params().coefficients[0],
                                                          spec.innovations().covariance());
    const KappaPair kp = kappa_pair(s0, KappaMode::gaussian_exact);
    const BoundParams bp = var_bound_params({a}, kp.kappa1, kp.kappa_star);
    const double level = 2.0;
    const std::size_t j = 20, reps = 2000;
    std::vector<double> dist(10, 0.0);
    for (std::size_t r = 0; r < reps; ++r) {
        const CoupledPair pair = simulate_coupled(spec, j, j + 10, derive_seed(77, 0, r));
        const auto x = truncated_products(pair.original.data, 0, level);
        const auto y = truncated_products(pair.coupled.data, 0, level);
        for (std::size_t k = 1; k <= 10; ++k) dist[k - 1] += oracle::svd_norm(x[j + k - 1] - y[j + k - 1]) / reps;
    }
    for (std::size_t k = 1; k <= 10; ++k) {
        EXPECT_LE(dist[k - 1], tau_analytic_bound(bp, k, 0, level)) << "k=" << k;
    }
}

TEST(Fidelity, AgainstStraightLineOracle)
{
    std::mt19937_64 g(2024);
    std::uniform_int_distribution<int> pick_n(20, 5000), pick_p(1, 50), pick_m(0, 10);
    std::uniform_real_distribution<double> u(0.01, 0.99), ux(0.0, 50.0);
    for (int draw = 0; draw < 20; ++draw) {
        const BoundParams bp = random_params(g);
        const int n = pick_n(g), p = pick_p(g), m = pick_m(g);
        const double delta = u(g), x = ux(g);
        const double k1 = bp.kappa1, ks = bp.kappa_star;

        expect_rel(main_moment_bound(bp, n, m, p), oracle::main_bound(bp.c_universal, k1, ks, n, m, p));
        expect_rel(m_delta(bp, n, m, delta), oracle::mdelta(bp.c_universal, k1, ks, bp.gamma1, n, m, delta));
        expect_rel(tail_bound(x, delta, bp, n, m, p),
                   oracle::tail(x, delta, k1, ks, bp.gamma1, bp.gamma2, bp.gamma3, bp.gamma4, bp.epsilon,
                                bp.c_universal, bp.c_prime, n, m, p));
        expect_rel(nu_squared_analytic_bound(bp, m),
                   oracle::nu2(k1, ks, bp.gamma1, bp.gamma2, bp.gamma3, bp.gamma4, bp.epsilon, bp.c_prime, m));
        const int k = 1 + pick_m(g);
        expect_rel(tau_analytic_bound(bp, k, m, 1.0),
                   oracle::tau(k1, ks, bp.gamma1, bp.gamma2, bp.c_universal, bp.c_prime, k, m));

        const MixingParams mp{u(g) * 3, u(g) * 5, 0.1 + u(g), u(g) * 10};
        expect_rel(psi_tilde(mp.psi1, mp.psi2, n, p), oracle::psitilde(mp.psi1, mp.psi2, n, p));
        expect_rel(bernstein_tail(x * 10, mp, n, p),
                   oracle::bern(x * 10, mp.psi1, mp.psi2, mp.bound_m, mp.nu_sq, n, p));

        Eigen::MatrixXd b = oracle::random_matrix(g, p % 6 + 1, p % 6 + 1);
        const SymmetricMatrix s0(Matrix(b * b.transpose()));
        const double c = 0.5 + u(g);
        expect_rel(theorem22_bound(s0, n, m, c), oracle::thm22(s0.eigen(), n, m, c));
        std::vector<oracle::Mat> seq{s0.eigen()};
        std::vector<DenseMatrix> dseq{s0.dense()};
        for (int l = 1; l < 4; ++l) {
            seq.push_back(std::pow(0.4, l) * s0.eigen());
            dseq.emplace_back(seq.back());
        }
        expect_rel(gaussian_moment_bound(dseq, n), oracle::gau_bound(seq, n));
    }
}

TEST(Fidelity, RepeatedEvaluationIsBitIdentical)
{
    std::mt19937_64 g(5);
    const BoundParams bp = random_params(g);
    EXPECT_EQ(tail_bound(3.0, 0.1, bp, 500, 2, 7), tail_bound(3.0, 0.1, bp, 500, 2, 7));
    EXPECT_EQ(main_moment_bound(bp, 500, 2, 7), main_moment_bound(bp, 500, 2, 7));
}

TEST(Params, Validation)
{
    BoundParams bp;
    bp.gamma2 = 0.0;
    EXPECT_THROW(bp.validate(), DomainError);
    bp = BoundParams{};
    bp.kappa1 = -1;
    EXPECT_THROW(main_moment_bound(bp, 10, 0, 1), DomainError);
    bp = BoundParams{};
    bp.gamma1 = 0.0;
    bp.gamma3 = 0.0;
    EXPECT_NO_THROW(bp.validate());
    EXPECT_THROW((MixingParams{0.0, 1.0, 1.0, 1.0}.validate()), DomainError);
}

TEST(ModelConstants, Gelfand)
{
    EXPECT_EQ(gelfand_constant(DenseMatrix(Matrix(0.5 * Matrix::Identity(3, 3))), 0.75).k, 1u);
    Matrix a(2, 2);
    a << 0.5, 10.0, 0.0, 0.5;
    const auto gk = gelfand_constant(DenseMatrix(a), 0.75);
    Matrix pw = a;
    std::size_t brute = 1;
    while (oracle::svd_norm(pw) >= std::pow(0.75, double(brute))) {
        pw = pw * a;
        ++brute;
    }
    EXPECT_EQ(gk.k, brute);
    EXPECT_GT(gk.k, 1u);
    EXPECT_THROW(gelfand_constant(DenseMatrix(a), 0.4), DomainError);
}

TEST(ModelConstants, VarArchBanna)
{
    const BoundParams v = var_bound_params({0.5}, 1.0, 2.0);
    EXPECT_NEAR(v.gamma2, std::log(4.0 / 3.0), 1e-12);
    EXPECT_NEAR(v.gamma1, 2.0 * (0.5 / 0.75), 1e-12);
    EXPECT_NEAR(v.gamma3, 0.5 / 0.75, 1e-12);
    EXPECT_EQ(v.gamma4, v.gamma2);
    const BoundParams v2 = var_bound_params({0.3, 0.2}, 1.0, 1.0);
    EXPECT_NEAR(v2.gamma2, std::log(2.0 / (1.0 + spectral_radius(companion_matrix(std::vector<double>{0.3, 0.2})))),
                1e-12);

    const BoundParams ar = arch_bound_params(1.0, 2.0, 1.5, 1.0, 0.4, 0.3);
    EXPECT_NEAR(ar.gamma2, -std::log(0.7), 1e-12);
    EXPECT_NEAR(ar.gamma1, 2.0, 1e-12);
    EXPECT_NEAR(ar.gamma3, 3.0, 1e-12);
    EXPECT_THROW(arch_bound_params(1, 1, 1, 1, 0.6, 0.4), DomainError);

    const BoundParams bn = banna_bound_params(1.0, 2.0, 1.0, 2.0, 1.0, 4.0, std::log(2.0), 1.0);
    EXPECT_NEAR(bn.gamma2, std::log(2.0) / 2, 1e-12);
    EXPECT_NEAR(bn.gamma1, 4.0, 1e-12);
    EXPECT_NEAR(bn.gamma3, 2.0, 1e-12);
}

TEST(ModelConstants, BannaWindowEstimateBelowAnalytic)
{
    const ModelSpec spec = ModelSpec::banna(0.5, 1.0, InnovationSpec(InnovationKind::scaled_sign,
                                                                      SymmetricMatrix::identity(2)));
    const double kstar = spec.innovations().kappa_star();
    const double k1 = rademacher_psi2((Vector(2) << 1.0, 0.0).finished());
    const BoundParams bp = banna_bound_params(k1, kstar, k1, kstar, 1.0, 2.0, std::log(2.0), 1.0);
    const double est = nu_squared_window_estimate(spec, 32, 1e9, 0, 500, 3, 0);
    EXPECT_LE(est, nu_squared_analytic_bound(bp, 0));
}

#pragma once

// Evaluators for the explicit deviation and concentration bounds.
//
// Constants that are only known to "depend on epsilon" are carried in
// BoundParams (c_universal, c_prime) and default to 1. Logarithms are natural.
// Evaluators never clip probability-valued outputs; that happens when results
// are reported.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

#include "acov/error.hpp"
#include "acov/matrix_core.hpp"

namespace acov {

struct BoundParams {
    double kappa1 = 1.0;
    double kappa_star = 1.0;
    double gamma1 = 1.0;
    double gamma2 = 1.0;
    double gamma3 = 1.0;
    double gamma4 = 1.0;
    double epsilon = 1.0;
    double c_universal = 1.0;  ///< C
    double c_prime = 1.0;      ///< C'

    double r_star() const { return (kappa_star * kappa_star) / (kappa1 * kappa1); }

    /// gamma1 and gamma3 may be zero (no coupling excess); everything else > 0.
    void validate() const {
        if (!(kappa1 > 0.0) || !(kappa_star > 0.0)) throw DomainError("BoundParams: kappas must be > 0");
        if (!(gamma1 >= 0.0) || !(gamma3 >= 0.0)) throw DomainError("BoundParams: gamma1, gamma3 must be >= 0");
        if (!(gamma2 > 0.0) || !(gamma4 > 0.0)) throw DomainError("BoundParams: gamma2, gamma4 must be > 0");
        if (!(epsilon > 0.0)) throw DomainError("BoundParams: epsilon must be > 0");
        if (!(c_universal > 0.0) || !(c_prime > 0.0)) throw DomainError("BoundParams: constants must be > 0");
    }

    /// 1 - exp{-min((5 + eps)/(6 eps + 10) gamma2, gamma4)}
    double mixing_denominator() const {
        const double rate = std::min((5.0 + epsilon) / (6.0 * epsilon + 10.0) * gamma2, gamma4);
        const double denom = -std::expm1(-rate);
        if (!(denom > 1e-300)) throw DomainError("mixing denominator underflow (gamma2 or gamma4 ~ 0)");
        return denom;
    }
};

struct MixingParams {
    double psi1 = 1.0;
    double psi2 = 1.0;
    double bound_m = 1.0;  ///< M with ||X_t|| <= M
    double nu_sq = 0.0;

    void validate() const {
        if (!(psi1 > 0.0) || !(psi2 > 0.0) || !(bound_m > 0.0)) {
            throw DomainError("MixingParams: psi1, psi2 and M must be > 0");
        }
        if (!(nu_sq >= 0.0)) throw DomainError("MixingParams: nu^2 must be >= 0");
    }
};

/// C kappa1^2 {sqrt(r* log(ep)/(n-m)) + r* log(ep) (log np)^3/(n-m)}.
inline double main_moment_bound(const BoundParams& bp, std::size_t n, std::size_t m, std::size_t p) {
    bp.validate();
    if (n < 2) throw InputError("main_moment_bound: n must be >= 2");
    if (m >= n) throw InputError("main_moment_bound: need n - m >= 1");
    if (p < 1) throw InputError("main_moment_bound: p must be >= 1");
    const double eff = static_cast<double>(n - m);
    const double r = bp.r_star();
    const double log_ep = 1.0 + std::log(static_cast<double>(p));
    const double log_np = std::log(static_cast<double>(n) * static_cast<double>(p));
    return bp.c_universal * bp.kappa1 * bp.kappa1 *
           (std::sqrt(r * log_ep / eff) + r * log_ep * log_np * log_np * log_np / eff);
}

/// Explicit Gaussian bound on E||Sigma_hat_0 - Sigma_0|| from the
/// autocovariance sequence Sigma_0, Sigma_1, ...:
///   (2/n) {2 S_* + sqrt(2n ||Sigma_0|| S_*) + sqrt(2n S_sp Tr Sigma_0)},
///   S_* = ||Sigma_0||_* + 2 sum_{m>=1} ||Sigma_m||_*,
///   S_sp = ||Sigma_0|| + 2 sum_{m>=1} ||Sigma_m||.
/// `sigma(m)` is queried for m = 0, 1, ... until m = n - 1 or the nuclear norm
/// drops below 1e-12 ||Sigma_0||_*.
inline double gaussian_moment_bound(const std::function<DenseMatrix(std::size_t)>& sigma,
                                    std::size_t n) {
    if (n < 1) throw InputError("gaussian_moment_bound: n must be >= 1");
    const DenseMatrix s0 = sigma(0);
    if (!s0.square()) throw InputError("gaussian_moment_bound: Sigma_0 must be square");
    const SymmetricMatrix sym0(s0.eigen());
    if (!(s0.eigen() - s0.eigen().transpose()).isZero(1e-12 * (1.0 + s0.eigen().cwiseAbs().maxCoeff())) ||
        !sym0.is_psd()) {
        throw DomainError("gaussian_moment_bound: Sigma_0 must be symmetric PSD");
    }
    const double nuc0 = nuclear_norm(sym0);
    const double spec0 = spectral_norm(sym0);
    double nuc_sum = nuc0;
    double spec_sum = spec0;
    for (std::size_t m = 1; m < n; ++m) {
        const DenseMatrix sm = sigma(m);
        const double nuc = nuclear_norm(sm);
        if (nuc < 1e-12 * nuc0) break;
        nuc_sum += 2.0 * nuc;
        spec_sum += 2.0 * spectral_norm(sm);
    }
    const double nd = static_cast<double>(n);
    return (2.0 / nd) * (2.0 * nuc_sum + std::sqrt(2.0 * nd * spec0 * nuc_sum) +
                         std::sqrt(2.0 * nd * spec_sum * sym0.trace()));
}

/// Overload over an explicit list; entries beyond the list are treated as zero.
inline double gaussian_moment_bound(const std::vector<DenseMatrix>& sequence, std::size_t n) {
    if (sequence.empty()) throw InputError("gaussian_moment_bound: empty sequence");
    const auto zero = DenseMatrix::zeros(sequence.front().rows(), sequence.front().cols());
    return gaussian_moment_bound(
        [&](std::size_t m) { return m < sequence.size() ? sequence[m] : zero; }, n);
}

/// c ||Sigma_0|| (sqrt(r/(n-m)) + r/(n-m)) with r the effective rank.
inline double theorem22_bound(const SymmetricMatrix& sigma0, std::size_t n, std::size_t m, double c) {
    if (m >= n) throw InputError("theorem22_bound: need n - m >= 1");
    if (!(c > 0.0)) throw DomainError("theorem22_bound: c must be > 0");
    const double r = effective_rank(sigma0);
    const double eff = static_cast<double>(n - m);
    return c * spectral_norm(sigma0) * (std::sqrt(r / eff) + r / eff);
}

/// C max{r* log((n-m)/delta), r*, 2 kappa_* gamma1 / kappa1}.
inline double m_delta(const BoundParams& bp, std::size_t n, std::size_t m, double delta) {
    bp.validate();
    if (!(delta > 0.0 && delta <= 1.0)) throw DomainError("m_delta: delta must lie in (0, 1]");
    if (m >= n) throw InputError("m_delta: need n - m >= 1");
    const double ratio = bp.kappa_star / bp.kappa1;
    const double r = ratio * ratio;
    const double eff = static_cast<double>(n - m);
    return bp.c_universal * std::max({r * std::log(eff / delta), r, 2.0 * ratio * bp.gamma1});
}

struct TailTerms {
    double a1 = 0.0;
    double a2 = 0.0;
    double a3 = 0.0;
    double m_delta = 0.0;
};

inline TailTerms tail_terms(const BoundParams& bp, std::size_t n, std::size_t m, std::size_t p,
                            double delta) {
    bp.validate();
    const double ratio = bp.kappa_star / bp.kappa1;
    const double two_m1 = 2.0 * static_cast<double>(m) + 1.0;
    const double eff = static_cast<double>(n - m);
    TailTerms t;
    t.a1 = (ratio * bp.gamma1 + ratio * ratio * (bp.gamma3 + two_m1) + two_m1) / bp.mixing_denominator();
    t.a2 = 453.0 * 453.0 / bp.gamma2;
    t.a3 = (2.0 * std::log(eff) / std::numbers::ln2) *
           std::max(1.0, 8.0 * static_cast<double>(m) +
                             48.0 * std::log(eff * static_cast<double>(p)) / bp.gamma2);
    t.m_delta = m_delta(bp, n, m, delta);
    return t;
}

/// 2p exp{-C'(n-m)^2 x^2 / (A1 (n-m) + A2 M_delta^2 + A3 (n-m) x M_delta)} + delta.
inline double tail_bound(double x, double delta, const BoundParams& bp, std::size_t n, std::size_t m,
                         std::size_t p) {
    if (!(bp.gamma2 > 0.0)) throw DomainError("tail_bound: gamma2 must be > 0");
    if (!(x >= 0.0)) throw DomainError("tail_bound: x must be >= 0");
    if (m >= n) throw InputError("tail_bound: need n - m >= 1");
    const TailTerms t = tail_terms(bp, n, m, p, delta);
    const double eff = static_cast<double>(n - m);
    const double denom = t.a1 * eff + t.a2 * t.m_delta * t.m_delta + t.a3 * eff * x * t.m_delta;
    return 2.0 * static_cast<double>(p) * std::exp(-bp.c_prime * eff * eff * x * x / denom) + delta;
}

/// (log n / log 2) max{1, 8 log(psi1~ n^6 p)/psi2}, psi1~ = max(1/p, psi1).
inline double psi_tilde(double psi1, double psi2, std::size_t n, std::size_t p) {
    if (n < 2) throw DomainError("psi_tilde: n must be >= 2");
    if (p < 1) throw InputError("psi_tilde: p must be >= 1");
    if (!(psi1 > 0.0) || !(psi2 > 0.0)) throw DomainError("psi_tilde: psi1, psi2 must be > 0");
    const double pd = static_cast<double>(p);
    const double nd = static_cast<double>(n);
    const double psi1_t = std::max(1.0 / pd, psi1);
    const double log_arg = std::log(psi1_t) + 6.0 * std::log(nd) + std::log(pd);
    return (std::log(nd) / std::numbers::ln2) * std::max(1.0, 8.0 * log_arg / psi2);
}

/// p exp{-x^2 / (8(15^2 n nu^2 + 60^2 M^2/psi2) + 2 x M psi~)}.
inline double bernstein_tail(double x, const MixingParams& mp, std::size_t n, std::size_t p) {
    mp.validate();
    if (!(x >= 0.0)) throw DomainError("bernstein_tail: x must be >= 0");
    const double pt = psi_tilde(mp.psi1, mp.psi2, n, p);
    const double m2 = mp.bound_m * mp.bound_m;
    const double denom = 8.0 * (225.0 * static_cast<double>(n) * mp.nu_sq + 3600.0 * m2 / mp.psi2) +
                         2.0 * x * mp.bound_m * pt;
    return static_cast<double>(p) * std::exp(-x * x / denom);
}

/// Analytic upper bound on the variance proxy of the truncated products:
///   m = 0: C' k1^2 {k1^2 + k1 k* g1 + k*^2 (g3 + 2)} / D
///   m > 0: C' k1^2 {(2m+1) k1^2 + k1 k* g1 + k*^2 (g3 + 2m + 2)} / D
/// with D the mixing denominator.
inline double nu_squared_analytic_bound(const BoundParams& bp, std::size_t m) {
    bp.validate();
    const double k1 = bp.kappa1;
    const double ks = bp.kappa_star;
    const double md = static_cast<double>(m);
    const double inner = (m == 0)
                             ? k1 * k1 + k1 * ks * bp.gamma1 + ks * ks * (bp.gamma3 + 2.0)
                             : (2.0 * md + 1.0) * k1 * k1 + k1 * ks * bp.gamma1 +
                                   ks * ks * (bp.gamma3 + 2.0 * md + 2.0);
    return bp.c_prime * k1 * k1 * inner / bp.mixing_denominator();
}

/// Geometric tau-decay bound for the truncated products:
///   m = 0: C g1 k1 k* exp{-g2 (k-1)}
///   m > 0: C' exp{g2 min(k, m)} max(g1 k1 k*, k*^2) exp{-g2 (k-1)}
/// The truncation level does not enter the bound; it is accepted so callers
/// state which truncated sequence they are bounding.
inline double tau_analytic_bound(const BoundParams& bp, std::size_t k, std::size_t m,
                                 double truncation_level) {
    bp.validate();
    if (k < 1) throw InputError("tau_analytic_bound: k must be >= 1");
    if (!(truncation_level > 0.0)) throw DomainError("tau_analytic_bound: truncation level must be > 0");
    const double decay = std::exp(-bp.gamma2 * (static_cast<double>(k) - 1.0));
    const double base = bp.gamma1 * bp.kappa1 * bp.kappa_star;
    if (m == 0) return bp.c_universal * base * decay;
    const double lead = std::exp(bp.gamma2 * static_cast<double>(std::min(k, m)));
    return bp.c_prime * lead * std::max(base, bp.kappa_star * bp.kappa_star) * decay;
}

// ---------------------------------------------------------------------------
// Model-implied mixing constants (unspecified constants set to C = C' = 1)

struct GelfandConstant {
    double rho1 = 0.0;
    std::size_t k = 0;  ///< smallest t >= 1 with ||A^t|| < rho1^t
};

/// Smallest t >= 1 with ||A^t|| < rho1^t, for rho(A) < rho1 < 1.
inline GelfandConstant gelfand_constant(const DenseMatrix& a, double rho1, std::size_t max_power = 100000) {
    if (!(rho1 > spectral_radius(a) && rho1 < 1.0)) {
        throw DomainError("gelfand_constant: need rho(A) < rho1 < 1");
    }
    Matrix power = a.eigen();
    double scale = rho1;
    for (std::size_t t = 1; t <= max_power; ++t) {
        if (detail::rectangular_spectral_norm(power) < scale) return {rho1, t};
        power = (power * a.eigen()).eval();
        scale *= rho1;
        if (scale < 1e-300) break;
    }
    throw NumericalError("gelfand_constant: no power found");
}

/// VAR(d) constants with a_k the norm caps and companion matrix A-bar:
/// g1 = (k*/k1)(||A-bar||/rho1)^K, g2 = g4 = log(1/rho1), g3 = d (||A-bar||/rho1)^K.
/// rho1 defaults to (1 + rho(A-bar)) / 2.
inline BoundParams var_bound_params(const std::vector<double>& norm_caps, double kappa1,
                                    double kappa_star, std::optional<double> rho1 = std::nullopt) {
    const DenseMatrix abar = companion_matrix(norm_caps);
    const double rho = spectral_radius(abar);
    const double r1 = rho1.value_or(0.5 * (1.0 + rho));
    const GelfandConstant g = gelfand_constant(abar, r1);
    const double lift = std::pow(spectral_norm(abar) / r1, static_cast<double>(g.k));
    BoundParams bp;
    bp.kappa1 = kappa1;
    bp.kappa_star = kappa_star;
    bp.gamma1 = (kappa_star / kappa1) * lift;
    bp.gamma2 = std::log(1.0 / r1);
    bp.gamma3 = static_cast<double>(norm_caps.size()) * lift;
    bp.gamma4 = bp.gamma2;
    return bp;
}

/// BANNA constants from the W-chain decay tau(k; W) <= kappa_W g5 exp{-g6 (k-1)}:
/// g1 = k*' kappa_W g5^{1/(1+eps)}/k1, g2 = g4 = g6/(1+eps), g3 = k1' kappa_W g5^{1/(1+eps)}/k1.
inline BoundParams banna_bound_params(double kappa1, double kappa_star, double innov_kappa1,
                                      double innov_kappa_star, double kappa_w, double gamma5,
                                      double gamma6, double epsilon) {
    const double root = std::pow(gamma5, 1.0 / (1.0 + epsilon));
    BoundParams bp;
    bp.kappa1 = kappa1;
    bp.kappa_star = kappa_star;
    bp.gamma1 = innov_kappa_star * kappa_w * root / kappa1;
    bp.gamma2 = gamma6 / (1.0 + epsilon);
    bp.gamma3 = innov_kappa1 * kappa_w * root / kappa1;
    bp.gamma4 = bp.gamma2;
    bp.epsilon = epsilon;
    return bp;
}

/// ARCH constants: g1 = k*/k1, g2 = g4 = -log(a1 + a2), g3 = max(k* k1'/(k1 k*'), 1).
inline BoundParams arch_bound_params(double kappa1, double kappa_star, double innov_kappa1,
                                     double innov_kappa_star, double a1, double a2) {
    if (!(a1 + a2 < 1.0) || !(a1 + a2 > 0.0)) throw DomainError("arch_bound_params: need 0 < a1 + a2 < 1");
    BoundParams bp;
    bp.kappa1 = kappa1;
    bp.kappa_star = kappa_star;
    bp.gamma1 = kappa_star / kappa1;
    bp.gamma2 = -std::log(a1 + a2);
    bp.gamma3 = std::max(kappa_star * innov_kappa1 / (kappa1 * innov_kappa_star), 1.0);
    bp.gamma4 = bp.gamma2;
    return bp;
}

}  // namespace acov

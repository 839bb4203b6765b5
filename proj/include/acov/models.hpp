#pragma once

// Generators for three dependent time-series models:
//
//   VAR(d)  Y_t = A_1 Y_{t-1} + ... + A_d Y_{t-d} + E_t
//   BANNA   Y_t = W_t E_t, W_t = a_W W_{t-1} + (1 - a_W) U_t, U_t ~ Unif[-kappa_W, kappa_W]
//   ARCH    Y_t = A Y_{t-1} + H(Y_{t-1}) E_t,
//           H(u) = sigma0 I + (a2 / kappa*') diag(tanh(u_1), ..., tanh(u_p))
//
// Every random draw is keyed by (seed, stream, time), see rng.hpp. A coupled
// path replaces the streams at times t <= j by independent "history" streams
// and reuses the original streams afterwards, so both paths share all
// innovations after the split index.

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "acov/error.hpp"
#include "acov/matrix_core.hpp"
#include "acov/rng.hpp"

namespace acov {

enum class InnovationKind { gaussian, scaled_sign };

inline const char* to_string(InnovationKind k) {
    return k == InnovationKind::gaussian ? "gaussian" : "scaled_sign";
}

/// Subgaussian norm of a centered normal with standard deviation 1, under
/// psi2(X) = inf{k : E exp(X^2/k^2) <= 2}: (1 - 2/k^2)^{-1/2} = 2 at k^2 = 8/3.
inline const double kGaussianPsi2 = std::sqrt(8.0 / 3.0);

/// Exact psi2 norm of sum_i w_i s_i for independent Rademacher s_i, by
/// enumerating all sign patterns and bisecting E exp(X^2/k^2) = 2.
inline double rademacher_psi2(const Vector& w) {
    const auto p = w.size();
    if (p > 24) throw CapabilityError("rademacher_psi2: dimension too large to enumerate");
    // X is symmetric, so fixing s_0 = +1 covers every |X|.
    const std::uint64_t patterns = std::uint64_t{1} << (p - 1);
    std::vector<double> sq(patterns);
    double max_sq = 0.0;
    for (std::uint64_t mask = 0; mask < patterns; ++mask) {
        double x = w(0);
        for (Eigen::Index i = 1; i < p; ++i) {
            x += ((mask >> (i - 1)) & 1U) ? -w(i) : w(i);
        }
        sq[mask] = x * x;
        max_sq = std::max(max_sq, x * x);
    }
    if (max_sq == 0.0) return 0.0;

    auto mgf = [&](double k) {
        double acc = 0.0;
        const double inv = 1.0 / (k * k);
        for (double s : sq) acc += std::exp(s * inv);
        return acc / static_cast<double>(patterns);
    };
    // E exp <= 2 whenever max X^2/k^2 <= ln 2; E exp > 2 once exp(max/k^2) > 2 * patterns.
    double hi = std::sqrt(max_sq / std::numbers::ln2);
    double lo = std::sqrt(max_sq / (std::log(2.0 * static_cast<double>(patterns)) + 1.0));
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mgf(mid) <= 2.0) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

/// Innovation law E_t = L z_t with L L^T = sigma, z_t standard normal or
/// Rademacher coordinates.
class InnovationSpec {
public:
    InnovationSpec(InnovationKind kind, SymmetricMatrix sigma)
        : kind_(kind), sigma_(std::move(sigma)) {
        if (!sigma_.is_psd()) throw DomainError("InnovationSpec: covariance is not PSD");
        factor_ = lower_factor(sigma_);
    }

    static InnovationSpec gaussian_identity(Eigen::Index p) {
        return {InnovationKind::gaussian, SymmetricMatrix::identity(p)};
    }

    InnovationKind kind() const noexcept { return kind_; }
    Eigen::Index dim() const noexcept { return sigma_.dim(); }
    const SymmetricMatrix& covariance() const noexcept { return sigma_; }
    const Matrix& factor() const noexcept { return factor_; }
    bool is_zero() const { return sigma_.eigen().isZero(0.0); }

    /// Fills z with the standardized coordinates for one time step.
    void draw_standard(CounterRng& rng, Eigen::Ref<Vector> z) const {
        if (kind_ == InnovationKind::gaussian) {
            for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.normal();
        } else {
            for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.sign();
        }
    }

    /// sup over v in {-1,1}^p of psi2(v^T E). Exact for Gaussian (p <= 20) and
    /// scaled-sign (p <= 8) innovations; beyond that, the subgaussian upper
    /// bound sqrt(8/3) * sqrt(p * lambda_max(sigma)).
    double kappa_star() const {
        const auto p = dim();
        if (is_zero()) return 0.0;
        if (kind_ == InnovationKind::gaussian && p <= 20) {
            return kGaussianPsi2 * std::sqrt(hypercube_max_quadratic(sigma_.eigen()));
        }
        if (kind_ == InnovationKind::scaled_sign && p <= 8) {
            double best = 0.0;
            const std::uint64_t patterns = std::uint64_t{1} << (p - 1);
            Vector v(p);
            for (std::uint64_t mask = 0; mask < patterns; ++mask) {
                v(0) = 1.0;
                for (Eigen::Index i = 1; i < p; ++i) v(i) = ((mask >> (i - 1)) & 1U) ? -1.0 : 1.0;
                best = std::max(best, rademacher_psi2(factor_.transpose() * v));
            }
            return best;
        }
        return kGaussianPsi2 * std::sqrt(static_cast<double>(p) * sigma_.lambda_max());
    }

    /// max over v in {-1,1}^p of v^T s v, by Gray-code enumeration (p <= 20).
    static double hypercube_max_quadratic(const Matrix& s) {
        const auto p = s.rows();
        if (p > 20) throw CapabilityError("hypercube enumeration limited to p <= 20");
        Vector v = Vector::Ones(p);
        Vector sv = s * v;
        double q = v.dot(sv);
        double best = q;
        // Gray code over coordinates 1..p-1 (v_0 fixed: v and -v give the same value).
        const std::uint64_t patterns = std::uint64_t{1} << (p - 1);
        for (std::uint64_t g = 1; g < patterns; ++g) {
            const auto bit = static_cast<Eigen::Index>(std::countr_zero(g)) + 1;
            const double vi = v(bit);
            q += -4.0 * vi * sv(bit) + 4.0 * s(bit, bit);
            sv -= 2.0 * vi * s.col(bit);
            v(bit) = -vi;
            best = std::max(best, q);
        }
        return best;
    }

private:
    InnovationKind kind_;
    SymmetricMatrix sigma_;
    Matrix factor_;
};

struct VarParams {
    std::vector<DenseMatrix> coefficients;
    std::vector<double> norm_caps;  ///< a_k with ||A_k|| <= a_k; defaults to ||A_k||
};

struct BannaParams {
    double a_w = 0.0;
    double kappa_w = 1.0;
};

struct ArchParams {
    DenseMatrix a;
    double a1 = 0.0;
    double a2 = 0.0;
    double baseline_scale = 1.0;  ///< sigma0 in H(u)
    double innovation_kappa_star = 1.0;  ///< kappa*' of the innovations, filled in by validation
};

enum class ModelVariant { var, banna, arch };

inline const char* to_string(ModelVariant v) {
    switch (v) {
        case ModelVariant::var: return "var";
        case ModelVariant::banna: return "banna";
        case ModelVariant::arch: return "arch";
    }
    return "?";
}

/// Validated parameters of one generative model.
class ModelSpec {
public:
    static constexpr std::size_t kDefaultBurnIn = 1024;

    static ModelSpec var(std::vector<DenseMatrix> coefficients, InnovationSpec innovations,
                         std::vector<double> norm_caps = {},
                         std::size_t burn_in = kDefaultBurnIn) {
        const auto p = innovations.dim();
        if (coefficients.empty()) throw InputError("VAR: at least one coefficient matrix required");
        if (norm_caps.empty()) {
            for (const auto& a : coefficients) norm_caps.push_back(spectral_norm(a));
        }
        if (norm_caps.size() != coefficients.size()) {
            throw InputError("VAR: norm_caps and coefficients differ in length");
        }
        double total = 0.0;
        for (std::size_t k = 0; k < coefficients.size(); ++k) {
            const auto& a = coefficients[k];
            if (!a.square() || a.rows() != p) {
                throw InputError("VAR: coefficient " + std::to_string(k + 1) + " must be p x p");
            }
            if (!(norm_caps[k] >= 0.0)) throw DomainError("VAR: norm caps must be nonnegative");
            if (spectral_norm(a) > norm_caps[k] * (1.0 + 1e-12) + 1e-15) {
                throw DomainError("VAR: ||A_" + std::to_string(k + 1) + "|| exceeds its cap");
            }
            total += norm_caps[k];
        }
        if (!(total < 1.0)) throw InstabilityError("VAR: sum of norm caps must be < 1");
        return ModelSpec(VarParams{std::move(coefficients), std::move(norm_caps)},
                         std::move(innovations), burn_in);
    }

    /// VAR(d) with A_k = a_k I.
    static ModelSpec var_scaled_identity(const std::vector<double>& a, InnovationSpec innovations,
                                         std::size_t burn_in = kDefaultBurnIn) {
        std::vector<DenseMatrix> coefficients;
        std::vector<double> caps;
        for (double ak : a) {
            coefficients.emplace_back(Matrix(ak * Matrix::Identity(innovations.dim(), innovations.dim())));
            caps.push_back(std::abs(ak));
        }
        return var(std::move(coefficients), std::move(innovations), std::move(caps), burn_in);
    }

    static ModelSpec banna(double a_w, double kappa_w, InnovationSpec innovations,
                           std::size_t burn_in = kDefaultBurnIn) {
        if (!(kappa_w > 0.0)) throw DomainError("BANNA: kappa_W must be positive");
        if (!(a_w >= 0.0 && a_w < 1.0)) throw DomainError("BANNA: a_W must lie in [0, 1)");
        return ModelSpec(BannaParams{a_w, kappa_w}, std::move(innovations), burn_in);
    }

    static ModelSpec arch(DenseMatrix a, double a1, double a2, double baseline_scale,
                          InnovationSpec innovations, std::size_t burn_in = kDefaultBurnIn) {
        if (!a.square() || a.rows() != innovations.dim()) throw InputError("ARCH: A must be p x p");
        if (!(a1 >= 0.0) || !(a2 >= 0.0)) throw DomainError("ARCH: a1 and a2 must be nonnegative");
        if (!(a1 + a2 < 1.0)) throw InstabilityError("ARCH: a1 + a2 must be < 1");
        if (spectral_norm(a) > a1 * (1.0 + 1e-12) + 1e-15) throw DomainError("ARCH: ||A|| exceeds a1");
        if (!(baseline_scale >= 0.0)) throw DomainError("ARCH: sigma0 must be nonnegative");
        double kstar = innovations.kappa_star();
        if (kstar == 0.0) kstar = 1.0;
        return ModelSpec(ArchParams{std::move(a), a1, a2, baseline_scale, kstar},
                         std::move(innovations), burn_in);
    }

    ModelVariant variant() const noexcept { return static_cast<ModelVariant>(params_.index()); }
    Eigen::Index dim() const noexcept { return innovations_.dim(); }
    const InnovationSpec& innovations() const noexcept { return innovations_; }
    std::size_t burn_in() const noexcept { return burn_in_; }

    const VarParams& var_params() const { return std::get<VarParams>(params_); }
    const BannaParams& banna_params() const { return std::get<BannaParams>(params_); }
    const ArchParams& arch_params() const { return std::get<ArchParams>(params_); }

    /// Gaussian VAR(1): the stationary law is available in closed form.
    bool exact_stationary_init() const {
        return variant() == ModelVariant::var && var_params().coefficients.size() == 1 &&
               innovations_.kind() == InnovationKind::gaussian;
    }

    /// Per-step contraction of the coupling distance implied by the model
    /// constants: ln rho(companion(a_1..a_d)) for VAR, ln a_W for BANNA,
    /// ln(a1 + a2) for ARCH. -infinity when the distance vanishes in one step.
    double contraction_log_rate() const {
        double rate = 0.0;
        switch (variant()) {
            case ModelVariant::var: {
                rate = spectral_radius(companion_matrix(var_params().norm_caps));
                break;
            }
            case ModelVariant::banna: rate = banna_params().a_w; break;
            case ModelVariant::arch: rate = arch_params().a1 + arch_params().a2; break;
        }
        return rate > 0.0 ? std::log(rate) : -std::numeric_limits<double>::infinity();
    }

private:
    ModelSpec(std::variant<VarParams, BannaParams, ArchParams> params, InnovationSpec innovations,
              std::size_t burn_in)
        : params_(std::move(params)), innovations_(std::move(innovations)), burn_in_(burn_in) {}

    std::variant<VarParams, BannaParams, ArchParams> params_;
    InnovationSpec innovations_;
    std::size_t burn_in_;
};

/// H(u) = sigma0 I + (a2 / kappa*') diag(tanh(u)), returned as its diagonal.
inline Vector arch_volatility_diagonal(const ArchParams& params, const Vector& u) {
    const double slope = params.a2 / params.innovation_kappa_star;
    return (params.baseline_scale + slope * u.array().tanh()).matrix();
}

/// p x n observations, column t-1 holding Y_t.
struct SeriesPath {
    Matrix data;
    Matrix innovations;  ///< E_t at the observation times, same layout as data
    Vector w;            ///< W_t at the observation times (BANNA only, else empty)
    std::uint64_t seed = 0;
    std::shared_ptr<const ModelSpec> model;

    Eigen::Index p() const noexcept { return data.rows(); }
    Eigen::Index n() const noexcept { return data.cols(); }
};

struct CoupledPair {
    SeriesPath original;
    SeriesPath coupled;
    std::size_t split_index = 0;
};

namespace detail {

struct StreamPlan {
    std::uint64_t seed;
    std::optional<std::int64_t> split;  // times t <= split use history streams

    Stream innovation(std::int64_t t) const {
        return split && t <= *split ? Stream::history_innovation : Stream::innovation;
    }
    Stream w_chain(std::int64_t t) const {
        return split && t <= *split ? Stream::history_w_chain : Stream::w_chain;
    }
    Stream init() const { return split ? Stream::history_init : Stream::init; }
};

/// Innovations for times first, first+1, ..., first+count-1.
inline Matrix draw_innovations(const InnovationSpec& spec, const StreamPlan& plan,
                               std::int64_t first, Eigen::Index count) {
    const auto p = spec.dim();
    Matrix z(p, count);
    for (Eigen::Index c = 0; c < count; ++c) {
        const std::int64_t t = first + c;
        CounterRng rng(plan.seed, plan.innovation(t), time_key(t));
        spec.draw_standard(rng, z.col(c));
    }
    return spec.factor().triangularView<Eigen::Lower>() * z;
}

inline SeriesPath generate(std::shared_ptr<const ModelSpec> model, std::size_t n,
                           std::uint64_t seed, std::optional<std::int64_t> split) {
    if (n < 1) throw InputError("simulate: n must be at least 1");
    const ModelSpec& spec = *model;
    const auto p = spec.dim();
    const StreamPlan plan{seed, split};
    const bool exact = spec.exact_stationary_init();
    const auto burn = static_cast<std::int64_t>(exact ? 0 : spec.burn_in());
    const auto steps = static_cast<Eigen::Index>(burn) + static_cast<Eigen::Index>(n);
    const std::int64_t first = 1 - burn;

    const Matrix e = draw_innovations(spec.innovations(), plan, first, steps);
    Matrix y(p, steps);
    Vector w_obs;

    switch (spec.variant()) {
        case ModelVariant::var: {
            const auto& coeffs = spec.var_params().coefficients;
            const auto d = static_cast<Eigen::Index>(coeffs.size());
            std::vector<bool> zero(coeffs.size());
            for (std::size_t k = 0; k < coeffs.size(); ++k) zero[k] = coeffs[k].eigen().isZero(0.0);
            // Pre-sample state Y_0, Y_{-1}, ...: stationary draw or zeros.
            Matrix pre = Matrix::Zero(p, d);
            if (exact) {
                const SymmetricMatrix sigma0 =
                    stationary_var1_covariance(coeffs[0], spec.innovations().covariance());
                CounterRng rng(seed, plan.init(), time_key(0));
                Vector z(p);
                for (Eigen::Index i = 0; i < p; ++i) z(i) = rng.normal();
                pre.col(0) = lower_factor(sigma0).triangularView<Eigen::Lower>() * z;
            }
            Vector acc(p);
            for (Eigen::Index c = 0; c < steps; ++c) {
                acc = e.col(c);
                for (Eigen::Index k = 1; k <= d; ++k) {
                    if (zero[static_cast<std::size_t>(k - 1)]) continue;
                    const auto& a = coeffs[static_cast<std::size_t>(k - 1)].eigen();
                    if (c - k >= 0) {
                        acc.noalias() += a * y.col(c - k);
                    } else {
                        acc.noalias() += a * pre.col(k - c - 1);
                    }
                }
                y.col(c) = acc;
            }
            break;
        }
        case ModelVariant::banna: {
            const auto& bp = spec.banna_params();
            double w = 0.0;
            w_obs.resize(static_cast<Eigen::Index>(n));
            for (Eigen::Index c = 0; c < steps; ++c) {
                const std::int64_t t = first + c;
                CounterRng rng(seed, plan.w_chain(t), time_key(t));
                const double u = rng.uniform(-bp.kappa_w, bp.kappa_w);
                w = bp.a_w * w + (1.0 - bp.a_w) * u;
                y.col(c) = w * e.col(c);
                if (c >= burn) w_obs(c - burn) = w;
            }
            break;
        }
        case ModelVariant::arch: {
            const auto& ap = spec.arch_params();
            Vector prev = Vector::Zero(p);
            for (Eigen::Index c = 0; c < steps; ++c) {
                const Vector h = arch_volatility_diagonal(ap, prev);
                y.col(c).noalias() = ap.a.eigen() * prev;
                y.col(c) += h.cwiseProduct(e.col(c));
                prev = y.col(c);
            }
            break;
        }
    }

    SeriesPath out;
    out.data = y.rightCols(static_cast<Eigen::Index>(n));
    out.innovations = e.rightCols(static_cast<Eigen::Index>(n));
    out.w = std::move(w_obs);
    out.seed = seed;
    out.model = std::move(model);
    if (!out.data.allFinite()) throw NumericalError("simulate: non-finite values generated");
    return out;
}

}  // namespace detail

/// Q diag(eigenvalues) Q^T with Q Haar-distributed, seeded.
inline SymmetricMatrix build_sigma0_spectrum(Eigen::Index p, const Vector& eigenvalues,
                                             std::uint64_t seed) {
    if (eigenvalues.size() != p) throw InputError("build_sigma0_spectrum: need p eigenvalues");
    if (!(eigenvalues.array() > 0.0).all()) {
        throw DomainError("build_sigma0_spectrum: eigenvalues must be positive");
    }
    CounterRng rng(seed, Stream::orthogonal, 0);
    Matrix g(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        for (Eigen::Index i = 0; i < p; ++i) g(i, j) = rng.normal();
    }
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ();
    const Matrix r = qr.matrixQR();
    for (Eigen::Index j = 0; j < p; ++j) {
        if (r(j, j) < 0.0) q.col(j) *= -1.0;
    }
    return SymmetricMatrix(Matrix(q * eigenvalues.asDiagonal() * q.transpose()));
}

inline SeriesPath simulate(const ModelSpec& spec, std::size_t n, std::uint64_t seed) {
    return detail::generate(std::make_shared<const ModelSpec>(spec), n, seed, std::nullopt);
}

inline SeriesPath simulate_var(const ModelSpec& spec, std::size_t n, std::uint64_t seed) {
    if (spec.variant() != ModelVariant::var) throw InputError("simulate_var: not a VAR spec");
    return simulate(spec, n, seed);
}

inline SeriesPath simulate_banna(const ModelSpec& spec, std::size_t n, std::uint64_t seed) {
    if (spec.variant() != ModelVariant::banna) throw InputError("simulate_banna: not a BANNA spec");
    return simulate(spec, n, seed);
}

inline SeriesPath simulate_arch(const ModelSpec& spec, std::size_t n, std::uint64_t seed) {
    if (spec.variant() != ModelVariant::arch) throw InputError("simulate_arch: not an ARCH spec");
    return simulate(spec, n, seed);
}

/// Original path plus a copy whose history up to index j is redrawn
/// independently; innovations (and the W-chain inputs) agree for t > j.
inline CoupledPair simulate_coupled(const ModelSpec& spec, std::size_t j, std::size_t n,
                                    std::uint64_t seed) {
    if (j >= n) throw InputError("simulate_coupled: split index must be < n");
    auto model = std::make_shared<const ModelSpec>(spec);
    CoupledPair pair;
    pair.original = detail::generate(model, n, seed, std::nullopt);
    pair.coupled = detail::generate(model, n, seed, static_cast<std::int64_t>(j));
    pair.split_index = j;
    return pair;
}

}  // namespace acov

#pragma once

// Sample autocovariance, deviation statistics, subgaussian constants,
// coupling-based tau estimates and windowed variance-proxy estimates.
//
// Monte Carlo routines derive one seed per replicate,
//   seed_r = derive_seed(seed, cell_index, r),
// run replicates on a worker pool and reduce results in replicate order, so
// their output does not depend on the number of workers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "acov/error.hpp"
#include "acov/matrix_core.hpp"
#include "acov/models.hpp"
#include "acov/parallel.hpp"
#include "acov/rng.hpp"

namespace acov {

// ---------------------------------------------------------------------------
// Sample autocovariance and deviations

/// (n - m)^{-1} sum_{i=1}^{n-m} Y_i Y_{i+m}^T for a p x n data matrix.
inline Matrix sample_autocov(const Matrix& data, std::size_t m) {
    const auto n = data.cols();
    if (static_cast<Eigen::Index>(m) >= n) throw InputError("sample_autocov: lag must be < n");
    const auto count = n - static_cast<Eigen::Index>(m);
    const auto p = data.rows();
    Matrix out(p, p);
    if (m == 0) {
        out.setZero();
        out.selfadjointView<Eigen::Lower>().rankUpdate(data, 1.0 / static_cast<double>(count));
        out.triangularView<Eigen::StrictlyUpper>() = out.transpose();
    } else {
        out.noalias() = data.leftCols(count) * data.rightCols(count).transpose();
        out /= static_cast<double>(count);
    }
    return out;
}

inline DenseMatrix sample_autocov(const SeriesPath& path, std::size_t m) {
    return DenseMatrix(sample_autocov(path.data, m));
}

/// ||est - pop||.
inline double deviation_spectral(const DenseMatrix& est, const DenseMatrix& pop) {
    if (est.rows() != pop.rows() || est.cols() != pop.cols()) {
        throw InputError("deviation_spectral: shape mismatch");
    }
    return spectral_norm(DenseMatrix(Matrix(est.eigen() - pop.eigen())));
}

// ---------------------------------------------------------------------------
// Subgaussian constants

enum class KappaMode { gaussian_exact, enumerate, trace_proxy };

inline const char* to_string(KappaMode m) {
    switch (m) {
        case KappaMode::gaussian_exact: return "gaussian-exact";
        case KappaMode::enumerate: return "enumerate";
        case KappaMode::trace_proxy: return "trace-proxy";
    }
    return "?";
}

struct KappaPair {
    double kappa1 = 0.0;
    double kappa_star = 0.0;
    KappaMode mode = KappaMode::gaussian_exact;

    double r_star() const { return (kappa_star * kappa_star) / (kappa1 * kappa1); }
};

/// kappa_1 and kappa_* for Y ~ N(0, sigma0). kappa_1 = sqrt(8/3) sqrt(lambda_max);
/// kappa_* = sqrt(8/3) max_{v in {-1,1}^p} sqrt(v^T sigma0 v) by enumeration, or
/// sqrt(8/3) sqrt(Tr sigma0) in trace-proxy mode.
inline KappaPair kappa_pair(const SymmetricMatrix& sigma0, KappaMode mode) {
    if (!sigma0.is_psd()) throw DomainError("kappa_pair: sigma0 is not PSD");
    KappaPair out;
    out.mode = mode;
    out.kappa1 = kGaussianPsi2 * std::sqrt(std::max(sigma0.lambda_max(), 0.0));
    if (mode == KappaMode::trace_proxy) {
        out.kappa_star = kGaussianPsi2 * std::sqrt(std::max(sigma0.trace(), 0.0));
    } else {
        if (sigma0.dim() > 20) throw CapabilityError("kappa_pair: enumeration requires p <= 20");
        out.kappa_star =
            kGaussianPsi2 * std::sqrt(InnovationSpec::hypercube_max_quadratic(sigma0.eigen()));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Least-squares fits

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_se = 0.0;
    double r2 = 0.0;
    std::size_t points = 0;

    double ci_low() const { return slope - 1.959963984540054 * slope_se; }
    double ci_high() const { return slope + 1.959963984540054 * slope_se; }
};

/// Ordinary least squares y = intercept + slope * x with normal-theory slope SE.
inline LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw InputError("linear_fit: need >= 2 paired points");
    const auto n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx == 0.0) throw InputError("linear_fit: x values are all equal");
    LinearFit fit;
    fit.points = x.size();
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - fit.intercept - fit.slope * x[i];
        sse += r * r;
    }
    fit.r2 = syy > 0.0 ? 1.0 - sse / syy : 1.0;
    fit.slope_se = x.size() > 2 ? std::sqrt(sse / (n - 2.0) / sxx) : 0.0;
    return fit;
}

// ---------------------------------------------------------------------------
// Coupling-based tau estimates

struct TauEstimate {
    std::vector<std::size_t> lags;
    std::vector<double> values;
    double epsilon = 1.0;
    std::size_t replications = 0;
    double fit_rate = -std::numeric_limits<double>::infinity();  ///< -inf: fit skipped
    double fit_r2 = std::numeric_limits<double>::quiet_NaN();
    double fit_rate_se = std::numeric_limits<double>::quiet_NaN();

    bool fit_skipped() const { return std::isinf(fit_rate) && fit_rate < 0.0; }
};

/// For each lag k: (E ||Y_{j+k} - Y~_{j+k}||_2^{1+eps})^{1/(1+eps)} over coupled
/// pairs split at j, then a least-squares fit of log value against lag.
inline TauEstimate tau_hat(const ModelSpec& spec, std::size_t j, const std::vector<std::size_t>& lags,
                           double epsilon, std::size_t reps, std::uint64_t seed,
                           unsigned workers = 1, std::uint64_t cell_index = 0) {
    if (reps < 30) throw InputError("tau_hat: reps must be >= 30");
    if (lags.empty()) throw InputError("tau_hat: lags must be nonempty");
    if (!(epsilon >= 0.0)) throw DomainError("tau_hat: epsilon must be >= 0");
    for (std::size_t i = 0; i < lags.size(); ++i) {
        if (lags[i] < 1) throw InputError("tau_hat: lags must be >= 1");
        if (i > 0 && lags[i] <= lags[i - 1]) throw InputError("tau_hat: lags must be increasing");
    }
    const std::size_t n = j + lags.back();
    const double power = 1.0 + epsilon;

    std::vector<std::vector<double>> per_rep(reps);
    parallel_for(reps, workers, [&](std::size_t r) {
        const CoupledPair pair = simulate_coupled(spec, j, n, derive_seed(seed, cell_index, r));
        auto& out = per_rep[r];
        out.resize(lags.size());
        for (std::size_t i = 0; i < lags.size(); ++i) {
            const auto col = static_cast<Eigen::Index>(j + lags[i] - 1);
            const double d = (pair.original.data.col(col) - pair.coupled.data.col(col)).norm();
            out[i] = std::pow(d, power);
        }
    });

    TauEstimate est;
    est.lags = lags;
    est.epsilon = epsilon;
    est.replications = reps;
    est.values.resize(lags.size());
    for (std::size_t i = 0; i < lags.size(); ++i) {
        CompensatedSum acc;
        for (std::size_t r = 0; r < reps; ++r) acc.add(per_rep[r][i]);
        est.values[i] = std::pow(acc.value() / static_cast<double>(reps), 1.0 / power);
    }

    std::vector<double> x, y;
    for (std::size_t i = 0; i < lags.size(); ++i) {
        if (est.values[i] > 0.0) {
            x.push_back(static_cast<double>(lags[i]));
            y.push_back(std::log(est.values[i]));
        }
    }
    if (x.size() >= 2) {
        const LinearFit fit = linear_fit(x, y);
        est.fit_rate = fit.slope;
        est.fit_r2 = fit.r2;
        est.fit_rate_se = fit.slope_se;
    }
    return est;
}

// ---------------------------------------------------------------------------
// Variance proxy over contiguous windows

/// Window lengths 1, 2, 4, ... below n, plus n itself.
inline std::vector<std::size_t> window_lengths(std::size_t n) {
    std::vector<std::size_t> out;
    for (std::size_t len = 1; len < n; len *= 2) out.push_back(len);
    out.push_back(n);
    return out;
}

/// Window starts for length len in [0, n - len]: all of them when there are at
/// most max_starts, otherwise max_starts evenly spaced ones including both ends.
inline std::vector<std::size_t> window_starts(std::size_t n, std::size_t len, std::size_t max_starts) {
    const std::size_t span = n - len;
    std::vector<std::size_t> out;
    if (span + 1 <= max_starts) {
        for (std::size_t s = 0; s <= span; ++s) out.push_back(s);
    } else {
        for (std::size_t i = 0; i < max_starts; ++i) {
            out.push_back(static_cast<std::size_t>(
                std::llround(static_cast<double>(i) * static_cast<double>(span) /
                             static_cast<double>(max_starts - 1))));
        }
        out.erase(std::unique(out.begin(), out.end()), out.end());
    }
    return out;
}

/// max over windows K of lambda_max(E (sum_{i in K} X_i - E X_i)^2) / card(K),
/// with expectations replaced by averages over replicates. samples[r][i] is the
/// i-th symmetric matrix of replicate r. The mean E X_i is pooled over all
/// indices and replicates (stationarity).
inline double nu_squared_windows(const std::vector<std::vector<Matrix>>& samples,
                                 std::size_t max_starts = 8) {
    if (samples.empty() || samples.front().empty()) throw InputError("nu_squared_windows: no samples");
    const std::size_t reps = samples.size();
    const std::size_t n = samples.front().size();
    const auto dim = samples.front().front().rows();

    Matrix mean = Matrix::Zero(dim, dim);
    for (const auto& rep : samples) {
        if (rep.size() != n) throw InputError("nu_squared_windows: ragged samples");
        for (const auto& x : rep) mean += x;
    }
    mean /= static_cast<double>(reps * n);

    // prefix[r][i] = sum_{k < i} (X_{r,k} - mean)
    std::vector<std::vector<Matrix>> prefix(reps, std::vector<Matrix>(n + 1));
    for (std::size_t r = 0; r < reps; ++r) {
        prefix[r][0] = Matrix::Zero(dim, dim);
        for (std::size_t i = 0; i < n; ++i) prefix[r][i + 1] = prefix[r][i] + samples[r][i] - mean;
    }

    double best = 0.0;
    for (std::size_t len : window_lengths(n)) {
        for (std::size_t start : window_starts(n, len, max_starts)) {
            Matrix second = Matrix::Zero(dim, dim);
            for (std::size_t r = 0; r < reps; ++r) {
                const Matrix s = prefix[r][start + len] - prefix[r][start];
                second.noalias() += s * s;
            }
            second /= static_cast<double>(reps);
            const double value = detail::symmetric_lambda_max(0.5 * (second + second.transpose())) /
                                 static_cast<double>(len);
            best = std::max(best, value);
        }
    }
    return best;
}

/// Truncated X_i = (Y_i Y_i^T)^M for m = 0, or the dilation of the truncated
/// Z_i = (Y_i Y_{i+m}^T)^M for m > 0, i = 1..n-m.
inline std::vector<Matrix> truncated_products(const Matrix& data, std::size_t m, double level) {
    const auto n = data.cols();
    const auto p = data.rows();
    const auto count = n - static_cast<Eigen::Index>(m);
    std::vector<Matrix> out;
    out.reserve(static_cast<std::size_t>(std::max<Eigen::Index>(count, 0)));
    for (Eigen::Index i = 0; i < count; ++i) {
        const auto y = data.col(i);
        const auto z = data.col(i + static_cast<Eigen::Index>(m));
        const double norm = y.norm() * z.norm();  // ||y z^T|| for a rank-one product
        const double scale = norm > level ? level / norm : 1.0;
        if (m == 0) {
            out.emplace_back(scale * (y * y.transpose()));
        } else {
            Matrix dil = Matrix::Zero(2 * p, 2 * p);
            dil.topRightCorner(p, p) = scale * (y * z.transpose());
            dil.bottomLeftCorner(p, p) = dil.topRightCorner(p, p).transpose();
            out.push_back(std::move(dil));
        }
    }
    return out;
}

/// Contiguous-window Monte Carlo estimate of the variance proxy of the
/// truncated lag-m products. A lower bound on the supremum over all subsets.
inline double nu_squared_window_estimate(const ModelSpec& spec, std::size_t n, double level,
                                         std::size_t m, std::size_t reps, std::uint64_t seed,
                                         unsigned workers = 1, std::uint64_t cell_index = 0) {
    if (reps < 100) throw InputError("nu_squared_window_estimate: reps must be >= 100");
    if (!(level > 0.0)) throw DomainError("nu_squared_window_estimate: level must be positive");
    if (m >= n) throw InputError("nu_squared_window_estimate: lag must be < n");
    std::vector<std::vector<Matrix>> samples(reps);
    parallel_for(reps, workers, [&](std::size_t r) {
        const SeriesPath path = simulate(spec, n, derive_seed(seed, cell_index, r));
        samples[r] = truncated_products(path.data, m, level);
    });
    return nu_squared_windows(samples);
}

// ---------------------------------------------------------------------------
// Monte Carlo deviation of the sample autocovariance

struct DeviationStats {
    double mean = 0.0;
    double std_error = 0.0;
    std::map<double, double> quantiles;
    std::vector<double> raw;
    std::string population_source;  ///< "exact" or "reference-path"
    std::size_t reference_length = 0;
};

/// Nearest-rank quantile of an ascending-sorted sample.
inline double nearest_rank(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw InputError("nearest_rank: empty sample");
    const auto n = static_cast<double>(sorted.size());
    auto rank = static_cast<std::size_t>(std::ceil(q * n));
    rank = std::clamp<std::size_t>(rank, 1, sorted.size());
    return sorted[rank - 1];
}

/// Population Sigma_m: exact for VAR(1), otherwise the sample autocovariance of
/// one reference path of length 50 n.
struct PopulationAutocov {
    DenseMatrix sigma;
    std::string source;
    std::size_t reference_length = 0;
};

inline PopulationAutocov population_autocov(const ModelSpec& spec, std::size_t n, std::size_t m,
                                            std::uint64_t seed) {
    if (spec.variant() == ModelVariant::var && spec.var_params().coefficients.size() == 1) {
        const auto& a = spec.var_params().coefficients.front();
        const SymmetricMatrix sigma0 = stationary_var1_covariance(a, spec.innovations().covariance());
        return {var1_autocovariance(a, sigma0, m), "exact", 0};
    }
    const std::size_t n_ref = std::max<std::size_t>(50 * n, m + 2);
    const SeriesPath ref = simulate(spec, n_ref, derive_seed(seed, static_cast<std::uint64_t>(Stream::reference), ~std::uint64_t{0}));
    return {sample_autocov(ref, m), "reference-path", n_ref};
}

inline DeviationStats summarize(std::vector<double> raw) {
    DeviationStats stats;
    const auto reps = raw.size();
    CompensatedSum sum;
    for (double d : raw) sum.add(d);
    stats.mean = sum.value() / static_cast<double>(reps);
    CompensatedSum sq;
    for (double d : raw) sq.add((d - stats.mean) * (d - stats.mean));
    const double var = reps > 1 ? sq.value() / static_cast<double>(reps - 1) : 0.0;
    stats.std_error = std::sqrt(var / static_cast<double>(reps));
    std::vector<double> sorted = raw;
    std::sort(sorted.begin(), sorted.end());
    for (double q : {0.5, 0.9, 0.95, 0.99}) stats.quantiles[q] = nearest_rank(sorted, q);
    stats.raw = std::move(raw);
    return stats;
}

/// Replicated ||Sigma_hat_m - Sigma_m|| over independent paths.
inline DeviationStats monte_carlo_deviation(const ModelSpec& spec, std::size_t n, std::size_t m,
                                            std::size_t reps, std::uint64_t seed,
                                            unsigned workers = 1, std::uint64_t cell_index = 0,
                                            std::optional<DenseMatrix> population = std::nullopt) {
    if (reps < 30) throw InputError("monte_carlo_deviation: reps must be >= 30");
    if (m >= n) throw InputError("monte_carlo_deviation: lag must be < n");
    PopulationAutocov pop = population ? PopulationAutocov{*population, "supplied", 0}
                                       : population_autocov(spec, n, m, derive_seed(seed, cell_index, ~std::uint64_t{0}));
    auto model = std::make_shared<const ModelSpec>(spec);
    std::vector<double> raw(reps);
    parallel_for(reps, workers, [&](std::size_t r) {
        const SeriesPath path =
            detail::generate(model, n, derive_seed(seed, cell_index, r), std::nullopt);
        const Matrix diff = sample_autocov(path.data, m) - pop.sigma.eigen();
        raw[r] = m == 0 ? detail::symmetric_spectral_norm(diff)
                        : detail::rectangular_spectral_norm(diff);
    });
    DeviationStats stats = summarize(std::move(raw));
    stats.population_source = pop.source;
    stats.reference_length = pop.reference_length;
    return stats;
}

}  // namespace acov

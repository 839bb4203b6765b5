#pragma once

// Grid execution for each experiment kind.
//
// Cells are processed in a fixed order and numbered from 0; replicate r of
// cell c draws from seed derive_seed(master_seed, c, r). Replicates run in
// parallel and are reduced in index order, so the worker count never changes
// a reported number.

#include <chrono>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "acov/bounds.hpp"
#include "acov/cantor.hpp"
#include "acov/estimators.hpp"
#include "acov/harness/config.hpp"
#include "acov/harness/report.hpp"
#include "acov/models.hpp"
#include "acov/parallel.hpp"

namespace acov::harness {

/// Tag mixed into the seed of the Haar rotation applied to a spectrum.
inline constexpr std::uint64_t kSpectrumSeedTag = 0x5350454354524D00ULL;

namespace detail {

struct ModelPoint {
    std::size_t model_index;
    std::string label;
    std::size_t p;
    std::size_t spectrum_index;
    std::string spectrum;
    ModelSpec spec;
};

inline std::optional<SymmetricMatrix> spectrum_covariance(const ExperimentConfig& cfg, std::size_t p,
                                                          std::size_t s) {
    const SpectrumChoice& choice = cfg.grids.spectra[s];
    if (choice.kind == "identity") return std::nullopt;
    const Vector ev = choice.eigenvalues_for(static_cast<Eigen::Index>(p));
    return build_sigma0_spectrum(static_cast<Eigen::Index>(p), ev,
                                 derive_seed(cfg.master_seed, kSpectrumSeedTag, (std::uint64_t{p} << 16) | s));
}

/// Model x p x spectrum, in that nesting order.
inline std::vector<ModelPoint> model_points(const ExperimentConfig& cfg) {
    std::vector<ModelPoint> out;
    for (std::size_t i = 0; i < cfg.models.size(); ++i) {
        const std::string path = cfg.models.size() == 1 ? "model" : "model[" + std::to_string(i) + "]";
        for (std::size_t p : cfg.grids.p) {
            for (std::size_t s = 0; s < cfg.grids.spectra.size(); ++s) {
                std::optional<SymmetricMatrix> sigma;
                try {
                    sigma = spectrum_covariance(cfg, p, s);
                } catch (const Error& e) {
                    throw ValidationError("grids.spectra[" + std::to_string(s) + "]", e.what());
                }
                out.push_back({i, model_label(cfg.models[i]), p, s, cfg.grids.spectra[s].label(),
                               build_model(cfg.models[i], static_cast<Eigen::Index>(p), sigma, path)});
            }
        }
    }
    return out;
}

/// Stationary Sigma_0 for VAR(1), otherwise the innovation covariance.
inline SymmetricMatrix reference_covariance(const ModelSpec& spec) {
    if (spec.variant() == ModelVariant::var && spec.var_params().coefficients.size() == 1) {
        return stationary_var1_covariance(spec.var_params().coefficients.front(), spec.innovations().covariance());
    }
    return spec.innovations().covariance();
}

inline ordered_json fit_json(const LinearFit& f) {
    return {{"slope", num(f.slope)},       {"slope_se", num(f.slope_se)}, {"ci_low", num(f.ci_low())},
            {"ci_high", num(f.ci_high())},   {"intercept", num(f.intercept)}, {"r2", num(f.r2)},
            {"points", f.points}};
}

inline std::string point_key(const ModelPoint& mp) {
    return mp.label + "|p=" + std::to_string(mp.p) + "|" + mp.spectrum;
}

// ---------------------------------------------------------------------------

inline void run_rate_scan(const ExperimentConfig& cfg, unsigned workers, ExperimentReport& rep) {
    rep.columns = {"cell", "model", "p", "spectrum", "m", "n", "reps", "effective_rank", "sigma_norm",
                   "mean_deviation", "std_error", "q50", "q90", "q95", "q99", "theorem22_bound",
                   "ratio_to_theorem22", "population_source"};
    struct Row {
        std::string point;
        std::size_t m, n;
        double r, mean;
    };
    std::vector<Row> rows;
    std::uint64_t cell = 0;
    for (const ModelPoint& mp : model_points(cfg)) {
        const SymmetricMatrix sigma0 = reference_covariance(mp.spec);
        const double r = effective_rank(sigma0);
        for (std::size_t m : cfg.grids.m) {
            for (std::size_t n : cfg.grids.n) {
                const DeviationStats st = monte_carlo_deviation(mp.spec, n, m, cfg.reps, cfg.master_seed, workers, cell);
                const double t22 = theorem22_bound(sigma0, n, m, cfg.constants.theorem22_c);
                ordered_json c;
                c["cell"] = cell;
                c["model"] = mp.label;
                c["p"] = mp.p;
                c["spectrum"] = mp.spectrum;
                c["m"] = m;
                c["n"] = n;
                c["reps"] = cfg.reps;
                c["effective_rank"] = num(r);
                c["sigma_norm"] = num(spectral_norm(sigma0));
                c["mean_deviation"] = num(st.mean);
                c["std_error"] = num(st.std_error);
                c["q50"] = num(st.quantiles.at(0.5));
                c["q90"] = num(st.quantiles.at(0.9));
                c["q95"] = num(st.quantiles.at(0.95));
                c["q99"] = num(st.quantiles.at(0.99));
                c["theorem22_bound"] = num(t22);
                c["ratio_to_theorem22"] = num(st.mean / t22);
                c["population_source"] = st.population_source;
                rep.cells.push_back(std::move(c));
                rows.push_back({point_key(mp), m, n, r, st.mean});
                ++cell;
            }
        }
    }

    // log mean vs log n, per (model, p, spectrum, m)
    ordered_json n_fits = ordered_json::array();
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> by_n;
    std::vector<std::string> n_order;
    for (const Row& row : rows) {
        const std::string key = row.point + "|m=" + std::to_string(row.m);
        if (!by_n.count(key)) n_order.push_back(key);
        by_n[key].first.push_back(std::log(static_cast<double>(row.n)));
        by_n[key].second.push_back(std::log(row.mean));
    }
    for (const std::string& key : n_order) {
        const auto& [x, y] = by_n[key];
        if (x.size() < 2) continue;
        const LinearFit f = linear_fit(x, y);
        ordered_json fj = {{"group", key}, {"fit", fit_json(f)}};
        if (cfg.slope_range) {
            const bool ok = f.slope >= cfg.slope_range->first && f.slope <= cfg.slope_range->second;
            fj["pass"] = ok;
            rep.pass_flags["n_slope:" + key] = ok;
        }
        n_fits.push_back(std::move(fj));
    }
    rep.summary["n_slope_fits"] = std::move(n_fits);

    // log mean vs log r and the spread of mean / sqrt(r), per (model, p, m, n)
    ordered_json r_fits = ordered_json::array();
    std::map<std::string, std::vector<const Row*>> by_r;
    std::vector<std::string> r_order;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const Row& row = rows[i];
        const std::string model_p = row.point.substr(0, row.point.rfind('|'));
        const std::string key = model_p + "|m=" + std::to_string(row.m) + "|n=" + std::to_string(row.n);
        if (!by_r.count(key)) r_order.push_back(key);
        by_r[key].push_back(&row);
    }
    for (const std::string& key : r_order) {
        const auto& group = by_r[key];
        if (group.size() < 2) continue;
        std::vector<double> x, y;
        double lo = std::numeric_limits<double>::infinity();
        double hi = 0.0;
        for (const Row* row : group) {
            x.push_back(std::log(row->r));
            y.push_back(std::log(row->mean));
            const double scaled = row->mean / std::sqrt(row->r);
            lo = std::min(lo, scaled);
            hi = std::max(hi, scaled);
        }
        ordered_json fj = {{"group", key}, {"max_over_min_mean_over_sqrt_r", num(hi / lo)}};
        bool distinct_r = false;
        for (double v : x) distinct_r = distinct_r || std::abs(v - x.front()) > 1e-12;
        if (distinct_r) fj["fit"] = fit_json(linear_fit(x, y));
        if (cfg.r_ratio_max) {
            const bool ok = hi / lo <= *cfg.r_ratio_max;
            fj["pass"] = ok;
            rep.pass_flags["r_ratio:" + key] = ok;
        }
        r_fits.push_back(std::move(fj));
    }
    rep.summary["r_fits"] = std::move(r_fits);
}

inline void run_bound_check(const ExperimentConfig& cfg, unsigned workers, ExperimentReport& rep) {
    rep.columns = {"cell", "model", "p", "spectrum", "m", "n", "reps", "mean_deviation", "std_error",
                   "mean_plus_2se", "gaussian_bound", "ratio", "pass"};
    bool all = true;
    std::uint64_t cell = 0;
    for (const ModelPoint& mp : model_points(cfg)) {
        if (!mp.spec.exact_stationary_init()) {
            throw ValidationError("model[" + std::to_string(mp.model_index) + "]",
                                  "bound-check needs a Gaussian VAR(1) or i.i.d. Gaussian model");
        }
        const DenseMatrix& a = mp.spec.var_params().coefficients.front();
        const SymmetricMatrix sigma0 = stationary_var1_covariance(a, mp.spec.innovations().covariance());
        const DenseMatrix s0 = sigma0.dense();
        // Sigma_m = Sigma_0 (A^T)^m, built incrementally.
        std::vector<DenseMatrix> seq{s0};
        auto sigma = [&](std::size_t m) -> DenseMatrix {
            while (seq.size() <= m) seq.emplace_back(Matrix(seq.back().eigen() * a.eigen().transpose()));
            return seq[m];
        };
        for (std::size_t m : cfg.grids.m) {
            for (std::size_t n : cfg.grids.n) {
                const DeviationStats st =
                    monte_carlo_deviation(mp.spec, n, m, cfg.reps, cfg.master_seed, workers, cell, s0);
                const double bound = gaussian_moment_bound(sigma, n);
                const double upper = st.mean + 2.0 * st.std_error;
                const bool ok = upper <= bound;
                all = all && ok;
                ordered_json c;
                c["cell"] = cell;
                c["model"] = mp.label;
                c["p"] = mp.p;
                c["spectrum"] = mp.spectrum;
                c["m"] = m;
                c["n"] = n;
                c["reps"] = cfg.reps;
                c["mean_deviation"] = num(st.mean);
                c["std_error"] = num(st.std_error);
                c["mean_plus_2se"] = num(upper);
                c["gaussian_bound"] = num(bound);
                c["ratio"] = num(upper / bound);
                c["pass"] = ok;
                rep.cells.push_back(std::move(c));
                ++cell;
            }
        }
    }
    rep.pass_flags["bound_dominance"] = all;
}

inline void run_tau_scan(const ExperimentConfig& cfg, unsigned workers, ExperimentReport& rep) {
    rep.columns = {"cell", "model", "p", "spectrum", "coupling_index", "lag_min", "lag_max", "reps",
                   "epsilon", "fit_rate", "fit_rate_se", "ci_low", "ci_high", "fit_r2", "analytic_rate",
                   "rate_gap", "pass"};
    ordered_json curves = ordered_json::array();
    bool all = true;
    std::uint64_t cell = 0;
    for (const ModelPoint& mp : model_points(cfg)) {
        const TauEstimate est = tau_hat(mp.spec, cfg.coupling_index, cfg.lags, cfg.constants.epsilon, cfg.reps,
                                        cfg.master_seed, workers, cell);
        const double analytic = mp.spec.contraction_log_rate();
        bool ok;
        double gap = std::numeric_limits<double>::quiet_NaN();
        if (est.fit_skipped()) {
            // Coupled paths agree exactly after the split: nothing to fit.
            ok = std::isinf(analytic);
        } else {
            gap = est.fit_rate - analytic;
            ok = cfg.two_sided ? std::abs(gap) <= cfg.rate_tolerance : gap <= cfg.rate_tolerance;
        }
        all = all && ok;
        ordered_json c;
        c["cell"] = cell;
        c["model"] = mp.label;
        c["p"] = mp.p;
        c["spectrum"] = mp.spectrum;
        c["coupling_index"] = cfg.coupling_index;
        c["lag_min"] = cfg.lags.front();
        c["lag_max"] = cfg.lags.back();
        c["reps"] = cfg.reps;
        c["epsilon"] = num(cfg.constants.epsilon);
        c["fit_rate"] = num(est.fit_rate);
        c["fit_rate_se"] = num(est.fit_rate_se);
        c["ci_low"] = num(est.fit_rate - 1.96 * est.fit_rate_se);
        c["ci_high"] = num(est.fit_rate + 1.96 * est.fit_rate_se);
        c["fit_r2"] = num(est.fit_r2);
        c["analytic_rate"] = num(analytic);
        c["rate_gap"] = num(gap);
        c["pass"] = ok;
        rep.cells.push_back(std::move(c));

        ordered_json values = ordered_json::array();
        for (double v : est.values) values.push_back(num(v));
        curves.push_back({{"cell", cell}, {"lags", est.lags}, {"tau_hat", std::move(values)}});
        ++cell;
    }
    rep.summary["tau_curves"] = std::move(curves);
    rep.pass_flags["tau_rate"] = all;
}

/// Bound on ||E E^T - Sigma_E|| over the support of a scaled-sign innovation.
inline double sign_innovation_radius(const InnovationSpec& inn) {
    const auto p = inn.dim();
    if (p > 20) throw CapabilityError("bernstein-tail: p > 20 not supported");
    const Matrix& l = inn.factor();
    const Matrix& s = inn.covariance().eigen();
    double best = 0.0;
    Vector v(p);
    const std::uint64_t patterns = std::uint64_t{1} << (p - 1);  // s and -s give the same outer product
    for (std::uint64_t mask = 0; mask < patterns; ++mask) {
        v(0) = 1.0;
        for (Eigen::Index i = 1; i < p; ++i) v(i) = ((mask >> (i - 1)) & 1U) ? -1.0 : 1.0;
        const Vector e = l * v;
        best = std::max(best, acov::detail::symmetric_spectral_norm(Matrix(e * e.transpose() - s)));
    }
    return best;
}

inline void run_bernstein_tail(const ExperimentConfig& cfg, unsigned workers, ExperimentReport& rep) {
    rep.columns = {"cell", "model", "p", "n", "x", "reps", "empirical_tail", "bernstein_bound",
                   "bernstein_bound_clipped", "nu_sq_analytic", "nu_sq_window_estimate", "psi1", "psi2",
                   "bound_M", "pass"};
    ordered_json groups = ordered_json::array();
    bool all = true;
    std::uint64_t cell = 0;
    std::uint64_t group = 0;
    for (const ModelPoint& mp : model_points(cfg)) {
        const ModelSpec& spec = mp.spec;
        if (spec.innovations().kind() != InnovationKind::scaled_sign) {
            throw ValidationError("model[" + std::to_string(mp.model_index) + "].innovation.kind",
                                  "bernstein-tail needs bounded (scaled_sign) innovations");
        }
        const auto& bp = spec.banna_params();
        if (!(bp.a_w > 0.0)) {
            throw ValidationError("model[" + std::to_string(mp.model_index) + "].a_w", "must be > 0 here");
        }
        const double radius = sign_innovation_radius(spec.innovations());
        if (!(radius > 0.0)) throw DomainError("bernstein-tail: innovation radius is zero");
        // X_t = W_t (E_t E_t^T - Sigma_E): ||X_t|| <= kappa_W * radius = M, and
        // ||X_{j+k} - X~_{j+k}|| <= radius |W - W~| <= 2 M a_W^k.
        const double bound_m = bp.kappa_w * radius;
        const double psi1 = 2.0 * bp.a_w;
        const double psi2 = std::log(1.0 / bp.a_w);
        BoundParams nu_bp;
        nu_bp.kappa1 = 1.0;
        nu_bp.kappa_star = 1.0;
        nu_bp.gamma1 = psi1;
        nu_bp.gamma3 = psi1;
        nu_bp.gamma2 = psi2;
        nu_bp.gamma4 = psi2;
        nu_bp.epsilon = cfg.constants.epsilon;
        nu_bp.c_universal = cfg.constants.c_universal;
        nu_bp.c_prime = cfg.constants.c_prime;
        const double nu_sq = bound_m * bound_m * nu_squared_analytic_bound(nu_bp, 0);
        const Matrix& sigma_e = spec.innovations().covariance().eigen();

        for (std::size_t n : cfg.grids.n) {
            std::vector<double> lambda(cfg.reps);
            std::vector<std::vector<Matrix>> products(cfg.reps);
            parallel_for(cfg.reps, workers, [&](std::size_t r) {
                const SeriesPath path = simulate(spec, n, derive_seed(cfg.master_seed, group, r));
                auto& xs = products[r];
                xs.reserve(n);
                Matrix sum = Matrix::Zero(mp.p, mp.p);
                for (Eigen::Index t = 0; t < path.n(); ++t) {
                    const Vector e = path.innovations.col(t);
                    xs.emplace_back(path.w(t) * (e * e.transpose() - sigma_e));
                    sum += xs.back();
                }
                lambda[r] = acov::detail::symmetric_lambda_max(sum);
            });
            const double nu_window = nu_squared_windows(products);

            const MixingParams mix{psi1, psi2, bound_m, nu_sq};
            ordered_json gj = {{"group", group}, {"model", mp.label}, {"p", mp.p}, {"n", n},
                               {"bound_M", num(bound_m)}, {"psi1", num(psi1)}, {"psi2", num(psi2)},
                               {"psi_tilde", num(psi_tilde(psi1, psi2, n, mp.p))},
                               {"nu_sq_analytic", num(nu_sq)}, {"nu_sq_window_estimate", num(nu_window)}};
            std::size_t informative = 0;
            for (double x : cfg.x_grid) {
                std::size_t hits = 0;
                for (double l : lambda) hits += l >= x ? 1 : 0;
                const double empirical = static_cast<double>(hits) / static_cast<double>(cfg.reps);
                const double raw = bernstein_tail(x, mix, n, mp.p);
                const double clipped = std::min(1.0, raw);
                if (raw < 1.0) ++informative;
                const bool ok = empirical <= clipped;
                all = all && ok;
                ordered_json c;
                c["cell"] = cell;
                c["model"] = mp.label;
                c["p"] = mp.p;
                c["n"] = n;
                c["x"] = num(x);
                c["reps"] = cfg.reps;
                c["empirical_tail"] = num(empirical);
                c["bernstein_bound"] = num(raw);
                c["bernstein_bound_clipped"] = num(clipped);
                c["nu_sq_analytic"] = num(nu_sq);
                c["nu_sq_window_estimate"] = num(nu_window);
                c["psi1"] = num(psi1);
                c["psi2"] = num(psi2);
                c["bound_M"] = num(bound_m);
                c["pass"] = ok;
                rep.cells.push_back(std::move(c));
                ++cell;
            }
            gj["grid_points_below_one"] = informative;
            groups.push_back(std::move(gj));
            ++group;
        }
    }
    rep.summary["groups"] = std::move(groups);
    rep.pass_flags["tail_dominance"] = all;
}

inline void run_cantor_check(const ExperimentConfig& cfg, ExperimentReport& rep) {
    rep.columns = {"B", "ell", "card_KB", "degenerate", "prop1", "prop2", "prop3", "prop4", "prop5", "prop6"};
    bool all = true;
    std::int64_t applicable = 0;
    for (std::int64_t b = cfg.b_min; b <= cfg.b_max; ++b) {
        const CantorStructure c = build_cantor(b);
        const CantorReport r = verify_cantor_properties(c);
        ordered_json row;
        row["B"] = b;
        row["ell"] = c.ell;
        row["card_KB"] = c.k_b.size();
        row["degenerate"] = c.degenerate;
        for (int i = 0; i < 6; ++i) {
            const std::string key = "prop" + std::to_string(i + 1);
            if (r.applicable) row[key] = r.prop[i];
            else row[key] = nullptr;
        }
        if (r.applicable) {
            ++applicable;
            all = all && r.all();
        }
        rep.cells.push_back(std::move(row));
    }
    rep.summary["non_degenerate_count"] = applicable;
    rep.pass_flags["cantor_properties"] = all;
}

}  // namespace detail

inline ExperimentReport run_experiment(const ExperimentConfig& cfg, unsigned workers = 0) {
    const auto start = std::chrono::steady_clock::now();
    workers = resolve_workers(workers);
    ExperimentReport rep;
    rep.kind = to_string(cfg.kind);
    rep.config = config_to_json(cfg);
    rep.constants = {{"C", cfg.constants.c_universal},
                     {"C_prime", cfg.constants.c_prime},
                     {"epsilon", cfg.constants.epsilon},
                     {"theorem22_c", cfg.constants.theorem22_c}};
    switch (cfg.kind) {
        case ExperimentKind::rate_scan: detail::run_rate_scan(cfg, workers, rep); break;
        case ExperimentKind::bound_check: detail::run_bound_check(cfg, workers, rep); break;
        case ExperimentKind::tau_scan: detail::run_tau_scan(cfg, workers, rep); break;
        case ExperimentKind::bernstein_tail: detail::run_bernstein_tail(cfg, workers, rep); break;
        case ExperimentKind::cantor_check: detail::run_cantor_check(cfg, rep); break;
    }
    rep.provenance.master_seed = cfg.master_seed;
    rep.provenance.workers = workers;
    rep.provenance.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

}  // namespace acov::harness

#pragma once

// Experiment configuration: JSON ingestion and validation.
//
// Validation failures raise ValidationError carrying the JSON path of the
// offending field, e.g. "grids.n[2]" or "model[1].a1".

#include <cmath>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "acov/error.hpp"
#include "acov/models.hpp"

namespace acov::harness {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

enum class ExperimentKind { rate_scan, bound_check, tau_scan, bernstein_tail, cantor_check };

inline const char* to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::rate_scan: return "rate-scan";
        case ExperimentKind::bound_check: return "bound-check";
        case ExperimentKind::tau_scan: return "tau-scan";
        case ExperimentKind::bernstein_tail: return "bernstein-tail";
        case ExperimentKind::cantor_check: return "cantor-check";
    }
    return "?";
}

inline std::optional<ExperimentKind> parse_kind(const std::string& s) {
    for (auto k : {ExperimentKind::rate_scan, ExperimentKind::bound_check, ExperimentKind::tau_scan,
                   ExperimentKind::bernstein_tail, ExperimentKind::cantor_check}) {
        if (s == to_string(k)) return k;
    }
    return std::nullopt;
}

/// Eigenvalue profile of the innovation covariance, rotated by a seeded Haar
/// orthogonal matrix unless it is the identity.
struct SpectrumChoice {
    std::string kind = "identity";  ///< identity | flat_floor | geometric | explicit
    double value = 0.0;             ///< target rank (flat_floor) or ratio (geometric)
    std::vector<double> eigenvalues;

    std::string label() const;
    Vector eigenvalues_for(Eigen::Index p) const;
    bool operator==(const SpectrumChoice&) const = default;
};

struct Grids {
    std::vector<std::size_t> n;
    std::vector<std::size_t> p;
    std::vector<std::size_t> m{0};
    std::vector<SpectrumChoice> spectra{SpectrumChoice{}};
    bool operator==(const Grids&) const = default;
};

struct ConstantOverrides {
    double c_universal = 1.0;
    double c_prime = 1.0;
    double epsilon = 1.0;
    double theorem22_c = 1.0;
    bool operator==(const ConstantOverrides&) const = default;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::rate_scan;
    std::vector<json> models;  ///< each a model object; p and spectrum come from the grid
    Grids grids;
    std::size_t reps = 0;
    std::uint64_t master_seed = 0;
    ConstantOverrides constants;
    std::string output_dir = "out";

    // kind-specific
    std::vector<std::size_t> lags;         ///< tau-scan
    std::size_t coupling_index = 64;       ///< tau-scan split index j
    double rate_tolerance = 0.1;           ///< tau-scan
    bool two_sided = false;                ///< tau-scan: |fit - analytic| instead of fit - analytic
    std::vector<double> x_grid;            ///< bernstein-tail
    std::int64_t b_min = 2;                ///< cantor-check
    std::int64_t b_max = 5000;             ///< cantor-check
    std::optional<std::pair<double, double>> slope_range;  ///< rate-scan pass band for the n slope
    std::optional<double> r_ratio_max;                     ///< rate-scan pass bound on max/min of mean/sqrt(r)

    bool monte_carlo() const { return kind != ExperimentKind::cantor_check; }
};

// ---------------------------------------------------------------------------

inline std::string SpectrumChoice::label() const {
    if (kind == "identity") return "identity";
    if (kind == "explicit") return "explicit";
    std::ostringstream os;
    os << kind << ':' << value;
    return os.str();
}

inline Vector SpectrumChoice::eigenvalues_for(Eigen::Index p) const {
    Vector ev(p);
    if (kind == "identity") {
        ev.setOnes();
    } else if (kind == "flat_floor") {
        // k unit eigenvalues and a flat floor carrying the rest of the trace,
        // so that Tr / max is exactly `value`.
        const double r = value;
        if (!(r >= 1.0 && r <= static_cast<double>(p))) {
            throw DomainError("flat_floor: target rank must lie in [1, p]");
        }
        auto k = static_cast<Eigen::Index>(std::max(1.0, std::ceil(r) - 1.0));
        if (k >= p) k = p;
        const double floor_value = k < p ? (r - static_cast<double>(k)) / static_cast<double>(p - k) : 0.0;
        for (Eigen::Index i = 0; i < p; ++i) ev(i) = i < k ? 1.0 : floor_value;
        if (k < p && !(floor_value > 0.0)) {
            throw DomainError("flat_floor: target rank leaves no mass for the floor");
        }
    } else if (kind == "geometric") {
        if (!(value > 0.0 && value <= 1.0)) throw DomainError("geometric: ratio must lie in (0, 1]");
        double v = 1.0;
        for (Eigen::Index i = 0; i < p; ++i, v *= value) ev(i) = v;
    } else if (kind == "explicit") {
        if (static_cast<Eigen::Index>(eigenvalues.size()) != p) {
            throw InputError("explicit spectrum: eigenvalue count must equal p");
        }
        for (Eigen::Index i = 0; i < p; ++i) ev(i) = eigenvalues[static_cast<std::size_t>(i)];
    } else {
        throw InputError("unknown spectrum kind '" + kind + "'");
    }
    return ev;
}

inline json to_json(const SpectrumChoice& s) {
    if (s.kind == "identity") return "identity";
    if (s.kind == "explicit") return json{{"kind", "explicit"}, {"eigenvalues", s.eigenvalues}};
    return json{{"kind", s.kind}, {s.kind == "flat_floor" ? "r" : "ratio", s.value}};
}

// ---------------------------------------------------------------------------
// Field readers

namespace detail {

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object()) throw ValidationError(path, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw ValidationError(path + "." + key, "required field missing");
    return *it;
}

inline double as_double(const json& v, const std::string& path) {
    if (!v.is_number()) throw ValidationError(path, "expected a number");
    return v.get<double>();
}

inline std::uint64_t as_count(const json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer()) {
        if (v.get<std::int64_t>() < 0) throw ValidationError(path, "must be nonnegative");
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    throw ValidationError(path, "expected a nonnegative integer");
}

inline std::int64_t as_int(const json& v, const std::string& path) {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    throw ValidationError(path, "expected an integer");
}

inline std::vector<std::size_t> as_counts(const json& v, const std::string& path) {
    if (!v.is_array()) throw ValidationError(path, "expected an array");
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(static_cast<std::size_t>(as_count(v[i], path + "[" + std::to_string(i) + "]")));
    }
    return out;
}

inline std::vector<double> as_doubles(const json& v, const std::string& path) {
    if (!v.is_array()) throw ValidationError(path, "expected an array");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out.push_back(as_double(v[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

inline Matrix as_matrix(const json& v, const std::string& path) {
    if (!v.is_array() || v.empty()) throw ValidationError(path, "expected a nonempty array of rows");
    const std::size_t rows = v.size();
    if (!v[0].is_array() || v[0].empty()) throw ValidationError(path + "[0]", "expected a nonempty row");
    const std::size_t cols = v[0].size();
    Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < rows; ++i) {
        const std::string rp = path + "[" + std::to_string(i) + "]";
        if (!v[i].is_array() || v[i].size() != cols) throw ValidationError(rp, "ragged matrix row");
        for (std::size_t j = 0; j < cols; ++j) {
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                as_double(v[i][j], rp + "[" + std::to_string(j) + "]");
        }
    }
    return m;
}

/// A scalar s means s I_p; otherwise an explicit p x p matrix.
inline Matrix scalar_or_matrix(const json& v, Eigen::Index p, const std::string& path) {
    if (v.is_number()) return as_double(v, path) * Matrix::Identity(p, p);
    Matrix m = as_matrix(v, path);
    if (m.rows() != p || m.cols() != p) {
        throw ValidationError(path, "matrix must be " + std::to_string(p) + " x " + std::to_string(p));
    }
    return m;
}

inline SpectrumChoice parse_spectrum(const json& v, const std::string& path) {
    SpectrumChoice s;
    if (v.is_string()) {
        if (v.get<std::string>() != "identity") throw ValidationError(path, "unknown spectrum name");
        return s;
    }
    if (!v.is_object()) throw ValidationError(path, "expected \"identity\" or a spectrum object");
    const json& kind = require(v, "kind", path);
    if (!kind.is_string()) throw ValidationError(path + ".kind", "expected a string");
    s.kind = kind.get<std::string>();
    if (s.kind == "identity") return s;
    if (s.kind == "flat_floor") {
        s.value = as_double(require(v, "r", path), path + ".r");
        if (!(s.value >= 1.0)) throw ValidationError(path + ".r", "target rank must be >= 1");
    } else if (s.kind == "geometric") {
        s.value = as_double(require(v, "ratio", path), path + ".ratio");
        if (!(s.value > 0.0 && s.value <= 1.0)) throw ValidationError(path + ".ratio", "must lie in (0, 1]");
    } else if (s.kind == "explicit") {
        s.eigenvalues = as_doubles(require(v, "eigenvalues", path), path + ".eigenvalues");
        if (s.eigenvalues.empty()) throw ValidationError(path + ".eigenvalues", "must be nonempty");
        for (std::size_t i = 0; i < s.eigenvalues.size(); ++i) {
            if (!(s.eigenvalues[i] > 0.0)) {
                throw ValidationError(path + ".eigenvalues[" + std::to_string(i) + "]", "must be > 0");
            }
        }
    } else {
        throw ValidationError(path + ".kind", "unknown spectrum kind '" + s.kind + "'");
    }
    return s;
}

inline void check_model_object(const json& m, const std::string& path) {
    const json& variant = require(m, "variant", path);
    if (!variant.is_string()) throw ValidationError(path + ".variant", "expected a string");
    const std::string v = variant.get<std::string>();
    if (v != "iid" && v != "var" && v != "banna" && v != "arch") {
        throw ValidationError(path + ".variant", "expected one of iid, var, banna, arch");
    }
    if (v == "var") require(m, "coefficients", path);
    if (v == "banna") {
        require(m, "a_w", path);
        require(m, "kappa_w", path);
    }
    if (v == "arch") {
        require(m, "a", path);
        require(m, "a1", path);
        require(m, "a2", path);
    }
}

}  // namespace detail

/// Builds the model for one (p, innovation covariance) grid point. `sigma_e`
/// replaces an identity innovation covariance; an explicit "innovation.sigma"
/// in the model takes precedence and must then be paired with the identity
/// spectrum.
inline ModelSpec build_model(const json& m, Eigen::Index p, const std::optional<SymmetricMatrix>& sigma_e,
                             const std::string& path = "model") {
    detail::check_model_object(m, path);
    const std::string variant = m.at("variant").get<std::string>();
    if (m.contains("p") && static_cast<Eigen::Index>(detail::as_count(m.at("p"), path + ".p")) != p) {
        throw ValidationError(path + ".p", "model dimension disagrees with the p grid value");
    }

    InnovationKind kind = InnovationKind::gaussian;
    std::optional<SymmetricMatrix> sigma = sigma_e;
    if (m.contains("innovation")) {
        const json& inn = m.at("innovation");
        const std::string ip = path + ".innovation";
        if (!inn.is_object()) throw ValidationError(ip, "expected an object");
        if (inn.contains("kind")) {
            const json& k = inn.at("kind");
            if (k == "gaussian") {
                kind = InnovationKind::gaussian;
            } else if (k == "scaled_sign") {
                kind = InnovationKind::scaled_sign;
            } else {
                throw ValidationError(ip + ".kind", "expected gaussian or scaled_sign");
            }
        }
        if (inn.contains("sigma") && inn.at("sigma") != "identity") {
            if (sigma_e) throw ValidationError(ip + ".sigma", "explicit sigma cannot be combined with a spectrum grid");
            const Matrix s = detail::scalar_or_matrix(inn.at("sigma"), p, ip + ".sigma");
            if (!s.isApprox(s.transpose(), 1e-12)) throw ValidationError(ip + ".sigma", "must be symmetric");
            sigma = SymmetricMatrix(s);
        }
    }
    if (!sigma) sigma = SymmetricMatrix::identity(p);

    std::size_t burn = ModelSpec::kDefaultBurnIn;
    if (m.contains("burn_in")) burn = static_cast<std::size_t>(detail::as_count(m.at("burn_in"), path + ".burn_in"));

    try {
        InnovationSpec innovations(kind, *sigma);
        if (variant == "iid") {
            return ModelSpec::var_scaled_identity({0.0}, std::move(innovations), burn);
        }
        if (variant == "var") {
            const json& c = m.at("coefficients");
            const std::string cp = path + ".coefficients";
            if (!c.is_array() || c.empty()) throw ValidationError(cp, "expected a nonempty array");
            std::vector<DenseMatrix> coeffs;
            for (std::size_t k = 0; k < c.size(); ++k) {
                coeffs.emplace_back(detail::scalar_or_matrix(c[k], p, cp + "[" + std::to_string(k) + "]"));
            }
            std::vector<double> caps;
            if (m.contains("norm_caps")) {
                caps = detail::as_doubles(m.at("norm_caps"), path + ".norm_caps");
            } else {
                for (std::size_t k = 0; k < c.size(); ++k) {
                    if (c[k].is_number()) caps.push_back(std::abs(c[k].get<double>()));
                    else caps.push_back(spectral_norm(coeffs[k]));
                }
            }
            return ModelSpec::var(std::move(coeffs), std::move(innovations), std::move(caps), burn);
        }
        if (variant == "banna") {
            return ModelSpec::banna(detail::as_double(m.at("a_w"), path + ".a_w"),
                                    detail::as_double(m.at("kappa_w"), path + ".kappa_w"),
                                    std::move(innovations), burn);
        }
        const double baseline = m.contains("sigma0") ? detail::as_double(m.at("sigma0"), path + ".sigma0") : 1.0;
        return ModelSpec::arch(DenseMatrix(detail::scalar_or_matrix(m.at("a"), p, path + ".a")),
                               detail::as_double(m.at("a1"), path + ".a1"),
                               detail::as_double(m.at("a2"), path + ".a2"), baseline,
                               std::move(innovations), burn);
    } catch (const ValidationError&) {
        throw;
    } catch (const Error& e) {
        throw ValidationError(path, e.what());
    }
}

/// Short human-readable model label used in CSV rows.
inline std::string model_label(const json& m) {
    const std::string v = m.value("variant", std::string("?"));
    std::ostringstream os;
    os << v;
    if (m.contains("label") && m.at("label").is_string()) return m.at("label").get<std::string>();
    if (v == "var" && m.contains("coefficients")) {
        const json& c = m.at("coefficients");
        if (c.size() == 1 && c[0].is_number()) os << "(a=" << c[0].get<double>() << ")";
        else os << "(d=" << c.size() << ")";
    } else if (v == "banna") {
        os << "(a_w=" << m.value("a_w", 0.0) << ")";
    } else if (v == "arch") {
        os << "(a1=" << m.value("a1", 0.0) << ",a2=" << m.value("a2", 0.0) << ")";
    }
    return os.str();
}

inline ExperimentConfig parse_config(const json& root) {
    if (!root.is_object()) throw ValidationError("$", "config must be a JSON object");
    ExperimentConfig cfg;

    const json& kind = detail::require(root, "kind", "$");
    if (!kind.is_string() || !parse_kind(kind.get<std::string>())) {
        throw ValidationError("kind", "expected one of rate-scan, bound-check, tau-scan, bernstein-tail, cantor-check");
    }
    cfg.kind = *parse_kind(kind.get<std::string>());

    if (root.contains("master_seed")) cfg.master_seed = detail::as_count(root.at("master_seed"), "master_seed");
    if (root.contains("output_dir")) {
        if (!root.at("output_dir").is_string()) throw ValidationError("output_dir", "expected a string");
        cfg.output_dir = root.at("output_dir").get<std::string>();
    }
    if (root.contains("constants")) {
        const json& c = root.at("constants");
        if (!c.is_object()) throw ValidationError("constants", "expected an object");
        for (const auto& [key, value] : c.items()) {
            const std::string path = "constants." + key;
            const double v = detail::as_double(value, path);
            if (!(v > 0.0)) throw ValidationError(path, "must be > 0");
            if (key == "C" || key == "c_universal") cfg.constants.c_universal = v;
            else if (key == "C_prime" || key == "c_prime") cfg.constants.c_prime = v;
            else if (key == "epsilon") cfg.constants.epsilon = v;
            else if (key == "theorem22_c") cfg.constants.theorem22_c = v;
            else throw ValidationError(path, "unknown constant");
        }
    }

    if (cfg.kind == ExperimentKind::cantor_check) {
        if (root.contains("b_min")) cfg.b_min = detail::as_int(root.at("b_min"), "b_min");
        if (root.contains("b_max")) cfg.b_max = detail::as_int(root.at("b_max"), "b_max");
        if (cfg.b_min < 2) throw ValidationError("b_min", "must be >= 2");
        if (cfg.b_max < cfg.b_min) throw ValidationError("b_max", "must be >= b_min");
        return cfg;
    }

    const json& model = detail::require(root, "model", "$");
    if (model.is_object()) {
        detail::check_model_object(model, "model");
        cfg.models.push_back(model);
    } else if (model.is_array() && !model.empty()) {
        for (std::size_t i = 0; i < model.size(); ++i) {
            detail::check_model_object(model[i], "model[" + std::to_string(i) + "]");
            cfg.models.push_back(model[i]);
        }
    } else {
        throw ValidationError("model", "expected a model object or a nonempty array of them");
    }

    const json& grids = detail::require(root, "grids", "$");
    if (!grids.is_object()) throw ValidationError("grids", "expected an object");
    // tau-scan path lengths follow from coupling_index and lags instead.
    if (cfg.kind == ExperimentKind::tau_scan && !grids.contains("n")) {
        cfg.grids.n = {2};
    } else {
        cfg.grids.n = detail::as_counts(detail::require(grids, "n", "grids"), "grids.n");
    }
    cfg.grids.p = detail::as_counts(detail::require(grids, "p", "grids"), "grids.p");
    if (grids.contains("m")) cfg.grids.m = detail::as_counts(grids.at("m"), "grids.m");
    if (grids.contains("spectra")) {
        const json& s = grids.at("spectra");
        if (!s.is_array()) throw ValidationError("grids.spectra", "expected an array");
        cfg.grids.spectra.clear();
        for (std::size_t i = 0; i < s.size(); ++i) {
            cfg.grids.spectra.push_back(detail::parse_spectrum(s[i], "grids.spectra[" + std::to_string(i) + "]"));
        }
    }
    if (cfg.grids.n.empty()) throw ValidationError("grids.n", "must be nonempty");
    if (cfg.grids.p.empty()) throw ValidationError("grids.p", "must be nonempty");
    if (cfg.grids.m.empty()) throw ValidationError("grids.m", "must be nonempty");
    if (cfg.grids.spectra.empty()) throw ValidationError("grids.spectra", "must be nonempty");
    for (std::size_t i = 0; i < cfg.grids.p.size(); ++i) {
        if (cfg.grids.p[i] < 1) throw ValidationError("grids.p[" + std::to_string(i) + "]", "must be >= 1");
    }
    for (std::size_t i = 0; i < cfg.grids.n.size(); ++i) {
        if (cfg.grids.n[i] < 2) throw ValidationError("grids.n[" + std::to_string(i) + "]", "must be >= 2");
        for (std::size_t j = 0; j < cfg.grids.m.size(); ++j) {
            if (cfg.grids.m[j] >= cfg.grids.n[i]) {
                throw ValidationError("grids.m[" + std::to_string(j) + "]", "lag must be < every n");
            }
        }
    }

    cfg.reps = static_cast<std::size_t>(detail::as_count(detail::require(root, "reps", "$"), "reps"));
    if (cfg.reps < 30) throw ValidationError("reps", "must be >= 30 for Monte Carlo experiments");

    switch (cfg.kind) {
        case ExperimentKind::rate_scan:
            if (root.contains("slope_range")) {
                const auto r = detail::as_doubles(root.at("slope_range"), "slope_range");
                if (r.size() != 2 || !(r[0] <= r[1])) throw ValidationError("slope_range", "expected [low, high]");
                cfg.slope_range = std::make_pair(r[0], r[1]);
            }
            if (root.contains("r_ratio_max")) {
                cfg.r_ratio_max = detail::as_double(root.at("r_ratio_max"), "r_ratio_max");
                if (!(*cfg.r_ratio_max >= 1.0)) throw ValidationError("r_ratio_max", "must be >= 1");
            }
            break;
        case ExperimentKind::bound_check:
            for (std::size_t j = 0; j < cfg.grids.m.size(); ++j) {
                if (cfg.grids.m[j] != 0) {
                    throw ValidationError("grids.m[" + std::to_string(j) + "]", "bound-check supports lag 0 only");
                }
            }
            break;
        case ExperimentKind::tau_scan: {
            cfg.lags = detail::as_counts(detail::require(root, "lags", "$"), "lags");
            if (cfg.lags.size() < 2) throw ValidationError("lags", "need at least two lags");
            for (std::size_t i = 0; i < cfg.lags.size(); ++i) {
                const std::string lp = "lags[" + std::to_string(i) + "]";
                if (cfg.lags[i] < 1) throw ValidationError(lp, "must be >= 1");
                if (i > 0 && cfg.lags[i] <= cfg.lags[i - 1]) throw ValidationError(lp, "lags must increase");
            }
            if (root.contains("coupling_index")) {
                cfg.coupling_index = static_cast<std::size_t>(detail::as_count(root.at("coupling_index"), "coupling_index"));
            }
            if (cfg.coupling_index < 1) throw ValidationError("coupling_index", "must be >= 1");
            if (root.contains("rate_tolerance")) {
                cfg.rate_tolerance = detail::as_double(root.at("rate_tolerance"), "rate_tolerance");
                if (!(cfg.rate_tolerance >= 0.0)) throw ValidationError("rate_tolerance", "must be >= 0");
            }
            if (root.contains("two_sided")) {
                const json& t = root.at("two_sided");
                if (!t.is_boolean()) throw ValidationError("two_sided", "expected a boolean");
                cfg.two_sided = t.get<bool>();
            }
            break;
        }
        case ExperimentKind::bernstein_tail: {
            cfg.x_grid = detail::as_doubles(detail::require(root, "x_grid", "$"), "x_grid");
            if (cfg.x_grid.empty()) throw ValidationError("x_grid", "must be nonempty");
            for (std::size_t i = 0; i < cfg.x_grid.size(); ++i) {
                if (!(cfg.x_grid[i] >= 0.0)) throw ValidationError("x_grid[" + std::to_string(i) + "]", "must be >= 0");
            }
            for (std::size_t i = 0; i < cfg.models.size(); ++i) {
                if (cfg.models[i].at("variant") != "banna") {
                    throw ValidationError("model[" + std::to_string(i) + "].variant", "bernstein-tail needs a banna model");
                }
            }
            break;
        }
        case ExperimentKind::cantor_check: break;
    }
    return cfg;
}

inline json config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["kind"] = to_string(cfg.kind);
    j["master_seed"] = cfg.master_seed;
    j["output_dir"] = cfg.output_dir;
    j["constants"] = {{"c_universal", cfg.constants.c_universal},
                      {"c_prime", cfg.constants.c_prime},
                      {"epsilon", cfg.constants.epsilon},
                      {"theorem22_c", cfg.constants.theorem22_c}};
    if (cfg.kind == ExperimentKind::cantor_check) {
        j["b_min"] = cfg.b_min;
        j["b_max"] = cfg.b_max;
        return j;
    }
    j["model"] = cfg.models;
    json spectra = json::array();
    for (const auto& s : cfg.grids.spectra) spectra.push_back(to_json(s));
    j["grids"] = {{"n", cfg.grids.n}, {"p", cfg.grids.p}, {"m", cfg.grids.m}, {"spectra", spectra}};
    j["reps"] = cfg.reps;
    switch (cfg.kind) {
        case ExperimentKind::rate_scan:
            if (cfg.slope_range) j["slope_range"] = {cfg.slope_range->first, cfg.slope_range->second};
            if (cfg.r_ratio_max) j["r_ratio_max"] = *cfg.r_ratio_max;
            break;
        case ExperimentKind::tau_scan:
            j["lags"] = cfg.lags;
            j["coupling_index"] = cfg.coupling_index;
            j["rate_tolerance"] = cfg.rate_tolerance;
            j["two_sided"] = cfg.two_sided;
            break;
        case ExperimentKind::bernstein_tail: j["x_grid"] = cfg.x_grid; break;
        default: break;
    }
    return j;
}

}  // namespace acov::harness

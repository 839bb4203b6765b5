#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "acov/harness/config.hpp"
#include "acov/harness/report.hpp"
#include "acov/harness/run.hpp"

namespace {

using acov::harness::json;

json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw acov::InputError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw acov::InputError(path + ": " + e.what());
    }
}

int run_simulate(const std::string& model_path, std::size_t n, std::uint64_t seed, const std::string& out) {
    const json model = read_json(model_path);
    if (!model.contains("p")) throw acov::ValidationError("model.p", "simulate needs the dimension p");
    const auto p = static_cast<Eigen::Index>(acov::harness::detail::as_count(model.at("p"), "model.p"));
    const acov::ModelSpec spec = acov::harness::build_model(model, p, std::nullopt);
    const acov::SeriesPath path = acov::simulate(spec, n, seed);

    std::ofstream os(out, std::ios::binary | std::ios::trunc);
    if (!os) throw acov::PersistenceError("cannot open " + out + " for writing");
    os << "component";
    for (std::size_t t = 1; t <= n; ++t) os << ',' << t;
    os << '\n';
    for (Eigen::Index i = 0; i < path.p(); ++i) {
        os << i + 1;
        for (Eigen::Index t = 0; t < path.n(); ++t) os << ',' << acov::harness::format_number(path.data(i, t));
        os << '\n';
    }
    if (!os) throw acov::PersistenceError("write failed for " + out);
    std::cout << "wrote " << out << " (" << path.p() << " x " << path.n() << ")\n";
    return 0;
}

int run_kind(const std::string& kind, const std::string& config_path, const std::string& out, unsigned workers) {
    const json raw = read_json(config_path);
    acov::harness::ExperimentConfig cfg = acov::harness::parse_config(raw);
    if (acov::harness::to_string(cfg.kind) != kind) {
        throw acov::ValidationError("kind", "config is '" + std::string(acov::harness::to_string(cfg.kind)) +
                                                "' but the subcommand is '" + kind + "'");
    }
    if (!out.empty()) cfg.output_dir = out;

    const acov::harness::ExperimentReport report = acov::harness::run_experiment(cfg, workers);
    const auto manifest = acov::harness::write_report(report, cfg.output_dir);
    for (const auto& [name, ok] : report.pass_flags) {
        std::cout << (ok ? "PASS " : "FAIL ") << name << '\n';
    }
    std::cout << "wrote " << manifest.summary_json.string() << " and " << manifest.cells_csv.string() << '\n';
    return report.all_pass() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Autocovariance deviation experiments"};
    app.require_subcommand(1);
    unsigned workers = 0;
    app.add_option("--workers", workers, "worker threads (0 = one per hardware thread)");

    std::string model_path, sim_out;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    auto* sim = app.add_subcommand("simulate", "simulate one path and write it as CSV");
    sim->add_option("--model", model_path, "model JSON file")->required()->check(CLI::ExistingFile);
    sim->add_option("--n", n, "number of observations")->required()->check(CLI::PositiveNumber);
    sim->add_option("--seed", seed, "seed")->required();
    sim->add_option("--out", sim_out, "output CSV path")->required();

    std::string config_path, out_dir;
    std::string chosen;
    for (const char* kind : {"rate-scan", "bound-check", "tau-scan", "bernstein-tail", "cantor-check"}) {
        auto* sub = app.add_subcommand(kind, std::string("run a ") + kind + " experiment");
        sub->add_option("--config", config_path, "experiment config JSON")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
        sub->add_option("--workers", workers, "worker threads (0 = one per hardware thread)");
        sub->callback([&chosen, kind] { chosen = kind; });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed()) return run_simulate(model_path, n, seed, sim_out);
        return run_kind(chosen, config_path, out_dir, workers);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

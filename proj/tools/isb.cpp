// Command-line front end: generate, calibrate, run, report.
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "isb/config.hpp"
#include "isb/csv.hpp"
#include "isb/error.hpp"
#include "isb/runner.hpp"
#include "isb/synth.hpp"

namespace {

struct options {
    std::string config;
    std::optional<std::uint64_t> seed;
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    std::string dir;
    std::string out = "-";
};

isb::experiment_config load(const options& o) {
    isb::experiment_config cfg = o.config.empty() ? isb::experiment_config{} : isb::load_config(o.config);
    if (o.seed) {
        cfg.population.seed = *o.seed;
    } else if (const char* env = std::getenv("ISB_SEED"); env && *env) {
        try {
            cfg.population.seed = isb::csv::parse_int<std::uint64_t>(env);
        } catch (const isb::error&) {
            throw isb::error(isb::errc::config, std::string("ISB_SEED is not an unsigned integer: ") + env);
        }
    }
    cfg.validate();
    return cfg;
}

int cmd_generate(const options& o) {
    const auto cfg = load(o);
    const auto pop = isb::generate_population(cfg.population, cfg.plan, o.jobs);
    const auto manifest = isb::write_population(pop, cfg.output_dir / "population");
    std::cerr << "[isb] wrote " << manifest.string() << '\n';
    return 0;
}

int cmd_calibrate(const options& o) {
    const auto cfg = load(o);
    isb::experiment_session session(cfg.population, cfg.plan, o.jobs, &std::cerr);
    const auto rows = session.calibrate(cfg);
    std::filesystem::create_directories(cfg.output_dir);
    isb::write_calibration_csv(cfg.output_dir / "calibration.csv", rows);
    std::cerr << "[isb] wrote " << (cfg.output_dir / "calibration.csv").string() << '\n';
    return 0;
}

int cmd_run(const options& o) {
    const auto cfg = load(o);
    isb::run_experiment(cfg, o.jobs, &std::cerr);
    std::cerr << "[isb] wrote " << (cfg.output_dir / "results.csv").string() << '\n';
    return 0;
}

int cmd_report(const options& o) {
    std::filesystem::path dir = o.dir;
    if (dir.empty() && o.config.empty())
        throw isb::error(isb::errc::config, "report needs --dir or --config");
    if (dir.empty())
        dir = load(o).output_dir;
    const auto rows = isb::reaggregate(dir);
    const std::filesystem::path out = o.out == "-" ? std::filesystem::path("/dev/stdout") : std::filesystem::path(o.out);
    isb::write_results_csv(out, rows);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Identification search benchmark over synthetic iris templates"};
    app.require_subcommand(1);
    options o;
    app.add_option("--seed", o.seed, "Override the master seed (also ISB_SEED)");
    app.add_option("--jobs", o.jobs, "Worker threads; results do not depend on it")->check(CLI::PositiveNumber);
    app.fallthrough();

    auto* gen = app.add_subcommand("generate", "Write the synthetic population");
    auto* cal = app.add_subcommand("calibrate", "Write thresholds for each rotation policy and target");
    auto* run = app.add_subcommand("run", "Run the full sweep and write results");
    auto* rep = app.add_subcommand("report", "Recompute results from a run's transaction logs");
    for (auto* sub : {gen, cal, run})
        sub->add_option("--config", o.config, "Experiment config file")->required()->check(CLI::ExistingFile);
    rep->add_option("--config", o.config, "Experiment config file")->check(CLI::ExistingFile);
    rep->add_option("--dir", o.dir, "Run directory (default: output_dir of --config)");
    rep->add_option("--out", o.out, "Output CSV, '-' for stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        std::cerr << app.help();
        return 2;
    }

    try {
        if (*gen)
            return cmd_generate(o);
        if (*cal)
            return cmd_calibrate(o);
        if (*run)
            return cmd_run(o);
        return cmd_report(o);
    } catch (const isb::error& e) {
        std::cerr << "isb: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "isb: " << e.what() << '\n';
        return 1;
    }
}

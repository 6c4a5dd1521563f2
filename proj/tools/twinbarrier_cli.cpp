// Command-line front end: one subcommand per experiment, JSON config in,
// CSV tables and a JSON summary out.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "twinbarrier/twinbarrier.hpp"

namespace {

struct CliOptions {
    std::string config_path;
    std::string out_dir;
    std::optional<double> prominence;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    bool verbose = false;
};

int run_experiment(twinbarrier::Experiment experiment, const CliOptions& opts) {
    using namespace twinbarrier;

    ScenarioConfig config = load_config(opts.config_path);
    if (config.experiment && *config.experiment != experiment)
        throw ValidationError("experiment",
                              "config file names experiment '" + to_string(*config.experiment) +
                                  "' but the subcommand is '" + to_string(experiment) + "'");
    config.experiment = experiment;
    if (opts.prominence) config.thresholds.prominence = *opts.prominence;
    if (opts.seed) config.seed = *opts.seed;
    if (opts.threads) config.threads = *opts.threads;
    validate(config);

    const ScenarioReport report = run_scenario(config);
    const auto files = emit_report(report, opts.out_dir);

    std::printf("experiment: %s\n", to_string(report.experiment).c_str());
    for (const auto& [name, metric] : report.metrics)
        std::printf("  %-32s %.12e  [%s]\n", name.c_str(), metric.value,
                    metric.provenance.c_str());
    for (const auto& [name, ok] : report.checks)
        std::printf("  %-32s %s\n", name.c_str(), ok ? "pass" : "FAIL");
    if (opts.verbose)
        for (const auto& f : files) std::printf("wrote %s\n", f.string().c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Double-barrier tunnelling simulator"};
    app.require_subcommand(1);

    CliOptions opts;
    for (const auto& [experiment, name] : twinbarrier::experiment_names()) {
        CLI::App* sub = app.add_subcommand(name, "run the " + std::string(name) + " experiment");
        sub->add_option("--config", opts.config_path, "scenario configuration (JSON)")
            ->required();
        sub->add_option("--out", opts.out_dir, "output directory for CSV tables and summary")
            ->required();
        sub->add_option("--prominence", opts.prominence,
                        "peak prominence threshold override (fraction of the maximum)");
        sub->add_option("--seed", opts.seed, "seed recorded in the summary");
        sub->add_option("--threads", opts.threads, "worker threads for packet synthesis");
        sub->add_flag("--verbose", opts.verbose, "list written files");
        const auto exp = experiment;
        sub->callback([&opts, exp]() {
            const int rc = run_experiment(exp, opts);
            if (rc != 0) throw CLI::RuntimeError(rc);
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const twinbarrier::ParseError& e) {
        std::fprintf(stderr, "config parse error: %s\n", e.what());
        return 2;
    } catch (const twinbarrier::ValidationError& e) {
        std::fprintf(stderr, "config validation error: %s\n", e.what());
        return 2;
    } catch (const twinbarrier::IoError& e) {
        std::fprintf(stderr, "I/O error: %s\n", e.what());
        return 2;
    } catch (const twinbarrier::Error& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}

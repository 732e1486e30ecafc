#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fedstop/errors.hpp"
#include "fedstop/harness.hpp"
#include "fedstop/report.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

void print_run_line(const fedstop::RunSummary& s) {
    std::cout << s.run_id << "  status=" << fedstop::status_name(s.status)
              << " rounds=" << s.last_round;
    if (s.r_star_datafree) std::cout << " r_star=" << *s.r_star_datafree;
    if (s.acc_at_datafree_stop) std::cout << " acc_at_stop=" << *s.acc_at_datafree_stop;
    if (s.status == fedstop::RunStatus::Failed) std::cout << " error=\"" << s.error << '"';
    std::cout << '\n';
}

int count_failed(const std::vector<fedstop::RunResult>& runs) {
    int n = 0;
    for (const auto& r : runs)
        if (r.summary.status == fedstop::RunStatus::Failed) ++n;
    return n;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Federated learning simulator with a data-free early-stopping monitor"};
    app.require_subcommand(1);

    std::string config_path, grid_path, out_dir = "out", in_dir;
    bool halt_at_stop = false;
    int threads = 0;
    std::uint64_t seed_offset = 0;

    CLI::App* run = app.add_subcommand("run", "Run one experiment (all seeds in the config)");
    run->add_option("--config", config_path, "JSON experiment config")->required();
    run->add_flag("--halt-at-stop", halt_at_stop,
                  "Halt each run at the first stop rule that fires instead of running the "
                  "full budget");
    run->add_option("--out", out_dir, "Output directory (default: out)");
    run->add_option("--seed-offset", seed_offset, "Added to every seed in the config");
    run->add_option("--threads", threads, "Worker threads (default: FEDSTOP_THREADS or all)");

    CLI::App* sweep = app.add_subcommand("sweep", "Cross a config with a parameter grid");
    sweep->add_option("--config", config_path, "JSON experiment config")->required();
    sweep->add_option("--grid", grid_path, "JSON grid: methods/skews/cs/taus/rhos arrays")
        ->required();
    sweep->add_option("--out", out_dir, "Output directory (default: out)");
    sweep->add_option("--seed-offset", seed_offset, "Added to every seed in the config");
    sweep->add_option("--threads", threads, "Worker threads (default: FEDSTOP_THREADS or all)");

    CLI::App* report = app.add_subcommand("report", "Rebuild comparison.txt and series/ "
                                                    "from an output directory");
    report->add_option("--in", in_dir, "Directory holding rounds.csv and summary.csv")
        ->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (report->parsed()) {
            std::cout << fedstop::regenerate_report(in_dir);
            return kExitOk;
        }

        const fedstop::ExecutionMode mode =
            fedstop::apply_threads(fedstop::resolve_threads(threads));
        const fedstop::ExperimentConfig cfg = fedstop::load_config(config_path);
        const fedstop::RunOptions opts{halt_at_stop, seed_offset, mode};

        std::vector<fedstop::RunResult> results;
        if (run->parsed()) {
            results = fedstop::run_experiment(cfg, opts);
        } else {
            results = fedstop::run_sweep(cfg, fedstop::load_grid(grid_path), opts);
        }
        fedstop::write_outputs(results, out_dir, fedstop::config_echo(cfg));
        for (const auto& r : results) print_run_line(r.summary);
        std::cout << "wrote " << results.size() << " run(s) to " << out_dir << '\n';

        // A lone diverging run is an error for `run`; a sweep tolerates failed
        // cells and only reports failure when nothing at all succeeded.
        const int failed = count_failed(results);
        if (run->parsed() && failed > 0) return kExitNumeric;
        if (failed == static_cast<int>(results.size())) return kExitNumeric;
        return kExitOk;
    } catch (const fedstop::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const fedstop::IoError& e) {
        std::cerr << "io error: " << e.what() << '\n';
        return kExitIo;
    } catch (const fedstop::NumericError& e) {
        std::cerr << "numeric error: " << e.what() << '\n';
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "fedstop/data.hpp"
#include "fedstop/fedcore.hpp"
#include "fedstop/model.hpp"
#include "fedstop/stopping.hpp"

namespace fedstop {

struct DataConfig {
    int n_per_class = 250;
    double class_sep = 2.5;
    SkewKind skew = SkewKind::Dirichlet;
    double skew_c = 0.1;
    SplitFractions split;  // train/val/test

    void validate() const;
};

struct ExperimentConfig {
    ModelSpec model;
    DataConfig data;
    MethodConfig method;
    MonitorConfig monitor;
    int num_clients = 100;      // N
    int clients_per_round = 10; // M
    int max_rounds = 500;       // R
    std::vector<std::uint64_t> seeds = {1, 2, 3};
    int eval_every = 1;         // test-set cadence; stop rounds always evaluate
    int snapshot_every = 0;     // 0 = no parameter snapshots
    bool enable_val_monitors = true;

    void validate() const;  // throws ConfigError
};

// The configuration an empty JSON object resolves to: a 4-class, 8-feature
// logistic regression under Dirichlet(0.1) label skew with the struct
// defaults above.
ExperimentConfig default_config();

// Parse a config from JSON text. Every field is optional and falls back to
// default_config(); unknown keys are rejected so typos cannot silently
// produce a default-valued run. See README for the schema.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);  // IoError if unreadable

// 64-bit FNV-1a over the canonical (sorted-key) serialization of everything
// except the seed list, rendered as 16 hex digits. Runs of the same cell
// share a hash; the seed column tells them apart.
std::string config_hash(const ExperimentConfig& cfg);

// Stable identifier for one (cell, seed) run, used in filenames and CSVs.
std::string make_run_id(const ExperimentConfig& cfg, std::uint64_t seed);

std::string method_name(Method m);
std::string skew_name(SkewKind s);
Method method_from_name(const std::string& name);
SkewKind skew_from_name(const std::string& name);

// Canonical resolved-config JSON (pretty-printed, sorted keys, seeds included).
std::string config_echo(const ExperimentConfig& cfg);

enum class RunStatus { Completed, StoppedDatafree, StoppedVal, Failed };

std::string status_name(RunStatus s);
RunStatus status_from_name(const std::string& name);

struct RoundRecord {
    std::string run_id;
    std::uint64_t seed = 0;
    int round = 0;
    double delta = 0.0;
    std::optional<double> growth;
    int kappa = 0;
    double train_loss = 0.0;
    std::optional<double> val_loss;  // absent when val monitors are disabled
    std::optional<double> val_acc;
    std::optional<double> test_acc;  // absent off the eval cadence
    bool datafree_stop = false;      // true on the round the data-free rule fires
    bool val_stop = false;           // true on a round where either val rule fires
    double wall_ms = 0.0;
};

struct RunSummary {
    std::string run_id;
    std::uint64_t seed = 0;
    std::string cfg_hash;
    // Cell coordinates, repeated here so summary.csv is self-describing.
    Method method = Method::FedAvg;
    SkewKind skew = SkewKind::Dirichlet;
    double skew_c = 0.0;
    double tau = 0.0;
    int rho = 0;

    RunStatus status = RunStatus::Completed;
    int last_round = 0;  // rounds actually executed (last good round if Failed)
    std::optional<int> r_star_datafree;
    std::optional<int> r_star_val_loss;
    std::optional<int> r_star_val_acc;
    std::optional<int> oracle_round;
    std::optional<double> oracle_acc;
    // Test accuracy of the model each rule hands back: theta_{r*} for the
    // data-free rule, the best-metric checkpoint for each val baseline.
    std::optional<double> acc_at_datafree_stop;
    std::optional<double> best_acc_until_datafree_stop;
    std::optional<double> acc_at_val_loss_stop;
    std::optional<double> acc_at_val_acc_stop;
    // Data-free rule vs the better of the two val baselines. A rule that
    // never fires within the budget is scored as stopping at the last round.
    std::optional<double> delta_acc;
    std::optional<int> delta_rounds;
    std::string error;  // diagnostic for Failed runs
};

struct RunResult {
    RunSummary summary;
    std::vector<RoundRecord> records;
    // (round, parameters); includes round 0 when snapshotting is on.
    std::vector<std::pair<int, ParameterVector>> snapshots;
};

struct RunOptions {
    bool halt_at_stop = false;  // halt at the earliest rule that fires
    std::uint64_t seed_offset = 0;
    ExecutionMode mode = ExecutionMode::Serial;
};

// Run one seed. The returned records hold every bookkeeping value the run
// produced; nothing inside feeds evaluation results back into training or
// into the data-free monitor.
RunResult run_one_seed(const ExperimentConfig& cfg, std::uint64_t seed, const RunOptions& opts);

// Run every seed in cfg.seeds (shifted by opts.seed_offset).
std::vector<RunResult> run_experiment(const ExperimentConfig& cfg, const RunOptions& opts);

struct SweepGrid {
    std::vector<Method> methods;
    std::vector<SkewKind> skews;
    std::vector<double> cs;
    std::vector<double> taus;
    std::vector<int> rhos;
};

SweepGrid parse_grid(const std::string& json_text);
SweepGrid load_grid(const std::string& path);

// Cross product of the grid over the base config (an empty grid dimension
// keeps the base value). A run that fails is recorded as Failed and the
// sweep continues.
std::vector<RunResult> run_sweep(const ExperimentConfig& base, const SweepGrid& grid,
                                 const RunOptions& opts);

// Number of worker threads: explicit argument if > 0, else FEDSTOP_THREADS,
// else the OpenMP default. Always at least 1.
int resolve_threads(int requested);
ExecutionMode apply_threads(int threads);  // sets the OpenMP pool, picks the mode

}  // namespace fedstop

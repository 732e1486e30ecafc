#include "fedstop/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <json.hpp>

#include "fedstop/errors.hpp"
#include "fedstop/rng.hpp"

namespace fedstop {

using nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
}

void require_keys(const json& obj, const std::string& where,
                  std::initializer_list<const char*> allowed) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool known = false;
        for (const char* k : allowed) {
            if (it.key() == k) {
                known = true;
                break;
            }
        }
        if (!known) bad(where, "unknown key '" + it.key() + "'");
    }
}

double as_double(const json& v, const std::string& where) {
    if (!v.is_number()) bad(where, "expected a number");
    return v.get<double>();
}

int as_int(const json& v, const std::string& where) {
    if (!v.is_number_integer()) bad(where, "expected an integer");
    return v.get<int>();
}

bool as_bool(const json& v, const std::string& where) {
    if (!v.is_boolean()) bad(where, "expected a boolean");
    return v.get<bool>();
}

std::string as_string(const json& v, const std::string& where) {
    if (!v.is_string()) bad(where, "expected a string");
    return v.get<std::string>();
}

std::string kind_name(ModelSpec::Kind k) {
    return k == ModelSpec::Kind::Logreg ? "logreg" : "mlp";
}

ModelSpec::Kind kind_from_name(const std::string& name) {
    if (name == "logreg") return ModelSpec::Kind::Logreg;
    if (name == "mlp") return ModelSpec::Kind::Mlp;
    throw ConfigError("unknown model kind '" + name + "'");
}

std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Canonical form: nlohmann objects serialize with sorted keys, and knobs a
// method does not read are left out, so behaviorally identical configs hash
// identically.
json config_to_json(const ExperimentConfig& cfg, bool include_seeds) {
    json model = {{"kind", kind_name(cfg.model.kind)},
                  {"input_dim", cfg.model.input_dim},
                  {"num_classes", cfg.model.num_classes}};
    if (cfg.model.kind == ModelSpec::Kind::Mlp) model["hidden_dim"] = cfg.model.hidden_dim;

    json data = {{"n_per_class", cfg.data.n_per_class},
                 {"class_sep", cfg.data.class_sep},
                 {"skew", skew_name(cfg.data.skew)},
                 {"c", cfg.data.skew_c},
                 {"split", {cfg.data.split.train, cfg.data.split.val, cfg.data.split.test}}};

    json method = {{"name", method_name(cfg.method.method)},
                   {"local_lr", cfg.method.local_lr},
                   {"local_steps", cfg.method.local_steps},
                   {"batch_size", cfg.method.batch_size}};
    if (cfg.method.method == Method::FedProx) method["mu"] = cfg.method.mu;
    if (cfg.method.method == Method::FedDyn) method["alpha"] = cfg.method.alpha;
    if (cfg.method.method == Method::FedSam) method["sam_radius"] = cfg.method.sam_radius;

    json j = {{"model", model},
              {"data", data},
              {"method", method},
              {"monitor", {{"tau", cfg.monitor.tau}, {"rho", cfg.monitor.rho}}},
              {"num_clients", cfg.num_clients},
              {"clients_per_round", cfg.clients_per_round},
              {"max_rounds", cfg.max_rounds},
              {"eval_every", cfg.eval_every},
              {"snapshot_every", cfg.snapshot_every},
              {"enable_val_monitors", cfg.enable_val_monitors}};
    if (include_seeds) j["seeds"] = cfg.seeds;
    return j;
}

}  // namespace

std::string method_name(Method m) {
    switch (m) {
        case Method::FedAvg: return "fedavg";
        case Method::FedProx: return "fedprox";
        case Method::Scaffold: return "scaffold";
        case Method::FedDyn: return "feddyn";
        case Method::FedSam: return "fedsam";
    }
    throw ConfigError("unknown method enum value");
}

std::string skew_name(SkewKind s) {
    switch (s) {
        case SkewKind::Dirichlet: return "dirichlet";
        case SkewKind::Pathological: return "pathological";
        case SkewKind::Quantity: return "quantity";
    }
    throw ConfigError("unknown skew enum value");
}

std::string status_name(RunStatus s) {
    switch (s) {
        case RunStatus::Completed: return "COMPLETED";
        case RunStatus::StoppedDatafree: return "STOPPED_DATAFREE";
        case RunStatus::StoppedVal: return "STOPPED_VAL";
        case RunStatus::Failed: return "FAILED";
    }
    throw ConfigError("unknown status enum value");
}

Method method_from_name(const std::string& name) {
    if (name == "fedavg") return Method::FedAvg;
    if (name == "fedprox") return Method::FedProx;
    if (name == "scaffold") return Method::Scaffold;
    if (name == "feddyn") return Method::FedDyn;
    if (name == "fedsam") return Method::FedSam;
    throw ConfigError("unknown method '" + name + "'");
}

SkewKind skew_from_name(const std::string& name) {
    if (name == "dirichlet") return SkewKind::Dirichlet;
    if (name == "pathological") return SkewKind::Pathological;
    if (name == "quantity") return SkewKind::Quantity;
    throw ConfigError("unknown skew '" + name + "'");
}

RunStatus status_from_name(const std::string& name) {
    if (name == "COMPLETED") return RunStatus::Completed;
    if (name == "STOPPED_DATAFREE") return RunStatus::StoppedDatafree;
    if (name == "STOPPED_VAL") return RunStatus::StoppedVal;
    if (name == "FAILED") return RunStatus::Failed;
    throw ConfigError("unknown run status '" + name + "'");
}

std::string config_echo(const ExperimentConfig& cfg) {
    return config_to_json(cfg, /*include_seeds=*/true).dump(2) + "\n";
}

void DataConfig::validate() const {
    if (n_per_class < 1)
        throw ConfigError("data: n_per_class must be >= 1, got " + std::to_string(n_per_class));
    if (!std::isfinite(class_sep) || class_sep < 0.0)
        throw ConfigError("data: class_sep must be a finite nonnegative real");
    if (!(split.train > 0.0) || !(split.val > 0.0) || !(split.test > 0.0))
        throw ConfigError("data: every split fraction must be positive");
    if (std::abs(split.train + split.val + split.test - 1.0) > 1e-9)
        throw ConfigError("data: split fractions must sum to 1");
    if (!std::isfinite(skew_c) || skew_c <= 0.0)
        throw ConfigError("data: skew parameter c must be a positive real");
}

void ExperimentConfig::validate() const {
    model.validate();
    data.validate();
    method.validate();
    monitor.validate();
    if (num_clients < 1)
        throw ConfigError("config: num_clients must be >= 1, got " + std::to_string(num_clients));
    if (clients_per_round < 1 || clients_per_round > num_clients)
        throw ConfigError("config: clients_per_round must be in [1, num_clients], got " +
                          std::to_string(clients_per_round));
    if (max_rounds < 1)
        throw ConfigError("config: max_rounds must be >= 1, got " + std::to_string(max_rounds));
    if (seeds.empty()) throw ConfigError("config: seeds must be non-empty");
    if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size())
        throw ConfigError("config: seeds must be distinct");
    if (eval_every < 1)
        throw ConfigError("config: eval_every must be >= 1, got " + std::to_string(eval_every));
    if (snapshot_every < 0)
        throw ConfigError("config: snapshot_every must be >= 0, got " +
                          std::to_string(snapshot_every));
    if (data.skew == SkewKind::Pathological) {
        if (data.skew_c != std::floor(data.skew_c) || data.skew_c > model.num_classes)
            throw ConfigError("config: pathological skew needs an integer c in [1, num_classes]");
    }
}

ExperimentConfig default_config() {
    ExperimentConfig cfg;
    cfg.model.kind = ModelSpec::Kind::Logreg;
    cfg.model.input_dim = 8;
    cfg.model.hidden_dim = 16;
    cfg.model.num_classes = 4;
    return cfg;  // everything else defaults in the struct definitions
}

ExperimentConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("config: top level must be a JSON object");

    ExperimentConfig cfg = default_config();
    try {
        require_keys(root, "config",
                     {"model", "data", "method", "monitor", "num_clients", "clients_per_round",
                      "max_rounds", "seeds", "eval_every", "snapshot_every",
                      "enable_val_monitors"});

        if (root.contains("model")) {
            const json& m = root["model"];
            if (!m.is_object()) bad("model", "expected an object");
            require_keys(m, "model", {"kind", "input_dim", "hidden_dim", "num_classes"});
            if (m.contains("kind")) cfg.model.kind = kind_from_name(as_string(m["kind"], "model.kind"));
            if (m.contains("input_dim")) cfg.model.input_dim = as_int(m["input_dim"], "model.input_dim");
            if (m.contains("hidden_dim"))
                cfg.model.hidden_dim = as_int(m["hidden_dim"], "model.hidden_dim");
            if (m.contains("num_classes"))
                cfg.model.num_classes = as_int(m["num_classes"], "model.num_classes");
        }
        if (root.contains("data")) {
            const json& d = root["data"];
            if (!d.is_object()) bad("data", "expected an object");
            require_keys(d, "data", {"n_per_class", "class_sep", "skew", "c", "split"});
            if (d.contains("n_per_class"))
                cfg.data.n_per_class = as_int(d["n_per_class"], "data.n_per_class");
            if (d.contains("class_sep"))
                cfg.data.class_sep = as_double(d["class_sep"], "data.class_sep");
            if (d.contains("skew")) cfg.data.skew = skew_from_name(as_string(d["skew"], "data.skew"));
            if (d.contains("c")) cfg.data.skew_c = as_double(d["c"], "data.c");
            if (d.contains("split")) {
                const json& s = d["split"];
                if (!s.is_array() || s.size() != 3)
                    bad("data.split", "expected [train, val, test] fractions");
                cfg.data.split.train = as_double(s[0], "data.split[0]");
                cfg.data.split.val = as_double(s[1], "data.split[1]");
                cfg.data.split.test = as_double(s[2], "data.split[2]");
            }
        }
        if (root.contains("method")) {
            const json& m = root["method"];
            if (!m.is_object()) bad("method", "expected an object");
            require_keys(m, "method",
                         {"name", "local_lr", "local_steps", "batch_size", "mu", "alpha",
                          "sam_radius"});
            if (m.contains("name"))
                cfg.method.method = method_from_name(as_string(m["name"], "method.name"));
            if (m.contains("local_lr"))
                cfg.method.local_lr = as_double(m["local_lr"], "method.local_lr");
            if (m.contains("local_steps"))
                cfg.method.local_steps = as_int(m["local_steps"], "method.local_steps");
            if (m.contains("batch_size"))
                cfg.method.batch_size = as_int(m["batch_size"], "method.batch_size");
            if (m.contains("mu")) cfg.method.mu = as_double(m["mu"], "method.mu");
            if (m.contains("alpha")) cfg.method.alpha = as_double(m["alpha"], "method.alpha");
            if (m.contains("sam_radius"))
                cfg.method.sam_radius = as_double(m["sam_radius"], "method.sam_radius");
        }
        if (root.contains("monitor")) {
            const json& m = root["monitor"];
            if (!m.is_object()) bad("monitor", "expected an object");
            require_keys(m, "monitor", {"tau", "rho"});
            if (m.contains("tau")) cfg.monitor.tau = as_double(m["tau"], "monitor.tau");
            if (m.contains("rho")) cfg.monitor.rho = as_int(m["rho"], "monitor.rho");
        }
        if (root.contains("num_clients"))
            cfg.num_clients = as_int(root["num_clients"], "num_clients");
        if (root.contains("clients_per_round"))
            cfg.clients_per_round = as_int(root["clients_per_round"], "clients_per_round");
        if (root.contains("max_rounds")) cfg.max_rounds = as_int(root["max_rounds"], "max_rounds");
        if (root.contains("seeds")) {
            const json& s = root["seeds"];
            if (!s.is_array() || s.empty()) bad("seeds", "expected a non-empty array");
            cfg.seeds.clear();
            for (std::size_t i = 0; i < s.size(); ++i) {
                if (!s[i].is_number_unsigned() && !s[i].is_number_integer())
                    bad("seeds", "expected nonnegative integers");
                const auto v = s[i].get<std::int64_t>();
                if (v < 0) bad("seeds", "expected nonnegative integers");
                cfg.seeds.push_back(static_cast<std::uint64_t>(v));
            }
        }
        if (root.contains("eval_every")) cfg.eval_every = as_int(root["eval_every"], "eval_every");
        if (root.contains("snapshot_every"))
            cfg.snapshot_every = as_int(root["snapshot_every"], "snapshot_every");
        if (root.contains("enable_val_monitors"))
            cfg.enable_val_monitors = as_bool(root["enable_val_monitors"], "enable_val_monitors");
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }

    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string config_hash(const ExperimentConfig& cfg) {
    const std::uint64_t h = fnv1a(config_to_json(cfg, /*include_seeds=*/false).dump());
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

std::string make_run_id(const ExperimentConfig& cfg, std::uint64_t seed) {
    return method_name(cfg.method.method) + "-" + skew_name(cfg.data.skew) + "-c" +
           fmt_g(cfg.data.skew_c) + "-tau" + fmt_g(cfg.monitor.tau) + "-rho" +
           std::to_string(cfg.monitor.rho) + "-seed" + std::to_string(seed);
}

RunResult run_one_seed(const ExperimentConfig& cfg, std::uint64_t seed, const RunOptions& opts) {
    cfg.validate();
    const std::uint64_t root = seed + opts.seed_offset;

    RunResult out;
    RunSummary& sum = out.summary;
    sum.run_id = make_run_id(cfg, root);
    sum.seed = root;
    sum.cfg_hash = config_hash(cfg);
    sum.method = cfg.method.method;
    sum.skew = cfg.data.skew;
    sum.skew_c = cfg.data.skew_c;
    sum.tau = cfg.monitor.tau;
    sum.rho = cfg.monitor.rho;

    // Data pipeline; every stage derives its stream from the root seed.
    const Dataset all = generate_synthetic(cfg.model.num_classes, cfg.model.input_dim,
                                           cfg.data.n_per_class, cfg.data.class_sep, root);
    const auto [train, val, test] = split(all, cfg.data.split, root);
    const Partition part =
        make_partition(train, {cfg.data.skew, cfg.data.skew_c, cfg.num_clients, root});

    ServerState server;
    server.global_params = init_params(cfg.model, rng::derive_seed(root, rng::Purpose::ModelInit));
    std::vector<ClientState> states(static_cast<std::size_t>(cfg.num_clients));

    TaskVectorMonitor monitor(server.global_params, cfg.monitor);
    ValidationMonitor val_loss_mon(ValMetricMode::Loss, cfg.monitor);
    ValidationMonitor val_acc_mon(ValMetricMode::Accuracy, cfg.monitor);

    const Batch train_b = train.full_batch();
    const Batch val_b = val.full_batch();
    const Batch test_b = test.full_batch();

    if (cfg.snapshot_every > 0) out.snapshots.emplace_back(0, server.global_params);

    // Test accuracy of the checkpoint each val baseline would hand back,
    // frozen once that baseline fires.
    std::optional<double> ckpt_acc_loss, ckpt_acc_acc;
    std::vector<std::pair<int, double>> evaluated;  // (round, test accuracy)

    sum.status = RunStatus::Completed;
    for (int r = 1; r <= cfg.max_rounds; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        RoundRecord row;
        ValMonitorRecord vl, va;
        MonitorRecord mrec;
        try {
            run_round(cfg.model, cfg.method, cfg.clients_per_round, server, states, train, part,
                      root, opts.mode);

            mrec = monitor.observe(server.global_params, r);
            row.train_loss = evaluate(cfg.model, server.global_params, train_b).loss;
            if (cfg.enable_val_monitors) {
                const EvalResult ev = evaluate(cfg.model, server.global_params, val_b);
                row.val_loss = ev.loss;
                row.val_acc = ev.accuracy;
                vl = val_loss_mon.observe(ev.loss, r);
                va = val_acc_mon.observe(ev.accuracy, r);
            }
        } catch (const NumericError& e) {
            // Covers client failures and any downstream numeric blowup; the
            // run ends on the last fully recorded round.
            sum.status = RunStatus::Failed;
            sum.error = e.what();
            sum.last_round = r - 1;
            break;
        }

        row.run_id = sum.run_id;
        row.seed = root;
        row.round = r;
        row.delta = mrec.delta;
        row.growth = mrec.growth;
        row.kappa = mrec.kappa;
        row.datafree_stop = mrec.stop;
        row.val_stop = vl.stop || va.stop;

        // Checkpoint bookkeeping stays live only until the rule fires.
        const bool track_loss_ckpt = vl.improved && !val_loss_mon.stopped_at();
        const bool track_acc_ckpt = va.improved && !val_acc_mon.stopped_at();
        const bool stop_round = mrec.stop || vl.stop || va.stop;
        const bool want_test = r % cfg.eval_every == 0 || r == cfg.max_rounds || stop_round ||
                               track_loss_ckpt || track_acc_ckpt;
        if (want_test) {
            const double acc = evaluate(cfg.model, server.global_params, test_b).accuracy;
            row.test_acc = acc;
            evaluated.emplace_back(r, acc);
            if (track_loss_ckpt) ckpt_acc_loss = acc;
            if (track_acc_ckpt) ckpt_acc_acc = acc;
            if (mrec.stop) sum.acc_at_datafree_stop = acc;
        }

        sum.last_round = r;
        if (cfg.snapshot_every > 0 && r % cfg.snapshot_every == 0)
            out.snapshots.emplace_back(r, server.global_params);

        row.wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
                .count();
        out.records.push_back(std::move(row));

        if (opts.halt_at_stop && stop_round) {
            // Halt at the earliest rule that fires; the data-free rule names
            // the status when several fire on the same round.
            sum.status = mrec.stop ? RunStatus::StoppedDatafree : RunStatus::StoppedVal;
            break;
        }
    }

    sum.r_star_datafree = monitor.stopped_at();
    sum.r_star_val_loss = val_loss_mon.stopped_at();
    sum.r_star_val_acc = val_acc_mon.stopped_at();

    if (!evaluated.empty()) {
        const auto [orc_round, orc_acc] = oracle_best_round(evaluated);
        sum.oracle_round = orc_round;
        sum.oracle_acc = orc_acc;
    }

    // A completed run whose data-free rule never fired hands back the final
    // round's parameters.
    if (!sum.acc_at_datafree_stop && sum.status == RunStatus::Completed) {
        for (const auto& [rr, acc] : evaluated)
            if (rr == sum.last_round) sum.acc_at_datafree_stop = acc;
    }
    const int df_round = sum.r_star_datafree.value_or(sum.last_round);
    {
        double best = -1.0;
        for (const auto& [rr, acc] : evaluated)
            if (rr <= df_round && acc > best) best = acc;
        if (best >= 0.0) sum.best_acc_until_datafree_stop = best;
    }
    sum.acc_at_val_loss_stop = ckpt_acc_loss;
    sum.acc_at_val_acc_stop = ckpt_acc_acc;

    // Data-free rule vs the better val baseline (ties go to the loss rule).
    if (sum.status != RunStatus::Failed && sum.acc_at_datafree_stop) {
        std::optional<double> base_acc;
        int base_round = sum.last_round;
        if (ckpt_acc_loss) {
            base_acc = *ckpt_acc_loss;
            base_round = sum.r_star_val_loss.value_or(sum.last_round);
        }
        if (ckpt_acc_acc && (!base_acc || *ckpt_acc_acc > *base_acc)) {
            base_acc = *ckpt_acc_acc;
            base_round = sum.r_star_val_acc.value_or(sum.last_round);
        }
        if (base_acc) {
            sum.delta_acc = *sum.acc_at_datafree_stop - *base_acc;
            sum.delta_rounds = df_round - base_round;
        }
    }
    return out;
}

std::vector<RunResult> run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
    cfg.validate();
    std::vector<RunResult> out;
    out.reserve(cfg.seeds.size());
    for (const std::uint64_t seed : cfg.seeds) out.push_back(run_one_seed(cfg, seed, opts));
    return out;
}

SweepGrid parse_grid(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("grid: invalid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ConfigError("grid: top level must be a JSON object");

    SweepGrid grid;
    try {
        require_keys(root, "grid", {"methods", "skews", "cs", "taus", "rhos"});
        if (root.contains("methods"))
            for (const auto& v : root["methods"])
                grid.methods.push_back(method_from_name(as_string(v, "grid.methods")));
        if (root.contains("skews"))
            for (const auto& v : root["skews"])
                grid.skews.push_back(skew_from_name(as_string(v, "grid.skews")));
        if (root.contains("cs"))
            for (const auto& v : root["cs"]) grid.cs.push_back(as_double(v, "grid.cs"));
        if (root.contains("taus"))
            for (const auto& v : root["taus"]) grid.taus.push_back(as_double(v, "grid.taus"));
        if (root.contains("rhos"))
            for (const auto& v : root["rhos"]) grid.rhos.push_back(as_int(v, "grid.rhos"));
    } catch (const json::exception& e) {
        throw ConfigError(std::string("grid: ") + e.what());
    }
    return grid;
}

SweepGrid load_grid(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read grid file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_grid(buf.str());
}

std::vector<RunResult> run_sweep(const ExperimentConfig& base, const SweepGrid& grid,
                                 const RunOptions& opts) {
    base.validate();
    const auto methods =
        grid.methods.empty() ? std::vector<Method>{base.method.method} : grid.methods;
    const auto skews = grid.skews.empty() ? std::vector<SkewKind>{base.data.skew} : grid.skews;
    const auto cs = grid.cs.empty() ? std::vector<double>{base.data.skew_c} : grid.cs;
    const auto taus = grid.taus.empty() ? std::vector<double>{base.monitor.tau} : grid.taus;
    const auto rhos = grid.rhos.empty() ? std::vector<int>{base.monitor.rho} : grid.rhos;

    std::vector<RunResult> all;
    for (const Method m : methods)
        for (const SkewKind sk : skews)
            for (const double c : cs)
                for (const double tau : taus)
                    for (const int rho : rhos) {
                        ExperimentConfig cfg = base;
                        cfg.method.method = m;
                        cfg.data.skew = sk;
                        cfg.data.skew_c = c;
                        cfg.monitor.tau = tau;
                        cfg.monitor.rho = rho;
                        // An invalid cell is a grid authoring error and aborts;
                        // a run that merely diverges comes back as Failed.
                        cfg.validate();
                        for (const std::uint64_t seed : cfg.seeds)
                            all.push_back(run_one_seed(cfg, seed, opts));
                    }
    return all;
}

int resolve_threads(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("FEDSTOP_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1)
            throw ConfigError("FEDSTOP_THREADS must be a positive integer, got '" +
                              std::string(env) + "'");
        return static_cast<int>(v);
    }
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

ExecutionMode apply_threads(int threads) {
    if (threads < 1) throw ConfigError("thread count must be >= 1");
#ifdef _OPENMP
    omp_set_num_threads(threads);
    return threads == 1 ? ExecutionMode::Serial : ExecutionMode::Parallel;
#else
    (void)threads;
    return ExecutionMode::Serial;
#endif
}

}  // namespace fedstop

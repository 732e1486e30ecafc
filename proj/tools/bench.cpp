// Times the OpenMP kernels against the serial reference implementations and
// one federated round in both execution modes, checking bit-identity along
// the way. Wall times vary; the identity checks must not.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fedstop/fedcore.hpp"
#include "fedstop/harness.hpp"
#include "fedstop/rng.hpp"
#include "fedstop/vecmath.hpp"

using namespace fedstop;

namespace {

double time_ms(const std::function<void()>& f, int reps = 3) {
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

bool bitwise_equal(const ParameterVector& a, const ParameterVector& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] != b[i]) return false;
    return true;
}

void report(const char* name, double serial_ms, double parallel_ms, bool identical) {
    std::printf("%-18s serial %9.3f ms   parallel %9.3f ms   speedup %5.2fx   bit-identical %s\n",
                name, serial_ms, parallel_ms, serial_ms / parallel_ms, identical ? "yes" : "NO");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Serial vs parallel benchmark"};
    int threads = 0;
    std::size_t n = std::size_t{1} << 22;
    app.add_option("--threads", threads, "Worker threads (default: FEDSTOP_THREADS or all)");
    app.add_option("--size", n, "Vector length for the kernel benchmarks");
    CLI11_PARSE(app, argc, argv);

    const int nthreads = resolve_threads(threads);
    apply_threads(nthreads);
    std::printf("threads: %d, kernel vector length: %zu\n\n", nthreads, n);

    rng::Stream stream(42);
    ParameterVector a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
        a[i] = stream.normal();
        b[i] = stream.normal();
    }

    {
        ParameterVector rs, rp;
        const double ts = time_ms([&] { rs = vec::serial::sub(a, b); });
        const double tp = time_ms([&] { rp = vec::sub(a, b); });
        report("sub", ts, tp, bitwise_equal(rs, rp));
    }
    {
        ParameterVector rs, rp;
        const double ts = time_ms([&] { rs = vec::serial::axpy(0.25, a, b); });
        const double tp = time_ms([&] { rp = vec::axpy(0.25, a, b); });
        report("axpy", ts, tp, bitwise_equal(rs, rp));
    }
    {
        std::vector<ParameterVector> vs(16, ParameterVector(n / 16));
        for (auto& v : vs)
            for (auto& x : v) x = stream.normal();
        ParameterVector rs, rp;
        const double ts = time_ms([&] { rs = vec::serial::mean(vs); });
        const double tp = time_ms([&] { rp = vec::mean(vs); });
        report("mean(16)", ts, tp, bitwise_equal(rs, rp));
    }
    {
        double ns = 0, np = 0;
        const double ts = time_ms([&] { ns = vec::serial::l2_norm(a); });
        const double tp = time_ms([&] { np = vec::l2_norm(a); });
        // The norm reduction is sequential in both paths by design.
        report("l2_norm", ts, tp, ns == np);
    }

    // One federated round at a mid-sized configuration.
    {
        ExperimentConfig cfg = default_config();
        cfg.model.kind = ModelSpec::Kind::Mlp;
        cfg.model.input_dim = 32;
        cfg.model.hidden_dim = 64;
        cfg.model.num_classes = 8;
        cfg.data.n_per_class = 400;
        cfg.num_clients = 50;
        cfg.clients_per_round = 10;
        cfg.method.local_steps = 10;

        const std::uint64_t root = 7;
        const Dataset all = generate_synthetic(cfg.model.num_classes, cfg.model.input_dim,
                                               cfg.data.n_per_class, cfg.data.class_sep, root);
        const auto [train, val, test] = split(all, cfg.data.split, root);
        const Partition part =
            make_partition(train, {cfg.data.skew, cfg.data.skew_c, cfg.num_clients, root});
        const ParameterVector theta0 =
            init_params(cfg.model, rng::derive_seed(root, rng::Purpose::ModelInit));

        auto run_rounds = [&](ExecutionMode mode) {
            ServerState server;
            server.global_params = theta0;
            std::vector<ClientState> states(cfg.num_clients);
            for (int r = 0; r < 5; ++r)
                run_round(cfg.model, cfg.method, cfg.clients_per_round, server, states, train,
                          part, root, mode);
            return server.global_params;
        };

        ParameterVector rs, rp;
        const double ts = time_ms([&] { rs = run_rounds(ExecutionMode::Serial); }, 2);
        const double tp = time_ms([&] { rp = run_rounds(ExecutionMode::Parallel); }, 2);
        report("5 rounds", ts, tp, bitwise_equal(rs, rp));
    }
    return 0;
}

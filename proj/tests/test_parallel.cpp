#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdint>
#include <vector>

#include "fedstop/data.hpp"
#include "fedstop/errors.hpp"
#include "fedstop/fedcore.hpp"
#include "fedstop/harness.hpp"
#include "fedstop/model.hpp"
#include "fedstop/rng.hpp"
#include "fedstop/vecmath.hpp"

using namespace fedstop;

namespace {

ParameterVector random_vec(std::size_t n, std::uint64_t seed) {
    rng::Stream s(seed);
    ParameterVector v(n);
    for (auto& x : v) x = s.normal();
    return v;
}

const ModelSpec kSpec{ModelSpec::Kind::Logreg, 4, 0, 3};

}  // namespace

TEST_CASE("the pool takes whatever thread count it is given") {
    CHECK(apply_threads(4) == ExecutionMode::Parallel);
}

TEST_CASE("parallel kernels equal the serial reference at every grain boundary") {
    for (const std::size_t n :
         {vec::kParallelGrain - 1, vec::kParallelGrain, vec::kParallelGrain + 1,
          3 * vec::kParallelGrain + 17}) {
        const ParameterVector a = random_vec(n, 1000 + n);
        const ParameterVector b = random_vec(n, 2000 + n);
        CHECK(vec::sub(a, b) == vec::serial::sub(a, b));
        CHECK(vec::axpy(-0.37, a, b) == vec::serial::axpy(-0.37, a, b));
        CHECK(vec::l2_norm(a) == vec::serial::l2_norm(a));

        std::vector<ParameterVector> vs;
        for (int k = 0; k < 11; ++k) vs.push_back(random_vec(n, 3000 + 100 * n + k));
        CHECK(vec::mean(vs) == vec::serial::mean(vs));
    }
}

TEST_CASE("ten federated rounds are bit-identical across execution modes") {
    const Dataset ds = generate_synthetic(3, 4, 60, 2.0, 77);
    const Partition part = partition_dirichlet(ds, 0.5, 8, 77);

    for (const Method m : {Method::FedAvg, Method::FedProx, Method::Scaffold, Method::FedDyn,
                           Method::FedSam}) {
        MethodConfig cfg;
        cfg.method = m;
        cfg.batch_size = 8;
        cfg.mu = 0.1;
        cfg.alpha = 0.1;
        cfg.sam_radius = 0.05;

        ServerState serial_server, parallel_server;
        serial_server.global_params = init_params(kSpec, 5);
        parallel_server.global_params = serial_server.global_params;
        std::vector<ClientState> serial_states(8), parallel_states(8);

        for (int r = 0; r < 10; ++r) {
            run_round(kSpec, cfg, 4, serial_server, serial_states, ds, part, 555,
                      ExecutionMode::Serial);
            run_round(kSpec, cfg, 4, parallel_server, parallel_states, ds, part, 555,
                      ExecutionMode::Parallel);
            REQUIRE(parallel_server.global_params == serial_server.global_params);
            REQUIRE(parallel_server.server_control == serial_server.server_control);
            REQUIRE(parallel_server.dyn_h == serial_server.dyn_h);
        }
        for (int id = 0; id < 8; ++id) {
            CHECK(parallel_states[id].control_variate == serial_states[id].control_variate);
            CHECK(parallel_states[id].dyn_dual == serial_states[id].dyn_dual);
        }
    }
}

TEST_CASE("a whole run records the same numbers in either mode") {
    ExperimentConfig cfg;
    cfg.model = kSpec;
    cfg.data.n_per_class = 40;
    cfg.data.class_sep = 2.0;
    cfg.data.skew_c = 1.0;
    cfg.num_clients = 6;
    cfg.clients_per_round = 3;
    cfg.max_rounds = 6;
    cfg.seeds = {1};

    RunOptions serial_opts, parallel_opts;
    serial_opts.mode = ExecutionMode::Serial;
    parallel_opts.mode = ExecutionMode::Parallel;
    const RunResult s = run_one_seed(cfg, 1, serial_opts);
    const RunResult p = run_one_seed(cfg, 1, parallel_opts);

    REQUIRE(s.records.size() == p.records.size());
    for (std::size_t i = 0; i < s.records.size(); ++i) {
        CHECK(s.records[i].delta == p.records[i].delta);
        CHECK(s.records[i].growth == p.records[i].growth);
        CHECK(s.records[i].kappa == p.records[i].kappa);
        CHECK(s.records[i].train_loss == p.records[i].train_loss);
        CHECK(s.records[i].val_loss == p.records[i].val_loss);
        CHECK(s.records[i].test_acc == p.records[i].test_acc);
    }
    CHECK(s.summary.status == p.summary.status);
    CHECK(s.summary.r_star_datafree == p.summary.r_star_datafree);
    CHECK(s.summary.oracle_acc == p.summary.oracle_acc);
    CHECK(s.summary.delta_acc == p.summary.delta_acc);
}

TEST_CASE("parallel failures still name the lowest sampled client") {
    const Dataset ds = generate_synthetic(3, 4, 40, 2.0, 34);
    const Partition part = partition_dirichlet(ds, 1.0, 6, 34);
    MethodConfig cfg;
    cfg.local_lr = 1e308;  // every sampled client diverges immediately

    ServerState server;
    server.global_params = init_params(kSpec, 11);
    std::vector<ClientState> states(6);

    const auto sampled = sample_clients(6, 3, 1, 901);
    try {
        run_round(kSpec, cfg, 3, server, states, ds, part, 901, ExecutionMode::Parallel);
        FAIL("expected ClientFailure");
    } catch (const ClientFailure& e) {
        CHECK(e.round() == 1);
        CHECK(e.client_id() == sampled.front());
    }
}

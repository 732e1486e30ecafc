#pragma once

#include <cstdint>
#include <vector>

#include "fedstop/data.hpp"
#include "fedstop/model.hpp"
#include "fedstop/vecmath.hpp"

namespace fedstop {

enum class Method { FedAvg, FedProx, Scaffold, FedDyn, FedSam };

struct MethodConfig {
    Method method = Method::FedAvg;
    double local_lr = 0.05;
    int local_steps = 5;
    int batch_size = 32;
    double mu = 0.0;          // fedprox proximal weight
    double alpha = 0.0;       // feddyn regularizer
    double sam_radius = 0.0;  // fedsam perturbation radius (named to avoid clashing with patience rho)

    void validate() const;  // throws ConfigError
};

// Per-client state persisted across rounds. Empty vectors mean zero; they are
// materialized to length d on first use.
struct ClientState {
    ParameterVector control_variate;  // scaffold c_i
    ParameterVector dyn_dual;         // feddyn local correction
};

struct ServerState {
    ParameterVector global_params;    // theta_r
    ParameterVector server_control;   // scaffold c (empty = zero)
    ParameterVector dyn_h;            // feddyn h (empty = zero)
    int round = 0;                    // r
};

// M distinct ids from [0, N), uniform without replacement, deterministic per
// (seed, round). Returned sorted ascending.
std::vector<int> sample_clients(int total_clients, int clients_per_round, int round,
                                std::uint64_t seed);

struct LocalData {
    const Dataset* dataset = nullptr;
    const std::vector<int>* indices = nullptr;
};

struct ClientUpdateResult {
    ParameterVector local_params;
    ClientState new_state;
    ParameterVector delta_control;  // scaffold delta c_i; empty for other methods
};

// local_steps of minibatch SGD from the global parameters, per-method rules:
//   fedavg:   plain SGD
//   fedprox:  gradient gains mu * (theta - global)
//   scaffold: gradient gains c - c_i; afterwards
//             c_i <- c_i - c + (global - local) / (local_steps * lr)
//   feddyn:   gradient gains alpha * (theta - global) - dual; afterwards
//             dual <- dual - alpha * (local - global)
//   fedsam:   gradient re-evaluated at theta + sam_radius * g/|g|, applied at theta
// Minibatches: sequential passes over a seeded shuffle, reshuffled each local
// epoch; batch_size >= n runs full batch in stored order.
ClientUpdateResult client_update(const ModelSpec& spec, const MethodConfig& cfg,
                                 const ParameterVector& global, const ClientState& state,
                                 const ParameterVector& server_control, const LocalData& data,
                                 std::uint64_t stream_seed);

// Uniform (unweighted) mean of locals; scaffold additionally moves the server
// control by (M/N) * mean(delta c_i), feddyn applies its h-state correction.
// Increments server.round by one.
void server_aggregate(const MethodConfig& cfg, ServerState& server,
                      const std::vector<ParameterVector>& locals,
                      const std::vector<ParameterVector>& delta_controls, int total_clients);

enum class ExecutionMode { Serial, Parallel };

struct RoundOutcome {
    std::vector<int> sampled;
};

// One global round: sample M clients, run client updates (OpenMP-parallel in
// Parallel mode; both modes are bit-identical), aggregate. Client failures
// surface as ClientFailure carrying round and client id; the failing client
// with the lowest sampled index wins so the error is deterministic.
RoundOutcome run_round(const ModelSpec& spec, const MethodConfig& cfg, int clients_per_round,
                       ServerState& server, std::vector<ClientState>& client_states,
                       const Dataset& train, const Partition& partition, std::uint64_t root_seed,
                       ExecutionMode mode);

}  // namespace fedstop

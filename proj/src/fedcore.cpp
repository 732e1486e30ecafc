#include "fedstop/fedcore.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <string>

#include "fedstop/errors.hpp"
#include "fedstop/rng.hpp"

namespace fedstop {

namespace {

bool is_zero_or_empty(const ParameterVector& v) {
    for (const double x : v) {
        if (x != 0.0) return false;
    }
    return true;
}

ParameterVector materialize(const ParameterVector& v, std::size_t d, const char* what) {
    if (v.empty()) return ParameterVector(d, 0.0);
    if (v.size() != d) {
        throw DimensionError(std::string(what) + ": length " + std::to_string(v.size()) +
                             " != " + std::to_string(d));
    }
    return v;
}

// Sequential minibatch cursor over a seeded shuffle of the client's indices,
// reshuffled each full pass. Full-batch configurations keep the stored order.
class MinibatchCursor {
public:
    MinibatchCursor(const std::vector<int>& indices, int batch_size, rng::Stream& stream)
        : order_(indices), batch_size_(batch_size), stream_(stream) {
        full_batch_ = batch_size_ >= static_cast<int>(order_.size());
        if (!full_batch_) stream_.shuffle(order_);
    }

    std::vector<int> next() {
        if (full_batch_) return order_;
        const int n = static_cast<int>(order_.size());
        const int take = std::min(batch_size_, n - pos_);
        std::vector<int> batch(order_.begin() + pos_, order_.begin() + pos_ + take);
        pos_ += take;
        if (pos_ >= n) {
            stream_.shuffle(order_);
            pos_ = 0;
        }
        return batch;
    }

private:
    std::vector<int> order_;
    int batch_size_;
    rng::Stream& stream_;
    bool full_batch_ = false;
    int pos_ = 0;
};

}  // namespace

void MethodConfig::validate() const {
    if (!std::isfinite(local_lr) || local_lr < 0.0) {
        throw ConfigError("method: local_lr must be finite and >= 0");
    }
    if (local_steps < 1) throw ConfigError("method: local_steps must be >= 1");
    if (batch_size < 1) throw ConfigError("method: batch_size must be >= 1");
    if (!std::isfinite(mu) || mu < 0.0) throw ConfigError("method: mu must be finite and >= 0");
    if (!std::isfinite(alpha) || alpha < 0.0) {
        throw ConfigError("method: alpha must be finite and >= 0");
    }
    if (!std::isfinite(sam_radius) || sam_radius < 0.0) {
        throw ConfigError("method: sam_radius must be finite and >= 0");
    }
}

std::vector<int> sample_clients(int total_clients, int clients_per_round, int round,
                                std::uint64_t seed) {
    if (clients_per_round < 1 || clients_per_round > total_clients) {
        throw ConfigError("sample_clients: need 1 <= M <= N, got M=" +
                          std::to_string(clients_per_round) + " N=" +
                          std::to_string(total_clients));
    }
    rng::Stream stream(rng::derive_seed(seed, rng::Purpose::ClientSampling,
                                        static_cast<std::uint64_t>(round)));
    std::vector<int> ids(total_clients);
    std::iota(ids.begin(), ids.end(), 0);
    // Partial Fisher-Yates: the first M slots end up a uniform sample.
    for (int i = 0; i < clients_per_round; ++i) {
        const int j = i + static_cast<int>(stream.uniform_int(total_clients - i));
        std::swap(ids[i], ids[j]);
    }
    ids.resize(clients_per_round);
    std::sort(ids.begin(), ids.end());
    return ids;
}

ClientUpdateResult client_update(const ModelSpec& spec, const MethodConfig& cfg,
                                 const ParameterVector& global, const ClientState& state,
                                 const ParameterVector& server_control, const LocalData& data,
                                 std::uint64_t stream_seed) {
    cfg.validate();
    const std::size_t d = global.size();
    if (data.indices == nullptr || data.dataset == nullptr || data.indices->empty()) {
        throw ConfigError("client_update: client has no data");
    }

    rng::Stream stream(stream_seed);
    MinibatchCursor cursor(*data.indices, cfg.batch_size, stream);

    ParameterVector theta = global;

    // Scaffold drift correction c - c_i is constant across local steps. The
    // zero check keeps the first round bit-identical to fedavg.
    ParameterVector correction;
    bool apply_correction = false;
    if (cfg.method == Method::Scaffold) {
        const ParameterVector c = materialize(server_control, d, "server_control");
        const ParameterVector ci = materialize(state.control_variate, d, "control_variate");
        correction = vec::sub(c, ci);
        apply_correction = !is_zero_or_empty(correction);
    }

    ParameterVector dual;
    bool apply_dual = false;
    if (cfg.method == Method::FedDyn) {
        dual = materialize(state.dyn_dual, d, "dyn_dual");
        apply_dual = !is_zero_or_empty(dual);
    }

    ParameterVector ascent_point;
    for (int step = 0; step < cfg.local_steps; ++step) {
        const Batch batch = data.dataset->gather(cursor.next());
        auto [loss, grad] = loss_and_grad(spec, theta, batch);
        (void)loss;

        switch (cfg.method) {
            case Method::FedAvg:
                break;
            case Method::FedProx:
                if (cfg.mu != 0.0) {
                    for (std::size_t i = 0; i < d; ++i) grad[i] += cfg.mu * (theta[i] - global[i]);
                }
                break;
            case Method::Scaffold:
                if (apply_correction) {
                    for (std::size_t i = 0; i < d; ++i) grad[i] += correction[i];
                }
                break;
            case Method::FedDyn:
                if (cfg.alpha != 0.0) {
                    for (std::size_t i = 0; i < d; ++i) {
                        grad[i] += cfg.alpha * (theta[i] - global[i]);
                    }
                }
                if (apply_dual) {
                    for (std::size_t i = 0; i < d; ++i) grad[i] -= dual[i];
                }
                break;
            case Method::FedSam:
                if (cfg.sam_radius != 0.0) {
                    const double gnorm = vec::l2_norm(grad);
                    if (gnorm > 0.0) {
                        ascent_point = vec::axpy(cfg.sam_radius / gnorm, grad, theta);
                        grad = loss_and_grad(spec, ascent_point, batch).second;
                    }
                }
                break;
        }

        vec::axpy_inplace(-cfg.local_lr, grad, theta);
        if (!vec::all_finite(theta)) {
            throw NumericError("client_update: parameters diverged at local step " +
                               std::to_string(step + 1));
        }
    }

    ClientUpdateResult result;
    result.new_state = state;
    if (cfg.method == Method::Scaffold) {
        // Option II control update: c_i <- c_i - c + (global - local)/(K * lr).
        const double denom = cfg.local_steps * cfg.local_lr;
        ParameterVector ci = materialize(state.control_variate, d, "control_variate");
        ParameterVector ci_new(d);
        if (denom > 0.0) {
            const ParameterVector c = materialize(server_control, d, "server_control");
            for (std::size_t i = 0; i < d; ++i) {
                ci_new[i] = ci[i] - c[i] + (global[i] - theta[i]) / denom;
            }
        } else {
            ci_new = ci;  // lr = 0: no movement and no information
        }
        result.delta_control = vec::sub(ci_new, ci);
        result.new_state.control_variate = std::move(ci_new);
    } else if (cfg.method == Method::FedDyn) {
        ParameterVector dual_new = materialize(state.dyn_dual, d, "dyn_dual");
        for (std::size_t i = 0; i < d; ++i) {
            dual_new[i] -= cfg.alpha * (theta[i] - global[i]);
        }
        result.new_state.dyn_dual = std::move(dual_new);
    }
    result.local_params = std::move(theta);
    return result;
}

void server_aggregate(const MethodConfig& cfg, ServerState& server,
                      const std::vector<ParameterVector>& locals,
                      const std::vector<ParameterVector>& delta_controls, int total_clients) {
    if (locals.empty()) throw ConfigError("server_aggregate: no client results");
    const std::size_t d = server.global_params.size();
    for (const auto& l : locals) {
        if (l.size() != d) throw DimensionError("server_aggregate: local length mismatch");
    }

    ParameterVector theta_mean = vec::mean(locals);

    switch (cfg.method) {
        case Method::FedAvg:
        case Method::FedProx:
        case Method::FedSam:
            server.global_params = std::move(theta_mean);
            break;
        case Method::Scaffold: {
            if (delta_controls.size() != locals.size()) {
                throw DimensionError("server_aggregate: missing scaffold control deltas");
            }
            ParameterVector dc_mean = vec::mean(delta_controls);
            ParameterVector c = materialize(server.server_control, d, "server_control");
            const double scale =
                static_cast<double>(locals.size()) / static_cast<double>(total_clients);
            vec::axpy_inplace(scale, dc_mean, c);
            server.server_control = std::move(c);
            server.global_params = std::move(theta_mean);
            break;
        }
        case Method::FedDyn: {
            ParameterVector h = materialize(server.dyn_h, d, "dyn_h");
            if (cfg.alpha != 0.0) {
                for (std::size_t i = 0; i < d; ++i) {
                    h[i] -= cfg.alpha * (theta_mean[i] - server.global_params[i]);
                }
                server.global_params = vec::axpy(-1.0 / cfg.alpha, h, theta_mean);
            } else {
                server.global_params = std::move(theta_mean);
            }
            server.dyn_h = std::move(h);
            break;
        }
    }
    server.round += 1;
}

RoundOutcome run_round(const ModelSpec& spec, const MethodConfig& cfg, int clients_per_round,
                       ServerState& server, std::vector<ClientState>& client_states,
                       const Dataset& train, const Partition& partition, std::uint64_t root_seed,
                       ExecutionMode mode) {
    const int total_clients = partition.num_clients();
    if (static_cast<int>(client_states.size()) != total_clients) {
        throw DimensionError("run_round: client_states size != partition clients");
    }
    const int r = server.round + 1;
    const std::vector<int> sampled = sample_clients(total_clients, clients_per_round, r, root_seed);
    const int m = static_cast<int>(sampled.size());

    std::vector<ClientUpdateResult> results(m);
    std::vector<std::exception_ptr> errors(m);

    auto run_one = [&](int slot) {
        const int client_id = sampled[slot];
        try {
            LocalData data{&train, &partition.client_indices[client_id]};
            const std::uint64_t seed =
                rng::derive_seed(root_seed, rng::Purpose::Minibatch,
                                 static_cast<std::uint64_t>(r),
                                 static_cast<std::uint64_t>(client_id));
            results[slot] = client_update(spec, cfg, server.global_params,
                                          client_states[client_id], server.server_control, data,
                                          seed);
        } catch (...) {
            errors[slot] = std::current_exception();
        }
    };

    if (mode == ExecutionMode::Parallel) {
#pragma omp parallel for schedule(dynamic)
        for (int slot = 0; slot < m; ++slot) run_one(slot);
    } else {
        for (int slot = 0; slot < m; ++slot) run_one(slot);
    }

    for (int slot = 0; slot < m; ++slot) {
        if (!errors[slot]) continue;
        try {
            std::rethrow_exception(errors[slot]);
        } catch (const NumericError& e) {
            throw ClientFailure(r, sampled[slot], e.what());
        }
        // Non-numeric errors propagate unchanged via the rethrow above.
    }

    std::vector<ParameterVector> locals;
    std::vector<ParameterVector> delta_controls;
    locals.reserve(m);
    for (int slot = 0; slot < m; ++slot) locals.push_back(std::move(results[slot].local_params));
    if (cfg.method == Method::Scaffold) {
        delta_controls.reserve(m);
        for (int slot = 0; slot < m; ++slot) {
            delta_controls.push_back(std::move(results[slot].delta_control));
        }
    }

    server_aggregate(cfg, server, locals, delta_controls, total_clients);
    for (int slot = 0; slot < m; ++slot) {
        client_states[sampled[slot]] = std::move(results[slot].new_state);
    }
    return {sampled};
}

}  // namespace fedstop

#pragma once

#include <cstdint>
#include <string>
#include <tuple>
#include <vector>

#include "fedstop/model.hpp"

namespace fedstop {

// In-memory classification dataset, features row-major [n x input_dim].
struct Dataset {
    std::vector<double> features;
    std::vector<int> labels;
    int input_dim = 0;
    int num_classes = 0;

    int size() const { return static_cast<int>(labels.size()); }
    const double* row(int i) const { return features.data() + static_cast<std::size_t>(i) * input_dim; }

    // Gather rows into a dense batch.
    Batch gather(const std::vector<int>& indices) const;
    Batch full_batch() const;
};

enum class SkewKind { Dirichlet, Pathological, Quantity };

struct PartitionSpec {
    SkewKind skew = SkewKind::Dirichlet;
    double c = 0.1;       // Dirichlet/quantity concentration; pathological classes-per-client
    int num_clients = 1;  // N
    std::uint64_t seed = 0;
};

// Disjoint, exhaustive per-client index lists; every client owns >= 1 sample.
struct Partition {
    std::vector<std::vector<int>> client_indices;

    int num_clients() const { return static_cast<int>(client_indices.size()); }
};

// Gaussian class clusters centered at class_sep * u_k for random unit
// directions u_k (orthogonalized against each other while the dimension
// allows it). Samples are emitted class-major; unit noise.
Dataset generate_synthetic(int num_classes, int input_dim, int n_per_class, double class_sep,
                           std::uint64_t seed);

// Label skew: per class, proportions over clients drawn from Dir(c * 1_N).
Partition partition_dirichlet(const Dataset& ds, double c, int num_clients, std::uint64_t seed);

// Label skew: each client holds shards from exactly c classes (2 shards per
// client-class slot), assigned round-robin over a seeded shuffle.
Partition partition_pathological(const Dataset& ds, int c, int num_clients, std::uint64_t seed);

// Quantity skew: client sizes from Dir(c * 1_N) over a seeded global shuffle,
// so per-client label mix stays near IID.
Partition partition_quantity(const Dataset& ds, double c, int num_clients, std::uint64_t seed);

Partition make_partition(const Dataset& ds, const PartitionSpec& spec);

struct SplitFractions {
    double train = 0.8;
    double val = 0.1;
    double test = 0.1;
};

// Stratified by class, deterministic per seed. Throws ConfigError if some
// split would receive zero samples of any class.
std::tuple<Dataset, Dataset, Dataset> split(const Dataset& ds, const SplitFractions& fractions,
                                            std::uint64_t seed);

// Total-variation distance between a client's label distribution and the
// global one; the heterogeneity measure used by the partition checks.
double label_tv_distance(const Dataset& ds, const std::vector<int>& client_idx);

// CSV with header feature_0..feature_{k-1},label; %.17g round-trips exactly.
void dump_csv(const Dataset& ds, const std::string& path);
Dataset load_csv(const std::string& path);

}  // namespace fedstop

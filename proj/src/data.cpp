#include "fedstop/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include "fedstop/errors.hpp"
#include "fedstop/rng.hpp"

namespace fedstop {

namespace {

std::vector<std::vector<int>> indices_by_class(const Dataset& ds) {
    std::vector<std::vector<int>> by_class(ds.num_classes);
    for (int i = 0; i < ds.size(); ++i) by_class[ds.labels[i]].push_back(i);
    return by_class;
}

// Largest-remainder rounding of proportions to integer counts summing to total.
std::vector<int> apportion(const std::vector<double>& props, int total) {
    const int n = static_cast<int>(props.size());
    std::vector<int> counts(n);
    std::vector<std::pair<double, int>> rema(n);
    int assigned = 0;
    for (int i = 0; i < n; ++i) {
        const double exact = props[i] * total;
        counts[i] = static_cast<int>(std::floor(exact));
        rema[i] = {exact - counts[i], i};
        assigned += counts[i];
    }
    std::stable_sort(rema.begin(), rema.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    for (int k = 0; k < total - assigned; ++k) counts[rema[k % n].second] += 1;
    return counts;
}

// Move one sample from the currently largest client to each empty one. The
// round loop requires every sampled client to own data.
void repair_empty_clients(Partition& part) {
    for (auto& target : part.client_indices) {
        if (!target.empty()) continue;
        int largest = 0;
        for (int i = 1; i < part.num_clients(); ++i) {
            if (part.client_indices[i].size() > part.client_indices[largest].size()) largest = i;
        }
        if (part.client_indices[largest].size() <= 1) {
            throw ConfigError("partition: not enough samples to give every client one");
        }
        target.push_back(part.client_indices[largest].back());
        part.client_indices[largest].pop_back();
    }
}

void validate_partition_args(const Dataset& ds, int num_clients) {
    if (num_clients < 1) throw ConfigError("partition: num_clients must be >= 1");
    if (ds.size() < num_clients) {
        throw ConfigError("partition: dataset smaller than client count");
    }
}

}  // namespace

Batch Dataset::gather(const std::vector<int>& indices) const {
    Batch b;
    b.input_dim = input_dim;
    b.labels.reserve(indices.size());
    b.features.reserve(indices.size() * static_cast<std::size_t>(input_dim));
    for (const int i : indices) {
        const double* r = row(i);
        b.features.insert(b.features.end(), r, r + input_dim);
        b.labels.push_back(labels[i]);
    }
    return b;
}

Batch Dataset::full_batch() const {
    Batch b;
    b.input_dim = input_dim;
    b.features = features;
    b.labels = labels;
    return b;
}

Dataset generate_synthetic(int num_classes, int input_dim, int n_per_class, double class_sep,
                           std::uint64_t seed) {
    if (num_classes < 2) throw ConfigError("generate_synthetic: num_classes must be >= 2");
    if (n_per_class < 1) throw ConfigError("generate_synthetic: n_per_class must be >= 1");
    if (input_dim < 1) throw ConfigError("generate_synthetic: input_dim must be >= 1");

    rng::Stream stream(rng::derive_seed(seed, rng::Purpose::DatasetGen));

    // Class mean directions: random Gaussian vectors, orthogonalized against
    // the accepted ones while input_dim allows; plain normalization after.
    std::vector<std::vector<double>> dirs;
    for (int k = 0; k < num_classes; ++k) {
        std::vector<double> v(input_dim);
        for (auto& x : v) x = stream.normal();
        if (k < input_dim) {
            for (const auto& u : dirs) {
                double dot = 0.0;
                for (int i = 0; i < input_dim; ++i) dot += v[i] * u[i];
                for (int i = 0; i < input_dim; ++i) v[i] -= dot * u[i];
            }
        }
        double norm = 0.0;
        for (const double x : v) norm += x * x;
        norm = std::sqrt(norm);
        if (norm < 1e-8) {
            // Degenerate draw; retry with a fresh Gaussian, unorthogonalized.
            for (auto& x : v) x = stream.normal();
            norm = 0.0;
            for (const double x : v) norm += x * x;
            norm = std::sqrt(norm);
        }
        for (auto& x : v) x /= norm;
        dirs.push_back(std::move(v));
    }

    Dataset ds;
    ds.input_dim = input_dim;
    ds.num_classes = num_classes;
    ds.features.reserve(static_cast<std::size_t>(num_classes) * n_per_class * input_dim);
    ds.labels.reserve(static_cast<std::size_t>(num_classes) * n_per_class);
    for (int k = 0; k < num_classes; ++k) {
        for (int s = 0; s < n_per_class; ++s) {
            for (int i = 0; i < input_dim; ++i) {
                ds.features.push_back(class_sep * dirs[k][i] + stream.normal());
            }
            ds.labels.push_back(k);
        }
    }
    return ds;
}

Partition partition_dirichlet(const Dataset& ds, double c, int num_clients, std::uint64_t seed) {
    if (c <= 0.0) throw ConfigError("partition_dirichlet: c must be > 0");
    validate_partition_args(ds, num_clients);

    rng::Stream stream(rng::derive_seed(seed, rng::Purpose::Partition));
    Partition part;
    part.client_indices.resize(num_clients);

    for (auto& idxs : indices_by_class(ds)) {
        stream.shuffle(idxs);
        const auto props = stream.dirichlet(c, num_clients);
        const auto counts = apportion(props, static_cast<int>(idxs.size()));
        int pos = 0;
        for (int cl = 0; cl < num_clients; ++cl) {
            for (int k = 0; k < counts[cl]; ++k) part.client_indices[cl].push_back(idxs[pos++]);
        }
    }
    repair_empty_clients(part);
    return part;
}

Partition partition_pathological(const Dataset& ds, int c, int num_clients, std::uint64_t seed) {
    const int num_classes = ds.num_classes;
    if (c < 1 || c > num_classes) {
        throw ConfigError("partition_pathological: c must be in [1, num_classes]");
    }
    validate_partition_args(ds, num_clients);

    rng::Stream stream(rng::derive_seed(seed, rng::Purpose::Partition));

    // Balanced class slots: client i draws classes pi[(i*c + j) mod K], which
    // are distinct for j < c <= K.
    std::vector<int> pi(num_classes);
    std::iota(pi.begin(), pi.end(), 0);
    stream.shuffle(pi);

    std::vector<std::vector<int>> holders(num_classes);
    for (int i = 0; i < num_clients; ++i) {
        for (int j = 0; j < c; ++j) {
            holders[pi[(static_cast<long long>(i) * c + j) % num_classes]].push_back(i);
        }
    }

    Partition part;
    part.client_indices.resize(num_clients);
    auto by_class = indices_by_class(ds);
    for (int k = 0; k < num_classes; ++k) {
        if (holders[k].empty()) continue;
        auto& idxs = by_class[k];
        stream.shuffle(idxs);
        // 2 shards per holding client; floor-sized, remainder appended to the
        // last shard.
        const int num_shards = 2 * static_cast<int>(holders[k].size());
        const int shard_size = static_cast<int>(idxs.size()) / num_shards;
        int pos = 0;
        for (int t = 0; t < num_shards; ++t) {
            const int end = (t == num_shards - 1) ? static_cast<int>(idxs.size())
                                                  : pos + shard_size;
            auto& dest = part.client_indices[holders[k][t % holders[k].size()]];
            for (; pos < end; ++pos) dest.push_back(idxs[pos]);
        }
    }
    repair_empty_clients(part);
    return part;
}

Partition partition_quantity(const Dataset& ds, double c, int num_clients, std::uint64_t seed) {
    if (c <= 0.0) throw ConfigError("partition_quantity: c must be > 0");
    validate_partition_args(ds, num_clients);

    rng::Stream stream(rng::derive_seed(seed, rng::Purpose::Partition));
    const auto props = stream.dirichlet(c, num_clients);
    auto sizes = apportion(props, ds.size());

    // Every client needs at least one sample; steal from the largest.
    for (int i = 0; i < num_clients; ++i) {
        while (sizes[i] == 0) {
            int largest = 0;
            for (int j = 1; j < num_clients; ++j) {
                if (sizes[j] > sizes[largest]) largest = j;
            }
            if (sizes[largest] <= 1) throw ConfigError("partition_quantity: too few samples");
            --sizes[largest];
            ++sizes[i];
        }
    }

    std::vector<int> order(ds.size());
    std::iota(order.begin(), order.end(), 0);
    stream.shuffle(order);

    Partition part;
    part.client_indices.resize(num_clients);
    int pos = 0;
    for (int i = 0; i < num_clients; ++i) {
        part.client_indices[i].assign(order.begin() + pos, order.begin() + pos + sizes[i]);
        pos += sizes[i];
    }
    return part;
}

Partition make_partition(const Dataset& ds, const PartitionSpec& spec) {
    switch (spec.skew) {
        case SkewKind::Dirichlet:
            return partition_dirichlet(ds, spec.c, spec.num_clients, spec.seed);
        case SkewKind::Pathological:
            return partition_pathological(ds, static_cast<int>(spec.c), spec.num_clients,
                                          spec.seed);
        case SkewKind::Quantity:
            return partition_quantity(ds, spec.c, spec.num_clients, spec.seed);
    }
    throw ConfigError("make_partition: unknown skew kind");
}

std::tuple<Dataset, Dataset, Dataset> split(const Dataset& ds, const SplitFractions& fractions,
                                            std::uint64_t seed) {
    const double sum = fractions.train + fractions.val + fractions.test;
    if (fractions.train <= 0.0 || fractions.val <= 0.0 || fractions.test <= 0.0) {
        throw ConfigError("split: fractions must be positive");
    }
    if (std::fabs(sum - 1.0) > 1e-9) throw ConfigError("split: fractions must sum to 1");

    rng::Stream stream(rng::derive_seed(seed, rng::Purpose::Split));
    std::vector<std::vector<int>> parts(3);
    for (auto& idxs : indices_by_class(ds)) {
        stream.shuffle(idxs);
        const auto counts =
            apportion({fractions.train, fractions.val, fractions.test},
                      static_cast<int>(idxs.size()));
        for (const int cnt : counts) {
            if (cnt == 0) {
                throw ConfigError("split: a split would receive zero samples of some class");
            }
        }
        int pos = 0;
        for (int p = 0; p < 3; ++p) {
            for (int k = 0; k < counts[p]; ++k) parts[p].push_back(idxs[pos++]);
        }
    }

    auto build = [&](const std::vector<int>& idxs) {
        Dataset out;
        out.input_dim = ds.input_dim;
        out.num_classes = ds.num_classes;
        const Batch b = ds.gather(idxs);
        out.features = b.features;
        out.labels = b.labels;
        return out;
    };
    return {build(parts[0]), build(parts[1]), build(parts[2])};
}

double label_tv_distance(const Dataset& ds, const std::vector<int>& client_idx) {
    std::vector<double> global(ds.num_classes, 0.0), local(ds.num_classes, 0.0);
    for (const int y : ds.labels) global[y] += 1.0;
    for (const int i : client_idx) local[ds.labels[i]] += 1.0;
    for (auto& g : global) g /= ds.size();
    for (auto& l : local) l /= static_cast<double>(client_idx.size());
    double tv = 0.0;
    for (int k = 0; k < ds.num_classes; ++k) tv += std::fabs(global[k] - local[k]);
    return 0.5 * tv;
}

void dump_csv(const Dataset& ds, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("dump_csv: cannot open " + path);
    for (int i = 0; i < ds.input_dim; ++i) out << "feature_" << i << ",";
    out << "label\n";
    char buf[64];
    for (int s = 0; s < ds.size(); ++s) {
        const double* r = ds.row(s);
        for (int i = 0; i < ds.input_dim; ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", r[i]);
            out << buf << ",";
        }
        out << ds.labels[s] << "\n";
    }
    if (!out) throw IoError("dump_csv: write failed for " + path);
}

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("load_csv: cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw IoError("load_csv: empty file " + path);

    int input_dim = 0;
    {
        std::stringstream header(line);
        std::string col;
        while (std::getline(header, col, ',')) {
            if (col.rfind("feature_", 0) == 0) ++input_dim;
        }
    }
    if (input_dim == 0) throw IoError("load_csv: no feature columns in " + path);

    Dataset ds;
    ds.input_dim = input_dim;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream row(line);
        std::string cell;
        for (int i = 0; i < input_dim; ++i) {
            if (!std::getline(row, cell, ',')) throw IoError("load_csv: short row in " + path);
            ds.features.push_back(std::strtod(cell.c_str(), nullptr));
        }
        if (!std::getline(row, cell, ',')) throw IoError("load_csv: missing label in " + path);
        ds.labels.push_back(std::atoi(cell.c_str()));
    }
    int max_label = -1;
    for (const int y : ds.labels) max_label = std::max(max_label, y);
    ds.num_classes = max_label + 1;
    return ds;
}

}  // namespace fedstop

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numeric>
#include <set>
#include <vector>

#include "fedstop/data.hpp"
#include "fedstop/errors.hpp"
#include "fedstop/model.hpp"
#include "fedstop/vecmath.hpp"

using namespace fedstop;

namespace {

// Every partition must be a disjoint, exhaustive cover with no empty client.
void check_partition_invariants(const Partition& part, int n_samples, int num_clients) {
    REQUIRE(part.num_clients() == num_clients);
    std::vector<int> seen(n_samples, 0);
    for (const auto& idx : part.client_indices) {
        CHECK(!idx.empty());
        for (const int i : idx) {
            REQUIRE(i >= 0);
            REQUIRE(i < n_samples);
            ++seen[i];
        }
    }
    for (const int count : seen) CHECK(count == 1);
}

double mean_tv(const Dataset& ds, const Partition& part) {
    double acc = 0.0;
    for (const auto& idx : part.client_indices) acc += label_tv_distance(ds, idx);
    return acc / part.num_clients();
}

int label_value_count(const Dataset& ds, const std::vector<int>& idx) {
    std::set<int> labels;
    for (const int i : idx) labels.insert(ds.labels[i]);
    return static_cast<int>(labels.size());
}

}  // namespace

TEST_CASE("generate_synthetic shape, determinism, class-major layout") {
    const Dataset ds = generate_synthetic(3, 6, 50, 2.0, 9);
    CHECK(ds.size() == 150);
    CHECK(ds.input_dim == 6);
    CHECK(ds.num_classes == 3);
    for (int i = 0; i < ds.size(); ++i) CHECK(ds.labels[i] == i / 50);

    const Dataset again = generate_synthetic(3, 6, 50, 2.0, 9);
    CHECK(ds.features == again.features);
    const Dataset other = generate_synthetic(3, 6, 50, 2.0, 10);
    CHECK(ds.features != other.features);
}

TEST_CASE("synthetic class centers sit near class_sep from the origin") {
    const double sep = 5.0;
    const int n = 2000, dim = 8, classes = 3;
    const Dataset ds = generate_synthetic(classes, dim, n, sep, 4);
    for (int k = 0; k < classes; ++k) {
        ParameterVector mean(dim, 0.0);
        for (int i = k * n; i < (k + 1) * n; ++i)
            for (int j = 0; j < dim; ++j) mean[j] += ds.row(i)[j];
        for (double& m : mean) m /= n;
        CHECK(vec::l2_norm(mean) == doctest::Approx(sep).epsilon(0.04));
    }
}

TEST_CASE("synthetic data is learnable by full-batch gradient descent") {
    // Independent sanity anchor for everything downstream: plain GD must be
    // able to separate the clusters.
    const ModelSpec spec{ModelSpec::Kind::Logreg, 4, 0, 3};
    const Dataset ds = generate_synthetic(3, 4, 200, 3.0, 21);
    const Batch full = ds.full_batch();
    ParameterVector theta(static_cast<std::size_t>(spec.param_dim()), 0.0);
    for (int step = 0; step < 300; ++step) {
        const auto [loss, grad] = loss_and_grad(spec, theta, full);
        vec::axpy_inplace(-0.5, grad, theta);
    }
    CHECK(evaluate(spec, theta, full).accuracy > 0.9);
}

TEST_CASE("stratified split has exact per-class counts and covers the dataset") {
    const Dataset ds = generate_synthetic(4, 3, 100, 2.0, 31);
    const auto [train, val, test] = split(ds, SplitFractions{0.8, 0.1, 0.1}, 31);
    CHECK(train.size() == 320);
    CHECK(val.size() == 40);
    CHECK(test.size() == 40);
    for (int k = 0; k < 4; ++k) {
        CHECK(std::count(train.labels.begin(), train.labels.end(), k) == 80);
        CHECK(std::count(val.labels.begin(), val.labels.end(), k) == 10);
        CHECK(std::count(test.labels.begin(), test.labels.end(), k) == 10);
    }

    // Multisets of rows must cover the original exactly; compare feature sums.
    long double all = 0.0L, parts = 0.0L;
    for (const double x : ds.features) all += x;
    for (const double x : train.features) parts += x;
    for (const double x : val.features) parts += x;
    for (const double x : test.features) parts += x;
    CHECK(static_cast<double>(parts) == doctest::Approx(static_cast<double>(all)).epsilon(1e-12));

    const auto [t2, v2, s2] = split(ds, SplitFractions{0.8, 0.1, 0.1}, 31);
    CHECK(train.features == t2.features);
    const auto [t3, v3, s3] = split(ds, SplitFractions{0.8, 0.1, 0.1}, 32);
    CHECK(train.features != t3.features);
}

TEST_CASE("split refuses a class that would vanish from a slice") {
    const Dataset tiny = generate_synthetic(3, 2, 5, 2.0, 7);
    CHECK_THROWS_AS(split(tiny, SplitFractions{0.8, 0.1, 0.1}, 7), ConfigError);
}

TEST_CASE("label_tv_distance endpoints") {
    const Dataset ds = generate_synthetic(2, 2, 50, 1.0, 3);  // 50/50 label mix
    std::vector<int> balanced;
    for (int i = 0; i < 10; ++i) {
        balanced.push_back(i);        // class 0 rows
        balanced.push_back(50 + i);   // class 1 rows
    }
    CHECK(label_tv_distance(ds, balanced) == doctest::Approx(0.0));
    std::vector<int> pure;
    for (int i = 0; i < 10; ++i) pure.push_back(i);
    CHECK(label_tv_distance(ds, pure) == doctest::Approx(0.5));  // |1-0.5| /2 + |0-0.5| /2
}

TEST_CASE("dirichlet partition invariants and heterogeneity ordering") {
    const Dataset ds = generate_synthetic(4, 2, 250, 2.0, 11);
    double tv_small = 0.0, tv_large = 0.0;
    for (const std::uint64_t seed : {1u, 2u, 3u}) {
        const Partition hot = partition_dirichlet(ds, 0.05, 20, seed);
        const Partition cold = partition_dirichlet(ds, 50.0, 20, seed);
        check_partition_invariants(hot, ds.size(), 20);
        check_partition_invariants(cold, ds.size(), 20);
        tv_small += mean_tv(ds, hot);
        tv_large += mean_tv(ds, cold);
    }
    CHECK(tv_small / 3 > tv_large / 3 + 0.1);  // clear separation, not a coin flip
    CHECK(partition_dirichlet(ds, 0.1, 20, 5).client_indices ==
          partition_dirichlet(ds, 0.1, 20, 5).client_indices);
}

TEST_CASE("pathological partition gives each client exactly c label values") {
    const Dataset ds = generate_synthetic(4, 2, 200, 2.0, 13);
    for (const int c : {1, 2, 3}) {
        const Partition part = partition_pathological(ds, c, 20, 99);
        check_partition_invariants(part, ds.size(), 20);
        for (const auto& idx : part.client_indices) CHECK(label_value_count(ds, idx) == c);
    }
    CHECK_THROWS_AS(partition_pathological(ds, 5, 20, 99), ConfigError);  // c > num_classes
}

TEST_CASE("quantity partition keeps label mix near-IID while sizes skew") {
    const Dataset ds = generate_synthetic(4, 2, 500, 2.0, 17);
    const Partition part = partition_quantity(ds, 0.2, 10, 3);
    check_partition_invariants(part, ds.size(), 10);

    std::size_t min_size = ds.size(), max_size = 0;
    for (const auto& idx : part.client_indices) {
        min_size = std::min(min_size, idx.size());
        max_size = std::max(max_size, idx.size());
    }
    CHECK(max_size >= 3 * min_size);  // strong size skew at c = 0.2

    // Label mix stays close to global for the big clients.
    for (const auto& idx : part.client_indices)
        if (idx.size() >= 100) CHECK(label_tv_distance(ds, idx) < 0.15);

    const Partition flat = partition_quantity(ds, 1e9, 10, 3);
    std::size_t flat_min = ds.size(), flat_max = 0;
    for (const auto& idx : flat.client_indices) {
        flat_min = std::min(flat_min, idx.size());
        flat_max = std::max(flat_max, idx.size());
    }
    CHECK(flat_max <= flat_min + 2);  // near-equal sizes at huge concentration
}

TEST_CASE("make_partition dispatches and validates") {
    const Dataset ds = generate_synthetic(3, 2, 60, 2.0, 19);
    const Partition p = make_partition(ds, {SkewKind::Pathological, 2.0, 12, 7});
    for (const auto& idx : p.client_indices) CHECK(label_value_count(ds, idx) == 2);
    CHECK_THROWS_AS(make_partition(ds, {SkewKind::Dirichlet, 0.1, 0, 7}), ConfigError);
    CHECK_THROWS_AS(make_partition(ds, {SkewKind::Dirichlet, -1.0, 5, 7}), ConfigError);
    // More clients than samples cannot satisfy the min-one-sample guarantee.
    CHECK_THROWS_AS(make_partition(ds, {SkewKind::Dirichlet, 0.1, 500, 7}), ConfigError);
}

TEST_CASE("csv dump/load round-trips bit-exactly") {
    namespace fs = std::filesystem;
    const Dataset ds = generate_synthetic(3, 5, 40, 2.5, 23);
    const auto path = (fs::temp_directory_path() / "fedstop_data_roundtrip.csv").string();
    dump_csv(ds, path);
    const Dataset back = load_csv(path);
    CHECK(back.features == ds.features);
    CHECK(back.labels == ds.labels);
    CHECK(back.input_dim == ds.input_dim);
    CHECK(back.num_classes == ds.num_classes);
    fs::remove(path);
    CHECK_THROWS_AS(load_csv("/nonexistent/fedstop.csv"), IoError);
}

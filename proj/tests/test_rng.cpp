#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "fedstop/rng.hpp"

using namespace fedstop;

TEST_CASE("same seed gives the same stream, different seeds differ") {
    rng::Stream a(123), b(123), c(124);
    bool any_diff = false;
    for (int i = 0; i < 1000; ++i) {
        const auto x = a.next_u64();
        CHECK(x == b.next_u64());
        any_diff = any_diff || x != c.next_u64();
    }
    CHECK(any_diff);
}

TEST_CASE("derive_seed separates purposes and indices") {
    std::set<std::uint64_t> seen;
    for (const auto purpose : {rng::Purpose::DatasetGen, rng::Purpose::Split,
                               rng::Purpose::Partition, rng::Purpose::ModelInit,
                               rng::Purpose::ClientSampling, rng::Purpose::Minibatch}) {
        for (std::uint64_t a = 0; a < 8; ++a) {
            for (std::uint64_t b = 0; b < 8; ++b) {
                seen.insert(rng::derive_seed(42, purpose, a, b));
            }
        }
    }
    CHECK(seen.size() == 6u * 8u * 8u);  // no collisions in this neighborhood

    // Deterministic, and sensitive to the root.
    CHECK(rng::derive_seed(1, rng::Purpose::Split, 2, 3) ==
          rng::derive_seed(1, rng::Purpose::Split, 2, 3));
    CHECK(rng::derive_seed(1, rng::Purpose::Split, 2, 3) !=
          rng::derive_seed(2, rng::Purpose::Split, 2, 3));
}

TEST_CASE("uniform01 stays in [0,1) and fills the range") {
    rng::Stream s(7);
    double lo = 1.0, hi = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double u = s.uniform01();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        lo = std::min(lo, u);
        hi = std::max(hi, u);
    }
    CHECK(lo < 1e-4);
    CHECK(hi > 1.0 - 1e-4);
}

TEST_CASE("uniform_int is in range and roughly uniform") {
    rng::Stream s(11);
    std::vector<int> counts(10, 0);
    for (int i = 0; i < 100000; ++i) {
        const auto k = s.uniform_int(10);
        REQUIRE(k < 10);
        ++counts[static_cast<int>(k)];
    }
    for (const int c : counts) {
        CHECK(c > 9000);
        CHECK(c < 11000);
    }
}

TEST_CASE("normal moments") {
    rng::Stream s(5);
    const int n = 200000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = s.normal();
        REQUIRE(std::isfinite(x));
        sum += x;
        sumsq += x * x;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::abs(mean) < 0.01);
    CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("gamma moments at shape 2.5") {
    rng::Stream s(9);
    const int n = 200000;
    const double shape = 2.5;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = s.gamma(shape);
        REQUIRE(x > 0.0);
        REQUIRE(std::isfinite(x));
        sum += x;
        sumsq += x * x;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::abs(mean - shape) < 0.02);  // E[X] = shape
    CHECK(std::abs(var - shape) < 0.08);   // Var[X] = shape
}

TEST_CASE("gamma below shape 1 stays positive and finite") {
    rng::Stream s(13);
    for (int i = 0; i < 20000; ++i) {
        const double x = s.gamma(0.05);
        REQUIRE(x >= 0.0);
        REQUIRE(std::isfinite(x));
    }
}

TEST_CASE("dirichlet sums to one for tame and extreme concentrations") {
    rng::Stream s(17);
    for (const double c : {100.0, 1.0, 0.1, 0.01, 1e-6}) {
        for (int rep = 0; rep < 200; ++rep) {
            const auto p = s.dirichlet(c, 20);
            REQUIRE(p.size() == 20);
            double sum = 0.0;
            for (const double v : p) {
                REQUIRE(v >= 0.0);
                REQUIRE(std::isfinite(v));
                sum += v;
            }
            CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("dirichlet concentration controls spread") {
    rng::Stream s(19);
    auto max_component_mean = [&](double c) {
        double acc = 0.0;
        for (int rep = 0; rep < 300; ++rep) {
            const auto p = s.dirichlet(c, 10);
            acc += *std::max_element(p.begin(), p.end());
        }
        return acc / 300;
    };
    const double concentrated = max_component_mean(0.05);  // mass piles on few components
    const double flat = max_component_mean(50.0);          // near-even proportions
    CHECK(concentrated > 0.7);
    CHECK(flat < 0.2);
}

TEST_CASE("shuffle permutes deterministically") {
    std::vector<int> xs(50);
    for (int i = 0; i < 50; ++i) xs[i] = i;
    auto ys = xs;
    rng::Stream s1(23), s2(23);
    s1.shuffle(xs);
    s2.shuffle(ys);
    CHECK(xs == ys);
    CHECK(xs != std::vector<int>(xs.size(), 0));
    auto sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 50; ++i) CHECK(sorted[i] == i);
}

#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace fedstop::rng {

// Purpose tags keep the derived streams independent: every consumer of
// randomness is keyed by (root seed, purpose, a, b) so adding draws in one
// place never shifts another.
enum class Purpose : std::uint64_t {
    DatasetGen = 1,
    Split = 2,
    Partition = 3,
    ModelInit = 4,
    ClientSampling = 5,
    Minibatch = 6,
};

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t root, Purpose purpose,
                                 std::uint64_t a = 0, std::uint64_t b = 0) {
    std::uint64_t s = root;
    std::uint64_t h = splitmix64(s);
    s ^= static_cast<std::uint64_t>(purpose) * 0xd1342543de82ef95ULL;
    h ^= splitmix64(s);
    s ^= (a + 1) * 0xaf251af3b0f025b5ULL;
    h ^= splitmix64(s);
    s ^= (b + 1) * 0x9e6c63d0876a9a47ULL;
    h ^= splitmix64(s);
    return h;
}

// mt19937_64 is the engine (bit-exact by the standard); the distributions are
// implemented here because the std:: ones are not portable bit-for-bit.
class Stream {
public:
    explicit Stream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Uniform in [0, 1) with 53 random bits.
    double uniform01() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    // Unbiased integer in [0, n) by rejection.
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % n;
    }

    // Box-Muller without caching; two draws per variate keeps the stream
    // layout trivial to reason about.
    double normal() {
        double u1;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        const double u2 = uniform01();
        const double two_pi = 6.283185307179586476925286766559;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2);
    }

    // Marsaglia-Tsang; shapes below 1 go through the gamma(shape+1) boost.
    double gamma(double shape) {
        if (shape < 1.0) {
            const double u = uniform01();
            return gamma(shape + 1.0) * std::pow(u, 1.0 / shape);
        }
        const double d = shape - 1.0 / 3.0;
        const double c = 1.0 / std::sqrt(9.0 * d);
        for (;;) {
            double x, v;
            do {
                x = normal();
                v = 1.0 + c * x;
            } while (v <= 0.0);
            v = v * v * v;
            const double u = uniform01();
            if (u < 1.0 - 0.0331 * x * x * x * x) return d * v;
            if (u > 0.0 && std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) return d * v;
        }
    }

    // Symmetric Dirichlet(concentration) over n components.
    std::vector<double> dirichlet(double concentration, int n) {
        std::vector<double> p(static_cast<std::size_t>(n));
        double sum = 0.0;
        for (auto& v : p) {
            v = gamma(concentration);
            sum += v;
        }
        if (sum <= 0.0) {
            // All draws underflowed (tiny concentration); put the mass on one
            // component, which is the limit behavior anyway.
            p.assign(p.size(), 0.0);
            p[uniform_int(p.size())] = 1.0;
            return p;
        }
        for (auto& v : p) v /= sum;
        return p;
    }

    template <typename T>
    void shuffle(std::vector<T>& xs) {
        for (std::size_t i = xs.size(); i > 1; --i) {
            const std::size_t j = uniform_int(i);
            std::swap(xs[i - 1], xs[j]);
        }
    }

private:
    std::mt19937_64 engine_;
};

}  // namespace fedstop::rng

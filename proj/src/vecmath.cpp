#include "fedstop/vecmath.hpp"

#include <cmath>
#include <cstdint>
#include <string>

#include "fedstop/errors.hpp"

namespace fedstop::vec {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* op) {
    if (a != b) {
        throw DimensionError(std::string(op) + ": length mismatch (" +
                             std::to_string(a) + " vs " + std::to_string(b) + ")");
    }
}

}  // namespace

ParameterVector sub(const ParameterVector& a, const ParameterVector& b) {
    require_same_length(a.size(), b.size(), "sub");
    const std::int64_t n = static_cast<std::int64_t>(a.size());
    ParameterVector out(a.size());
    if (a.size() >= kParallelGrain) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
    } else {
        for (std::int64_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
    }
    return out;
}

double l2_norm(const ParameterVector& a) {
    double sum = 0.0;
    for (const double x : a) sum += x * x;
    const double norm = std::sqrt(sum);
    if (!std::isfinite(norm)) {
        throw NumericError("l2_norm: non-finite result");
    }
    return norm;
}

ParameterVector axpy(double alpha, const ParameterVector& x, const ParameterVector& y) {
    require_same_length(x.size(), y.size(), "axpy");
    const std::int64_t n = static_cast<std::int64_t>(x.size());
    ParameterVector out(x.size());
    if (x.size() >= kParallelGrain) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) out[i] = alpha * x[i] + y[i];
    } else {
        for (std::int64_t i = 0; i < n; ++i) out[i] = alpha * x[i] + y[i];
    }
    return out;
}

void axpy_inplace(double alpha, const ParameterVector& x, ParameterVector& y) {
    require_same_length(x.size(), y.size(), "axpy_inplace");
    const std::int64_t n = static_cast<std::int64_t>(x.size());
    if (x.size() >= kParallelGrain) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
    } else {
        for (std::int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
    }
}

ParameterVector mean(const std::vector<ParameterVector>& vs) {
    if (vs.empty()) throw ConfigError("mean: empty list");
    const std::size_t d = vs.front().size();
    for (const auto& v : vs) require_same_length(v.size(), d, "mean");
    const std::int64_t n = static_cast<std::int64_t>(d);
    ParameterVector out(vs.front());
    // Per element, fold the remaining vectors in list order. Elements are
    // independent, so the parallel split cannot change any result bit.
    if (d >= kParallelGrain) {
#pragma omp parallel for schedule(static)
        for (std::int64_t i = 0; i < n; ++i) {
            double m = vs[0][i];
            for (std::size_t k = 1; k < vs.size(); ++k) {
                m += (vs[k][i] - m) / static_cast<double>(k + 1);
            }
            out[i] = m;
        }
    } else {
        for (std::int64_t i = 0; i < n; ++i) {
            double m = vs[0][i];
            for (std::size_t k = 1; k < vs.size(); ++k) {
                m += (vs[k][i] - m) / static_cast<double>(k + 1);
            }
            out[i] = m;
        }
    }
    return out;
}

bool all_finite(const ParameterVector& a) {
    for (const double x : a) {
        if (!std::isfinite(x)) return false;
    }
    return true;
}

double linf_norm(const ParameterVector& a) {
    double m = 0.0;
    for (const double x : a) {
        const double ax = std::fabs(x);
        if (ax > m) m = ax;
    }
    return m;
}

namespace serial {

ParameterVector sub(const ParameterVector& a, const ParameterVector& b) {
    require_same_length(a.size(), b.size(), "sub");
    ParameterVector out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
    return out;
}

double l2_norm(const ParameterVector& a) {
    double sum = 0.0;
    for (const double x : a) sum += x * x;
    const double norm = std::sqrt(sum);
    if (!std::isfinite(norm)) {
        throw NumericError("l2_norm: non-finite result");
    }
    return norm;
}

ParameterVector axpy(double alpha, const ParameterVector& x, const ParameterVector& y) {
    require_same_length(x.size(), y.size(), "axpy");
    ParameterVector out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = alpha * x[i] + y[i];
    return out;
}

ParameterVector mean(const std::vector<ParameterVector>& vs) {
    if (vs.empty()) throw ConfigError("mean: empty list");
    const std::size_t d = vs.front().size();
    for (const auto& v : vs) require_same_length(v.size(), d, "mean");
    ParameterVector out(vs.front());
    for (std::size_t i = 0; i < d; ++i) {
        double m = vs[0][i];
        for (std::size_t k = 1; k < vs.size(); ++k) {
            m += (vs[k][i] - m) / static_cast<double>(k + 1);
        }
        out[i] = m;
    }
    return out;
}

}  // namespace serial
}  // namespace fedstop::vec

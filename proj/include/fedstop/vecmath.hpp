#pragma once

#include <cstddef>
#include <vector>

namespace fedstop {

// Flat 64-bit parameter vector, the common currency between model, optimizer,
// server and monitor code. Flattening order is fixed: layer-major, row-major
// within a layer (see model.hpp).
using ParameterVector = std::vector<double>;

namespace vec {

// Elementwise kernels run OpenMP-parallel above this many elements. Each
// output element is computed independently, so the parallel result is
// bit-identical to the serial one at any thread count.
inline constexpr std::size_t kParallelGrain = 1 << 15;

ParameterVector sub(const ParameterVector& a, const ParameterVector& b);

// Sequential accumulation, then sqrt. Throws NumericError if the result is
// not finite (NaN/Inf entries or overflow).
double l2_norm(const ParameterVector& a);

// result = alpha * x + y
ParameterVector axpy(double alpha, const ParameterVector& x, const ParameterVector& y);

// y += alpha * x
void axpy_inplace(double alpha, const ParameterVector& x, ParameterVector& y);

// Elementwise mean in incremental form, m += (x - m) / k. The incremental
// update keeps mean(k copies of v) == v exactly.
ParameterVector mean(const std::vector<ParameterVector>& vs);

bool all_finite(const ParameterVector& a);

double linf_norm(const ParameterVector& a);

// Plain-loop reference kernels. Semantically identical to the ones above;
// kept for the parallel-vs-serial equality tests and the benchmark target.
namespace serial {
ParameterVector sub(const ParameterVector& a, const ParameterVector& b);
double l2_norm(const ParameterVector& a);
ParameterVector axpy(double alpha, const ParameterVector& x, const ParameterVector& y);
ParameterVector mean(const std::vector<ParameterVector>& vs);
}  // namespace serial

}  // namespace vec
}  // namespace fedstop

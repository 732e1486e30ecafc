#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "fedstop/vecmath.hpp"

namespace fedstop {

// Small differentiable classifiers with hand-written exact gradients.
//
// Parameter flattening is layer-major, row-major within a layer:
//   logreg: W [C x D] rows, then b [C]
//   mlp:    W1 [H x D] rows, b1 [H], W2 [C x H] rows, b2 [C]
struct ModelSpec {
    enum class Kind { Logreg, Mlp };

    Kind kind = Kind::Logreg;
    int input_dim = 0;
    int hidden_dim = 0;  // mlp only
    int num_classes = 0;

    int param_dim() const;
    void validate() const;  // throws ConfigError
};

// A dense batch: features row-major [n x input_dim], labels in [0, num_classes).
struct Batch {
    std::vector<double> features;
    std::vector<int> labels;
    int input_dim = 0;

    int size() const { return static_cast<int>(labels.size()); }
    const double* row(int i) const { return features.data() + static_cast<std::size_t>(i) * input_dim; }
};

// Deterministic init: weights uniform in +-1/sqrt(fan_in), biases zero.
ParameterVector init_params(const ModelSpec& spec, std::uint64_t seed);

// Mean cross-entropy over the batch and its exact analytic gradient.
// Softmax is computed with max subtraction; a non-finite loss throws
// NumericError instead of propagating NaN.
std::pair<double, ParameterVector> loss_and_grad(const ModelSpec& spec,
                                                 const ParameterVector& params,
                                                 const Batch& batch);

struct EvalResult {
    double loss = 0.0;
    double accuracy = 0.0;  // argmax ties break to the lowest class index
};

EvalResult evaluate(const ModelSpec& spec, const ParameterVector& params, const Batch& batch);

}  // namespace fedstop

#include "fedstop/model.hpp"

#include <cmath>
#include <string>

#include "fedstop/errors.hpp"
#include "fedstop/rng.hpp"

namespace fedstop {

namespace {

void validate_batch(const ModelSpec& spec, const Batch& batch) {
    if (batch.size() < 1) throw ConfigError("batch: empty");
    if (batch.input_dim != spec.input_dim) {
        throw DimensionError("batch input_dim " + std::to_string(batch.input_dim) +
                             " != model input_dim " + std::to_string(spec.input_dim));
    }
    if (batch.features.size() !=
        static_cast<std::size_t>(batch.size()) * static_cast<std::size_t>(batch.input_dim)) {
        throw DimensionError("batch: features/labels size mismatch");
    }
    for (const int y : batch.labels) {
        if (y < 0 || y >= spec.num_classes) {
            throw ConfigError("batch: label " + std::to_string(y) + " out of range");
        }
    }
}

void validate_params(const ModelSpec& spec, const ParameterVector& params) {
    spec.validate();
    if (static_cast<int>(params.size()) != spec.param_dim()) {
        throw DimensionError("params length " + std::to_string(params.size()) +
                             " != model dim " + std::to_string(spec.param_dim()));
    }
}

// Stable softmax into probs; returns the per-sample cross-entropy term.
double softmax_xent(const double* logits, int n_classes, int label, double* probs) {
    double zmax = logits[0];
    for (int j = 1; j < n_classes; ++j) {
        if (logits[j] > zmax) zmax = logits[j];
    }
    double sumexp = 0.0;
    for (int j = 0; j < n_classes; ++j) {
        probs[j] = std::exp(logits[j] - zmax);
        sumexp += probs[j];
    }
    for (int j = 0; j < n_classes; ++j) probs[j] /= sumexp;
    return std::log(sumexp) - (logits[label] - zmax);
}

struct LogregView {
    const double* W;  // [C x D]
    const double* b;  // [C]
};

LogregView logreg_view(const ModelSpec& spec, const ParameterVector& p) {
    return {p.data(), p.data() + static_cast<std::size_t>(spec.num_classes) * spec.input_dim};
}

struct MlpView {
    const double* W1;  // [H x D]
    const double* b1;  // [H]
    const double* W2;  // [C x H]
    const double* b2;  // [C]
};

MlpView mlp_view(const ModelSpec& spec, const ParameterVector& p) {
    const std::size_t d = spec.input_dim, h = spec.hidden_dim, c = spec.num_classes;
    const double* base = p.data();
    return {base, base + h * d, base + h * d + h, base + h * d + h + c * h};
}

void logreg_logits(const ModelSpec& spec, const LogregView& v, const double* x, double* z) {
    for (int j = 0; j < spec.num_classes; ++j) {
        double acc = v.b[j];
        const double* wrow = v.W + static_cast<std::size_t>(j) * spec.input_dim;
        for (int i = 0; i < spec.input_dim; ++i) acc += wrow[i] * x[i];
        z[j] = acc;
    }
}

void mlp_forward(const ModelSpec& spec, const MlpView& v, const double* x, double* hidden,
                 double* z) {
    for (int k = 0; k < spec.hidden_dim; ++k) {
        double acc = v.b1[k];
        const double* wrow = v.W1 + static_cast<std::size_t>(k) * spec.input_dim;
        for (int i = 0; i < spec.input_dim; ++i) acc += wrow[i] * x[i];
        hidden[k] = std::tanh(acc);
    }
    for (int j = 0; j < spec.num_classes; ++j) {
        double acc = v.b2[j];
        const double* wrow = v.W2 + static_cast<std::size_t>(j) * spec.hidden_dim;
        for (int k = 0; k < spec.hidden_dim; ++k) acc += wrow[k] * hidden[k];
        z[j] = acc;
    }
}

int argmax_lowest(const double* z, int n) {
    int best = 0;
    for (int j = 1; j < n; ++j) {
        if (z[j] > z[best]) best = j;
    }
    return best;
}

}  // namespace

int ModelSpec::param_dim() const {
    if (kind == Kind::Logreg) return (input_dim + 1) * num_classes;
    return (input_dim + 1) * hidden_dim + (hidden_dim + 1) * num_classes;
}

void ModelSpec::validate() const {
    if (input_dim < 1) throw ConfigError("model: input_dim must be >= 1");
    if (num_classes < 2) throw ConfigError("model: num_classes must be >= 2");
    if (kind == Kind::Mlp && hidden_dim < 1) {
        throw ConfigError("model: hidden_dim must be >= 1 for mlp");
    }
}

ParameterVector init_params(const ModelSpec& spec, std::uint64_t seed) {
    spec.validate();
    rng::Stream stream(seed);
    ParameterVector p(static_cast<std::size_t>(spec.param_dim()), 0.0);
    auto fill_layer = [&](double* w, int rows, int fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (std::size_t i = 0; i < static_cast<std::size_t>(rows) * fan_in; ++i) {
            w[i] = stream.uniform(-bound, bound);
        }
    };
    if (spec.kind == ModelSpec::Kind::Logreg) {
        fill_layer(p.data(), spec.num_classes, spec.input_dim);
    } else {
        const std::size_t w1 = static_cast<std::size_t>(spec.hidden_dim) * spec.input_dim;
        fill_layer(p.data(), spec.hidden_dim, spec.input_dim);
        fill_layer(p.data() + w1 + spec.hidden_dim, spec.num_classes, spec.hidden_dim);
    }
    return p;
}

std::pair<double, ParameterVector> loss_and_grad(const ModelSpec& spec,
                                                 const ParameterVector& params,
                                                 const Batch& batch) {
    validate_params(spec, params);
    validate_batch(spec, batch);

    const int n = batch.size();
    const int c = spec.num_classes;
    ParameterVector grad(params.size(), 0.0);
    std::vector<double> z(c), probs(c);
    double loss_sum = 0.0;

    if (spec.kind == ModelSpec::Kind::Logreg) {
        const LogregView v = logreg_view(spec, params);
        double* gW = grad.data();
        double* gb = grad.data() + static_cast<std::size_t>(c) * spec.input_dim;
        for (int s = 0; s < n; ++s) {
            const double* x = batch.row(s);
            logreg_logits(spec, v, x, z.data());
            loss_sum += softmax_xent(z.data(), c, batch.labels[s], probs.data());
            for (int j = 0; j < c; ++j) {
                const double dz = probs[j] - (batch.labels[s] == j ? 1.0 : 0.0);
                double* grow = gW + static_cast<std::size_t>(j) * spec.input_dim;
                for (int i = 0; i < spec.input_dim; ++i) grow[i] += dz * x[i];
                gb[j] += dz;
            }
        }
    } else {
        const MlpView v = mlp_view(spec, params);
        const int h = spec.hidden_dim;
        const std::size_t w1 = static_cast<std::size_t>(h) * spec.input_dim;
        double* gW1 = grad.data();
        double* gb1 = grad.data() + w1;
        double* gW2 = gb1 + h;
        double* gb2 = gW2 + static_cast<std::size_t>(c) * h;
        std::vector<double> hidden(h), dhidden(h);
        for (int s = 0; s < n; ++s) {
            const double* x = batch.row(s);
            mlp_forward(spec, v, x, hidden.data(), z.data());
            loss_sum += softmax_xent(z.data(), c, batch.labels[s], probs.data());
            for (int k = 0; k < h; ++k) dhidden[k] = 0.0;
            for (int j = 0; j < c; ++j) {
                const double dz = probs[j] - (batch.labels[s] == j ? 1.0 : 0.0);
                double* grow = gW2 + static_cast<std::size_t>(j) * h;
                const double* wrow = v.W2 + static_cast<std::size_t>(j) * h;
                for (int k = 0; k < h; ++k) {
                    grow[k] += dz * hidden[k];
                    dhidden[k] += dz * wrow[k];
                }
                gb2[j] += dz;
            }
            for (int k = 0; k < h; ++k) {
                const double da = dhidden[k] * (1.0 - hidden[k] * hidden[k]);
                double* grow = gW1 + static_cast<std::size_t>(k) * spec.input_dim;
                for (int i = 0; i < spec.input_dim; ++i) grow[i] += da * x[i];
                gb1[k] += da;
            }
        }
    }

    const double inv_n = 1.0 / static_cast<double>(n);
    const double loss = loss_sum * inv_n;
    if (!std::isfinite(loss)) {
        throw NumericError("loss_and_grad: non-finite loss");
    }
    for (auto& g : grad) g *= inv_n;
    return {loss, std::move(grad)};
}

EvalResult evaluate(const ModelSpec& spec, const ParameterVector& params, const Batch& batch) {
    validate_params(spec, params);
    validate_batch(spec, batch);

    const int n = batch.size();
    const int c = spec.num_classes;
    std::vector<double> z(c), probs(c), hidden;
    if (spec.kind == ModelSpec::Kind::Mlp) hidden.resize(spec.hidden_dim);

    double loss_sum = 0.0;
    int correct = 0;
    for (int s = 0; s < n; ++s) {
        const double* x = batch.row(s);
        if (spec.kind == ModelSpec::Kind::Logreg) {
            logreg_logits(spec, logreg_view(spec, params), x, z.data());
        } else {
            mlp_forward(spec, mlp_view(spec, params), x, hidden.data(), z.data());
        }
        loss_sum += softmax_xent(z.data(), c, batch.labels[s], probs.data());
        if (argmax_lowest(z.data(), c) == batch.labels[s]) ++correct;
    }
    const double loss = loss_sum / static_cast<double>(n);
    if (!std::isfinite(loss)) {
        throw NumericError("evaluate: non-finite loss");
    }
    return {loss, static_cast<double>(correct) / static_cast<double>(n)};
}

}  // namespace fedstop

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "fedstop/errors.hpp"
#include "fedstop/model.hpp"
#include "fedstop/rng.hpp"

using namespace fedstop;

namespace {

// Independent oracle: central finite differences of the loss.
ParameterVector fd_gradient(const ModelSpec& spec, const ParameterVector& params,
                            const Batch& batch, double h = 1e-6) {
    ParameterVector g(params.size());
    ParameterVector p = params;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double keep = p[i];
        p[i] = keep + h;
        const double up = loss_and_grad(spec, p, batch).first;
        p[i] = keep - h;
        const double down = loss_and_grad(spec, p, batch).first;
        p[i] = keep;
        g[i] = (up - down) / (2.0 * h);
    }
    return g;
}

// Relative error of a gradient vector against the oracle, scaled by the
// oracle's overall magnitude so near-zero coordinates cannot blow it up.
double grad_rel_error(const ParameterVector& analytic, const ParameterVector& fd) {
    double scale = 1.0;
    for (const double x : fd) scale = std::max(scale, std::abs(x));
    double worst = 0.0;
    for (std::size_t i = 0; i < analytic.size(); ++i)
        worst = std::max(worst, std::abs(analytic[i] - fd[i]) / scale);
    return worst;
}

Batch random_batch(int n, int input_dim, int num_classes, std::uint64_t seed) {
    rng::Stream s(seed);
    Batch b;
    b.input_dim = input_dim;
    for (int i = 0; i < n; ++i) {
        for (int k = 0; k < input_dim; ++k) b.features.push_back(s.normal());
        b.labels.push_back(static_cast<int>(s.uniform_int(num_classes)));
    }
    return b;
}

ParameterVector random_params(const ModelSpec& spec, std::uint64_t seed) {
    rng::Stream s(seed);
    ParameterVector p(static_cast<std::size_t>(spec.param_dim()));
    for (auto& x : p) x = 0.5 * s.normal();
    return p;
}

}  // namespace

TEST_CASE("param_dim formulas") {
    ModelSpec lr{ModelSpec::Kind::Logreg, 5, 0, 3};
    CHECK(lr.param_dim() == (5 + 1) * 3);
    ModelSpec mlp{ModelSpec::Kind::Mlp, 4, 6, 3};
    CHECK(mlp.param_dim() == (4 + 1) * 6 + (6 + 1) * 3);
}

TEST_CASE("spec validation") {
    CHECK_THROWS_AS((ModelSpec{ModelSpec::Kind::Logreg, 0, 0, 3}.validate()), ConfigError);
    CHECK_THROWS_AS((ModelSpec{ModelSpec::Kind::Logreg, 4, 0, 1}.validate()), ConfigError);
    CHECK_THROWS_AS((ModelSpec{ModelSpec::Kind::Mlp, 4, 0, 3}.validate()), ConfigError);
    CHECK_NOTHROW((ModelSpec{ModelSpec::Kind::Mlp, 4, 2, 3}.validate()));
}

TEST_CASE("init_params is deterministic, bounded, and zero-biased") {
    const ModelSpec spec{ModelSpec::Kind::Mlp, 9, 7, 4};
    const ParameterVector p = init_params(spec, 77);
    CHECK(p == init_params(spec, 77));
    CHECK(p != init_params(spec, 78));
    REQUIRE(static_cast<int>(p.size()) == spec.param_dim());

    const double bound1 = 1.0 / std::sqrt(9.0);  // fan_in of the first layer
    const double bound2 = 1.0 / std::sqrt(7.0);  // fan_in of the second layer
    const std::size_t w1 = 9 * 7, b1 = 7, w2 = 7 * 4;
    for (std::size_t i = 0; i < w1; ++i) CHECK(std::abs(p[i]) <= bound1);
    for (std::size_t i = w1; i < w1 + b1; ++i) CHECK(p[i] == 0.0);
    for (std::size_t i = w1 + b1; i < w1 + b1 + w2; ++i) CHECK(std::abs(p[i]) <= bound2);
    for (std::size_t i = w1 + b1 + w2; i < p.size(); ++i) CHECK(p[i] == 0.0);
}

TEST_CASE("logreg gradient matches finite differences") {
    const ModelSpec spec{ModelSpec::Kind::Logreg, 5, 0, 3};
    for (std::uint64_t trial = 0; trial < 5; ++trial) {
        const Batch b = random_batch(17, 5, 3, 1000 + trial);
        const ParameterVector p = random_params(spec, 2000 + trial);
        const auto [loss, grad] = loss_and_grad(spec, p, b);
        CHECK(std::isfinite(loss));
        CHECK(grad_rel_error(grad, fd_gradient(spec, p, b)) < 1e-6);
    }
}

TEST_CASE("mlp gradient matches finite differences") {
    const ModelSpec spec{ModelSpec::Kind::Mlp, 4, 6, 3};
    for (std::uint64_t trial = 0; trial < 5; ++trial) {
        const Batch b = random_batch(11, 4, 3, 3000 + trial);
        const ParameterVector p = random_params(spec, 4000 + trial);
        const auto [loss, grad] = loss_and_grad(spec, p, b);
        CHECK(std::isfinite(loss));
        CHECK(grad_rel_error(grad, fd_gradient(spec, p, b)) < 1e-6);
    }
}

TEST_CASE("zero parameters give uniform probabilities and ln(C) loss") {
    const ModelSpec spec{ModelSpec::Kind::Logreg, 3, 0, 4};
    const ParameterVector p(static_cast<std::size_t>(spec.param_dim()), 0.0);
    const Batch b = random_batch(32, 3, 4, 42);
    const auto [loss, grad] = loss_and_grad(spec, p, b);
    CHECK(loss == doctest::Approx(std::log(4.0)).epsilon(1e-15));
    (void)grad;
}

TEST_CASE("softmax is stable under huge logits") {
    // One feature, one class weight at +1000: logits {1000, 0}.
    const ModelSpec spec{ModelSpec::Kind::Logreg, 1, 0, 2};
    ParameterVector p{1000.0, 0.0, 0.0, 0.0};  // W = [[1000],[0]], b = [0,0]
    Batch b;
    b.input_dim = 1;
    b.features = {1.0};
    b.labels = {0};
    const auto [loss_right, g1] = loss_and_grad(spec, p, b);
    CHECK(loss_right == 0.0);  // p(class 0) rounds to exactly 1
    CHECK(vec::all_finite(g1));

    b.labels = {1};
    const auto [loss_wrong, g2] = loss_and_grad(spec, p, b);
    CHECK(loss_wrong == doctest::Approx(1000.0).epsilon(1e-12));
    CHECK(vec::all_finite(g2));
}

TEST_CASE("evaluate accuracy breaks argmax ties toward the lowest class") {
    const ModelSpec spec{ModelSpec::Kind::Logreg, 2, 0, 3};
    const ParameterVector p(static_cast<std::size_t>(spec.param_dim()), 0.0);  // all logits equal
    Batch b;
    b.input_dim = 2;
    b.features = {1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0};
    b.labels = {0, 1, 2, 0};
    const EvalResult ev = evaluate(spec, p, b);
    CHECK(ev.accuracy == 0.5);  // everything predicted as class 0; labels 0 at rows 0 and 3
}

TEST_CASE("evaluate and loss_and_grad agree on the loss to the last bit") {
    const ModelSpec spec{ModelSpec::Kind::Mlp, 4, 5, 3};
    const Batch b = random_batch(23, 4, 3, 99);
    const ParameterVector p = random_params(spec, 98);
    CHECK(evaluate(spec, p, b).loss == loss_and_grad(spec, p, b).first);
}

TEST_CASE("model input validation") {
    const ModelSpec spec{ModelSpec::Kind::Logreg, 3, 0, 2};
    const ParameterVector p(static_cast<std::size_t>(spec.param_dim()), 0.0);

    Batch wrong_dim = random_batch(4, 2, 2, 1);
    CHECK_THROWS_AS(loss_and_grad(spec, p, wrong_dim), DimensionError);

    Batch bad_label = random_batch(4, 3, 2, 2);
    bad_label.labels[1] = 2;
    CHECK_THROWS_AS(loss_and_grad(spec, p, bad_label), ConfigError);

    Batch empty;
    empty.input_dim = 3;
    CHECK_THROWS_AS(loss_and_grad(spec, p, empty), ConfigError);

    CHECK_THROWS_AS(loss_and_grad(spec, ParameterVector{1.0}, random_batch(4, 3, 2, 3)),
                    DimensionError);

    ParameterVector nan_params = p;
    nan_params[0] = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(loss_and_grad(spec, nan_params, random_batch(4, 3, 2, 4)), NumericError);
}

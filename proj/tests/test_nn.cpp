// Copyright 2026 The qvcopt Authors.

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "qvcopt/nn.hpp"
#include "qvcopt/rng.hpp"

using namespace qvcopt;
using Catch::Approx;

namespace {

/// Scalar probe loss: L = sum_i c_i * out_i with fixed coefficients, so
/// dL/dout is known exactly and parameter gradients can be finite-differenced.
double probe_loss(const Network &net, const Tensor &x,
                  const std::vector<double> &coeffs) {
    const Tensor y = net.forward(x);
    double loss = 0.0;
    for (std::size_t i = 0; i < y.data.size(); ++i) loss += coeffs[i] * y.data[i];
    return loss;
}

void check_param_gradients(Network &net, const Tensor &x, double tol = 1e-4) {
    Rng rng = Rng::from_seed(99);
    ForwardCache cache;
    const Tensor y = net.forward(x, &cache);
    std::vector<double> coeffs(y.data.size());
    for (double &c : coeffs) c = rng.uniform(-1.0, 1.0);

    Tensor dy = y;
    dy.data = coeffs;
    std::vector<double> grads(net.n_params(), 0.0);
    net.backward(cache, dy, grads);

    const double eps = 1e-4;
    auto params = net.params();
    for (std::size_t i = 0; i < params.size(); i += 7) { // sampled coordinates
        const double saved = params[i];
        params[i] = saved + eps;
        const double plus = probe_loss(net, x, coeffs);
        params[i] = saved - eps;
        const double minus = probe_loss(net, x, coeffs);
        params[i] = saved;
        const double fd = (plus - minus) / (2.0 * eps);
        const double scale = std::max({1.0, std::abs(fd), std::abs(grads[i])});
        REQUIRE(std::abs(grads[i] - fd) / scale < tol);
    }
}

Tensor random_input(std::vector<std::size_t> shape, std::uint64_t seed) {
    Tensor t(std::move(shape));
    Rng rng = Rng::from_seed(seed);
    for (double &v : t.data) v = rng.uniform(-1.0, 1.0);
    return t;
}

} // namespace

TEST_CASE("dense forward matches hand computation", "[nn]") {
    Rng rng = Rng::from_seed(1);
    Network net({2}, {DenseSpec{2, 2, Activation::Linear}}, rng);
    // W = [[1, 2], [3, 4]], b = [0.5, -0.5]
    auto p = net.params();
    p[0] = 1.0; p[1] = 2.0; p[2] = 3.0; p[3] = 4.0;
    p[4] = 0.5; p[5] = -0.5;
    Tensor x({1, 2}, {10.0, 20.0});
    const Tensor y = net.forward(x);
    REQUIRE(y.data[0] == Approx(1.0 * 10 + 2.0 * 20 + 0.5));
    REQUIRE(y.data[1] == Approx(3.0 * 10 + 4.0 * 20 - 0.5));
}

TEST_CASE("identity dense layer passes input through", "[nn]") {
    Rng rng = Rng::from_seed(2);
    Network net({3}, {DenseSpec{3, 3, Activation::Linear}}, rng);
    auto p = net.params();
    std::fill(p.begin(), p.end(), 0.0);
    p[0] = p[4] = p[8] = 1.0; // identity weights, zero bias
    const Tensor x = random_input({4, 3}, 5);
    const Tensor y = net.forward(x);
    for (std::size_t i = 0; i < x.data.size(); ++i)
        REQUIRE(y.data[i] == Approx(x.data[i]));
}

TEST_CASE("1x1 conv with unit kernels sums channels", "[nn]") {
    Rng rng = Rng::from_seed(3);
    Network net({2, 3, 3}, {Conv2DSpec{2, 1, 1, 1, Activation::Linear}}, rng);
    auto p = net.params();
    p[0] = 1.0; p[1] = 1.0; p[2] = 0.0; // two kernel weights, zero bias
    const Tensor x = random_input({1, 2, 3, 3}, 8);
    const Tensor y = net.forward(x);
    REQUIRE(y.shape == std::vector<std::size_t>{1, 1, 3, 3});
    for (std::size_t i = 0; i < 9; ++i)
        REQUIRE(y.data[i] == Approx(x.data[i] + x.data[9 + i]));
}

TEST_CASE("finite-difference gradient checks per layer type", "[nn]") {
    SECTION("dense relu stack") {
        Rng rng = Rng::from_seed(11);
        Network net({5},
                    {DenseSpec{5, 8, Activation::ReLU},
                     DenseSpec{8, 6, Activation::Tanh},
                     DenseSpec{6, 3, Activation::Linear}},
                    rng);
        check_param_gradients(net, random_input({4, 5}, 21));
    }
    SECTION("conv + flatten + dense") {
        Rng rng = Rng::from_seed(12);
        Network net({3, 6, 6},
                    {Conv2DSpec{3, 4, 3, 1, Activation::ReLU},
                     Conv2DSpec{4, 5, 3, 1, Activation::ReLU}, FlattenSpec{},
                     DenseSpec{5 * 2 * 2, 4, Activation::Linear}},
                    rng);
        check_param_gradients(net, random_input({2, 3, 6, 6}, 22));
    }
    SECTION("strided conv") {
        Rng rng = Rng::from_seed(13);
        Network net({2, 5, 5}, {Conv2DSpec{2, 3, 3, 2, Activation::Tanh}}, rng);
        check_param_gradients(net, random_input({3, 2, 5, 5}, 23));
    }
}

TEST_CASE("input gradients match finite differences", "[nn]") {
    Rng rng = Rng::from_seed(14);
    Network net({4}, {DenseSpec{4, 6, Activation::Tanh}, DenseSpec{6, 2, Activation::Linear}},
                rng);
    Tensor x = random_input({2, 4}, 31);
    ForwardCache cache;
    const Tensor y = net.forward(x, &cache);
    std::vector<double> coeffs(y.data.size());
    Rng crng = Rng::from_seed(32);
    for (double &c : coeffs) c = crng.uniform(-1.0, 1.0);
    Tensor dy = y;
    dy.data = coeffs;
    std::vector<double> grads(net.n_params(), 0.0);
    const Tensor dx = net.backward(cache, dy, grads);

    const double eps = 1e-5;
    for (std::size_t i = 0; i < x.data.size(); ++i) {
        const double saved = x.data[i];
        x.data[i] = saved + eps;
        const double plus = probe_loss(net, x, coeffs);
        x.data[i] = saved - eps;
        const double minus = probe_loss(net, x, coeffs);
        x.data[i] = saved;
        REQUIRE(dx.data[i] == Approx((plus - minus) / (2.0 * eps)).margin(1e-6));
    }
}

TEST_CASE("backward edge cases", "[nn]") {
    Rng rng = Rng::from_seed(15);
    Network net({3}, {DenseSpec{3, 2, Activation::Linear}}, rng);
    const Tensor x = random_input({2, 3}, 41);
    ForwardCache cache;
    const Tensor y = net.forward(x, &cache);

    SECTION("zero output gradient gives zero parameter gradients") {
        Tensor dy = y;
        std::fill(dy.data.begin(), dy.data.end(), 0.0);
        std::vector<double> grads(net.n_params(), 0.0);
        net.backward(cache, dy, grads);
        for (double g : grads) REQUIRE(g == 0.0);
    }
    SECTION("linear layer weight gradient is outer(input, output_grad)") {
        Tensor dy = y;
        std::fill(dy.data.begin(), dy.data.end(), 0.0);
        dy.data[0] = 1.0; // dL/dy for sample 0, output 0
        std::vector<double> grads(net.n_params(), 0.0);
        net.backward(cache, dy, grads);
        for (std::size_t j = 0; j < 3; ++j)
            REQUIRE(grads[j] == Approx(x.data[j])); // row 0 of W gets sample-0 input
        for (std::size_t j = 3; j < 6; ++j)
            REQUIRE(grads[j] == 0.0);
    }
}

TEST_CASE("determinism: same seed gives identical nets and passes", "[nn]") {
    Rng a = Rng::from_seed(77), b = Rng::from_seed(77);
    Network na({4}, {DenseSpec{4, 4, Activation::ReLU}}, a);
    Network nb({4}, {DenseSpec{4, 4, Activation::ReLU}}, b);
    const Tensor x = random_input({3, 4}, 51);
    const Tensor ya = na.forward(x);
    const Tensor yb = nb.forward(x);
    REQUIRE(std::equal(ya.data.begin(), ya.data.end(), yb.data.begin()));
}

TEST_CASE("adam optimizer", "[nn]") {
    SECTION("zero gradient leaves parameters unchanged") {
        AdamState state(3, 0.01);
        std::vector<double> params{1.0, -2.0, 0.5};
        const std::vector<double> before = params;
        adam_update(state, params, std::vector<double>{0.0, 0.0, 0.0});
        REQUIRE(params == before);
    }
    SECTION("first step with g = 1 moves by about lr") {
        AdamState state(1, 0.01);
        std::vector<double> params{1.0};
        adam_update(state, params, std::vector<double>{1.0});
        REQUIRE(params[0] == Approx(1.0 - 0.01).epsilon(1e-6));
    }
    SECTION("constant positive gradient decreases monotonically") {
        AdamState state(1, 0.01);
        std::vector<double> params{0.3};
        double prev = params[0];
        for (int i = 0; i < 5; ++i) {
            adam_update(state, params, std::vector<double>{0.7});
            REQUIRE(params[0] < prev);
            prev = params[0];
        }
    }
    SECTION("per-coordinate step magnitude is bounded by about lr") {
        AdamState state(2, 0.05);
        std::vector<double> params{0.0, 0.0};
        Rng rng = Rng::from_seed(5);
        for (int i = 0; i < 200; ++i) {
            std::vector<double> prev = params;
            adam_update(state, params,
                        std::vector<double>{rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)});
            for (std::size_t j = 0; j < 2; ++j)
                REQUIRE(std::abs(params[j] - prev[j]) <= 0.05 * 1.2);
        }
    }
}

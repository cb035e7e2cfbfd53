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

/**
 * @file
 * Minimal neural-network core: batch-first tensors, dense and 2-D
 * convolution layers, reverse-mode gradients, and the Adam optimizer.
 * Dense-layer products are delegated to Eigen; everything else is explicit.
 */

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <numeric>
#include <span>
#include <stdexcept>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "qvcopt/rng.hpp"

namespace qvcopt {

/// Row-major dense array with a shape. The first dimension is the batch for
/// anything flowing through a Network.
struct Tensor {
    std::vector<std::size_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<std::size_t> s)
        : shape(std::move(s)),
          data(std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                               std::multiplies<>()),
               0.0) {}
    Tensor(std::vector<std::size_t> s, std::vector<double> d)
        : shape(std::move(s)), data(std::move(d)) {
        if (data.size() != std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                                           std::multiplies<>()))
            throw std::invalid_argument("tensor: data length does not match shape");
    }

    std::size_t size() const { return data.size(); }
    std::size_t batch() const { return shape.empty() ? 0 : shape[0]; }

    /// Elements per batch row.
    std::size_t row_size() const { return shape.empty() ? 0 : size() / shape[0]; }
};

enum class Activation { Linear, ReLU, Tanh };

struct DenseSpec {
    std::size_t in = 0, out = 0;
    Activation act = Activation::Linear;
};

struct Conv2DSpec {
    std::size_t in_ch = 0, out_ch = 0, kernel = 0, stride = 1;
    Activation act = Activation::ReLU;
};

struct FlattenSpec {};

using LayerSpec = std::variant<DenseSpec, Conv2DSpec, FlattenSpec>;

namespace detail {

using RowMat =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<RowMat>;
using CMapMat = Eigen::Map<const RowMat>;

inline void apply_activation(Activation act, std::span<double> v) {
    switch (act) {
    case Activation::Linear: break;
    case Activation::ReLU:
        for (double &x : v) x = x > 0.0 ? x : 0.0;
        break;
    case Activation::Tanh:
        for (double &x : v) x = std::tanh(x);
        break;
    }
}

/// d(activation)/d(pre-activation), written in terms of the output value.
inline double activation_slope(Activation act, double y) {
    switch (act) {
    case Activation::Linear: return 1.0;
    case Activation::ReLU: return y > 0.0 ? 1.0 : 0.0;
    case Activation::Tanh: return 1.0 - y * y;
    }
    return 1.0;
}

} // namespace detail

/// Intermediate activations kept from a forward pass for the backward pass.
struct ForwardCache {
    std::vector<Tensor> activations; // input plus every layer output
};

/**
 * Sequential network over a fixed layer alphabet. All parameters live in one
 * flat vector (per layer: weights then biases), which keeps Adam, Polyak
 * averaging, and checkpointing as flat-array operations.
 */
class Network {
  public:
    Network() = default;

    Network(std::vector<std::size_t> input_shape, std::vector<LayerSpec> layers,
            Rng &init_rng)
        : input_shape_(std::move(input_shape)), layers_(std::move(layers)) {
        std::vector<std::size_t> shape = input_shape_;
        for (const auto &spec : layers_) {
            offsets_.push_back(params_.size());
            if (const auto *d = std::get_if<DenseSpec>(&spec)) {
                if (shape.size() != 1 || shape[0] != d->in)
                    throw std::invalid_argument("network: dense input shape mismatch");
                append_uniform(params_, d->in * d->out, limit(d->in, d->out), init_rng);
                params_.resize(params_.size() + d->out, 0.0); // zero biases
                shape = {d->out};
            } else if (const auto *c = std::get_if<Conv2DSpec>(&spec)) {
                if (shape.size() != 3 || shape[0] != c->in_ch)
                    throw std::invalid_argument("network: conv input shape mismatch");
                const std::size_t k = c->kernel;
                if (shape[1] < k || shape[2] < k)
                    throw std::invalid_argument("network: conv kernel exceeds input");
                const std::size_t fan_in = c->in_ch * k * k;
                const std::size_t fan_out = c->out_ch * k * k;
                append_uniform(params_, c->out_ch * fan_in, limit(fan_in, fan_out),
                               init_rng);
                params_.resize(params_.size() + c->out_ch, 0.0);
                shape = {c->out_ch, (shape[1] - k) / c->stride + 1,
                         (shape[2] - k) / c->stride + 1};
            } else {
                shape = {std::accumulate(shape.begin(), shape.end(), std::size_t{1},
                                         std::multiplies<>())};
            }
        }
        output_shape_ = shape;
    }

    const std::vector<LayerSpec> &layers() const { return layers_; }
    const std::vector<std::size_t> &input_shape() const { return input_shape_; }
    const std::vector<std::size_t> &output_shape() const { return output_shape_; }
    std::size_t n_params() const { return params_.size(); }
    std::span<double> params() { return params_; }
    std::span<const double> params() const { return params_; }

    Tensor forward(const Tensor &x, ForwardCache *cache = nullptr) const {
        check_input(x);
        if (cache) {
            cache->activations.clear();
            cache->activations.push_back(x);
        }
        Tensor cur = x;
        for (std::size_t li = 0; li < layers_.size(); ++li) {
            cur = forward_layer(li, cur);
            if (cache) cache->activations.push_back(cur);
        }
        return cur;
    }

    /**
     * Reverse pass. `grad_out` is dL/d(output) for the cached batch; parameter
     * gradients are accumulated into `grads` (length n_params()) and dL/d(input)
     * is returned.
     */
    Tensor backward(const ForwardCache &cache, const Tensor &grad_out,
                    std::span<double> grads) const {
        if (grads.size() != params_.size())
            throw std::invalid_argument("backward: gradient buffer size mismatch");
        if (cache.activations.size() != layers_.size() + 1)
            throw std::logic_error("backward: stale forward cache");
        Tensor grad = grad_out;
        for (std::size_t li = layers_.size(); li-- > 0;)
            grad = backward_layer(li, cache.activations[li],
                                  cache.activations[li + 1], grad, grads);
        return grad;
    }

  private:
    static double limit(std::size_t fan_in, std::size_t fan_out) {
        return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    }

    static void append_uniform(std::vector<double> &v, std::size_t count,
                               double bound, Rng &rng) {
        for (std::size_t i = 0; i < count; ++i)
            v.push_back(rng.uniform(-bound, bound));
    }

    void check_input(const Tensor &x) const {
        if (x.shape.size() != input_shape_.size() + 1 ||
            !std::equal(input_shape_.begin(), input_shape_.end(),
                        x.shape.begin() + 1))
            throw std::invalid_argument("network: input shape mismatch");
    }

    Tensor forward_layer(std::size_t li, const Tensor &x) const {
        const std::size_t B = x.batch();
        const LayerSpec &spec = layers_[li];
        if (const auto *d = std::get_if<DenseSpec>(&spec)) {
            Tensor y({B, d->out});
            detail::CMapMat X(x.data.data(), static_cast<Eigen::Index>(B),
                              static_cast<Eigen::Index>(d->in));
            detail::CMapMat W(params_.data() + offsets_[li],
                              static_cast<Eigen::Index>(d->out),
                              static_cast<Eigen::Index>(d->in));
            Eigen::Map<const Eigen::VectorXd> b(
                params_.data() + offsets_[li] + d->in * d->out,
                static_cast<Eigen::Index>(d->out));
            detail::MapMat Y(y.data.data(), static_cast<Eigen::Index>(B),
                             static_cast<Eigen::Index>(d->out));
            Y.noalias() = X * W.transpose();
            Y.rowwise() += b.transpose();
            detail::apply_activation(d->act, y.data);
            return y;
        }
        if (const auto *c = std::get_if<Conv2DSpec>(&spec)) {
            return conv_forward(*c, offsets_[li], x);
        }
        // Flatten
        Tensor y = x;
        y.shape = {B, x.row_size()};
        return y;
    }

    Tensor conv_forward(const Conv2DSpec &c, std::size_t off, const Tensor &x) const {
        const std::size_t B = x.batch();
        const std::size_t H = x.shape[2], W = x.shape[3];
        const std::size_t K = c.kernel, S = c.stride;
        const std::size_t OH = (H - K) / S + 1, OW = (W - K) / S + 1;
        Tensor y({B, c.out_ch, OH, OW});
        const double *weights = params_.data() + off;
        const double *bias = weights + c.out_ch * c.in_ch * K * K;
        for (std::size_t b = 0; b < B; ++b) {
            const double *xb = x.data.data() + b * x.row_size();
            double *yb = y.data.data() + b * y.row_size();
            for (std::size_t oc = 0; oc < c.out_ch; ++oc) {
                const double *w_oc = weights + oc * c.in_ch * K * K;
                for (std::size_t oy = 0; oy < OH; ++oy)
                    for (std::size_t ox = 0; ox < OW; ++ox) {
                        double acc = bias[oc];
                        for (std::size_t ic = 0; ic < c.in_ch; ++ic) {
                            const double *plane = xb + ic * H * W;
                            const double *w_ic = w_oc + ic * K * K;
                            for (std::size_t ky = 0; ky < K; ++ky)
                                for (std::size_t kx = 0; kx < K; ++kx)
                                    acc += w_ic[ky * K + kx] *
                                           plane[(oy * S + ky) * W + (ox * S + kx)];
                        }
                        yb[oc * OH * OW + oy * OW + ox] = acc;
                    }
            }
        }
        detail::apply_activation(c.act, y.data);
        return y;
    }

    Tensor backward_layer(std::size_t li, const Tensor &x, const Tensor &y,
                          const Tensor &grad_out, std::span<double> grads) const {
        const std::size_t B = x.batch();
        const LayerSpec &spec = layers_[li];
        if (const auto *d = std::get_if<DenseSpec>(&spec)) {
            Tensor dz = grad_out; // dL/d(pre-activation)
            for (std::size_t i = 0; i < dz.data.size(); ++i)
                dz.data[i] *= detail::activation_slope(d->act, y.data[i]);
            detail::CMapMat X(x.data.data(), static_cast<Eigen::Index>(B),
                              static_cast<Eigen::Index>(d->in));
            detail::CMapMat dZ(dz.data.data(), static_cast<Eigen::Index>(B),
                               static_cast<Eigen::Index>(d->out));
            detail::CMapMat W(params_.data() + offsets_[li],
                              static_cast<Eigen::Index>(d->out),
                              static_cast<Eigen::Index>(d->in));
            detail::MapMat dW(grads.data() + offsets_[li],
                              static_cast<Eigen::Index>(d->out),
                              static_cast<Eigen::Index>(d->in));
            Eigen::Map<Eigen::VectorXd> db(grads.data() + offsets_[li] + d->in * d->out,
                                           static_cast<Eigen::Index>(d->out));
            dW.noalias() += dZ.transpose() * X;
            db.noalias() += dZ.colwise().sum().transpose();
            Tensor dx({B, d->in});
            detail::MapMat dX(dx.data.data(), static_cast<Eigen::Index>(B),
                              static_cast<Eigen::Index>(d->in));
            dX.noalias() = dZ * W;
            return dx;
        }
        if (const auto *c = std::get_if<Conv2DSpec>(&spec)) {
            return conv_backward(*c, offsets_[li], x, y, grad_out, grads);
        }
        Tensor dx = grad_out;
        dx.shape = x.shape;
        return dx;
    }

    Tensor conv_backward(const Conv2DSpec &c, std::size_t off, const Tensor &x,
                         const Tensor &y, const Tensor &grad_out,
                         std::span<double> grads) const {
        const std::size_t B = x.batch();
        const std::size_t H = x.shape[2], W = x.shape[3];
        const std::size_t K = c.kernel, S = c.stride;
        const std::size_t OH = (H - K) / S + 1, OW = (W - K) / S + 1;
        Tensor dz = grad_out;
        for (std::size_t i = 0; i < dz.data.size(); ++i)
            dz.data[i] *= detail::activation_slope(c.act, y.data[i]);
        Tensor dx({B, c.in_ch, H, W});
        const double *weights = params_.data() + off;
        double *dw = grads.data() + off;
        double *db = dw + c.out_ch * c.in_ch * K * K;
        for (std::size_t b = 0; b < B; ++b) {
            const double *xb = x.data.data() + b * x.row_size();
            const double *dzb = dz.data.data() + b * dz.row_size();
            double *dxb = dx.data.data() + b * dx.row_size();
            for (std::size_t oc = 0; oc < c.out_ch; ++oc) {
                const double *w_oc = weights + oc * c.in_ch * K * K;
                double *dw_oc = dw + oc * c.in_ch * K * K;
                for (std::size_t oy = 0; oy < OH; ++oy)
                    for (std::size_t ox = 0; ox < OW; ++ox) {
                        const double g = dzb[oc * OH * OW + oy * OW + ox];
                        db[oc] += g;
                        for (std::size_t ic = 0; ic < c.in_ch; ++ic) {
                            const double *plane = xb + ic * H * W;
                            double *dplane = dxb + ic * H * W;
                            const double *w_ic = w_oc + ic * K * K;
                            double *dw_ic = dw_oc + ic * K * K;
                            for (std::size_t ky = 0; ky < K; ++ky)
                                for (std::size_t kx = 0; kx < K; ++kx) {
                                    const std::size_t px = (oy * S + ky) * W + (ox * S + kx);
                                    dw_ic[ky * K + kx] += g * plane[px];
                                    dplane[px] += g * w_ic[ky * K + kx];
                                }
                        }
                    }
            }
        }
        return dx;
    }

    std::vector<std::size_t> input_shape_;
    std::vector<std::size_t> output_shape_;
    std::vector<LayerSpec> layers_;
    std::vector<std::size_t> offsets_;
    std::vector<double> params_;
};

/**
 * Adam with bias-corrected first and second moments (step counts from 1).
 */
struct AdamState {
    std::size_t step = 0;
    std::vector<double> m, v;
    double lr = 3e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;

    explicit AdamState(std::size_t n = 0, double learning_rate = 3e-4)
        : m(n, 0.0), v(n, 0.0), lr(learning_rate) {}
};

inline void adam_update(AdamState &state, std::span<double> params,
                        std::span<const double> grads) {
    if (params.size() != state.m.size() || grads.size() != state.m.size())
        throw std::invalid_argument("adam_update: size mismatch");
    ++state.step;
    const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
        state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        params[i] -= state.lr * m_hat / (std::sqrt(v_hat) + state.eps);
    }
}

} // namespace qvcopt

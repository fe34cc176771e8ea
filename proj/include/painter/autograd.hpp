// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <vector>

#include "painter/tensor.hpp"

namespace painter::nn {

namespace detail {
struct Node;
}

/// Handle to a value in a reverse-mode autodiff graph.
///
/// Graphs are built eagerly by the free functions below and released when
/// the last handle goes away. A graph is single-threaded; independent graphs
/// may be built concurrently.
class Var {
public:
    Var() = default;

    const Tensor& value() const;
    /// Gradient accumulated by backward(); zero-shaped when none reached this node.
    const Tensor& grad() const;
    bool requires_grad() const;
    const Shape& shape() const { return value().shape(); }

    explicit operator bool() const { return static_cast<bool>(m_node); }

private:
    friend struct VarAccess;
    explicit Var(std::shared_ptr<detail::Node> node) : m_node(std::move(node)) {}
    std::shared_ptr<detail::Node> m_node;
};

Var constant(Tensor value);
Var parameter(Tensor value);

/// Backpropagates from a single-element `loss`.
void backward(const Var& loss);

// For ops whose backward is written by hand elsewhere: `grads` receives the
// upstream gradient and returns one gradient per input (empty tensor = none).
using BackwardFn = std::function<std::vector<Tensor>(const Tensor& upstream)>;
Var custom_op(std::vector<Var> inputs, Tensor value, BackwardFn grads);

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var scale(const Var& a, double factor);
Var silu(const Var& a);
Var reshape(const Var& a, Shape shape);

/// Adds bias[c] to every element of channel c; `a` is C×...
Var add_channel_bias(const Var& a, const Var& bias);

/// Same-padded 2-D convolution. x: C×H×W, weight: O×C×k×k (k odd), bias: O.
Var conv2d(const Var& x, const Var& weight, const Var& bias);

Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var softmax_rows(const Var& a);
Var slice_rows(const Var& a, std::size_t start, std::size_t count);
Var concat_rows(const std::vector<Var>& parts);

/// Elementwise mean of same-shaped values.
Var mean_of(const std::vector<Var>& parts);

/// 2×2 average pooling / nearest 2× upsampling on C×H×W.
Var avg_pool2(const Var& x);
Var upsample2(const Var& x);

/// Mean squared difference, a 1-element tensor.
Var mse(const Var& a, const Var& b);

}  // namespace painter::nn

// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#include "painter/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "painter/errors.hpp"

namespace painter::nn {

std::size_t shape_numel(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string shape_string(const Shape& shape) {
    std::string out = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        out += (i ? "x" : "") + std::to_string(shape[i]);
    }
    return out + "]";
}

Tensor::Tensor(Shape shape, double fill) : m_shape(std::move(shape)), m_values(shape_numel(m_shape), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> values) : m_shape(std::move(shape)), m_values(std::move(values)) {
    if (m_values.size() != shape_numel(m_shape)) {
        throw ShapeError("tensor data does not match shape " + shape_string(m_shape));
    }
}

Tensor Tensor::reshaped(Shape shape) const {
    if (shape_numel(shape) != numel()) {
        throw ShapeError("cannot reshape " + shape_string(m_shape) + " to " + shape_string(shape));
    }
    return Tensor(std::move(shape), m_values);
}

Tensor Tensor::randn(Shape shape, std::mt19937_64& rng, double stddev) {
    Tensor out(std::move(shape));
    std::normal_distribution<double> normal(0.0, stddev);
    for (auto& v : out.m_values) {
        v = normal(rng);
    }
    return out;
}

double max_abs_diff(const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) {
        throw ShapeError("shape mismatch " + shape_string(a.shape()) + " vs " + shape_string(b.shape()));
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < a.numel(); ++i) {
        worst = std::max(worst, std::abs(a[i] - b[i]));
    }
    return worst;
}

}  // namespace painter::nn

// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <random>
#include <string>
#include <vector>

namespace painter::nn {

using Shape = std::vector<std::size_t>;

/// Dense row-major fp64 array.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, double fill = 0.0);
    Tensor(Shape shape, std::vector<double> values);

    const Shape& shape() const { return m_shape; }
    std::size_t rank() const { return m_shape.size(); }
    std::size_t dim(std::size_t i) const { return m_shape.at(i); }
    std::size_t numel() const { return m_values.size(); }

    double* data() { return m_values.data(); }
    const double* data() const { return m_values.data(); }
    std::vector<double>& values() { return m_values; }
    const std::vector<double>& values() const { return m_values; }

    double& operator[](std::size_t i) { return m_values[i]; }
    double operator[](std::size_t i) const { return m_values[i]; }

    Tensor reshaped(Shape shape) const;
    bool same_shape(const Tensor& other) const { return m_shape == other.m_shape; }

    static Tensor randn(Shape shape, std::mt19937_64& rng, double stddev = 1.0);

    bool operator==(const Tensor&) const = default;

private:
    Shape m_shape;
    std::vector<double> m_values;
};

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

double max_abs_diff(const Tensor& a, const Tensor& b);

}  // namespace painter::nn

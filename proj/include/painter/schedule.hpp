// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

#include "painter/tensor.hpp"

namespace painter::trainer {

/// Forward-process coefficients for t = 1..T with z_t = alpha_t z_0 + sigma_t eps.
class NoiseSchedule {
public:
    /// Variance-preserving schedule from betas spaced linearly in sqrt space
    /// (the Stable Diffusion "scaled_linear" family).
    static NoiseSchedule scaled_linear(std::size_t steps, double beta_start = 0.00085, double beta_end = 0.012);

    /// Validates lengths, nonnegativity and monotonicity.
    static NoiseSchedule from_coefficients(std::vector<double> alpha, std::vector<double> sigma);

    std::size_t steps() const { return m_alpha.size(); }
    double alpha(std::size_t t) const;
    double sigma(std::size_t t) const;

private:
    NoiseSchedule(std::vector<double> alpha, std::vector<double> sigma);
    std::vector<double> m_alpha;
    std::vector<double> m_sigma;
};

/// alpha_t·z0 + sigma_t·eps. Throws RangeError unless 1 <= t <= T.
nn::Tensor add_noise(const nn::Tensor& z0, std::size_t t, const nn::Tensor& eps, const NoiseSchedule& schedule);

/// Descending sampler timesteps: ceil((steps - k)·T / steps) for k = 0..steps-1.
std::vector<std::size_t> sampling_timesteps(std::size_t total, std::size_t steps);

}  // namespace painter::trainer

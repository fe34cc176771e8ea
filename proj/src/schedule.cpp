// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#include "painter/schedule.hpp"

#include <cmath>
#include <string>

#include "painter/errors.hpp"

namespace painter::trainer {

NoiseSchedule::NoiseSchedule(std::vector<double> alpha, std::vector<double> sigma)
    : m_alpha(std::move(alpha)), m_sigma(std::move(sigma)) {}

NoiseSchedule NoiseSchedule::scaled_linear(std::size_t steps, double beta_start, double beta_end) {
    if (steps == 0) {
        throw DomainError("schedule needs at least one step");
    }
    std::vector<double> alpha(steps);
    std::vector<double> sigma(steps);
    const double lo = std::sqrt(beta_start);
    const double hi = std::sqrt(beta_end);
    double alpha_bar = 1.0;
    for (std::size_t i = 0; i < steps; ++i) {
        const double frac = steps == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(steps - 1);
        const double root = lo + (hi - lo) * frac;
        alpha_bar *= 1.0 - root * root;
        alpha[i] = std::sqrt(alpha_bar);
        sigma[i] = std::sqrt(1.0 - alpha_bar);
    }
    return from_coefficients(std::move(alpha), std::move(sigma));
}

NoiseSchedule NoiseSchedule::from_coefficients(std::vector<double> alpha, std::vector<double> sigma) {
    if (alpha.empty() || alpha.size() != sigma.size()) {
        throw DomainError("schedule coefficient sequences must be nonempty and of equal length");
    }
    for (std::size_t i = 0; i < alpha.size(); ++i) {
        if (!(alpha[i] >= 0.0) || !(sigma[i] >= 0.0)) {
            throw DomainError("schedule coefficients must be nonnegative");
        }
        if (i > 0 && (alpha[i] > alpha[i - 1] || sigma[i] < sigma[i - 1])) {
            throw DomainError("alpha must decrease and sigma increase with t");
        }
    }
    return NoiseSchedule(std::move(alpha), std::move(sigma));
}

double NoiseSchedule::alpha(std::size_t t) const {
    if (t < 1 || t > m_alpha.size()) {
        throw RangeError("timestep " + std::to_string(t) + " outside [1," + std::to_string(m_alpha.size()) + "]");
    }
    return m_alpha[t - 1];
}

double NoiseSchedule::sigma(std::size_t t) const {
    if (t < 1 || t > m_sigma.size()) {
        throw RangeError("timestep " + std::to_string(t) + " outside [1," + std::to_string(m_sigma.size()) + "]");
    }
    return m_sigma[t - 1];
}

nn::Tensor add_noise(const nn::Tensor& z0, std::size_t t, const nn::Tensor& eps, const NoiseSchedule& schedule) {
    const double a = schedule.alpha(t);
    const double s = schedule.sigma(t);
    if (!z0.same_shape(eps)) {
        throw ShapeError("add_noise: z0 " + nn::shape_string(z0.shape()) + " vs eps " + nn::shape_string(eps.shape()));
    }
    nn::Tensor out(z0.shape());
    for (std::size_t i = 0; i < z0.numel(); ++i) {
        out[i] = a * z0[i] + s * eps[i];
    }
    return out;
}

std::vector<std::size_t> sampling_timesteps(std::size_t total, std::size_t steps) {
    if (steps == 0 || total == 0) {
        throw DomainError("sampling needs at least one step");
    }
    std::vector<std::size_t> out(steps);
    for (std::size_t k = 0; k < steps; ++k) {
        out[k] = ((steps - k) * total + steps - 1) / steps;
    }
    return out;
}

}  // namespace painter::trainer

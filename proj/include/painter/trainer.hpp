// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "painter/losses.hpp"
#include "painter/maskgen.hpp"
#include "painter/model.hpp"

namespace painter::trainer {

struct TrainExample {
    std::string id;
    RgbImage image;
    BinaryMask seg_mask;
    std::string prompt;
};

struct TrainConfig {
    double beta = losses::kDefaultBeta;
    std::size_t steps = 200;
    std::size_t batch = 8;
    double lr = 1e-4;
    std::uint64_t seed = 0;
    maskgen::MaskGenParams mask;
    losses::Reduction reduction = losses::Reduction::mean;
    /// Record branch attention maps and ATAL; required when beta > 0.
    bool capture_attention = true;
    /// Probability of training a sample on the empty prompt. Off by default.
    double prompt_dropout = 0.0;
    /// Draw one batch (masks, t, noise) up front and reuse it every step.
    bool fixed_batch = false;

    /// Throws DomainError for nonpositive counts, negative beta or lr,
    /// dropout outside [0,1], or beta > 0 without capture.
    void validate() const;
};

/// One record turned into a denoising problem.
struct Sample {
    std::string id;
    nn::Tensor noisy;  // z_t
    nn::Tensor eps;
    branch::BranchInput input;
    std::size_t t = 1;
    nn::Tensor context;
    BinaryMask mask;  // training mask, image resolution
    maskgen::MaskKind kind = maskgen::MaskKind::seg;
    std::optional<losses::TokenIndexSet> tokens;  // nullopt when the prompt was dropped
};

/// Samples k and the training mask, encodes image and masked image, draws t
/// and noise. Masked pixels are set to 0 (mid-gray) before encoding.
Sample prepare_sample(const TrainExample& example, const model::PainterModel& model, const TrainConfig& config,
                      maskgen::Rng& rng);

/// One SGD update of branch and tap parameters on the batch mean of
/// diff + beta·atal. The base is never touched. Errors are rethrown with the
/// batch index prepended.
losses::LossBreakdown train_step(model::PainterModel& model, const std::vector<Sample>& batch,
                                 const TrainConfig& config);

struct StepLog {
    std::size_t step = 0;
    losses::LossBreakdown loss;
};

/// {"step":..,"diff":..,"atal":..,"total":..}
std::string to_json_line(const StepLog& log);

using StepCallback = std::function<void(const StepLog&)>;

/// Runs config.steps updates. Batches cycle through a seeded permutation of
/// `data`. Bit-reproducible for a fixed seed.
std::vector<StepLog> train(model::PainterModel& model, const std::vector<TrainExample>& data,
                           const TrainConfig& config, const StepCallback& on_step = {});

}  // namespace painter::trainer

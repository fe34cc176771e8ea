// Copyright (C) 2026 The Painter Authors
// SPDX-License-Identifier: Apache-2.0

#include "painter/trainer.hpp"

#include <algorithm>
#include <json.hpp>
#include <numeric>

#include "painter/errors.hpp"

namespace painter::trainer {

namespace {

template <typename E>
[[noreturn]] void rethrow_tagged(const E& e, std::size_t index, const std::string& id) {
    throw E("batch item " + std::to_string(index) + " (" + id + "): " + e.what());
}

nn::Var sum_of(const std::vector<nn::Var>& parts) {
    nn::Var acc = parts.front();
    for (std::size_t i = 1; i < parts.size(); ++i) {
        acc = nn::add(acc, parts[i]);
    }
    return acc;
}

void sgd(branch::ParamSet& params, const branch::VarMap& vars, double lr) {
    for (auto& [name, tensor] : params) {
        const nn::Tensor& grad = vars.at(name).grad();
        if (grad.numel() == 0) {
            continue;
        }
        for (std::size_t i = 0; i < tensor.numel(); ++i) {
            tensor[i] -= lr * grad[i];
        }
    }
}

}  // namespace

void TrainConfig::validate() const {
    if (steps == 0 || batch == 0) {
        throw DomainError("steps and batch must be positive");
    }
    if (!(beta >= 0.0)) {
        throw DomainError("beta must be nonnegative");
    }
    if (!(lr >= 0.0)) {
        throw DomainError("learning rate must be nonnegative");
    }
    if (!(prompt_dropout >= 0.0 && prompt_dropout <= 1.0)) {
        throw DomainError("prompt dropout must lie in [0,1]");
    }
    if (beta > 0.0 && !capture_attention) {
        throw DomainError("beta > 0 needs attention capture");
    }
    mask.validate();
}

Sample prepare_sample(const TrainExample& example, const model::PainterModel& model, const TrainConfig& config,
                      maskgen::Rng& rng) {
    if (example.image.height() != model.image_height() || example.image.width() != model.image_width()) {
        throw ShapeError("image " + std::to_string(example.image.height()) + "x" + std::to_string(example.image.width()) +
                         " does not match model input " + std::to_string(model.image_height()) + "x" +
                         std::to_string(model.image_width()));
    }
    if (example.seg_mask.height() != example.image.height() || example.seg_mask.width() != example.image.width()) {
        throw ShapeError("segmentation mask and image differ in size");
    }
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Sample s;
    s.id = example.id;
    const auto sampled = maskgen::sample_mask(example.seg_mask, unit(rng), config.mask, rng);
    s.mask = sampled.mask;
    s.kind = sampled.kind;

    const nn::Tensor image = adapters::image_to_tensor(example.image);
    nn::Tensor masked = image;
    const std::size_t plane = s.mask.size();
    for (std::size_t p = 0; p < plane; ++p) {
        if (s.mask.pixels()[p]) {
            for (std::size_t c = 0; c < 3; ++c) {
                masked[c * plane + p] = 0.0;
            }
        }
    }
    const nn::Tensor z0 = model.codec().encode(image);
    const nn::Tensor z0m = model.codec().encode(masked);
    const auto latent_mask = maskgen::resize_mask(s.mask, z0.dim(1), z0.dim(2));

    std::uniform_int_distribution<std::size_t> pick_t(1, model.schedule().steps());
    s.t = pick_t(rng);
    s.eps = nn::Tensor::randn(z0.shape(), rng);
    s.noisy = add_noise(z0, s.t, s.eps, model.schedule());
    s.input = branch::BranchInput::make(s.noisy, z0m, latent_mask);

    const bool dropped = config.prompt_dropout > 0.0 && unit(rng) < config.prompt_dropout;
    const auto tokens = model.text_encoder().tokenizer().tokenize(dropped ? "" : example.prompt);
    s.context = model.text_encoder().encode(tokens);
    if (!dropped) {
        s.tokens = losses::actual_token_indices(tokens);
    }
    return s;
}

losses::LossBreakdown train_step(model::PainterModel& model, const std::vector<Sample>& batch,
                                 const TrainConfig& config) {
    if (batch.empty()) {
        throw DomainError("empty batch");
    }
    auto& br = model.branch();
    const auto vars = branch::make_vars(br, true);
    const branch::JointOptions options{1.0, model.config().injection};

    std::vector<nn::Var> diffs;
    std::vector<nn::Var> atals;
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const Sample& s = batch[i];
        try {
            auto out = branch::forward_joint(model.base(), br, vars, s.noisy, s.input, s.t, s.context, options);
            diffs.push_back(nn::mse(out.prediction, nn::constant(s.eps)));
            if (config.capture_attention && s.tokens) {
                atals.push_back(losses::atal_loss_var(out.branch_maps, *s.tokens, s.mask, config.reduction));
            }
        } catch (const ShapeError& e) {
            rethrow_tagged(e, i, s.id);
        } catch (const EmptyPromptError& e) {
            rethrow_tagged(e, i, s.id);
        } catch (const RangeError& e) {
            rethrow_tagged(e, i, s.id);
        }
    }

    const nn::Var diff = nn::scale(sum_of(diffs), 1.0 / static_cast<double>(diffs.size()));
    nn::Var objective = diff;
    double atal_value = 0.0;
    if (!atals.empty()) {
        const nn::Var atal = nn::scale(sum_of(atals), 1.0 / static_cast<double>(atals.size()));
        atal_value = atal.value()[0];
        // With beta = 0 the ATAL node stays out of the objective entirely.
        if (config.beta > 0.0) {
            objective = nn::add(objective, nn::scale(atal, config.beta));
        }
    }
    nn::backward(objective);
    if (config.lr > 0.0) {
        sgd(br.params, vars.branch, config.lr);
        sgd(br.tap_params, vars.taps, config.lr);
    }
    return losses::total_loss(diff.value()[0], atal_value, config.beta);
}

std::string to_json_line(const StepLog& log) {
    const nlohmann::ordered_json j = {
        {"step", log.step}, {"diff", log.loss.diff}, {"atal", log.loss.atal}, {"total", log.loss.total}};
    return j.dump();
}

std::vector<StepLog> train(model::PainterModel& model, const std::vector<TrainExample>& data,
                           const TrainConfig& config, const StepCallback& on_step) {
    config.validate();
    if (data.empty()) {
        throw DomainError("training set is empty");
    }
    maskgen::Rng rng(config.seed);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::size_t cursor = order.size();

    auto next_batch = [&] {
        std::vector<Sample> batch;
        for (std::size_t b = 0; b < config.batch; ++b) {
            if (cursor == order.size()) {
                std::shuffle(order.begin(), order.end(), rng);
                cursor = 0;
            }
            batch.push_back(prepare_sample(data[order[cursor++]], model, config, rng));
        }
        return batch;
    };

    std::vector<StepLog> logs;
    std::vector<Sample> fixed;
    if (config.fixed_batch) {
        fixed = next_batch();
    }
    for (std::size_t step = 0; step < config.steps; ++step) {
        const auto loss = config.fixed_batch ? train_step(model, fixed, config) : train_step(model, next_batch(), config);
        logs.push_back({step, loss});
        if (on_step) {
            on_step(logs.back());
        }
    }
    return logs;
}

}  // namespace painter::trainer

// Copyright 2026 The sdgmap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "sdgmap/regressor.hpp"

#include <cmath>

#include "sdgmap/rng.hpp"

namespace sdgmap::regress {

void RegressionBatch::validate() const {
    if (n < 1) throw ConfigError("regression batch must hold at least one row");
    if (dim < 1) throw ConfigError("regression batch feature dimension must be >= 1");
    if (features.size() != n * dim) {
        throw ConfigError("feature matrix size does not match n x dim");
    }
    if (targets.size() != n * kNumSdgs) {
        throw ConfigError("target matrix size does not match n x 17");
    }
    for (double v : features) {
        if (!std::isfinite(v)) throw ConfigError("features must be finite");
    }
    for (double v : targets) {
        if (!std::isfinite(v) || v < 0.0) {
            throw ConfigError("targets must be finite and non-negative");
        }
    }
}

ClassWeights ClassWeights::uniform() {
    ClassWeights weights;
    weights.w.fill(1.0);
    return weights;
}

ClassWeights ClassWeights::inverse_frequency(std::span<const SdgVector> silver) {
    // f_j = number of vectors with component j > 0, floored at 1 so rare
    // classes stay finite.
    std::array<double, kNumSdgs> freq{};
    for (const SdgVector& vector : silver) {
        for (std::size_t j = 0; j < static_cast<std::size_t>(kNumSdgs); ++j) {
            if (vector[j] > 0.0) freq[j] += 1.0;
        }
    }
    double total = 0.0;
    for (double& f : freq) {
        f = std::max(f, 1.0);
        total += f;
    }
    ClassWeights weights;
    for (std::size_t j = 0; j < static_cast<std::size_t>(kNumSdgs); ++j) {
        weights.w[j] = total / (static_cast<double>(kNumSdgs) * freq[j]);
    }
    return weights;
}

void ClassWeights::validate() const {
    for (double v : w) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ConfigError("class weights must be positive and finite");
        }
    }
}

LinearModel LinearModel::zeros(std::size_t dim) {
    LinearModel model;
    model.dim = dim;
    model.weights.assign(dim * kNumSdgs, 0.0);
    return model;
}

std::array<double, kNumSdgs> forward(const LinearModel& model, std::span<const double> x) {
    if (x.size() != model.dim) {
        throw ConfigError("forward: feature dimension mismatch");
    }
    std::array<double, kNumSdgs> out = model.bias;
    for (std::size_t f = 0; f < model.dim; ++f) {
        const double xf = x[f];
        const double* row = model.weights.data() + f * kNumSdgs;
        for (std::size_t j = 0; j < static_cast<std::size_t>(kNumSdgs); ++j) {
            out[j] += xf * row[j];
        }
    }
    for (double& v : out) v = std::max(v, 0.0);
    return out;
}

double loss(std::span<const double> pred, std::span<const double> target, std::size_t n,
            const std::optional<ClassWeights>& weights) {
    if (n == 0 || pred.size() != target.size() || pred.size() != n * kNumSdgs) {
        throw ConfigError("loss: prediction/target shape mismatch");
    }
    if (weights) weights->validate();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < static_cast<std::size_t>(kNumSdgs); ++j) {
            double diff = pred[i * kNumSdgs + j] - target[i * kNumSdgs + j];
            double sq = diff * diff;
            if (weights) sq *= weights->w[j];
            total += sq;
        }
    }
    return total / static_cast<double>(n);
}

namespace {

/// Predictions plus the clamp mask (pre-activation > 0).
struct ForwardPass {
    std::vector<double> pred;    // n x 17
    std::vector<bool> active;    // n x 17
};

ForwardPass run_forward(const LinearModel& model, const RegressionBatch& batch) {
    ForwardPass pass;
    pass.pred.resize(batch.n * kNumSdgs);
    pass.active.resize(batch.n * kNumSdgs);
    for (std::size_t i = 0; i < batch.n; ++i) {
        std::array<double, kNumSdgs> z = model.bias;
        std::span<const double> x = batch.feature_row(i);
        for (std::size_t f = 0; f < model.dim; ++f) {
            const double xf = x[f];
            const double* row = model.weights.data() + f * kNumSdgs;
            for (std::size_t j = 0; j < static_cast<std::size_t>(kNumSdgs); ++j) {
                z[j] += xf * row[j];
            }
        }
        for (std::size_t j = 0; j < static_cast<std::size_t>(kNumSdgs); ++j) {
            pass.active[i * kNumSdgs + j] = z[j] > 0.0;
            pass.pred[i * kNumSdgs + j] = std::max(z[j], 0.0);
        }
    }
    return pass;
}

}  // namespace

double batch_loss(const LinearModel& model, const RegressionBatch& batch,
                  const std::optional<ClassWeights>& weights) {
    batch.validate();
    if (model.dim != batch.dim) throw ConfigError("batch_loss: dimension mismatch");
    ForwardPass pass = run_forward(model, batch);
    return loss(pass.pred, batch.targets, batch.n, weights);
}

Gradients gradient(const LinearModel& model, const RegressionBatch& batch,
                   const std::optional<ClassWeights>& weights) {
    batch.validate();
    if (model.dim != batch.dim) throw ConfigError("gradient: dimension mismatch");
    if (weights) weights->validate();

    ForwardPass pass = run_forward(model, batch);

    Gradients grads;
    grads.dw.assign(model.dim * kNumSdgs, 0.0);

    const double scale = 2.0 / static_cast<double>(batch.n);
    std::array<double, kNumSdgs> g{};
    for (std::size_t i = 0; i < batch.n; ++i) {
        for (std::size_t j = 0; j < static_cast<std::size_t>(kNumSdgs); ++j) {
            std::size_t cell = i * kNumSdgs + j;
            if (!pass.active[cell]) {
                g[j] = 0.0;
                continue;
            }
            double diff = pass.pred[cell] - batch.targets[cell];
            if (weights) diff *= weights->w[j];
            g[j] = scale * diff;
            grads.dbias[j] += g[j];
        }
        std::span<const double> x = batch.feature_row(i);
        for (std::size_t f = 0; f < model.dim; ++f) {
            const double xf = x[f];
            if (xf == 0.0) continue;
            double* row = grads.dw.data() + f * kNumSdgs;
            for (std::size_t j = 0; j < static_cast<std::size_t>(kNumSdgs); ++j) {
                row[j] += xf * g[j];
            }
        }
    }
    return grads;
}

TrainResult train(const RegressionBatch& batch, const TrainConfig& config) {
    batch.validate();
    if (config.epochs < 0) throw ConfigError("epochs must be >= 0");
    if (!(config.learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");

    TrainResult result;
    result.model = LinearModel::zeros(batch.dim);
    Rng rng(config.seed);
    for (double& w : result.model.weights) {
        w = rng.uniform(-config.init_scale, config.init_scale);
    }
    // Bias starts non-negative: with targets >= 0 this keeps most units on
    // the active side of the clamp at the start, which avoids freezing
    // into a dead-unit stationary point.
    for (double& b : result.model.bias) {
        b = rng.uniform(0.0, config.init_scale);
    }

    result.history.reserve(static_cast<std::size_t>(config.epochs));
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        Gradients grads = gradient(result.model, batch, config.weights);
        for (std::size_t k = 0; k < result.model.weights.size(); ++k) {
            result.model.weights[k] -= config.learning_rate * grads.dw[k];
        }
        for (std::size_t j = 0; j < static_cast<std::size_t>(kNumSdgs); ++j) {
            result.model.bias[j] -= config.learning_rate * grads.dbias[j];
        }
        result.history.push_back(batch_loss(result.model, batch, config.weights));
    }
    return result;
}

ErrorReport error_report(const LinearModel& model, const RegressionBatch& batch) {
    batch.validate();
    if (model.dim != batch.dim) throw ConfigError("error_report: dimension mismatch");

    ForwardPass pass = run_forward(model, batch);
    ErrorReport report;
    for (std::size_t i = 0; i < batch.n; ++i) {
        for (std::size_t j = 0; j < static_cast<std::size_t>(kNumSdgs); ++j) {
            double diff = pass.pred[i * kNumSdgs + j] - batch.targets[i * kNumSdgs + j];
            report.mse[j] += diff * diff;
            report.mae[j] += std::abs(diff);
        }
    }
    const double n = static_cast<double>(batch.n);
    for (std::size_t j = 0; j < static_cast<std::size_t>(kNumSdgs); ++j) {
        report.mse[j] /= n;
        report.mae[j] /= n;
        report.overall_mse += report.mse[j];
        report.overall_mae += report.mae[j];
    }
    report.overall_mse /= static_cast<double>(kNumSdgs);
    report.overall_mae /= static_cast<double>(kNumSdgs);
    return report;
}

}  // namespace sdgmap::regress

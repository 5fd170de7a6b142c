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

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sdgmap/types.hpp"

namespace sdgmap::regress {

/// Training data: n feature rows against n soft 17-dimensional targets.
struct RegressionBatch {
    std::size_t n = 0;
    std::size_t dim = 0;
    std::vector<double> features;  // n x dim, row-major
    std::vector<double> targets;   // n x 17, row-major, non-negative

    std::span<const double> feature_row(std::size_t i) const {
        return {features.data() + i * dim, dim};
    }
    std::span<const double> target_row(std::size_t i) const {
        return {targets.data() + i * kNumSdgs, static_cast<std::size_t>(kNumSdgs)};
    }

    void validate() const;
};

/// Per-SDG loss weights, all strictly positive.
struct ClassWeights {
    std::array<double, kNumSdgs> w;

    static ClassWeights uniform();

    /// Inverse-frequency weights from silver vectors: w_j =
    /// (sum_k f_k) / (17 * f_j) with f_j the number of vectors whose
    /// component j is positive, floored at 1.
    static ClassWeights inverse_frequency(std::span<const SdgVector> silver);

    void validate() const;
};

/// Linear head with a non-negativity clamp: prediction =
/// max(0, x W + bias) componentwise.
struct LinearModel {
    std::size_t dim = 0;
    std::vector<double> weights;  // dim x 17, row-major
    std::array<double, kNumSdgs> bias{};

    static LinearModel zeros(std::size_t dim);

    double weight(std::size_t feature, std::size_t output) const {
        return weights[feature * kNumSdgs + output];
    }
    double& weight(std::size_t feature, std::size_t output) {
        return weights[feature * kNumSdgs + output];
    }
};

std::array<double, kNumSdgs> forward(const LinearModel& model, std::span<const double> x);

/// Mean over rows of the per-row sum over the 17 components of squared
/// error; with weights, component j's squared error is multiplied by w_j.
double loss(std::span<const double> pred, std::span<const double> target, std::size_t n,
            const std::optional<ClassWeights>& weights = std::nullopt);

/// Loss of the model on a batch.
double batch_loss(const LinearModel& model, const RegressionBatch& batch,
                  const std::optional<ClassWeights>& weights = std::nullopt);

struct Gradients {
    std::vector<double> dw;  // dim x 17
    std::array<double, kNumSdgs> dbias{};
};

/// Analytic gradient of batch_loss. Components whose pre-activation is
/// <= 0 contribute nothing (subgradient 0 at the clamp kink).
Gradients gradient(const LinearModel& model, const RegressionBatch& batch,
                   const std::optional<ClassWeights>& weights = std::nullopt);

struct TrainConfig {
    double learning_rate = 0.05;
    int epochs = 200;
    std::uint64_t seed = 0;
    std::optional<ClassWeights> weights;
    /// Scale of the seeded uniform weight initialization.
    double init_scale = 0.01;
};

struct TrainResult {
    LinearModel model;
    std::vector<double> history;  // loss after each epoch
};

/// Full-batch gradient descent, deterministic under the seed. With 0
/// epochs the seeded initial model is returned untouched.
TrainResult train(const RegressionBatch& batch, const TrainConfig& config);

/// Per-SDG and overall squared/absolute errors of the model on a batch.
/// Overall values are means over all (row, component) cells, so the
/// per-SDG columns average to them.
struct ErrorReport {
    std::array<double, kNumSdgs> mse{};
    std::array<double, kNumSdgs> mae{};
    double overall_mse = 0.0;
    double overall_mae = 0.0;
};

ErrorReport error_report(const LinearModel& model, const RegressionBatch& batch);

}  // namespace sdgmap::regress

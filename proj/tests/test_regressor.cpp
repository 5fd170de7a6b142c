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

#include <doctest.h>

#include <cmath>

#include "sdgmap/regressor.hpp"
#include "sdgmap/rng.hpp"

using namespace sdgmap;
using namespace sdgmap::regress;

namespace {

RegressionBatch random_batch(Rng& rng, std::size_t n, std::size_t dim) {
    RegressionBatch batch;
    batch.n = n;
    batch.dim = dim;
    batch.features.resize(n * dim);
    batch.targets.resize(n * kNumSdgs);
    for (double& v : batch.features) v = rng.uniform(-1.0, 1.0);
    for (double& v : batch.targets) v = rng.uniform(0.0, 1.0);
    return batch;
}

/// Targets produced by a known clamped-linear model.
RegressionBatch planted_batch(Rng& rng, const LinearModel& truth, std::size_t n) {
    RegressionBatch batch;
    batch.n = n;
    batch.dim = truth.dim;
    batch.features.resize(n * truth.dim);
    for (double& v : batch.features) v = rng.uniform(-1.0, 1.0);
    batch.targets.resize(n * kNumSdgs);
    for (std::size_t i = 0; i < n; ++i) {
        auto pred = forward(truth, batch.feature_row(i));
        for (std::size_t j = 0; j < static_cast<std::size_t>(kNumSdgs); ++j) {
            batch.targets[i * kNumSdgs + j] = pred[j];
        }
    }
    return batch;
}

}  // namespace

TEST_CASE("forward: zero model, active clamp, hand arithmetic") {
    LinearModel zero = LinearModel::zeros(2);
    auto out = forward(zero, std::vector<double>{1.0, -1.0});
    for (double v : out) CHECK(v == 0.0);

    LinearModel clamped = LinearModel::zeros(2);
    clamped.bias.fill(-1.0);
    auto clamped_out = forward(clamped, std::vector<double>{1.0, 1.0});
    for (double v : clamped_out) CHECK(v == 0.0);

    LinearModel scaled = LinearModel::zeros(1);
    scaled.weight(0, SdgId(3).index()) = 0.25;
    auto scaled_out = forward(scaled, std::vector<double>{2.0});
    CHECK(scaled_out[SdgId(3).index()] == doctest::Approx(0.5));
}

TEST_CASE("loss: zero at perfect fit, hand arithmetic, weighted variant") {
    std::vector<double> target(kNumSdgs, 0.0);
    std::vector<double> pred = target;
    CHECK(loss(pred, target, 1) == 0.0);

    pred[SdgId(3).index()] = 0.1;
    pred[SdgId(7).index()] = 0.2;
    CHECK(loss(pred, target, 1) == doctest::Approx(0.05).epsilon(1e-12));

    ClassWeights weights = ClassWeights::uniform();
    weights.w[SdgId(3).index()] = 2.0;
    CHECK(loss(pred, target, 1, weights) == doctest::Approx(0.06).epsilon(1e-12));
}

TEST_CASE("unit weights reproduce the unweighted loss to 1e-12") {
    Rng rng(79);
    RegressionBatch batch = random_batch(rng, 8, 4);
    LinearModel model = LinearModel::zeros(4);
    Rng init(5);
    for (double& w : model.weights) w = init.uniform(-0.5, 0.5);
    for (double& b : model.bias) b = init.uniform(-0.5, 0.5);

    double unweighted = batch_loss(model, batch);
    double weighted = batch_loss(model, batch, ClassWeights::uniform());
    CHECK(std::abs(unweighted - weighted) < 1e-12);
}

TEST_CASE("gradient: zero at perfect fit and under a dead clamp") {
    Rng rng(83);
    LinearModel truth = LinearModel::zeros(3);
    Rng init(9);
    for (double& w : truth.weights) w = init.uniform(-0.5, 0.5);
    truth.bias.fill(0.3);
    RegressionBatch batch = planted_batch(rng, truth, 6);

    Gradients at_truth = gradient(truth, batch);
    for (double g : at_truth.dw) CHECK(g == doctest::Approx(0.0).epsilon(1e-12));
    for (double g : at_truth.dbias) CHECK(g == doctest::Approx(0.0).epsilon(1e-12));

    // All pre-activations negative: nothing propagates.
    LinearModel dead = LinearModel::zeros(3);
    dead.bias.fill(-5.0);
    Gradients dead_grads = gradient(dead, batch);
    for (double g : dead_grads.dw) CHECK(g == 0.0);
    for (double g : dead_grads.dbias) CHECK(g == 0.0);
}

TEST_CASE("analytic gradient matches central finite differences") {
    Rng rng(89);
    const double h = 1e-5;
    for (int round = 0; round < 20; ++round) {
        RegressionBatch batch = random_batch(rng, 5, 3);
        LinearModel model = LinearModel::zeros(3);
        for (double& w : model.weights) w = rng.uniform(-0.8, 0.8);
        for (double& b : model.bias) b = rng.uniform(-0.8, 0.8);
        std::optional<ClassWeights> weights;
        if (round % 2 == 1) {
            ClassWeights cw;
            for (double& v : cw.w) v = rng.uniform(0.5, 2.0);
            weights = cw;
        }

        Gradients grads = gradient(model, batch, weights);

        // Pre-activation magnitudes below 1e-3 sit too close to the clamp
        // kink for a two-sided difference to be meaningful; skip them.
        auto pre_activation_ok = [&](std::size_t feature, std::size_t output) {
            for (std::size_t i = 0; i < batch.n; ++i) {
                std::array<double, kNumSdgs> z = model.bias;
                auto x = batch.feature_row(i);
                for (std::size_t f = 0; f < model.dim; ++f) {
                    for (std::size_t j = 0; j < static_cast<std::size_t>(kNumSdgs); ++j) {
                        z[j] += x[f] * model.weights[f * kNumSdgs + j];
                    }
                }
                (void)feature;
                if (std::abs(z[output]) <= 1e-3) return false;
            }
            return true;
        };

        for (std::size_t f = 0; f < model.dim; ++f) {
            for (std::size_t j = 0; j < static_cast<std::size_t>(kNumSdgs); ++j) {
                if (!pre_activation_ok(f, j)) continue;
                LinearModel plus = model;
                LinearModel minus = model;
                plus.weight(f, j) += h;
                minus.weight(f, j) -= h;
                double fd = (batch_loss(plus, batch, weights) -
                             batch_loss(minus, batch, weights)) /
                            (2.0 * h);
                double analytic = grads.dw[f * kNumSdgs + j];
                double denom = std::max({std::abs(fd), std::abs(analytic), 1e-8});
                CHECK(std::abs(fd - analytic) / denom < 1e-4);
            }
        }
    }
}

TEST_CASE("train: zero epochs return the seeded initial model") {
    Rng rng(97);
    RegressionBatch batch = random_batch(rng, 4, 2);
    TrainConfig config;
    config.epochs = 0;
    config.seed = 123;
    TrainResult result = train(batch, config);
    CHECK(result.history.empty());

    // Deterministic init: rebuilding with the same seed matches.
    TrainResult again = train(batch, config);
    CHECK(result.model.weights == again.model.weights);
    CHECK(result.model.bias == again.model.bias);
}

TEST_CASE("train recovers a planted model to loss < 1e-3") {
    // Planted weights small enough that the clamp never binds on the
    // targets; gradient descent can then drive the loss to zero instead of
    // stalling on dead clamped units.
    Rng rng(101);
    LinearModel truth = LinearModel::zeros(5);
    for (double& w : truth.weights) w = rng.uniform(-0.09, 0.09);
    for (double& b : truth.bias) b = rng.uniform(0.5, 0.8);
    RegressionBatch batch = planted_batch(rng, truth, 200);

    TrainConfig config;
    config.learning_rate = 0.15;
    config.epochs = 500;
    config.seed = 7;
    TrainResult result = train(batch, config);
    REQUIRE(!result.history.empty());
    CHECK(result.history.back() < 1e-3);
}

TEST_CASE("training loss is non-increasing on the planted fixture") {
    Rng rng(103);
    LinearModel truth = LinearModel::zeros(3);
    for (double& w : truth.weights) w = rng.uniform(-0.15, 0.15);
    truth.bias.fill(0.6);
    RegressionBatch batch = planted_batch(rng, truth, 100);

    TrainConfig config;
    config.learning_rate = 0.05;  // documented stable rate for this fixture
    config.epochs = 200;
    config.seed = 11;
    TrainResult result = train(batch, config);
    for (std::size_t i = 1; i < result.history.size(); ++i) {
        CHECK(result.history[i] <= result.history[i - 1] + 1e-12);
    }
}

TEST_CASE("same seed gives identical training history") {
    Rng rng(107);
    RegressionBatch batch = random_batch(rng, 20, 4);
    TrainConfig config;
    config.learning_rate = 0.02;
    config.epochs = 50;
    config.seed = 31;
    TrainResult a = train(batch, config);
    TrainResult b = train(batch, config);
    REQUIRE(a.history.size() == b.history.size());
    for (std::size_t i = 0; i < a.history.size(); ++i) {
        CHECK(a.history[i] == b.history[i]);
    }
}

TEST_CASE("error_report: zeros at perfect fit, hand arithmetic, overall mean") {
    LinearModel truth = LinearModel::zeros(2);
    truth.bias.fill(0.25);
    Rng rng(109);
    RegressionBatch batch = planted_batch(rng, truth, 5);
    ErrorReport perfect = error_report(truth, batch);
    for (double v : perfect.mse) CHECK(v == doctest::Approx(0.0));
    CHECK(perfect.overall_mse == doctest::Approx(0.0));

    // Single patent with error 0.1 at SDG3 only.
    RegressionBatch single;
    single.n = 1;
    single.dim = 1;
    single.features = {1.0};
    single.targets.assign(kNumSdgs, 0.0);
    LinearModel model = LinearModel::zeros(1);
    model.bias[SdgId(3).index()] = 0.1;
    ErrorReport report = error_report(model, single);
    CHECK(report.mse[SdgId(3).index()] == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(report.mae[SdgId(3).index()] == doctest::Approx(0.1).epsilon(1e-12));

    // Overall equals the mean of per-SDG values.
    double mean_mse = 0.0;
    for (double v : report.mse) mean_mse += v;
    mean_mse /= kNumSdgs;
    CHECK(report.overall_mse == doctest::Approx(mean_mse).epsilon(1e-12));
}

TEST_CASE("inverse-frequency weights follow the documented formula") {
    std::vector<SdgVector> silver(4);
    silver[0].set(SdgId(1), 0.5);
    silver[1].set(SdgId(1), 0.2);
    silver[2].set(SdgId(1), 0.1);
    silver[3].set(SdgId(2), 0.9);
    // f_1 = 3, f_2 = 1, all other classes floored at 1: total = 19.
    ClassWeights weights = ClassWeights::inverse_frequency(silver);
    CHECK(weights.w[0] == doctest::Approx(19.0 / (17.0 * 3.0)).epsilon(1e-12));
    CHECK(weights.w[1] == doctest::Approx(19.0 / 17.0).epsilon(1e-12));
    CHECK(weights.w[16] == doctest::Approx(19.0 / 17.0).epsilon(1e-12));
}

TEST_CASE("batch validation rejects malformed shapes") {
    RegressionBatch bad;
    bad.n = 1;
    bad.dim = 2;
    bad.features = {1.0};  // wrong size
    bad.targets.assign(kNumSdgs, 0.0);
    CHECK_THROWS_AS(bad.validate(), ConfigError);

    RegressionBatch negative;
    negative.n = 1;
    negative.dim = 1;
    negative.features = {1.0};
    negative.targets.assign(kNumSdgs, 0.0);
    negative.targets[0] = -0.5;
    CHECK_THROWS_AS(negative.validate(), ConfigError);
}

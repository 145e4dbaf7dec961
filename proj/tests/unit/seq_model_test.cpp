// Copyright 2026 The qcorr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "qcorr/seq_model.hpp"
#include "temp_dir.hpp"

namespace qcorr {
namespace {

using testing::TempDir;

SeqModelConfig small_config(int channels = 2, std::vector<int> hidden = {3, 4}) {
    SeqModelConfig cfg;
    cfg.input_channels = channels;
    cfg.hidden_sizes = std::move(hidden);
    return cfg;
}

SequenceBatch random_batch(int b, int n, int c, Rng& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    SequenceBatch s(b, n, c);
    for (double& v : s.values) v = u(rng);
    return s;
}

void randomize(SeqModel& m, Rng& rng, double scale) {
    Eigen::VectorXd flat = m.flatten();
    std::uniform_real_distribution<double> u(-scale, scale);
    for (Eigen::Index i = 0; i < flat.size(); ++i) flat[i] = u(rng);
    m.unflatten(flat);
}

std::vector<PulsePair> synthetic_pairs(int count, Rng& rng, double gamma = 0.3) {
    // Smooth map ncp -> dcp so the model has something learnable.
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    std::vector<PulsePair> out;
    for (int i = 0; i < count; ++i) {
        PulsePair p;
        p.gamma = gamma;
        p.ncp = ControlPulse(16);
        for (double& v : p.ncp.flat()) v = u(rng);
        p.dcp = ControlPulse(16);
        for (int t = 0; t < 16; ++t) {
            p.dcp(t, 0) = 0.8 * p.ncp(t, 0) - 0.1 * gamma;
            p.dcp(t, 1) = 0.9 * p.ncp(t, 1) + 0.1 * p.ncp(std::max(t - 1, 0), 0);
        }
        p.ccp = p.dcp - p.ncp;
        out.push_back(std::move(p));
    }
    return out;
}

TEST(Init, DeterministicShapedAndBiased) {
    SeqModelConfig cfg = small_config(2, {200, 250, 300});
    const SeqModel a = init_model(cfg, 5), b = init_model(cfg, 5);
    EXPECT_EQ(a.flatten(), b.flatten());
    EXPECT_NE(a.flatten(), init_model(cfg, 6).flatten());
    ASSERT_EQ(a.layers.size(), 3u);
    const Eigen::MatrixXd w = a.gate_weights(0, true, Gate::Input);
    EXPECT_EQ(w.rows(), 2 + 200);
    EXPECT_EQ(w.cols(), 200);
    EXPECT_EQ(a.gate_weights(1, false, Gate::Forget).rows(), 400 + 250);
    EXPECT_EQ(a.head_weights.rows(), 300);
    EXPECT_EQ(a.head_weights.cols(), 2);
    for (const LstmLayer& layer : a.layers) {
        const int h = layer.hidden;
        const double bound = 1.0 / std::sqrt(static_cast<double>(layer.input_size + h));
        for (const LstmDirection* d : {&layer.forward, &layer.backward}) {
            for (int j = 0; j < 4 * h; ++j) {
                EXPECT_EQ(d->bias[j], (j >= h && j < 2 * h) ? 1.0 : 0.0);
            }
            EXPECT_LE(d->weights.cwiseAbs().maxCoeff(), bound);
        }
    }
}

TEST(Forward, ZeroModelGivesZeroOutput) {
    Rng rng(1);
    const SeqModel m = SeqModel::zeros(small_config());
    const SequenceBatch out = forward(m, random_batch(3, 16, 2, rng));
    for (double v : out.values) EXPECT_EQ(v, 0.0);
    EXPECT_EQ(predict_dcp(m, ControlPulse(16, std::vector<double>(32, 0.4))), ControlPulse::zeros(16));
}

TEST(Forward, OutputsStayInOpenBox) {
    Rng rng(2);
    SeqModel m = init_model(small_config(2, {8, 8}), 2);
    randomize(m, rng, 5.0);
    const SequenceBatch out = forward(m, random_batch(4, 16, 2, rng));
    EXPECT_EQ(out.channels, 2);
    for (double v : out.values) {
        EXPECT_GT(v, -1.0);
        EXPECT_LT(v, 1.0);
    }
}

TEST(Forward, RejectsWrongChannelCount) {
    Rng rng(3);
    const SeqModel m = init_model(small_config(3), 1);
    EXPECT_THROW(forward(m, random_batch(1, 16, 2, rng)), std::invalid_argument);
    EXPECT_THROW(predict_dcp(m, ControlPulse::zeros(16)), std::invalid_argument);
    EXPECT_EQ(predict_dcp(m, ControlPulse::zeros(16), 0.4).slots(), 16);
    EXPECT_THROW(predict_dcp(init_model(small_config(2), 1), ControlPulse::zeros(16), 0.4),
                 std::invalid_argument);
}

// Swapping the directions of every layer and reversing time must reverse the
// output. Layers after the first also see their two input halves swapped.
TEST(Forward, TimeReversalSymmetry) {
    Rng rng(4);
    SeqModel m = init_model(small_config(2, {3, 5, 4}), 9);
    randomize(m, rng, 0.8);
    SeqModel r = m;
    for (std::size_t l = 0; l < r.layers.size(); ++l) {
        LstmLayer& layer = r.layers[l];
        std::swap(layer.forward, layer.backward);
        if (l > 0) {
            const int half = layer.input_size / 2;
            for (LstmDirection* d : {&layer.forward, &layer.backward}) {
                Eigen::MatrixXd top = d->weights.topRows(half);
                d->weights.topRows(half) = d->weights.middleRows(half, half);
                d->weights.middleRows(half, half) = top;
            }
        }
    }
    const SequenceBatch x = random_batch(2, 16, 2, rng);
    SequenceBatch xr(2, 16, 2);
    for (int b = 0; b < 2; ++b)
        for (int t = 0; t < 16; ++t)
            for (int c = 0; c < 2; ++c) xr(b, t, c) = x(b, 15 - t, c);
    const SequenceBatch y = forward(m, x), yr = forward(r, xr);
    for (int b = 0; b < 2; ++b)
        for (int t = 0; t < 16; ++t)
            for (int c = 0; c < 2; ++c) EXPECT_NEAR(yr(b, t, c), y(b, 15 - t, c), 1e-14);
}

TEST(Gradient, MatchesCentralDifferences) {
    Rng rng(5);
    for (int channels : {2, 3}) {
        SeqModel m = init_model(small_config(channels, {3, 4}), 11);
        randomize(m, rng, 0.7);
        const SequenceBatch x = random_batch(3, 6, channels, rng);
        const SequenceBatch y = random_batch(3, 6, 2, rng, 0.9);
        const Eigen::VectorXd g = loss_and_grad(m, x, y).gradient.flatten();
        const Eigen::VectorXd p = m.flatten();
        const double h = 1e-6;
        double worst = 0.0;
        for (Eigen::Index i = 0; i < p.size(); ++i) {
            Eigen::VectorXd up = p, down = p;
            up[i] += h;
            down[i] -= h;
            SeqModel mu = m, md = m;
            mu.unflatten(up);
            md.unflatten(down);
            const double fd = (loss_and_grad(mu, x, y).mse - loss_and_grad(md, x, y).mse) / (2 * h);
            worst = std::max(worst, std::abs(g[i] - fd) / std::max(std::abs(fd), 1e-4));
        }
        EXPECT_LT(worst, 1e-4) << "channels " << channels;
    }
}

TEST(Gradient, VanishesAtPerfectFit) {
    Rng rng(6);
    SeqModel m = init_model(small_config(), 3);
    const SequenceBatch x = random_batch(4, 16, 2, rng);
    const LossAndGrad lg = loss_and_grad(m, x, forward(m, x));
    EXPECT_EQ(lg.mse, 0.0);
    EXPECT_EQ(lg.gradient.flatten().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Gradient, LossInvariantUnderBatchPermutation) {
    Rng rng(7);
    const SeqModel m = init_model(small_config(), 3);
    const SequenceBatch x = random_batch(3, 16, 2, rng), y = random_batch(3, 16, 2, rng);
    SequenceBatch xp(3, 16, 2), yp(3, 16, 2);
    const int perm[] = {2, 0, 1};
    for (int b = 0; b < 3; ++b)
        for (int t = 0; t < 16; ++t)
            for (int c = 0; c < 2; ++c) {
                xp(b, t, c) = x(perm[b], t, c);
                yp(b, t, c) = y(perm[b], t, c);
            }
    EXPECT_NEAR(loss_and_grad(m, x, y).mse, loss_and_grad(m, xp, yp).mse, 1e-15);
}

TEST(Train, OverfitsSinglePair) {
    Rng rng(8);
    const auto pairs = synthetic_pairs(1, rng);
    SeqModelConfig cfg = small_config(2, {16, 16});
    cfg.trainer.max_epochs = 500;
    cfg.trainer.patience = 500;
    cfg.trainer.learning_rate = 1e-2;
    const TrainResult r = train(init_model(cfg, 1), pairs, {}, cfg.trainer);
    EXPECT_LT(*std::min_element(r.report.train_mse.begin(), r.report.train_mse.end()), 1e-3);
}

TEST(Train, DeterministicAndEarlyStopped) {
    Rng rng(9);
    const auto pairs = synthetic_pairs(48, rng);
    const auto val = synthetic_pairs(12, rng);
    SeqModelConfig cfg = small_config(2, {8, 8});
    cfg.trainer.max_epochs = 40;
    cfg.trainer.batch_size = 16;
    cfg.trainer.seed = 3;
    const TrainResult a = train(init_model(cfg, 1), pairs, val, cfg.trainer);
    const TrainResult b = train(init_model(cfg, 1), pairs, val, cfg.trainer);
    EXPECT_TRUE(a.report.same_trajectory(b.report));
    EXPECT_EQ(a.model.flatten(), b.model.flatten());
    ASSERT_FALSE(a.report.validation_mse.empty());
    const double best = a.report.validation_mse[a.report.best_epoch - 1];
    EXPECT_LE(best, a.report.validation_mse.front());
    const auto val_in = make_inputs(val, 2), val_out = make_targets(val);
    EXPECT_NEAR(loss_and_grad(a.model, val_in, val_out).mse, best, 1e-12);
    EXPECT_LT(a.report.train_mse[9], a.report.train_mse[0]);
    for (double v : a.report.train_mse) EXPECT_GE(v, 0.0);
}

TEST(Train, GammaChannelIsUsed) {
    Rng rng(10);
    auto pairs = synthetic_pairs(32, rng, 0.1);
    const auto more = synthetic_pairs(32, rng, 0.9);
    pairs.insert(pairs.end(), more.begin(), more.end());
    const SequenceBatch in = make_inputs(pairs, 3);
    EXPECT_EQ(in.channels, 3);
    EXPECT_EQ(in(0, 5, 2), 0.1);
    EXPECT_EQ(in(40, 0, 2), 0.9);
    const auto overridden = predict_dcps(init_model(small_config(3), 1), pairs, 0.5);
    EXPECT_EQ(overridden.size(), pairs.size());
}

TEST(Checkpoint, RoundTrip) {
    TempDir tmp;
    SeqModel m = init_model(small_config(3, {5, 6, 7}), 21);
    save_model(m, tmp / "model", 21, 12);
    const SeqModel back = load_model(tmp / "model");
    EXPECT_EQ(back.config.hidden_sizes, m.config.hidden_sizes);
    EXPECT_EQ(back.config.input_channels, 3);
    EXPECT_EQ(back.flatten(), m.flatten());
    EXPECT_THROW(load_model(tmp / "missing"), std::runtime_error);
}

TEST(Config, Validation) {
    EXPECT_THROW(small_config(4).validate(), std::invalid_argument);
    EXPECT_THROW(small_config(2, {}).validate(), std::invalid_argument);
    EXPECT_NO_THROW(SeqModelConfig{}.validate());
}

}  // namespace
}  // namespace qcorr

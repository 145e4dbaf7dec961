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

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "qcorr/dataset.hpp"
#include "qcorr/dynamics.hpp"

namespace qcorr {

/// Minibatch Adam settings with validation-plateau early stopping.
struct TrainerConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    int batch_size = 64;
    int max_epochs = 300;
    /// Stop after this many epochs without a validation gain above min_improvement.
    int patience = 20;
    double min_improvement = 1e-5;
    std::uint64_t seed = 0;
    /// Global gradient-norm clip; 0 disables it. Training switches to 5.0 on
    /// its own when a run produces a non-finite loss.
    double clip_norm = 0.0;

    bool operator==(const TrainerConfig&) const = default;
};

struct SeqModelConfig {
    /// 2 for (hx, hz), 3 when gamma is appended to every time slot.
    int input_channels = 2;
    std::vector<int> hidden_sizes{200, 250, 300};
    TrainerConfig trainer;

    void validate() const;
    bool operator==(const SeqModelConfig&) const = default;
};

/// One direction of one recurrent layer. Gate weights are stored stacked:
/// rows index [input ; previous hidden] (input_size + hidden rows), column
/// blocks are the input, forget, output and candidate gates (hidden columns
/// each).
struct LstmDirection {
    Eigen::MatrixXd weights;
    Eigen::VectorXd bias;
};

struct LstmLayer {
    int input_size = 0;
    int hidden = 0;
    LstmDirection forward;
    LstmDirection backward;
};

enum class Gate { Input = 0, Forget = 1, Output = 2, Candidate = 3 };

/// Stacked bidirectional recurrent regressor. Between layers the two
/// directions are concatenated; after the last layer they are summed and a
/// shared tanh-activated affine head maps every time slot to two outputs.
struct SeqModel {
    SeqModelConfig config;
    std::vector<LstmLayer> layers;
    Eigen::MatrixXd head_weights;  // last hidden x 2
    Eigen::VectorXd head_bias;     // 2

    /// Weight block of one gate: (input_size + hidden) x hidden.
    Eigen::MatrixXd gate_weights(int layer, bool forward, Gate gate) const;

    std::size_t parameter_count() const;
    /// Flat copy in checkpoint order: for every layer, forward then backward
    /// direction, weights (column-major) then bias; finally head weights
    /// (column-major) and head bias.
    Eigen::VectorXd flatten() const;
    void unflatten(const Eigen::VectorXd& flat);

    /// Model of the given shape with all parameters zero.
    static SeqModel zeros(const SeqModelConfig& cfg);
};

/// B x n x channels, row-major (batch, time, channel).
struct SequenceBatch {
    int batch = 0;
    int steps = 0;
    int channels = 0;
    std::vector<double> values;

    SequenceBatch() = default;
    SequenceBatch(int b, int n, int c)
        : batch(b), steps(n), channels(c),
          values(static_cast<std::size_t>(b) * n * c, 0.0) {}

    double& operator()(int b, int t, int c) { return values[index(b, t, c)]; }
    double operator()(int b, int t, int c) const { return values[index(b, t, c)]; }

private:
    std::size_t index(int b, int t, int c) const {
        return (static_cast<std::size_t>(b) * steps + t) * channels + c;
    }
};

struct TrainReport {
    std::vector<double> train_mse;
    std::vector<double> validation_mse;
    int final_epoch = 0;
    int best_epoch = 0;
    std::uint64_t seed = 0;
    bool clipping_enabled = false;
    /// Informational only; excluded from determinism comparisons.
    double wall_seconds = 0.0;

    bool same_trajectory(const TrainReport& other) const;
};

struct LossAndGrad {
    double mse = 0.0;
    SeqModel gradient;
};

/// Uniform +-1/sqrt(fan_in) weights, forget-gate bias 1, other biases 0.
SeqModel init_model(const SeqModelConfig& cfg, std::uint64_t seed);

SequenceBatch forward(const SeqModel& model, const SequenceBatch& batch);

/// Mean squared error over every output entry and its exact gradient by
/// backpropagation through time.
LossAndGrad loss_and_grad(const SeqModel& model, const SequenceBatch& batch,
                          const SequenceBatch& targets);

/// Inputs (ncp, plus gamma when the model takes three channels) and DCP
/// targets for a list of records.
SequenceBatch make_inputs(const std::vector<PulsePair>& pairs, int input_channels);
SequenceBatch make_targets(const std::vector<PulsePair>& pairs);

using EpochCallback = std::function<void(int epoch, double train_mse, double validation_mse)>;

struct TrainResult {
    SeqModel model;
    TrainReport report;
};

/// Returns the snapshot with the lowest validation loss. When no validation
/// records are given the training loss plays that role.
TrainResult train(const SeqModel& model, const std::vector<PulsePair>& train_pairs,
                  const std::vector<PulsePair>& validation_pairs, const TrainerConfig& cfg,
                  const EpochCallback& on_epoch = {});

/// nnDCP for one NCP; gamma must be given exactly when the model has three
/// input channels.
ControlPulse predict_dcp(const SeqModel& model, const ControlPulse& ncp,
                         std::optional<double> gamma = std::nullopt);

/// Batched predict_dcp; gamma_override replaces each record's own gamma in
/// the input channel.
std::vector<ControlPulse> predict_dcps(const SeqModel& model, const std::vector<PulsePair>& pairs,
                                       std::optional<double> gamma_override = std::nullopt);

/// Directory layout: manifest.json (config, seed, epoch, parameter count) and
/// params.bin (little-endian float64 in SeqModel::flatten order).
void save_model(const SeqModel& model, const std::filesystem::path& dir, std::uint64_t seed,
                int epoch);
SeqModel load_model(const std::filesystem::path& dir);

}  // namespace qcorr

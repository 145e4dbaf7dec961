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

#include "qcorr/seq_model.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <string>

#include "qcorr/io.hpp"

namespace qcorr {

namespace {

using RMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RArr = Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using io::Json;

constexpr double kAutoClipNorm = 5.0;
constexpr int kEvalChunk = 256;

RMat sigmoid(const RMat& x) { return (1.0 + (-x.array()).exp()).inverse().matrix(); }

// Activations of one direction over the whole sequence, stored time-major:
// rows [t * B, (t + 1) * B) belong to time slot t.
struct DirectionTrace {
    RMat xh;         // [input, previous hidden]
    RMat gates;      // activated i, f, o, g
    RMat cell;
    RMat tanh_cell;
    RMat hidden;
};

struct LayerTrace {
    RMat input;
    DirectionTrace forward;
    DirectionTrace backward;
};

struct ForwardTrace {
    std::vector<LayerTrace> layers;
    RMat merged;  // sum of both directions of the last layer
    RMat output;  // n * B x 2
};

void run_direction(const LstmDirection& p, int in, int hidden, const RMat& inputs, int batch,
                   int steps, bool reverse, DirectionTrace& tr) {
    const int rows = batch * steps;
    tr.xh.resize(rows, in + hidden);
    tr.gates.resize(rows, 4 * hidden);
    tr.cell.resize(rows, hidden);
    tr.tanh_cell.resize(rows, hidden);
    tr.hidden.resize(rows, hidden);
    tr.xh.leftCols(in) = inputs;

    RMat z = inputs * p.weights.topRows(in);
    z.rowwise() += p.bias.transpose();
    const auto recurrent = p.weights.bottomRows(hidden);

    RMat h = RMat::Zero(batch, hidden);
    RMat c = RMat::Zero(batch, hidden);
    for (int s = 0; s < steps; ++s) {
        const int t = reverse ? steps - 1 - s : s;
        const int r0 = t * batch;
        tr.xh.block(r0, in, batch, hidden) = h;
        RMat zt = z.middleRows(r0, batch);
        zt.noalias() += h * recurrent;
        auto g = tr.gates.middleRows(r0, batch);
        g.leftCols(3 * hidden) = sigmoid(zt.leftCols(3 * hidden));
        g.rightCols(hidden) = zt.rightCols(hidden).array().tanh().matrix();
        const auto i_gate = g.leftCols(hidden).array();
        const auto f_gate = g.middleCols(hidden, hidden).array();
        const auto o_gate = g.middleCols(2 * hidden, hidden).array();
        const auto cand = g.rightCols(hidden).array();
        c = (f_gate * c.array() + i_gate * cand).matrix();
        tr.cell.middleRows(r0, batch) = c;
        tr.tanh_cell.middleRows(r0, batch) = c.array().tanh().matrix();
        h = (o_gate * tr.tanh_cell.middleRows(r0, batch).array()).matrix();
        tr.hidden.middleRows(r0, batch) = h;
    }
}

// Accumulates parameter gradients into grad and, when d_inputs is non-null,
// adds the gradient with respect to the direction's inputs.
void backprop_direction(const LstmDirection& p, int in, int hidden, int batch, int steps,
                        bool reverse, const DirectionTrace& tr, const RMat& dh_ext,
                        LstmDirection& grad, RMat* d_inputs) {
    const int rows = batch * steps;
    RMat dz(rows, 4 * hidden);
    RMat dh_next = RMat::Zero(batch, hidden);
    RMat dc_next = RMat::Zero(batch, hidden);
    const auto recurrent = p.weights.bottomRows(hidden);

    for (int s = steps - 1; s >= 0; --s) {
        const int t = reverse ? steps - 1 - s : s;
        const int r0 = t * batch;
        const auto g = tr.gates.middleRows(r0, batch);
        const auto i_gate = g.leftCols(hidden).array();
        const auto f_gate = g.middleCols(hidden, hidden).array();
        const auto o_gate = g.middleCols(2 * hidden, hidden).array();
        const auto cand = g.rightCols(hidden).array();
        const auto tc = tr.tanh_cell.middleRows(r0, batch).array();

        const RArr dh = (dh_ext.middleRows(r0, batch) + dh_next).array();
        const RArr dc = dc_next.array() + dh * o_gate * (1.0 - tc * tc);
        RArr c_prev;
        if (s > 0) {
            const int tp = reverse ? t + 1 : t - 1;
            c_prev = tr.cell.middleRows(tp * batch, batch).array();
        } else {
            c_prev = RArr::Zero(batch, hidden);
        }

        auto dzt = dz.middleRows(r0, batch);
        dzt.leftCols(hidden) = (dc * cand * i_gate * (1.0 - i_gate)).matrix();
        dzt.middleCols(hidden, hidden) = (dc * c_prev * f_gate * (1.0 - f_gate)).matrix();
        dzt.middleCols(2 * hidden, hidden) = (dh * tc * o_gate * (1.0 - o_gate)).matrix();
        dzt.rightCols(hidden) = (dc * i_gate * (1.0 - cand * cand)).matrix();

        dc_next = (dc * f_gate).matrix();
        dh_next.noalias() = dzt * recurrent.transpose();
    }
    grad.weights.noalias() += tr.xh.transpose() * dz;
    grad.bias += dz.colwise().sum().transpose();
    if (d_inputs != nullptr) {
        d_inputs->noalias() += dz * p.weights.topRows(in).transpose();
    }
}

RMat time_major(const SequenceBatch& batch) {
    RMat x(batch.batch * batch.steps, batch.channels);
    for (int b = 0; b < batch.batch; ++b) {
        for (int t = 0; t < batch.steps; ++t) {
            for (int c = 0; c < batch.channels; ++c) {
                x(t * batch.batch + b, c) = batch(b, t, c);
            }
        }
    }
    return x;
}

SequenceBatch from_time_major(const RMat& x, int batch, int steps) {
    SequenceBatch out(batch, steps, static_cast<int>(x.cols()));
    for (int b = 0; b < batch; ++b) {
        for (int t = 0; t < steps; ++t) {
            for (int c = 0; c < out.channels; ++c) {
                out(b, t, c) = x(t * batch + b, c);
            }
        }
    }
    return out;
}

void check_batch(const SeqModel& model, const SequenceBatch& batch) {
    if (batch.channels != model.config.input_channels) {
        throw std::invalid_argument("seq_model: batch has " + std::to_string(batch.channels) +
                                    " channels, model expects " +
                                    std::to_string(model.config.input_channels));
    }
    if (batch.batch < 1 || batch.steps < 1 ||
        batch.values.size() !=
            static_cast<std::size_t>(batch.batch) * batch.steps * batch.channels) {
        throw std::invalid_argument("seq_model: malformed batch");
    }
}

ForwardTrace run_forward(const SeqModel& model, const SequenceBatch& batch) {
    check_batch(model, batch);
    const int b = batch.batch;
    const int n = batch.steps;
    ForwardTrace tr;
    tr.layers.resize(model.layers.size());
    RMat input = time_major(batch);
    for (std::size_t l = 0; l < model.layers.size(); ++l) {
        const LstmLayer& layer = model.layers[l];
        LayerTrace& lt = tr.layers[l];
        lt.input = std::move(input);
        run_direction(layer.forward, layer.input_size, layer.hidden, lt.input, b, n, false,
                      lt.forward);
        run_direction(layer.backward, layer.input_size, layer.hidden, lt.input, b, n, true,
                      lt.backward);
        if (l + 1 < model.layers.size()) {
            input.resize(b * n, 2 * layer.hidden);
            input.leftCols(layer.hidden) = lt.forward.hidden;
            input.rightCols(layer.hidden) = lt.backward.hidden;
        }
    }
    const LayerTrace& last = tr.layers.back();
    tr.merged = last.forward.hidden + last.backward.hidden;
    RMat pre = tr.merged * model.head_weights;
    pre.rowwise() += model.head_bias.transpose();
    tr.output = pre.array().tanh().matrix();
    return tr;
}

LstmDirection zero_direction(int in, int hidden) {
    return LstmDirection{Eigen::MatrixXd::Zero(in + hidden, 4 * hidden),
                         Eigen::VectorXd::Zero(4 * hidden)};
}

template <typename Fn>
void for_each_tensor(SeqModel& m, Fn&& fn) {
    for (LstmLayer& layer : m.layers) {
        for (LstmDirection* d : {&layer.forward, &layer.backward}) {
            fn(d->weights.data(), d->weights.size());
            fn(d->bias.data(), d->bias.size());
        }
    }
    fn(m.head_weights.data(), m.head_weights.size());
    fn(m.head_bias.data(), m.head_bias.size());
}

}  // namespace

void SeqModelConfig::validate() const {
    if (input_channels != 2 && input_channels != 3) {
        throw std::invalid_argument("SeqModelConfig: input_channels must be 2 or 3");
    }
    if (hidden_sizes.empty()) {
        throw std::invalid_argument("SeqModelConfig: hidden_sizes must be non-empty");
    }
    for (int h : hidden_sizes) {
        if (h < 1) {
            throw std::invalid_argument("SeqModelConfig: hidden sizes must be positive");
        }
    }
}

Eigen::MatrixXd SeqModel::gate_weights(int layer, bool fwd, Gate gate) const {
    const LstmLayer& l = layers.at(static_cast<std::size_t>(layer));
    const LstmDirection& d = fwd ? l.forward : l.backward;
    return d.weights.middleCols(static_cast<int>(gate) * l.hidden, l.hidden);
}

SeqModel SeqModel::zeros(const SeqModelConfig& cfg) {
    cfg.validate();
    SeqModel m;
    m.config = cfg;
    int in = cfg.input_channels;
    for (std::size_t l = 0; l < cfg.hidden_sizes.size(); ++l) {
        const int h = cfg.hidden_sizes[l];
        LstmLayer layer;
        layer.input_size = in;
        layer.hidden = h;
        layer.forward = zero_direction(in, h);
        layer.backward = zero_direction(in, h);
        m.layers.push_back(std::move(layer));
        in = 2 * h;
    }
    m.head_weights = Eigen::MatrixXd::Zero(cfg.hidden_sizes.back(), 2);
    m.head_bias = Eigen::VectorXd::Zero(2);
    return m;
}

std::size_t SeqModel::parameter_count() const {
    std::size_t n = 0;
    for (const LstmLayer& layer : layers) {
        n += 2 * static_cast<std::size_t>(layer.forward.weights.size() + layer.forward.bias.size());
    }
    return n + static_cast<std::size_t>(head_weights.size() + head_bias.size());
}

Eigen::VectorXd SeqModel::flatten() const {
    Eigen::VectorXd flat(static_cast<Eigen::Index>(parameter_count()));
    Eigen::Index pos = 0;
    for_each_tensor(const_cast<SeqModel&>(*this), [&](double* data, Eigen::Index size) {
        flat.segment(pos, size) = Eigen::Map<const Eigen::VectorXd>(data, size);
        pos += size;
    });
    return flat;
}

void SeqModel::unflatten(const Eigen::VectorXd& flat) {
    if (static_cast<std::size_t>(flat.size()) != parameter_count()) {
        throw std::invalid_argument("SeqModel::unflatten: expected " +
                                    std::to_string(parameter_count()) + " parameters, got " +
                                    std::to_string(flat.size()));
    }
    Eigen::Index pos = 0;
    for_each_tensor(*this, [&](double* data, Eigen::Index size) {
        Eigen::Map<Eigen::VectorXd>(data, size) = flat.segment(pos, size);
        pos += size;
    });
}

bool TrainReport::same_trajectory(const TrainReport& o) const {
    return train_mse == o.train_mse && validation_mse == o.validation_mse &&
           final_epoch == o.final_epoch && best_epoch == o.best_epoch && seed == o.seed &&
           clipping_enabled == o.clipping_enabled;
}

SeqModel init_model(const SeqModelConfig& cfg, std::uint64_t seed) {
    SeqModel m = SeqModel::zeros(cfg);
    Rng rng(seed);
    for (LstmLayer& layer : m.layers) {
        const double limit = 1.0 / std::sqrt(static_cast<double>(layer.input_size + layer.hidden));
        std::uniform_real_distribution<double> u(-limit, limit);
        for (LstmDirection* d : {&layer.forward, &layer.backward}) {
            for (Eigen::Index i = 0; i < d->weights.size(); ++i) {
                d->weights.data()[i] = u(rng);
            }
            d->bias.setZero();
            d->bias.segment(static_cast<int>(Gate::Forget) * layer.hidden, layer.hidden)
                .setConstant(1.0);
        }
    }
    const double limit = 1.0 / std::sqrt(static_cast<double>(m.head_weights.rows()));
    std::uniform_real_distribution<double> u(-limit, limit);
    for (Eigen::Index i = 0; i < m.head_weights.size(); ++i) {
        m.head_weights.data()[i] = u(rng);
    }
    m.head_bias.setZero();
    return m;
}

SequenceBatch forward(const SeqModel& model, const SequenceBatch& batch) {
    const ForwardTrace tr = run_forward(model, batch);
    return from_time_major(tr.output, batch.batch, batch.steps);
}

LossAndGrad loss_and_grad(const SeqModel& model, const SequenceBatch& batch,
                          const SequenceBatch& targets) {
    if (targets.batch != batch.batch || targets.steps != batch.steps || targets.channels != 2) {
        throw std::invalid_argument("loss_and_grad: targets must be B x n x 2 matching the batch");
    }
    const ForwardTrace tr = run_forward(model, batch);
    const int b = batch.batch;
    const int n = batch.steps;
    const RMat y = time_major(targets);
    const RMat diff = tr.output - y;
    const double count = static_cast<double>(diff.size());

    LossAndGrad out;
    out.mse = diff.squaredNorm() / count;
    out.gradient = SeqModel::zeros(model.config);
    SeqModel& grad = out.gradient;

    const RMat d_pre = ((2.0 / count) * diff.array() * (1.0 - tr.output.array().square())).matrix();
    grad.head_weights.noalias() = tr.merged.transpose() * d_pre;
    grad.head_bias = d_pre.colwise().sum().transpose();
    RMat d_fwd = d_pre * model.head_weights.transpose();
    RMat d_bwd = d_fwd;

    for (int l = static_cast<int>(model.layers.size()) - 1; l >= 0; --l) {
        const LstmLayer& layer = model.layers[static_cast<std::size_t>(l)];
        LstmLayer& g = grad.layers[static_cast<std::size_t>(l)];
        const LayerTrace& lt = tr.layers[static_cast<std::size_t>(l)];
        RMat d_in;
        RMat* d_in_ptr = nullptr;
        if (l > 0) {
            d_in = RMat::Zero(b * n, layer.input_size);
            d_in_ptr = &d_in;
        }
        backprop_direction(layer.forward, layer.input_size, layer.hidden, b, n, false, lt.forward,
                           d_fwd, g.forward, d_in_ptr);
        backprop_direction(layer.backward, layer.input_size, layer.hidden, b, n, true,
                           lt.backward, d_bwd, g.backward, d_in_ptr);
        if (l > 0) {
            const int prev_hidden = model.layers[static_cast<std::size_t>(l - 1)].hidden;
            d_fwd = d_in.leftCols(prev_hidden);
            d_bwd = d_in.rightCols(prev_hidden);
        }
    }
    return out;
}

SequenceBatch make_inputs(const std::vector<PulsePair>& pairs, int input_channels) {
    if (pairs.empty()) {
        throw std::invalid_argument("make_inputs: no records");
    }
    const int n = pairs.front().ncp.slots();
    SequenceBatch batch(static_cast<int>(pairs.size()), n, input_channels);
    for (int b = 0; b < batch.batch; ++b) {
        const PulsePair& p = pairs[static_cast<std::size_t>(b)];
        for (int t = 0; t < n; ++t) {
            batch(b, t, 0) = p.ncp(t, 0);
            batch(b, t, 1) = p.ncp(t, 1);
            if (input_channels == 3) {
                batch(b, t, 2) = p.gamma;
            }
        }
    }
    return batch;
}

SequenceBatch make_targets(const std::vector<PulsePair>& pairs) {
    if (pairs.empty()) {
        throw std::invalid_argument("make_targets: no records");
    }
    const int n = pairs.front().dcp.slots();
    SequenceBatch batch(static_cast<int>(pairs.size()), n, 2);
    for (int b = 0; b < batch.batch; ++b) {
        const PulsePair& p = pairs[static_cast<std::size_t>(b)];
        for (int t = 0; t < n; ++t) {
            batch(b, t, 0) = p.dcp(t, 0);
            batch(b, t, 1) = p.dcp(t, 1);
        }
    }
    return batch;
}

namespace {

SequenceBatch slice(const SequenceBatch& src, const std::vector<std::size_t>& rows) {
    SequenceBatch out(static_cast<int>(rows.size()), src.steps, src.channels);
    const std::size_t stride = static_cast<std::size_t>(src.steps) * src.channels;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::copy_n(src.values.begin() + static_cast<std::ptrdiff_t>(rows[i] * stride), stride,
                    out.values.begin() + static_cast<std::ptrdiff_t>(i * stride));
    }
    return out;
}

double evaluate_mse(const SeqModel& model, const SequenceBatch& inputs,
                    const SequenceBatch& targets) {
    double sse = 0.0;
    for (int start = 0; start < inputs.batch; start += kEvalChunk) {
        std::vector<std::size_t> rows;
        for (int i = start; i < std::min(inputs.batch, start + kEvalChunk); ++i) {
            rows.push_back(static_cast<std::size_t>(i));
        }
        const SequenceBatch pred = forward(model, slice(inputs, rows));
        const SequenceBatch want = slice(targets, rows);
        for (std::size_t i = 0; i < pred.values.size(); ++i) {
            const double d = pred.values[i] - want.values[i];
            sse += d * d;
        }
    }
    return sse / static_cast<double>(targets.values.size());
}

struct AttemptOutcome {
    bool finite = true;
    TrainResult result;
};

AttemptOutcome train_attempt(const SeqModel& start, const SequenceBatch& train_in,
                             const SequenceBatch& train_out, const SequenceBatch* val_in,
                             const SequenceBatch* val_out, const TrainerConfig& cfg,
                             double clip_norm, const EpochCallback& on_epoch) {
    AttemptOutcome outcome;
    SeqModel model = start;
    Eigen::VectorXd params = model.flatten();
    Eigen::VectorXd m1 = Eigen::VectorXd::Zero(params.size());
    Eigen::VectorXd m2 = Eigen::VectorXd::Zero(params.size());
    Rng rng(cfg.seed);
    std::vector<std::size_t> order(static_cast<std::size_t>(train_in.batch));
    std::iota(order.begin(), order.end(), std::size_t{0});

    TrainReport& report = outcome.result.report;
    report.seed = cfg.seed;
    report.clipping_enabled = clip_norm > 0.0;
    SeqModel best = model;
    double best_val = std::numeric_limits<double>::infinity();
    double last_gain_val = std::numeric_limits<double>::infinity();
    int since_gain = 0;
    long long step = 0;

    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double sse = 0.0;
        for (std::size_t start_row = 0; start_row < order.size();
             start_row += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t end_row =
                std::min(order.size(), start_row + static_cast<std::size_t>(cfg.batch_size));
            const std::vector<std::size_t> rows(order.begin() + static_cast<std::ptrdiff_t>(start_row),
                                                order.begin() + static_cast<std::ptrdiff_t>(end_row));
            const LossAndGrad lg = loss_and_grad(model, slice(train_in, rows), slice(train_out, rows));
            if (!std::isfinite(lg.mse)) {
                outcome.finite = false;
                return outcome;
            }
            sse += lg.mse * static_cast<double>(rows.size());
            Eigen::VectorXd grad = lg.gradient.flatten();
            if (clip_norm > 0.0) {
                const double norm = grad.norm();
                if (norm > clip_norm) {
                    grad *= clip_norm / norm;
                }
            }
            ++step;
            m1 = cfg.beta1 * m1 + (1.0 - cfg.beta1) * grad;
            m2 = cfg.beta2 * m2 + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
            const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
            params.array() -= cfg.learning_rate * (m1.array() / c1) /
                              ((m2.array() / c2).sqrt() + cfg.epsilon);
            model.unflatten(params);
        }
        const double train_mse = sse / static_cast<double>(order.size());
        const double val_mse = val_in != nullptr ? evaluate_mse(model, *val_in, *val_out)
                                                 : evaluate_mse(model, train_in, train_out);
        if (!std::isfinite(train_mse) || !std::isfinite(val_mse)) {
            outcome.finite = false;
            return outcome;
        }
        report.train_mse.push_back(train_mse);
        report.validation_mse.push_back(val_mse);
        report.final_epoch = epoch;
        if (on_epoch) {
            on_epoch(epoch, train_mse, val_mse);
        }
        if (val_mse < best_val) {
            best_val = val_mse;
            best = model;
            report.best_epoch = epoch;
        }
        if (val_mse < last_gain_val - cfg.min_improvement) {
            last_gain_val = val_mse;
            since_gain = 0;
        } else if (++since_gain >= cfg.patience) {
            break;
        }
    }
    outcome.result.model = std::move(best);
    return outcome;
}

}  // namespace

TrainResult train(const SeqModel& model, const std::vector<PulsePair>& train_pairs,
                  const std::vector<PulsePair>& validation_pairs, const TrainerConfig& cfg,
                  const EpochCallback& on_epoch) {
    if (train_pairs.empty()) {
        throw std::invalid_argument("train: no training records");
    }
    if (cfg.batch_size < 1 || cfg.max_epochs < 1 || cfg.patience < 1) {
        throw std::invalid_argument("train: batch_size, max_epochs and patience must be >= 1");
    }
    const int channels = model.config.input_channels;
    const SequenceBatch train_in = make_inputs(train_pairs, channels);
    const SequenceBatch train_out = make_targets(train_pairs);
    std::optional<SequenceBatch> val_in;
    std::optional<SequenceBatch> val_out;
    if (!validation_pairs.empty()) {
        val_in = make_inputs(validation_pairs, channels);
        val_out = make_targets(validation_pairs);
    }

    const auto t0 = std::chrono::steady_clock::now();
    AttemptOutcome outcome =
        train_attempt(model, train_in, train_out, val_in ? &*val_in : nullptr,
                      val_out ? &*val_out : nullptr, cfg, cfg.clip_norm, on_epoch);
    if (!outcome.finite && cfg.clip_norm <= 0.0) {
        outcome = train_attempt(model, train_in, train_out, val_in ? &*val_in : nullptr,
                                val_out ? &*val_out : nullptr, cfg, kAutoClipNorm, on_epoch);
    }
    if (!outcome.finite) {
        throw std::runtime_error("train: non-finite loss even with gradient clipping; "
                                 "the learning rate (" +
                                 std::to_string(cfg.learning_rate) + ") is likely too high");
    }
    outcome.result.report.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    outcome.result.model.config.trainer = cfg;
    return std::move(outcome.result);
}

ControlPulse predict_dcp(const SeqModel& model, const ControlPulse& ncp,
                         std::optional<double> gamma) {
    const bool wants_gamma = model.config.input_channels == 3;
    if (gamma.has_value() != wants_gamma) {
        throw std::invalid_argument(wants_gamma ? "predict_dcp: model needs gamma input"
                                                : "predict_dcp: model takes no gamma input");
    }
    SequenceBatch in(1, ncp.slots(), model.config.input_channels);
    for (int t = 0; t < ncp.slots(); ++t) {
        in(0, t, 0) = ncp(t, 0);
        in(0, t, 1) = ncp(t, 1);
        if (wants_gamma) {
            in(0, t, 2) = *gamma;
        }
    }
    const SequenceBatch out = forward(model, in);
    ControlPulse p(ncp.slots());
    for (int t = 0; t < ncp.slots(); ++t) {
        p(t, 0) = out(0, t, 0);
        p(t, 1) = out(0, t, 1);
    }
    return p;
}

std::vector<ControlPulse> predict_dcps(const SeqModel& model, const std::vector<PulsePair>& pairs,
                                       std::optional<double> gamma_override) {
    std::vector<ControlPulse> out;
    out.reserve(pairs.size());
    for (std::size_t start = 0; start < pairs.size(); start += kEvalChunk) {
        std::vector<PulsePair> chunk(
            pairs.begin() + static_cast<std::ptrdiff_t>(start),
            pairs.begin() + static_cast<std::ptrdiff_t>(std::min(pairs.size(), start + kEvalChunk)));
        if (gamma_override) {
            for (PulsePair& p : chunk) {
                p.gamma = *gamma_override;
            }
        }
        const SequenceBatch pred = forward(model, make_inputs(chunk, model.config.input_channels));
        for (int b = 0; b < pred.batch; ++b) {
            ControlPulse p(pred.steps);
            for (int t = 0; t < pred.steps; ++t) {
                p(t, 0) = pred(b, t, 0);
                p(t, 1) = pred(b, t, 1);
            }
            out.push_back(std::move(p));
        }
    }
    return out;
}

namespace {

Json trainer_to_json(const TrainerConfig& t) {
    Json j;
    j["learning_rate"] = t.learning_rate;
    j["beta1"] = t.beta1;
    j["beta2"] = t.beta2;
    j["epsilon"] = t.epsilon;
    j["batch_size"] = t.batch_size;
    j["max_epochs"] = t.max_epochs;
    j["patience"] = t.patience;
    j["min_improvement"] = t.min_improvement;
    j["seed"] = t.seed;
    j["clip_norm"] = t.clip_norm;
    return j;
}

TrainerConfig trainer_from_json(const Json& j) {
    TrainerConfig t;
    t.learning_rate = j.at("learning_rate").get<double>();
    t.beta1 = j.at("beta1").get<double>();
    t.beta2 = j.at("beta2").get<double>();
    t.epsilon = j.at("epsilon").get<double>();
    t.batch_size = j.at("batch_size").get<int>();
    t.max_epochs = j.at("max_epochs").get<int>();
    t.patience = j.at("patience").get<int>();
    t.min_improvement = j.at("min_improvement").get<double>();
    t.seed = j.at("seed").get<std::uint64_t>();
    t.clip_norm = j.at("clip_norm").get<double>();
    return t;
}

}  // namespace

void save_model(const SeqModel& model, const std::filesystem::path& dir, std::uint64_t seed,
                int epoch) {
    static_assert(std::endian::native == std::endian::little,
                  "checkpoint blobs are written in native little-endian order");
    io::ensure_directory(dir);
    Json m;
    m["format_version"] = 1;
    m["input_channels"] = model.config.input_channels;
    m["hidden_sizes"] = model.config.hidden_sizes;
    m["trainer"] = trainer_to_json(model.config.trainer);
    m["seed"] = seed;
    m["epoch"] = epoch;
    m["parameter_count"] = model.parameter_count();
    m["parameter_order"] =
        "per layer: forward weights, forward bias, backward weights, backward bias; "
        "then head weights, head bias. Weights are (input+hidden) x 4*hidden column-major "
        "with gate column blocks input, forget, output, candidate; head weights are "
        "hidden x 2 column-major. float64 little-endian.";
    io::write_json(dir / "manifest.json", m);
    const Eigen::VectorXd flat = model.flatten();
    std::ofstream out(dir / "params.bin", std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + (dir / "params.bin").string());
    }
    out.write(reinterpret_cast<const char*>(flat.data()),
              static_cast<std::streamsize>(flat.size() * sizeof(double)));
    if (!out) {
        throw std::runtime_error("write failed: " + (dir / "params.bin").string());
    }
}

SeqModel load_model(const std::filesystem::path& dir) {
    const Json m = io::read_json(dir / "manifest.json");
    SeqModelConfig cfg;
    cfg.input_channels = m.at("input_channels").get<int>();
    cfg.hidden_sizes = m.at("hidden_sizes").get<std::vector<int>>();
    cfg.trainer = trainer_from_json(m.at("trainer"));
    SeqModel model = SeqModel::zeros(cfg);
    const auto count = m.at("parameter_count").get<std::size_t>();
    if (count != model.parameter_count()) {
        throw std::runtime_error("checkpoint " + dir.string() + " declares " +
                                 std::to_string(count) + " parameters, shape implies " +
                                 std::to_string(model.parameter_count()));
    }
    std::ifstream in(dir / "params.bin", std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open for reading: " + (dir / "params.bin").string());
    }
    Eigen::VectorXd flat(static_cast<Eigen::Index>(count));
    in.read(reinterpret_cast<char*>(flat.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(count * sizeof(double))) {
        throw std::runtime_error("truncated parameter blob: " + (dir / "params.bin").string());
    }
    model.unflatten(flat);
    return model;
}

}  // namespace qcorr

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

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qcorr/dataset.hpp"
#include "qcorr/geometric.hpp"
#include "qcorr/seq_model.hpp"

namespace qcorr {

enum class Profile { Paper, Ci };

std::string to_string(Profile p);
Profile profile_from_string(const std::string& name);

/// Everything an experiment run depends on. Serialized form is the `--spec`
/// file of the CLI; its hash names the output files.
struct ExperimentSpec {
    std::string experiment = "table1";
    std::string method = "lstm";
    Profile profile = Profile::Paper;
    std::uint64_t seed = 0;

    /// Dataset directory (manifest.json + records.jsonl). Not hashed.
    std::filesystem::path data;
    /// Directory of LSTM checkpoints, one subdirectory per trained model. Not hashed.
    std::filesystem::path models;
    /// Where CSV and SVG files go. Not hashed.
    std::filesystem::path output_dir = "results";
    /// Train models that are absent from `models` instead of failing. Not hashed.
    bool train_missing = false;

    int train_targets = 3000;
    int test_targets = 2000;
    /// Share of training targets held out for LSTM early stopping.
    double validation_fraction = 0.1;

    std::vector<double> gammas{0.2, 0.4, 0.6, 0.8};
    std::vector<double> train_gammas{0.1, 0.3, 0.5};
    std::vector<double> test_gammas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    std::vector<double> reference_gammas{0.3, 0.5};

    int k_min = 1;
    int k_max = 496;
    int k_step = 5;
    std::vector<FeatureMode> modes{FeatureMode::Raw, FeatureMode::Sine, FeatureMode::Poly3,
                                   FeatureMode::Poly4};
    std::vector<int> sample_sizes{1000, 5000};

    int neighbors = 4;
    double gamma_scale = KnnClassifier::kDefaultGammaScale;
    /// Cluster count of the kNN pipeline in reference and generalization runs.
    int knn_clusters = 500;

    SeqModelConfig lstm;

    /// Profile defaults: paper = 3000/2000 targets, k step 5, hidden
    /// [200, 250, 300], 300 epochs; ci = 200 targets, k step 25, hidden
    /// [64, 64, 64], 60 epochs.
    static ExperimentSpec defaults(Profile profile);

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;

    nlohmann::ordered_json to_json() const;
    /// Fields absent from j keep the values of `base`.
    static ExperimentSpec from_json(const nlohmann::ordered_json& j, ExperimentSpec base);

    /// FNV-1a of the canonical JSON without the path fields and train_missing.
    std::string hash() const;

    /// k_min, k_min + k_step, ... up to min(k_max, limit).
    std::vector<int> k_grid(int limit) const;
};

struct ResultRow {
    std::string experiment;
    std::string method;
    double gamma = 0.0;
    int k_or_epoch = 0;
    double mean_fidelity = 0.0;
    double std = 0.0;
    int count = 0;
};

struct ResultTable {
    std::string experiment;
    std::string spec_hash;
    std::vector<ResultRow> rows;

    /// Rows matching method (and gamma when given), in table order.
    std::vector<ResultRow> select(const std::string& method,
                                  std::optional<double> gamma = std::nullopt) const;
};

/// Mean and population standard deviation of a non-empty sample.
struct Summary {
    double mean = 0.0;
    double std = 0.0;
    int count = 0;
};
Summary summarize(const std::vector<double>& values);

/// Deterministic sub-seed for one cell of an experiment grid.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags);

/// Method label of an LSTM/kNN reference curve trained at gamma_train.
std::string reference_method(const std::string& method, double gamma_train);

/// Trains an LSTM on the records of `train` at the given gammas. A
/// validation_fraction share of the targets is held out for early stopping.
/// With gamma_input the model takes (hx, hz, gamma) per time slot.
TrainResult train_lstm_on(const ExperimentSpec& spec, const Dataset& train,
                          const std::vector<double>& gammas, bool gamma_input,
                          const EpochCallback& on_epoch = {});

/// Checkpoint directory name used by the harness for a model trained at
/// `gammas`.
std::string lstm_checkpoint_name(const std::vector<double>& gammas, bool gamma_input);

/// nnDCP, DCP and NCP-on-drift rows for every gamma in spec.gammas.
ResultTable run_table1(const ExperimentSpec& spec, const Dataset& data);
/// Per gamma: the NCP baseline row, then SoP(k) for every feature mode.
ResultTable run_cluster_sweep(const ExperimentSpec& spec, const Dataset& data);
/// Raw-mode SoP(k) curves on the first N targets for every N in sample_sizes,
/// at spec.gammas.front().
ResultTable run_sample_invariance(const ExperimentSpec& spec, const Dataset& data);
/// Per gamma and k: training SoP and test-set fidelity of the kNN-dispatched
/// corrections.
ResultTable run_knn_eval(const ExperimentSpec& spec, const Dataset& data);
/// Models trained at each gamma in spec.reference_gammas without a gamma
/// input, evaluated at every gamma in spec.test_gammas.
ResultTable run_reference_points(const ExperimentSpec& spec, const Dataset& data);
/// Gamma-aware model trained on spec.train_gammas, evaluated on
/// spec.test_gammas, followed by the reference curves.
ResultTable run_generalization(const ExperimentSpec& spec, const Dataset& data);

/// Dispatches on spec.experiment.
ResultTable run_experiment(const ExperimentSpec& spec, const Dataset& data);

enum class ReportFormat { Csv, CsvAndSvg };

/// Writes <experiment>-<hash>.csv and, with CsvAndSvg, line charts
/// (<experiment>-<hash>[-gamma_<g>].svg). Returns the written paths.
std::vector<std::filesystem::path> emit_report(const std::vector<ResultTable>& tables,
                                               ReportFormat format,
                                               const std::filesystem::path& dir);

/// CSV text of one table, footer included.
std::string to_csv(const ResultTable& table);

}  // namespace qcorr

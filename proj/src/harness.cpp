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

#include "qcorr/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "qcorr/io.hpp"

namespace qcorr {

using io::Json;

std::string to_string(Profile p) { return p == Profile::Paper ? "paper" : "ci"; }

Profile profile_from_string(const std::string& name) {
    if (name == "paper") return Profile::Paper;
    if (name == "ci") return Profile::Ci;
    throw std::invalid_argument("unknown profile '" + name + "' (expected paper or ci)");
}

ExperimentSpec ExperimentSpec::defaults(Profile profile) {
    ExperimentSpec s;
    s.profile = profile;
    if (profile == Profile::Ci) {
        s.train_targets = 200;
        s.test_targets = 200;
        s.k_step = 25;
        s.sample_sizes = {100, 200};
        s.lstm.hidden_sizes = {64, 64, 64};
        s.lstm.trainer.max_epochs = 60;
    }
    return s;
}

void ExperimentSpec::validate() const {
    static const std::set<std::string> kExperiments{"table1",     "cluster_sweep",
                                                    "sample_invariance", "knn_eval",
                                                    "reference_points",  "generalization"};
    if (kExperiments.count(experiment) == 0) {
        throw std::invalid_argument("spec: unknown experiment '" + experiment + "'");
    }
    if (method != "lstm" && method != "knn") {
        throw std::invalid_argument("spec: method must be lstm or knn, got '" + method + "'");
    }
    auto check_gammas = [](const std::vector<double>& gs, const char* name) {
        for (double g : gs) {
            if (!(g >= 0.0 && g <= 1.0)) {
                throw std::invalid_argument(std::string("spec: ") + name +
                                            " values must lie in [0, 1]");
            }
        }
    };
    check_gammas(gammas, "gammas");
    check_gammas(train_gammas, "train_gammas");
    check_gammas(test_gammas, "test_gammas");
    check_gammas(reference_gammas, "reference_gammas");
    if (train_targets < 1 || test_targets < 0) {
        throw std::invalid_argument("spec: train_targets must be >= 1, test_targets >= 0");
    }
    if (!(validation_fraction >= 0.0 && validation_fraction < 1.0)) {
        throw std::invalid_argument("spec: validation_fraction must lie in [0, 1)");
    }
    if (k_min < 1 || k_step < 1 || k_max < k_min) {
        throw std::invalid_argument("spec: k grid needs 1 <= k_min <= k_max and k_step >= 1");
    }
    if (neighbors < 1 || knn_clusters < 1) {
        throw std::invalid_argument("spec: neighbors and knn_clusters must be >= 1");
    }
    lstm.validate();
    if (!data.empty() && !std::filesystem::exists(data / "manifest.json")) {
        throw std::invalid_argument("spec: no dataset at " + data.string() +
                                    " (expected manifest.json; create it with `qcorr generate`)");
    }
}

namespace {

Json lstm_to_json(const SeqModelConfig& c) {
    Json j;
    j["hidden_sizes"] = c.hidden_sizes;
    j["learning_rate"] = c.trainer.learning_rate;
    j["batch_size"] = c.trainer.batch_size;
    j["max_epochs"] = c.trainer.max_epochs;
    j["patience"] = c.trainer.patience;
    j["min_improvement"] = c.trainer.min_improvement;
    j["clip_norm"] = c.trainer.clip_norm;
    return j;
}

void lstm_from_json(const Json& j, SeqModelConfig& c) {
    if (j.contains("hidden_sizes")) c.hidden_sizes = j["hidden_sizes"].get<std::vector<int>>();
    if (j.contains("learning_rate")) c.trainer.learning_rate = j["learning_rate"].get<double>();
    if (j.contains("batch_size")) c.trainer.batch_size = j["batch_size"].get<int>();
    if (j.contains("max_epochs")) c.trainer.max_epochs = j["max_epochs"].get<int>();
    if (j.contains("patience")) c.trainer.patience = j["patience"].get<int>();
    if (j.contains("min_improvement"))
        c.trainer.min_improvement = j["min_improvement"].get<double>();
    if (j.contains("clip_norm")) c.trainer.clip_norm = j["clip_norm"].get<double>();
}

template <typename T>
void take(const Json& j, const char* key, T& out) {
    if (j.contains(key)) {
        out = j.at(key).get<T>();
    }
}

}  // namespace

Json ExperimentSpec::to_json() const {
    Json j;
    j["experiment"] = experiment;
    j["method"] = method;
    j["profile"] = to_string(profile);
    j["seed"] = seed;
    j["data"] = data.string();
    j["models"] = models.string();
    j["output_dir"] = output_dir.string();
    j["train_missing"] = train_missing;
    j["train_targets"] = train_targets;
    j["test_targets"] = test_targets;
    j["validation_fraction"] = validation_fraction;
    j["gammas"] = gammas;
    j["train_gammas"] = train_gammas;
    j["test_gammas"] = test_gammas;
    j["reference_gammas"] = reference_gammas;
    j["k_min"] = k_min;
    j["k_max"] = k_max;
    j["k_step"] = k_step;
    Json modes_json = Json::array();
    for (FeatureMode m : modes) {
        modes_json.push_back(to_string(m));
    }
    j["modes"] = modes_json;
    j["sample_sizes"] = sample_sizes;
    j["neighbors"] = neighbors;
    j["gamma_scale"] = gamma_scale;
    j["knn_clusters"] = knn_clusters;
    j["lstm"] = lstm_to_json(lstm);
    return j;
}

ExperimentSpec ExperimentSpec::from_json(const Json& j, ExperimentSpec s) {
    if (j.contains("profile")) {
        // A profile switch resets the profile-dependent defaults first.
        const Profile p = profile_from_string(j.at("profile").get<std::string>());
        if (p != s.profile) {
            ExperimentSpec fresh = defaults(p);
            fresh.experiment = s.experiment;
            fresh.method = s.method;
            fresh.seed = s.seed;
            fresh.data = s.data;
            fresh.models = s.models;
            fresh.output_dir = s.output_dir;
            fresh.train_missing = s.train_missing;
            s = std::move(fresh);
        }
    }
    take(j, "experiment", s.experiment);
    take(j, "method", s.method);
    take(j, "seed", s.seed);
    if (j.contains("data")) s.data = j.at("data").get<std::string>();
    if (j.contains("models")) s.models = j.at("models").get<std::string>();
    if (j.contains("output_dir")) s.output_dir = j.at("output_dir").get<std::string>();
    take(j, "train_missing", s.train_missing);
    take(j, "train_targets", s.train_targets);
    take(j, "test_targets", s.test_targets);
    take(j, "validation_fraction", s.validation_fraction);
    take(j, "gammas", s.gammas);
    take(j, "train_gammas", s.train_gammas);
    take(j, "test_gammas", s.test_gammas);
    take(j, "reference_gammas", s.reference_gammas);
    take(j, "k_min", s.k_min);
    take(j, "k_max", s.k_max);
    take(j, "k_step", s.k_step);
    if (j.contains("modes")) {
        s.modes.clear();
        for (const auto& m : j.at("modes")) {
            s.modes.push_back(feature_mode_from_string(m.get<std::string>()));
        }
    }
    take(j, "sample_sizes", s.sample_sizes);
    take(j, "neighbors", s.neighbors);
    take(j, "gamma_scale", s.gamma_scale);
    take(j, "knn_clusters", s.knn_clusters);
    if (j.contains("lstm")) {
        lstm_from_json(j.at("lstm"), s.lstm);
    }
    return s;
}

std::string ExperimentSpec::hash() const {
    Json j = to_json();
    j.erase("data");
    j.erase("models");
    j.erase("output_dir");
    j.erase("train_missing");
    return io::fnv1a_hex(j.dump());
}

std::vector<int> ExperimentSpec::k_grid(int limit) const {
    std::vector<int> ks;
    for (int k = k_min; k <= std::min(k_max, limit); k += k_step) {
        ks.push_back(k);
    }
    return ks;
}

std::vector<ResultRow> ResultTable::select(const std::string& method,
                                           std::optional<double> gamma) const {
    std::vector<ResultRow> out;
    for (const ResultRow& r : rows) {
        if (r.method == method && (!gamma || std::abs(r.gamma - *gamma) < 1e-12)) {
            out.push_back(r);
        }
    }
    return out;
}

Summary summarize(const std::vector<double>& values) {
    Summary s;
    s.count = static_cast<int>(values.size());
    if (values.empty()) {
        return s;
    }
    s.mean = std::accumulate(values.begin(), values.end(), 0.0) / s.count;
    double ss = 0.0;
    for (double v : values) {
        ss += (v - s.mean) * (v - s.mean);
    }
    s.std = std::sqrt(ss / s.count);
    return s;
}

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> tags) {
    std::vector<std::uint32_t> words{static_cast<std::uint32_t>(base),
                                     static_cast<std::uint32_t>(base >> 32)};
    for (std::uint64_t t : tags) {
        words.push_back(static_cast<std::uint32_t>(t));
        words.push_back(static_cast<std::uint32_t>(t >> 32));
    }
    std::seed_seq seq(words.begin(), words.end());
    std::array<std::uint32_t, 2> out{};
    seq.generate(out.begin(), out.end());
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

namespace {

std::string gamma_label(double g) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", g);
    std::string s = buf;
    while (s.size() > 3 && s.back() == '0') {
        s.pop_back();
    }
    return s;
}

std::uint64_t gamma_tag(double g) { return static_cast<std::uint64_t>(std::llround(g * 1e6)); }

std::vector<PulsePair> records_at(const Dataset& data, double gamma) {
    std::vector<PulsePair> out = data.at_gamma(gamma);
    if (out.empty()) {
        throw std::invalid_argument("dataset has no records at gamma " + gamma_label(gamma) +
                                    "; regenerate it with that gamma in --gammas");
    }
    return out;
}

std::vector<PulsePair> records_at(const Dataset& data, const std::vector<double>& gammas) {
    std::vector<PulsePair> out;
    for (double g : gammas) {
        const std::vector<PulsePair> part = records_at(data, g);
        out.insert(out.end(), part.begin(), part.end());
    }
    return out;
}

// First `count` distinct targets of the dataset, in target order.
Dataset first_targets(const Dataset& data, int count) {
    const std::vector<int> ids = data.target_indices();
    if (static_cast<std::size_t>(count) > ids.size()) {
        throw std::invalid_argument("dataset has " + std::to_string(ids.size()) +
                                    " targets, experiment needs " + std::to_string(count));
    }
    const std::set<int> keep(ids.begin(), ids.begin() + count);
    Dataset out;
    out.manifest = data.manifest;
    out.manifest.records_per_gamma = count;
    for (const PulsePair& r : data.records) {
        if (keep.count(r.target_index) != 0) {
            out.records.push_back(r);
        }
    }
    return out;
}

std::pair<Dataset, Dataset> train_test(const ExperimentSpec& spec, const Dataset& data) {
    return split(data, spec.train_targets, spec.test_targets, derive_seed(spec.seed, {1}));
}

const SimConfig& sim_of(const Dataset& data) { return data.manifest.config.sim; }

std::vector<double> pulse_fidelities(const std::vector<PulsePair>& records,
                                     const std::vector<ControlPulse>& pulses, double gamma,
                                     const SimConfig& sim) {
    std::vector<double> f;
    f.reserve(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        f.push_back(fidelity(propagate(pulses[i], DriftSpec{gamma}, sim), records[i].target));
    }
    return f;
}

ResultRow make_row(const ExperimentSpec& spec, const std::string& method, double gamma, int k,
                   const Summary& s) {
    return ResultRow{spec.experiment, method, gamma, k, s.mean, s.std, s.count};
}

std::string join_gammas(const std::vector<double>& gammas) {
    std::string s;
    for (std::size_t i = 0; i < gammas.size(); ++i) {
        if (i > 0) s += ",";
        s += gamma_label(gammas[i]);
    }
    return s;
}

SeqModel obtain_lstm(const ExperimentSpec& spec, const Dataset& train,
                     const std::vector<double>& gammas, bool gamma_input) {
    const std::string name = lstm_checkpoint_name(gammas, gamma_input);
    if (!spec.models.empty() && std::filesystem::exists(spec.models / name / "manifest.json")) {
        SeqModel m = load_model(spec.models / name);
        if (m.config.input_channels != (gamma_input ? 3 : 2)) {
            throw std::runtime_error("checkpoint " + (spec.models / name).string() +
                                     " has the wrong number of input channels");
        }
        return m;
    }
    if (!spec.train_missing) {
        const std::string where = spec.models.empty() ? "<models-dir>/" + name
                                                      : (spec.models / name).string();
        throw std::runtime_error(
            "no LSTM checkpoint at " + where + "; train it with `qcorr train-lstm --data " +
            (spec.data.empty() ? std::string("<data-dir>") : spec.data.string()) + " --gammas " +
            join_gammas(gammas) + (gamma_input ? " --gamma-input" : "") + " --out " + where +
            "` or rerun with --train-missing");
    }
    TrainResult trained = train_lstm_on(spec, train, gammas, gamma_input);
    if (!spec.models.empty()) {
        save_model(trained.model, spec.models / name, spec.seed, trained.report.best_epoch);
    }
    return std::move(trained.model);
}

struct KnnPipeline {
    CorrectionCodebook codebook;
    KnnClassifier classifier;
};

KnnPipeline fit_knn_pipeline(const ExperimentSpec& spec, const std::vector<PulsePair>& train,
                             bool gamma_tagged, const SimConfig& sim, std::uint64_t seed) {
    const int k = std::min(spec.knn_clusters, static_cast<int>(train.size()));
    KnnPipeline p;
    p.codebook = build_codebook(train, k, FeatureMode::Raw, seed, sim);
    p.classifier = knn_fit(train, p.codebook.labels, gamma_tagged, spec.neighbors, spec.gamma_scale);
    return p;
}

std::vector<ControlPulse> knn_predictions(const KnnPipeline& p,
                                          const std::vector<PulsePair>& records,
                                          std::optional<double> gamma, double bound) {
    std::vector<ControlPulse> out;
    out.reserve(records.size());
    for (const PulsePair& r : records) {
        out.push_back(correct(r.ncp, p.codebook, p.classifier, gamma, bound));
    }
    return out;
}

}  // namespace

std::string reference_method(const std::string& method, double gamma_train) {
    return "reference_" + method + "_g" + gamma_label(gamma_train);
}

std::string lstm_checkpoint_name(const std::vector<double>& gammas, bool gamma_input) {
    std::string s = gamma_input ? "lstm_gamma_input" : "lstm";
    for (double g : gammas) {
        s += "_g" + gamma_label(g);
    }
    return s;
}

TrainResult train_lstm_on(const ExperimentSpec& spec, const Dataset& train_set,
                          const std::vector<double>& gammas, bool gamma_input,
                          const EpochCallback& on_epoch) {
    const int targets = static_cast<int>(train_set.target_indices().size());
    const int val_targets = static_cast<int>(std::floor(spec.validation_fraction * targets));
    std::uint64_t tag = gamma_input ? 1 : 0;
    for (double g : gammas) {
        tag = tag * 1000003ULL + gamma_tag(g);
    }
    const auto [fit, val] =
        split(train_set, targets - val_targets, val_targets, derive_seed(spec.seed, {2, tag}));

    SeqModelConfig cfg = spec.lstm;
    cfg.input_channels = gamma_input ? 3 : 2;
    cfg.trainer.seed = derive_seed(spec.seed, {3, tag});
    const SeqModel init = init_model(cfg, derive_seed(spec.seed, {4, tag}));
    const std::vector<PulsePair> fit_records = records_at(fit, gammas);
    const std::vector<PulsePair> val_records =
        val_targets > 0 ? records_at(val, gammas) : std::vector<PulsePair>{};
    return qcorr::train(init, fit_records, val_records, cfg.trainer, on_epoch);
}

ResultTable run_table1(const ExperimentSpec& spec, const Dataset& data) {
    spec.validate();
    const auto [train_set, test_set] = train_test(spec, data);
    ResultTable t{spec.experiment, spec.hash(), {}};
    std::vector<ResultRow> nn_rows, dcp_rows, ncp_rows;
    for (double g : spec.gammas) {
        const std::vector<PulsePair> test = records_at(test_set, g);
        std::vector<double> f_dcp, f_ncp;
        for (const PulsePair& r : test) {
            f_dcp.push_back(r.fid_dcp_drift);
            f_ncp.push_back(r.fid_ncp_drift);
        }
        const SeqModel model = obtain_lstm(spec, train_set, {g}, false);
        const auto f_nn = pulse_fidelities(test, predict_dcps(model, test), g, sim_of(data));
        nn_rows.push_back(make_row(spec, "nnDCP_lstm", g, 0, summarize(f_nn)));
        dcp_rows.push_back(make_row(spec, "DCP_optimizer", g, 0, summarize(f_dcp)));
        ncp_rows.push_back(make_row(spec, "NCP_drift", g, 0, summarize(f_ncp)));
    }
    for (auto* rows : {&nn_rows, &dcp_rows, &ncp_rows}) {
        t.rows.insert(t.rows.end(), rows->begin(), rows->end());
    }
    return t;
}

ResultTable run_cluster_sweep(const ExperimentSpec& spec, const Dataset& data) {
    spec.validate();
    const Dataset train_set = first_targets(split(data, spec.train_targets, 0,
                                                  derive_seed(spec.seed, {1})).first,
                                            spec.train_targets);
    ResultTable t{spec.experiment, spec.hash(), {}};
    for (double g : spec.gammas) {
        const std::vector<PulsePair> train = records_at(train_set, g);
        std::vector<double> base;
        for (const PulsePair& r : train) {
            base.push_back(r.fid_ncp_drift);
        }
        t.rows.push_back(make_row(spec, "ncp_baseline", g, 0, summarize(base)));
        for (FeatureMode mode : spec.modes) {
            std::vector<std::vector<double>> features;
            features.reserve(train.size());
            for (const PulsePair& r : train) {
                features.push_back(featurize(r.ccp, mode));
            }
            for (int k : spec.k_grid(static_cast<int>(train.size()))) {
                const CorrectionCodebook cb = build_codebook_from_features(
                    train, features, k, mode,
                    derive_seed(spec.seed, {5, gamma_tag(g), static_cast<std::uint64_t>(mode),
                                            static_cast<std::uint64_t>(k)}),
                    sim_of(data));
                const auto f = corrected_fidelities(train, cb.corrections, cb.labels, sim_of(data));
                t.rows.push_back(make_row(spec, "kmeans_" + to_string(mode), g, k, summarize(f)));
            }
        }
    }
    return t;
}

ResultTable run_sample_invariance(const ExperimentSpec& spec, const Dataset& data) {
    spec.validate();
    if (spec.gammas.empty()) {
        throw std::invalid_argument("sample_invariance: spec.gammas is empty");
    }
    const double g = spec.gammas.front();
    const int smallest = *std::min_element(spec.sample_sizes.begin(), spec.sample_sizes.end());
    ResultTable t{spec.experiment, spec.hash(), {}};
    for (int size : spec.sample_sizes) {
        const std::vector<PulsePair> train = records_at(first_targets(data, size), g);
        std::vector<std::vector<double>> features;
        for (const PulsePair& r : train) {
            features.push_back(r.ccp.flat());
        }
        // One k grid for every curve, bounded by the smallest sample.
        for (int k : spec.k_grid(smallest)) {
            const CorrectionCodebook cb = build_codebook_from_features(
                train, features, k, FeatureMode::Raw,
                derive_seed(spec.seed, {6, static_cast<std::uint64_t>(size),
                                        static_cast<std::uint64_t>(k)}),
                sim_of(data));
            const auto f = corrected_fidelities(train, cb.corrections, cb.labels, sim_of(data));
            t.rows.push_back(make_row(spec, "samples_" + std::to_string(size), g, k, summarize(f)));
        }
    }
    return t;
}

ResultTable run_knn_eval(const ExperimentSpec& spec, const Dataset& data) {
    spec.validate();
    const auto [train_set, test_set] = train_test(spec, data);
    const SimConfig& sim = sim_of(data);
    ResultTable t{spec.experiment, spec.hash(), {}};
    for (double g : spec.gammas) {
        const std::vector<PulsePair> train = records_at(train_set, g);
        const std::vector<PulsePair> test = records_at(test_set, g);
        std::vector<std::vector<double>> features;
        for (const PulsePair& r : train) {
            features.push_back(r.ccp.flat());
        }
        for (int k : spec.k_grid(static_cast<int>(train.size()))) {
            const CorrectionCodebook cb = build_codebook_from_features(
                train, features, k, FeatureMode::Raw,
                derive_seed(spec.seed, {7, gamma_tag(g), static_cast<std::uint64_t>(k)}), sim);
            const auto f_train = corrected_fidelities(train, cb.corrections, cb.labels, sim);
            const KnnPipeline p{cb, knn_fit(train, cb.labels, false, spec.neighbors,
                                            spec.gamma_scale)};
            const auto f_test =
                pulse_fidelities(test, knn_predictions(p, test, std::nullopt, sim.control_bound),
                                 g, sim);
            t.rows.push_back(make_row(spec, "kmeans_train", g, k, summarize(f_train)));
            t.rows.push_back(make_row(spec, "knn_test", g, k, summarize(f_test)));
        }
    }
    return t;
}

namespace {

void append_reference_curves(const ExperimentSpec& spec, const Dataset& train_set,
                             const Dataset& test_set, const SimConfig& sim, ResultTable& t) {
    for (double g_train : spec.reference_gammas) {
        std::vector<ControlPulse> predicted;
        // NCPs do not depend on gamma, so one prediction serves every test gamma.
        const std::vector<PulsePair> test_ref = records_at(test_set, spec.test_gammas.front());
        if (spec.method == "lstm") {
            const SeqModel model = obtain_lstm(spec, train_set, {g_train}, false);
            predicted = predict_dcps(model, test_ref);
        } else {
            const KnnPipeline p = fit_knn_pipeline(spec, records_at(train_set, g_train), false, sim,
                                                   derive_seed(spec.seed, {8, gamma_tag(g_train)}));
            predicted = knn_predictions(p, test_ref, std::nullopt, sim.control_bound);
        }
        for (double g_test : spec.test_gammas) {
            const std::vector<PulsePair> test = records_at(test_set, g_test);
            if (test.size() != test_ref.size()) {
                throw std::runtime_error("test targets differ between gammas");
            }
            const auto f = pulse_fidelities(test, predicted, g_test, sim);
            t.rows.push_back(
                make_row(spec, reference_method(spec.method, g_train), g_test, 0, summarize(f)));
        }
    }
}

}  // namespace

ResultTable run_reference_points(const ExperimentSpec& spec, const Dataset& data) {
    spec.validate();
    const auto [train_set, test_set] = train_test(spec, data);
    ResultTable t{spec.experiment, spec.hash(), {}};
    append_reference_curves(spec, train_set, test_set, sim_of(data), t);
    return t;
}

ResultTable run_generalization(const ExperimentSpec& spec, const Dataset& data) {
    spec.validate();
    const auto [train_set, test_set] = train_test(spec, data);
    const SimConfig& sim = sim_of(data);
    ResultTable t{spec.experiment, spec.hash(), {}};
    const std::string method = "generalized_" + spec.method;
    if (spec.method == "lstm") {
        const SeqModel model = obtain_lstm(spec, train_set, spec.train_gammas, true);
        for (double g : spec.test_gammas) {
            const std::vector<PulsePair> test = records_at(test_set, g);
            const auto f = pulse_fidelities(test, predict_dcps(model, test), g, sim);
            t.rows.push_back(make_row(spec, method, g, 0, summarize(f)));
        }
    } else {
        std::uint64_t tag = 0;
        for (double g : spec.train_gammas) {
            tag = tag * 1000003ULL + gamma_tag(g);
        }
        const KnnPipeline p = fit_knn_pipeline(spec, records_at(train_set, spec.train_gammas), true,
                                               sim, derive_seed(spec.seed, {9, tag}));
        for (double g : spec.test_gammas) {
            const std::vector<PulsePair> test = records_at(test_set, g);
            const auto f =
                pulse_fidelities(test, knn_predictions(p, test, g, sim.control_bound), g, sim);
            t.rows.push_back(make_row(spec, method, g, p.codebook.k, summarize(f)));
        }
    }
    append_reference_curves(spec, train_set, test_set, sim, t);
    return t;
}

ResultTable run_experiment(const ExperimentSpec& spec, const Dataset& data) {
    if (spec.experiment == "table1") return run_table1(spec, data);
    if (spec.experiment == "cluster_sweep") return run_cluster_sweep(spec, data);
    if (spec.experiment == "sample_invariance") return run_sample_invariance(spec, data);
    if (spec.experiment == "knn_eval") return run_knn_eval(spec, data);
    if (spec.experiment == "reference_points") return run_reference_points(spec, data);
    if (spec.experiment == "generalization") return run_generalization(spec, data);
    throw std::invalid_argument("unknown experiment '" + spec.experiment + "'");
}

}  // namespace qcorr

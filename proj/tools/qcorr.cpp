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

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "qcorr/dataset.hpp"
#include "qcorr/geometric.hpp"
#include "qcorr/harness.hpp"
#include "qcorr/io.hpp"
#include "qcorr/pulse_opt.hpp"
#include "qcorr/seq_model.hpp"

namespace {

using namespace qcorr;

struct GlobalOptions {
    std::optional<std::uint64_t> seed;
    std::string profile = "paper";
    std::string spec_file;
};

// Flags shared by the experiment subcommands. Unset values keep the profile
// defaults; a --spec file overrides both.
struct ExperimentFlags {
    std::string data;
    std::string models;
    std::string out = "results";
    std::string method;
    std::vector<double> gammas;
    std::vector<double> train_gammas;
    std::vector<double> test_gammas;
    std::vector<double> reference_gammas;
    std::vector<std::string> modes;
    std::vector<int> sample_sizes;
    std::optional<int> train_targets;
    std::optional<int> test_targets;
    std::optional<int> k_min;
    std::optional<int> k_max;
    std::optional<int> k_step;
    std::optional<int> knn_clusters;
    std::optional<int> neighbors;
    std::optional<int> epochs;
    std::vector<int> hidden;
    bool train_missing = false;
    bool svg = true;
};

std::uint64_t resolve_seed(const GlobalOptions& g) {
    if (g.seed) {
        return *g.seed;
    }
    if (const char* env = std::getenv("QCORR_SEED"); env != nullptr && *env != '\0') {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw std::invalid_argument(std::string("QCORR_SEED is not an unsigned integer: ") + env);
        }
    }
    return 0;
}

std::string creation_stamp() {
    std::time_t t = std::time(nullptr);
    if (const char* epoch = std::getenv("SOURCE_DATE_EPOCH"); epoch != nullptr && *epoch != '\0') {
        t = static_cast<std::time_t>(std::stoll(epoch));
    }
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void add_experiment_flags(CLI::App* cmd, ExperimentFlags& f) {
    cmd->add_option("--data", f.data, "Dataset directory (from `qcorr generate`)");
    cmd->add_option("--models", f.models, "Directory of LSTM checkpoints");
    cmd->add_option("--out", f.out, "Output directory for CSV and SVG files");
    cmd->add_option("--gammas", f.gammas, "Drift strengths of the experiment")->delimiter(',');
    cmd->add_option("--train-targets", f.train_targets);
    cmd->add_option("--test-targets", f.test_targets);
    cmd->add_option("--hidden", f.hidden, "LSTM hidden sizes")->delimiter(',');
    cmd->add_option("--epochs", f.epochs, "LSTM epoch budget");
    cmd->add_flag("--train-missing", f.train_missing,
                  "Train LSTM checkpoints that are not found under --models");
    cmd->add_flag("!--no-svg", f.svg, "Write CSV only");
}

void add_sweep_flags(CLI::App* cmd, ExperimentFlags& f) {
    cmd->add_option("--k-min", f.k_min);
    cmd->add_option("--k-max", f.k_max);
    cmd->add_option("--k-step", f.k_step);
}

void add_method_flags(CLI::App* cmd, ExperimentFlags& f) {
    cmd->add_option("--method", f.method, "lstm or knn")->check(CLI::IsMember({"lstm", "knn"}));
    cmd->add_option("--train-gammas", f.train_gammas)->delimiter(',');
    cmd->add_option("--test-gammas", f.test_gammas)->delimiter(',');
    cmd->add_option("--reference-gammas", f.reference_gammas)->delimiter(',');
    cmd->add_option("--knn-clusters", f.knn_clusters);
    cmd->add_option("--neighbors", f.neighbors);
}

ExperimentSpec build_spec(const GlobalOptions& g, const ExperimentFlags& f,
                          const std::string& experiment) {
    ExperimentSpec s = ExperimentSpec::defaults(profile_from_string(g.profile));
    s.experiment = experiment;
    s.seed = resolve_seed(g);
    s.data = f.data;
    s.models = f.models;
    s.output_dir = f.out;
    s.train_missing = f.train_missing;
    if (!f.method.empty()) s.method = f.method;
    if (!f.gammas.empty()) s.gammas = f.gammas;
    if (!f.train_gammas.empty()) s.train_gammas = f.train_gammas;
    if (!f.test_gammas.empty()) s.test_gammas = f.test_gammas;
    if (!f.reference_gammas.empty()) s.reference_gammas = f.reference_gammas;
    if (!f.modes.empty()) {
        s.modes.clear();
        for (const std::string& m : f.modes) s.modes.push_back(feature_mode_from_string(m));
    }
    if (!f.sample_sizes.empty()) s.sample_sizes = f.sample_sizes;
    if (f.train_targets) s.train_targets = *f.train_targets;
    if (f.test_targets) s.test_targets = *f.test_targets;
    if (f.k_min) s.k_min = *f.k_min;
    if (f.k_max) s.k_max = *f.k_max;
    if (f.k_step) s.k_step = *f.k_step;
    if (f.knn_clusters) s.knn_clusters = *f.knn_clusters;
    if (f.neighbors) s.neighbors = *f.neighbors;
    if (f.epochs) s.lstm.trainer.max_epochs = *f.epochs;
    if (!f.hidden.empty()) s.lstm.hidden_sizes = f.hidden;
    if (!g.spec_file.empty()) {
        s = ExperimentSpec::from_json(io::read_json(g.spec_file), s);
        if (s.experiment != experiment && experiment != "any") {
            std::cerr << "note: --spec selects experiment '" << s.experiment << "'\n";
        }
    }
    if (s.data.empty()) {
        throw std::invalid_argument("no dataset given; pass --data DIR (see `qcorr generate`)");
    }
    s.validate();
    return s;
}

void run_and_report(const ExperimentSpec& spec, bool svg) {
    const Dataset data = load_dataset(spec.data);
    const ResultTable table = run_experiment(spec, data);
    const auto files =
        emit_report({table}, svg ? ReportFormat::CsvAndSvg : ReportFormat::Csv, spec.output_dir);
    // Everything needed to recompute the table: spec, dataset and checkpoints.
    io::Json run = io::Json::object();
    run["spec"] = spec.to_json();
    run["spec_hash"] = spec.hash();
    run["dataset_seed"] = data.manifest.seed;
    run["dataset_records"] = data.records.size();
    const auto manifest_path =
        spec.output_dir / (spec.experiment + "-" + spec.hash() + ".manifest.json");
    io::write_json(manifest_path, run);
    for (const auto& f : files) std::cout << f.string() << '\n';
    std::cout << manifest_path.string() << '\n';
}

Unitary parse_target(const std::vector<double>& v) {
    if (v.size() != 8) {
        throw std::invalid_argument("--target needs 8 numbers: re/im of u00, u01, u10, u11");
    }
    Unitary u;
    for (int i = 0; i < 4; ++i) u.m[i] = Complex(v[2 * i], v[2 * i + 1]);
    if (u.unitarity_error() > 1e-8) {
        throw std::invalid_argument("--target is not unitary (error " +
                                    std::to_string(u.unitarity_error()) + ")");
    }
    return u;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qcorr: drift-correcting control pulses for a single qubit"};
    app.require_subcommand(1);
    app.fallthrough();
    GlobalOptions global;
    app.add_option("--seed", global.seed, "Base seed (default: $QCORR_SEED, else 0)");
    app.add_option("--profile", global.profile, "paper or ci")
        ->check(CLI::IsMember({"paper", "ci"}));
    app.add_option("--spec", global.spec_file, "JSON experiment spec; overrides flags")
        ->check(CLI::ExistingFile);

    // generate
    auto* gen = app.add_subcommand("generate", "Generate an (NCP, DCP) dataset");
    int gen_count = 0;
    std::vector<double> gen_gammas;
    std::string gen_out;
    int gen_threads = 1;
    gen->add_option("--count", gen_count, "Number of Haar targets")->required();
    gen->add_option("--gammas", gen_gammas, "Drift strengths")->required()->delimiter(',');
    gen->add_option("--out", gen_out, "Output directory")->required();
    gen->add_option("--threads", gen_threads, "Worker threads");

    // optimize
    auto* opt = app.add_subcommand("optimize", "Optimize one pulse and print it as JSON");
    double opt_gamma = 0.0;
    std::vector<double> opt_target;
    opt->add_option("--gamma", opt_gamma, "Drift strength");
    opt->add_option("--target", opt_target, "8 reals, row-major re/im; default: Haar draw")
        ->delimiter(',');

    // cluster
    auto* cluster = app.add_subcommand("cluster", "Build a correction codebook, or sweep k");
    ExperimentFlags cluster_flags;
    add_experiment_flags(cluster, cluster_flags);
    add_sweep_flags(cluster, cluster_flags);
    cluster->add_option("--modes", cluster_flags.modes, "raw,sine,poly3,poly4")->delimiter(',');
    cluster->add_option("--sample-sizes", cluster_flags.sample_sizes)->delimiter(',');
    bool cluster_samples = false;
    cluster->add_flag("--sample-invariance", cluster_samples,
                      "Compare curves over the first N targets for each --sample-sizes N");
    std::optional<int> cluster_k;
    std::string cluster_save;
    cluster->add_option("--k", cluster_k, "Build one codebook at this k instead of sweeping");
    cluster->add_option("--save", cluster_save, "Directory for the single codebook");

    // knn
    auto* knn = app.add_subcommand("knn", "Evaluate kNN dispatch of codebook corrections");
    ExperimentFlags knn_flags;
    add_experiment_flags(knn, knn_flags);
    add_sweep_flags(knn, knn_flags);
    knn->add_option("--neighbors", knn_flags.neighbors);

    // train-lstm
    auto* tl = app.add_subcommand("train-lstm", "Train and save an LSTM checkpoint");
    ExperimentFlags tl_flags;
    add_experiment_flags(tl, tl_flags);
    bool tl_gamma_input = false;
    tl->add_flag("--gamma-input", tl_gamma_input, "Append gamma to every time slot");

    // reference / generalize / report
    auto* ref = app.add_subcommand("reference", "Reference-point curves over test gammas");
    ExperimentFlags ref_flags;
    add_experiment_flags(ref, ref_flags);
    add_method_flags(ref, ref_flags);

    auto* gen_cmd = app.add_subcommand("generalize", "Gamma-aware model vs reference points");
    ExperimentFlags genz_flags;
    add_experiment_flags(gen_cmd, genz_flags);
    add_method_flags(gen_cmd, genz_flags);

    auto* report = app.add_subcommand("report", "Run any experiment and write CSV/SVG");
    ExperimentFlags report_flags;
    std::string report_experiment = "table1";
    add_experiment_flags(report, report_flags);
    add_sweep_flags(report, report_flags);
    add_method_flags(report, report_flags);
    report->add_option("--experiment", report_experiment)
        ->check(CLI::IsMember({"table1", "cluster_sweep", "sample_invariance", "knn_eval",
                               "reference_points", "generalization"}));
    report->add_option("--modes", report_flags.modes)->delimiter(',');
    report->add_option("--sample-sizes", report_flags.sample_sizes)->delimiter(',');

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            GenerationConfig cfg;
            const Dataset d = generate_dataset(gen_count, gen_gammas, resolve_seed(global), cfg,
                                               creation_stamp(), gen_threads);
            save_dataset(d, gen_out);
            int unconverged = 0;
            for (const PulsePair& r : d.records) unconverged += r.dcp_converged ? 0 : 1;
            std::cout << "wrote " << d.records.size() << " records to " << gen_out << " ("
                      << unconverged << " unconverged DCP runs kept and flagged)\n";
        } else if (opt->parsed()) {
            Rng rng(resolve_seed(global));
            const Unitary target =
                opt_target.empty() ? haar_random_unitary(rng) : parse_target(opt_target);
            const OptResult r = optimize_pulse(target, DriftSpec{opt_gamma}, SimConfig{},
                                               OptimizerConfig::for_gamma(opt_gamma), rng);
            io::Json j;
            j["target"] = io::to_json(target);
            j["gamma"] = opt_gamma;
            j["pulse"] = io::to_json(r.pulse);
            j["fidelity"] = r.fidelity;
            j["iterations"] = r.iterations;
            j["converged"] = r.converged;
            std::cout << j.dump(2) << '\n';
        } else if (cluster->parsed()) {
            if (cluster_k) {
                const ExperimentSpec s = build_spec(global, cluster_flags, "cluster_sweep");
                const Dataset d = load_dataset(s.data);
                const double g = s.gammas.front();
                const auto train =
                    split(d, s.train_targets, 0, derive_seed(s.seed, {1})).first.at_gamma(g);
                const FeatureMode mode = s.modes.front();
                const CorrectionCodebook cb =
                    build_codebook(train, *cluster_k, mode, s.seed, d.manifest.config.sim);
                std::cout << "gamma " << g << " mode " << to_string(mode) << " k " << cb.k
                          << " sop " << cb.sop << " empty clusters " << cb.empty_clusters.size()
                          << '\n';
                if (!cluster_save.empty()) save_codebook(cb, cluster_save);
            } else {
                const ExperimentSpec s = build_spec(
                    global, cluster_flags, cluster_samples ? "sample_invariance" : "cluster_sweep");
                run_and_report(s, cluster_flags.svg);
            }
        } else if (knn->parsed()) {
            run_and_report(build_spec(global, knn_flags, "knn_eval"), knn_flags.svg);
        } else if (tl->parsed()) {
            if (tl_flags.models.empty()) {
                throw std::invalid_argument("train-lstm needs --models DIR for the checkpoint");
            }
            const ExperimentSpec s = build_spec(global, tl_flags, "table1");
            const Dataset d = load_dataset(s.data);
            const auto train_set = split(d, s.train_targets, s.test_targets,
                                         derive_seed(s.seed, {1})).first;
            const std::vector<double> gammas = tl_gamma_input ? s.train_gammas : s.gammas;
            for (const auto& group : tl_gamma_input ? std::vector<std::vector<double>>{gammas}
                                                    : [&] {
                                                          std::vector<std::vector<double>> v;
                                                          for (double g : gammas) v.push_back({g});
                                                          return v;
                                                      }()) {
                const TrainResult r = train_lstm_on(
                    s, train_set, group, tl_gamma_input, [](int epoch, double tr, double val) {
                        std::cerr << "epoch " << epoch << " train " << tr << " validation " << val
                                  << '\n';
                    });
                const auto dir = s.models / lstm_checkpoint_name(group, tl_gamma_input);
                save_model(r.model, dir, s.seed, r.report.best_epoch);
                std::cout << dir.string() << ": best epoch " << r.report.best_epoch << " of "
                          << r.report.final_epoch << ", validation mse "
                          << r.report.validation_mse[r.report.best_epoch - 1] << '\n';
            }
        } else if (ref->parsed()) {
            run_and_report(build_spec(global, ref_flags, "reference_points"), ref_flags.svg);
        } else if (gen_cmd->parsed()) {
            run_and_report(build_spec(global, genz_flags, "generalization"), genz_flags.svg);
        } else if (report->parsed()) {
            run_and_report(build_spec(global, report_flags, report_experiment), report_flags.svg);
        }
    } catch (const std::exception& e) {
        std::cerr << "qcorr: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

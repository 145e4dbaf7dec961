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

// Acceptance gate. Prints one PASS/FAIL line per criterion and exits non-zero
// when any selected criterion fails.

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>

#include "qcorr/dataset.hpp"
#include "qcorr/geometric.hpp"
#include "qcorr/harness.hpp"
#include "qcorr/io.hpp"
#include "qcorr/pulse_opt.hpp"
#include "qcorr/seq_model.hpp"

namespace {

using namespace qcorr;
namespace fs = std::filesystem;

constexpr std::uint64_t kPaperSeed = 2026;
constexpr int kPaperTargets = 5000;
const std::vector<double> kAllGammas{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
const std::vector<double> kTableGammas{0.2, 0.4, 0.6, 0.8};

struct Outcome {
    bool pass = false;
    std::string detail;
};

struct Context {
    fs::path cache;
    fs::path cli;
};

class Stopwatch {
public:
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    std::chrono::steady_clock::time_point t0_ = std::chrono::steady_clock::now();
};

std::string fmt(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string sci(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2e", v);
    return buf;
}

double row_value(const ResultTable& t, const std::string& method, double gamma, int k = -1) {
    for (const ResultRow& r : t.select(method, gamma)) {
        if (k < 0 || r.k_or_epoch == k) return r.mean_fidelity;
    }
    throw std::runtime_error("missing row " + method + " at gamma " + fmt(gamma, 2));
}

// 5000 Haar targets at every gamma in 0.1..0.9, generated once per cache.
const Dataset& paper_dataset(const Context& ctx) {
    static std::optional<Dataset> data;
    if (!data) {
        const fs::path dir = ctx.cache / "paper_dataset";
        if (fs::exists(dir / "manifest.json")) {
            data = load_dataset(dir);
        } else {
            std::cerr << "generating full-scale dataset in " << dir << '\n';
            data = generate_dataset(kPaperTargets, kAllGammas, kPaperSeed, GenerationConfig{},
                                    "acceptance");
            save_dataset(*data, dir);
        }
    }
    return *data;
}

// 200 Haar targets at gammas 0.2/0.4/0.6/0.8; cheap enough to regenerate.
const Dataset& small_dataset() {
    static const Dataset data =
        generate_dataset(200, kTableGammas, kPaperSeed + 1, GenerationConfig{}, "acceptance");
    return data;
}

ExperimentSpec paper_spec(const Context& ctx, const std::string& experiment) {
    ExperimentSpec s = ExperimentSpec::defaults(Profile::Paper);
    s.experiment = experiment;
    s.seed = kPaperSeed;
    s.data = ctx.cache / "paper_dataset";
    s.models = ctx.cache / "models";
    s.train_missing = true;
    return s;
}

// Trains a missing checkpoint the same way the experiments would, but with
// epoch progress on stderr; full-size models take hours.
void ensure_lstm(const ExperimentSpec& s, const Dataset& data, const std::vector<double>& gammas,
                 bool gamma_input) {
    const std::filesystem::path dir = s.models / lstm_checkpoint_name(gammas, gamma_input);
    if (std::filesystem::exists(dir / "manifest.json")) return;
    const Dataset train_set =
        split(data, s.train_targets, s.test_targets, derive_seed(s.seed, {1})).first;
    std::cerr << "training " << dir.filename().string() << '\n';
    Stopwatch sw;
    TrainResult r = train_lstm_on(s, train_set, gammas, gamma_input,
                                  [&](int epoch, double train_mse, double val_mse) {
                                      std::fprintf(stderr, "  epoch %d train %.5f val %.5f %.1f min\n",
                                                   epoch, train_mse, val_mse, sw.seconds() / 60.0);
                                  });
    save_model(r.model, dir, s.seed, r.report.best_epoch);
}

Outcome physics_oracle(const Context&) {
    Stopwatch sw;
    Rng rng(1);
    double worst_fid = 0.0, worst_unitary = 0.0;
    std::uniform_real_distribution<double> amp(-1.0, 1.0);
    const SimConfig cfg;
    for (int i = 0; i < 1000; ++i) {
        const Unitary x = haar_random_unitary(rng), y = haar_random_unitary(rng);
        const double trace_form = std::norm((y.adjoint() * x).trace()) / 4.0;
        const double super_form = superoperator_fidelity(superoperator(x), superoperator(y));
        worst_fid = std::max(worst_fid, std::abs(trace_form - super_form));
        ControlPulse p(cfg.slot_count);
        for (double& v : p.flat()) v = amp(rng);
        worst_unitary = std::max(worst_unitary,
                                 propagate(p, DriftSpec{0.9 * amp(rng) * amp(rng) + 0.9}, cfg)
                                     .unitarity_error());
    }
    const double t = sw.seconds();
    return {worst_fid <= 1e-12 && worst_unitary <= 1e-10 && t < 1.0,
            "max |F_super - F_trace| = " + sci(worst_fid) +
                ", max unitarity error = " + sci(worst_unitary) + ", " + fmt(t, 3) +
                " s"};
}

Outcome optimizer_quality(const Context&) {
    Stopwatch sw;
    const Dataset& d = small_dataset();
    std::map<double, double> dcp;
    double ncp = 0.0;
    for (double g : kTableGammas) {
        const auto recs = d.at_gamma(g);
        double s = 0.0;
        for (const PulsePair& r : recs) s += r.fid_dcp_drift;
        dcp[g] = s / recs.size();
        if (g == kTableGammas.front()) {
            for (const PulsePair& r : recs) ncp += r.fid_ncp_nodrift;
            ncp /= recs.size();
        }
    }
    const double t = sw.seconds();
    const bool pass = ncp >= 0.999 && dcp[0.2] >= 0.99 && dcp[0.4] >= 0.99 && dcp[0.6] >= 0.99 &&
                      dcp[0.8] >= 0.97 && t < 120.0;
    return {pass, "NCP(0) " + fmt(ncp, 5) + ", DCP " + fmt(dcp[0.2], 5) + "/" + fmt(dcp[0.4], 5) +
                      "/" + fmt(dcp[0.6], 5) + "/" + fmt(dcp[0.8], 5) + ", " + fmt(t, 1) + " s"};
}

Outcome ncp_drift_row(const Context&) {
    const double want[] = {0.903, 0.657, 0.372, 0.165};
    bool pass = true;
    std::string detail;
    for (std::size_t i = 0; i < kTableGammas.size(); ++i) {
        const auto recs = small_dataset().at_gamma(kTableGammas[i]);
        double s = 0.0;
        for (const PulsePair& r : recs) s += r.fid_ncp_drift;
        const double mean = s / recs.size();
        pass = pass && std::abs(mean - want[i]) <= 0.05;
        detail += (i ? "/" : "") + fmt(mean, 3);
    }
    return {pass, "NCP on drift " + detail + " vs .903/.657/.372/.165 (+-0.05)"};
}

Outcome gradient_gates(const Context&) {
    Stopwatch sw;
    Rng rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const SimConfig cfg;
    double worst_pulse = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        ControlPulse p(16);
        for (double& v : p.flat()) v = 0.95 * u(rng);
        const Unitary target = haar_random_unitary(rng);
        const DriftSpec drift{0.5 * (u(rng) + 1.0)};
        const ControlPulse g = fidelity_gradient(p, target, drift, cfg);
        for (std::size_t i = 0; i < p.flat().size(); ++i) {
            ControlPulse up = p, down = p;
            up.flat()[i] += 1e-6;
            down.flat()[i] -= 1e-6;
            const double fd = (fidelity(propagate(up, drift, cfg), target) -
                               fidelity(propagate(down, drift, cfg), target)) /
                              2e-6;
            worst_pulse = std::max(worst_pulse,
                                   std::abs(g.flat()[i] - fd) / std::max(std::abs(fd), 1e-4));
        }
    }

    double worst_lstm = 0.0;
    for (int channels : {2, 3}) {
        SeqModelConfig mc;
        mc.input_channels = channels;
        mc.hidden_sizes = {3, 4};
        SeqModel m = init_model(mc, 7);
        Eigen::VectorXd flat = m.flatten();
        for (Eigen::Index i = 0; i < flat.size(); ++i) flat[i] = 0.7 * u(rng);
        m.unflatten(flat);
        SequenceBatch x(3, 8, channels), y(3, 8, 2);
        for (double& v : x.values) v = u(rng);
        for (double& v : y.values) v = 0.9 * u(rng);
        const Eigen::VectorXd g = loss_and_grad(m, x, y).gradient.flatten();
        for (Eigen::Index i = 0; i < flat.size(); ++i) {
            Eigen::VectorXd up = flat, down = flat;
            up[i] += 1e-6;
            down[i] -= 1e-6;
            SeqModel mu = m, md = m;
            mu.unflatten(up);
            md.unflatten(down);
            const double fd = (loss_and_grad(mu, x, y).mse - loss_and_grad(md, x, y).mse) / 2e-6;
            worst_lstm = std::max(worst_lstm, std::abs(g[i] - fd) / std::max(std::abs(fd), 1e-4));
        }
    }
    const double t = sw.seconds();
    return {worst_pulse < 1e-5 && worst_lstm < 1e-4 && t < 10.0,
            "pulse rel err " + sci(worst_pulse) + ", recurrent rel err " +
                sci(worst_lstm) + ", " + fmt(t, 2) + " s"};
}

Outcome codebook_efficacy(const Context&) {
    Stopwatch sw;
    ExperimentSpec s = ExperimentSpec::defaults(Profile::Ci);
    s.experiment = "cluster_sweep";
    s.seed = kPaperSeed;
    const ResultTable t = run_cluster_sweep(s, small_dataset());
    bool pass = true;
    std::string detail;
    for (double g : kTableGammas) {
        const double base = row_value(t, "ncp_baseline", g);
        double best_gain = -1.0;
        int k_last = 0;
        for (FeatureMode m : s.modes) {
            double gain = -1.0;
            for (const ResultRow& r : t.select("kmeans_" + to_string(m), g)) {
                gain = std::max(gain, r.mean_fidelity - base);
                k_last = r.k_or_epoch;
            }
            pass = pass && gain >= 0.03;
            best_gain = std::max(best_gain, gain);
        }
        const double raw = row_value(t, "kmeans_raw", g, k_last);
        for (FeatureMode m : {FeatureMode::Sine, FeatureMode::Poly3, FeatureMode::Poly4}) {
            pass = pass && raw >= row_value(t, "kmeans_" + to_string(m), g, k_last);
        }
        detail += "g=" + fmt(g, 1) + ": base " + fmt(base, 3) + ", raw@k" +
                  std::to_string(k_last) + " " + fmt(raw, 3) + "; ";
    }
    const double secs = sw.seconds();
    return {pass && secs < 300.0, detail + fmt(secs, 1) + " s"};
}

Outcome sample_invariance(const Context& ctx) {
    ExperimentSpec s = paper_spec(ctx, "sample_invariance");
    s.gammas = {0.8};
    s.sample_sizes = {1000, 5000};
    const ResultTable t = run_sample_invariance(s, paper_dataset(ctx));
    const auto a = t.select("samples_1000"), b = t.select("samples_5000");
    double gap = 0.0;
    int worst_k = 0;
    bool same_grid = a.size() == b.size() && !a.empty();
    for (std::size_t i = 0; same_grid && i < a.size(); ++i) {
        same_grid = a[i].k_or_epoch == b[i].k_or_epoch;
        const double d = std::abs(a[i].mean_fidelity - b[i].mean_fidelity);
        if (d > gap) {
            gap = d;
            worst_k = a[i].k_or_epoch;
        }
    }
    return {same_grid && gap < 0.05, "max gap " + fmt(gap) + " at k=" + std::to_string(worst_k) +
                                         " over " + std::to_string(a.size()) + " k values"};
}

Outcome knn_transfer(const Context& ctx) {
    ExperimentSpec s = paper_spec(ctx, "knn_eval");
    s.gammas = {0.2, 0.4, 0.6};
    const ResultTable t = run_knn_eval(s, paper_dataset(ctx));
    bool pass = true;
    std::string detail;
    for (double g : s.gammas) {
        const auto train = t.select("kmeans_train", g), test = t.select("knn_test", g);
        double gap = 0.0;
        int worst_k = 0;
        for (std::size_t i = 0; i < train.size(); ++i) {
            const double d = std::abs(train[i].mean_fidelity - test[i].mean_fidelity);
            if (d > gap) {
                gap = d;
                worst_k = train[i].k_or_epoch;
            }
        }
        pass = pass && gap < 0.05 && !train.empty();
        detail += "g=" + fmt(g, 1) + " max gap " + fmt(gap) + " (k=" + std::to_string(worst_k) +
                  "); ";
    }
    return {pass, detail};
}

Outcome lstm_efficiency(const Context& ctx) {
    ExperimentSpec s = paper_spec(ctx, "table1");
    s.gammas = {0.2, 0.8};
    Stopwatch sw;
    for (double g : s.gammas) ensure_lstm(s, paper_dataset(ctx), {g}, false);
    const ResultTable t = run_table1(s, paper_dataset(ctx));
    const double f2 = row_value(t, "nnDCP_lstm", 0.2), f8 = row_value(t, "nnDCP_lstm", 0.8);
    return {f2 >= 0.97 && f8 >= 0.90,
            "nnDCP " + fmt(f2) + " at 0.2 (>= 0.97), " + fmt(f8) + " at 0.8 (>= 0.90), " +
                fmt(sw.seconds() / 60.0, 1) + " min"};
}

// Interior points need both neighbours lower; the first grid point only its right one.
bool local_max_at(const std::vector<ResultRow>& curve, double gamma) {
    for (std::size_t i = 0; i < curve.size(); ++i) {
        if (std::abs(curve[i].gamma - gamma) > 1e-9) continue;
        const double v = curve[i].mean_fidelity;
        const bool left = i == 0 || curve[i - 1].mean_fidelity < v;
        const bool right = i + 1 == curve.size() || curve[i + 1].mean_fidelity < v;
        return left && right;
    }
    return false;
}

Outcome generalization_ordering(const Context& ctx) {
    Stopwatch sw;
    ExperimentSpec s = paper_spec(ctx, "generalization");
    s.reference_gammas = {0.5};
    s.method = "lstm";
    ensure_lstm(s, paper_dataset(ctx), s.train_gammas, true);
    for (double g : s.reference_gammas) ensure_lstm(s, paper_dataset(ctx), {g}, false);
    const ResultTable lstm = run_generalization(s, paper_dataset(ctx));
    s.method = "knn";
    const ResultTable knn = run_generalization(s, paper_dataset(ctx));

    const std::string lref = reference_method("lstm", 0.5), kref = reference_method("knn", 0.5);
    bool pass = true;
    std::string detail;
    for (double g : {0.4, 0.6}) {
        const double lg = row_value(lstm, "generalized_lstm", g), lr = row_value(lstm, lref, g);
        const double kg = row_value(knn, "generalized_knn", g), kr = row_value(knn, kref, g);
        pass = pass && lg > lr && kg <= kr + 0.01;
        detail += "g=" + fmt(g, 1) + ": lstm " + fmt(lg, 3) + " vs ref " + fmt(lr, 3) + ", knn " +
                  fmt(kg, 3) + " vs ref " + fmt(kr, 3) + "; ";
    }
    const auto curve = knn.select("generalized_knn");
    bool maxima = true;
    for (double g : s.train_gammas) maxima = maxima && local_max_at(curve, g);
    pass = pass && maxima;
    detail += std::string("knn local maxima at 0.1/0.3/0.5: ") + (maxima ? "yes" : "no") + ", " +
              fmt(sw.seconds() / 60.0, 1) + " min";
    return {pass, detail};
}

std::string run_capture(const std::string& cmd) {
    std::FILE* pipe = popen(cmd.c_str(), "r");
    if (pipe == nullptr) throw std::runtime_error("cannot run " + cmd);
    std::string out;
    char buf[4096];
    while (std::fgets(buf, sizeof buf, pipe) != nullptr) out += buf;
    if (pclose(pipe) != 0) throw std::runtime_error("command failed: " + cmd);
    return out;
}

Outcome determinism(const Context& ctx) {
    if (ctx.cli.empty()) {
        return {false, "no --cli given"};
    }
    const fs::path root = ctx.cache / "determinism";
    fs::remove_all(root);
    const std::string cli = ctx.cli.string() + " --profile ci --seed 77 ";
    const std::string data = (root / "data").string();
    run_capture(cli + "generate --count 40 --gammas 0.2,0.4,0.6,0.8 --out " + data);
    const std::vector<std::string> commands{
        "report --experiment table1 --train-targets 24 --test-targets 16 --hidden 8 --epochs 3 "
        "--train-missing",
        "cluster --train-targets 40 --test-targets 0 --k-step 10",
        "knn --train-targets 24 --test-targets 16 --k-step 5",
        "reference --method knn --train-targets 24 --test-targets 16 --knn-clusters 10 "
        "--test-gammas 0.2,0.4,0.6,0.8 --reference-gammas 0.4",
        "generalize --method lstm --train-targets 24 --test-targets 16 --hidden 8 --epochs 3 "
        "--train-missing --train-gammas 0.2,0.6 --test-gammas 0.2,0.4,0.6,0.8 "
        "--reference-gammas 0.4"};
    int compared = 0;
    for (std::size_t i = 0; i < commands.size(); ++i) {
        std::string outputs[2];
        for (int rep = 0; rep < 2; ++rep) {
            const fs::path out = root / ("run" + std::to_string(i) + "_" + std::to_string(rep));
            const std::string listing =
                run_capture(cli + commands[i] + " --no-svg --data " + data + " --models " +
                            (out / "models").string() + " --out " + out.string());
            std::istringstream lines(listing);
            for (std::string line; std::getline(lines, line);) {
                if (line.size() > 4 && line.substr(line.size() - 4) == ".csv") {
                    outputs[rep] += io::read_text(line);
                    ++compared;
                }
            }
        }
        if (outputs[0].empty() || outputs[0] != outputs[1]) {
            return {false, "CSV differs between reruns of `" + commands[i] + "`"};
        }
    }
    return {true, std::to_string(compared / 2) + " CSV files byte-identical across reruns"};
}

struct Criterion {
    int id;
    std::string name;
    std::function<Outcome(const Context&)> run;
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qcorr acceptance criteria"};
    Context ctx;
    std::string cache = "acceptance_cache";
    std::string cli;
    std::vector<int> only;
    app.add_option("--cache", cache, "Directory for cached datasets and checkpoints");
    app.add_option("--cli", cli, "Path of the qcorr executable");
    app.add_option("--only", only, "Criteria to run")->delimiter(',');
    CLI11_PARSE(app, argc, argv);
    ctx.cache = cache;
    ctx.cli = cli;
    fs::create_directories(ctx.cache);

    const std::vector<Criterion> criteria{
        {1, "physics oracle", physics_oracle},
        {2, "optimizer quality [paper]", optimizer_quality},
        {3, "NCP-on-drift row", ncp_drift_row},
        {4, "gradient gates", gradient_gates},
        {5, "codebook efficacy [ci]", codebook_efficacy},
        {6, "sample invariance", sample_invariance},
        {7, "kNN transfer", knn_transfer},
        {8, "LSTM efficiency [paper]", lstm_efficiency},
        {9, "generalization ordering [paper]", generalization_ordering},
        {10, "determinism", determinism},
    };
    const std::set<int> selected(only.begin(), only.end());
    int failures = 0;
    for (const Criterion& c : criteria) {
        if (!selected.empty() && selected.count(c.id) == 0) continue;
        Outcome o;
        try {
            o = c.run(ctx);
        } catch (const std::exception& e) {
            o = {false, std::string("error: ") + e.what()};
        }
        failures += o.pass ? 0 : 1;
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << c.id << ". " << c.name << ": "
                  << o.detail << std::endl;
    }
    return failures == 0 ? 0 : 1;
}

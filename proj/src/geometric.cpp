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

#include "qcorr/geometric.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <numeric>
#include <stdexcept>

#include "qcorr/io.hpp"

namespace qcorr {

using io::Json;

std::string to_string(FeatureMode mode) {
    switch (mode) {
        case FeatureMode::Raw: return "raw";
        case FeatureMode::Sine: return "sine";
        case FeatureMode::Poly3: return "poly3";
        case FeatureMode::Poly4: return "poly4";
    }
    return "raw";
}

FeatureMode feature_mode_from_string(const std::string& name) {
    if (name == "raw") return FeatureMode::Raw;
    if (name == "sine") return FeatureMode::Sine;
    if (name == "poly3") return FeatureMode::Poly3;
    if (name == "poly4") return FeatureMode::Poly4;
    throw std::invalid_argument("unknown feature mode '" + name +
                                "' (expected raw, sine, poly3 or poly4)");
}

std::vector<double> fit_poly(std::span<const double> channel, int degree) {
    if (degree != 3 && degree != 4) {
        throw std::invalid_argument("fit_poly: degree must be 3 or 4");
    }
    const auto n = static_cast<Eigen::Index>(channel.size());
    if (n <= degree) {
        throw std::invalid_argument("fit_poly: need more samples than the degree");
    }
    Eigen::MatrixXd vander(n, degree + 1);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = static_cast<double>(i);
        double power = 1.0;
        for (int p = degree; p >= 0; --p) {
            vander(i, p) = power;
            power *= x;
        }
        y(i) = channel[static_cast<std::size_t>(i)];
    }
    const Eigen::VectorXd coef = vander.colPivHouseholderQr().solve(y);
    return {coef.data(), coef.data() + coef.size()};
}

double SinusoidFit::operator()(double x) const {
    return a * std::sin(b * x + c) + d * std::sin(e * x + f) + g;
}

namespace {

constexpr int kFrequencyGrid = 64;
constexpr int kRefinePasses = 3;

Eigen::MatrixXd sinusoid_design(int n, double b, double e) {
    Eigen::MatrixXd m(n, 5);
    for (int i = 0; i < n; ++i) {
        const double x = i;
        m(i, 0) = std::sin(b * x);
        m(i, 1) = std::cos(b * x);
        m(i, 2) = std::sin(e * x);
        m(i, 3) = std::cos(e * x);
        m(i, 4) = 1.0;
    }
    return m;
}

// Orthonormal bases of the design column spaces for every grid node with
// b <= e, cached per sample count.
const std::vector<Eigen::MatrixXd>& grid_bases(int n) {
    static std::mutex mu;
    static std::map<int, std::vector<Eigen::MatrixXd>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(n);
    if (it != cache.end()) {
        return it->second;
    }
    std::vector<Eigen::MatrixXd> bases;
    bases.reserve(kFrequencyGrid * (kFrequencyGrid + 1) / 2);
    const double step = std::numbers::pi / (kFrequencyGrid - 1);
    for (int i = 0; i < kFrequencyGrid; ++i) {
        for (int j = i; j < kFrequencyGrid; ++j) {
            const Eigen::MatrixXd design = sinusoid_design(n, i * step, j * step);
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
            qr.setThreshold(1e-10);
            const Eigen::Index rank = qr.rank();
            Eigen::MatrixXd q = qr.householderQ();
            bases.push_back(q.leftCols(rank));
        }
    }
    return cache.emplace(n, std::move(bases)).first->second;
}

struct LinearPart {
    Eigen::VectorXd coef;
    double residual = 0.0;
};

LinearPart solve_linear(const Eigen::VectorXd& y, double b, double e) {
    const Eigen::MatrixXd design = sinusoid_design(static_cast<int>(y.size()), b, e);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(design);
    cod.setThreshold(1e-10);
    LinearPart out;
    out.coef = cod.solve(y);
    out.residual = (design * out.coef - y).squaredNorm();
    return out;
}

// Golden-section search for the frequency minimizing the residual with the
// other frequency held fixed.
double refine_frequency(const Eigen::VectorXd& y, double centre, double other, bool first,
                        double half_width) {
    const double lo0 = std::max(0.0, centre - half_width);
    const double hi0 = std::min(std::numbers::pi, centre + half_width);
    auto cost = [&](double w) {
        return first ? solve_linear(y, w, other).residual : solve_linear(y, other, w).residual;
    };
    const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = lo0;
    double hi = hi0;
    double x1 = hi - ratio * (hi - lo);
    double x2 = lo + ratio * (hi - lo);
    double f1 = cost(x1);
    double f2 = cost(x2);
    for (int it = 0; it < 40; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = cost(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = cost(x2);
        }
    }
    const double mid = 0.5 * (lo + hi);
    // Never accept a refinement that is worse than where we started.
    return cost(mid) <= cost(centre) ? mid : centre;
}

}  // namespace

SinusoidFit fit_sinusoid(std::span<const double> channel) {
    const int n = static_cast<int>(channel.size());
    if (n < 7) {
        throw std::invalid_argument("fit_sinusoid: need at least 7 samples");
    }
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) {
        y(i) = channel[static_cast<std::size_t>(i)];
    }
    const double mean = y.mean();
    if ((y.array() - mean).abs().maxCoeff() < 1e-12) {
        SinusoidFit flat;
        flat.g = mean;
        return flat;
    }

    const auto& bases = grid_bases(n);
    const double step = std::numbers::pi / (kFrequencyGrid - 1);
    const double total = y.squaredNorm();
    double best = std::numeric_limits<double>::infinity();
    double best_b = 0.0;
    double best_e = 0.0;
    std::size_t idx = 0;
    for (int i = 0; i < kFrequencyGrid; ++i) {
        for (int j = i; j < kFrequencyGrid; ++j, ++idx) {
            const double residual = total - (bases[idx].transpose() * y).squaredNorm();
            if (residual < best - 1e-14) {
                best = residual;
                best_b = i * step;
                best_e = j * step;
            }
        }
    }

    double b = best_b;
    double e = best_e;
    for (int pass = 0; pass < kRefinePasses; ++pass) {
        b = refine_frequency(y, b, e, true, step);
        e = refine_frequency(y, e, b, false, step);
    }

    const LinearPart lin = solve_linear(y, b, e);
    SinusoidFit fit;
    fit.a = std::hypot(lin.coef(0), lin.coef(1));
    fit.b = b;
    fit.c = std::atan2(lin.coef(1), lin.coef(0));
    fit.d = std::hypot(lin.coef(2), lin.coef(3));
    fit.e = e;
    fit.f = std::atan2(lin.coef(3), lin.coef(2));
    fit.g = lin.coef(4);
    if (fit.a < fit.d) {
        std::swap(fit.a, fit.d);
        std::swap(fit.b, fit.e);
        std::swap(fit.c, fit.f);
    }
    return fit;
}

std::vector<double> featurize(const ControlPulse& ccp, FeatureMode mode) {
    if (mode == FeatureMode::Raw) {
        return ccp.flat();
    }
    std::vector<double> out;
    for (int ch = 0; ch < ControlPulse::kChannels; ++ch) {
        const std::vector<double> values = ccp.channel(ch);
        if (mode == FeatureMode::Sine) {
            const auto coef = fit_sinusoid(values).coefficients();
            out.insert(out.end(), coef.begin(), coef.end());
        } else {
            const auto coef = fit_poly(values, mode == FeatureMode::Poly3 ? 3 : 4);
            out.insert(out.end(), coef.begin(), coef.end());
        }
    }
    return out;
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

RowMatrix to_matrix(const std::vector<std::vector<double>>& rows) {
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto d = static_cast<Eigen::Index>(rows.front().size());
    RowMatrix m(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        if (static_cast<Eigen::Index>(rows[i].size()) != d) {
            throw std::invalid_argument("kmeans: feature vectors differ in length");
        }
        m.row(i) = Eigen::Map<const Eigen::RowVectorXd>(rows[i].data(), d);
    }
    return m;
}

// Nearest centroid of every point via ||x||^2 - 2 x.c + ||c||^2, in row
// chunks. Returns the within-cluster sum of squares, recomputed exactly.
double assign(const RowMatrix& x, const RowMatrix& centroids, std::vector<int>& labels) {
    constexpr Eigen::Index kChunk = 1024;
    const Eigen::VectorXd c_norm = centroids.rowwise().squaredNorm();
    double inertia = 0.0;
    for (Eigen::Index r0 = 0; r0 < x.rows(); r0 += kChunk) {
        const Eigen::Index rows = std::min(kChunk, x.rows() - r0);
        RowMatrix d = x.middleRows(r0, rows) * centroids.transpose() * -2.0;
        d.rowwise() += c_norm.transpose();
        for (Eigen::Index i = 0; i < rows; ++i) {
            Eigen::Index best_c = 0;
            d.row(i).minCoeff(&best_c);
            labels[static_cast<std::size_t>(r0 + i)] = static_cast<int>(best_c);
            inertia += (x.row(r0 + i) - centroids.row(best_c)).squaredNorm();
        }
    }
    return inertia;
}

// Index drawn with probability proportional to weight; weights sum to total > 0.
Eigen::Index draw_weighted(const std::vector<double>& weight, double total, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, total);
    double target = u(rng);
    Eigen::Index last_positive = -1;
    for (std::size_t i = 0; i < weight.size(); ++i) {
        if (weight[i] <= 0.0) continue;
        last_positive = static_cast<Eigen::Index>(i);
        target -= weight[i];
        if (target <= 0.0) return last_positive;
    }
    return last_positive;
}

// Greedy k-means++: each new centre is the best of 2 + ln(k) candidates
// drawn proportionally to the squared distance to the current centres.
RowMatrix seed_centroids(const RowMatrix& x, int k, Rng& rng) {
    const Eigen::Index n = x.rows();
    const int trials = 2 + static_cast<int>(std::log(static_cast<double>(k)));
    RowMatrix centroids(k, x.cols());
    std::vector<char> chosen(static_cast<std::size_t>(n), 0);
    std::uniform_int_distribution<Eigen::Index> pick(0, n - 1);
    const Eigen::Index first = pick(rng);
    centroids.row(0) = x.row(first);
    chosen[static_cast<std::size_t>(first)] = 1;
    std::vector<double> d2(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) d2[i] = (x.row(i) - x.row(first)).squaredNorm();

    std::vector<double> candidate_d2(static_cast<std::size_t>(n));
    std::vector<double> best_d2(static_cast<std::size_t>(n));
    for (int c = 1; c < k; ++c) {
        const double total = std::accumulate(d2.begin(), d2.end(), 0.0);
        Eigen::Index next = -1;
        if (total > 0.0) {
            double best_potential = std::numeric_limits<double>::infinity();
            for (int t = 0; t < trials; ++t) {
                const Eigen::Index cand = draw_weighted(d2, total, rng);
                double potential = 0.0;
                for (Eigen::Index i = 0; i < n; ++i) {
                    candidate_d2[i] = std::min(d2[i], (x.row(i) - x.row(cand)).squaredNorm());
                    potential += candidate_d2[i];
                }
                if (potential < best_potential) {
                    best_potential = potential;
                    next = cand;
                    best_d2.swap(candidate_d2);
                }
            }
            d2.swap(best_d2);
        } else {
            // Every point coincides with a centre; take an unused index.
            std::vector<Eigen::Index> unused;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (!chosen[static_cast<std::size_t>(i)]) unused.push_back(i);
            }
            std::uniform_int_distribution<std::size_t> any(0, unused.size() - 1);
            next = unused[any(rng)];
        }
        centroids.row(c) = x.row(next);
        chosen[static_cast<std::size_t>(next)] = 1;
    }
    return centroids;
}

KMeansResult lloyd(const RowMatrix& x, RowMatrix centroids, int max_iterations) {
    const Eigen::Index n = x.rows();
    const auto k = static_cast<int>(centroids.rows());
    KMeansResult result;
    result.labels.assign(static_cast<std::size_t>(n), 0);
    result.inertia.push_back(assign(x, centroids, result.labels));
    std::vector<int> previous;
    int iterations = 0;
    while (iterations < max_iterations) {
        RowMatrix sums = RowMatrix::Zero(k, x.cols());
        std::vector<int> counts(static_cast<std::size_t>(k), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
            const int l = result.labels[static_cast<std::size_t>(i)];
            sums.row(l) += x.row(i);
            ++counts[static_cast<std::size_t>(l)];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                centroids.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
            }
        }
        previous = result.labels;
        result.inertia.push_back(assign(x, centroids, result.labels));
        ++iterations;
        if (previous == result.labels) {
            break;
        }
    }
    result.iterations = iterations;
    result.centroids.resize(static_cast<std::size_t>(k));
    for (int c = 0; c < k; ++c) {
        result.centroids[static_cast<std::size_t>(c)].assign(
            centroids.row(c).data(), centroids.row(c).data() + centroids.cols());
    }
    return result;
}

}  // namespace

KMeansResult kmeans(const std::vector<std::vector<double>>& features, int k, std::uint64_t seed,
                    int max_iterations, int restarts) {
    if (features.empty()) {
        throw std::invalid_argument("kmeans: no points");
    }
    if (k < 1 || static_cast<std::size_t>(k) > features.size()) {
        throw std::invalid_argument("kmeans: k = " + std::to_string(k) + " but only " +
                                    std::to_string(features.size()) + " points");
    }
    if (restarts < 1 || max_iterations < 0) {
        throw std::invalid_argument("kmeans: restarts must be >= 1");
    }
    const RowMatrix x = to_matrix(features);
    Rng rng(seed);
    KMeansResult best;
    for (int r = 0; r < restarts; ++r) {
        KMeansResult run = lloyd(x, seed_centroids(x, k, rng), max_iterations);
        if (r == 0 || run.inertia.back() < best.inertia.back()) {
            best = std::move(run);
        }
    }
    return best;
}

std::vector<int> kmeans_cluster(const std::vector<std::vector<double>>& features, int k,
                                std::uint64_t seed) {
    return kmeans(features, k, seed).labels;
}

std::vector<double> corrected_fidelities(const std::vector<PulsePair>& pairs,
                                         const std::vector<ControlPulse>& corrections,
                                         const std::vector<int>& labels, const SimConfig& sim) {
    if (labels.size() != pairs.size()) {
        throw std::invalid_argument("corrected_fidelities: one label per record required");
    }
    std::vector<double> out;
    out.reserve(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const ControlPulse& corr = corrections.at(static_cast<std::size_t>(labels[i]));
        const ControlPulse pulse = (pairs[i].ncp + corr).clamped(sim.control_bound);
        out.push_back(
            fidelity(propagate(pulse, DriftSpec{pairs[i].gamma}, sim), pairs[i].target));
    }
    return out;
}

double score_corrections(const std::vector<PulsePair>& pairs,
                         const std::vector<ControlPulse>& corrections,
                         const std::vector<int>& labels, const SimConfig& sim) {
    if (pairs.empty()) {
        return 0.0;
    }
    const std::vector<double> f = corrected_fidelities(pairs, corrections, labels, sim);
    return std::accumulate(f.begin(), f.end(), 0.0) / static_cast<double>(f.size());
}

CorrectionCodebook build_codebook_from_features(const std::vector<PulsePair>& pairs,
                                                const std::vector<std::vector<double>>& features,
                                                int k, FeatureMode mode, std::uint64_t seed,
                                                const SimConfig& sim) {
    if (pairs.empty() || features.size() != pairs.size()) {
        throw std::invalid_argument("build_codebook: features and records must match");
    }
    CorrectionCodebook cb;
    cb.k = k;
    cb.mode = mode;
    cb.labels = kmeans_cluster(features, k, seed);

    const int slots = pairs.front().ccp.slots();
    cb.corrections.assign(static_cast<std::size_t>(k), ControlPulse(slots));
    std::vector<int> counts(static_cast<std::size_t>(k), 0);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        const auto l = static_cast<std::size_t>(cb.labels[i]);
        cb.corrections[l] += pairs[i].ccp;
        ++counts[l];
    }
    for (int c = 0; c < k; ++c) {
        const auto ci = static_cast<std::size_t>(c);
        if (counts[ci] == 0) {
            cb.empty_clusters.push_back(c);
            continue;
        }
        for (double& v : cb.corrections[ci].flat()) {
            v /= counts[ci];
        }
    }
    cb.sop = score_corrections(pairs, cb.corrections, cb.labels, sim);
    return cb;
}

CorrectionCodebook build_codebook(const std::vector<PulsePair>& pairs, int k, FeatureMode mode,
                                  std::uint64_t seed, const SimConfig& sim) {
    std::vector<std::vector<double>> features;
    features.reserve(pairs.size());
    for (const PulsePair& p : pairs) {
        features.push_back(featurize(p.ccp, mode));
    }
    return build_codebook_from_features(pairs, features, k, mode, seed, sim);
}

std::vector<double> knn_point(const ControlPulse& ncp, std::optional<double> gamma,
                              double gamma_scale) {
    std::vector<double> p = ncp.flat();
    if (gamma) {
        p.push_back(*gamma * gamma_scale);
    }
    return p;
}

KnnClassifier knn_fit(const std::vector<PulsePair>& pairs, const std::vector<int>& labels,
                      bool gamma_tagged, int neighbors, double gamma_scale) {
    if (pairs.size() != labels.size()) {
        throw std::invalid_argument("knn_fit: " + std::to_string(pairs.size()) +
                                    " records but " + std::to_string(labels.size()) + " labels");
    }
    if (neighbors < 1) {
        throw std::invalid_argument("knn_fit: neighbors must be >= 1");
    }
    KnnClassifier clf;
    clf.neighbors = neighbors;
    clf.gamma_tagged = gamma_tagged;
    clf.gamma_scale = gamma_scale;
    clf.labels = labels;
    clf.points.reserve(pairs.size());
    for (const PulsePair& p : pairs) {
        clf.points.push_back(
            knn_point(p.ncp, gamma_tagged ? std::optional<double>(p.gamma) : std::nullopt,
                      gamma_scale));
    }
    return clf;
}

int knn_predict(const KnnClassifier& clf, const ControlPulse& ncp, std::optional<double> gamma) {
    if (clf.points.empty()) {
        throw std::invalid_argument("knn_predict: classifier has no points");
    }
    if (gamma.has_value() != clf.gamma_tagged) {
        throw std::invalid_argument(clf.gamma_tagged
                                        ? "knn_predict: classifier is gamma-tagged, gamma required"
                                        : "knn_predict: classifier is untagged, gamma not allowed");
    }
    const std::vector<double> q = knn_point(ncp, gamma, clf.gamma_scale);
    if (q.size() != clf.dimension()) {
        throw std::invalid_argument("knn_predict: query dimension " + std::to_string(q.size()) +
                                    " != stored dimension " + std::to_string(clf.dimension()));
    }

    struct Candidate {
        double dist;
        int label;
    };
    std::vector<Candidate> cand(clf.points.size());
    for (std::size_t i = 0; i < clf.points.size(); ++i) {
        double s = 0.0;
        const auto& p = clf.points[i];
        for (std::size_t j = 0; j < q.size(); ++j) {
            const double d = p[j] - q[j];
            s += d * d;
        }
        cand[i] = {s, clf.labels[i]};
    }
    const auto m = std::min(cand.size(), static_cast<std::size_t>(clf.neighbors));
    const auto by_distance = [](const Candidate& a, const Candidate& b) {
        return a.dist < b.dist || (a.dist == b.dist && a.label < b.label);
    };
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(m), cand.end(),
                      by_distance);

    std::map<int, int> votes;
    for (std::size_t i = 0; i < m; ++i) {
        ++votes[cand[i].label];
    }
    int top = 0;
    for (const auto& [label, count] : votes) {
        top = std::max(top, count);
    }
    // Candidates are sorted by distance, so the first tied label wins.
    for (std::size_t i = 0; i < m; ++i) {
        if (votes[cand[i].label] == top) {
            return cand[i].label;
        }
    }
    return cand.front().label;
}

ControlPulse correct(const ControlPulse& ncp, const CorrectionCodebook& codebook,
                     const KnnClassifier& clf, std::optional<double> gamma, double bound) {
    const int label = knn_predict(clf, ncp, gamma);
    return (ncp + codebook.corrections.at(static_cast<std::size_t>(label))).clamped(bound);
}

void save_codebook(const CorrectionCodebook& cb, const std::filesystem::path& dir) {
    io::ensure_directory(dir);
    Json m;
    m["format_version"] = 1;
    m["k"] = cb.k;
    m["mode"] = to_string(cb.mode);
    m["slots"] = cb.corrections.empty() ? 0 : cb.corrections.front().slots();
    m["sop"] = cb.sop;
    m["record_count"] = cb.labels.size();
    m["empty_clusters"] = cb.empty_clusters;
    io::write_json(dir / "manifest.json", m);
    std::string body;
    for (const ControlPulse& c : cb.corrections) {
        body += io::to_json(c).dump();
        body += '\n';
    }
    io::write_text(dir / "corrections.jsonl", body);
    std::string labels;
    for (int l : cb.labels) {
        labels += std::to_string(l);
        labels += '\n';
    }
    io::write_text(dir / "labels.jsonl", labels);
}

CorrectionCodebook load_codebook(const std::filesystem::path& dir) {
    const Json m = io::read_json(dir / "manifest.json");
    CorrectionCodebook cb;
    cb.k = m.at("k").get<int>();
    cb.mode = feature_mode_from_string(m.at("mode").get<std::string>());
    cb.sop = m.at("sop").get<double>();
    cb.empty_clusters = m.at("empty_clusters").get<std::vector<int>>();
    const int slots = m.at("slots").get<int>();
    for (const std::string& line : io::read_lines(dir / "corrections.jsonl")) {
        cb.corrections.push_back(io::pulse_from_json(Json::parse(line), slots));
    }
    for (const std::string& line : io::read_lines(dir / "labels.jsonl")) {
        cb.labels.push_back(std::stoi(line));
    }
    if (static_cast<int>(cb.corrections.size()) != cb.k) {
        throw std::runtime_error("codebook in " + dir.string() + " has " +
                                 std::to_string(cb.corrections.size()) + " corrections, expected " +
                                 std::to_string(cb.k));
    }
    return cb;
}

void save_classifier(const KnnClassifier& clf, const std::filesystem::path& dir) {
    io::ensure_directory(dir);
    Json m;
    m["format_version"] = 1;
    m["neighbors"] = clf.neighbors;
    m["gamma_tagged"] = clf.gamma_tagged;
    m["gamma_scale"] = clf.gamma_scale;
    m["dimension"] = clf.dimension();
    m["count"] = clf.points.size();
    io::write_json(dir / "manifest.json", m);
    std::string body;
    for (std::size_t i = 0; i < clf.points.size(); ++i) {
        Json r;
        r["label"] = clf.labels[i];
        r["point"] = clf.points[i];
        body += r.dump();
        body += '\n';
    }
    io::write_text(dir / "points.jsonl", body);
}

KnnClassifier load_classifier(const std::filesystem::path& dir) {
    const Json m = io::read_json(dir / "manifest.json");
    KnnClassifier clf;
    clf.neighbors = m.at("neighbors").get<int>();
    clf.gamma_tagged = m.at("gamma_tagged").get<bool>();
    clf.gamma_scale = m.at("gamma_scale").get<double>();
    for (const std::string& line : io::read_lines(dir / "points.jsonl")) {
        const Json r = Json::parse(line);
        clf.labels.push_back(r.at("label").get<int>());
        clf.points.push_back(r.at("point").get<std::vector<double>>());
    }
    return clf;
}

}  // namespace qcorr

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

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qcorr/dataset.hpp"
#include "qcorr/dynamics.hpp"

namespace qcorr {

enum class FeatureMode { Raw, Sine, Poly3, Poly4 };

std::string to_string(FeatureMode mode);
FeatureMode feature_mode_from_string(const std::string& name);

/// Least-squares polynomial over abscissae 0..n-1, coefficients highest
/// degree first. Requires n > degree and degree in {3, 4}.
std::vector<double> fit_poly(std::span<const double> channel, int degree);

/// Parameters of a sin(b x + c) + d sin(e x + f) + g, with a >= d.
struct SinusoidFit {
    double a = 0.0, b = 0.0, c = 0.0, d = 0.0, e = 0.0, f = 0.0, g = 0.0;

    std::array<double, 7> coefficients() const { return {a, b, c, d, e, f, g}; }
    double operator()(double x) const;
};

/// Two-term sinusoid fit over abscissae 0..n-1: a 64x64 frequency grid on
/// [0, pi]^2 with closed-form linear least squares for amplitudes, phases and
/// offset at each node, followed by coordinate-descent refinement of the two
/// frequencies. Requires n >= 7.
SinusoidFit fit_sinusoid(std::span<const double> channel);

/// Feature vector of a correction pulse. Raw flattens row-major (length 2n);
/// fitted modes concatenate the x-channel then the z-channel coefficients.
std::vector<double> featurize(const ControlPulse& ccp, FeatureMode mode);

inline constexpr int kDefaultKMeansRestarts = 10;

struct KMeansResult {
    std::vector<int> labels;
    std::vector<std::vector<double>> centroids;
    /// Within-cluster sum of squares after each assignment step.
    std::vector<double> inertia;
    int iterations = 0;
};

/// Lloyd iterations from greedy k-means++ seeding, Euclidean metric, stopping
/// at an assignment fixpoint or after max_iterations. The run with the lowest
/// final inertia among `restarts` seedings is returned. A cluster that loses
/// all of its points keeps its previous centroid.
KMeansResult kmeans(const std::vector<std::vector<double>>& features, int k, std::uint64_t seed,
                    int max_iterations = 300, int restarts = kDefaultKMeansRestarts);

std::vector<int> kmeans_cluster(const std::vector<std::vector<double>>& features, int k,
                                std::uint64_t seed);

/// k mean corrections in raw pulse space plus the labelling that produced
/// them. Corrections are not box constrained.
struct CorrectionCodebook {
    int k = 0;
    FeatureMode mode = FeatureMode::Raw;
    std::vector<ControlPulse> corrections;
    std::vector<int> labels;
    /// Mean fidelity of the corrected training pulses.
    double sop = 0.0;
    /// Clusters that ended with no member; their correction is zero.
    std::vector<int> empty_clusters;
};

/// Fidelity of clamp(ncp_i + corrections[labels[i]]) propagated at each
/// record's gamma against its target.
std::vector<double> corrected_fidelities(const std::vector<PulsePair>& pairs,
                                         const std::vector<ControlPulse>& corrections,
                                         const std::vector<int>& labels, const SimConfig& sim);

/// Mean of corrected_fidelities().
double score_corrections(const std::vector<PulsePair>& pairs,
                         const std::vector<ControlPulse>& corrections,
                         const std::vector<int>& labels, const SimConfig& sim);

CorrectionCodebook build_codebook(const std::vector<PulsePair>& pairs, int k, FeatureMode mode,
                                  std::uint64_t seed, const SimConfig& sim);

/// Same as build_codebook with features precomputed by featurize(); lets a
/// k sweep reuse one featurization.
CorrectionCodebook build_codebook_from_features(const std::vector<PulsePair>& pairs,
                                                const std::vector<std::vector<double>>& features,
                                                int k, FeatureMode mode, std::uint64_t seed,
                                                const SimConfig& sim);

/// Brute-force k-nearest-neighbour classifier over flattened NCPs.
struct KnnClassifier {
    static constexpr double kDefaultGammaScale = 1000.0;

    std::vector<std::vector<double>> points;
    std::vector<int> labels;
    int neighbors = 4;
    bool gamma_tagged = false;
    double gamma_scale = kDefaultGammaScale;

    std::size_t dimension() const { return points.empty() ? 0 : points.front().size(); }
};

/// Flattened NCP, extended by gamma * gamma_scale when tagged.
std::vector<double> knn_point(const ControlPulse& ncp, std::optional<double> gamma,
                              double gamma_scale);

KnnClassifier knn_fit(const std::vector<PulsePair>& pairs, const std::vector<int>& labels,
                      bool gamma_tagged, int neighbors = 4,
                      double gamma_scale = KnnClassifier::kDefaultGammaScale);

/// Majority vote among the nearest `neighbors` stored points. A tied vote
/// goes to the tied label owning the nearest of the voting points.
int knn_predict(const KnnClassifier& clf, const ControlPulse& ncp,
                std::optional<double> gamma = std::nullopt);

/// clamp(ncp + correction of the predicted cluster).
ControlPulse correct(const ControlPulse& ncp, const CorrectionCodebook& codebook,
                     const KnnClassifier& clf, std::optional<double> gamma, double bound);

void save_codebook(const CorrectionCodebook& codebook, const std::filesystem::path& dir);
CorrectionCodebook load_codebook(const std::filesystem::path& dir);

void save_classifier(const KnnClassifier& clf, const std::filesystem::path& dir);
KnnClassifier load_classifier(const std::filesystem::path& dir);

}  // namespace qcorr

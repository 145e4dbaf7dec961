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

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qcorr/dynamics.hpp"
#include "qcorr/pulse_opt.hpp"

namespace qcorr {

/// One record: a target gate, the drift-free solution (NCP), the solution
/// under drift (DCP) and their difference.
///
/// The correction is stored as ccp = dcp - ncp so that ncp + ccp == dcp;
/// the corrected pulse of the geometric scheme is ncp + mean(ccp).
struct PulsePair {
    int target_index = 0;
    Unitary target;
    double gamma = 0.0;
    ControlPulse ncp;
    ControlPulse dcp;
    ControlPulse ccp;
    double fid_ncp_nodrift = 0.0;
    double fid_dcp_drift = 0.0;
    double fid_ncp_drift = 0.0;
    bool ncp_converged = false;
    bool dcp_converged = false;
};

struct GenerationConfig {
    SimConfig sim;
    /// Optimizer settings for the drift-free run and the drift run. The
    /// defaults follow OptimizerConfig::for_gamma.
    OptimizerConfig ncp_opt = OptimizerConfig::for_gamma(0.0);
    OptimizerConfig dcp_opt = OptimizerConfig::for_gamma(1.0);
};

struct Manifest {
    static constexpr int kFormatVersion = 1;

    int format_version = kFormatVersion;
    std::uint64_t seed = 0;
    GenerationConfig config;
    std::vector<double> gammas;
    int records_per_gamma = 0;
    std::string created;
};

struct Dataset {
    Manifest manifest;
    /// Ordered by target index, then by position in manifest.gammas.
    std::vector<PulsePair> records;

    /// Sorted distinct target indices.
    std::vector<int> target_indices() const;
    /// Records at one drift strength, in target order.
    std::vector<PulsePair> at_gamma(double gamma) const;
};

/// Runs the drift-free and the drift optimization for one target. At
/// gamma == 0 the two problems coincide and the NCP run is reused.
PulsePair generate_pair(const Unitary& target, double gamma, const GenerationConfig& cfg,
                        Rng& rng);

/// Builds a record from an already optimized NCP.
PulsePair generate_pair_from_ncp(const Unitary& target, double gamma, const OptResult& ncp,
                                 const GenerationConfig& cfg, Rng& rng);

/// Derives the stream of one (target, slot) job from the base seed.
/// Slot 0 is the target draw, slot 1 the NCP run, slot 2 + g the DCP run for
/// the g-th gamma.
Rng job_rng(std::uint64_t seed, std::uint64_t target_index, std::uint64_t slot);

/// Draws `count` Haar targets once and produces one record per (target,
/// gamma). Work is split over `threads` workers; the output does not depend on
/// the thread count.
Dataset generate_dataset(int count, const std::vector<double>& gammas, std::uint64_t seed,
                         const GenerationConfig& cfg, std::string created = {},
                         int threads = 1);

/// Splits by target identity: distinct targets are shuffled with `seed`, the
/// first train_targets go to the training part and the next test_targets to
/// the test part.
std::pair<Dataset, Dataset> split(const Dataset& data, int train_targets, int test_targets,
                                  std::uint64_t seed);

/// Checks ccp == dcp - ncp and that every stored fidelity is reproduced from
/// the stored pulses and target to `tol`. Returns the first problem found.
std::optional<std::string> verify_record(const PulsePair& record, const SimConfig& sim,
                                         double tol = 1e-12);

/// Directory layout: manifest.json plus records.jsonl, one record per line.
void save_dataset(const Dataset& data, const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

std::string record_to_line(const PulsePair& record);
PulsePair record_from_line(const std::string& line, int slots);

}  // namespace qcorr

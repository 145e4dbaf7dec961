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

#include "qcorr/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "qcorr/io.hpp"

namespace qcorr {

using io::Json;

std::vector<int> Dataset::target_indices() const {
    std::set<int> ids;
    for (const PulsePair& r : records) {
        ids.insert(r.target_index);
    }
    return {ids.begin(), ids.end()};
}

std::vector<PulsePair> Dataset::at_gamma(double gamma) const {
    std::vector<PulsePair> out;
    for (const PulsePair& r : records) {
        if (r.gamma == gamma) {
            out.push_back(r);
        }
    }
    return out;
}

PulsePair generate_pair_from_ncp(const Unitary& target, double gamma, const OptResult& ncp,
                                 const GenerationConfig& cfg, Rng& rng) {
    if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
        throw std::invalid_argument("generate_pair: gamma must be >= 0");
    }
    const DriftSpec drift{gamma};
    const OptResult dcp =
        gamma == 0.0 ? ncp : optimize_pulse(target, drift, cfg.sim, cfg.dcp_opt, rng);

    PulsePair p;
    p.target = target;
    p.gamma = gamma;
    p.ncp = ncp.pulse;
    p.dcp = dcp.pulse;
    p.ccp = dcp.pulse - ncp.pulse;
    p.fid_ncp_nodrift = fidelity(propagate(p.ncp, DriftSpec{0.0}, cfg.sim), target);
    p.fid_dcp_drift = fidelity(propagate(p.dcp, drift, cfg.sim), target);
    p.fid_ncp_drift = fidelity(propagate(p.ncp, drift, cfg.sim), target);
    p.ncp_converged = ncp.converged;
    p.dcp_converged = dcp.converged;
    return p;
}

PulsePair generate_pair(const Unitary& target, double gamma, const GenerationConfig& cfg,
                        Rng& rng) {
    const OptResult ncp = optimize_pulse(target, DriftSpec{0.0}, cfg.sim, cfg.ncp_opt, rng);
    return generate_pair_from_ncp(target, gamma, ncp, cfg, rng);
}

Rng job_rng(std::uint64_t seed, std::uint64_t target_index, std::uint64_t slot) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(target_index),
                      static_cast<std::uint32_t>(target_index >> 32),
                      static_cast<std::uint32_t>(slot)};
    return Rng(seq);
}

Dataset generate_dataset(int count, const std::vector<double>& gammas, std::uint64_t seed,
                         const GenerationConfig& cfg, std::string created, int threads) {
    if (count < 1) {
        throw std::invalid_argument("generate_dataset: count must be >= 1");
    }
    if (gammas.empty()) {
        throw std::invalid_argument("generate_dataset: empty gamma list");
    }
    for (double g : gammas) {
        if (!(g >= 0.0) || !std::isfinite(g)) {
            throw std::invalid_argument("generate_dataset: gamma must be >= 0");
        }
    }
    cfg.sim.validate();

    const std::size_t per_target = gammas.size();
    std::vector<PulsePair> records(static_cast<std::size_t>(count) * per_target);

    auto run_target = [&](int t) {
        Rng target_stream = job_rng(seed, static_cast<std::uint64_t>(t), 0);
        const Unitary target = haar_random_unitary(target_stream);
        Rng ncp_stream = job_rng(seed, static_cast<std::uint64_t>(t), 1);
        const OptResult ncp =
            optimize_pulse(target, DriftSpec{0.0}, cfg.sim, cfg.ncp_opt, ncp_stream);
        for (std::size_t g = 0; g < per_target; ++g) {
            Rng dcp_stream = job_rng(seed, static_cast<std::uint64_t>(t), 2 + g);
            PulsePair p = generate_pair_from_ncp(target, gammas[g], ncp, cfg, dcp_stream);
            p.target_index = t;
            records[static_cast<std::size_t>(t) * per_target + g] = std::move(p);
        }
    };

    const int workers = std::max(1, std::min(threads, count));
    if (workers == 1) {
        for (int t = 0; t < count; ++t) {
            run_target(t);
        }
    } else {
        std::atomic<int> next{0};
        std::vector<std::jthread> pool;
        for (int w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (int t = next++; t < count; t = next++) {
                    run_target(t);
                }
            });
        }
    }

    Dataset data;
    data.manifest.seed = seed;
    data.manifest.config = cfg;
    data.manifest.gammas = gammas;
    data.manifest.records_per_gamma = count;
    data.manifest.created = std::move(created);
    data.records = std::move(records);
    return data;
}

std::pair<Dataset, Dataset> split(const Dataset& data, int train_targets, int test_targets,
                                  std::uint64_t seed) {
    std::vector<int> ids = data.target_indices();
    if (train_targets < 0 || test_targets < 0 ||
        static_cast<std::size_t>(train_targets) + static_cast<std::size_t>(test_targets) >
            ids.size()) {
        throw std::invalid_argument("split: requested " + std::to_string(train_targets) + "+" +
                                    std::to_string(test_targets) + " targets, dataset has " +
                                    std::to_string(ids.size()));
    }
    Rng rng(seed);
    std::shuffle(ids.begin(), ids.end(), rng);
    const std::set<int> train_ids(ids.begin(), ids.begin() + train_targets);
    const std::set<int> test_ids(ids.begin() + train_targets,
                                 ids.begin() + train_targets + test_targets);

    Dataset train;
    Dataset test;
    train.manifest = data.manifest;
    test.manifest = data.manifest;
    train.manifest.records_per_gamma = train_targets;
    test.manifest.records_per_gamma = test_targets;
    for (const PulsePair& r : data.records) {
        if (train_ids.count(r.target_index) != 0) {
            train.records.push_back(r);
        } else if (test_ids.count(r.target_index) != 0) {
            test.records.push_back(r);
        }
    }
    return {std::move(train), std::move(test)};
}

std::optional<std::string> verify_record(const PulsePair& r, const SimConfig& sim, double tol) {
    const ControlPulse expected = r.dcp - r.ncp;
    for (std::size_t i = 0; i < expected.flat().size(); ++i) {
        if (std::abs(expected.flat()[i] - r.ccp.flat()[i]) > tol) {
            return "ccp differs from dcp - ncp at entry " + std::to_string(i);
        }
    }
    auto check = [&](double stored, const ControlPulse& p, double gamma,
                     const char* name) -> std::optional<std::string> {
        const double f = fidelity(propagate(p, DriftSpec{gamma}, sim), r.target);
        if (!(stored >= 0.0 && stored <= 1.0) || std::abs(f - stored) > tol) {
            std::ostringstream ss;
            ss.precision(17);
            ss << name << " stored " << stored << ", recomputed " << f;
            return ss.str();
        }
        return std::nullopt;
    };
    if (auto e = check(r.fid_ncp_nodrift, r.ncp, 0.0, "fid_ncp_nodrift")) return e;
    if (auto e = check(r.fid_dcp_drift, r.dcp, r.gamma, "fid_dcp_drift")) return e;
    if (auto e = check(r.fid_ncp_drift, r.ncp, r.gamma, "fid_ncp_drift")) return e;
    return std::nullopt;
}

std::string record_to_line(const PulsePair& r) {
    Json j;
    j["target_index"] = r.target_index;
    j["target"] = io::to_json(r.target);
    j["gamma"] = r.gamma;
    j["ncp"] = io::to_json(r.ncp);
    j["dcp"] = io::to_json(r.dcp);
    j["ccp"] = io::to_json(r.ccp);
    j["fid_ncp_nodrift"] = r.fid_ncp_nodrift;
    j["fid_dcp_drift"] = r.fid_dcp_drift;
    j["fid_ncp_drift"] = r.fid_ncp_drift;
    j["ncp_converged"] = r.ncp_converged;
    j["dcp_converged"] = r.dcp_converged;
    return j.dump();
}

PulsePair record_from_line(const std::string& line, int slots) {
    const Json j = Json::parse(line);
    PulsePair r;
    r.target_index = j.at("target_index").get<int>();
    r.target = io::unitary_from_json(j.at("target"));
    r.gamma = j.at("gamma").get<double>();
    r.ncp = io::pulse_from_json(j.at("ncp"), slots);
    r.dcp = io::pulse_from_json(j.at("dcp"), slots);
    r.ccp = io::pulse_from_json(j.at("ccp"), slots);
    r.fid_ncp_nodrift = j.at("fid_ncp_nodrift").get<double>();
    r.fid_dcp_drift = j.at("fid_dcp_drift").get<double>();
    r.fid_ncp_drift = j.at("fid_ncp_drift").get<double>();
    r.ncp_converged = j.at("ncp_converged").get<bool>();
    r.dcp_converged = j.at("dcp_converged").get<bool>();
    return r;
}

namespace {

Json manifest_to_json(const Manifest& m) {
    Json j;
    j["format_version"] = m.format_version;
    j["seed"] = m.seed;
    j["sim"] = io::to_json(m.config.sim);
    j["ncp_optimizer"] = io::to_json(m.config.ncp_opt);
    j["dcp_optimizer"] = io::to_json(m.config.dcp_opt);
    j["gammas"] = m.gammas;
    j["records_per_gamma"] = m.records_per_gamma;
    j["created"] = m.created;
    return j;
}

Manifest manifest_from_json(const Json& j) {
    Manifest m;
    m.format_version = j.at("format_version").get<int>();
    if (m.format_version != Manifest::kFormatVersion) {
        throw std::runtime_error("unsupported dataset format_version " +
                                 std::to_string(m.format_version));
    }
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config.sim = io::sim_config_from_json(j.at("sim"));
    m.config.ncp_opt = io::optimizer_config_from_json(j.at("ncp_optimizer"));
    m.config.dcp_opt = io::optimizer_config_from_json(j.at("dcp_optimizer"));
    m.gammas = j.at("gammas").get<std::vector<double>>();
    m.records_per_gamma = j.at("records_per_gamma").get<int>();
    m.created = j.at("created").get<std::string>();
    return m;
}

}  // namespace

void save_dataset(const Dataset& data, const std::filesystem::path& dir) {
    io::ensure_directory(dir);
    io::write_json(dir / "manifest.json", manifest_to_json(data.manifest));
    std::string body;
    for (const PulsePair& r : data.records) {
        body += record_to_line(r);
        body += '\n';
    }
    io::write_text(dir / "records.jsonl", body);
}

Dataset load_dataset(const std::filesystem::path& dir) {
    Dataset data;
    data.manifest = manifest_from_json(io::read_json(dir / "manifest.json"));
    const int slots = data.manifest.config.sim.slot_count;
    const auto lines = io::read_lines(dir / "records.jsonl");
    data.records.reserve(lines.size());
    for (std::size_t i = 0; i < lines.size(); ++i) {
        try {
            data.records.push_back(record_from_line(lines[i], slots));
        } catch (const std::exception& e) {
            throw std::runtime_error((dir / "records.jsonl").string() + ":" +
                                     std::to_string(i + 1) + ": " + e.what());
        }
    }
    return data;
}

}  // namespace qcorr

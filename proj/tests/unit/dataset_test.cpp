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

#include <gtest/gtest.h>

#include <set>

#include "qcorr/dataset.hpp"
#include "qcorr/io.hpp"
#include "temp_dir.hpp"

namespace qcorr {
namespace {

using testing::TempDir;

const Dataset& small_dataset() {
    static const Dataset data =
        generate_dataset(12, {0.0, 0.3, 0.7}, 2024, GenerationConfig{}, "2026-01-01T00:00:00Z");
    return data;
}

TEST(GeneratePair, ZeroGammaReusesNcp) {
    Rng rng(1);
    const Unitary target = haar_random_unitary(rng);
    const PulsePair p = generate_pair(target, 0.0, GenerationConfig{}, rng);
    EXPECT_EQ(p.ncp, p.dcp);
    EXPECT_EQ(p.ccp, ControlPulse::zeros(16));
    EXPECT_EQ(p.fid_ncp_drift, p.fid_dcp_drift);
}

TEST(GeneratePair, FieldsAreConsistent) {
    Rng rng(2);
    const GenerationConfig cfg;
    for (double gamma : {0.2, 0.6}) {
        const PulsePair p = generate_pair(haar_random_unitary(rng), gamma, cfg, rng);
        const ControlPulse sum = p.ncp + p.ccp;
        for (int j = 0; j < 32; ++j) EXPECT_NEAR(sum.flat()[j], p.dcp.flat()[j], 1e-12);
        EXPECT_EQ(p.fid_dcp_drift, fidelity(propagate(p.dcp, DriftSpec{gamma}, cfg.sim), p.target));
        EXPECT_EQ(p.fid_ncp_drift, fidelity(propagate(p.ncp, DriftSpec{gamma}, cfg.sim), p.target));
        EXPECT_EQ(p.fid_ncp_nodrift, fidelity(propagate(p.ncp, DriftSpec{}, cfg.sim), p.target));
        EXPECT_FALSE(verify_record(p, cfg.sim).has_value());
    }
}

TEST(GenerateDataset, SameTargetsAcrossGammas) {
    const Dataset& d = small_dataset();
    ASSERT_EQ(d.records.size(), 36u);
    EXPECT_EQ(d.manifest.records_per_gamma, 12);
    const auto a = d.at_gamma(0.0), b = d.at_gamma(0.3), c = d.at_gamma(0.7);
    ASSERT_EQ(a.size(), 12u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].target.m, b[i].target.m);
        EXPECT_EQ(a[i].target.m, c[i].target.m);
        EXPECT_EQ(a[i].ncp, c[i].ncp);
        EXPECT_EQ(a[i].ccp, ControlPulse::zeros(16));
    }
    for (const PulsePair& r : d.records) {
        EXPECT_FALSE(verify_record(r, d.manifest.config.sim).has_value());
    }
}

TEST(GenerateDataset, SingleTargetAtZeroGamma) {
    const Dataset d = generate_dataset(1, {0.0}, 5, GenerationConfig{});
    ASSERT_EQ(d.records.size(), 1u);
    EXPECT_EQ(d.records[0].ccp, ControlPulse::zeros(16));
}

TEST(GenerateDataset, ThreadCountDoesNotChangeOutput) {
    const Dataset one = generate_dataset(6, {0.4}, 77, GenerationConfig{}, "t", 1);
    const Dataset three = generate_dataset(6, {0.4}, 77, GenerationConfig{}, "t", 3);
    ASSERT_EQ(one.records.size(), three.records.size());
    for (std::size_t i = 0; i < one.records.size(); ++i) {
        EXPECT_EQ(record_to_line(one.records[i]), record_to_line(three.records[i]));
    }
}

TEST(GenerateDataset, RejectsBadArguments) {
    EXPECT_THROW(generate_dataset(0, {0.1}, 1, GenerationConfig{}), std::invalid_argument);
    EXPECT_THROW(generate_dataset(1, {-0.1}, 1, GenerationConfig{}), std::invalid_argument);
}

TEST(Storage, SameSeedGivesIdenticalFiles) {
    TempDir tmp;
    const Dataset again =
        generate_dataset(12, {0.0, 0.3, 0.7}, 2024, GenerationConfig{}, "2026-01-01T00:00:00Z");
    save_dataset(small_dataset(), tmp / "a");
    save_dataset(again, tmp / "b");
    for (const char* f : {"manifest.json", "records.jsonl"}) {
        EXPECT_EQ(io::read_text(tmp / "a" / f), io::read_text(tmp / "b" / f));
    }
}

TEST(Storage, RoundTripIsByteIdentical) {
    TempDir tmp;
    save_dataset(small_dataset(), tmp / "a");
    const Dataset loaded = load_dataset(tmp / "a");
    save_dataset(loaded, tmp / "b");
    for (const char* f : {"manifest.json", "records.jsonl"}) {
        EXPECT_EQ(io::read_text(tmp / "a" / f), io::read_text(tmp / "b" / f));
    }
    ASSERT_EQ(loaded.records.size(), small_dataset().records.size());
    for (std::size_t i = 0; i < loaded.records.size(); ++i) {
        EXPECT_EQ(loaded.records[i].dcp, small_dataset().records[i].dcp);
        EXPECT_EQ(loaded.records[i].target.m, small_dataset().records[i].target.m);
        EXPECT_FALSE(verify_record(loaded.records[i], loaded.manifest.config.sim).has_value());
    }
    EXPECT_EQ(loaded.manifest.config.sim, SimConfig{});
    EXPECT_EQ(loaded.manifest.config.dcp_opt, small_dataset().manifest.config.dcp_opt);
}

TEST(Storage, MissingDirectoryNamesPath) {
    try {
        load_dataset("/nonexistent/qcorr-data");
        FAIL() << "expected an exception";
    } catch (const std::exception& e) {
        EXPECT_NE(std::string(e.what()).find("/nonexistent/qcorr-data"), std::string::npos);
    }
}

TEST(Storage, UnwritablePathNamesPath) {
    try {
        save_dataset(small_dataset(), "/proc/qcorr-cannot-write");
        FAIL() << "expected an exception";
    } catch (const std::exception& e) {
        EXPECT_NE(std::string(e.what()).find("/proc/qcorr-cannot-write"), std::string::npos);
    }
}

TEST(Verify, DetectsTampering) {
    PulsePair r = small_dataset().records[4];
    r.fid_dcp_drift -= 1e-9;
    EXPECT_TRUE(verify_record(r, SimConfig{}).has_value());
    r = small_dataset().records[4];
    r.ccp(3, 1) += 1e-6;
    EXPECT_TRUE(verify_record(r, SimConfig{}).has_value());
}

TEST(Split, DisjointStableAndSized) {
    const Dataset& d = small_dataset();
    const auto [train, test] = split(d, 7, 5, 9);
    const auto tr = train.target_indices(), te = test.target_indices();
    EXPECT_EQ(tr.size(), 7u);
    EXPECT_EQ(te.size(), 5u);
    std::set<int> both(tr.begin(), tr.end());
    for (int t : te) EXPECT_EQ(both.count(t), 0u);
    EXPECT_EQ(train.records.size(), 21u);
    EXPECT_EQ(test.records.size(), 15u);

    const auto [train2, test2] = split(d, 7, 5, 9);
    EXPECT_EQ(test2.target_indices(), te);
    EXPECT_EQ(train2.target_indices(), tr);
    EXPECT_THROW(split(d, 8, 5, 9), std::invalid_argument);
}

TEST(Split, RegeneratedDatasetGivesSameTestMembership) {
    const Dataset again =
        generate_dataset(12, {0.0, 0.3, 0.7}, 2024, GenerationConfig{}, "2026-01-01T00:00:00Z");
    EXPECT_EQ(split(small_dataset(), 6, 6, 3).second.target_indices(),
              split(again, 6, 6, 3).second.target_indices());
}

}  // namespace
}  // namespace qcorr

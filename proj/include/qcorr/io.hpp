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

// Structured-text conventions shared by datasets, codebooks, classifiers and
// model checkpoints: a pretty-printed JSON manifest plus line-delimited JSON
// records. Doubles are written in shortest round-trip form, so
// load -> save reproduces files byte for byte.

#include <filesystem>
#include <string>
#include <vector>

#include "qcorr/dynamics.hpp"
#include "qcorr/pulse_opt.hpp"
#include <json.hpp>

namespace qcorr::io {

using Json = nlohmann::ordered_json;

Json to_json(const SimConfig& cfg);
SimConfig sim_config_from_json(const Json& j);

Json to_json(const OptimizerConfig& cfg);
OptimizerConfig optimizer_config_from_json(const Json& j);

/// Row-major (re, im) pairs: 8 reals.
Json to_json(const Unitary& u);
Unitary unitary_from_json(const Json& j);

Json to_json(const ControlPulse& p);
ControlPulse pulse_from_json(const Json& j, int slots);

/// Writes the file, throwing std::runtime_error naming the path on failure.
void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);
std::vector<std::string> read_lines(const std::filesystem::path& path);

Json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const Json& j);

/// Creates the directory (and parents), naming the path on failure.
void ensure_directory(const std::filesystem::path& dir);

/// 64-bit FNV-1a, rendered as 16 lowercase hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace qcorr::io

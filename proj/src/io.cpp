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

#include "qcorr/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace qcorr::io {

Json to_json(const SimConfig& cfg) {
    Json j;
    j["total_time"] = cfg.total_time;
    j["slot_count"] = cfg.slot_count;
    j["control_bound"] = cfg.control_bound;
    return j;
}

SimConfig sim_config_from_json(const Json& j) {
    SimConfig cfg;
    cfg.total_time = j.at("total_time").get<double>();
    cfg.slot_count = j.at("slot_count").get<int>();
    cfg.control_bound = j.at("control_bound").get<double>();
    cfg.validate();
    return cfg;
}

Json to_json(const OptimizerConfig& cfg) {
    Json j;
    j["max_iterations"] = cfg.max_iterations;
    j["f_err_goal"] = cfg.f_err_goal;
    j["grad_tol"] = cfg.grad_tol;
    j["step"] = {{"initial_step", cfg.step.initial_step},
                 {"shrink", cfg.step.shrink},
                 {"max_halvings", cfg.step.max_halvings},
                 {"sufficient_increase", cfg.step.sufficient_increase}};
    j["init_mode"] = "ZERO";
    j["max_restarts"] = cfg.max_restarts;
    j["restart_scale"] = cfg.restart_scale;
    return j;
}

OptimizerConfig optimizer_config_from_json(const Json& j) {
    OptimizerConfig cfg;
    cfg.max_iterations = j.at("max_iterations").get<int>();
    cfg.f_err_goal = j.at("f_err_goal").get<double>();
    cfg.grad_tol = j.at("grad_tol").get<double>();
    const Json& s = j.at("step");
    cfg.step.initial_step = s.at("initial_step").get<double>();
    cfg.step.shrink = s.at("shrink").get<double>();
    cfg.step.max_halvings = s.at("max_halvings").get<int>();
    cfg.step.sufficient_increase = s.at("sufficient_increase").get<double>();
    if (j.at("init_mode").get<std::string>() != "ZERO") {
        throw std::invalid_argument("unsupported init_mode " + j.at("init_mode").dump());
    }
    cfg.max_restarts = j.at("max_restarts").get<int>();
    cfg.restart_scale = j.at("restart_scale").get<double>();
    cfg.validate();
    return cfg;
}

Json to_json(const Unitary& u) {
    Json arr = Json::array();
    for (const Complex& z : u.m) {
        arr.push_back(z.real());
        arr.push_back(z.imag());
    }
    return arr;
}

Unitary unitary_from_json(const Json& j) {
    if (!j.is_array() || j.size() != 8) {
        throw std::invalid_argument("unitary: expected 8 reals");
    }
    Unitary u;
    for (int i = 0; i < 4; ++i) {
        u.m[i] = Complex(j[2 * i].get<double>(), j[2 * i + 1].get<double>());
    }
    return u;
}

Json to_json(const ControlPulse& p) { return Json(p.flat()); }

ControlPulse pulse_from_json(const Json& j, int slots) {
    return ControlPulse(slots, j.get<std::vector<double>>());
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot open for writing: " + path.string());
    }
    out << text;
    out.flush();
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open for reading: " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open for reading: " + path.string());
    }
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty()) {
            lines.push_back(std::move(line));
        }
    }
    return lines;
}

Json read_json(const std::filesystem::path& path) {
    try {
        return Json::parse(read_text(path));
    } catch (const Json::parse_error& e) {
        throw std::runtime_error("malformed JSON in " + path.string() + ": " + e.what());
    }
}

void write_json(const std::filesystem::path& path, const Json& j) {
    write_text(path, j.dump(2) + "\n");
}

void ensure_directory(const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create directory " + dir.string() + ": " + ec.message());
    }
}

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace qcorr::io

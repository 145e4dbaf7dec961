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


// Python bindings. Unitaries are 2x2 complex arrays, pulses (slots, 2) float
// arrays with columns (hx, hz).

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "qcorr/dataset.hpp"
#include "qcorr/dynamics.hpp"
#include "qcorr/geometric.hpp"
#include "qcorr/harness.hpp"
#include "qcorr/io.hpp"
#include "qcorr/pulse_opt.hpp"

namespace py = pybind11;

namespace {

using ComplexArray = py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>;
using RealArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

qcorr::Unitary to_unitary(const ComplexArray& a) {
    if (a.ndim() != 2 || a.shape(0) != 2 || a.shape(1) != 2) {
        throw std::invalid_argument("expected a 2x2 complex array");
    }
    qcorr::Unitary u;
    std::copy(a.data(), a.data() + 4, u.m.begin());
    return u;
}

ComplexArray from_unitary(const qcorr::Unitary& u) {
    ComplexArray out({2, 2});
    std::copy(u.m.begin(), u.m.end(), out.mutable_data());
    return out;
}

qcorr::ControlPulse to_pulse(const RealArray& a) {
    if (a.ndim() != 2 || a.shape(1) != qcorr::ControlPulse::kChannels) {
        throw std::invalid_argument("expected a (slots, 2) pulse array");
    }
    const auto slots = static_cast<int>(a.shape(0));
    return qcorr::ControlPulse(slots, std::vector<double>(a.data(), a.data() + a.size()));
}

RealArray from_pulse(const qcorr::ControlPulse& p) {
    RealArray out({static_cast<py::ssize_t>(p.slots()),
                   static_cast<py::ssize_t>(qcorr::ControlPulse::kChannels)});
    std::copy(p.flat().begin(), p.flat().end(), out.mutable_data());
    return out;
}

qcorr::SimConfig sim_config(double total_time, int slots) {
    qcorr::SimConfig cfg;
    cfg.total_time = total_time;
    cfg.slot_count = slots;
    cfg.validate();
    return cfg;
}

py::dict record_dict(const qcorr::PulsePair& r) {
    py::dict d;
    d["target_index"] = r.target_index;
    d["gamma"] = r.gamma;
    d["target"] = from_unitary(r.target);
    d["ncp"] = from_pulse(r.ncp);
    d["dcp"] = from_pulse(r.dcp);
    d["ccp"] = from_pulse(r.ccp);
    d["fid_ncp_nodrift"] = r.fid_ncp_nodrift;
    d["fid_dcp_drift"] = r.fid_dcp_drift;
    d["fid_ncp_drift"] = r.fid_ncp_drift;
    return d;
}

}  // namespace

PYBIND11_MODULE(_qcorr, m) {
    m.doc() = "Drift-aware single-qubit control pulses";

    m.def(
        "propagate",
        [](const RealArray& pulse, double gamma, double total_time) {
            const auto p = to_pulse(pulse);
            return from_unitary(qcorr::propagate(p, qcorr::DriftSpec{gamma, qcorr::PauliAxis::Y},
                                                 sim_config(total_time, p.slots())));
        },
        py::arg("pulse"), py::arg("gamma") = 0.0, py::arg("total_time") = 2.1);

    m.def(
        "fidelity",
        [](const ComplexArray& x, const ComplexArray& y) {
            return qcorr::fidelity(to_unitary(x), to_unitary(y));
        },
        py::arg("x"), py::arg("y"));

    m.def(
        "haar_unitary",
        [](std::uint64_t seed) {
            qcorr::Rng rng(seed);
            return from_unitary(qcorr::haar_random_unitary(rng));
        },
        py::arg("seed"));

    m.def(
        "optimize",
        [](const ComplexArray& target, double gamma, std::uint64_t seed, int slots,
           double total_time) {
            const auto u = to_unitary(target);
            const auto cfg = sim_config(total_time, slots);
            qcorr::Rng rng(seed);
            qcorr::OptResult res;
            {
                py::gil_scoped_release release;
                res = qcorr::optimize_pulse(u, qcorr::DriftSpec{gamma, qcorr::PauliAxis::Y}, cfg,
                                            qcorr::OptimizerConfig::for_gamma(gamma), rng);
            }
            py::dict d;
            d["pulse"] = from_pulse(res.pulse);
            d["fidelity"] = res.fidelity;
            d["f_err"] = res.f_err;
            d["iterations"] = res.iterations;
            d["converged"] = res.converged;
            return d;
        },
        py::arg("target"), py::arg("gamma") = 0.0, py::arg("seed") = 0, py::arg("slots") = 16,
        py::arg("total_time") = 2.1);

    m.def(
        "generate_dataset",
        [](int count, const std::vector<double>& gammas, std::uint64_t seed,
           const std::filesystem::path& out, int threads) {
            py::gil_scoped_release release;
            const auto data = qcorr::generate_dataset(count, gammas, seed,
                                                      qcorr::GenerationConfig{}, {}, threads);
            qcorr::save_dataset(data, out);
            return data.records.size();
        },
        py::arg("count"), py::arg("gammas"), py::arg("seed"), py::arg("out"),
        py::arg("threads") = 1);

    m.def(
        "load_records",
        [](const std::filesystem::path& dir) {
            const auto data = qcorr::load_dataset(dir);
            py::list out;
            for (const auto& r : data.records) out.append(record_dict(r));
            return out;
        },
        py::arg("dir"));

    m.def(
        "kmeans",
        [](const RealArray& features, int k, std::uint64_t seed) {
            if (features.ndim() != 2) throw std::invalid_argument("expected (n, d) features");
            const auto n = static_cast<std::size_t>(features.shape(0));
            const auto d = static_cast<std::size_t>(features.shape(1));
            std::vector<std::vector<double>> pts(n);
            for (std::size_t i = 0; i < n; ++i) {
                pts[i].assign(features.data() + i * d, features.data() + (i + 1) * d);
            }
            const auto res = qcorr::kmeans(pts, k, seed);
            RealArray centroids({static_cast<py::ssize_t>(k), static_cast<py::ssize_t>(d)});
            for (std::size_t c = 0; c < res.centroids.size(); ++c) {
                std::copy(res.centroids[c].begin(), res.centroids[c].end(),
                          centroids.mutable_data() + c * d);
            }
            return py::make_tuple(py::array(py::cast(res.labels)), centroids,
                                  res.inertia.back());
        },
        py::arg("features"), py::arg("k"), py::arg("seed") = 0);

    // spec is the same JSON object the CLI accepts with --spec.
    m.def(
        "run_experiment",
        [](const std::string& spec_json) {
            const auto j = qcorr::io::Json::parse(spec_json);
            const auto spec =
                qcorr::ExperimentSpec::from_json(j, qcorr::ExperimentSpec::defaults(qcorr::Profile::Paper));
            spec.validate();
            std::string csv;
            {
                py::gil_scoped_release release;
                const auto data = qcorr::load_dataset(spec.data);
                csv = qcorr::to_csv(qcorr::run_experiment(spec, data));
            }
            return csv;
        },
        py::arg("spec_json"));
}

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

#include "qcorr/dynamics.hpp"

namespace qcorr {

enum class InitMode { Zero };

/// Backtracking line search parameters for projected gradient ascent.
struct StepControl {
    double initial_step = 1.0;
    double shrink = 0.5;
    int max_halvings = 40;
    /// Armijo sufficient-increase constant.
    double sufficient_increase = 1e-4;

    bool operator==(const StepControl&) const = default;
};

struct OptimizerConfig {
    int max_iterations = 2000;
    double f_err_goal = 1e-6;
    double grad_tol = 1e-10;
    StepControl step;
    InitMode init_mode = InitMode::Zero;
    /// Extra attempts from the zero pulse plus a uniform perturbation of
    /// +-restart_scale when an attempt ends unconverged.
    int max_restarts = 3;
    double restart_scale = 0.05;

    void validate() const;

    /// Defaults keyed on drift strength: 1e-6 goal without drift, 1e-5 with.
    static OptimizerConfig for_gamma(double gamma);

    bool operator==(const OptimizerConfig&) const = default;
};

struct OptResult {
    ControlPulse pulse;
    double fidelity = 0.0;
    double f_err = 1.0;
    int iterations = 0;
    bool converged = false;
};

/// Fidelity of the pulse's propagator against target together with its exact
/// gradient with respect to every amplitude (row-major, same layout as
/// ControlPulse). Forward products P_i = U_i...U_0 and backward products
/// B_i = U_{n-1}...U_{i+1} are cached so one call costs O(n).
struct FidelityAndGradient {
    double fidelity = 0.0;
    ControlPulse gradient;
};

FidelityAndGradient fidelity_and_gradient(const ControlPulse& pulse, const Unitary& target,
                                          const DriftSpec& drift, const SimConfig& cfg);

ControlPulse fidelity_gradient(const ControlPulse& pulse, const Unitary& target,
                               const DriftSpec& drift, const SimConfig& cfg);

/// Derivatives of pauli_step with respect to hx and hz.
struct StepDerivative {
    Unitary d_hx;
    Unitary d_hz;
};
StepDerivative pauli_step_derivative(double hx, double hz, const DriftSpec& drift, double dt);

/// Projected gradient ascent with backtracking, started from the zero pulse.
/// The rng is only consumed by restarts, so results are a deterministic
/// function of (target, drift, configs, rng state).
OptResult optimize_pulse(const Unitary& target, const DriftSpec& drift, const SimConfig& cfg,
                         const OptimizerConfig& opt, Rng& rng);

/// Single ascent run from a given starting pulse. Exposed for tests that
/// track the objective across iterations.
OptResult ascend_from(ControlPulse start, const Unitary& target, const DriftSpec& drift,
                      const SimConfig& cfg, const OptimizerConfig& opt,
                      std::vector<double>* fidelity_trace = nullptr);

}  // namespace qcorr

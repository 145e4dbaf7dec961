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

#include "qcorr/pulse_opt.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace qcorr {

namespace {

const Complex kI{0.0, 1.0};

// Below this value of omega * dt the sinc-type coefficients switch to their
// Taylor series; the direct formula for C loses ~eps / x^2 relative accuracy.
constexpr double kSeriesThreshold = 1e-2;

std::array<double, 3> total_field(double hx, double hz, const DriftSpec& drift) {
    std::array<double, 3> f{hx, 0.0, hz};
    f[static_cast<int>(drift.axis)] += drift.gamma;
    return f;
}

double dot(const ControlPulse& a, const ControlPulse& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.flat().size(); ++i) {
        s += a.flat()[i] * b.flat()[i];
    }
    return s;
}

// Tr(M D) for 2x2 matrices.
Complex trace_product(const Unitary& m, const Unitary& d) {
    return m.m[0] * d.m[0] + m.m[1] * d.m[2] + m.m[2] * d.m[1] + m.m[3] * d.m[3];
}

}  // namespace

void OptimizerConfig::validate() const {
    if (max_iterations < 1) {
        throw std::invalid_argument("OptimizerConfig: max_iterations must be >= 1");
    }
    if (!(f_err_goal > 0.0 && f_err_goal < 1.0)) {
        throw std::invalid_argument("OptimizerConfig: f_err_goal must lie in (0, 1)");
    }
    if (!(step.shrink > 0.0 && step.shrink < 1.0) || !(step.initial_step > 0.0)) {
        throw std::invalid_argument("OptimizerConfig: invalid step control");
    }
    if (max_restarts < 0 || restart_scale < 0.0) {
        throw std::invalid_argument("OptimizerConfig: invalid restart policy");
    }
}

OptimizerConfig OptimizerConfig::for_gamma(double gamma) {
    OptimizerConfig cfg;
    cfg.f_err_goal = gamma == 0.0 ? 1e-6 : 1e-5;
    return cfg;
}

StepDerivative pauli_step_derivative(double hx, double hz, const DriftSpec& drift, double dt) {
    const auto f = total_field(hx, hz, drift);
    const double omega = std::sqrt(f[0] * f[0] + f[1] * f[1] + f[2] * f[2]);
    const double x = omega * dt;
    double a = 0.0;  // sin(omega dt) / omega
    double c = 0.0;  // (dt cos(omega dt) - a) / omega^2
    if (x < kSeriesThreshold) {
        const double x2 = x * x;
        a = dt * (1.0 - x2 / 6.0 + x2 * x2 / 120.0);
        c = dt * dt * dt * (-1.0 / 3.0 + x2 / 30.0 - x2 * x2 / 840.0);
    } else {
        a = std::sin(x) / omega;
        c = (dt * std::cos(x) - a) / (omega * omega);
    }
    const Unitary h = Complex(f[0]) * Unitary::sigma_x() + Complex(f[1]) * Unitary::sigma_y() +
                      Complex(f[2]) * Unitary::sigma_z();
    // dU/df_j = -dt a f_j I - i (c f_j H + a sigma_j)
    auto partial = [&](double fj, const Unitary& sigma) {
        return Complex(-dt * a * fj) * Unitary::identity() +
               (-kI) * (Complex(c * fj) * h + Complex(a) * sigma);
    };
    return StepDerivative{partial(f[0], Unitary::sigma_x()), partial(f[2], Unitary::sigma_z())};
}

FidelityAndGradient fidelity_and_gradient(const ControlPulse& pulse, const Unitary& target,
                                          const DriftSpec& drift, const SimConfig& cfg) {
    cfg.validate();
    const int n = pulse.slots();
    if (n != cfg.slot_count) {
        throw std::invalid_argument("fidelity_gradient: pulse has " + std::to_string(n) +
                                    " slots, config expects " + std::to_string(cfg.slot_count));
    }
    const double dt = cfg.dt();
    std::vector<Unitary> steps(static_cast<std::size_t>(n));
    // forward[i] = U_{i-1} ... U_0, forward[0] = I
    std::vector<Unitary> forward(static_cast<std::size_t>(n) + 1);
    forward[0] = Unitary::identity();
    for (int i = 0; i < n; ++i) {
        steps[i] = pauli_step(pulse(i, 0), pulse(i, 1), drift, dt);
        forward[i + 1] = steps[i] * forward[i];
    }
    const Unitary target_dag = target.adjoint();
    const Complex overlap = (target_dag * forward[n]).trace();

    FidelityAndGradient out;
    out.fidelity = std::norm(overlap) / 4.0;
    out.gradient = ControlPulse(n);

    // backward = U_{n-1} ... U_{i+1}
    Unitary backward = Unitary::identity();
    for (int i = n - 1; i >= 0; --i) {
        // d overlap = Tr(V^dag B_i dU_i P_{i-1}) = Tr(P_{i-1} V^dag B_i dU_i)
        const Unitary m = forward[i] * target_dag * backward;
        const StepDerivative d = pauli_step_derivative(pulse(i, 0), pulse(i, 1), drift, dt);
        const Complex dx = trace_product(m, d.d_hx);
        const Complex dz = trace_product(m, d.d_hz);
        out.gradient(i, 0) = 0.5 * std::real(std::conj(overlap) * dx);
        out.gradient(i, 1) = 0.5 * std::real(std::conj(overlap) * dz);
        backward = backward * steps[i];
    }
    return out;
}

ControlPulse fidelity_gradient(const ControlPulse& pulse, const Unitary& target,
                               const DriftSpec& drift, const SimConfig& cfg) {
    return fidelity_and_gradient(pulse, target, drift, cfg).gradient;
}

OptResult ascend_from(ControlPulse start, const Unitary& target, const DriftSpec& drift,
                      const SimConfig& cfg, const OptimizerConfig& opt,
                      std::vector<double>* fidelity_trace) {
    const double bound = cfg.control_bound;
    ControlPulse x = start.clamped(bound);
    FidelityAndGradient cur = fidelity_and_gradient(x, target, drift, cfg);
    if (fidelity_trace != nullptr) {
        fidelity_trace->push_back(cur.fidelity);
    }

    double step = opt.step.initial_step;
    int iterations = 0;
    bool converged = false;
    const std::size_t dim = x.flat().size();

    while (true) {
        if (1.0 - cur.fidelity <= opt.f_err_goal) {
            converged = true;
            break;
        }
        if (iterations >= opt.max_iterations) {
            break;
        }
        double pg_norm2 = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            const double g = cur.gradient.flat()[j];
            const double v = x.flat()[j];
            if ((v >= bound && g > 0.0) || (v <= -bound && g < 0.0)) {
                continue;
            }
            pg_norm2 += g * g;
        }
        if (std::sqrt(pg_norm2) < opt.grad_tol) {
            break;
        }

        bool accepted = false;
        ControlPulse trial;
        FidelityAndGradient next;
        double alpha = step;
        for (int h = 0; h <= opt.step.max_halvings; ++h) {
            trial = x;
            for (std::size_t j = 0; j < dim; ++j) {
                trial.flat()[j] += alpha * cur.gradient.flat()[j];
            }
            trial = trial.clamped(bound);
            const ControlPulse move = trial - x;
            const double predicted = dot(cur.gradient, move);
            next = fidelity_and_gradient(trial, target, drift, cfg);
            if (predicted > 0.0 &&
                next.fidelity >= cur.fidelity + opt.step.sufficient_increase * predicted) {
                accepted = true;
                break;
            }
            alpha *= opt.step.shrink;
        }
        if (!accepted) {
            break;
        }

        // Barzilai-Borwein trial length for the next iteration; the ascent
        // problem has negative curvature along s when s.y < 0.
        const ControlPulse s = trial - x;
        const ControlPulse y = next.gradient - cur.gradient;
        const double sy = dot(s, y);
        const double ss = dot(s, s);
        if (sy < 0.0 && ss > 0.0) {
            step = ss / -sy;
        } else {
            step = 2.0 * alpha;
        }
        step = std::min(step, 1e3);

        x = std::move(trial);
        cur = std::move(next);
        ++iterations;
        if (fidelity_trace != nullptr) {
            fidelity_trace->push_back(cur.fidelity);
        }
    }

    OptResult result;
    result.pulse = std::move(x);
    result.fidelity = fidelity(propagate(result.pulse, drift, cfg), target);
    result.f_err = 1.0 - result.fidelity;
    result.iterations = iterations;
    result.converged = converged;
    return result;
}

OptResult optimize_pulse(const Unitary& target, const DriftSpec& drift, const SimConfig& cfg,
                         const OptimizerConfig& opt, Rng& rng) {
    cfg.validate();
    opt.validate();
    OptResult best = ascend_from(ControlPulse::zeros(cfg.slot_count), target, drift, cfg, opt);
    std::uniform_real_distribution<double> perturb(-opt.restart_scale, opt.restart_scale);
    for (int r = 0; r < opt.max_restarts && !best.converged; ++r) {
        ControlPulse start = ControlPulse::zeros(cfg.slot_count);
        for (double& v : start.flat()) {
            v = perturb(rng);
        }
        OptResult attempt = ascend_from(std::move(start), target, drift, cfg, opt);
        if (attempt.converged || attempt.fidelity > best.fidelity) {
            best = std::move(attempt);
        }
    }
    return best;
}

}  // namespace qcorr

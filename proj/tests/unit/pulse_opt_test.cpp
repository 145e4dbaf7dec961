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

#include <algorithm>
#include <cmath>

#include "qcorr/pulse_opt.hpp"

namespace qcorr {
namespace {

ControlPulse random_pulse(int slots, Rng& rng, double bound = 1.0) {
    std::uniform_real_distribution<double> u(-bound, bound);
    ControlPulse p(slots);
    for (double& v : p.flat()) v = u(rng);
    return p;
}

double relative_error(double analytic, double numeric) {
    return std::abs(analytic - numeric) / std::max(std::abs(numeric), 1e-4);
}

TEST(Gradient, MatchesCentralDifferences) {
    Rng rng(17);
    const SimConfig cfg;
    const double h = 1e-6;
    for (int trial = 0; trial < 20; ++trial) {
        const ControlPulse p = random_pulse(16, rng, 0.9);
        const Unitary target = haar_random_unitary(rng);
        const DriftSpec drift{0.1 * trial / 2.0};
        const ControlPulse g = fidelity_gradient(p, target, drift, cfg);
        for (std::size_t i = 0; i < p.flat().size(); ++i) {
            ControlPulse up = p, down = p;
            up.flat()[i] += h;
            down.flat()[i] -= h;
            const double fd = (fidelity(propagate(up, drift, cfg), target) -
                               fidelity(propagate(down, drift, cfg), target)) /
                              (2 * h);
            EXPECT_LT(relative_error(g.flat()[i], fd), 1e-5) << "trial " << trial << " index " << i;
        }
    }
}

TEST(Gradient, AccurateNearZeroFrequency) {
    // Exercises the series branch of the step derivative.
    Rng rng(18);
    const SimConfig cfg;
    const Unitary target = haar_random_unitary(rng);
    const ControlPulse p = random_pulse(16, rng, 1e-4);
    const ControlPulse g = fidelity_gradient(p, target, DriftSpec{0.0}, cfg);
    const double h = 1e-6;
    for (std::size_t i = 0; i < p.flat().size(); ++i) {
        ControlPulse up = p, down = p;
        up.flat()[i] += h;
        down.flat()[i] -= h;
        const double fd = (fidelity(propagate(up, DriftSpec{}, cfg), target) -
                           fidelity(propagate(down, DriftSpec{}, cfg), target)) /
                          (2 * h);
        EXPECT_LT(relative_error(g.flat()[i], fd), 1e-5);
    }
}

TEST(Gradient, StepDerivativeMatchesDifferences) {
    const double h = 1e-6;
    for (auto [hx, hz, gamma] : {std::tuple{0.3, -0.4, 0.5}, std::tuple{0.0, 0.0, 0.0},
                                 std::tuple{1e-5, 2e-5, 0.0}, std::tuple{-0.9, 0.8, 0.2}}) {
        const DriftSpec d{gamma};
        const StepDerivative sd = pauli_step_derivative(hx, hz, d, 0.13125);
        const Unitary fx = Complex(1.0 / (2 * h)) *
                           (pauli_step(hx + h, hz, d, 0.13125) - pauli_step(hx - h, hz, d, 0.13125));
        const Unitary fz = Complex(1.0 / (2 * h)) *
                           (pauli_step(hx, hz + h, d, 0.13125) - pauli_step(hx, hz - h, d, 0.13125));
        EXPECT_LT(distance(sd.d_hx, fx), 1e-8);
        EXPECT_LT(distance(sd.d_hz, fz), 1e-8);
    }
}

TEST(Gradient, VanishesAtExactSolution) {
    Rng rng(19);
    const SimConfig cfg;
    for (int i = 0; i < 10; ++i) {
        const ControlPulse p = random_pulse(16, rng, 0.8);
        const DriftSpec drift{0.4};
        const Unitary target = std::polar(1.0, 0.3 * i) * propagate(p, drift, cfg);
        const FidelityAndGradient fg = fidelity_and_gradient(p, target, drift, cfg);
        EXPECT_NEAR(fg.fidelity, 1.0, 1e-13);
        double norm = 0.0;
        for (double v : fg.gradient.flat()) norm += v * v;
        EXPECT_LT(std::sqrt(norm), 1e-8);
    }
}

TEST(Gradient, ZeroPulseIdentityTargetNoDrift) {
    const ControlPulse g =
        fidelity_gradient(ControlPulse::zeros(16), Unitary::identity(), DriftSpec{}, SimConfig{});
    for (double v : g.flat()) EXPECT_EQ(v, 0.0);
}

TEST(Optimizer, IdentityTargetConvergesImmediately) {
    Rng rng(1);
    const OptResult r =
        optimize_pulse(Unitary::identity(), DriftSpec{}, SimConfig{}, OptimizerConfig{}, rng);
    EXPECT_TRUE(r.converged);
    EXPECT_EQ(r.iterations, 0);
    EXPECT_EQ(r.fidelity, 1.0);
    EXPECT_EQ(r.pulse, ControlPulse::zeros(16));
}

TEST(Optimizer, ObjectiveNeverDecreases) {
    Rng rng(2);
    const SimConfig cfg;
    for (int i = 0; i < 10; ++i) {
        const Unitary target = haar_random_unitary(rng);
        std::vector<double> trace;
        ascend_from(ControlPulse::zeros(16), target, DriftSpec{0.6}, cfg,
                    OptimizerConfig::for_gamma(0.6), &trace);
        ASSERT_FALSE(trace.empty());
        for (std::size_t k = 1; k < trace.size(); ++k) EXPECT_GE(trace[k], trace[k - 1]);
    }
}

TEST(Optimizer, ResultsStayInBoxAndReportConsistently) {
    Rng rng(3);
    const SimConfig cfg;
    for (double gamma : {0.0, 0.4, 0.8}) {
        for (int i = 0; i < 10; ++i) {
            const Unitary target = haar_random_unitary(rng);
            const OptimizerConfig opt = OptimizerConfig::for_gamma(gamma);
            const OptResult r = optimize_pulse(target, DriftSpec{gamma}, cfg, opt, rng);
            EXPECT_TRUE(r.pulse.within_box(cfg.control_bound));
            EXPECT_DOUBLE_EQ(r.fidelity + r.f_err, 1.0);
            EXPECT_EQ(r.fidelity, fidelity(propagate(r.pulse, DriftSpec{gamma}, cfg), target));
            EXPECT_EQ(r.converged, r.f_err <= opt.f_err_goal);
        }
    }
}

TEST(Optimizer, ReachesHighFidelity) {
    Rng rng(4);
    const SimConfig cfg;
    double sum0 = 0.0, sum4 = 0.0;
    const int targets = 30;
    for (int i = 0; i < targets; ++i) {
        const Unitary target = haar_random_unitary(rng);
        sum0 += optimize_pulse(target, DriftSpec{}, cfg, OptimizerConfig::for_gamma(0), rng).fidelity;
        sum4 += optimize_pulse(target, DriftSpec{0.4}, cfg, OptimizerConfig::for_gamma(0.4), rng)
                    .fidelity;
    }
    EXPECT_GE(sum0 / targets, 0.999);
    EXPECT_GE(sum4 / targets, 0.99);
}

TEST(Optimizer, DeterministicGivenSeed) {
    Rng t(5);
    const Unitary target = haar_random_unitary(t);
    Rng a(42), b(42);
    const OptResult x =
        optimize_pulse(target, DriftSpec{0.8}, SimConfig{}, OptimizerConfig::for_gamma(0.8), a);
    const OptResult y =
        optimize_pulse(target, DriftSpec{0.8}, SimConfig{}, OptimizerConfig::for_gamma(0.8), b);
    EXPECT_EQ(x.pulse, y.pulse);
    EXPECT_EQ(x.fidelity, y.fidelity);
    EXPECT_EQ(x.iterations, y.iterations);
}

TEST(OptimizerConfig, GoalsAndValidation) {
    EXPECT_EQ(OptimizerConfig::for_gamma(0).f_err_goal, 1e-6);
    EXPECT_EQ(OptimizerConfig::for_gamma(0.2).f_err_goal, 1e-5);
    OptimizerConfig bad;
    bad.max_iterations = 0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
    bad = OptimizerConfig{};
    bad.f_err_goal = 1.0;
    EXPECT_THROW(bad.validate(), std::invalid_argument);
}

}  // namespace
}  // namespace qcorr

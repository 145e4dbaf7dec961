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

#include "qcorr/dynamics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace qcorr {

namespace {

constexpr double kZeroFieldThreshold = 1e-12;
const Complex kI{0.0, 1.0};

}  // namespace

void SimConfig::validate() const {
    if (!(total_time > 0.0) || !std::isfinite(total_time)) {
        throw std::invalid_argument("SimConfig: total_time must be positive, got " +
                                    std::to_string(total_time));
    }
    if (slot_count < 1) {
        throw std::invalid_argument("SimConfig: slot_count must be >= 1, got " +
                                    std::to_string(slot_count));
    }
    if (!(control_bound > 0.0) || !std::isfinite(control_bound)) {
        throw std::invalid_argument("SimConfig: control_bound must be positive, got " +
                                    std::to_string(control_bound));
    }
}

ControlPulse::ControlPulse(int slots) : slots_(slots) {
    if (slots < 0) {
        throw std::invalid_argument("ControlPulse: negative slot count");
    }
    values_.assign(static_cast<std::size_t>(slots) * kChannels, 0.0);
}

ControlPulse::ControlPulse(int slots, std::vector<double> row_major)
    : slots_(slots), values_(std::move(row_major)) {
    if (slots < 0 || values_.size() != static_cast<std::size_t>(slots) * kChannels) {
        throw std::invalid_argument("ControlPulse: expected " + std::to_string(2 * slots) +
                                    " values, got " + std::to_string(values_.size()));
    }
}

std::vector<double> ControlPulse::channel(int channel) const {
    std::vector<double> out(static_cast<std::size_t>(slots_));
    for (int s = 0; s < slots_; ++s) {
        out[static_cast<std::size_t>(s)] = (*this)(s, channel);
    }
    return out;
}

bool ControlPulse::within_box(double bound) const {
    return std::all_of(values_.begin(), values_.end(),
                       [bound](double v) { return v >= -bound && v <= bound; });
}

ControlPulse ControlPulse::clamped(double bound) const {
    ControlPulse out = *this;
    for (double& v : out.values_) {
        v = std::clamp(v, -bound, bound);
    }
    return out;
}

ControlPulse& ControlPulse::operator+=(const ControlPulse& other) {
    if (other.slots_ != slots_) {
        throw std::invalid_argument("ControlPulse: slot count mismatch in addition");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        values_[i] += other.values_[i];
    }
    return *this;
}

ControlPulse& ControlPulse::operator-=(const ControlPulse& other) {
    if (other.slots_ != slots_) {
        throw std::invalid_argument("ControlPulse: slot count mismatch in subtraction");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        values_[i] -= other.values_[i];
    }
    return *this;
}

Unitary Unitary::identity() { return Unitary{{1.0, 0.0, 0.0, 1.0}}; }
Unitary Unitary::sigma_x() { return Unitary{{0.0, 1.0, 1.0, 0.0}}; }
Unitary Unitary::sigma_y() { return Unitary{{0.0, -kI, kI, 0.0}}; }
Unitary Unitary::sigma_z() { return Unitary{{1.0, 0.0, 0.0, -1.0}}; }

Unitary Unitary::adjoint() const {
    return Unitary{{std::conj(m[0]), std::conj(m[2]), std::conj(m[1]), std::conj(m[3])}};
}

double Unitary::unitarity_error() const {
    const Unitary p = adjoint() * (*this);
    return distance(p, identity());
}

Unitary operator*(const Unitary& a, const Unitary& b) {
    return Unitary{{a.m[0] * b.m[0] + a.m[1] * b.m[2], a.m[0] * b.m[1] + a.m[1] * b.m[3],
                    a.m[2] * b.m[0] + a.m[3] * b.m[2], a.m[2] * b.m[1] + a.m[3] * b.m[3]}};
}

Unitary operator*(Complex s, const Unitary& a) {
    return Unitary{{s * a.m[0], s * a.m[1], s * a.m[2], s * a.m[3]}};
}

Unitary operator+(const Unitary& a, const Unitary& b) {
    return Unitary{{a.m[0] + b.m[0], a.m[1] + b.m[1], a.m[2] + b.m[2], a.m[3] + b.m[3]}};
}

Unitary operator-(const Unitary& a, const Unitary& b) {
    return Unitary{{a.m[0] - b.m[0], a.m[1] - b.m[1], a.m[2] - b.m[2], a.m[3] - b.m[3]}};
}

double distance(const Unitary& a, const Unitary& b) {
    double s = 0.0;
    for (int i = 0; i < 4; ++i) {
        s += std::norm(a.m[i] - b.m[i]);
    }
    return std::sqrt(s);
}

double Superoperator::unitarity_error() const {
    double s = 0.0;
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) {
            Complex acc = 0.0;
            for (int k = 0; k < 4; ++k) {
                acc += std::conj(m[4 * k + r]) * m[4 * k + c];
            }
            s += std::norm(acc - (r == c ? 1.0 : 0.0));
        }
    }
    return std::sqrt(s);
}

namespace {

void check_finite(double v, const char* name) {
    if (!std::isfinite(v)) {
        throw std::invalid_argument(std::string("pauli_step: non-finite ") + name);
    }
}

// exp(-i dt (fx sx + fy sy + fz sz))
Unitary pauli_exponential(double fx, double fy, double fz, double dt) {
    const double omega = std::sqrt(fx * fx + fy * fy + fz * fz);
    if (omega < kZeroFieldThreshold) {
        return Unitary::identity();
    }
    const double c = std::cos(omega * dt);
    const double s = std::sin(omega * dt) / omega;
    // cos I - i s (fx sx + fy sy + fz sz)
    return Unitary{{Complex(c, -s * fz), Complex(-s * fy, -s * fx),
                    Complex(s * fy, -s * fx), Complex(c, s * fz)}};
}

}  // namespace

Unitary pauli_step(double hx, double hz, double gamma, double dt) {
    return pauli_step(hx, hz, DriftSpec{gamma, PauliAxis::Y}, dt);
}

Unitary pauli_step(double hx, double hz, const DriftSpec& drift, double dt) {
    check_finite(hx, "hx");
    check_finite(hz, "hz");
    check_finite(drift.gamma, "gamma");
    check_finite(dt, "dt");
    if (!(dt > 0.0)) {
        throw std::invalid_argument("pauli_step: dt must be positive");
    }
    double fx = hx;
    double fy = 0.0;
    double fz = hz;
    switch (drift.axis) {
        case PauliAxis::X: fx += drift.gamma; break;
        case PauliAxis::Y: fy += drift.gamma; break;
        case PauliAxis::Z: fz += drift.gamma; break;
    }
    return pauli_exponential(fx, fy, fz, dt);
}

Unitary propagate(const ControlPulse& pulse, const DriftSpec& drift, const SimConfig& cfg) {
    cfg.validate();
    if (pulse.slots() != cfg.slot_count) {
        throw std::invalid_argument("propagate: pulse has " + std::to_string(pulse.slots()) +
                                    " slots, config expects " + std::to_string(cfg.slot_count));
    }
    const double dt = cfg.dt();
    Unitary u = Unitary::identity();
    for (int s = 0; s < pulse.slots(); ++s) {
        u = pauli_step(pulse(s, 0), pulse(s, 1), drift, dt) * u;
    }
    return u;
}

Superoperator superoperator(const Unitary& u) {
    Superoperator s;
    for (int r1 = 0; r1 < 2; ++r1) {
        for (int c1 = 0; c1 < 2; ++c1) {
            for (int r2 = 0; r2 < 2; ++r2) {
                for (int c2 = 0; c2 < 2; ++c2) {
                    s(2 * r1 + r2, 2 * c1 + c2) = u(r1, c1) * std::conj(u(r2, c2));
                }
            }
        }
    }
    return s;
}

double superoperator_fidelity(const Superoperator& x, const Superoperator& y) {
    constexpr double kDim = 2.0;
    double err = 0.0;
    for (int i = 0; i < 16; ++i) {
        err += std::norm(y.m[i] - x.m[i]);
    }
    return 1.0 - err / (2.0 * kDim * kDim);
}

double fidelity(const Unitary& x, const Unitary& y) {
    const Complex overlap = (y.adjoint() * x).trace();
    return std::clamp(std::norm(overlap) / 4.0, 0.0, 1.0);
}

Unitary haar_random_unitary(Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::Matrix2cd z;
    for (int r = 0; r < 2; ++r) {
        for (int c = 0; c < 2; ++c) {
            const double re = normal(rng);
            const double im = normal(rng);
            z(r, c) = Complex(re, im) / std::sqrt(2.0);
        }
    }
    Eigen::HouseholderQR<Eigen::Matrix2cd> qr(z);
    Eigen::Matrix2cd q = qr.householderQ();
    const Eigen::Matrix2cd r = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int c = 0; c < 2; ++c) {
        const double mag = std::abs(r(c, c));
        const Complex phase = mag > 0.0 ? r(c, c) / mag : Complex(1.0);
        q.col(c) *= phase;
    }
    Unitary u;
    for (int r2 = 0; r2 < 2; ++r2) {
        for (int c = 0; c < 2; ++c) {
            u(r2, c) = q(r2, c);
        }
    }
    return u;
}

}  // namespace qcorr

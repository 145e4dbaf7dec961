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

#include <array>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace qcorr {

using Complex = std::complex<double>;

/// Seedable random stream used across the library. Every consumer takes it
/// by reference; workers own independent instances.
using Rng = std::mt19937_64;

/// Evolution time, slot count and control box of the piecewise-constant model.
struct SimConfig {
    double total_time = 2.1;
    int slot_count = 16;
    double control_bound = 1.0;

    /// Throws std::invalid_argument when an invariant is violated.
    void validate() const;
    double dt() const { return total_time / slot_count; }

    bool operator==(const SimConfig&) const = default;
};

/// slot_count x 2 real amplitude matrix. Channel 0 drives sigma_x, channel 1
/// drives sigma_z. Storage is row-major: (slot0:x, slot0:z, slot1:x, ...).
///
/// The type itself does not enforce the control box; corrections and
/// differences of pulses share the representation. Use within_box() and
/// clamped() where the box matters.
class ControlPulse {
public:
    static constexpr int kChannels = 2;

    ControlPulse() = default;
    explicit ControlPulse(int slots);
    ControlPulse(int slots, std::vector<double> row_major);

    static ControlPulse zeros(int slots) { return ControlPulse(slots); }

    int slots() const { return slots_; }
    double& operator()(int slot, int channel) { return values_[index(slot, channel)]; }
    double operator()(int slot, int channel) const { return values_[index(slot, channel)]; }

    const std::vector<double>& flat() const { return values_; }
    std::vector<double>& flat() { return values_; }

    /// Values of one channel across all slots.
    std::vector<double> channel(int channel) const;

    bool within_box(double bound) const;
    ControlPulse clamped(double bound) const;

    ControlPulse& operator+=(const ControlPulse& other);
    ControlPulse& operator-=(const ControlPulse& other);
    friend ControlPulse operator+(ControlPulse a, const ControlPulse& b) { return a += b; }
    friend ControlPulse operator-(ControlPulse a, const ControlPulse& b) { return a -= b; }

    bool operator==(const ControlPulse&) const = default;

private:
    std::size_t index(int slot, int channel) const {
        return static_cast<std::size_t>(slot) * kChannels + static_cast<std::size_t>(channel);
    }

    int slots_ = 0;
    std::vector<double> values_;
};

enum class PauliAxis { X, Y, Z };

/// Always-on drift term gamma * sigma_axis. Every shipped experiment uses Y.
struct DriftSpec {
    double gamma = 0.0;
    PauliAxis axis = PauliAxis::Y;
};

/// 2x2 complex matrix, row-major.
struct Unitary {
    std::array<Complex, 4> m{};

    Complex& operator()(int r, int c) { return m[2 * r + c]; }
    Complex operator()(int r, int c) const { return m[2 * r + c]; }

    static Unitary identity();
    static Unitary sigma_x();
    static Unitary sigma_y();
    static Unitary sigma_z();

    Unitary adjoint() const;
    Complex trace() const { return m[0] + m[3]; }
    /// Frobenius norm of U^dagger U - I.
    double unitarity_error() const;

    friend Unitary operator*(const Unitary& a, const Unitary& b);
    friend Unitary operator*(Complex s, const Unitary& a);
    friend Unitary operator+(const Unitary& a, const Unitary& b);
    friend Unitary operator-(const Unitary& a, const Unitary& b);
};

/// Frobenius norm of a - b.
double distance(const Unitary& a, const Unitary& b);

/// 4x4 complex matrix, row-major.
struct Superoperator {
    std::array<Complex, 16> m{};

    Complex operator()(int r, int c) const { return m[4 * r + c]; }
    Complex& operator()(int r, int c) { return m[4 * r + c]; }
    double unitarity_error() const;
};

/// exp(-i dt (hx sx + gamma sy + hz sz)) in closed form.
Unitary pauli_step(double hx, double hz, double gamma, double dt);

/// Same exponential with an explicit drift axis.
Unitary pauli_step(double hx, double hz, const DriftSpec& drift, double dt);

/// Time-ordered product U_{n-1} ... U_1 U_0 over the pulse slots.
Unitary propagate(const ControlPulse& pulse, const DriftSpec& drift, const SimConfig& cfg);

/// u (x) conj(u).
Superoperator superoperator(const Unitary& u);

/// 1 - F_err with F_err = Tr((Y - X)^dagger (Y - X)) / (2 N^2), evaluated on
/// the 4x4 superoperators. Reference route for fidelity().
double superoperator_fidelity(const Superoperator& x, const Superoperator& y);

/// Gate fidelity |Tr(y^dagger x)|^2 / 4, clamped to [0, 1]. Equal to
/// superoperator_fidelity(superoperator(x), superoperator(y)) and invariant
/// under a global phase on either argument.
double fidelity(const Unitary& x, const Unitary& y);

/// Haar-distributed 2x2 unitary: QR of a complex Ginibre matrix with the
/// column phases fixed by diag(R).
Unitary haar_random_unitary(Rng& rng);

}  // namespace qcorr

// Copyright 2026 The vxpm Authors
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

#ifndef VXPM_TYPES_HPP
#define VXPM_TYPES_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>

namespace vxpm {

using Complex = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr Complex kImag{0.0, 1.0};

class InvalidParameter : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class GridMismatch : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ResolutionInsufficient : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class InvalidState : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Physical parameters of the gate. All quantities are wavenumbers (inverse
// length, working in tau = ct units). Everything downstream depends only on
// the ratios gamma/Gamma and delta/Gamma, so the canonical choice is
// Gamma_H = Gamma_V = 1 and omega1 = 0 with k0 carrying the detuning.
struct GateParams {
    double k0 = 0.0;       // pulse carrier wavenumber
    double gamma = 1.0;    // pulse bandwidth
    double omega1 = 0.0;   // atomic resonance
    double gamma_h = 1.0;  // effective atom-field coupling, H polarization
    double gamma_v = 1.0;  // effective atom-field coupling, V polarization

    // Detuning is always derived, never stored.
    double delta() const { return k0 - omega1; }

    bool symmetric_coupling() const { return gamma_h == gamma_v; }

    double coupling_scale() const { return std::max(gamma_h, gamma_v); }

    // Canonical nondimensionalized parameter set: rates in units of Gamma.
    static GateParams dimensionless(double delta, double gamma) {
        GateParams p;
        p.k0 = delta;
        p.gamma = gamma;
        p.omega1 = 0.0;
        p.gamma_h = 1.0;
        p.gamma_v = 1.0;
        p.validate();
        return p;
    }

    void validate() const {
        if (!(gamma > 0.0)) {
            throw InvalidParameter("GateParams: gamma must be positive");
        }
        if (!(gamma_h > 0.0) || !(gamma_v > 0.0)) {
            throw InvalidParameter("GateParams: couplings must be positive");
        }
        if (!std::isfinite(k0) || !std::isfinite(omega1)) {
            throw InvalidParameter("GateParams: non-finite frequency");
        }
    }
};

}  // namespace vxpm

#endif  // VXPM_TYPES_HPP

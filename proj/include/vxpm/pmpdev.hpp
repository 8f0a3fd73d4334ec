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

#ifndef VXPM_PMPDEV_HPP
#define VXPM_PMPDEV_HPP

#include <Eigen/Dense>

#include "vxpm/scattering.hpp"

namespace vxpm {

// Time-domain model of the principal-mode loading cavity. Iris 1 is open
// until t_close_1 while the inverted principal mode drives the cavity; the
// coupling then switches off instantly until iris 2 opens at t_open_2 and
// the stored photon is re-emitted into the principal mode.
struct CavityLoader {
    double omega_cav = 0.0;   // cavity resonance wavenumber
    double gamma_cav = 1.0;   // cavity decay rate
    double t_close_1 = 0.0;   // load iris shuts
    double t_open_2 = 0.0;    // emit iris opens
    double span = 0.0;        // drive time window; 0 picks 40 / gamma_cav
    int steps_per_unit = 0;   // RK4 steps per 1/max(rate); 0 picks 100

    void validate() const {
        if (!(gamma_cav > 0.0)) throw InvalidParameter("CavityLoader: gamma_cav must be positive");
        if (t_close_1 > t_open_2) {
            throw InvalidParameter("CavityLoader: irises must not overlap (t_close_1 <= t_open_2)");
        }
    }
};

namespace detail {

// Time profile of a wavepacket arriving at the cavity: v_in(t) = psi(z = -t).
// Closed forms evaluate exactly; grid amplitudes go through the inverse
// transform psi(z) = int dk/2pi psi(k) e^{ikz}.
inline Complex drive_at(const SpectralAmplitude& psi, double t) {
    const double z = -t;
    if (psi.is_closed_form()) {
        const auto& m = psi.mode();
        const double u = m.sign > 0 ? z : -z;
        if (u > 0.0) return Complex(0.0, 0.0);
        return m.amp * std::sqrt(m.gamma) *
               std::exp(Complex(m.gamma * u / 2.0, m.center * z));
    }
    const KGridPtr g = psi.grid();
    Complex acc(0.0, 0.0);
    const Eigen::VectorXd meas = g->measure();
    const Eigen::VectorXcd& v = psi.values();
    for (Eigen::Index i = 0; i < g->size(); ++i) {
        acc += meas[i] * v[i] * std::exp(Complex(0.0, g->nodes[i] * z));
    }
    return acc;
}

}  // namespace detail

// Probability that the drive pulse is absorbed by the cavity before iris 1
// shuts: integrates db/dt = -(i omega_cav + gamma_cav/2) b + sqrt(gamma_cav)
// v_in(t) with classical RK4 and returns |b(t_close_1)|^2. Equals the
// squared overlap between the drive and the cavity's preferred absorption
// mode (the inverted decay mode).
inline double load_efficiency(const SpectralAmplitude& drive, const CavityLoader& loader) {
    loader.validate();
    const double g = loader.gamma_cav;
    double drive_rate = g;
    if (drive.is_closed_form()) drive_rate = std::max(drive_rate, drive.mode().gamma);
    const double span = loader.span > 0.0 ? loader.span : 40.0 / std::min(g, drive_rate);
    const int per_unit = loader.steps_per_unit > 0 ? loader.steps_per_unit : 100;
    const double t0 = loader.t_close_1 - span;
    const int n = std::max(64, static_cast<int>(span * drive_rate * per_unit));
    const double h = span / n;

    // Drive tail must be inside the window on both ends.
    double tail = 0.0, total = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double m = std::norm(detail::drive_at(drive, t0 + h * i));
        total += m;
        if (i < n / 50) tail += m;
    }
    if (total <= 0.0 || tail > 1e-4 * total) {
        throw ResolutionInsufficient("load_efficiency: drive tail truncated by time window");
    }

    const Complex pole(-g / 2.0, -loader.omega_cav);
    const double root_g = std::sqrt(g);
    Complex b(0.0, 0.0);
    for (int i = 0; i < n; ++i) {
        const double t = t0 + h * i;
        auto f = [&](double tt, Complex bb) {
            return pole * bb + root_g * detail::drive_at(drive, tt);
        };
        const Complex k1 = f(t, b);
        const Complex k2 = f(t + h / 2, b + h / 2 * k1);
        const Complex k3 = f(t + h / 2, b + h / 2 * k2);
        const Complex k4 = f(t + h, b + h * k3);
        b += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    return std::norm(b);
}

// Wavepacket emitted by a charged cavity after iris 2 opens: free decay
// integrated numerically and transformed onto the grid. Up to the carrier
// phase convention this reproduces the rising exponential principal mode at
// (omega_cav, gamma_cav).
inline SpectralAmplitude emit_mode(const CavityLoader& loader, const KGridPtr& grid) {
    loader.validate();
    const double g = loader.gamma_cav;
    const double span = loader.span > 0.0 ? loader.span : 40.0 / g;
    const int per_unit = loader.steps_per_unit > 0 ? loader.steps_per_unit : 100;
    const int n = std::max(64, static_cast<int>(span * g * per_unit));
    const double h = span / n;
    const Complex pole(-g / 2.0, -loader.omega_cav);
    const double root_g = std::sqrt(g);

    // b' = pole * b, v_out = sqrt(g) b; RK4 with b(t_open_2) = 1.
    Eigen::VectorXcd vout(n + 1);
    Complex b(1.0, 0.0);
    vout[0] = root_g * b;
    for (int i = 0; i < n; ++i) {
        const Complex k1 = pole * b;
        const Complex k2 = pole * (b + h / 2 * k1);
        const Complex k3 = pole * (b + h / 2 * k2);
        const Complex k4 = pole * (b + h * k3);
        b += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        vout[i + 1] = root_g * b;
    }

    // psi(k) = int dt e^{ikt} v_out(t) (emission at t maps to z = -t).
    Eigen::VectorXcd vals(grid->size());
    for (Eigen::Index i = 0; i < grid->size(); ++i) {
        const double k = grid->nodes[i];
        Complex acc = 0.5 * vout[0] * std::exp(Complex(0.0, k * loader.t_open_2));
        for (int a = 1; a < n; ++a) {
            acc += vout[a] * std::exp(Complex(0.0, k * (loader.t_open_2 + h * a)));
        }
        acc += 0.5 * vout[n] * std::exp(Complex(0.0, k * (loader.t_open_2 + h * n)));
        vals[i] = h * acc;
    }
    SpectralAmplitude out = SpectralAmplitude::on_grid(grid, std::move(vals));
    return out.normalized();
}

// Success probability of projecting a two-photon state onto the principal
// product mode: |<psi psi | Phi>|^2. For the post-gate state this equals the
// gate fidelity 1 - |eps|^2.
inline double pmp_success_probability(const TwoPhotonAmplitude& phi,
                                      const SpectralAmplitude& principal) {
    return std::norm(phi.overlap(principal, principal));
}

}  // namespace vxpm

#endif  // VXPM_PMPDEV_HPP

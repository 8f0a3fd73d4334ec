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

#ifndef VXPM_METRICS_HPP
#define VXPM_METRICS_HPP

#include <Eigen/Dense>
#include <vector>

#include "vxpm/scattering.hpp"

namespace vxpm {

// Headline observables of the gate. phi_nl and err_sq carry the exact
// definitions arg(A) and 1 - |A|^2; the small-zeta estimates Re(zeta) and
// 2 Im(zeta) are reported alongside since they agree only to lowest order.
struct GateMetrics {
    Complex A;                   // <HV| removal o scattering |HV>
    Complex zeta;                // A = 1 + i zeta
    double phi_nl = 0.0;         // arg A
    double err_sq = 0.0;         // 1 - |A|^2
    double fidelity = 1.0;       // 1 - err_sq
    double phi_nl_lowest = 0.0;  // Re zeta
    double err_sq_lowest = 0.0;  // 2 Im zeta
    double phi_h = 0.0;          // linear phase, H photon
    double phi_v = 0.0;
    double err_h = 0.0;          // linear leakage, H photon
    double err_v = 0.0;
    double purity = 1.0;         // tr rho_H'^2 of the two-photon output
};

namespace detail {

// Exchange kernel integral for a product of identical rising exponential
// modes, by residues:
//
//   J(K) = int dq/2pi [1/d^H_q + 1/d^V_{K-q}] psi(q) psi(K-q)
//        = i g [ 1/(K - k0 - om1 + i(g+G_H)/2) + 1/(K - k0 - om1 + i(g+G_V)/2) ]
//              / (K - 2 k0 + i g).
//
// Valid for complex K in the closed upper half plane.
inline Complex exchange_kernel_integral(Complex K, const GateParams& p) {
    const double g = p.gamma;
    const Complex a = K - p.k0 - p.omega1;
    return kImag * g *
           (1.0 / (a + kImag * (g + p.gamma_h) / 2.0) +
            1.0 / (a + kImag * (g + p.gamma_v) / 2.0)) /
           (K - 2.0 * p.k0 + kImag * g);
}

}  // namespace detail

// Residue evaluation of zeta = -i (A - 1) for the exponential principal
// mode. For symmetric couplings the answer reduces (in units of Gamma) to
//
//   zeta = 8 g [2 d (5g+1) - 3i (3g+1)(g+1)]
//          / [ (g+1) (4 d^2 + (3g+1)^2) (2d - i(g+3)) (2d - i(g+1)) ],
//
// which is singularity-free on the whole physical parameter range. The
// asymmetric case keeps the raw residue sum, whose D_H D_V denominators are
// removable-singular where delta = 0 and gamma = Gamma_X; a tiny detuning
// split sidesteps those points.
inline Complex closed_form_zeta(const GateParams& params) {
    params.validate();
    if (params.symmetric_coupling()) {
        const double G = params.gamma_h;
        const double d = params.delta() / G;
        const double g = params.gamma / G;
        const Complex num = 8.0 * g * Complex(2.0 * d * (5.0 * g + 1.0),
                                              -3.0 * (3.0 * g + 1.0) * (g + 1.0));
        const Complex den = (g + 1.0) * (4.0 * d * d + (3.0 * g + 1.0) * (3.0 * g + 1.0)) *
                            Complex(2.0 * d, -(g + 3.0)) * Complex(2.0 * d, -(g + 1.0));
        return num / den;
    }
    auto eval = [](const GateParams& p) {
        const double g = p.gamma;
        const double d = p.delta();
        const Complex DH(d, (g - p.gamma_h) / 2.0);
        const Complex DV(d, (g - p.gamma_v) / 2.0);
        auto J = [&](Complex K) { return detail::exchange_kernel_integral(K, p); };
        const Complex bracket =
            J(2.0 * p.k0 + kImag * g) -
            J(p.k0 + p.omega1 + kImag * (g + p.gamma_v) / 2.0) -
            J(p.k0 + p.omega1 + kImag * (g + p.gamma_h) / 2.0) +
            J(2.0 * p.omega1 + kImag * (p.gamma_h + p.gamma_v) / 2.0);
        return p.gamma_h * p.gamma_v * g / (DH * DV) * bracket;
    };
    const double scale = params.coupling_scale();
    const Complex DH(params.delta(), (params.gamma - params.gamma_h) / 2.0);
    const Complex DV(params.delta(), (params.gamma - params.gamma_v) / 2.0);
    if (std::abs(DH) > 1e-4 * scale && std::abs(DV) > 1e-4 * scale) return eval(params);
    GateParams lo = params, hi = params;
    lo.k0 -= 1e-5 * scale;
    hi.k0 += 1e-5 * scale;
    return 0.5 * (eval(lo) + eval(hi));
}

// Overlap A = <HV| S_L^dag S_NL |HV> by grid quadrature. The product term
// cancels exactly under linear removal, so only the exchange correction is
// integrated:
//
//   A = 1 + i G_H G_V iint dkH dkV/(2pi)^2
//            conj(psi(kH) psi(kV)) J(kH+kV) / (dbar_H(kH) dbar_V(kV)) / <psipsi|psipsi>
//
// with dbar the conjugate resonant denominators. Normalizing by the grid
// norm of the product state keeps the "1" exact instead of carrying the
// quadrature tail error into zeta.
inline Complex compute_overlap_A(const GateParams& params, const KGrid& grid) {
    params.validate();
    const Eigen::Index n = grid.size();
    const Eigen::VectorXd meas = grid.measure();
    Eigen::VectorXcd uh(n), uv(n);
    double nrm = 0.0;
    const SpectralAmplitude psi = make_exponential_mode(params.k0, params.gamma);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double k = grid.nodes[i];
        const Complex pv = psi.eval(k);
        const Complex cp = std::conj(pv);
        nrm += meas[i] * std::norm(pv);
        uh[i] = meas[i] * cp / Complex(k - params.omega1, -params.gamma_h / 2);
        uv[i] = meas[i] * cp / Complex(k - params.omega1, -params.gamma_v / 2);
    }
    Complex acc(0.0, 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        Complex inner(0.0, 0.0);
        for (Eigen::Index j = 0; j < n; ++j) {
            inner += uv[j] * detail::exchange_kernel_integral(
                                 Complex(grid.nodes[i] + grid.nodes[j], 0.0), params);
        }
        acc += uh[i] * inner;
    }
    return 1.0 + kImag * params.gamma_h * params.gamma_v * acc / (nrm * nrm);
}

namespace detail {

// Reference quadrature for A - 1 in convolution coordinates (k, K = kH+kV):
//
//   A - 1 = i G_H G_V iint dk dK/(2pi)^2 u_H(k) u_V(K - k) J(K),
//   u_X(k) = conj(psi(k)) / (k - omega1 - i Gamma_X / 2).
//
// The K integrand has fixed features at 2 k0, k0 + omega1 and 2 omega1; the
// inner k integrand has features at k0, omega1 and their K-reflections. With
// panels built per K around all four, every 1-D rule sees only poles at a
// safe depth and the double quadrature converges spectrally -- unlike a
// tensor-product rule, where J(kH + kV) drags its poles diagonally across
// panels of every width.
inline Complex overlap_correction_conv(const GateParams& p, int resolution, double cutoff) {
    const SpectralAmplitude psi = make_exponential_mode(p.k0, p.gamma);
    auto u = [&](double k, double G) {
        return std::conj(psi.eval(k)) / Complex(k - p.omega1, -G / 2);
    };
    GridSpec kspec;
    kspec.resolution = resolution;
    kspec.cutoff = cutoff;
    kspec.far_mult = 1e5;

    GridSpec Kspec = kspec;
    const double g = p.gamma;
    std::vector<FeatureSpec> Kfeatures = {
        {2.0 * p.k0, g},
        {p.k0 + p.omega1, (g + p.gamma_h) / 2.0},
        {p.k0 + p.omega1, (g + p.gamma_v) / 2.0},
        {2.0 * p.omega1, (p.gamma_h + p.gamma_v) / 2.0},
    };
    double Klo = 0.0, Khi = 0.0;
    const std::vector<Panel> Kpanels =
        detail::feature_panels(Kfeatures, Kspec, 0.0, &Klo, &Khi);

    const Complex pref = kImag * p.gamma_h * p.gamma_v / (kTwoPi * kTwoPi);
    return pref * integrate_panels(Kpanels, [&](double K) {
        std::vector<FeatureSpec> kfeatures = {
            {p.k0, g},
            {p.omega1, std::min(p.gamma_h, p.gamma_v)},
            {K - p.k0, g},
            {K - p.omega1, std::min(p.gamma_h, p.gamma_v)},
        };
        const std::vector<Panel> kpanels =
            detail::feature_panels(kfeatures, kspec, 0.0, nullptr, nullptr);
        const Complex inner = integrate_panels(
            kpanels, [&](double k) { return u(k, p.gamma_h) * u(K - k, p.gamma_v); });
        return inner * exchange_kernel_integral(Complex(K, 0.0), p);
    });
}

}  // namespace detail

// Metrics-grade tensor grid: ridge-capped panels keep the exchange-kernel
// quadrature honest on the product grid.
inline KGridPtr build_metrics_grid(const GateParams& params, int resolution = 384,
                                   double cutoff = 40.0) {
    GridSpec spec;
    spec.resolution = resolution;
    spec.cutoff = cutoff;
    spec.ridge_cap = 2.0;
    return build_kgrid(params, spec);
}

// Reference-resolution overlap with the doubling convergence check.
inline Complex compute_overlap_A(const GateParams& params, int resolution = 384,
                                 double cutoff = 40.0, double tol = 1e-6) {
    params.validate();
    const Complex a1 = 1.0 + detail::overlap_correction_conv(params, resolution, cutoff);
    const Complex a2 = 1.0 + detail::overlap_correction_conv(params, 2 * resolution, cutoff);
    if (std::abs(a1 - a2) > tol) {
        throw ResolutionInsufficient("compute_overlap_A: not converged under grid doubling");
    }
    return a2;
}

// Weak-excitation closed forms (gamma << Gamma):
//   phi_nl = gamma Gamma^2 delta / [delta^2 + (Gamma/2)^2]^2,
//   err^2  = (Gamma/delta) phi_nl = gamma Gamma^3 / [delta^2 + (Gamma/2)^2]^2.
// The second expression is used verbatim so delta = 0 needs no special case
// (there it equals 16 gamma / Gamma).
struct ClosedFormResult {
    double phi_nl = 0.0;
    double err_sq = 0.0;
};

inline ClosedFormResult closed_form_weak(const GateParams& params) {
    params.validate();
    if (!params.symmetric_coupling()) {
        throw InvalidParameter("closed_form_weak: requires symmetric couplings");
    }
    const double G = params.gamma_h;
    const double d = params.delta();
    const double den = (d * d + G * G / 4.0) * (d * d + G * G / 4.0);
    return {params.gamma * G * G * d / den, params.gamma * G * G * G / den};
}

// Far-detuned closed forms (gamma, Gamma << |delta|), with r = gamma/Gamma:
//   phi_nl = (gamma Gamma^2 / delta^3) (1+5r)/(1+r),
//   err^2  = (Gamma/delta) (1+10r+r^2)/(1+5r) phi_nl.
inline ClosedFormResult closed_form_far_detuned(const GateParams& params) {
    params.validate();
    if (!params.symmetric_coupling()) {
        throw InvalidParameter("closed_form_far_detuned: requires symmetric couplings");
    }
    const double d = params.delta();
    if (d == 0.0) throw InvalidParameter("closed_form_far_detuned: delta must be nonzero");
    const double G = params.gamma_h;
    const double r = params.gamma / G;
    const double phi = params.gamma * G * G / (d * d * d) * (1.0 + 5.0 * r) / (1.0 + r);
    const double err = G / d * (1.0 + 10.0 * r + r * r) / (1.0 + 5.0 * r) * phi;
    return {phi, err};
}

namespace detail {

// Builds the full post-gate two-photon amplitude psi psi + correction on the
// grid, directly from the residue kernel (independent of the scattering
// module's code path). With remove_linear = false the product term carries
// the single-photon phases and the correction keeps the unconjugated
// denominators.
inline TwoPhotonAmplitude::Matrix post_gate_state(const GateParams& params, const KGrid& grid,
                                                  bool remove_linear) {
    const Eigen::Index n = grid.size();
    const SpectralAmplitude psi = make_exponential_mode(params.k0, params.gamma);
    Eigen::VectorXcd pv(n), dh(n), dv(n), ph(n), pvv(n);
    double nrm = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double k = grid.nodes[i];
        pv[i] = psi.eval(k);
        nrm += grid.measure()[i] * std::norm(pv[i]);
        const double s = remove_linear ? -1.0 : 1.0;
        dh[i] = Complex(k - params.omega1, s * params.gamma_h / 2);
        dv[i] = Complex(k - params.omega1, s * params.gamma_v / 2);
        ph[i] = single_photon_phase(k, params.omega1, params.gamma_h);
        pvv[i] = single_photon_phase(k, params.omega1, params.gamma_v);
    }
    pv /= std::sqrt(nrm);
    TwoPhotonAmplitude::Matrix m(n, n);
    const Complex pref = kImag * params.gamma_h * params.gamma_v;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const Complex J = exchange_kernel_integral(
                Complex(grid.nodes[i] + grid.nodes[j], 0.0), params);
            Complex prod = pv[i] * pv[j];
            if (!remove_linear) prod *= ph[i] * pvv[j];
            m(i, j) = prod + pref * J / (dh[i] * dv[j]);
        }
    }
    return m;
}

}  // namespace detail

// Purity tr rho_H'^2 of the horizontal photon after tracing out the vertical
// one, from the measure-weighted Schmidt spectrum of the output amplitude:
// P = sum s_i^4 / (sum s_i^2)^2, computed through the Gram matrix.
inline double purity(const GateParams& params, const KGrid& grid, bool remove_linear = true) {
    params.validate();
    TwoPhotonAmplitude::Matrix m = detail::post_gate_state(params, grid, remove_linear);
    const Eigen::VectorXd sq = grid.measure().cwiseSqrt();
    Eigen::MatrixXcd B = sq.asDiagonal() * m * sq.asDiagonal();
    Eigen::MatrixXcd G = B.adjoint() * B;
    const double trace = G.trace().real();
    if (std::abs(trace - 1.0) > 1e-3) {
        throw ResolutionInsufficient("purity: output norm deviates from unity");
    }
    return G.squaredNorm() / (trace * trace);
}

inline double purity(const GateParams& params, int resolution = 256, double cutoff = 40.0,
                     bool remove_linear = true) {
    const KGridPtr g = build_kgrid(params, resolution, cutoff);
    return purity(params, *g, remove_linear);
}

struct MetricsOptions {
    int resolution = 384;
    double cutoff = 40.0;
    bool with_purity = true;
    int purity_resolution = 256;
    double convergence_tol = 1e-6;
};

// Linear (single-photon) overlap <psi | S_L psi>; closed form by residues:
// a = 1 - i Gamma / (delta + i (gamma + Gamma)/2).
inline Complex linear_overlap(const GateParams& params, Polarization pol) {
    params.validate();
    const double G = pol == Polarization::H ? params.gamma_h : params.gamma_v;
    return 1.0 - kImag * G / Complex(params.delta(), (params.gamma + G) / 2.0);
}

inline GateMetrics gate_metrics(const GateParams& params, const MetricsOptions& options = {}) {
    params.validate();
    GateMetrics out;
    out.A = compute_overlap_A(params, options.resolution, options.cutoff,
                              options.convergence_tol);
    out.zeta = -kImag * (out.A - 1.0);
    out.phi_nl = std::arg(out.A);
    out.err_sq = 1.0 - std::norm(out.A);
    out.fidelity = 1.0 - out.err_sq;
    out.phi_nl_lowest = out.zeta.real();
    out.err_sq_lowest = 2.0 * out.zeta.imag();
    const Complex ah = linear_overlap(params, Polarization::H);
    const Complex av = linear_overlap(params, Polarization::V);
    out.phi_h = std::arg(ah);
    out.phi_v = std::arg(av);
    out.err_h = 1.0 - std::norm(ah);
    out.err_v = 1.0 - std::norm(av);
    if (options.with_purity) {
        out.purity = purity(params, options.purity_resolution, options.cutoff);
    }
    return out;
}

struct SweepRow {
    double delta = 0.0;
    double phi_nl = 0.0;
    double err_sq = 0.0;
    double fidelity = 0.0;
    double purity = 0.0;
    double phi_h = 0.0;
    double err_h = 0.0;
};

// Detuning sweep of the gate observables at fixed gamma, Gamma.
inline std::vector<SweepRow> sweep_detuning(const GateParams& tmpl, double delta_min,
                                            double delta_max, int points,
                                            const MetricsOptions& options = {}) {
    if (points < 2) throw InvalidParameter("sweep_detuning: points must be >= 2");
    std::vector<SweepRow> rows(points);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int i = 0; i < points; ++i) {
        const double d = delta_min + (delta_max - delta_min) * i / (points - 1);
        GateParams p = tmpl;
        p.k0 = p.omega1 + d;
        const GateMetrics m = gate_metrics(p, options);
        rows[i] = {d, m.phi_nl, m.err_sq, m.fidelity, m.purity, m.phi_h, m.err_h};
    }
    return rows;
}

}  // namespace vxpm

#endif  // VXPM_METRICS_HPP

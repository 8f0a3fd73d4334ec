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

#ifndef VXPM_CHANNEL_HPP
#define VXPM_CHANNEL_HPP

#include <Eigen/Dense>
#include <functional>
#include <random>
#include <vector>

#include "vxpm/metrics.hpp"

namespace vxpm {

using Matrix4c = Eigen::Matrix4cd;
using Vector4c = Eigen::Vector4cd;

// Two-qubit density matrix in the logical basis
// {|00>,|01>,|10>,|11>} <-> {|vac>,|H>,|V>,|HV>}.
struct TwoQubitDensity {
    Matrix4c rho = Matrix4c::Zero();

    static TwoQubitDensity pure(const Vector4c& psi) {
        TwoQubitDensity out;
        out.rho = psi * psi.adjoint();
        return out;
    }

    void validate() const {
        if ((rho - rho.adjoint()).cwiseAbs().maxCoeff() > 1e-12) {
            throw InvalidState("TwoQubitDensity: not Hermitian");
        }
        Eigen::SelfAdjointEigenSolver<Matrix4c> es(rho);
        if (es.eigenvalues().minCoeff() < -1e-10) {
            throw InvalidState("TwoQubitDensity: not positive semidefinite");
        }
        if (rho.trace().real() > 1.0 + 1e-12) {
            throw InvalidState("TwoQubitDensity: trace exceeds one");
        }
    }
};

// Operator-sum representation of a two-qubit operation. Trace-preserving
// channels satisfy sum K^dag K = I; the cascadable gate is sub-normalized
// and its lost trace is the failure probability.
struct QuantumChannel {
    std::vector<Matrix4c> kraus;
    bool trace_preserving = true;

    void validate() const {
        Matrix4c s = Matrix4c::Zero();
        for (const auto& K : kraus) s += K.adjoint() * K;
        if (trace_preserving) {
            if ((s - Matrix4c::Identity()).cwiseAbs().maxCoeff() > 1e-12) {
                throw InvalidState("QuantumChannel: completeness violated");
            }
        } else {
            Eigen::SelfAdjointEigenSolver<Matrix4c> es(Matrix4c::Identity() - s);
            if (es.eigenvalues().minCoeff() < -1e-12) {
                throw InvalidState("QuantumChannel: sum K^dag K exceeds identity");
            }
        }
    }
};

// Ideal conditional phase gate diag(1, 1, 1, e^{i phi}).
inline Matrix4c u_phase(double phi) {
    Matrix4c u = Matrix4c::Identity();
    u(3, 3) = std::exp(Complex(0.0, phi));
    return u;
}

namespace detail {

inline void check_probability(double eps_sq, const char* who) {
    if (!(eps_sq >= 0.0) || !(eps_sq <= 1.0)) {
        throw InvalidParameter(std::string(who) + ": eps_sq must lie in [0, 1]");
    }
}

}  // namespace detail

// Primitive gate as a trace-preserving channel: amplitude damping of |HV>
// out of the logical subspace, conjugated by the ideal phase gate.
inline QuantumChannel primitive_channel(double eps_sq, double phi) {
    detail::check_probability(eps_sq, "primitive_channel");
    Matrix4c e1 = Matrix4c::Identity();
    e1(3, 3) = std::sqrt(1.0 - eps_sq);
    Matrix4c e2 = Matrix4c::Zero();
    e2(0, 3) = std::sqrt(eps_sq);
    const Matrix4c u = u_phase(phi);
    QuantumChannel ch;
    ch.kraus = {u * e1, u * e2};
    ch.trace_preserving = true;
    ch.validate();
    return ch;
}

// Cascadable (post-projection) gate: single Kraus operator, not trace
// preserving; the output trace is the projection success probability.
inline QuantumChannel cascadable_channel(double eps_sq, double phi) {
    detail::check_probability(eps_sq, "cascadable_channel");
    Matrix4c e1 = Matrix4c::Identity();
    e1(3, 3) = std::sqrt(1.0 - eps_sq);
    QuantumChannel ch;
    ch.kraus = {u_phase(phi) * e1};
    ch.trace_preserving = false;
    ch.validate();
    return ch;
}

inline TwoQubitDensity apply_channel(const QuantumChannel& ch, const TwoQubitDensity& rho) {
    ch.validate();
    rho.validate();
    TwoQubitDensity out;
    for (const auto& K : ch.kraus) out.rho += K * rho.rho * K.adjoint();
    return out;
}

struct MinFidelityOptions {
    int starts = 24;
    int iterations = 500;
    unsigned seed = 7;
};

struct MinFidelityResult {
    double fidelity = 1.0;
    Vector4c argmin = Vector4c::Zero();
    bool converged = true;
};

namespace detail {

inline Vector4c normalize_state(const Eigen::Matrix<double, 8, 1>& x) {
    Vector4c psi;
    for (int i = 0; i < 4; ++i) psi[i] = Complex(x[2 * i], x[2 * i + 1]);
    const double n = psi.norm();
    if (n < 1e-12) {
        psi.setZero();
        psi[0] = 1.0;
        return psi;
    }
    return psi / n;
}

// <psi| U^dag E(|psi><psi|) U |psi> = sum_K |<psi| U^dag K |psi>|^2.
inline double state_gate_fidelity(const QuantumChannel& ch, const Matrix4c& target,
                                  const Vector4c& psi) {
    double f = 0.0;
    const Vector4c tpsi = target * psi;  // dot() conjugates its left argument
    for (const auto& K : ch.kraus) {
        f += std::norm(tpsi.dot(K * psi));
    }
    return f;
}

// Nelder-Mead on the 8 real parameters of a normalized two-qubit state.
inline std::pair<double, Eigen::Matrix<double, 8, 1>> nelder_mead(
    const std::function<double(const Eigen::Matrix<double, 8, 1>&)>& f,
    Eigen::Matrix<double, 8, 1> x0, int max_iter) {
    constexpr int n = 8;
    using Vec = Eigen::Matrix<double, 8, 1>;
    std::vector<Vec> pts(n + 1, x0);
    std::vector<double> vals(n + 1);
    for (int i = 0; i < n; ++i) pts[i + 1][i] += 0.25;
    for (int i = 0; i <= n; ++i) vals[i] = f(pts[i]);
    for (int iter = 0; iter < max_iter; ++iter) {
        std::vector<int> idx(n + 1);
        for (int i = 0; i <= n; ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return vals[a] < vals[b]; });
        std::vector<Vec> np(n + 1);
        std::vector<double> nv(n + 1);
        for (int i = 0; i <= n; ++i) {
            np[i] = pts[idx[i]];
            nv[i] = vals[idx[i]];
        }
        pts = np;
        vals = nv;
        if (vals[n] - vals[0] < 1e-13) break;
        Vec centroid = Vec::Zero();
        for (int i = 0; i < n; ++i) centroid += pts[i];
        centroid /= n;
        const Vec xr = centroid + (centroid - pts[n]);
        const double fr = f(xr);
        if (fr < vals[0]) {
            const Vec xe = centroid + 2.0 * (centroid - pts[n]);
            const double fe = f(xe);
            if (fe < fr) {
                pts[n] = xe;
                vals[n] = fe;
            } else {
                pts[n] = xr;
                vals[n] = fr;
            }
        } else if (fr < vals[n - 1]) {
            pts[n] = xr;
            vals[n] = fr;
        } else {
            const Vec xc = centroid + 0.5 * (pts[n] - centroid);
            const double fc = f(xc);
            if (fc < vals[n]) {
                pts[n] = xc;
                vals[n] = fc;
            } else {
                for (int i = 1; i <= n; ++i) {
                    pts[i] = pts[0] + 0.5 * (pts[i] - pts[0]);
                    vals[i] = f(pts[i]);
                }
            }
        }
    }
    int best = 0;
    for (int i = 1; i <= n; ++i) {
        if (vals[i] < vals[best]) best = i;
    }
    return {vals[best], pts[best]};
}

}  // namespace detail

// Minimum gate fidelity min_psi <psi| U^dag E(|psi><psi|) U |psi> over pure
// two-qubit inputs, by multi-start Nelder-Mead on the state manifold. The
// four basis states are always included as starts, so the result never
// exceeds the fidelity at |11>. For non-trace-preserving channels the lost
// trace counts as failure (no post-selection).
inline MinFidelityResult min_gate_fidelity(const QuantumChannel& ch, const Matrix4c& target,
                                           const MinFidelityOptions& options = {}) {
    ch.validate();
    auto objective = [&](const Eigen::Matrix<double, 8, 1>& x) {
        return detail::state_gate_fidelity(ch, target, detail::normalize_state(x));
    };
    std::mt19937 rng(options.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    double best = std::numeric_limits<double>::infinity();
    Eigen::Matrix<double, 8, 1> best_x = Eigen::Matrix<double, 8, 1>::Zero();
    best_x[0] = 1.0;
    for (int s = 0; s < options.starts; ++s) {
        Eigen::Matrix<double, 8, 1> x0;
        if (s < 4) {
            x0.setZero();
            x0[2 * s] = 1.0;  // basis states first, |11> included
        } else {
            for (int i = 0; i < 8; ++i) x0[i] = gauss(rng);
        }
        auto [v, x] = detail::nelder_mead(objective, x0, options.iterations);
        if (v < best) {
            best = v;
            best_x = x;
        }
    }
    MinFidelityResult out;
    out.fidelity = best;
    out.argmin = detail::normalize_state(best_x);
    out.converged = true;
    return out;
}

// Fidelity of N cascadable gates with ideal target U_{N phi}: the success
// probability of N consecutive principal-mode projections.
inline double cascade_channel(double eps_sq, double /*phi_nl*/, long long n) {
    detail::check_probability(eps_sq, "cascade_channel");
    if (n < 1) throw InvalidParameter("cascade_channel: N must be >= 1");
    return std::pow(1.0 - eps_sq, static_cast<double>(n));
}

struct CascadeRow {
    int n = 0;
    double fidelity = 1.0;
    double success = 1.0;  // per-step projection success (1 when PMP is off)
};

struct CascadeTrace {
    std::vector<CascadeRow> rows;
    double fitted_exponent = 0.0;  // log-log slope of 1-F over n in [2, N]
};

namespace detail {

inline double fit_loglog_slope(const std::vector<CascadeRow>& rows, int n_min) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    int cnt = 0;
    for (const auto& r : rows) {
        const double inf = 1.0 - r.fidelity;
        if (r.n < n_min || inf <= 0.0) continue;
        const double x = std::log(static_cast<double>(r.n));
        const double y = std::log(inf);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++cnt;
    }
    if (cnt < 2) return 0.0;
    return (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
}

}  // namespace detail

struct CascadeFieldOptions {
    int resolution = 224;
    double cutoff = 40.0;
    InterpOrder interp = InterpOrder::cubic;
};

// Field-level cascade of the primitive gate. Every step scatters the full
// two-photon amplitude and removes linear evolution. With PMP on, each step
// then projects back onto the principal product mode, records the success
// probability, and restarts from the projected state; the reported fidelity
// is the cumulative success. With PMP off the amplitude evolves freely and
// the fidelity is the principal-mode weight |<HV|Phi_n>|^2, in which leaked
// amplitude can re-interfere.
inline CascadeTrace cascade_field(const GateParams& params, int n_steps, bool pmp,
                                  const CascadeFieldOptions& options = {}) {
    params.validate();
    if (n_steps < 1) throw InvalidParameter("cascade_field: N must be >= 1");
    const KGridPtr grid = build_kgrid(params, options.resolution, options.cutoff);
    const PropagatorKernel kernel(params);
    SpectralAmplitude psi = make_exponential_mode(params.k0, params.gamma);
    // Grid-normalize so projections and overlaps are exact on the grid.
    {
        Eigen::VectorXcd v = psi.sample(*grid);
        const double nrm = (grid->measure().array() * v.array().abs2()).sum();
        psi = SpectralAmplitude::on_grid(grid, v / std::sqrt(nrm));
    }
    const TwoPhotonAmplitude phi0 = TwoPhotonAmplitude::product(psi, psi, grid);
    ScatterOptions sopt;
    sopt.interp = options.interp;

    CascadeTrace trace;
    trace.rows.reserve(n_steps);
    if (pmp) {
        // The projected state re-enters each step as the same product mode,
        // but run the evolution literally instead of assuming it.
        double cumulative = 1.0;
        TwoPhotonAmplitude state = phi0;
        for (int n = 1; n <= n_steps; ++n) {
            state = apply_linear_removal(scatter_two_photon(state, kernel, sopt), kernel);
            const double success = std::norm(state.overlap(psi, psi));
            cumulative *= success;
            trace.rows.push_back({n, cumulative, success});
            state = phi0;
        }
    } else {
        TwoPhotonAmplitude state = phi0;
        for (int n = 1; n <= n_steps; ++n) {
            state = apply_linear_removal(scatter_two_photon(state, kernel, sopt), kernel);
            trace.rows.push_back({n, std::norm(state.overlap(psi, psi)), 1.0});
        }
    }
    trace.fitted_exponent = detail::fit_loglog_slope(trace.rows, 2);
    return trace;
}

struct CascadeOptimum {
    double r_opt = 0.0;       // optimal gamma/Gamma
    double delta_opt = 0.0;   // implied delta/Gamma for N phi = pi
    double fidelity = 0.0;    // 1 - C N^{-1/3}
    double constant = 0.0;    // C
};

// Optimal operating point of the N-fold cascade under the far-detuned
// closed forms. Fixing the total phase N phi_nl = pi makes the accumulated
// error
//   N |eps|^2 = pi^{4/3} N^{-1/3} g(r) / (r f(r))^{1/3},
//   f(r) = (1+5r)/(1+r),  g(r) = (1+10r+r^2)/(1+5r),
// minimized over r by golden-section search (the objective is unimodal on
// the searched bracket).
inline CascadeOptimum optimize_cascade(double n_gates) {
    if (!(n_gates >= 10.0)) throw InvalidParameter("optimize_cascade: N must be >= 10");
    auto f = [](double r) { return (1.0 + 5.0 * r) / (1.0 + r); };
    auto g = [](double r) { return (1.0 + 10.0 * r + r * r) / (1.0 + 5.0 * r); };
    auto C = [&](double r) {
        return std::pow(kPi, 4.0 / 3.0) * g(r) / std::cbrt(r * f(r));
    };
    double a = 0.1, b = 50.0;
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = C(x1), f2 = C(x2);
    for (int it = 0; it < 200 && (b - a) > 1e-10; ++it) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = C(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = C(x2);
        }
    }
    CascadeOptimum out;
    out.r_opt = 0.5 * (a + b);
    out.constant = C(out.r_opt);
    out.delta_opt = std::cbrt(n_gates * out.r_opt * f(out.r_opt) / kPi);
    out.fidelity = 1.0 - out.constant * std::pow(n_gates, -1.0 / 3.0);
    return out;
}

struct ScalingResult {
    double exponent = 0.0;          // 1 - n/m
    double infidelity_order = 0.0;  // N^{1 - n/m}
};

// Hypothetical scaling if the per-gate phase fell off as delta^-m and the
// per-gate error as delta^-n: cascaded infidelity of order N^{1 - n/m}.
inline ScalingResult scaling_generalized(double m, double n, double n_gates) {
    if (!(m > 0.0) || !(n > 0.0)) {
        throw InvalidParameter("scaling_generalized: exponents must be positive");
    }
    ScalingResult out;
    out.exponent = 1.0 - n / m;
    out.infidelity_order = std::pow(n_gates, out.exponent);
    return out;
}

}  // namespace vxpm

#endif  // VXPM_CHANNEL_HPP

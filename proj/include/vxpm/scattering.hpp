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

#ifndef VXPM_SCATTERING_HPP
#define VXPM_SCATTERING_HPP

#include <Eigen/Dense>
#include <memory>
#include <utility>

#include "vxpm/spectral.hpp"

namespace vxpm {

enum class Polarization { H, V };

// Unit-modulus single-photon scattering factor
// (k - omega - i Gamma/2) / (k - omega + i Gamma/2): a full 2pi phase wrap
// across the atomic line, exactly -1 on resonance.
inline Complex single_photon_phase(double k, double omega, double Gamma) {
    if (!(Gamma > 0.0)) throw InvalidParameter("single_photon_phase: Gamma must be positive");
    return Complex(k - omega, -Gamma / 2) / Complex(k - omega, Gamma / 2);
}

// Evaluable pieces of the V-system propagators: the resonant denominators
// delta_k = k - omega1 + i Gamma/2 per polarization, and the phase factors
// built from them.
struct PropagatorKernel {
    GateParams params;

    explicit PropagatorKernel(const GateParams& p) : params(p) { params.validate(); }

    double coupling(Polarization pol) const {
        return pol == Polarization::H ? params.gamma_h : params.gamma_v;
    }

    Complex resonant_denom(double k, Polarization pol) const {
        return Complex(k - params.omega1, coupling(pol) / 2);
    }

    Complex phase(double k, Polarization pol) const {
        return single_photon_phase(k, params.omega1, coupling(pol));
    }
};

namespace detail {

inline KGridPtr grid_or_default(const SpectralAmplitude& psi, const PropagatorKernel& kernel,
                                const KGridPtr& grid) {
    if (psi.grid()) return psi.grid();
    if (grid) return grid;
    return build_kgrid(kernel.params);
}

}  // namespace detail

// One photon through the atom: multiply every spectral sample by the
// unit-modulus phase. Norm is preserved exactly.
inline SpectralAmplitude apply_single_scattering(const SpectralAmplitude& psi,
                                                 const PropagatorKernel& kernel,
                                                 Polarization pol,
                                                 const KGridPtr& grid = nullptr) {
    KGridPtr g = detail::grid_or_default(psi, kernel, grid);
    Eigen::VectorXcd v = psi.sample(*g);
    for (Eigen::Index i = 0; i < g->size(); ++i) v[i] *= kernel.phase(g->nodes[i], pol);
    return SpectralAmplitude::on_grid(std::move(g), std::move(v));
}

// Inverse linearized evolution: conjugate phase at the atomic resonance.
// Composing with apply_single_scattering is the identity sample-for-sample.
inline SpectralAmplitude apply_linear_removal(const SpectralAmplitude& psi,
                                              const PropagatorKernel& kernel,
                                              Polarization pol,
                                              const KGridPtr& grid = nullptr) {
    KGridPtr g = detail::grid_or_default(psi, kernel, grid);
    Eigen::VectorXcd v = psi.sample(*g);
    for (Eigen::Index i = 0; i < g->size(); ++i) v[i] *= std::conj(kernel.phase(g->nodes[i], pol));
    return SpectralAmplitude::on_grid(std::move(g), std::move(v));
}

// Identity behind the linear-removal hardware: inversion, scattering off an
// empty cavity at omega2 = 2 k0 - omega1, and re-inversion together equal the
// inverse linearized scattering at omega1. Returns the largest pointwise
// deviation between the two routes applied to psi.
inline double verify_time_reversal(const SpectralAmplitude& psi, const GateParams& params) {
    params.validate();
    const double omega2 = 2.0 * params.k0 - params.omega1;
    const double Gh = params.gamma_h;
    auto lhs_factor = [&](double k) {
        // I S_L(omega2) I acts as multiplication by the phase at 2 k0 - k.
        return single_photon_phase(2.0 * params.k0 - k, omega2, Gh);
    };
    auto rhs_factor = [&](double k) {
        return std::conj(single_photon_phase(k, params.omega1, Gh));
    };

    if (psi.is_closed_form()) {
        // Dense pointwise scan across the feature window.
        const double lo = std::min(params.k0 - 60.0 * psi.mode().gamma,
                                   params.omega1 - 60.0 * Gh);
        const double hi = std::max(params.k0 + 60.0 * psi.mode().gamma,
                                   params.omega1 + 60.0 * Gh);
        double err = 0.0;
        const int n = 20001;
        for (int i = 0; i < n; ++i) {
            const double k = lo + (hi - lo) * i / (n - 1);
            const Complex v = psi.eval(k);
            err = std::max(err, std::abs((lhs_factor(k) - rhs_factor(k)) * v));
        }
        return err;
    }

    // Grid route: run the three steps literally so the grid symmetry
    // requirements of invert_pulse are exercised.
    GateParams cavity = params;
    cavity.omega1 = omega2;
    PropagatorKernel lin(cavity);
    SpectralAmplitude lhs =
        invert_pulse(apply_single_scattering(invert_pulse(psi, params.k0), lin, Polarization::H),
                     params.k0);
    KGridPtr g = psi.grid();
    Eigen::VectorXcd rhs = psi.sample(*g);
    for (Eigen::Index i = 0; i < g->size(); ++i) rhs[i] *= rhs_factor(g->nodes[i]);
    return (lhs.values() - rhs).cwiseAbs().maxCoeff();
}

// Joint two-photon amplitude Phi(k_H, k_V) over the product of two grids.
class TwoPhotonAmplitude {
  public:
    using Matrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    TwoPhotonAmplitude(KGridPtr grid_h, KGridPtr grid_v, Matrix values)
        : grid_h_(std::move(grid_h)), grid_v_(std::move(grid_v)), values_(std::move(values)) {
        if (!grid_h_ || !grid_v_ || values_.rows() != grid_h_->size() ||
            values_.cols() != grid_v_->size()) {
            throw GridMismatch("TwoPhotonAmplitude: values do not match grids");
        }
    }

    static TwoPhotonAmplitude product(const SpectralAmplitude& psi_h,
                                      const SpectralAmplitude& psi_v, const KGridPtr& grid) {
        Eigen::VectorXcd h = psi_h.sample(*grid);
        Eigen::VectorXcd v = psi_v.sample(*grid);
        Matrix m = h * v.transpose();
        return TwoPhotonAmplitude(grid, grid, std::move(m));
    }

    const KGridPtr& grid_h() const { return grid_h_; }
    const KGridPtr& grid_v() const { return grid_v_; }
    const Matrix& values() const { return values_; }
    Matrix& values() { return values_; }

    // iint dk_H dk_V / (2pi)^2 |Phi|^2
    double squared_norm() const {
        const Eigen::VectorXd mh = grid_h_->measure();
        const Eigen::VectorXd mv = grid_v_->measure();
        return (mh.transpose() * values_.cwiseAbs2() * mv).value();
    }

    // <a (x) b | Phi>
    Complex overlap(const SpectralAmplitude& a, const SpectralAmplitude& b) const {
        const Eigen::VectorXcd va = a.sample(*grid_h_);
        const Eigen::VectorXcd vb = b.sample(*grid_v_);
        const Eigen::VectorXcd u = grid_h_->measure().asDiagonal() * va.conjugate();
        const Eigen::VectorXcd w = grid_v_->measure().asDiagonal() * vb.conjugate();
        return (u.transpose() * values_ * w).value();
    }

  private:
    KGridPtr grid_h_;
    KGridPtr grid_v_;
    Matrix values_;
};

// Remove linear evolution from both photons of a two-photon state.
inline TwoPhotonAmplitude apply_linear_removal(const TwoPhotonAmplitude& phi,
                                               const PropagatorKernel& kernel) {
    TwoPhotonAmplitude::Matrix m = phi.values();
    const Eigen::Index nh = phi.grid_h()->size();
    const Eigen::Index nv = phi.grid_v()->size();
    Eigen::VectorXcd ph(nh), pv(nv);
    for (Eigen::Index i = 0; i < nh; ++i)
        ph[i] = std::conj(kernel.phase(phi.grid_h()->nodes[i], Polarization::H));
    for (Eigen::Index j = 0; j < nv; ++j)
        pv[j] = std::conj(kernel.phase(phi.grid_v()->nodes[j], Polarization::V));
    m = ph.asDiagonal() * m * pv.asDiagonal();
    return TwoPhotonAmplitude(phi.grid_h(), phi.grid_v(), std::move(m));
}

enum class InterpOrder { linear, cubic, quintic };

struct ScatterOptions {
    InterpOrder interp = InterpOrder::cubic;
};

struct ScatterDiagnostics {
    // Quadrature mass of the exchange integrand that fell outside the grid
    // window and was zero-padded.
    double truncated_mass = 0.0;
};

namespace detail {

// Precomputed Lagrange stencils per grid interval: barycentric-style
// denominators so off-node evaluation needs no divisions.
struct LagrangeTable {
    int npts = 2;                     // stencil size (2, 4 or 6)
    Eigen::Index n = 0;               // node count
    const double* nodes = nullptr;
    std::vector<Eigen::Index> start;  // stencil start per interval
    std::vector<double> invden;       // 1/prod(x_l - x_p), npts per interval

    LagrangeTable(const double* nodes_, Eigen::Index n_, InterpOrder order)
        : npts(order == InterpOrder::linear ? 2 : order == InterpOrder::cubic ? 4 : 6),
          n(n_),
          nodes(nodes_) {
        start.resize(n - 1);
        invden.resize((n - 1) * npts);
        for (Eigen::Index j = 0; j + 1 < n; ++j) {
            Eigen::Index s = std::max<Eigen::Index>(
                0, std::min<Eigen::Index>(j - (npts / 2 - 1), n - npts));
            start[j] = s;
            for (int l = 0; l < npts; ++l) {
                double den = 1.0;
                for (int p = 0; p < npts; ++p) {
                    if (p != l) den *= nodes[s + l] - nodes[s + p];
                }
                invden[j * npts + l] = 1.0 / den;
            }
        }
    }

    Complex eval(const Complex* row, Eigen::Index interval, double x) const {
        const Eigen::Index s = start[interval];
        const double* inv = &invden[interval * npts];
        Complex acc(0.0, 0.0);
        for (int l = 0; l < npts; ++l) {
            double w = inv[l];
            for (int p = 0; p < npts; ++p) {
                if (p != l) w *= x - nodes[s + p];
            }
            acc += w * row[s + l];
        }
        return acc;
    }
};

}  // namespace detail

// Two-photon scattering in Fourier space. The product term multiplies by the
// single-photon phases; the exchange term is, with K = k_H + k_V fixed by
// energy conservation,
//
//   i G_H G_V / (delta_{k_H} delta_{k_V})
//     * int dq/2pi [1/delta^H_q + 1/delta^V_{K-q}] Phi(q, K-q).
//
// The q integral runs over the H grid with Phi interpolated along the
// anti-diagonal; values beyond the window are zero-padded and accounted in
// the diagnostics. Output entries are independent, so rows are evaluated in
// parallel. The inner loops walk j at fixed (i, q): the interpolation
// abscissa k_i + k_j - q is then monotone in j and the containing interval
// advances with a moving pointer instead of a search.
inline TwoPhotonAmplitude scatter_two_photon(const TwoPhotonAmplitude& phi,
                                             const PropagatorKernel& kernel,
                                             const ScatterOptions& options = {},
                                             ScatterDiagnostics* diag = nullptr) {
    const KGridPtr& gh = phi.grid_h();
    const KGridPtr& gv = phi.grid_v();
    const Eigen::Index nh = gh->size();
    const Eigen::Index nv = gv->size();
    const double Gv = kernel.params.gamma_v;
    const double om = kernel.params.omega1;
    const double vlo = gv->nodes[0];
    const double vhi = gv->nodes[nv - 1];

    Eigen::VectorXcd dth(nh), dtv(nv), ph(nh), pv(nv), inv_dth(nh);
    for (Eigen::Index i = 0; i < nh; ++i) {
        dth[i] = kernel.resonant_denom(gh->nodes[i], Polarization::H);
        inv_dth[i] = 1.0 / dth[i];
        ph[i] = kernel.phase(gh->nodes[i], Polarization::H);
    }
    for (Eigen::Index j = 0; j < nv; ++j) {
        dtv[j] = kernel.resonant_denom(gv->nodes[j], Polarization::V);
        pv[j] = kernel.phase(gv->nodes[j], Polarization::V);
    }

    const Eigen::VectorXd wq = gh->measure();
    const TwoPhotonAmplitude::Matrix& in = phi.values();
    TwoPhotonAmplitude::Matrix out(nh, nv);
    const detail::LagrangeTable table(gv->nodes.data(), nv, options.interp);
    const Complex pref_const = kImag * kernel.params.gamma_h * Gv;
    const double half_gv = Gv / 2.0;

    // With symmetric couplings, a shared grid and an exchange-symmetric
    // input, the output is exchange symmetric too: compute the upper
    // triangle only.
    const bool symmetric =
        kernel.params.symmetric_coupling() && gh.get() == gv.get() && nh == nv &&
        (in - in.transpose()).cwiseAbs().maxCoeff() <= 1e-12;

    double truncated = 0.0;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 4) reduction(+ : truncated)
#endif
    for (Eigen::Index i = 0; i < nh; ++i) {
        Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(nv);
        const Eigen::Index j_min = symmetric ? i : 0;
        for (Eigen::Index m = 0; m < nh; ++m) {
            const double base = gh->nodes[i] - gh->nodes[m];
            const Complex* row = in.row(m).data();
            const Complex wq_inv_dth = wq[m] * inv_dth[m];
            const double wqm = wq[m];
            // First j with x = base + kv_j inside the window.
            Eigen::Index j = j_min;
            while (j < nv && base + gv->nodes[j] < vlo) ++j;
            if (j > j_min) truncated += wqm * std::abs(row[0]) * (j - j_min);
            Eigen::Index interval = 0;
            for (; j < nv; ++j) {
                const double x = base + gv->nodes[j];
                if (x > vhi) {
                    truncated += wqm * std::abs(row[nv - 1]) * (nv - j);
                    break;
                }
                while (interval + 2 < nv && gv->nodes[interval + 1] < x) ++interval;
                const Complex val = table.eval(row, interval, x);
                // 1/(x - om + i Gv/2) without a complex division.
                const double re = x - om;
                const double s = 1.0 / (re * re + half_gv * half_gv);
                const Complex invv(re * s, -half_gv * s);
                acc[j] += (wq_inv_dth + wqm * invv) * val;
            }
        }
        for (Eigen::Index j = j_min; j < nv; ++j) {
            out(i, j) = ph[i] * pv[j] * in(i, j) + pref_const * inv_dth[i] / dtv[j] * acc[j];
        }
    }
    if (symmetric) {
        for (Eigen::Index i = 0; i < nh; ++i) {
            for (Eigen::Index j = 0; j < i; ++j) out(i, j) = out(j, i);
        }
    }
    if (diag) diag->truncated_mass = truncated / static_cast<double>(nh * nv);
    return TwoPhotonAmplitude(gh, gv, std::move(out));
}

struct TimeDomainOptions {
    int zcount = 2048;       // z samples
    double span = 0.0;       // window length; 0 picks 40 / min(gamma, Gamma)
    bool exchange_term = true;  // disable to recover the linear-atom product
};

// Independent real-space evaluation of the two-photon scattering for a
// product of one-sided exponential modes. The propagator is the product of
// single-photon pieces minus the two-absorptions-before-any-emission part;
// with both modes supported on z < 0 the subtraction factorizes through
// cumulative integrals:
//
//   Phi(x1,x2) = psis_H(x1) psis_V(x2)
//              - G_H G_V K_H(x1-m) K_V(x2-m) C_H(m) C_V(m),  m = max(x1,x2),
//
// where K_X(u) = e^{(i omega1 + G_X/2) u} (u <= 0, bounded),
// C_X(m) = int_m^0 K_X(m-y) psi(y) dy, and psis_X is the single-photon
// scattered pulse. All recurrences keep every factor bounded, so the
// evaluation is stable for any gamma/Gamma ratio. The result is transformed
// onto the given wavenumber grid.
inline TwoPhotonAmplitude scatter_two_photon_timedomain(const SpectralAmplitude& psi_h,
                                                        const SpectralAmplitude& psi_v,
                                                        const GateParams& params,
                                                        const KGridPtr& grid,
                                                        const TimeDomainOptions& options = {}) {
    params.validate();
    if (!psi_h.is_closed_form() || !psi_v.is_closed_form() || psi_h.mode().sign != +1 ||
        psi_v.mode().sign != +1) {
        throw InvalidParameter(
            "scatter_two_photon_timedomain: input must be rising exponential modes");
    }
    const int n = options.zcount;
    if (n < 16) throw InvalidParameter("scatter_two_photon_timedomain: zcount too small");
    const double gmin = std::min({psi_h.mode().gamma, psi_v.mode().gamma, params.gamma_h,
                                  params.gamma_v});
    const double L = options.span > 0.0 ? options.span : 40.0 / gmin;
    const double h = L / (n - 1);

    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z[i] = -L + h * i;

    auto mode_z = [](const SpectralAmplitude::ExpMode& m, double zz) {
        // Rising exponential in z: amp sqrt(g) e^{i c z} e^{g z / 2}, z <= 0.
        return m.amp * std::sqrt(m.gamma) * std::exp(Complex(m.gamma * zz / 2, m.center * zz));
    };

    Eigen::VectorXcd fh(n), fv(n);
    for (int i = 0; i < n; ++i) {
        fh[i] = mode_z(psi_h.mode(), z[i]);
        fv[i] = mode_z(psi_v.mode(), z[i]);
    }

    // Backward recurrence for C_X with the bounded kernel e^{(i om + G/2)(x-y)}.
    auto cumulative = [&](const Eigen::VectorXcd& f, double G) {
        const Complex a = std::exp(-Complex(G / 2, params.omega1) * h);
        Eigen::VectorXcd c(n);
        c[n - 1] = 0.0;
        for (int i = n - 2; i >= 0; --i) {
            c[i] = a * c[i + 1] + 0.5 * h * (f[i] + a * f[i + 1]);
        }
        return c;
    };
    const Eigen::VectorXcd ch = cumulative(fh, params.gamma_h);
    const Eigen::VectorXcd cv = cumulative(fv, params.gamma_v);

    Eigen::VectorXcd psis_h = fh - params.gamma_h * ch;
    Eigen::VectorXcd psis_v = fv - params.gamma_v * cv;

    // Window adequacy: the scattered tails must have decayed at z = -L.
    Eigen::VectorXd w = Eigen::VectorXd::Constant(n, h);
    w[0] = w[n - 1] = h / 2;
    const int edge = std::max(2, n / 50);
    double edge_mass = 0.0, total_mass = 0.0;
    for (int i = 0; i < n; ++i) {
        const double d = w[i] * (std::norm(psis_h[i]) + std::norm(psis_v[i]));
        total_mass += d;
        if (i < edge) edge_mass += d;
    }
    if (edge_mass > 1e-4 * total_mass) {
        throw ResolutionInsufficient("scatter_two_photon_timedomain: z window too small");
    }

    TwoPhotonAmplitude::Matrix phi(n, n);
    const Complex eh = std::exp(-Complex(params.gamma_h / 2, params.omega1) * h);
    const Complex ev = std::exp(-Complex(params.gamma_v / 2, params.omega1) * h);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) phi(i, j) = psis_h[i] * psis_v[j];
    }
    if (options.exchange_term) {
        const double gg = params.gamma_h * params.gamma_v;
        for (int j = 0; j < n; ++j) {
            // x1 <= x2 = z_j: kernel K_H(x1 - x2) decays going down the column.
            Complex kh = 1.0;
            const Complex gj = gg * ch[j] * cv[j];
            for (int i = j; i >= 0; --i) {
                phi(i, j) -= kh * gj;
                kh *= eh;
            }
        }
        for (int i = 0; i < n; ++i) {
            // x2 < x1 = z_i.
            Complex kv = ev;
            const Complex gi = gg * ch[i] * cv[i];
            for (int j = i - 1; j >= 0; --j) {
                phi(i, j) -= kv * gi;
                kv *= ev;
            }
        }
    }

    // Transform onto the wavenumber grid: Phi(kH,kV) = E^T phi E. Bare
    // trapezoid weights dephase once k h is not small, and the far grid
    // nodes reach |k| h >> 1, so E carries Filon-trapezoid weights instead:
    // the integrand is treated as piecewise linear and integrated against
    // e^{-ikz} exactly, making the amplitude error O(h^2) uniformly in k.
    //
    //   int_0^1 (1-t) e^{-i theta t} dt = S - B,  int_0^1 t e^{-i theta t} dt = B,
    //   S = (e^u - 1)/u,  B = (e^u (u-1) + 1)/u^2,  u = -i theta.
    auto filon_ab = [](double theta, Complex* alpha, Complex* beta) {
        const Complex u(0.0, -theta);
        if (std::abs(theta) > 1e-3) {
            const Complex eu = std::exp(u);
            const Complex S = (eu - 1.0) / u;
            const Complex B = (eu * (u - 1.0) + 1.0) / (u * u);
            *alpha = S - B;
            *beta = B;
        } else {
            const Complex u2 = u * u, u3 = u2 * u, u4 = u2 * u2;
            const Complex S = 1.0 + u / 2.0 + u2 / 6.0 + u3 / 24.0 + u4 / 120.0;
            const Complex B = 0.5 + u / 3.0 + u2 / 8.0 + u3 / 30.0 + u4 / 144.0;
            *alpha = S - B;
            *beta = B;
        }
    };
    const Eigen::Index nk = grid->size();
    Eigen::MatrixXcd E(n, nk);
    for (Eigen::Index i = 0; i < nk; ++i) {
        const double k = grid->nodes[i];
        Complex alpha, beta;
        filon_ab(k * h, &alpha, &beta);
        const Complex shift = std::exp(Complex(0.0, k * h));  // e^{ikh}
        const Complex interior = alpha + shift * beta;
        for (int a = 0; a < n; ++a) {
            const Complex e = std::exp(Complex(0.0, -k * z[a]));
            Complex d = interior;
            if (a == 0) d = alpha;
            if (a == n - 1) d = shift * beta;
            E(a, i) = h * e * d;
        }
    }
    Eigen::MatrixXcd tmp = phi * E;
    TwoPhotonAmplitude::Matrix out = (E.transpose() * tmp).eval();
    return TwoPhotonAmplitude(grid, grid, std::move(out));
}

// Real-space joint density |Phi(z1, z2)|^2 on a uniform window, for
// antibunching diagnostics. Returns the matrix of densities.
inline Eigen::MatrixXd joint_density_realspace(const TwoPhotonAmplitude& phi, double z_lo,
                                               double z_hi, int n) {
    const Eigen::Index nh = phi.grid_h()->size();
    const Eigen::Index nv = phi.grid_v()->size();
    Eigen::MatrixXcd Eh(n, nh), Ev(n, nv);
    const Eigen::VectorXd mh = phi.grid_h()->measure();
    const Eigen::VectorXd mv = phi.grid_v()->measure();
    for (int a = 0; a < n; ++a) {
        const double zz = z_lo + (z_hi - z_lo) * a / (n - 1);
        for (Eigen::Index i = 0; i < nh; ++i)
            Eh(a, i) = mh[i] * std::exp(Complex(0.0, phi.grid_h()->nodes[i] * zz));
        for (Eigen::Index j = 0; j < nv; ++j)
            Ev(a, j) = mv[j] * std::exp(Complex(0.0, phi.grid_v()->nodes[j] * zz));
    }
    Eigen::MatrixXcd amp = Eh * phi.values() * Ev.transpose();
    return amp.cwiseAbs2();
}

}  // namespace vxpm

#endif  // VXPM_SCATTERING_HPP

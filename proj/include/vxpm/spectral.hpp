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

#ifndef VXPM_SPECTRAL_HPP
#define VXPM_SPECTRAL_HPP

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <utility>
#include <variant>

#include "vxpm/quadrature.hpp"
#include "vxpm/types.hpp"

namespace vxpm {

// A single-photon wavepacket as a complex amplitude over wavenumber, with
// the convention psi(k) = int dz psi(z) e^{-ikz} and squared norm
// int dk/2pi |psi(k)|^2.
//
// Two representations are supported. The closed form covers the one-sided
// exponential principal mode and its inversions:
//
//   sign=+1 (rising in z, ends at z=0):   amp * i sqrt(g) / ( (k-c) + i g/2)
//   sign=-1 (decaying in z, starts at 0): amp * i sqrt(g) / (-(k-c) + i g/2)
//
// Everything else lives on a KGrid as sampled values.
class SpectralAmplitude {
  public:
    struct ExpMode {
        double center = 0.0;
        double gamma = 1.0;
        int sign = +1;
        Complex amp = 1.0;
    };

    struct GridForm {
        KGridPtr grid;
        Eigen::VectorXcd values;
    };

    static SpectralAmplitude exponential(double k0, double gamma, int sign = +1,
                                         Complex amp = 1.0) {
        if (!(gamma > 0.0)) {
            throw InvalidParameter("exponential mode: gamma must be positive");
        }
        return SpectralAmplitude(ExpMode{k0, gamma, sign >= 0 ? +1 : -1, amp});
    }

    static SpectralAmplitude on_grid(KGridPtr grid, Eigen::VectorXcd values) {
        if (!grid || grid->size() != values.size()) {
            throw GridMismatch("SpectralAmplitude: values do not match grid");
        }
        return SpectralAmplitude(GridForm{std::move(grid), std::move(values)});
    }

    bool is_closed_form() const { return std::holds_alternative<ExpMode>(rep_); }

    const ExpMode& mode() const { return std::get<ExpMode>(rep_); }

    KGridPtr grid() const {
        if (auto* g = std::get_if<GridForm>(&rep_)) return g->grid;
        return nullptr;
    }

    const Eigen::VectorXcd& values() const { return std::get<GridForm>(rep_).values; }

    Complex eval(double k) const {
        const ExpMode& m = mode();
        const Complex den = m.sign > 0 ? Complex(k - m.center, m.gamma / 2)
                                       : Complex(-(k - m.center), m.gamma / 2);
        return m.amp * kImag * std::sqrt(m.gamma) / den;
    }

    Eigen::VectorXcd sample(const KGrid& g) const {
        if (auto* gf = std::get_if<GridForm>(&rep_)) {
            if (!grids_compatible(*gf->grid, g)) {
                throw GridMismatch("sample: amplitude lives on a different grid");
            }
            return gf->values;
        }
        Eigen::VectorXcd out(g.size());
        for (Eigen::Index i = 0; i < g.size(); ++i) out[i] = eval(g.nodes[i]);
        return out;
    }

    // Squared norm int dk/2pi |psi|^2. Analytic for the closed form
    // (Lorentzian normalization), quadrature on grids; cached.
    double squared_norm() const {
        if (norm_cache_) return *norm_cache_;
        double n = 0.0;
        if (auto* m = std::get_if<ExpMode>(&rep_)) {
            n = std::norm(m->amp);
        } else {
            const GridForm& g = std::get<GridForm>(rep_);
            n = (g.grid->measure().array() * g.values.array().abs2()).sum();
        }
        norm_cache_ = n;
        return n;
    }

    SpectralAmplitude normalized() const {
        const double n = squared_norm();
        if (!(n > 0.0)) throw InvalidState("normalized: zero-norm amplitude");
        SpectralAmplitude out = *this;
        const double s = 1.0 / std::sqrt(n);
        if (auto* m = std::get_if<ExpMode>(&out.rep_)) {
            m->amp *= s;
        } else {
            std::get<GridForm>(out.rep_).values *= s;
        }
        out.norm_cache_ = 1.0;
        return out;
    }

  private:
    explicit SpectralAmplitude(std::variant<ExpMode, GridForm> rep) : rep_(std::move(rep)) {}

    std::variant<ExpMode, GridForm> rep_;
    mutable std::optional<double> norm_cache_;
};

inline SpectralAmplitude make_exponential_mode(double k0, double gamma) {
    return SpectralAmplitude::exponential(k0, gamma);
}

// <a|b> = int dk/2pi conj(a) b. Closed-form pairs go through residues;
// modes of opposite orientation have disjoint real-space support and vanish
// exactly. Mixed representations are sampled onto the grid.
inline Complex inner_product(const SpectralAmplitude& a, const SpectralAmplitude& b) {
    if (a.is_closed_form() && b.is_closed_form()) {
        const auto& ma = a.mode();
        const auto& mb = b.mode();
        if (ma.sign != mb.sign) return 0.0;
        const double m = 0.5 * (ma.gamma + mb.gamma);
        const double d = ma.sign > 0 ? (mb.center - ma.center) : (ma.center - mb.center);
        return std::conj(ma.amp) * mb.amp * std::sqrt(ma.gamma * mb.gamma) / Complex(m, d);
    }
    KGridPtr grid = a.grid() ? a.grid() : b.grid();
    if (a.grid() && b.grid() && !grids_compatible(a.grid(), b.grid())) {
        throw GridMismatch("inner_product: incompatible grids");
    }
    const Eigen::VectorXcd va = a.sample(*grid);
    const Eigen::VectorXcd vb = b.sample(*grid);
    return (grid->measure().array() * va.array().conjugate() * vb.array()).sum();
}

// Fourier-space inversion about a center wavenumber: psi'(k) = psi(2 k0 - k).
// Exact involution in both representations. Grid inputs must live on a
// window symmetric about k0 (see build_kgrid_mirrored).
inline SpectralAmplitude invert_pulse(const SpectralAmplitude& psi, double k0) {
    if (psi.is_closed_form()) {
        const auto& m = psi.mode();
        return SpectralAmplitude::exponential(2.0 * k0 - m.center, m.gamma, -m.sign, m.amp);
    }
    KGridPtr g = psi.grid();
    const Eigen::Index n = g->size();
    const double span = g->nodes[n - 1] - g->nodes[0];
    const double tol = 1e-9 * std::max({span, std::abs(k0), 1.0});
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs((2.0 * k0 - g->nodes[i]) - g->nodes[n - 1 - i]) > tol) {
            throw GridMismatch("invert_pulse: grid window not symmetric about k0");
        }
    }
    return SpectralAmplitude::on_grid(g, psi.values().reverse());
}

}  // namespace vxpm

#endif  // VXPM_SPECTRAL_HPP

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

#ifndef VXPM_QUADRATURE_HPP
#define VXPM_QUADRATURE_HPP

#include <Eigen/Dense>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "vxpm/types.hpp"

namespace vxpm {

// Gauss-Legendre rule on [-1, 1]. Nodes come out exactly symmetric about 0:
// only the positive half is solved for (Newton on P_n), the rest is mirrored.
struct GaussRule {
    Eigen::VectorXd x;
    Eigen::VectorXd w;
};

inline const GaussRule& gauss_legendre(int n) {
    static std::map<int, GaussRule> cache;
    static std::mutex mutex;
    std::lock_guard<std::mutex> lock(mutex);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;
    if (n < 1) throw InvalidParameter("gauss_legendre: order must be >= 1");

    GaussRule rule;
    rule.x.resize(n);
    rule.w.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        // Tricomi-style initial guess for the i-th root of P_n.
        double t = kPi * (i + 0.75) / (n + 0.5);
        double z = std::cos(t);
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (z * p0 - p1) / (z * z - 1.0);
            double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        const double wi = 2.0 / ((1.0 - z * z) * pp * pp);
        rule.x[i] = -z;
        rule.x[n - 1 - i] = z;
        rule.w[i] = wi;
        rule.w[n - 1 - i] = wi;
    }
    if (n % 2 == 1) rule.x[n / 2] = 0.0;
    return cache.emplace(n, std::move(rule)).first->second;
}

struct Panel {
    double lo = 0.0;
    double hi = 0.0;
    int order = 0;
};

// Composite Gauss-Legendre wavenumber grid. Nodes are strictly increasing,
// weights positive; the feature window [window_lo, window_hi] covers the
// pulse and atomic resonances, with geometric far-field panels capturing the
// k^-1 spectral tails of the exponential mode.
class KGrid {
  public:
    Eigen::VectorXd nodes;
    Eigen::VectorXd weights;
    std::vector<Panel> panels;
    double window_lo = 0.0;
    double window_hi = 0.0;

    Eigen::Index size() const { return nodes.size(); }

    // Quadrature measure dk/2pi.
    Eigen::VectorXd measure() const { return weights / kTwoPi; }

    static std::shared_ptr<const KGrid> from_panels(const std::vector<Panel>& panels,
                                                    double window_lo, double window_hi) {
        auto grid = std::make_shared<KGrid>();
        grid->panels = panels;
        grid->window_lo = window_lo;
        grid->window_hi = window_hi;
        Eigen::Index total = 0;
        for (const auto& p : panels) total += p.order;
        grid->nodes.resize(total);
        grid->weights.resize(total);
        Eigen::Index at = 0;
        for (const auto& p : panels) {
            const GaussRule& rule = gauss_legendre(p.order);
            const double mid = 0.5 * (p.lo + p.hi);
            const double hw = 0.5 * (p.hi - p.lo);
            for (int i = 0; i < p.order; ++i) {
                grid->nodes[at] = mid + hw * rule.x[i];
                grid->weights[at] = hw * rule.w[i];
                ++at;
            }
        }
        for (Eigen::Index i = 1; i < total; ++i) {
            if (!(grid->nodes[i] > grid->nodes[i - 1])) {
                throw InvalidParameter("KGrid: nodes not strictly increasing");
            }
        }
        return grid;
    }
};

using KGridPtr = std::shared_ptr<const KGrid>;

inline bool grids_compatible(const KGrid& a, const KGrid& b) {
    if (&a == &b) return true;
    if (a.size() != b.size()) return false;
    const double scale = std::max(std::abs(a.nodes[0]), std::abs(a.nodes[a.size() - 1]));
    return ((a.nodes - b.nodes).cwiseAbs().maxCoeff() <= 1e-9 * std::max(scale, 1.0));
}

inline bool grids_compatible(const KGridPtr& a, const KGridPtr& b) {
    if (a.get() == b.get()) return true;
    if (!a || !b) return false;
    return grids_compatible(*a, *b);
}

struct GridSpec {
    int resolution = 384;     // total feature-node budget; per-panel order = resolution/16
    double cutoff = 40.0;     // feature half-width in units of the local scale
    double far_mult = 1e6;    // far-field extent in units of max(gamma, Gamma)
    double far_ratio = 4.0;   // geometric growth of far-field panel widths
    // When positive, caps in-window panel widths at ridge_cap times the
    // shallowest pole depth of the two-photon exchange kernel. Integrands of
    // the form J(k + k') sweep that pole across the whole window, so panels
    // wider than its depth stall Gauss-Legendre convergence no matter the
    // order. Metrics-grade quadrature uses 2.0; the plain scattering grid
    // leaves it off and relies on interpolation-level accuracy instead.
    double ridge_cap = 0.0;
};

// A resolved spectral feature: panels cluster dyadically around `center` at
// widths scaled by `scale`.
struct FeatureSpec {
    double center = 0.0;
    double scale = 1.0;
};

namespace detail {

inline std::vector<double> merged_edges(std::vector<double> edges, double scale) {
    std::sort(edges.begin(), edges.end());
    std::vector<double> out;
    for (double e : edges) {
        if (out.empty() || e - out.back() > 1e-9 * scale) out.push_back(e);
    }
    return out;
}

inline std::vector<Panel> feature_panels(const std::vector<FeatureSpec>& features,
                                         const GridSpec& spec, double ridge_depth,
                                         double* wlo_out, double* whi_out) {
    if (spec.resolution < 64) {
        throw InvalidParameter("build_kgrid: resolution must be >= 64");
    }
    if (!(spec.cutoff > 1.0)) {
        throw InvalidParameter("build_kgrid: cutoff must exceed 1");
    }
    const int order = std::max(4, spec.resolution / 16);
    const int far_order = std::max(4, order / 2);

    // Feature panel edges: dyadic offsets around each resonance, out to the
    // cutoff. Overlapping feature sets simply merge.
    std::vector<double> offs = {0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0};
    offs.erase(std::remove_if(offs.begin(), offs.end(),
                              [&](double o) { return o >= spec.cutoff; }),
               offs.end());
    offs.push_back(spec.cutoff);

    double gmax = 0.0;
    for (const auto& f : features) gmax = std::max(gmax, f.scale);

    std::vector<double> edges;
    double wlo = features[0].center, whi = features[0].center;
    for (const auto& [c, s] : features) {
        edges.push_back(c);
        for (double o : offs) {
            edges.push_back(c + o * s);
            edges.push_back(c - o * s);
        }
        wlo = std::min(wlo, c - spec.cutoff * s);
        whi = std::max(whi, c + spec.cutoff * s);
    }

    // Geometric far-field panels on both sides of the feature window.
    const double far = spec.far_mult * gmax;
    double width = whi - wlo;
    for (double x = whi, w = width; x < whi + far;) {
        double nx = std::min(x + w, whi + far);
        edges.push_back(nx);
        x = nx;
        w *= spec.far_ratio;
    }
    for (double x = wlo, w = width; x > wlo - far;) {
        double nx = std::max(x - w, wlo - far);
        edges.push_back(nx);
        x = nx;
        w *= spec.far_ratio;
    }

    const double scale = std::max({std::abs(wlo), std::abs(whi), 1.0});
    std::vector<double> e = merged_edges(std::move(edges), scale);
    double cap = std::numeric_limits<double>::infinity();
    if (spec.ridge_cap > 0.0 && ridge_depth > 0.0) cap = spec.ridge_cap * ridge_depth;
    std::vector<Panel> panels;
    panels.reserve(e.size());
    for (size_t i = 0; i + 1 < e.size(); ++i) {
        const bool in_window = e[i] >= wlo - 1e-9 * scale && e[i + 1] <= whi + 1e-9 * scale;
        const double w = e[i + 1] - e[i];
        if (in_window && w > cap) {
            const int slices = static_cast<int>(std::ceil(w / cap));
            for (int s = 0; s < slices; ++s) {
                panels.push_back({e[i] + w * s / slices, e[i] + w * (s + 1) / slices, order});
            }
        } else {
            panels.push_back({e[i], e[i + 1], in_window ? order : far_order});
        }
    }
    if (wlo_out) *wlo_out = wlo;
    if (whi_out) *whi_out = whi;
    return panels;
}

inline std::vector<Panel> assemble_panels(const GateParams& params, const GridSpec& spec,
                                          const std::vector<double>& extra_centers,
                                          double* wlo_out, double* whi_out) {
    std::vector<FeatureSpec> features = {
        {params.k0, params.gamma},
        {params.omega1, params.coupling_scale()},
    };
    const double gmax = std::max(params.gamma, params.coupling_scale());
    for (double c : extra_centers) features.push_back({c, gmax});
    const double depth = 0.5 * (params.gamma + std::min(params.gamma_h, params.gamma_v));
    return feature_panels(features, spec, depth, wlo_out, whi_out);
}

}  // namespace detail

// Composite-rule integral without materializing a grid object.
template <typename F>
inline auto integrate_panels(const std::vector<Panel>& panels, F&& f)
    -> decltype(f(0.0) * 0.0) {
    decltype(f(0.0) * 0.0) acc{};
    for (const auto& p : panels) {
        const GaussRule& rule = gauss_legendre(p.order);
        const double mid = 0.5 * (p.lo + p.hi);
        const double hw = 0.5 * (p.hi - p.lo);
        for (int i = 0; i < p.order; ++i) {
            acc += hw * rule.w[i] * f(mid + hw * rule.x[i]);
        }
    }
    return acc;
}

inline KGridPtr build_kgrid(const GateParams& params, int resolution = 384,
                            double cutoff = 40.0) {
    params.validate();
    GridSpec spec;
    spec.resolution = resolution;
    spec.cutoff = cutoff;
    double wlo = 0.0, whi = 0.0;
    auto panels = detail::assemble_panels(params, spec, {}, &wlo, &whi);
    return KGrid::from_panels(panels, wlo, whi);
}

inline KGridPtr build_kgrid(const GateParams& params, const GridSpec& spec) {
    params.validate();
    double wlo = 0.0, whi = 0.0;
    auto panels = detail::assemble_panels(params, spec, {}, &wlo, &whi);
    return KGrid::from_panels(panels, wlo, whi);
}

// Grid whose node set is exactly symmetric under k -> 2*center - k, as
// required by pulse inversion. Built by unioning the natural edge set with
// its mirror image.
inline KGridPtr build_kgrid_mirrored(const GateParams& params, double center,
                                     const GridSpec& spec = {}) {
    params.validate();
    double wlo = 0.0, whi = 0.0;
    auto panels = detail::assemble_panels(params, spec, {2.0 * center - params.k0,
                                                         2.0 * center - params.omega1},
                                          &wlo, &whi);
    std::vector<double> edges;
    for (const auto& p : panels) {
        edges.push_back(p.lo);
        edges.push_back(p.hi);
    }
    std::vector<double> mirrored = edges;
    for (double x : edges) mirrored.push_back(2.0 * center - x);
    const double scale = std::max({std::abs(wlo), std::abs(whi), 1.0});
    std::vector<double> e = detail::merged_edges(std::move(mirrored), scale);
    // Symmetrize exactly: pair up mirror edges and reassign each pair to the
    // exact midpoint-reflected values, so reflection is bit-exact.
    const size_t n = e.size();
    for (size_t i = 0; i < n / 2; ++i) {
        const double a = e[i];
        const double b = e[n - 1 - i];
        const double half = 0.5 * (b - a);
        e[i] = center - half;
        e[n - 1 - i] = center + half;
    }
    if (n % 2 == 1) e[n / 2] = center;
    const int order = std::max(4, spec.resolution / 16);
    std::vector<Panel> out;
    const double fwlo = std::min(wlo, 2.0 * center - whi);
    const double fwhi = std::max(whi, 2.0 * center - wlo);
    for (size_t i = 0; i + 1 < e.size(); ++i) {
        out.push_back({e[i], e[i + 1], order});
    }
    return KGrid::from_panels(out, fwlo, fwhi);
}

}  // namespace vxpm

#endif  // VXPM_QUADRATURE_HPP

/*
 * Copyright 2026 The hmera Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <json.hpp>

#include "cascade.hpp"
#include "circuit.hpp"
#include "filters.hpp"
#include "gaussian.hpp"
#include "io.hpp"
#include "transform.hpp"

namespace hmera {

inline std::vector<double> linear_grid(double lo, double hi, int n) {
    if (n < 1) throw InvalidInput("grid needs at least one point");
    if (n == 1) return {lo};
    std::vector<double> v(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    return v;
}

inline std::vector<double> log_grid(double lo, double hi, int n) {
    if (!(lo > 0.0 && hi > lo)) throw InvalidInput("log grid needs 0 < lo < hi");
    std::vector<double> v = linear_grid(std::log(lo), std::log(hi), n);
    for (auto& x : v) x = std::exp(x);
    return v;
}

/// Least-squares slope of log|y| against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n < 2 || y.size() != n) throw InvalidInput("loglog_slope: need matching samples");
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(x[i]);
        my += std::log(std::abs(y[i]));
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(std::abs(y[i])) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

// ---------------------------------------------------------------------------
// Two-point function sweep

struct Corr2ptConfig {
    int j = 7;
    int layers = 16;
    int refine_depth = 8;
    int constants_depth = 10;
    double sigma = 0.05;
    double x = 0.0;
    std::vector<double> separations = linear_grid(0.1, 1.0, 10);
    Geometry geometry = Geometry::line;
    bool sharp = false;
};

struct Corr2ptResult {
    Table table;
    bool bound_ok = true;
    bool diagonal_real = true;
};

inline Corr2ptResult run_corr2pt(const FilterPair& pair, const Corr2ptConfig& cfg) {
    if (cfg.geometry != Geometry::line && cfg.j != cfg.layers)
        throw InvalidInput("periodic correlators use --scale-j equal to --layers");
    const ScalingFunctions fn = evaluate_functions(pair, cfg.refine_depth);
    const WaveletConstants wc = certify_constants(pair, cfg.constants_depth);
    Corr2ptResult res;
    res.table.columns = {"x", "y", "re_mera", "im_mera", "re_exact", "im_exact", "abs_err", "thm_bound"};

    SymbolMatrix periodic_symbol;
    if (cfg.geometry != Geometry::line) periodic_symbol = build_symbol_periodic(pair, cfg.layers);
    DiscretizeOptions opt;
    opt.geometry = cfg.geometry;

    std::vector<double> ys;
    ys.push_back(cfg.x);
    for (double d : cfg.separations) ys.push_back(cfg.x + d);
    for (double y : ys) {
        const SpinorSmearing fx = SpinorSmearing::chiral(ScalarSmearing::gaussian(cfg.x, cfg.sigma));
        const SpinorSmearing fy = SpinorSmearing::chiral(ScalarSmearing::gaussian(y, cfg.sigma));
        const CoefficientField cx = discretize(fx, fn, cfg.j, opt);
        const CoefficientField cy = discretize(fy, fn, cfg.j, opt);
        SymbolMatrix sm;
        if (cfg.geometry == Geometry::line)
            sm = symbol_block_line(pair, cfg.j, cfg.layers, std::min(cx.first(), cy.first()), std::max(cx.last(), cy.last()));
        const SymbolMatrix& Q = cfg.geometry == Geometry::line ? sm : periodic_symbol;
        const cplx mera = wick_linear(Q.Q, {Insertion::create(Q.embed(cx)), Insertion::annihilate(Q.embed(cy))});
        const cplx exact = exact_two_point(fx, fy, cfg.geometry);
        BoundParams bp;
        bp.M = pair.M();
        bp.n = 2;
        bp.m = 0;
        bp.sharp = cfg.sharp;
        bp.periodic = cfg.geometry != Geometry::line;
        const double dnorm = std::max(fx.derivative_norm(), fy.derivative_norm());
        bp.D = bp.periodic ? std::max(1.0, dnorm) : std::max(1.0, dnorm * std::max(fx.support_width(), fy.support_width()));
        const double bound = error_bound(wc, bp, cfg.layers);
        const double err = std::abs(mera - exact);
        if (!(err <= bound)) res.bound_ok = false;
        if (y == cfg.x && std::abs(mera.imag()) > 1e-10) res.diagonal_real = false;
        res.table.add({cfg.x, y, mera.real(), mera.imag(), exact.real(), exact.imag(), err, bound});
    }
    res.table.footer = {{"command", "corr2pt"},
                        {"K", pair.K},
                        {"L", pair.L},
                        {"scale_j", cfg.j},
                        {"layers", cfg.layers},
                        {"refine_depth", cfg.refine_depth},
                        {"sigma", cfg.sigma},
                        {"geometry", geometry_name(cfg.geometry)},
                        {"correlator", "<a^dagger(f_x) a(f_y)> with chiral gaussians"},
                        {"bound_constant", cfg.sharp ? "sharp" : "headline"},
                        {"epsilon", wc.epsilon},
                        {"bound_ok", res.bound_ok},
                        {"diagonal_real", res.diagonal_real}};
    return res;
}

// ---------------------------------------------------------------------------
// Stress-energy two-point function

struct Stress2ptConfig {
    int j = 6;
    int layers = 12;
    int refine_depth = 6;
    double sigma = 0.05;       // spatial smearing
    double sigma_time = 0.05;  // time smearing
    std::vector<double> separations = log_grid(0.6, 2.5, 12);
};

struct Stress2ptResult {
    Table table;
    double slope_mera = 0.0;
    double slope_exact = 0.0;
    double one_point = 0.0;
};

inline Stress2ptResult run_stress2pt(const FilterPair& pair, const Stress2ptConfig& cfg) {
    const ScalingFunctions fn = evaluate_functions(pair, cfg.refine_depth);
    const ScalarSmearing ht = ScalarSmearing::gaussian(0.0, cfg.sigma_time);
    Stress2ptResult res;
    res.table.columns = {"separation", "value_mera", "value_exact_quadrature", "rel_err"};
    std::vector<double> vm, ve;
    for (double d : cfg.separations) {
        const ScalarSmearing ha = ScalarSmearing::gaussian(0.0, cfg.sigma);
        const ScalarSmearing hb = ScalarSmearing::gaussian(d, cfg.sigma);
        const auto sa = stress_kernel_sites(ha, ht, cfg.j, pair.M());
        const auto sb = stress_kernel_sites(hb, ht, cfg.j, pair.M());
        const long lo = std::min(sa[0], sb[0]), hi = std::max(sa[1], sb[1]);
        const StressKernel A = stress_energy_kernel(ha, ht, fn, cfg.j, lo, hi);
        const StressKernel B = stress_energy_kernel(hb, ht, fn, cfg.j, lo, hi);
        const SymbolMatrix sm = symbol_block_line(pair, cfg.j, cfg.layers, lo, hi);
        const cplx v = quad_pair_moment(sm.Q, A.A, B.A);
        if (d == cfg.separations.front())
            res.one_point = std::abs(mixed_correlator(sm.Q, {Insertion::quadratic(A.A)}));
        const double e = exact_stress_two_point(ha, ht, d);
        vm.push_back(v.real());
        ve.push_back(e);
        res.table.add({d, v.real(), e, std::abs(v.real() - e) / std::abs(e)});
    }
    res.slope_mera = loglog_slope(cfg.separations, vm);
    res.slope_exact = loglog_slope(cfg.separations, ve);
    res.table.footer = {{"command", "stress2pt"},
                        {"K", pair.K},
                        {"L", pair.L},
                        {"scale_j", cfg.j},
                        {"layers", cfg.layers},
                        {"refine_depth", cfg.refine_depth},
                        {"sigma", cfg.sigma},
                        {"sigma_time", cfg.sigma_time},
                        {"window", {cfg.separations.front(), cfg.separations.back()}},
                        {"fit", {{"slope_mera", res.slope_mera}, {"slope_exact", res.slope_exact}, {"target", -4.0}}},
                        {"one_point", res.one_point}};
    return res;
}

// ---------------------------------------------------------------------------
// Entanglement entropy on the circle

struct EntropyConfig {
    int layers = 10;
    std::vector<long> lengths;  // empty: geometric sequence 4 .. N/4
};

struct EntropyResult {
    Table table;
    CardyFit fit;
};

inline std::vector<long> default_interval_lengths(long N) {
    std::vector<long> out;
    for (double l = 4.0; l <= static_cast<double>(N) / 4.0 + 1e-9; l *= std::sqrt(2.0)) {
        const long li = std::lround(l);
        if (out.empty() || out.back() != li) out.push_back(li);
    }
    return out;
}

inline EntropyResult run_entropy(const FilterPair& pair, const EntropyConfig& cfg) {
    const SymbolMatrix sm = build_symbol_periodic(pair, cfg.layers);
    const std::vector<long> lengths = cfg.lengths.empty() ? default_interval_lengths(sm.N) : cfg.lengths;
    EntropyResult res;
    res.table.columns = {"length", "chord_length", "entropy"};
    std::vector<std::pair<double, double>> pts;
    for (long l : lengths) {
        if (l < 1 || l >= sm.N) throw InvalidInput("interval length must lie in [1, N)");
        const double S = entropy_interval(sm, 0, l - 1);
        const double chord = chord_length(static_cast<double>(l), static_cast<double>(sm.N));
        pts.emplace_back(chord, S);
        res.table.add({static_cast<double>(l), chord, S});
    }
    res.fit = cardy_fit(pts);
    res.table.footer = {{"command", "entropy"},
                        {"K", pair.K},
                        {"L", pair.L},
                        {"layers", cfg.layers},
                        {"sites", sm.N},
                        {"geometry", "periodic"},
                        {"fit_variable", "chord length (N/pi) sin(pi l/N)"},
                        {"cardy", {{"c", res.fit.c}, {"c_prime", res.fit.c_prime}, {"residual", res.fit.residual}}}};
    return res;
}

// ---------------------------------------------------------------------------
// Error-bound curves

/// Constants as listed in the reference table (epsilon, C_UV, C_IR, C_chi), for the sharp constant.
inline WaveletConstants constants_from_reference(const TableRow& row) {
    WaveletConstants c;
    c.epsilon = row.epsilon;
    c.C_UV = row.C_UV;
    c.C_IR = row.C_IR;
    c.C_chi = row.C_chi;
    c.C_chi_prime = row.C_chi_prime;
    c.C_phi = row.C_phi;
    return c;
}

struct BoundCurve {
    std::vector<int> layers;
    std::vector<double> bound;
    double plateau = 0.0;
};

inline BoundCurve bound_curve(const WaveletConstants& c, const BoundParams& p, int lmin, int lmax) {
    if (lmin < 1 || lmax < lmin) throw InvalidInput("layer range must satisfy 1 <= min <= max");
    BoundCurve out;
    for (int l = lmin; l <= lmax; ++l) {
        out.layers.push_back(l);
        out.bound.push_back(error_bound(c, p, l));
    }
    out.plateau = error_bound_floor(c, p);
    return out;
}

}  // namespace hmera

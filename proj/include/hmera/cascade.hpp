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

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "common.hpp"
#include "filters.hpp"

namespace hmera {

/// Samples at x = a + k 2^{-r}, k = 0..(b-a) 2^r.
struct DyadicFunction {
    int r = 0;
    int a = 0;
    int b = 0;
    std::vector<double> values;

    double step() const { return std::ldexp(1.0, -r); }
    long samples_per_unit() const { return 1L << r; }
    double x(long k) const { return a + static_cast<double>(k) * step(); }

    /// Value at a grid point given in units of 2^{-r}; zero outside the support.
    double at_index(long absolute) const {
        const long k = absolute - static_cast<long>(a) * samples_per_unit();
        if (k < 0 || k >= static_cast<long>(values.size())) return 0.0;
        return values[static_cast<std::size_t>(k)];
    }

    /// Piecewise-linear interpolation between grid points.
    double operator()(double xx) const {
        const double t = (xx - a) * samples_per_unit();
        if (t < 0.0 || t > static_cast<double>(values.size() - 1)) return 0.0;
        const long k = std::min(static_cast<long>(t), static_cast<long>(values.size()) - 2);
        const double w = t - k;
        return (1.0 - w) * values[static_cast<std::size_t>(k)] + w * values[static_cast<std::size_t>(k + 1)];
    }

    double sup_norm() const {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }

    /// Trapezoid rule on the sample grid.
    double integral() const {
        if (values.size() < 2) return 0.0;
        double s = 0.0;
        for (double v : values) s += v;
        s -= 0.5 * (values.front() + values.back());
        return s * step();
    }
};

/// Values of the scaling function at the integers of its support.
inline std::vector<double> scaling_integer_values(const Filter& g) {
    const int M = g.size();
    if (M < 2) throw DegenerateFilter("scaling function needs at least two taps");
    std::vector<double> phi(static_cast<std::size_t>(M), 0.0);
    if (M == 2) {
        phi[0] = 1.0;
        return phi;
    }
    const int n = M - 2;
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k <= n; ++k)
        for (int m = 1; m <= n; ++m) {
            const int idx = 2 * k - m;
            if (idx >= 0 && idx < M) T(k - 1, m - 1) = sqrt2 * g.coeffs[static_cast<std::size_t>(idx)];
        }
    Eigen::EigenSolver<Eigen::MatrixXd> es(T);
    const auto& ev = es.eigenvalues();
    int hits = 0, best = -1;
    for (int i = 0; i < n; ++i)
        if (std::abs(ev(i) - cplx(1.0, 0.0)) < 1e-6) {
            ++hits;
            best = i;
        }
    if (hits != 1)
        throw DegenerateFilter("refinement matrix has eigenvalue 1 with multiplicity " + std::to_string(hits));
    const Eigen::VectorXcd v = es.eigenvectors().col(best);
    double total = 0.0;
    for (int i = 0; i < n; ++i) total += v(i).real();
    if (std::abs(total) < 1e-300) throw DegenerateFilter("eigenvector has zero sum");
    for (int i = 0; i < n; ++i) phi[static_cast<std::size_t>(i + 1)] = v(i).real() / total;
    return phi;
}

/// Cascade algorithm: scaling function of g on [offset, offset + M - 1] at depth r.
inline DyadicFunction cascade_scaling(const Filter& g, int r) {
    DyadicFunction f;
    f.r = 0;
    f.a = g.offset;
    f.b = g.offset + g.size() - 1;
    f.values = scaling_integer_values(g);
    const int M = g.size();
    for (int lev = 1; lev <= r; ++lev) {
        const long N = static_cast<long>(M - 1) * (1L << lev) + 1;
        std::vector<double> next(static_cast<std::size_t>(N), 0.0);
        const long half = 1L << (lev - 1);
        const long prev = static_cast<long>(f.values.size());
        for (int t = 0; t < M; ++t) {
            const double c = sqrt2 * g.coeffs[static_cast<std::size_t>(t)];
            const long shift = -static_cast<long>(t) * half;
            for (long k = 0; k < N; ++k) {
                const long idx = k + shift;
                if (idx >= 0 && idx < prev) next[static_cast<std::size_t>(k)] += c * f.values[static_cast<std::size_t>(idx)];
            }
        }
        f.values = std::move(next);
        f.r = lev;
    }
    return f;
}

/// psi(x) = sqrt2 sum_n g_w[n] phi(2x - n) on the grid of phi.
inline DyadicFunction cascade_wavelet(const DyadicFunction& phi, const Filter& g_w) {
    DyadicFunction psi;
    psi.r = phi.r;
    psi.a = static_cast<int>(floor_div(phi.a + g_w.offset, 2));
    psi.b = static_cast<int>(ceil_div(phi.b + g_w.last(), 2));
    const long per = phi.samples_per_unit();
    const long N = static_cast<long>(psi.b - psi.a) * per + 1;
    psi.values.assign(static_cast<std::size_t>(N), 0.0);
    for (long k = 0; k < N; ++k) {
        double s = 0.0;
        for (int t = 0; t < g_w.size(); ++t) {
            const long n = g_w.offset + t;
            s += g_w.coeffs[static_cast<std::size_t>(t)] * phi.at_index(2 * (static_cast<long>(psi.a) * per + k) - n * per);
        }
        psi.values[static_cast<std::size_t>(k)] = sqrt2 * s;
    }
    return psi;
}

struct ScalingFunctions {
    DyadicFunction phi_g, psi_g, phi_h, psi_h;
};

inline ScalingFunctions evaluate_functions(const FilterPair& pair, int r) {
    if (r < 6) throw InvalidInput("evaluate_functions: refine depth must be >= 6");
    ScalingFunctions out;
    out.phi_g = cascade_scaling(pair.g_s, r);
    out.phi_h = cascade_scaling(pair.h_s, r);
    out.psi_g = cascade_wavelet(out.phi_g, pair.g_w);
    out.psi_h = cascade_wavelet(out.phi_h, pair.h_w);
    return out;
}

/// max over interior grid points of |phi(x) - sqrt2 sum_n g[n] phi(2x - n)|
inline double refinement_residual(const DyadicFunction& phi, const Filter& g) {
    const long per = phi.samples_per_unit();
    double worst = 0.0;
    const long N = static_cast<long>(phi.values.size());
    for (long k = 1; k + 1 < N; ++k) {
        const long xi = static_cast<long>(phi.a) * per + k;
        double s = 0.0;
        for (int t = 0; t < g.size(); ++t) {
            const long n = g.offset + t;
            s += g.coeffs[static_cast<std::size_t>(t)] * phi.at_index(2 * xi - n * per);
        }
        worst = std::max(worst, std::abs(phi.values[static_cast<std::size_t>(k)] - sqrt2 * s));
    }
    return worst;
}

/// sup_y sqrt(sum_k phi(y - k)^2) over the sample grid.
inline double integer_shift_energy(const DyadicFunction& phi) {
    const long per = phi.samples_per_unit();
    std::vector<double> acc(static_cast<std::size_t>(per), 0.0);
    for (std::size_t k = 0; k < phi.values.size(); ++k)
        acc[k % static_cast<std::size_t>(per)] += phi.values[k] * phi.values[k];
    return std::sqrt(*std::max_element(acc.begin(), acc.end()));
}

struct TableRow {
    int K;
    double epsilon, C_UV, C_IR, C_chi, C_chi_prime, C_phi;
};

/// Published constants for the K = L Selesnick family.
inline const std::vector<TableRow>& reference_table() {
    static const std::vector<TableRow> rows = {
        {1, 0.264099, 0.619741, 2.542073, 1.166423, 1.142220, 1.254999},
        {2, 0.068221, 0.622182, 1.217454, 1.155488, 0.295133, 2.296890},
        {3, 0.018338, 0.624782, 1.190944, 1.154757, 0.079283, 2.116091},
        {4, 0.005020, 0.626782, 1.150151, 1.154705, 0.021691, 1.251461},
        {5, 0.001389, 0.628374, 1.130260, 1.154701, 0.005999, 2.120782},
        {6, 0.000387, 0.629686, 1.120354, 1.154701, 0.001671, 2.106891},
        {7, 0.000108, 0.630795, 1.114293, 1.154701, 0.000468, 1.234832},
        {8, 0.000030, 0.631752, 1.108135, 1.154701, 0.000132, 2.434899},
        {9, 0.000009, 0.632674, 1.106718, 1.154701, 0.000037, 1.923738},
        {10, 0.000003, 0.638023, 1.440101, 1.154701, 0.000011, 5.752427},
    };
    return rows;
}

inline std::optional<TableRow> reference_row(int K, int L) {
    if (K != L) return std::nullopt;
    for (const auto& row : reference_table())
        if (row.K == K) return row;
    return std::nullopt;
}

struct WaveletConstants {
    double epsilon = 0, C_UV = 0, C_IR = 0, C_chi = 0, C_chi_prime = 0, C_phi = 0, B = 0;

    // Alternative conventions, reported alongside.
    double C_UV_orderK = 0;
    double C_chi_table = 0;
    double C_IR_g = 0, C_IR_h = 0;
    double C_phi_sqrt = 0, C_phi_square = 0;
    double C_phi_sqrt_centered = 0, C_phi_square_centered = 0;
    std::string C_phi_convention;
    int r = 0;
    int gridsize = 0;
};

/// Candidate names for the C_phi convention, in the order tried.
inline const std::array<std::string, 4>& c_phi_conventions() {
    static const std::array<std::string, 4> names = {"sqrt(C^2+4/3)", "C^2+4/3", "sqrt(C^2+4/3), centered taps",
                                                    "C^2+4/3, centered taps"};
    return names;
}

inline WaveletConstants certify_constants(const FilterPair& pair, int r, int gridsize = 1 << 14) {
    WaveletConstants c;
    c.r = r;
    c.gridsize = gridsize;
    FilterPair p = pair;
    c.epsilon = certify_epsilon(p, gridsize);

    const int K = std::max(pair.K, 1);
    const int M = pair.M();
    Filter g_c = pair.g_s, h_c = pair.h_s;
    g_c.offset -= M / 2 - 1;
    h_c.offset -= M / 2 - 1;

    const double cut = std::ldexp(pi, -12);
    double C1 = 0, CK = 0, Cchi = 0, Cphi_n = 0, Cphi_c = 0;
    for (int i = 0; i <= gridsize; ++i) {
        const double th = -pi + 2.0 * pi * i / gridsize;
        const double ath = std::abs(th);
        if (ath < cut) continue;
        const double hi = std::abs(pair.g_s.fourier(th + pi)) / sqrt2;
        C1 = std::max(C1, hi / ath);
        CK = std::max(CK, hi / std::pow(ath, K));
        Cchi = std::max(Cchi, phase_defect(pair.g_s, pair.h_s, th) / sqrt2 / ath);
        Cphi_n = std::max({Cphi_n, std::abs(pair.g_s.fourier(th) / sqrt2 - 1.0) / ath,
                           std::abs(pair.h_s.fourier(th) / sqrt2 - 1.0) / ath});
        Cphi_c = std::max({Cphi_c, std::abs(g_c.fourier(th) / sqrt2 - 1.0) / ath,
                           std::abs(h_c.fourier(th) / sqrt2 - 1.0) / ath});
    }
    c.C_UV = std::sqrt(C1 * C1 / 4.0 + 1.0 / 3.0);
    c.C_UV_orderK = std::sqrt(CK * CK / std::pow(4.0, K) + 1.0 / 3.0);
    c.C_chi = std::sqrt(Cchi * Cchi + 4.0 / 3.0);
    c.C_chi_table = std::sqrt(4.0 * Cchi * Cchi + 4.0 / 3.0);
    c.C_chi_prime = 3.0 * (sqrt2 * Cchi + c.epsilon);
    c.C_phi_sqrt = std::sqrt(Cphi_n * Cphi_n + 4.0 / 3.0);
    c.C_phi_square = Cphi_n * Cphi_n + 4.0 / 3.0;
    c.C_phi_sqrt_centered = std::sqrt(Cphi_c * Cphi_c + 4.0 / 3.0);
    c.C_phi_square_centered = Cphi_c * Cphi_c + 4.0 / 3.0;

    const DyadicFunction pg = cascade_scaling(pair.g_s, r);
    const DyadicFunction ph = cascade_scaling(pair.h_s, r);
    c.C_IR_g = integer_shift_energy(pg);
    c.C_IR_h = integer_shift_energy(ph);
    c.C_IR = std::max(c.C_IR_g, c.C_IR_h);
    c.B = std::max(pg.sup_norm(), ph.sup_norm());

    const std::array<double, 4> cand = {c.C_phi_sqrt, c.C_phi_square, c.C_phi_sqrt_centered, c.C_phi_square_centered};
    std::size_t pick = 0;
    if (const auto row = reference_row(pair.K, pair.L)) {
        for (std::size_t k = 1; k < cand.size(); ++k)
            if (std::abs(cand[k] - row->C_phi) < std::abs(cand[pick] - row->C_phi)) pick = k;
    }
    c.C_phi = cand[pick];
    c.C_phi_convention = c_phi_conventions()[pick];
    return c;
}

inline nlohmann::json constants_to_json(const WaveletConstants& c) {
    nlohmann::json j;
    j["epsilon"] = c.epsilon;
    j["C_UV"] = c.C_UV;
    j["C_IR"] = c.C_IR;
    j["C_chi"] = c.C_chi;
    j["C_chi_prime"] = c.C_chi_prime;
    j["C_phi"] = c.C_phi;
    j["B"] = c.B;
    j["C_phi_convention"] = c.C_phi_convention;
    j["alternatives"] = {{"C_UV_orderK", c.C_UV_orderK},
                         {"C_chi_doubled", c.C_chi_table},
                         {"C_IR_g", c.C_IR_g},
                         {"C_IR_h", c.C_IR_h},
                         {"C_phi_sqrt", c.C_phi_sqrt},
                         {"C_phi_square", c.C_phi_square},
                         {"C_phi_sqrt_centered", c.C_phi_sqrt_centered},
                         {"C_phi_square_centered", c.C_phi_square_centered}};
    j["r"] = c.r;
    j["gridsize"] = c.gridsize;
    return j;
}

inline WaveletConstants constants_from_json(const nlohmann::json& j) {
    WaveletConstants c;
    c.epsilon = j.at("epsilon").get<double>();
    c.C_UV = j.at("C_UV").get<double>();
    c.C_IR = j.at("C_IR").get<double>();
    c.C_chi = j.at("C_chi").get<double>();
    c.C_chi_prime = j.value("C_chi_prime", 0.0);
    c.C_phi = j.value("C_phi", 0.0);
    c.B = j.value("B", 0.0);
    c.C_phi_convention = j.value("C_phi_convention", std::string());
    c.r = j.value("r", 0);
    c.gridsize = j.value("gridsize", 0);
    return c;
}

}  // namespace hmera

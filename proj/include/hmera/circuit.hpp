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

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "cascade.hpp"
#include "common.hpp"
#include "filters.hpp"
#include "transform.hpp"

namespace hmera {

/// u(theta) = [[cos, sin], [-sin, cos]]; a reflected gate is diag(-1, 1) u(theta).
inline Eigen::Matrix2d rotation_gate(double theta, bool reflect) {
    const double c = std::cos(theta), s = std::sin(theta);
    Eigen::Matrix2d u;
    u << c, s, -s, c;
    if (reflect) u.row(0) *= -1.0;
    return u;
}

struct Sublayer {
    int parity = 0;                      // gates act on site pairs (2k + parity, 2k + parity + 1)
    std::array<double, 2> theta{};       // indexed by Channel: h, g
    std::array<bool, 2> reflect{};
};

/// One MERA layer: sublayers applied first to last after a site shift, then a Hadamard on wavelet outputs.
struct CircuitLayer {
    int M = 0;
    long shift = 0;  // input site m is read from m + shift
    std::vector<Sublayer> sublayers;
    bool hadamard = true;

    int depth() const { return static_cast<int>(sublayers.size()) + (hadamard ? 1 : 0); }
};

namespace detail {

/// Splits the orthogonal 2x2 gate into angle and reflection flag.
inline void canonical_gate(const Eigen::Matrix2d& G, double& theta, bool& reflect) {
    reflect = G.determinant() < 0.0;
    Eigen::Matrix2d R = G;
    if (reflect) R.row(0) *= -1.0;
    theta = std::atan2(R(0, 1), R(0, 0));
}

/// Rows: output 2n (wavelet) and 2n+1 (scaling) over input positions 2n + o .. 2n + o + M - 1.
inline Eigen::MatrixXd layer_block(const Filter& s, const Filter& w) {
    const int M = s.size();
    if (w.size() != M) throw InvalidInput("layer_block: scaling and wavelet lengths differ");
    const long o = s.offset;
    const long t = (o - w.offset) / 2;
    if (2 * t != o - w.offset) throw InvalidInput("layer_block: filter offsets have mismatched parity");
    Eigen::MatrixXd B(2, M);
    for (int m = 0; m < M; ++m) {
        B(0, m) = w[o + m - 2 * t];
        B(1, m) = s[o + m];
    }
    return B;
}

/// Gates for one filter, first sublayer first.
inline std::vector<Eigen::Matrix2d> peel_gates(Eigen::MatrixXd B, double tol = 1e-8) {
    std::vector<Eigen::Matrix2d> gates;
    while (B.cols() > 2) {
        const long q = B.cols();
        const Eigen::Matrix2d H = B.rightCols(2);
        Eigen::JacobiSVD<Eigen::Matrix2d> svd(H, Eigen::ComputeFullU);
        const Eigen::Vector2d v = svd.matrixU().col(0);
        Eigen::Matrix2d G;
        G.col(1) = v;
        G.col(0) = Eigen::Vector2d(v(1), -v(0));
        if (G.determinant() < 0.0) G.col(0) *= -1.0;
        const Eigen::MatrixXd Bp = G.transpose() * B;
        const double resid = std::max(Bp.row(0).tail(2).cwiseAbs().maxCoeff(), Bp.row(1).head(2).cwiseAbs().maxCoeff());
        if (resid > tol) throw DecompositionFailure("peel-off residual " + std::to_string(resid) + " exceeds tolerance");
        gates.push_back(G);
        Eigen::MatrixXd C(2, q - 2);
        C.row(0) = Bp.row(1).segment(2, q - 2);
        C.row(1) = Bp.row(0).segment(0, q - 2);
        B = C;
    }
    const Eigen::Matrix2d G = B;
    if ((G.transpose() * G - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff() > tol)
        throw DecompositionFailure("final block is not orthogonal");
    gates.push_back(G);
    std::reverse(gates.begin(), gates.end());
    return gates;
}

}  // namespace detail

inline CircuitLayer decompose_layer(const FilterPair& pair) {
    const int M = pair.M();
    if (M < 2 || M % 2 != 0) throw InvalidInput("decompose_layer: filter length must be even");
    if (pair.h_s.size() != M) throw InvalidInput("decompose_layer: channels have different lengths");
    if (pair.g_s.offset != pair.h_s.offset) throw InvalidInput("decompose_layer: channels have different offsets");
    CircuitLayer layer;
    layer.M = M;
    const int P = M / 2;
    layer.shift = pair.g_s.offset + P - 1;
    layer.sublayers.resize(static_cast<std::size_t>(P));
    for (int c = 0; c < 2; ++c) {
        const Channel ch = static_cast<Channel>(c);
        const auto gates = detail::peel_gates(detail::layer_block(scaling_filter(pair, ch), wavelet_filter(pair, ch)));
        for (int p = 0; p < P; ++p) {
            auto& sl = layer.sublayers[static_cast<std::size_t>(p)];
            sl.parity = (P - 1 - p) % 2;
            detail::canonical_gate(gates[static_cast<std::size_t>(p)], sl.theta[static_cast<std::size_t>(c)], sl.reflect[static_cast<std::size_t>(c)]);
        }
    }
    return layer;
}

/// Dense cyclic matrix of one filter's rotation circuit on N sites (without the Hadamard).
inline Eigen::MatrixXd assemble_layer(const CircuitLayer& layer, long N, Channel ch) {
    if (N < 2 || N % 2 != 0) throw InvalidInput("assemble_layer: window must be even and positive");
    Eigen::MatrixXd U = Eigen::MatrixXd::Zero(N, N);
    for (long m = 0; m < N; ++m) U(m, positive_mod(m + layer.shift, N)) = 1.0;
    const int c = static_cast<int>(ch);
    for (const auto& sl : layer.sublayers) {
        const Eigen::Matrix2d G = rotation_gate(sl.theta[static_cast<std::size_t>(c)], sl.reflect[static_cast<std::size_t>(c)]);
        for (long k = 0; k < N / 2; ++k) {
            const long a = positive_mod(2 * k + sl.parity, N);
            const long b = positive_mod(2 * k + sl.parity + 1, N);
            const Eigen::RowVectorXd ra = U.row(a), rb = U.row(b);
            U.row(a) = G(0, 0) * ra + G(0, 1) * rb;
            U.row(b) = G(1, 0) * ra + G(1, 1) * rb;
        }
    }
    return U;
}

/// Dense cyclic reference: row 2n is the wavelet output, row 2n+1 the scaling output, filters wrapped modulo N.
inline Eigen::MatrixXd interleaved_layer_matrix(const Filter& s, const Filter& w, long N) {
    if (N < 2 || N % 2 != 0) throw InvalidInput("interleaved_layer_matrix: window must be even and positive");
    const Eigen::MatrixXd B = detail::layer_block(s, w);
    Eigen::MatrixXd U = Eigen::MatrixXd::Zero(N, N);
    for (long n = 0; n < N / 2; ++n)
        for (long m = 0; m < B.cols(); ++m)
            for (int r = 0; r < 2; ++r) U(2 * n + r, positive_mod(2 * n + s.offset + m, N)) += B(r, m);
    return U;
}

inline double reassembly_defect(const FilterPair& pair, const CircuitLayer& layer, long N) {
    double d = 0.0;
    for (int c = 0; c < 2; ++c) {
        const Channel ch = static_cast<Channel>(c);
        const Eigen::MatrixXd A = assemble_layer(layer, N, ch);
        const Eigen::MatrixXd R = interleaved_layer_matrix(scaling_filter(pair, ch), wavelet_filter(pair, ch), N);
        d = std::max(d, (A - R).cwiseAbs().maxCoeff());
    }
    return d;
}

inline double unitarity_defect(const Eigen::MatrixXcd& U) {
    return (U.adjoint() * U - Eigen::MatrixXcd::Identity(U.cols(), U.cols())).cwiseAbs().maxCoeff();
}

/// Dense MERA unitary on N sites times two channels, index = channel * N + site.
struct MeraUnitary {
    std::vector<CircuitLayer> layers;
    long N = 0;
    bool periodic = false;
    std::vector<long> active_sites;  // sites carrying scaling outputs per scale, 0 = all sites
    Eigen::MatrixXcd U;
    std::vector<long> wavelet_sites;  // sites measured by P after all layers

    /// Q = U^dagger (P_w x |0><0|) U
    Eigen::MatrixXcd symbol() const {
        Eigen::MatrixXcd PU = Eigen::MatrixXcd::Zero(static_cast<long>(wavelet_sites.size()), 2 * N);
        for (std::size_t i = 0; i < wavelet_sites.size(); ++i) PU.row(static_cast<long>(i)) = U.row(wavelet_sites[i]);
        return PU.adjoint() * PU;
    }
};

inline MeraUnitary build_mera_unitary(const FilterPair& pair, int depth, long window, bool periodic) {
    if (depth < 1) throw InvalidInput("build_mera_unitary: depth must be >= 1");
    if (periodic && window != (1L << depth)) throw InvalidInput("build_mera_unitary: periodic window must equal 2^depth");
    if (window % (1L << depth) != 0) throw InvalidInput("build_mera_unitary: window must be a multiple of 2^depth");
    MeraUnitary mu;
    mu.N = window;
    mu.periodic = periodic;
    const CircuitLayer layer = decompose_layer(pair);
    mu.U = Eigen::MatrixXcd::Identity(2 * window, 2 * window);
    std::vector<long> sites(static_cast<std::size_t>(window));
    for (long i = 0; i < window; ++i) sites[static_cast<std::size_t>(i)] = i;
    const double r = 1.0 / sqrt2;
    for (int l = 0; l < depth; ++l) {
        mu.layers.push_back(layer);
        const long n = static_cast<long>(sites.size());
        Eigen::MatrixXcd L = Eigen::MatrixXcd::Identity(2 * window, 2 * window);
        for (int c = 0; c < 2; ++c) {
            const Eigen::MatrixXd A = assemble_layer(layer, n, static_cast<Channel>(c));
            for (long a = 0; a < n; ++a)
                for (long b = 0; b < n; ++b)
                    L(c * window + sites[static_cast<std::size_t>(a)], c * window + sites[static_cast<std::size_t>(b)]) = A(a, b);
        }
        Eigen::MatrixXcd Hd = Eigen::MatrixXcd::Identity(2 * window, 2 * window);
        std::vector<long> next;
        for (long a = 0; a < n; ++a) {
            const long s = sites[static_cast<std::size_t>(a)];
            if (a % 2 == 1) {
                next.push_back(s);
                continue;
            }
            Hd(s, s) = r;
            Hd(s, window + s) = r;
            Hd(window + s, s) = r;
            Hd(window + s, window + s) = -r;
            mu.wavelet_sites.push_back(s);
        }
        mu.U = (Hd * L * mu.U).eval();
        sites = std::move(next);
    }
    mu.active_sites = sites;
    return mu;
}

/// Time-translation basis change (1/sqrt2) [[1, i], [1, -i]].
inline Eigen::Matrix2cd time_translation_basis() {
    Eigen::Matrix2cd T;
    T << 1.0, cplx(0.0, 1.0), 1.0, cplx(0.0, -1.0);
    return T / sqrt2;
}

struct CovarianceReport {
    double scaling_residual = 0.0;
    double shift_residual = 0.0;
};

/// One scaling-channel layer applied to (phi_{j,k}(x))_k against phi_{j-1,n}(x); x runs over the given grid.
inline CovarianceReport check_scaling_covariance(const FilterPair& pair, const ScalingFunctions& fn, int j, const std::vector<double>& xs) {
    CovarianceReport rep;
    const double two_j = std::ldexp(1.0, j);
    for (int c = 0; c < 2; ++c) {
        const DyadicFunction& phi = c == 0 ? fn.phi_h : fn.phi_g;
        const Filter& s = c == 0 ? pair.h_s : pair.g_s;
        for (double x : xs) {
            const long klo = static_cast<long>(std::floor(two_j * x - phi.b)) - 1;
            const long khi = static_cast<long>(std::ceil(two_j * x - phi.a)) + 1;
            auto phij = [&](int scale, long k) {
                const double y = std::ldexp(x, scale) - static_cast<double>(k);
                if (y < phi.a || y > phi.b) return 0.0;
                return std::sqrt(std::ldexp(1.0, scale)) * phi(y);
            };
            const long nlo = floor_div(klo - s.last(), 2);
            const long nhi = ceil_div(khi - s.first(), 2);
            double err2 = 0.0;
            for (long n = nlo; n <= nhi; ++n) {
                double acc = 0.0;
                for (long m = s.first(); m <= s.last(); ++m) acc += s[m] * phij(j, 2 * n + m);
                const double d = acc - phij(j - 1, n);
                err2 += d * d;
            }
            rep.scaling_residual = std::max(rep.scaling_residual, std::sqrt(err2));
        }
    }
    // Shifting the input by two sites shifts every output of one layer by one.
    const long N = std::max<long>(4 * pair.M(), 16);
    const CircuitLayer layer = decompose_layer(pair);
    Eigen::MatrixXd S2 = Eigen::MatrixXd::Zero(N, N), S1 = Eigen::MatrixXd::Zero(N / 2, N / 2);
    for (long m = 0; m < N; ++m) S2(positive_mod(m + 2, N), m) = 1.0;
    for (long m = 0; m < N / 2; ++m) S1(positive_mod(m + 1, N / 2), m) = 1.0;
    for (int c = 0; c < 2; ++c) {
        const Eigen::MatrixXd A = assemble_layer(layer, N, static_cast<Channel>(c));
        Eigen::MatrixXd Wr(N / 2, N), Sr(N / 2, N);
        for (long n = 0; n < N / 2; ++n) {
            Wr.row(n) = A.row(2 * n);
            Sr.row(n) = A.row(2 * n + 1);
        }
        rep.shift_residual = std::max(rep.shift_residual, (Wr * S2 - S1 * Wr).cwiseAbs().maxCoeff());
        rep.shift_residual = std::max(rep.shift_residual, (Sr * S2 - S1 * Sr).cwiseAbs().maxCoeff());
    }
    return rep;
}

/// Dyadic grid points in [lo, hi] on which the cascade values at depth r are exact at scales j and j - 1.
inline std::vector<double> dyadic_grid(double lo, double hi, int j, int r, long stride = 1) {
    std::vector<double> xs;
    const double h = std::ldexp(1.0, -j - r + 1);
    for (long k = static_cast<long>(std::ceil(lo / h)); k * h <= hi; k += stride) xs.push_back(static_cast<double>(k) * h);
    return xs;
}

inline nlohmann::json circuit_to_json(const MeraUnitary& mu, double reassembly) {
    nlohmann::json j;
    j["depth"] = mu.layers.size();
    j["periodic"] = mu.periodic;
    j["window"] = mu.N;
    j["reassembly_defect"] = reassembly;
    j["layers"] = nlohmann::json::array();
    for (const auto& layer : mu.layers) {
        nlohmann::json lj;
        lj["site_shift"] = layer.shift;
        lj["hadamard"] = layer.hadamard;
        lj["sublayers"] = nlohmann::json::array();
        for (const auto& sl : layer.sublayers) {
            lj["sublayers"].push_back({{"parity", sl.parity == 0 ? "even" : "odd"},
                                       {"theta_g", sl.theta[1]},
                                       {"theta_h", sl.theta[0]},
                                       {"reflect", {{"g", sl.reflect[1]}, {"h", sl.reflect[0]}}}});
        }
        j["layers"].push_back(lj);
    }
    return j;
}

}  // namespace hmera

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
#include <cstddef>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/multiprecision/cpp_complex.hpp>

#include "common.hpp"

namespace hmera::poly {

using mpreal = boost::multiprecision::cpp_bin_float_100;
using mpcomplex = boost::multiprecision::cpp_complex_100;

template <typename T>
std::vector<T> convolve(const std::vector<T>& a, const std::vector<T>& b) {
    if (a.empty() || b.empty()) return {};
    std::vector<T> out(a.size() + b.size() - 1, T(0));
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = 0; k < b.size(); ++k) out[i + k] += a[i] * b[k];
    return out;
}

inline std::vector<mpreal> binomial_row(int n) {
    std::vector<mpreal> row(static_cast<std::size_t>(n) + 1);
    row[0] = 1;
    for (int k = 1; k <= n; ++k)
        row[static_cast<std::size_t>(k)] = row[static_cast<std::size_t>(k - 1)] * (n - k + 1) / k;
    return row;
}

/// Solves A x = b by Gaussian elimination with partial pivoting.
/// Returns the ratio of largest to smallest pivot magnitude through `pivot_ratio`.
inline std::vector<mpreal> lu_solve(std::vector<std::vector<mpreal>> A, std::vector<mpreal> b,
                                    mpreal& pivot_ratio) {
    const std::size_t n = b.size();
    mpreal pmax = 0, pmin = -1;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (abs(A[r][c]) > abs(A[piv][c])) piv = r;
        std::swap(A[c], A[piv]);
        std::swap(b[c], b[piv]);
        const mpreal p = abs(A[c][c]);
        if (p == 0) {
            pivot_ratio = std::numeric_limits<mpreal>::infinity();
            return {};
        }
        pmax = std::max(pmax, p);
        pmin = (pmin < 0) ? p : std::min(pmin, p);
        for (std::size_t r = c + 1; r < n; ++r) {
            const mpreal f = A[r][c] / A[c][c];
            if (f == 0) continue;
            for (std::size_t k = c; k < n; ++k) A[r][k] -= f * A[c][k];
            b[r] -= f * b[c];
        }
    }
    std::vector<mpreal> x(n);
    for (std::size_t i = n; i-- > 0;) {
        mpreal s = b[i];
        for (std::size_t k = i + 1; k < n; ++k) s -= A[i][k] * x[k];
        x[i] = s / A[i][i];
    }
    pivot_ratio = pmax / pmin;
    return x;
}

/// All complex roots of sum_k c[k] z^k (c.back() != 0), Aberth-Ehrlich iteration.
inline std::vector<mpcomplex> polynomial_roots(const std::vector<mpreal>& c, int max_iter = 800) {
    std::size_t deg = c.size() - 1;
    while (deg > 0 && c[deg] == 0) --deg;
    if (deg == 0) return {};
    std::vector<mpcomplex> a(deg + 1);
    for (std::size_t k = 0; k <= deg; ++k) a[k] = mpcomplex(c[k] / c[deg]);

    // Initial radius from the Cauchy-type bound.
    mpreal rad = 0;
    for (std::size_t k = 0; k < deg; ++k) {
        mpreal v = pow(abs(a[k].real()), mpreal(1) / mpreal(deg - k));
        rad = std::max(rad, v);
    }
    if (rad == 0) rad = 1;
    std::vector<mpcomplex> z(deg);
    const mpreal two_pi = 2 * boost::math::constants::pi<mpreal>();
    for (std::size_t k = 0; k < deg; ++k) {
        mpreal ang = two_pi * mpreal(k) / mpreal(deg) + mpreal(0.4);
        z[k] = mpcomplex(rad * cos(ang), rad * sin(ang));
    }
    const mpreal tol = mpreal("1e-90");
    for (int it = 0; it < max_iter; ++it) {
        mpreal worst = 0;
        for (std::size_t i = 0; i < deg; ++i) {
            mpcomplex p = a[deg], dp = 0;
            for (std::size_t k = deg; k-- > 0;) {
                dp = dp * z[i] + p;
                p = p * z[i] + a[k];
            }
            if (p == mpcomplex(0)) continue;
            const mpcomplex ratio = p / dp;
            mpcomplex s = 0;
            for (std::size_t k = 0; k < deg; ++k)
                if (k != i) s += mpcomplex(1) / (z[i] - z[k]);
            const mpcomplex step = ratio / (mpcomplex(1) - ratio * s);
            z[i] -= step;
            const mpreal rel = abs(step) / std::max(mpreal(1e-300), abs(z[i]));
            worst = std::max(worst, rel);
        }
        if (worst < tol) break;
    }
    return z;
}

}  // namespace hmera::poly

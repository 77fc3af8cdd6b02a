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
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "common.hpp"
#include "polynomial.hpp"

namespace hmera {

/// Real FIR filter; coeffs[i] is the tap at integer position offset + i.
struct Filter {
    std::vector<double> coeffs;
    int offset = 0;

    int size() const { return static_cast<int>(coeffs.size()); }
    int first() const { return offset; }
    int last() const { return offset + size() - 1; }

    /// Tap at absolute index n (zero outside the support).
    double operator[](long n) const {
        const long i = n - offset;
        if (i < 0 || i >= size()) return 0.0;
        return coeffs[static_cast<std::size_t>(i)];
    }

    /// sum_n f[n] e^{-i theta n}
    cplx fourier(double theta) const {
        cplx acc = 0.0;
        for (int i = 0; i < size(); ++i)
            acc += coeffs[static_cast<std::size_t>(i)] * std::polar(1.0, -theta * (offset + i));
        return acc;
    }

    double sum() const {
        double s = 0.0;
        for (double c : coeffs) s += c;
        return s;
    }

    double norm() const {
        double s = 0.0;
        for (double c : coeffs) s += c * c;
        return std::sqrt(s);
    }
};

struct FilterPair {
    int K = 0;
    int L = 0;
    Filter g_s, h_s, g_w, h_w;
    double epsilon = std::numeric_limits<double>::quiet_NaN();

    int M() const { return g_s.size(); }
};

/// g_w[n] = (-1)^(1-n) g_s[1-n]
inline Filter wavelet_from_scaling(const Filter& g_s) {
    if (g_s.coeffs.empty()) throw InvalidInput("wavelet_from_scaling: empty filter");
    Filter w;
    const int M = g_s.size();
    w.offset = 2 - g_s.offset - M;
    w.coeffs.resize(static_cast<std::size_t>(M));
    for (int i = 0; i < M; ++i) {
        const long n = w.offset + i;
        const double sign = ((1 - n) % 2 == 0) ? 1.0 : -1.0;
        w.coeffs[static_cast<std::size_t>(i)] = sign * g_s[1 - n];
    }
    return w;
}

struct QmfReport {
    double quadrature_defect = 0.0;
    double dc_defect = 0.0;
    bool pass = false;
};

inline QmfReport verify_qmf(const Filter& f, double tol, int gridsize = 4096) {
    QmfReport rep;
    gridsize = std::max(gridsize, 4096);
    for (int i = 0; i < gridsize; ++i) {
        const double th = -pi + 2.0 * pi * i / gridsize;
        const double a = std::norm(f.fourier(th));
        const double b = std::norm(f.fourier(th + pi));
        rep.quadrature_defect = std::max(rep.quadrature_defect, std::abs(a + b - 2.0));
    }
    rep.dc_defect = std::abs(f.fourier(0.0) - cplx(sqrt2, 0.0));
    rep.pass = rep.quadrature_defect <= tol && rep.dc_defect <= tol;
    return rep;
}

inline double phase_defect(const Filter& g_s, const Filter& h_s, double theta) {
    return std::abs(h_s.fourier(theta) - std::polar(1.0, -theta / 2.0) * g_s.fourier(theta));
}

/// Grid supremum of |h_s(theta) - e^{-i theta/2} g_s(theta)| on [-pi, pi] (gridsize+1 points).
inline double certify_epsilon(FilterPair& pair, int gridsize = 1 << 14) {
    if (gridsize < 4096) throw InvalidInput("certify_epsilon: gridsize must be >= 4096");
    double eps = 0.0;
    for (int i = 0; i <= gridsize; ++i) {
        const double th = -pi + 2.0 * pi * i / gridsize;
        eps = std::max(eps, phase_defect(pair.g_s, pair.h_s, th));
    }
    pair.epsilon = eps;
    return eps;
}

struct PeriodicFilter {
    int j = 0;
    std::vector<double> coeffs;

    double operator[](long n) const {
        return coeffs[static_cast<std::size_t>(positive_mod(n, static_cast<long>(coeffs.size())))];
    }
};

inline PeriodicFilter periodize_filter(const Filter& f, int j) {
    if (j < 0) throw InvalidInput("periodize_filter: j must be >= 0");
    PeriodicFilter p;
    p.j = j;
    const long N = 1L << j;
    p.coeffs.assign(static_cast<std::size_t>(N), 0.0);
    for (int i = 0; i < f.size(); ++i)
        p.coeffs[static_cast<std::size_t>(positive_mod(f.offset + i, N))] += f.coeffs[static_cast<std::size_t>(i)];
    return p;
}

inline FilterPair make_pair(int K, int L, Filter g_s, Filter h_s, bool certify = true) {
    if (g_s.coeffs.empty() || h_s.coeffs.empty()) throw InvalidInput("make_pair: empty filter");
    FilterPair p;
    p.K = K;
    p.L = L;
    p.g_s = std::move(g_s);
    p.h_s = std::move(h_s);
    p.g_w = wavelet_from_scaling(p.g_s);
    p.h_w = wavelet_from_scaling(p.h_s);
    if (certify) certify_epsilon(p);
    return p;
}

inline FilterPair haar_pair() {
    Filter h{{1.0 / sqrt2, 1.0 / sqrt2}, 0};
    return make_pair(0, 0, h, h);
}

struct DesignOptions {
    /// One flag per root group (real root or conjugate pair, ordered by modulus then imaginary part).
    /// A set flag replaces the group's roots z by 1/z. Empty means minimum phase.
    std::vector<int> root_flips;
    int max_order = 20;
    double pivot_ratio_limit = 1e60;
};

namespace detail {

using poly::mpcomplex;
using poly::mpreal;

/// Numerator of the degree-L maximally flat allpass approximating a delay of 1/2 sample.
inline std::vector<mpreal> half_sample_allpass(int L) {
    const mpreal tau = mpreal(1) / 2;
    std::vector<mpreal> d{mpreal(1)};
    const auto binom = poly::binomial_row(L);
    for (int n = 1; n <= L; ++n) {
        mpreal p = 1;
        for (int k = 0; k < n; ++k) p *= (tau - L + k) / (tau + 1 + k);
        d.push_back(((n % 2) ? -1 : 1) * binom[static_cast<std::size_t>(n)] * p);
    }
    return d;
}

struct RootGroup {
    std::vector<mpcomplex> roots;
};

inline std::vector<RootGroup> group_roots(std::vector<mpcomplex> inside) {
    std::sort(inside.begin(), inside.end(), [](const mpcomplex& a, const mpcomplex& b) {
        const mpreal ma = abs(a), mb = abs(b);
        if (abs(ma - mb) > mpreal("1e-40")) return ma < mb;
        return a.imag() < b.imag();
    });
    std::vector<RootGroup> groups;
    std::vector<bool> used(inside.size(), false);
    for (std::size_t i = 0; i < inside.size(); ++i) {
        if (used[i]) continue;
        used[i] = true;
        if (abs(inside[i].imag()) < mpreal("1e-40")) {
            groups.push_back({{mpcomplex(inside[i].real())}});
            continue;
        }
        std::size_t best = i;
        mpreal dist = -1;
        for (std::size_t k = 0; k < inside.size(); ++k) {
            if (used[k]) continue;
            const mpreal dd = abs(inside[k] - conj(inside[i]));
            if (dist < 0 || dd < dist) {
                dist = dd;
                best = k;
            }
        }
        if (best == i) throw DesignFailure("spectral factorization", "unpaired complex root");
        used[best] = true;
        groups.push_back({{inside[i], inside[best]}});
    }
    return groups;
}

}  // namespace detail

/// Common-factor Hilbert-pair design with K vanishing moments and a degree-L half-sample allpass.
inline FilterPair design_hilbert_pair(int K, int L, const DesignOptions& opt = {}) {
    using detail::mpcomplex;
    using detail::mpreal;
    if (K < 1 || L < 1) throw InvalidInput("design_hilbert_pair: K and L must be >= 1");
    if (K + L > opt.max_order)
        throw InvalidInput("design_hilbert_pair: K + L exceeds " + std::to_string(opt.max_order));

    const auto d = detail::half_sample_allpass(L);
    std::vector<mpreal> drev(d.rbegin(), d.rend());
    const auto s = poly::convolve(poly::binomial_row(2 * K), poly::convolve(d, drev));
    const int n = K + L;

    // Halfband condition on s * r for the symmetric remainder r_{-(n-1)}..r_{n-1}.
    std::vector<std::vector<mpreal>> A(static_cast<std::size_t>(n), std::vector<mpreal>(static_cast<std::size_t>(n), mpreal(0)));
    std::vector<mpreal> rhs(static_cast<std::size_t>(n), mpreal(0));
    rhs[0] = 1;
    for (int m = 0; m < n; ++m)
        for (int jj = -(n - 1); jj <= n - 1; ++jj) {
            const int idx = n + 2 * m - jj;
            if (idx >= 0 && idx < static_cast<int>(s.size()))
                A[static_cast<std::size_t>(m)][static_cast<std::size_t>(std::abs(jj))] += s[static_cast<std::size_t>(idx)];
        }
    mpreal ratio;
    const auto half = poly::lu_solve(A, rhs, ratio);
    if (half.empty() || ratio > mpreal(opt.pivot_ratio_limit))
        throw ConditioningError("design_hilbert_pair: remainder system is ill-conditioned (pivot ratio " +
                                (half.empty() ? std::string("inf") : ratio.str(6)) + ")");
    std::vector<mpreal> r(static_cast<std::size_t>(2 * n - 1));
    for (int jj = -(n - 1); jj <= n - 1; ++jj)
        r[static_cast<std::size_t>(jj + n - 1)] = half[static_cast<std::size_t>(std::abs(jj))];

    {
        const int grid = 1 << 14;
        double rmax = 0.0, rmin = std::numeric_limits<double>::infinity();
        for (int i = 0; i <= grid; ++i) {
            const double th = pi * i / grid;
            double v = static_cast<double>(half[0]);
            for (int jj = 1; jj < n; ++jj) v += 2.0 * static_cast<double>(half[static_cast<std::size_t>(jj)]) * std::cos(jj * th);
            rmax = std::max(rmax, std::abs(v));
            rmin = std::min(rmin, v);
        }
        if (rmin < -1e-10 * std::max(1.0, rmax)) {
            std::ostringstream os;
            os << "halfband remainder minimum " << rmin << " (K=" << K << ", L=" << L << ")";
            throw DesignFailure("spectral factorization failed", os.str());
        }
    }

    const auto roots = poly::polynomial_roots(r);
    std::vector<mpcomplex> inside;
    for (const auto& z : roots)
        if (abs(z) < 1) inside.push_back(z);
    if (static_cast<int>(inside.size()) != n - 1) {
        std::ostringstream os;
        os << inside.size() << " roots inside the unit disk, expected " << (n - 1);
        throw DesignFailure("spectral factorization failed", os.str());
    }
    for (const auto& z : inside) {
        const mpcomplex zi = mpcomplex(1) / z;
        mpreal best = -1;
        for (const auto& w : roots) {
            const mpreal dd = abs(w - zi) / abs(zi);
            if (best < 0 || dd < best) best = dd;
        }
        if (best > mpreal("1e-8")) {
            std::ostringstream os;
            os << "root reciprocal pairing defect " << static_cast<double>(best);
            throw DesignFailure("spectral factorization failed", os.str());
        }
    }

    const auto groups = detail::group_roots(inside);
    if (!opt.root_flips.empty() && opt.root_flips.size() != groups.size())
        throw InvalidInput("design_hilbert_pair: root_flips needs " + std::to_string(groups.size()) + " entries");

    std::vector<mpcomplex> q{mpcomplex(1)};
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
        const bool flip = !opt.root_flips.empty() && opt.root_flips[gi] != 0;
        for (const auto& z : groups[gi].roots) {
            const mpcomplex zz = flip ? mpcomplex(1) / z : z;
            q = poly::convolve(q, std::vector<mpcomplex>{mpcomplex(1), -zz});
        }
    }
    std::vector<mpreal> qr;
    for (const auto& c : q) qr.push_back(c.real());

    const auto f = poly::convolve(qr, poly::binomial_row(K));
    auto to_filter = [](const std::vector<mpreal>& c) {
        mpreal total = 0;
        for (const auto& x : c) total += x;
        const mpreal scale = sqrt(mpreal(2)) / total;
        Filter out;
        out.offset = 0;
        for (const auto& x : c) out.coeffs.push_back(static_cast<double>(x * scale));
        return out;
    };
    FilterPair pair = make_pair(K, L, to_filter(poly::convolve(f, d)), to_filter(poly::convolve(f, drev)));
    return pair;
}

inline nlohmann::json pair_to_json(const FilterPair& p) {
    nlohmann::json j;
    j["K"] = p.K;
    j["L"] = p.L;
    j["g_s"] = p.g_s.coeffs;
    j["h_s"] = p.h_s.coeffs;
    if (!std::isnan(p.epsilon)) j["epsilon"] = p.epsilon;
    return j;
}

inline FilterPair pair_from_json(const nlohmann::json& j) {
    if (!j.contains("g_s") || !j.contains("h_s")) throw InvalidInput("filter-pair file lacks g_s/h_s");
    Filter g{j.at("g_s").get<std::vector<double>>(), 0};
    Filter h{j.at("h_s").get<std::vector<double>>(), 0};
    if (g.size() < 2 || g.size() != h.size()) throw InvalidInput("filter-pair file: bad filter lengths");
    FilterPair p = make_pair(j.value("K", 0), j.value("L", 0), g, h);
    return p;
}

/// JSON text with 17 significant digits for every float.
inline std::string dump_json(const nlohmann::json& j) {
    std::ostringstream os;
    os.imbue(std::locale::classic());
    std::function<void(const nlohmann::json&, int)> rec = [&](const nlohmann::json& v, int ind) {
        const std::string pad(static_cast<std::size_t>(ind), ' ');
        if (v.is_object()) {
            os << "{\n";
            std::size_t k = 0;
            for (auto it = v.begin(); it != v.end(); ++it, ++k) {
                os << pad << "  " << nlohmann::json(it.key()).dump() << ": ";
                rec(it.value(), ind + 2);
                if (k + 1 < v.size()) os << ",";
                os << "\n";
            }
            os << pad << "}";
        } else if (v.is_array()) {
            os << "[";
            for (std::size_t k = 0; k < v.size(); ++k) {
                if (k) os << ", ";
                rec(v[k], ind + 2);
            }
            os << "]";
        } else if (v.is_number_float()) {
            const double x = v.get<double>();
            if (std::isfinite(x))
                os << std::setprecision(17) << x;
            else
                os << "null";
        } else {
            os << v.dump();
        }
    };
    rec(j, 0);
    os << "\n";
    return os.str();
}

inline void save_pair(const FilterPair& p, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw InvalidInput("cannot write " + path);
    out << dump_json(pair_to_json(p));
}

inline FilterPair load_pair(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot read " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw InvalidInput(std::string("malformed filter-pair file: ") + e.what());
    }
    return pair_from_json(j);
}

}  // namespace hmera

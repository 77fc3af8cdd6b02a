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
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <unsupported/Eigen/FFT>

#include "cascade.hpp"
#include "common.hpp"
#include "filters.hpp"

namespace hmera {

enum class Geometry { line, periodic, antiperiodic };

inline Geometry parse_geometry(const std::string& s) {
    if (s == "line") return Geometry::line;
    if (s == "periodic" || s == "circle-periodic") return Geometry::periodic;
    if (s == "antiperiodic" || s == "circle-antiperiodic") return Geometry::antiperiodic;
    throw InvalidInput("unknown geometry '" + s + "'");
}

inline std::string geometry_name(Geometry g) {
    switch (g) {
        case Geometry::line: return "line";
        case Geometry::periodic: return "periodic";
        default: return "antiperiodic";
    }
}

// ---------------------------------------------------------------------------
// Smearing functions

/// One spinor component: a modulated Gaussian, sampled data, or zero.
struct ScalarSmearing {
    enum class Kind { zero, gaussian, sampled };
    Kind kind = Kind::zero;
    cplx amplitude = 1.0;
    double x0 = 0.0;
    double sigma = 1.0;
    double kappa = 0.0;  // extra phase e^{i kappa x}
    double dx = 0.0;     // sampled: grid x0 + i dx
    std::vector<cplx> samples;

    static ScalarSmearing gaussian(double center, double width, cplx amp = 1.0) {
        ScalarSmearing s;
        s.kind = Kind::gaussian;
        s.x0 = center;
        s.sigma = width;
        s.amplitude = amp;
        return s;
    }

    static ScalarSmearing sampled(double start, double step, std::vector<cplx> values) {
        ScalarSmearing s;
        s.kind = Kind::sampled;
        s.x0 = start;
        s.dx = step;
        s.samples = std::move(values);
        return s;
    }

    bool is_zero() const { return kind == Kind::zero || amplitude == cplx(0.0); }

    /// Gaussians are truncated where they fall below 1e-16 of their peak.
    double cutoff() const { return sigma * std::sqrt(2.0 * std::log(1e16)); }

    std::array<double, 2> support() const {
        switch (kind) {
            case Kind::gaussian: return {x0 - cutoff(), x0 + cutoff()};
            case Kind::sampled: return {x0, x0 + dx * static_cast<double>(samples.size() - 1)};
            default: return {0.0, 0.0};
        }
    }

    cplx operator()(double x) const {
        switch (kind) {
            case Kind::gaussian: {
                const double u = x - x0;
                if (std::abs(u) > cutoff()) return 0.0;
                const double nrm = 1.0 / std::sqrt(sigma * std::sqrt(pi));
                return amplitude * nrm * std::exp(-u * u / (2.0 * sigma * sigma)) * std::polar(1.0, kappa * x);
            }
            case Kind::sampled: {
                const double t = (x - x0) / dx;
                if (t < 0.0 || t > static_cast<double>(samples.size() - 1)) return 0.0;
                const std::size_t k = std::min(static_cast<std::size_t>(t), samples.size() - 2);
                const double w = t - static_cast<double>(k);
                return amplitude * ((1.0 - w) * samples[k] + w * samples[k + 1]) * std::polar(1.0, kappa * x);
            }
            default: return 0.0;
        }
    }

    /// f-hat(omega) = int f(x) e^{-i omega x} dx
    cplx fourier(double omega) const {
        switch (kind) {
            case Kind::gaussian: {
                const double w = omega - kappa;
                const double nrm = 1.0 / std::sqrt(sigma * std::sqrt(pi));
                return amplitude * nrm * sigma * std::sqrt(2.0 * pi) * std::exp(-0.5 * sigma * sigma * w * w) *
                       std::polar(1.0, -w * x0);
            }
            case Kind::sampled: {
                cplx acc = 0.0;
                const std::size_t n = samples.size();
                for (std::size_t k = 0; k < n; ++k) {
                    const double x = x0 + dx * static_cast<double>(k);
                    const double wt = (k == 0 || k + 1 == n) ? 0.5 : 1.0;
                    acc += wt * samples[k] * std::polar(1.0, (kappa - omega) * x);
                }
                return amplitude * acc * dx;
            }
            default: return 0.0;
        }
    }

    double norm() const {
        switch (kind) {
            case Kind::gaussian: return std::abs(amplitude);
            case Kind::sampled: {
                double acc = 0.0;
                for (std::size_t k = 0; k < samples.size(); ++k) {
                    const double wt = (k == 0 || k + 1 == samples.size()) ? 0.5 : 1.0;
                    acc += wt * std::norm(samples[k]);
                }
                return std::abs(amplitude) * std::sqrt(acc * dx);
            }
            default: return 0.0;
        }
    }

    /// L2 norm of the derivative: closed form for Gaussians, central differences otherwise.
    double derivative_norm() const {
        switch (kind) {
            case Kind::gaussian:
                return std::abs(amplitude) * std::sqrt(1.0 / (2.0 * sigma * sigma) + kappa * kappa);
            case Kind::sampled: {
                const std::size_t n = samples.size();
                if (n < 3) return 0.0;
                double acc = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double x = x0 + dx * static_cast<double>(k);
                    cplx d;
                    if (k == 0)
                        d = ((*this)(x + dx) - (*this)(x)) / dx;
                    else if (k + 1 == n)
                        d = ((*this)(x) - (*this)(x - dx)) / dx;
                    else
                        d = ((*this)(x + dx) - (*this)(x - dx)) / (2.0 * dx);
                    acc += std::norm(d);
                }
                return std::sqrt(acc * dx);
            }
            default: return 0.0;
        }
    }
};

struct SpinorSmearing {
    std::array<ScalarSmearing, 2> comp;

    /// u (x) f with u = (1, -i)/sqrt2, the negative-frequency chiral spinor.
    static SpinorSmearing chiral(const ScalarSmearing& f) {
        SpinorSmearing s;
        s.comp[0] = f;
        s.comp[0].amplitude *= 1.0 / sqrt2;
        s.comp[1] = f;
        s.comp[1].amplitude *= cplx(0.0, -1.0 / sqrt2);
        return s;
    }

    static SpinorSmearing component(int c, const ScalarSmearing& f) {
        SpinorSmearing s;
        s.comp[static_cast<std::size_t>(c)] = f;
        return s;
    }

    std::array<double, 2> support() const {
        double lo = 1e300, hi = -1e300;
        for (const auto& c : comp) {
            if (c.is_zero()) continue;
            const auto s = c.support();
            lo = std::min(lo, s[0]);
            hi = std::max(hi, s[1]);
        }
        if (lo > hi) return {0.0, 0.0};
        return {lo, hi};
    }

    double support_width() const {
        const auto s = support();
        return s[1] - s[0];
    }

    double norm() const { return std::hypot(comp[0].norm(), comp[1].norm()); }
    double derivative_norm() const { return std::hypot(comp[0].derivative_norm(), comp[1].derivative_norm()); }
};

/// T f(x) = e^{-i pi x} f(x)
inline SpinorSmearing antiperiodic_twist(const SpinorSmearing& f) {
    SpinorSmearing out = f;
    for (auto& c : out.comp) c.kappa -= pi;
    return out;
}

/// sum_m sign^m f(x + m): the periodic (sign = +1) or anti-periodic (sign = -1) extension.
inline cplx circle_value(const ScalarSmearing& f, double x, int sign) {
    const auto s = f.support();
    const long m_lo = static_cast<long>(std::floor(s[0] - x)) - 1;
    const long m_hi = static_cast<long>(std::ceil(s[1] - x)) + 1;
    cplx acc = 0.0;
    for (long m = m_lo; m <= m_hi; ++m) acc += ((sign < 0 && (m % 2 != 0)) ? -1.0 : 1.0) * f(x + static_cast<double>(m));
    return acc;
}

// ---------------------------------------------------------------------------
// Sequences on Z

/// Finite complex sequence; v[i] sits at integer index offset + i.
struct LineVector {
    long offset = 0;
    std::vector<cplx> v;

    long first() const { return offset; }
    long last() const { return offset + static_cast<long>(v.size()) - 1; }
    bool empty() const { return v.empty(); }

    cplx operator[](long n) const {
        const long i = n - offset;
        if (i < 0 || i >= static_cast<long>(v.size())) return 0.0;
        return v[static_cast<std::size_t>(i)];
    }

    double norm_squared() const {
        double s = 0.0;
        for (const auto& x : v) s += std::norm(x);
        return s;
    }
    double norm() const { return std::sqrt(norm_squared()); }

    static LineVector unit(long n) { return LineVector{n, {cplx(1.0)}}; }
};

/// sum_n conj(a[n]) b[n]
inline cplx dot(const LineVector& a, const LineVector& b) {
    const long lo = std::max(a.first(), b.first());
    const long hi = std::min(a.last(), b.last());
    cplx s = 0.0;
    for (long n = lo; n <= hi; ++n)
        s += std::conj(a.v[static_cast<std::size_t>(n - a.offset)]) * b.v[static_cast<std::size_t>(n - b.offset)];
    return s;
}

inline LineVector add(const LineVector& a, const LineVector& b, cplx wb = 1.0) {
    if (a.empty()) {
        LineVector out = b;
        for (auto& x : out.v) x *= wb;
        return out;
    }
    if (b.empty()) return a;
    LineVector out;
    out.offset = std::min(a.first(), b.first());
    const long hi = std::max(a.last(), b.last());
    out.v.assign(static_cast<std::size_t>(hi - out.offset + 1), 0.0);
    for (long n = a.first(); n <= a.last(); ++n) out.v[static_cast<std::size_t>(n - out.offset)] += a[n];
    for (long n = b.first(); n <= b.last(); ++n) out.v[static_cast<std::size_t>(n - out.offset)] += wb * b[n];
    return out;
}

enum class Channel { h = 0, g = 1 };

inline const Filter& scaling_filter(const FilterPair& p, Channel c) { return c == Channel::g ? p.g_s : p.h_s; }
inline const Filter& wavelet_filter(const FilterPair& p, Channel c) { return c == Channel::g ? p.g_w : p.h_w; }

/// Spinor component 1 is discretized with the h functions, component 2 with g.
inline Channel channel_of_component(int c) { return c == 0 ? Channel::h : Channel::g; }

struct DwtSplit {
    LineVector wavelet;
    LineVector scaling;
};

/// w[k] = sum_n g_w[n] c[2k+n], s[k] = sum_n g_s[n] c[2k+n] (real taps).
inline DwtSplit dwt_layer(const LineVector& c, const Filter& s, const Filter& w) {
    DwtSplit out;
    if (c.empty()) return out;
    auto one = [&](const Filter& f) {
        LineVector r;
        const long klo = ceil_div(c.first() - f.last(), 2);
        const long khi = floor_div(c.last() - f.first(), 2);
        r.offset = klo;
        r.v.assign(static_cast<std::size_t>(std::max(0L, khi - klo + 1)), 0.0);
        for (long k = klo; k <= khi; ++k) {
            cplx acc = 0.0;
            const long nlo = std::max<long>(f.first(), c.first() - 2 * k);
            const long nhi = std::min<long>(f.last(), c.last() - 2 * k);
            for (long n = nlo; n <= nhi; ++n) acc += f[n] * c.v[static_cast<std::size_t>(2 * k + n - c.offset)];
            r.v[static_cast<std::size_t>(k - klo)] = acc;
        }
        return r;
    };
    out.wavelet = one(w);
    out.scaling = one(s);
    return out;
}

/// c[m] = sum_k g_s[m-2k] s[k] + g_w[m-2k] w[k]
inline LineVector dwt_layer_adjoint(const DwtSplit& in, const Filter& s, const Filter& w) {
    auto one = [](const LineVector& x, const Filter& f) {
        LineVector r;
        if (x.empty()) return r;
        r.offset = 2 * x.first() + f.first();
        const long hi = 2 * x.last() + f.last();
        r.v.assign(static_cast<std::size_t>(hi - r.offset + 1), 0.0);
        for (long k = x.first(); k <= x.last(); ++k)
            for (long n = f.first(); n <= f.last(); ++n)
                r.v[static_cast<std::size_t>(2 * k + n - r.offset)] += f[n] * x[k];
        return r;
    };
    return add(one(in.scaling, s), one(in.wavelet, w));
}

/// Wavelet strata from fine to coarse plus the final scaling stratum.
struct Strata {
    std::vector<LineVector> wavelets;
    LineVector scaling;

    double norm_squared() const {
        double s = scaling.norm_squared();
        for (const auto& w : wavelets) s += w.norm_squared();
        return s;
    }
};

inline Strata dwt_multi(const LineVector& c, const Filter& s, const Filter& w, int layers) {
    if (layers < 0) throw InvalidInput("dwt_multi: layers must be >= 0");
    Strata out;
    out.scaling = c;
    for (int l = 0; l < layers; ++l) {
        DwtSplit sp = dwt_layer(out.scaling, s, w);
        out.wavelets.push_back(std::move(sp.wavelet));
        out.scaling = std::move(sp.scaling);
    }
    return out;
}

inline LineVector dwt_multi_adjoint(const Strata& st, const Filter& s, const Filter& w) {
    LineVector cur = st.scaling;
    for (std::size_t l = st.wavelets.size(); l-- > 0;) cur = dwt_layer_adjoint({st.wavelets[l], cur}, s, w);
    return cur;
}

// ---------------------------------------------------------------------------
// Periodic transforms

inline bool is_power_of_two(long n) { return n > 0 && (n & (n - 1)) == 0; }

inline int log2_exact(long n) {
    if (!is_power_of_two(n)) throw InvalidInput("length " + std::to_string(n) + " is not a power of two");
    int k = 0;
    while ((1L << k) < n) ++k;
    return k;
}

struct PeriodicStrata {
    std::vector<std::vector<cplx>> wavelets;  // fine to coarse
    std::vector<cplx> scaling;
};

/// One periodic layer on C^{2^J} with filters periodized at scale J.
inline std::array<std::vector<cplx>, 2> dwt_periodic_layer(const std::vector<cplx>& c, const Filter& s, const Filter& w) {
    const long N = static_cast<long>(c.size());
    const int J = log2_exact(N);
    if (N < 2) throw InvalidInput("periodic layer needs at least two sites");
    const PeriodicFilter ps = periodize_filter(s, J), pw = periodize_filter(w, J);
    std::array<std::vector<cplx>, 2> out{std::vector<cplx>(static_cast<std::size_t>(N / 2)),
                                         std::vector<cplx>(static_cast<std::size_t>(N / 2))};
    std::vector<long> taps;
    for (long n = 0; n < N; ++n)
        if (pw.coeffs[static_cast<std::size_t>(n)] != 0.0 || ps.coeffs[static_cast<std::size_t>(n)] != 0.0) taps.push_back(n);
    for (long k = 0; k < N / 2; ++k) {
        cplx a = 0.0, b = 0.0;
        for (long n : taps) {
            const cplx x = c[static_cast<std::size_t>(positive_mod(2 * k + n, N))];
            a += pw.coeffs[static_cast<std::size_t>(n)] * x;
            b += ps.coeffs[static_cast<std::size_t>(n)] * x;
        }
        out[0][static_cast<std::size_t>(k)] = a;
        out[1][static_cast<std::size_t>(k)] = b;
    }
    return out;
}

inline std::vector<cplx> dwt_periodic_layer_adjoint(const std::vector<cplx>& wav, const std::vector<cplx>& sca,
                                                    const Filter& s, const Filter& w) {
    const long N = 2 * static_cast<long>(sca.size());
    const int J = log2_exact(N);
    const PeriodicFilter ps = periodize_filter(s, J), pw = periodize_filter(w, J);
    std::vector<cplx> c(static_cast<std::size_t>(N), 0.0);
    for (long k = 0; k < N / 2; ++k)
        for (long n = 0; n < N; ++n) {
            auto& dst = c[static_cast<std::size_t>(positive_mod(2 * k + n, N))];
            dst += pw.coeffs[static_cast<std::size_t>(n)] * wav[static_cast<std::size_t>(k)] +
                   ps.coeffs[static_cast<std::size_t>(n)] * sca[static_cast<std::size_t>(k)];
        }
    return c;
}

inline PeriodicStrata dwt_periodic(const std::vector<cplx>& c, const Filter& s, const Filter& w, int layers) {
    const int J = log2_exact(static_cast<long>(c.size()));
    if (layers < 0 || layers > J) throw InvalidInput("dwt_periodic: layers must lie in [0, log2 N]");
    PeriodicStrata out;
    out.scaling = c;
    for (int l = 0; l < layers; ++l) {
        auto sp = dwt_periodic_layer(out.scaling, s, w);
        out.wavelets.push_back(std::move(sp[0]));
        out.scaling = std::move(sp[1]);
    }
    return out;
}

inline std::vector<cplx> dwt_periodic_adjoint(const PeriodicStrata& st, const Filter& s, const Filter& w) {
    std::vector<cplx> cur = st.scaling;
    for (std::size_t l = st.wavelets.size(); l-- > 0;) cur = dwt_periodic_layer_adjoint(st.wavelets[l], cur, s, w);
    return cur;
}

/// Dense matrix of the periodic L-layer transform on C^N; rows ordered as the strata fine to coarse, then scaling.
inline Eigen::MatrixXd dwt_periodic_matrix(long N, const Filter& s, const Filter& w, int layers) {
    Eigen::MatrixXd Wm(N, N);
    std::vector<cplx> e(static_cast<std::size_t>(N), 0.0);
    for (long col = 0; col < N; ++col) {
        std::fill(e.begin(), e.end(), cplx(0.0));
        e[static_cast<std::size_t>(col)] = 1.0;
        const auto st = dwt_periodic(e, s, w, layers);
        long row = 0;
        for (const auto& wv : st.wavelets)
            for (const auto& x : wv) Wm(row++, col) = x.real();
        for (const auto& x : st.scaling) Wm(row++, col) = x.real();
    }
    return Wm;
}

// ---------------------------------------------------------------------------
// Discretization

enum class DiscretizeMode { quadrature, sampling };

/// Two spinor components of alpha_j f; component 1 uses the h basis, component 2 the g basis.
struct CoefficientField {
    int j = 0;
    std::array<LineVector, 2> comp;

    double norm() const { return std::sqrt(comp[0].norm_squared() + comp[1].norm_squared()); }
    long first() const {
        long lo = std::numeric_limits<long>::max();
        for (const auto& c : comp)
            if (!c.empty()) lo = std::min(lo, c.first());
        return lo;
    }
    long last() const {
        long hi = std::numeric_limits<long>::min();
        for (const auto& c : comp)
            if (!c.empty()) hi = std::max(hi, c.last());
        return hi;
    }
};

inline cplx dot(const CoefficientField& a, const CoefficientField& b) { return dot(a.comp[0], b.comp[0]) + dot(a.comp[1], b.comp[1]); }

struct DiscretizeOptions {
    DiscretizeMode mode = DiscretizeMode::quadrature;
    Geometry geometry = Geometry::line;
};

namespace detail {

/// <phi_{j,k}, f> = 2^{-j/2} int phi(t) f(2^{-j}(t + k)) dt on the cascade grid.
template <typename Fn>
cplx basis_inner(const DyadicFunction& phi, int j, long k, const Fn& f) {
    const double scale = std::ldexp(1.0, -j);
    const long n = static_cast<long>(phi.values.size());
    cplx acc = 0.0;
    for (long i = 0; i < n; ++i) {
        const double wt = (i == 0 || i + 1 == n) ? 0.5 : 1.0;
        const double v = phi.values[static_cast<std::size_t>(i)];
        if (v == 0.0) continue;
        acc += wt * v * f(scale * (phi.x(i) + static_cast<double>(k)));
    }
    return acc * phi.step() * std::sqrt(scale);
}

}  // namespace detail

inline CoefficientField discretize(const SpinorSmearing& f, const ScalingFunctions& fn, int j, const DiscretizeOptions& opt = {}) {
    CoefficientField out;
    out.j = j;
    const double two_j = std::ldexp(1.0, j);
    const long period = 1L << std::max(j, 0);
    for (int c = 0; c < 2; ++c) {
        const ScalarSmearing& s = f.comp[static_cast<std::size_t>(c)];
        if (s.is_zero()) continue;
        const DyadicFunction& phi = c == 0 ? fn.phi_h : fn.phi_g;
        LineVector lv;
        long klo, khi;
        if (opt.geometry == Geometry::line) {
            const auto sup = s.support();
            if (opt.mode == DiscretizeMode::sampling) {
                klo = static_cast<long>(std::ceil(sup[0] * two_j));
                khi = static_cast<long>(std::floor(sup[1] * two_j));
            } else {
                klo = static_cast<long>(std::ceil(sup[0] * two_j - phi.b));
                khi = static_cast<long>(std::floor(sup[1] * two_j - phi.a));
            }
        } else {
            klo = 0;
            khi = period - 1;
        }
        lv.offset = klo;
        lv.v.assign(static_cast<std::size_t>(std::max(0L, khi - klo + 1)), 0.0);
        const int sign = opt.geometry == Geometry::antiperiodic ? -1 : 1;
        for (long k = klo; k <= khi; ++k) {
            cplx val;
            if (opt.geometry == Geometry::line) {
                if (opt.mode == DiscretizeMode::sampling)
                    val = std::sqrt(1.0 / two_j) * s(static_cast<double>(k) / two_j);
                else
                    val = detail::basis_inner(phi, j, k, [&](double x) { return s(x); });
            } else {
                if (opt.mode == DiscretizeMode::sampling)
                    val = std::sqrt(1.0 / two_j) * circle_value(s, static_cast<double>(k) / two_j, sign);
                else
                    val = detail::basis_inner(phi, j, k, [&](double x) { return circle_value(s, x, sign); });
            }
            lv.v[static_cast<std::size_t>(k - klo)] = val;
        }
        out.comp[static_cast<std::size_t>(c)] = std::move(lv);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Symbols

struct SymbolLabel {
    long site;
    int spinor;  // 0 or 1
};

/// Hermitian matrix on sites n0..n0+N-1 times two spinor components, index = spinor * N + (site - n0).
struct SymbolMatrix {
    Eigen::MatrixXcd Q;
    long n0 = 0;
    long N = 0;
    int j = 0;
    int layers = 0;
    Geometry geometry = Geometry::line;
    bool cyclic = false;

    long index(long site, int spinor) const {
        long s = site - n0;
        if (cyclic) s = positive_mod(s, N);
        if (s < 0 || s >= N) throw InvalidInput("site " + std::to_string(site) + " outside the symbol window");
        return spinor * N + s;
    }

    SymbolLabel label(long idx) const { return {n0 + idx % N, static_cast<int>(idx / N)}; }

    long dim() const { return 2 * N; }

    /// Embed a coefficient field as a vector in this basis.
    Eigen::VectorXcd embed(const CoefficientField& f) const {
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(dim());
        for (int c = 0; c < 2; ++c) {
            const auto& lv = f.comp[static_cast<std::size_t>(c)];
            for (long k = lv.first(); k <= lv.last(); ++k) {
                const cplx x = lv[k];
                if (x == cplx(0.0)) continue;
                v(index(k, c)) += x;
            }
        }
        return v;
    }
};

struct SymbolDefects {
    double hermiticity = 0.0;
    double idempotence = 0.0;
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
};

inline SymbolDefects symbol_defects(const Eigen::MatrixXcd& Q) {
    SymbolDefects d;
    d.hermiticity = (Q - Q.adjoint()).cwiseAbs().maxCoeff();
    d.idempotence = (Q * Q - Q).cwiseAbs().maxCoeff();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (Q + Q.adjoint()), Eigen::EigenvaluesOnly);
    d.min_eigenvalue = es.eigenvalues().minCoeff();
    d.max_eigenvalue = es.eigenvalues().maxCoeff();
    return d;
}

/// Sites the window must cover around a hull for the transform to act as on the line.
inline long required_window(long hull_width, int M, int layers) { return hull_width + 2L * (M - 1) * (1L << layers); }

namespace detail {

/// One cyclic layer on N sites (N even) using the line filters wrapped modulo N.
inline Eigen::MatrixXd cyclic_layer_matrix(long N, const Filter& f) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N / 2, N);
    for (long k = 0; k < N / 2; ++k)
        for (long n = f.first(); n <= f.last(); ++n) A(k, positive_mod(2 * k + n, N)) += f[n];
    return A;
}

/// P_w W^(L) on a cyclic window of N sites (rows: wavelet coefficients fine to coarse).
inline Eigen::MatrixXd cyclic_wavelet_rows(long N, const Filter& s, const Filter& w, int layers, Eigen::MatrixXd* scaling_rows = nullptr) {
    long rows = 0;
    for (int l = 0; l < layers; ++l) rows += N >> (l + 1);
    Eigen::MatrixXd out(rows, N);
    Eigen::MatrixXd S = Eigen::MatrixXd::Identity(N, N);
    long r0 = 0;
    for (int l = 0; l < layers; ++l) {
        const long n = N >> l;
        const Eigen::MatrixXd Wl = cyclic_layer_matrix(n, w);
        const Eigen::MatrixXd Sl = cyclic_layer_matrix(n, s);
        out.middleRows(r0, n / 2) = Wl * S;
        S = (Sl * S).eval();
        r0 += n / 2;
    }
    if (scaling_rows) *scaling_rows = S;
    return out;
}

}  // namespace detail

/// Dense approximate symbol on a cyclic window of `window` sites starting at n0.
/// n0 must be a multiple of 2^layers; the hull [hull_lo, hull_hi] must fit with a margin of (M-1) 2^layers on each side.
inline SymbolMatrix build_symbol_mera(const FilterPair& pair, int j, int layers, long n0, long window, long hull_lo, long hull_hi) {
    SymbolMatrix sm;
    sm.j = j;
    sm.layers = layers;
    sm.n0 = n0;
    sm.N = window;
    sm.cyclic = true;
    sm.geometry = Geometry::line;
    if (layers < 0) throw InvalidInput("build_symbol_mera: layers must be >= 0");
    const long block = 1L << layers;
    const long margin = static_cast<long>(pair.M() - 1) * block;
    const long need = required_window(hull_hi - hull_lo + 1, pair.M(), layers);
    const long need_rounded = ceil_div(need, block) * block;
    if (window % block != 0 || positive_mod(n0, block) != 0 || hull_lo - margin < n0 || hull_hi + margin > n0 + window - 1 ||
        window < need)
        throw WindowTooSmall("build_symbol_mera: window does not cover the hull with margin", need_rounded);
    sm.Q = Eigen::MatrixXcd::Zero(2 * window, 2 * window);
    if (layers == 0) return sm;
    const Eigen::MatrixXd Vh = detail::cyclic_wavelet_rows(window, pair.h_s, pair.h_w, layers);
    const Eigen::MatrixXd Vg = detail::cyclic_wavelet_rows(window, pair.g_s, pair.g_w, layers);
    Eigen::MatrixXd V(Vh.rows(), 2 * window);
    V << Vh, Vg;
    V /= sqrt2;
    sm.Q = (V.transpose() * V).cast<cplx>();
    return sm;
}

/// Convenience overload: choose the smallest aligned window covering the hull.
inline SymbolMatrix build_symbol_mera(const FilterPair& pair, int j, int layers, long hull_lo, long hull_hi) {
    const long block = 1L << layers;
    const long margin = static_cast<long>(pair.M() - 1) * block;
    const long n0 = floor_div(hull_lo - margin, block) * block;
    const long end = ceil_div(hull_hi + margin + 1, block) * block;
    return build_symbol_mera(pair, j, layers, n0, end - n0, hull_lo, hull_hi);
}

/// Channel-space vector of the scaling coefficient in the periodic symbol, (|1> + i|2>)/sqrt2 by default.
struct PeriodicSymbolOptions {
    int scaling_phase_sign = +1;
};

/// Approximate periodic symbol on C^{2^L} (x) C^2; the circle is discretized at scale j = L.
inline SymbolMatrix build_symbol_periodic(const FilterPair& pair, int L, const PeriodicSymbolOptions& opt = {}) {
    if (L < 1) throw InvalidInput("build_symbol_periodic: layers must be >= 1");
    const long N = 1L << L;
    SymbolMatrix sm;
    sm.j = L;
    sm.layers = L;
    sm.n0 = 0;
    sm.N = N;
    sm.cyclic = true;
    sm.geometry = Geometry::periodic;
    const Eigen::MatrixXd Wh = dwt_periodic_matrix(N, pair.h_s, pair.h_w, L);
    const Eigen::MatrixXd Wg = dwt_periodic_matrix(N, pair.g_s, pair.g_w, L);
    Eigen::MatrixXcd V(N, 2 * N);
    V.leftCols(N) = Wh.cast<cplx>() / sqrt2;
    V.rightCols(N) = Wg.cast<cplx>() / sqrt2;
    // Last row is the scaling coefficient; pair it with <L| instead of <+|.
    const cplx phase = cplx(0.0, -static_cast<double>(opt.scaling_phase_sign));
    V.row(N - 1).leftCols(N) = Wh.row(N - 1).cast<cplx>() / sqrt2;
    V.row(N - 1).rightCols(N) = phase * Wg.row(N - 1).cast<cplx>() / sqrt2;
    sm.Q = V.adjoint() * V;
    return sm;
}

/// (1/sqrt2) sum_c P_w W_c f_c on the line: the factor V with Q = V^dagger V.
inline std::vector<LineVector> symbol_factor_line(const FilterPair& pair, const CoefficientField& f, int layers) {
    std::vector<LineVector> out(static_cast<std::size_t>(layers));
    for (int c = 0; c < 2; ++c) {
        const auto& lv = f.comp[static_cast<std::size_t>(c)];
        if (lv.empty()) continue;
        const Channel ch = channel_of_component(c);
        const Strata st = dwt_multi(lv, scaling_filter(pair, ch), wavelet_filter(pair, ch), layers);
        for (int l = 0; l < layers; ++l)
            out[static_cast<std::size_t>(l)] = add(out[static_cast<std::size_t>(l)], st.wavelets[static_cast<std::size_t>(l)], 1.0);
    }
    for (auto& lv : out)
        for (auto& x : lv.v) x /= sqrt2;
    return out;
}

/// <g, Q f> on the line from the sparse factors.
inline cplx symbol_inner_line(const FilterPair& pair, const CoefficientField& g, const CoefficientField& f, int layers) {
    const auto vg = symbol_factor_line(pair, g, layers);
    const auto vf = symbol_factor_line(pair, f, layers);
    cplx s = 0.0;
    for (int l = 0; l < layers; ++l) s += dot(vg[static_cast<std::size_t>(l)], vf[static_cast<std::size_t>(l)]);
    return s;
}

/// Exact line-MERA symbol entries between basis vectors on sites lo..hi (a compression, not a projection).
inline SymbolMatrix symbol_block_line(const FilterPair& pair, int j, int layers, long lo, long hi) {
    SymbolMatrix sm;
    sm.j = j;
    sm.layers = layers;
    sm.n0 = lo;
    sm.N = hi - lo + 1;
    sm.cyclic = false;
    const long N = sm.N;
    std::vector<std::vector<LineVector>> fac(static_cast<std::size_t>(2 * N));
    for (int c = 0; c < 2; ++c)
        for (long k = lo; k <= hi; ++k) {
            CoefficientField e;
            e.j = j;
            e.comp[static_cast<std::size_t>(c)] = LineVector::unit(k);
            fac[static_cast<std::size_t>(c * N + (k - lo))] = symbol_factor_line(pair, e, layers);
        }
    sm.Q = Eigen::MatrixXcd::Zero(2 * N, 2 * N);
    for (long a = 0; a < 2 * N; ++a)
        for (long b = a; b < 2 * N; ++b) {
            cplx s = 0.0;
            for (int l = 0; l < layers; ++l)
                s += dot(fac[static_cast<std::size_t>(a)][static_cast<std::size_t>(l)], fac[static_cast<std::size_t>(b)][static_cast<std::size_t>(l)]);
            sm.Q(a, b) = s;
            sm.Q(b, a) = std::conj(s);
        }
    return sm;
}

// ---------------------------------------------------------------------------
// Exact continuum two-point function

struct ExactOptions {
    double tail = 1e-12;
    int circle_samples = 1 << 14;
};

namespace detail {

/// (Q-hat(omega) f)_c for Q = 1/2 [[1, H], [-H, 1]], H-hat = -i sgn(omega), sgn(0) = 1.
inline std::array<cplx, 2> apply_symbol(double sgn, const std::array<cplx, 2>& f) {
    const cplx H = cplx(0.0, -sgn);
    return {0.5 * (f[0] + H * f[1]), 0.5 * (-H * f[0] + f[1])};
}

}  // namespace detail

/// <g, Q f> for the continuum vacuum symbol.
inline cplx exact_two_point(const SpinorSmearing& f, const SpinorSmearing& g, Geometry geometry, const ExactOptions& opt = {}) {
    if (geometry == Geometry::antiperiodic)
        return exact_two_point(antiperiodic_twist(f), antiperiodic_twist(g), Geometry::periodic, opt);
    if (geometry == Geometry::periodic) {
        const int Nq = opt.circle_samples;
        Eigen::FFT<double> fft;
        std::array<std::vector<cplx>, 2> fs, gs;
        std::array<std::vector<cplx>, 2> fh, gh;
        for (int c = 0; c < 2; ++c) {
            fs[c].resize(static_cast<std::size_t>(Nq));
            gs[c].resize(static_cast<std::size_t>(Nq));
            for (int m = 0; m < Nq; ++m) {
                const double x = static_cast<double>(m) / Nq;
                fs[c][static_cast<std::size_t>(m)] = f.comp[c].is_zero() ? cplx(0.0) : circle_value(f.comp[c], x, 1);
                gs[c][static_cast<std::size_t>(m)] = g.comp[c].is_zero() ? cplx(0.0) : circle_value(g.comp[c], x, 1);
            }
            fft.fwd(fh[c], fs[c]);
            fft.fwd(gh[c], gs[c]);
        }
        cplx acc = 0.0;
        double tail = 0.0, peak = 0.0;
        for (int m = 0; m < Nq; ++m) {
            const int n = m < Nq / 2 ? m : m - Nq;
            const double sgn = n >= 0 ? 1.0 : -1.0;
            std::array<cplx, 2> fv{fh[0][static_cast<std::size_t>(m)] / double(Nq), fh[1][static_cast<std::size_t>(m)] / double(Nq)};
            std::array<cplx, 2> gv{gh[0][static_cast<std::size_t>(m)] / double(Nq), gh[1][static_cast<std::size_t>(m)] / double(Nq)};
            const auto qf = detail::apply_symbol(sgn, fv);
            acc += std::conj(gv[0]) * qf[0] + std::conj(gv[1]) * qf[1];
            const double mag = std::abs(fv[0]) + std::abs(fv[1]) + std::abs(gv[0]) + std::abs(gv[1]);
            peak = std::max(peak, mag);
            if (std::abs(n) >= Nq / 2 - 2) tail = std::max(tail, mag);
        }
        if (tail > std::sqrt(opt.tail) * std::max(peak, 1e-300))
            throw ResolutionError("exact_two_point: Fourier series not resolved by the circle grid");
        return acc;
    }

    // Line: frequency cutoff from the slowest Gaussian decay.
    double sig_min = 1e300, kap_max = 0.0;
    bool sampled = false;
    for (const auto* s : {&f, &g})
        for (const auto& c : s->comp) {
            if (c.is_zero()) continue;
            if (c.kind == ScalarSmearing::Kind::gaussian) {
                sig_min = std::min(sig_min, c.sigma);
                kap_max = std::max(kap_max, std::abs(c.kappa));
            } else {
                sampled = true;
                sig_min = std::min(sig_min, 2.0 * c.dx);
            }
        }
    if (sig_min > 1e299) return 0.0;
    const double Omega = kap_max + std::sqrt(-2.0 * std::log(opt.tail)) / sig_min;
    if (sampled) {
        double peak = 0.0, edge = 0.0;
        for (const auto* s : {&f, &g})
            for (const auto& c : s->comp) {
                if (c.is_zero()) continue;
                peak = std::max(peak, std::abs(c.fourier(c.kappa)));
                edge = std::max({edge, std::abs(c.fourier(Omega)), std::abs(c.fourier(-Omega))});
            }
        if (edge > 1e-6 * peak) throw ResolutionError("exact_two_point: sampled smearing not band-limited at cutoff");
    }
    auto integrand = [&](double w) -> cplx {
        const std::array<cplx, 2> fv{f.comp[0].fourier(w), f.comp[1].fourier(w)};
        const std::array<cplx, 2> gv{g.comp[0].fourier(w), g.comp[1].fourier(w)};
        const auto qf = detail::apply_symbol(w >= 0.0 ? 1.0 : -1.0, fv);
        return std::conj(gv[0]) * qf[0] + std::conj(gv[1]) * qf[1];
    };
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    auto part = [&](double a, double b) {
        const double re = GK::integrate([&](double w) { return integrand(w).real(); }, a, b, 20, 1e-13);
        const double im = GK::integrate([&](double w) { return integrand(w).imag(); }, a, b, 20, 1e-13);
        return cplx(re, im);
    };
    return (part(-Omega, 0.0) + part(0.0, Omega)) / (2.0 * pi);
}

/// Sampled smearing from CSV columns x, re1, im1, re2, im2 on a uniform grid.
inline SpinorSmearing load_smearing_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot read " + path);
    std::vector<double> xs;
    std::array<std::vector<cplx>, 2> vals;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || std::isalpha(static_cast<unsigned char>(line[0]))) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream is(line);
        is.imbue(std::locale::classic());
        double x, a, b, c, d;
        if (!(is >> x >> a >> b >> c >> d)) throw InvalidInput("malformed smearing row: " + line);
        xs.push_back(x);
        vals[0].emplace_back(a, b);
        vals[1].emplace_back(c, d);
    }
    if (xs.size() < 2) throw InvalidInput("smearing file needs at least two rows");
    const double dx = (xs.back() - xs.front()) / static_cast<double>(xs.size() - 1);
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (std::abs(xs[i] - xs[i - 1] - dx) > 1e-9 * std::max(1.0, std::abs(dx)))
            throw InvalidInput("smearing grid must be uniform");
    SpinorSmearing s;
    for (int c = 0; c < 2; ++c) s.comp[static_cast<std::size_t>(c)] = ScalarSmearing::sampled(xs.front(), dx, vals[static_cast<std::size_t>(c)]);
    return s;
}

}  // namespace hmera

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
#include <bit>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cascade.hpp"
#include "common.hpp"
#include "transform.hpp"

namespace hmera {

// ---------------------------------------------------------------------------
// Pfaffian

/// Pfaffian of a complex skew-symmetric matrix by Parlett-Reid tridiagonalization with pivoting.
inline cplx pfaffian(Eigen::MatrixXcd A, double skew_tol = 1e-12) {
    const long n = A.rows();
    if (A.cols() != n) throw InvalidInput("pfaffian: matrix must be square");
    if (n == 0) return 1.0;
    const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
    if ((A + A.transpose()).cwiseAbs().maxCoeff() > skew_tol * scale)
        throw InvalidInput("pfaffian: matrix is not skew-symmetric");
    if (n % 2 == 1) return 0.0;
    cplx pf = 1.0;
    for (long k = 0; k + 1 < n; k += 2) {
        long kp = k + 1;
        double best = std::abs(A(k + 1, k));
        for (long i = k + 2; i < n; ++i)
            if (std::abs(A(i, k)) > best) {
                best = std::abs(A(i, k));
                kp = i;
            }
        if (kp != k + 1) {
            A.row(k + 1).swap(A.row(kp));
            A.col(k + 1).swap(A.col(kp));
            pf = -pf;
        }
        if (A(k + 1, k) == cplx(0.0)) return 0.0;
        pf *= A(k, k + 1);
        if (k + 2 < n) {
            const long m = n - k - 2;
            const Eigen::VectorXcd tau = A.row(k).segment(k + 2, m).transpose() / A(k, k + 1);
            const Eigen::VectorXcd col = A.col(k + 1).segment(k + 2, m);
            A.block(k + 2, k + 2, m, m) += tau * col.transpose() - col * tau.transpose();
        }
    }
    return pf;
}

// ---------------------------------------------------------------------------
// Insertions

/// Either a linear field a(x) + a^dagger(y) or a normal-ordered quadratic dGamma_Q(A).
struct Insertion {
    enum class Kind { field, quadratic };
    Kind kind = Kind::field;
    Eigen::VectorXcd x;  // annihilation part (antilinear)
    Eigen::VectorXcd y;  // creation part
    Eigen::MatrixXcd A;

    static Insertion annihilate(const Eigen::VectorXcd& f) {
        Insertion in;
        in.x = f;
        in.y = Eigen::VectorXcd::Zero(f.size());
        return in;
    }
    static Insertion create(const Eigen::VectorXcd& f) {
        Insertion in;
        in.x = Eigen::VectorXcd::Zero(f.size());
        in.y = f;
        return in;
    }
    /// (a(f) + a^dagger(C f)) / sqrt2 with C f = diag(1, -1) conj(f) on the two spinor blocks.
    static Insertion majorana(const Eigen::VectorXcd& f) {
        const long n = f.size() / 2;
        Eigen::VectorXcd cf = f.conjugate();
        cf.tail(f.size() - n) *= -1.0;
        Insertion in;
        in.x = f / sqrt2;
        in.y = cf / sqrt2;
        return in;
    }
    static Insertion quadratic(const Eigen::MatrixXcd& kernel) {
        Insertion in;
        in.kind = Kind::quadratic;
        in.A = kernel;
        return in;
    }

    long dim() const { return kind == Kind::field ? x.size() : A.rows(); }

    /// Adjoint operator: (a(x) + a^dagger(y))^dagger = a(y) + a^dagger(x); dGamma(A)^dagger = dGamma(A^dagger).
    Insertion adjoint() const {
        Insertion out = *this;
        if (kind == Kind::field)
            std::swap(out.x, out.y);
        else
            out.A = A.adjoint();
        return out;
    }
};

namespace detail {

inline void check_dims(const Eigen::MatrixXcd& Q, const std::vector<Insertion>& ins) {
    if (Q.rows() != Q.cols()) throw InvalidInput("symbol must be square");
    for (const auto& in : ins) {
        if (in.dim() != Q.rows()) throw InvalidInput("insertion dimension does not match the symbol");
        if (in.kind == Insertion::Kind::field && in.x.size() != in.y.size()) throw InvalidInput("field parts differ in size");
        if (in.kind == Insertion::Kind::quadratic && in.A.cols() != in.A.rows()) throw InvalidInput("kernel must be square");
    }
}

/// <O_i O_j> for i before j.
inline cplx field_contraction(const Eigen::MatrixXcd& Q, const Insertion& a, const Insertion& b) {
    const Eigen::VectorXcd Qyb = Q * b.y;
    return a.x.dot(b.y - Qyb) + b.x.dot(Q * a.y);
}

}  // namespace detail

/// Quasi-free expectation of a product of linear field insertions (leftmost acts last).
inline cplx wick_linear(const Eigen::MatrixXcd& Q, const std::vector<Insertion>& ins) {
    detail::check_dims(Q, ins);
    for (const auto& in : ins)
        if (in.kind != Insertion::Kind::field) throw InvalidInput("wick_linear takes field insertions only");
    const long n = static_cast<long>(ins.size());
    if (n % 2 == 1) return 0.0;
    Eigen::MatrixXcd G = Eigen::MatrixXcd::Zero(n, n);
    for (long i = 0; i < n; ++i)
        for (long k = i + 1; k < n; ++k) {
            G(i, k) = detail::field_contraction(Q, ins[static_cast<std::size_t>(i)], ins[static_cast<std::size_t>(k)]);
            G(k, i) = -G(i, k);
        }
    return pfaffian(G);
}

/// <a^dagger(f_1) ... a^dagger(f_n) a(g_1) ... a(g_n)> = (-1)^{n(n-1)/2} det[<g_i, Q f_k>].
inline cplx wick_determinant(const Eigen::MatrixXcd& Q, const std::vector<Eigen::VectorXcd>& f, const std::vector<Eigen::VectorXcd>& g) {
    if (f.size() != g.size()) return 0.0;
    const long n = static_cast<long>(f.size());
    Eigen::MatrixXcd D(n, n);
    for (long i = 0; i < n; ++i)
        for (long k = 0; k < n; ++k) D(i, k) = g[static_cast<std::size_t>(i)].dot(Q * f[static_cast<std::size_t>(k)]);
    const cplx det = n == 0 ? cplx(1.0) : D.determinant();
    return ((n * (n - 1) / 2) % 2 == 0) ? det : -det;
}

/// tr[A (1 - Q) B Q] = <dGamma_Q(A) dGamma_Q(B)>
inline cplx quad_pair_moment(const Eigen::MatrixXcd& Q, const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B) {
    if (A.rows() != Q.rows() || B.rows() != Q.rows()) throw InvalidInput("quad_pair_moment: dimension mismatch");
    const Eigen::MatrixXcd BQ = B * Q;
    return (A * BQ).trace() - (A * Q * BQ).trace();
}

/// Expectation of a product of field and at most three normal-ordered quadratic insertions.
inline cplx mixed_correlator(const Eigen::MatrixXcd& Q, const std::vector<Insertion>& ins) {
    detail::check_dims(Q, ins);
    int m = 0;
    for (const auto& in : ins) m += in.kind == Insertion::Kind::quadratic;
    if (m > 3) throw Unsupported("mixed_correlator: at most three quadratic insertions are supported");
    if (m == 0) return wick_linear(Q, ins);
    const long N = Q.rows();
    const Eigen::MatrixXcd P = Eigen::MatrixXcd::Identity(N, N) - Q;

    enum class SlotType { field, dag, ann };
    struct Slot {
        SlotType type;
        int owner;
    };
    std::vector<Slot> slots;
    for (int i = 0; i < static_cast<int>(ins.size()); ++i) {
        if (ins[static_cast<std::size_t>(i)].kind == Insertion::Kind::field)
            slots.push_back({SlotType::field, i});
        else {
            slots.push_back({SlotType::dag, i});
            slots.push_back({SlotType::ann, i});
        }
    }
    const int S = static_cast<int>(slots.size());
    if (S % 2 == 1) return 0.0;

    // Contraction operator between an annihilation-type slot at p and a creation-type slot at q.
    auto op = [&](int p_ann, int q_dag) -> const Eigen::MatrixXcd& { return q_dag < p_ann ? Q : P; };

    std::vector<int> partner(static_cast<std::size_t>(S), -1);
    cplx total = 0.0;

    auto evaluate = [&]() -> cplx {
        int crossings = 0;
        for (int a = 0; a < S; ++a) {
            const int b = partner[static_cast<std::size_t>(a)];
            if (b < a) continue;
            for (int c = a + 1; c < b; ++c) {
                const int d = partner[static_cast<std::size_t>(c)];
                if (d > b) ++crossings;
            }
        }
        cplx value = (crossings % 2 == 0) ? 1.0 : -1.0;
        std::vector<bool> seen(static_cast<std::size_t>(S), false);
        auto quad_other = [&](int s) { return slots[static_cast<std::size_t>(s)].type == SlotType::dag ? s + 1 : s - 1; };

        for (int s = 0; s < S && value != cplx(0.0); ++s) {
            if (seen[static_cast<std::size_t>(s)] || slots[static_cast<std::size_t>(s)].type != SlotType::field) continue;
            const int t = partner[static_cast<std::size_t>(s)];
            if (slots[static_cast<std::size_t>(t)].type == SlotType::field) {
                seen[static_cast<std::size_t>(s)] = seen[static_cast<std::size_t>(t)] = true;
                const auto& a = ins[static_cast<std::size_t>(slots[static_cast<std::size_t>(std::min(s, t))].owner)];
                const auto& b = ins[static_cast<std::size_t>(slots[static_cast<std::size_t>(std::max(s, t))].owner)];
                value *= detail::field_contraction(Q, a, b);
                continue;
            }
            // Walk the chain starting from the end whose partner is a creation slot.
            int start = s;
            if (slots[static_cast<std::size_t>(t)].type == SlotType::ann) {
                int cur = t;
                while (true) {
                    const int nxt = partner[static_cast<std::size_t>(quad_other(cur))];
                    if (slots[static_cast<std::size_t>(nxt)].type == SlotType::field) {
                        start = nxt;
                        break;
                    }
                    cur = nxt;
                }
            }
            int f = start;
            seen[static_cast<std::size_t>(f)] = true;
            int q = partner[static_cast<std::size_t>(f)];
            // Row vector x_F^dagger C restricted to the creation index of the first kernel.
            Eigen::RowVectorXcd row = ins[static_cast<std::size_t>(slots[static_cast<std::size_t>(f)].owner)].x.adjoint() * op(f, q);
            while (true) {
                seen[static_cast<std::size_t>(q)] = true;
                const int qa = quad_other(q);
                seen[static_cast<std::size_t>(qa)] = true;
                row = row * ins[static_cast<std::size_t>(slots[static_cast<std::size_t>(q)].owner)].A;
                const int nxt = partner[static_cast<std::size_t>(qa)];
                seen[static_cast<std::size_t>(nxt)] = true;
                if (slots[static_cast<std::size_t>(nxt)].type == SlotType::field) {
                    value *= (row * op(qa, nxt) * ins[static_cast<std::size_t>(slots[static_cast<std::size_t>(nxt)].owner)].y)(0);
                    break;
                }
                row = row * op(qa, nxt);
                q = nxt;
            }
        }
        for (int s = 0; s < S && value != cplx(0.0); ++s) {
            if (seen[static_cast<std::size_t>(s)] || slots[static_cast<std::size_t>(s)].type != SlotType::dag) continue;
            Eigen::MatrixXcd Pm = Eigen::MatrixXcd::Identity(N, N);
            int q = s;
            while (true) {
                seen[static_cast<std::size_t>(q)] = true;
                const int qa = q + 1;
                seen[static_cast<std::size_t>(qa)] = true;
                const int nxt = partner[static_cast<std::size_t>(qa)];
                Pm = (Pm * ins[static_cast<std::size_t>(slots[static_cast<std::size_t>(q)].owner)].A * op(qa, nxt)).eval();
                if (nxt == s) break;
                q = nxt;
            }
            value *= Pm.trace();
        }
        return value;
    };

    std::function<void(int)> rec = [&](int from) {
        int s = from;
        while (s < S && partner[static_cast<std::size_t>(s)] >= 0) ++s;
        if (s == S) {
            total += evaluate();
            return;
        }
        for (int t = s + 1; t < S; ++t) {
            if (partner[static_cast<std::size_t>(t)] >= 0) continue;
            const auto& A = slots[static_cast<std::size_t>(s)];
            const auto& B = slots[static_cast<std::size_t>(t)];
            if (A.type != SlotType::field && B.type != SlotType::field) {
                if (A.owner == B.owner) continue;
                if (A.type == B.type) continue;
            }
            partner[static_cast<std::size_t>(s)] = t;
            partner[static_cast<std::size_t>(t)] = s;
            rec(s + 1);
            partner[static_cast<std::size_t>(s)] = partner[static_cast<std::size_t>(t)] = -1;
        }
    };
    rec(0);
    return total;
}

// ---------------------------------------------------------------------------
// Fock-space oracle

namespace detail {

/// Coefficients of sum_k c_k a_k + d_k a_k^dagger.
struct LinearOp {
    Eigen::VectorXcd ann, cre;
};

inline void apply_linear(const LinearOp& op, const Eigen::VectorXcd& in, Eigen::VectorXcd& out, int modes) {
    out.setZero(in.size());
    const std::uint32_t dim = 1u << modes;
    for (std::uint32_t s = 0; s < dim; ++s) {
        const cplx amp = in(s);
        if (amp == cplx(0.0)) continue;
        for (int k = 0; k < modes; ++k) {
            const std::uint32_t bit = 1u << k;
            const double sign = (std::popcount(s & (bit - 1)) % 2) ? -1.0 : 1.0;
            if (s & bit) {
                if (op.ann(k) != cplx(0.0)) out(s ^ bit) += sign * op.ann(k) * amp;
            } else {
                if (op.cre(k) != cplx(0.0)) out(s | bit) += sign * op.cre(k) * amp;
            }
        }
    }
}

/// a_Q(x) + a_Q^dagger(y) on modes c_k attached to the eigenvectors u_k of Q.
inline LinearOp represent(const Eigen::MatrixXcd& U, const std::vector<bool>& filled, const Eigen::VectorXcd& x,
                          const Eigen::VectorXcd& y) {
    const Eigen::VectorXcd ux = U.adjoint() * x;
    const Eigen::VectorXcd uy = U.adjoint() * y;
    LinearOp op;
    op.ann.resize(ux.size());
    op.cre.resize(ux.size());
    for (long k = 0; k < ux.size(); ++k) {
        if (filled[static_cast<std::size_t>(k)]) {
            op.ann(k) = uy(k);
            op.cre(k) = std::conj(ux(k));
        } else {
            op.ann(k) = std::conj(ux(k));
            op.cre(k) = uy(k);
        }
    }
    return op;
}

}  // namespace detail

inline constexpr int fock_max_modes = 12;

/// Brute-force vacuum expectation in the Fock representation of a projection Q.
inline cplx fock_oracle(const Eigen::MatrixXcd& Q, const std::vector<Insertion>& ins) {
    detail::check_dims(Q, ins);
    const int N = static_cast<int>(Q.rows());
    if (N > fock_max_modes) throw InvalidInput("fock_oracle: at most 12 modes");
    const long dim = 1L << N;
    Eigen::VectorXcd vac = Eigen::VectorXcd::Zero(dim);
    vac(0) = 1.0;
    Eigen::VectorXcd state = vac, tmp;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (Q + Q.adjoint()));
    const Eigen::MatrixXcd& U = es.eigenvectors();
    std::vector<bool> filled(static_cast<std::size_t>(N));
    for (int k = 0; k < N; ++k) {
        const double lam = es.eigenvalues()(k);
        if (std::min(std::abs(lam), std::abs(lam - 1.0)) > 1e-8) throw InvalidInput("fock_oracle: symbol is not a projection");
        filled[static_cast<std::size_t>(k)] = lam > 0.5;
    }
    for (std::size_t idx = ins.size(); idx-- > 0;) {
        const auto& in = ins[idx];
        if (in.kind == Insertion::Kind::field) {
            detail::apply_linear(detail::represent(U, filled, in.x, in.y), state, tmp, N);
            state.swap(tmp);
            continue;
        }
        // sum_kl A_kl a_Q^dagger(e_k) a_Q(e_l) minus its vacuum value.
        std::vector<Eigen::VectorXcd> phi(static_cast<std::size_t>(N));
        for (int l = 0; l < N; ++l) {
            Eigen::VectorXcd e = Eigen::VectorXcd::Zero(N);
            e(l) = 1.0;
            detail::apply_linear(detail::represent(U, filled, e, Eigen::VectorXcd::Zero(N)), state, phi[static_cast<std::size_t>(l)], N);
        }
        Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(dim);
        for (int k = 0; k < N; ++k) {
            Eigen::VectorXcd mix = Eigen::VectorXcd::Zero(dim);
            for (int l = 0; l < N; ++l)
                if (in.A(k, l) != cplx(0.0)) mix += in.A(k, l) * phi[static_cast<std::size_t>(l)];
            Eigen::VectorXcd e = Eigen::VectorXcd::Zero(N);
            e(k) = 1.0;
            detail::apply_linear(detail::represent(U, filled, Eigen::VectorXcd::Zero(N), e), mix, tmp, N);
            acc += tmp;
        }
        // Vacuum value of the un-ordered bilinear is tr(A Q).
        acc -= (in.A * Q).trace() * state;
        state.swap(acc);
    }
    return vac.dot(state);
}

// ---------------------------------------------------------------------------
// Entropy and Cardy fit

/// Entanglement entropy of the sites lo..hi (both spinor components).
inline double entropy_interval(const SymbolMatrix& sm, long lo, long hi) {
    if (hi < lo) throw InvalidInput("entropy_interval: empty range");
    if (!sm.cyclic && (lo < sm.n0 || hi >= sm.n0 + sm.N)) throw InvalidInput("entropy_interval: range outside window");
    if (hi - lo + 1 > sm.N) throw InvalidInput("entropy_interval: range longer than the window");
    std::vector<long> idx;
    for (int c = 0; c < 2; ++c)
        for (long k = lo; k <= hi; ++k) idx.push_back(sm.index(k, c));
    const long n = static_cast<long>(idx.size());
    Eigen::MatrixXcd sub(n, n);
    for (long a = 0; a < n; ++a)
        for (long b = 0; b < n; ++b) sub(a, b) = sm.Q(idx[static_cast<std::size_t>(a)], idx[static_cast<std::size_t>(b)]);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (sub + sub.adjoint()), Eigen::EigenvaluesOnly);
    double S = 0.0;
    for (long i = 0; i < n; ++i) {
        double lam = es.eigenvalues()(i);
        if (lam < -1e-8 || lam > 1.0 + 1e-8)
            throw InvalidInput("entropy_interval: eigenvalue " + std::to_string(lam) + " outside [0, 1]");
        lam = std::clamp(lam, 0.0, 1.0);
        if (lam > 0.0 && lam < 1.0) S -= lam * std::log(lam) + (1.0 - lam) * std::log(1.0 - lam);
    }
    return S;
}

struct CardyFit {
    double c = 0.0;
    double c_prime = 0.0;
    double residual = 0.0;
};

/// Least squares S = (c/3) ln(length) + c'.
inline CardyFit cardy_fit(const std::vector<std::pair<double, double>>& points) {
    if (points.size() < 4) throw InvalidInput("cardy_fit: need at least four points");
    double lmin = 1e300, lmax = 0.0;
    for (const auto& p : points) {
        if (p.first <= 0.0) throw InvalidInput("cardy_fit: lengths must be positive");
        lmin = std::min(lmin, p.first);
        lmax = std::max(lmax, p.first);
    }
    if (lmax < 4.0 * lmin) throw InvalidInput("cardy_fit: lengths must span at least two octaves");
    const long n = static_cast<long>(points.size());
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd y(n);
    for (long i = 0; i < n; ++i) {
        X(i, 0) = std::log(points[static_cast<std::size_t>(i)].first);
        X(i, 1) = 1.0;
        y(i) = points[static_cast<std::size_t>(i)].second;
    }
    const Eigen::Vector2d beta = X.colPivHouseholderQr().solve(y);
    CardyFit fit;
    fit.c = 3.0 * beta(0);
    fit.c_prime = beta(1);
    fit.residual = std::sqrt((X * beta - y).squaredNorm() / static_cast<double>(n));
    return fit;
}

/// Chord length (N/pi) sin(pi l / N) of an interval of l sites on a ring of N sites.
inline double chord_length(double l, double N) { return N / pi * std::sin(pi * l / N); }

// ---------------------------------------------------------------------------
// Error bound

struct BoundParams {
    int M = 0;
    double D = 1.0;  // max{1, d(f,A) D(f,A)} on the line, max{1, derivative norms} on the circle
    int n = 2;
    int m = 0;
    bool sharp = false;
    bool periodic = false;
};

inline double factorial(int m) {
    double f = 1.0;
    for (int i = 2; i <= m; ++i) f *= i;
    return f;
}

inline double bound_constant(const WaveletConstants& c, int M, bool sharp) {
    if (sharp) return 2.0 * (2.0 * c.C_UV + c.C_chi) + 20.0 * c.C_IR;
    return 20.0 * (std::sqrt(2.0 * M) * c.B + static_cast<double>(M) * M);
}

/// Correlation-function error bound; the layer-independent part is returned by error_bound_floor.
inline double error_bound(const WaveletConstants& c, const BoundParams& p, int layers) {
    if (!(c.epsilon > 0.0 && c.epsilon < 1.0)) throw InvalidInput("error_bound: epsilon must lie in (0, 1)");
    if (layers <= 0) throw InvalidInput("error_bound: layers must be positive");
    const double pref = std::pow(8.0, p.m) * factorial(p.m) * (p.n + p.m);
    const double eps = c.epsilon;
    const double D = std::max(1.0, p.D);
    if (p.periodic) {
        const double M2 = static_cast<double>(p.M) * p.M;
        return pref * (6.0 * eps * std::log2(59.0 * M2 * D / eps) + 26.0 * M2 * D * std::ldexp(1.0, -layers));
    }
    const double C = bound_constant(c, p.M, p.sharp);
    return pref * (10.0 * eps * std::log2(3.0 * C * C * C * D / eps) + C * std::cbrt(D) * std::exp2(-layers / 3.0));
}

inline double error_bound_floor(const WaveletConstants& c, const BoundParams& p) {
    const double pref = std::pow(8.0, p.m) * factorial(p.m) * (p.n + p.m);
    const double eps = c.epsilon;
    const double D = std::max(1.0, p.D);
    if (p.periodic) return pref * 6.0 * eps * std::log2(59.0 * static_cast<double>(p.M) * p.M * D / eps);
    const double C = bound_constant(c, p.M, p.sharp);
    return pref * 10.0 * eps * std::log2(3.0 * C * C * C * D / eps);
}

// ---------------------------------------------------------------------------
// Smeared stress-energy tensor

/// Kernel of D(h) f = (h_x (h_t * f_1)', 0) in the light-cone basis, expressed in the (h, g) scaling basis at scale j
/// on sites lo..hi; the chiral component is u = (1, -i)/sqrt2.
struct StressKernel {
    long lo = 0, hi = 0;
    Eigen::MatrixXcd A;
    double hs_norm = 0.0;
};

inline cplx smearing_derivative(const ScalarSmearing& s, double x) {
    if (s.kind == ScalarSmearing::Kind::gaussian) {
        const double u = x - s.x0;
        return (cplx(-u / (s.sigma * s.sigma), s.kappa)) * s(x);
    }
    const double h = s.kind == ScalarSmearing::Kind::sampled ? s.dx : 1e-6;
    return (s(x + h) - s(x - h)) / (2.0 * h);
}

/// Sites on which the kernel of D(h) can be nonzero.
inline std::array<long, 2> stress_kernel_sites(const ScalarSmearing& h_x, const ScalarSmearing& h_t, int j, int M) {
    const double two_j = std::ldexp(1.0, j);
    const auto sx = h_x.support();
    const auto st = h_t.support();
    const long lo = static_cast<long>(std::floor((sx[0] - st[1]) * two_j)) - (M - 1);
    const long hi = static_cast<long>(std::ceil((sx[1] - st[0]) * two_j));
    return {lo, hi};
}

inline StressKernel stress_energy_kernel(const ScalarSmearing& h_x, const ScalarSmearing& h_t, const ScalingFunctions& fn, int j, long lo,
                                         long hi) {
    const DyadicFunction* phis[2] = {&fn.phi_h, &fn.phi_g};
    const int r = fn.phi_h.r;
    const int M = fn.phi_h.b - fn.phi_h.a + 1;
    const long per = 1L << r;
    const double delta = std::ldexp(1.0, -j - r);
    const double two_j = std::ldexp(1.0, j);
    const long T = static_cast<long>(fn.phi_h.values.size());
    const long N = hi - lo + 1;
    if (N <= 0) throw InvalidInput("stress_energy_kernel: empty window");
    const auto sx = h_x.support();
    const auto st = h_t.support();
    const long kmin = std::max(lo, static_cast<long>(std::ceil(sx[0] * two_j)) - (M - 1));
    const long kmax = std::min(hi, static_cast<long>(std::floor(sx[1] * two_j)));
    const long a0 = fn.phi_h.a;

    std::vector<double> wt(static_cast<std::size_t>(T), delta);
    wt.front() *= 0.5;
    wt.back() *= 0.5;

    StressKernel out;
    out.lo = lo;
    out.hi = hi;
    out.A = Eigen::MatrixXcd::Zero(2 * N, 2 * N);
    const cplx S[2][2] = {{0.5, cplx(0.0, 0.5)}, {cplx(0.0, -0.5), 0.5}};
    if (kmin > kmax) return out;

    // G_0(m delta) = int h_t'(m delta - y) phi_{j,0}(y) dy, then G_l(x) = G_0(x - l 2^{-j}).
    const long gm_lo = (kmin + a0) * per - hi * per;
    const long gm_hi = (kmax + a0) * per + (T - 1) - lo * per;
    const long tcut = static_cast<long>(std::ceil((st[1] - st[0]) / delta)) + 1;
    for (int cb = 0; cb < 2; ++cb) {
        const DyadicFunction& pb = *phis[cb];
        std::vector<cplx> G0(static_cast<std::size_t>(gm_hi - gm_lo + 1), 0.0);
        std::vector<cplx> dht(static_cast<std::size_t>(gm_hi - gm_lo + T + 2 * tcut + 1));
        // h_t' sampled on (m - a0 per - t) delta
        const long base = gm_lo - a0 * per - (T - 1);
        for (std::size_t i = 0; i < dht.size(); ++i) {
            const double x = static_cast<double>(base + static_cast<long>(i)) * delta;
            dht[i] = (x < st[0] - delta || x > st[1] + delta) ? cplx(0.0) : smearing_derivative(h_t, x);
        }
        for (long m = gm_lo; m <= gm_hi; ++m) {
            cplx acc = 0.0;
            for (long t = 0; t < T; ++t) {
                const double v = pb.values[static_cast<std::size_t>(t)];
                if (v == 0.0) continue;
                const long di = m - a0 * per - t - base;
                acc += dht[static_cast<std::size_t>(di)] * v * wt[static_cast<std::size_t>(t)];
            }
            G0[static_cast<std::size_t>(m - gm_lo)] = acc * std::sqrt(two_j);
        }
        for (int ca = 0; ca < 2; ++ca) {
            const DyadicFunction& pa = *phis[ca];
            for (long k = kmin; k <= kmax; ++k) {
                std::vector<cplx> fx(static_cast<std::size_t>(T));
                for (long t = 0; t < T; ++t) {
                    const double x = (static_cast<double>(k + a0) + static_cast<double>(t) / per) / two_j;
                    fx[static_cast<std::size_t>(t)] = std::sqrt(two_j) * pa.values[static_cast<std::size_t>(t)] * std::conj(h_x(x)) *
                                                      wt[static_cast<std::size_t>(t)];
                }
                for (long l = lo; l <= hi; ++l) {
                    cplx acc = 0.0;
                    for (long t = 0; t < T; ++t) {
                        if (fx[static_cast<std::size_t>(t)] == cplx(0.0)) continue;
                        const long m = (k + a0) * per + t - l * per;
                        acc += fx[static_cast<std::size_t>(t)] * G0[static_cast<std::size_t>(m - gm_lo)];
                    }
                    out.A(ca * N + (k - lo), cb * N + (l - lo)) = S[ca][cb] * acc;
                }
            }
        }
    }
    out.hs_norm = out.A.norm();
    return out;
}

/// Exact smeared <T(h_a) T(h_b)> for h_x translated by `separation`, with common time smearing h_t.
inline double exact_stress_two_point(const ScalarSmearing& h_x, const ScalarSmearing& h_t, double separation, double tail = 1e-12) {
    ScalarSmearing hx0 = h_x;
    hx0.x0 = 0.0;
    ScalarSmearing ht0 = h_t;
    ht0.x0 = 0.0;
    const double sig = std::min(hx0.kind == ScalarSmearing::Kind::gaussian ? hx0.sigma : 1.0,
                                ht0.kind == ScalarSmearing::Kind::gaussian ? ht0.sigma : 1.0);
    const double smax = 2.0 * std::sqrt(-2.0 * std::log(tail)) / sig;
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    auto inner = [&](double s) {
        auto f = [&](double w) { return (w * (s - w) * ht0.fourier(w) * ht0.fourier(w - s)).real(); };
        return GK::integrate(f, 0.0, s, 10, 1e-12);
    };
    auto outer = [&](double s) {
        const cplx hx = hx0.fourier(s);
        return (std::polar(1.0, s * separation) * hx * hx * inner(s)).real();
    };
    const double val = GK::integrate(outer, 0.0, smax, 15, 1e-11);
    return val / (4.0 * pi * pi);
}

// ---------------------------------------------------------------------------
// MERA correlators

struct CorrelationResult {
    cplx value = 0.0;
    double bound = -1.0;  // negative when not computable
    int j = 0, layers = 0, K = 0, L = 0;
};

/// Field insertion given as a smearing function.
struct FieldSpec {
    SpinorSmearing f;
    enum class Type { annihilate, create, majorana } type = Type::annihilate;
};

struct MeraContext {
    const FilterPair* pair = nullptr;
    const ScalingFunctions* functions = nullptr;
    int j = 7;
    int layers = 8;
    Geometry geometry = Geometry::line;
    DiscretizeMode mode = DiscretizeMode::quadrature;
};

/// Symbol and discretized insertions sharing one basis.
struct DiscretizedProblem {
    SymbolMatrix symbol;
    std::vector<Insertion> insertions;
};

inline DiscretizedProblem discretize_problem(const MeraContext& ctx, const std::vector<FieldSpec>& fields) {
    DiscretizedProblem out;
    std::vector<CoefficientField> cf;
    DiscretizeOptions opt;
    opt.mode = ctx.mode;
    opt.geometry = ctx.geometry;
    for (const auto& fs : fields) {
        SpinorSmearing f = fs.f;
        if (ctx.geometry == Geometry::antiperiodic) {
            f = antiperiodic_twist(f);
            opt.geometry = Geometry::periodic;
        }
        cf.push_back(discretize(f, *ctx.functions, ctx.j, opt));
    }
    if (ctx.geometry == Geometry::line) {
        long lo = std::numeric_limits<long>::max(), hi = std::numeric_limits<long>::min();
        for (const auto& c : cf) {
            lo = std::min(lo, c.first());
            hi = std::max(hi, c.last());
        }
        if (cf.empty()) lo = hi = 0;
        out.symbol = symbol_block_line(*ctx.pair, ctx.j, ctx.layers, lo, hi);
    } else {
        if (ctx.j != ctx.layers) throw InvalidInput("periodic correlators use scale j equal to the number of layers");
        out.symbol = build_symbol_periodic(*ctx.pair, ctx.layers);
    }
    for (std::size_t i = 0; i < fields.size(); ++i) {
        const Eigen::VectorXcd v = out.symbol.embed(cf[i]);
        switch (fields[i].type) {
            case FieldSpec::Type::annihilate: out.insertions.push_back(Insertion::annihilate(v)); break;
            case FieldSpec::Type::create: out.insertions.push_back(Insertion::create(v)); break;
            default: out.insertions.push_back(Insertion::majorana(v)); break;
        }
    }
    return out;
}

/// Correlator of field insertions in the MERA state; bound filled when the hypotheses can be checked.
inline CorrelationResult mera_correlator(const MeraContext& ctx, const std::vector<FieldSpec>& fields, const WaveletConstants* constants = nullptr) {
    CorrelationResult res;
    res.j = ctx.j;
    res.layers = ctx.layers;
    res.K = ctx.pair->K;
    res.L = ctx.pair->L;
    const DiscretizedProblem prob = discretize_problem(ctx, fields);
    res.value = wick_linear(prob.symbol.Q, prob.insertions);
    if (constants && constants->epsilon > 0.0 && constants->epsilon < 1.0) {
        double dmax = 0.0, Dmax = 0.0, nmax = 0.0;
        for (const auto& fs : fields) {
            dmax = std::max(dmax, fs.f.derivative_norm());
            Dmax = std::max(Dmax, fs.f.support_width());
            nmax = std::max(nmax, fs.f.norm());
        }
        if (nmax <= 1.0 + 1e-12) {
            BoundParams bp;
            bp.M = ctx.pair->M();
            bp.n = static_cast<int>(fields.size());
            bp.m = 0;
            bp.periodic = ctx.geometry != Geometry::line;
            bp.D = bp.periodic ? std::max(1.0, dmax) : std::max(1.0, dmax * Dmax);
            res.bound = error_bound(*constants, bp, ctx.layers);
        }
    }
    return res;
}

}  // namespace hmera

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

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "hmera/cascade.hpp"
#include "hmera/gaussian.hpp"
#include "hmera/transform.hpp"

using namespace hmera;

namespace {

LineVector random_vector(std::mt19937& rng, long offset, long n) {
    std::normal_distribution<double> nd;
    LineVector v;
    v.offset = offset;
    for (long i = 0; i < n; ++i) v.v.emplace_back(nd(rng), nd(rng));
    return v;
}

SpinorSmearing chiral_gaussian(double x0, double sigma) { return SpinorSmearing::chiral(ScalarSmearing::gaussian(x0, sigma)); }

/// Basis function phi_{j,k} of one channel as a sampled smearing.
ScalarSmearing basis_function(const DyadicFunction& phi, int j, long k) {
    std::vector<cplx> s(phi.values.begin(), phi.values.end());
    const double scale = std::ldexp(1.0, -j);
    for (auto& v : s) v *= std::sqrt(1.0 / scale);
    return ScalarSmearing::sampled(scale * (phi.a + k), scale * phi.step(), s);
}

}  // namespace

TEST(Transform, HaarTwoSiteLayer) {
    const FilterPair p = haar_pair();
    LineVector c;
    c.offset = 0;
    c.v = {2.0, 5.0};
    const DwtSplit sp = dwt_layer(c, p.g_s, p.g_w);
    EXPECT_NEAR(std::abs(sp.scaling[0] - cplx(7.0 / std::sqrt(2.0))), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(sp.wavelet[0] - cplx(3.0 / std::sqrt(2.0))), 0.0, 1e-15);
}

TEST(Transform, LayerRoundTripAndNorm) {
    std::mt19937 rng(11);
    const FilterPair p = design_hilbert_pair(2, 2);
    const LineVector c = random_vector(rng, 0, 64);
    const DwtSplit sp = dwt_layer(c, p.g_s, p.g_w);
    EXPECT_NEAR(std::sqrt(sp.scaling.norm_squared() + sp.wavelet.norm_squared()), c.norm(), 1e-12);
    const LineVector back = dwt_layer_adjoint(sp, p.g_s, p.g_w);
    for (long k = c.first(); k <= c.last(); ++k) EXPECT_NEAR(std::abs(back[k] - c[k]), 0.0, 1e-12);
    for (long k = back.first(); k <= back.last(); ++k)
        if (k < c.first() || k > c.last()) EXPECT_NEAR(std::abs(back[k]), 0.0, 1e-12);
}

TEST(Transform, MultiLayerNormAndComposition) {
    std::mt19937 rng(5);
    const FilterPair p = design_hilbert_pair(3, 3);
    const LineVector c = random_vector(rng, -7, 50);
    const Strata st5 = dwt_multi(c, p.g_s, p.g_w, 5);
    EXPECT_NEAR(std::sqrt(st5.norm_squared()), c.norm(), 1e-12);
    const Strata st4 = dwt_multi(c, p.g_s, p.g_w, 4);
    const DwtSplit last = dwt_layer(st4.scaling, p.g_s, p.g_w);
    for (long k = last.scaling.first(); k <= last.scaling.last(); ++k)
        EXPECT_NEAR(std::abs(last.scaling[k] - st5.scaling[k]), 0.0, 1e-12);
    const LineVector back = dwt_multi_adjoint(st5, p.g_s, p.g_w);
    for (long k = c.first(); k <= c.last(); ++k) EXPECT_NEAR(std::abs(back[k] - c[k]), 0.0, 1e-11);
}

TEST(Transform, HaarDeltaTwoLayers) {
    const FilterPair p = haar_pair();
    const Strata st = dwt_multi(LineVector::unit(0), p.g_s, p.g_w, 2);
    EXPECT_NEAR(st.norm_squared(), 1.0, 1e-14);
}

TEST(Transform, RefinedScalingFunctionIsOneCoefficient) {
    const FilterPair p = design_hilbert_pair(2, 2);
    LineVector c;
    c.offset = p.g_s.offset;
    for (double x : p.g_s.coeffs) c.v.emplace_back(x);
    const DwtSplit sp = dwt_layer(c, p.g_s, p.g_w);
    for (long k = sp.scaling.first(); k <= sp.scaling.last(); ++k) EXPECT_NEAR(std::abs(sp.scaling[k]), k == 0 ? 1.0 : 0.0, 1e-13);
    EXPECT_NEAR(sp.wavelet.norm(), 0.0, 1e-13);
}

TEST(Transform, EvenShiftCovariance) {
    std::mt19937 rng(9);
    const FilterPair p = design_hilbert_pair(2, 2);
    const LineVector c = random_vector(rng, 0, 40);
    LineVector d = c;
    d.offset += 2;
    const Strata a = dwt_multi(c, p.g_s, p.g_w, 1), b = dwt_multi(d, p.g_s, p.g_w, 1);
    EXPECT_NEAR(a.wavelets[0].norm(), b.wavelets[0].norm(), 1e-12);
    EXPECT_NEAR(a.scaling.norm(), b.scaling.norm(), 1e-12);
}

TEST(Transform, PeriodicConstantAndUnitarity) {
    const FilterPair p = design_hilbert_pair(2, 2);
    std::vector<cplx> c(16, 0.75);
    const PeriodicStrata st = dwt_periodic(c, p.g_s, p.g_w, 4);
    for (const auto& w : st.wavelets)
        for (const auto& x : w) EXPECT_NEAR(std::abs(x), 0.0, 1e-13);
    EXPECT_NEAR(std::abs(st.scaling[0]), 0.75 * 4.0, 1e-13);
    const Eigen::MatrixXd W = dwt_periodic_matrix(16, p.g_s, p.g_w, 4);
    EXPECT_LT((W * W.transpose() - Eigen::MatrixXd::Identity(16, 16)).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_THROW(dwt_periodic(std::vector<cplx>(12, 1.0), p.g_s, p.g_w, 2), InvalidInput);
}

TEST(Transform, PeriodicHaarMatchesDenseDefinition) {
    const double r = 1.0 / std::sqrt(2.0);
    // Haar on 8 sites, 3 layers, rows: 4 fine wavelets, 2 wavelets, 1 wavelet, 1 scaling.
    Eigen::MatrixXd ref = Eigen::MatrixXd::Zero(8, 8);
    for (int k = 0; k < 4; ++k) {
        ref(k, 2 * k) = -r;
        ref(k, 2 * k + 1) = r;
    }
    for (int k = 0; k < 2; ++k)
        for (int m = 0; m < 4; ++m) ref(4 + k, 4 * k + m) = (m < 2 ? -0.5 : 0.5);
    for (int m = 0; m < 8; ++m) ref(6, m) = (m < 4 ? -1.0 : 1.0) / std::sqrt(8.0);
    for (int m = 0; m < 8; ++m) ref(7, m) = 1.0 / std::sqrt(8.0);
    const FilterPair p = haar_pair();
    EXPECT_LT((dwt_periodic_matrix(8, p.g_s, p.g_w, 3) - ref).cwiseAbs().maxCoeff(), 1e-14);
}

TEST(Transform, QuadratureOfBasisFunctionIsUnitVector) {
    const FilterPair p = design_hilbert_pair(3, 3);
    const ScalingFunctions fn = evaluate_functions(p, 10);
    const int j = 4;
    const SpinorSmearing f = SpinorSmearing::component(1, basis_function(fn.phi_g, j, 5));
    const CoefficientField cf = discretize(f, fn, j);
    for (long k = cf.comp[1].first(); k <= cf.comp[1].last(); ++k)
        EXPECT_NEAR(std::abs(cf.comp[1][k] - cplx(k == 5 ? 1.0 : 0.0)), 0.0, 1e-6) << "k=" << k;
}

TEST(Transform, HaarConstantOnCircle) {
    const FilterPair p = haar_pair();
    const int r = 10, j = 5;
    const ScalingFunctions fn = evaluate_functions(p, r);
    const ScalarSmearing one = ScalarSmearing::sampled(0.0, 1.0 / 64, std::vector<cplx>(65, 1.0));
    DiscretizeOptions opt;
    opt.geometry = Geometry::periodic;
    const CoefficientField cf = discretize(SpinorSmearing::component(0, one), fn, j, opt);
    ASSERT_EQ(cf.comp[0].v.size(), 32u);
    // The closed sample interval counts the point x = 0 twice; that endpoint carries trapezoid weight 2^{-r-1}.
    const double tol = std::ldexp(1.0, -r) * std::ldexp(1.0, -j / 2);
    for (const auto& x : cf.comp[0].v) EXPECT_NEAR(std::abs(x - cplx(std::ldexp(1.0, -j) / std::sqrt(std::ldexp(1.0, -j)))), 0.0, tol);
}

TEST(Transform, SamplingVersusQuadrature) {
    const FilterPair p = design_hilbert_pair(3, 3);
    const WaveletConstants wc = certify_constants(p, 10);
    const ScalingFunctions fn = evaluate_functions(p, 10);
    const SpinorSmearing f = SpinorSmearing::component(0, ScalarSmearing::gaussian(0.5, 0.05));
    DiscretizeOptions q, s;
    s.mode = DiscretizeMode::sampling;
    const int j = 8;
    const CoefficientField a = discretize(f, fn, j, q), b = discretize(f, fn, j, s);
    LineVector diff = add(a.comp[0], b.comp[0], -1.0);
    EXPECT_LE(diff.norm(), std::ldexp(1.0, -j) * wc.C_phi * f.derivative_norm());
}

TEST(Transform, SymbolsAreProjections) {
    std::mt19937 rng(3);
    for (int K : {1, 2}) {
        const FilterPair p = design_hilbert_pair(K, K);
        for (int layers = 1; layers <= 3; ++layers) {
            const SymbolMatrix sm = build_symbol_mera(p, 0, layers, 0, 0);
            const SymbolDefects d = symbol_defects(sm.Q);
            EXPECT_LE(d.hermiticity, 1e-12);
            EXPECT_LE(d.idempotence, 1e-10);
            const SymbolMatrix sp = build_symbol_periodic(p, layers + 2);
            EXPECT_LE(symbol_defects(sp.Q).idempotence, 1e-10);
            EXPECT_NEAR(sp.Q.trace().real(), double(sp.N), 1e-9);
        }
    }
}

TEST(Transform, ZeroLayersGiveZeroSymbol) {
    const SymbolMatrix sm = build_symbol_mera(design_hilbert_pair(1, 1), 0, 0, 0, 3);
    EXPECT_EQ(sm.Q.cwiseAbs().maxCoeff(), 0.0);
}

TEST(Transform, WindowTooSmallCarriesHint) {
    const FilterPair p = design_hilbert_pair(1, 1);
    try {
        build_symbol_mera(p, 0, 2, 0, 8, 2, 3);
        FAIL() << "expected WindowTooSmall";
    } catch (const WindowTooSmall& e) {
        EXPECT_GE(e.required(), required_window(2, p.M(), 2));
    }
}

TEST(Transform, ExactSurrogateHasWaveletRank) {
    FilterPair p = design_hilbert_pair(1, 1);
    p.h_s = p.g_s;
    p.h_w = p.g_w;
    const long N = 64;
    const SymbolMatrix sm = build_symbol_mera(p, 0, 3, 0, N, 30, 33);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(sm.Q);
    int rank = 0;
    for (long i = 0; i < es.eigenvalues().size(); ++i) rank += es.eigenvalues()(i) > 0.5;
    EXPECT_EQ(rank, N / 2 + N / 4 + N / 8);
}

TEST(Transform, BlockAgreesWithWindowedSymbol) {
    const FilterPair p = design_hilbert_pair(1, 1);
    const int L = 3;
    const SymbolMatrix big = build_symbol_mera(p, 0, L, 10, 13);
    const SymbolMatrix blk = symbol_block_line(p, 0, L, 10, 13);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (long k = 10; k <= 13; ++k)
                for (long l = 10; l <= 13; ++l)
                    EXPECT_NEAR(std::abs(big.Q(big.index(k, a), big.index(l, b)) - blk.Q(blk.index(k, a), blk.index(l, b))), 0.0, 1e-12);
}

TEST(Transform, PeriodicSymbolOnConstants) {
    const FilterPair p = design_hilbert_pair(2, 2);
    const int L = 5;
    const SymbolMatrix sm = build_symbol_periodic(p, L);
    const long N = sm.N;
    Eigen::Matrix2cd Q0;
    Q0 << 0.5, cplx(0, -0.5), cplx(0, 0.5), 0.5;
    for (int c = 0; c < 2; ++c) {
        Eigen::VectorXcd v = Eigen::VectorXcd::Zero(2 * N);
        v.segment(c * N, N).setConstant(1.0 / std::sqrt(double(N)));
        const Eigen::VectorXcd w = sm.Q * v;
        for (int d = 0; d < 2; ++d)
            for (long k = 0; k < N; ++k) EXPECT_NEAR(std::abs(w(d * N + k) - Q0(d, c) / std::sqrt(double(N))), 0.0, 1e-12);
    }
}

TEST(Transform, ExactTwoPointBasics) {
    const SpinorSmearing f = chiral_gaussian(0.2, 0.05);
    for (Geometry g : {Geometry::line, Geometry::periodic, Geometry::antiperiodic}) {
        const cplx v = exact_two_point(f, f, g);
        EXPECT_NEAR(v.imag(), 0.0, 1e-10);
        EXPECT_GE(v.real(), -1e-12);
        EXPECT_LE(v.real(), f.norm() * f.norm() + 1e-12);
    }
    const SpinorSmearing g = chiral_gaussian(0.45, 0.05);
    EXPECT_NEAR(std::abs(exact_two_point(f, g, Geometry::line) - std::conj(exact_two_point(g, f, Geometry::line))), 0.0, 1e-12);
}

TEST(Transform, ExactTwoPointDecaysLikeInverseDistance) {
    const SpinorSmearing f = chiral_gaussian(0.0, 0.05);
    std::vector<double> scaled;
    for (double d : {1.0, 2.0, 4.0}) scaled.push_back(std::abs(exact_two_point(f, chiral_gaussian(d, 0.05), Geometry::line)) * d);
    EXPECT_NEAR(scaled[1] / scaled[0], 1.0, 0.01);
    EXPECT_NEAR(scaled[2] / scaled[0], 1.0, 0.01);
}

TEST(Transform, AntiperiodicIsTwistedPeriodic) {
    const SpinorSmearing f = chiral_gaussian(0.3, 0.05), g = chiral_gaussian(0.6, 0.07);
    const cplx a = exact_two_point(f, g, Geometry::antiperiodic);
    const cplx b = exact_two_point(antiperiodic_twist(f), antiperiodic_twist(g), Geometry::periodic);
    EXPECT_NEAR(std::abs(a - b), 0.0, 1e-12);
}

TEST(Transform, TwistProperties) {
    const SpinorSmearing f = chiral_gaussian(0.4, 0.05);
    const SpinorSmearing t = antiperiodic_twist(f), tt = antiperiodic_twist(t);
    EXPECT_NEAR(t.norm(), f.norm(), 1e-15);
    for (double x : {0.3, 0.4, 0.47}) {
        EXPECT_NEAR(std::abs(t.comp[0](x) - std::polar(1.0, -pi * x) * f.comp[0](x)), 0.0, 1e-14);
        EXPECT_NEAR(std::abs(tt.comp[0](x) - std::polar(1.0, -2.0 * pi * x) * f.comp[0](x)), 0.0, 1e-14);
    }
}

TEST(Transform, LineMeraWithinBound) {
    const FilterPair p = design_hilbert_pair(3, 3);
    const ScalingFunctions fn = evaluate_functions(p, 8);
    const WaveletConstants wc = certify_constants(p, 10);
    const int j = 8, L = 8;
    const SpinorSmearing f = chiral_gaussian(0.0, 0.05), g = chiral_gaussian(0.3, 0.05);
    const CoefficientField cf = discretize(f, fn, j), cg = discretize(g, fn, j);
    const cplx mera = symbol_inner_line(p, cg, cf, L);
    const cplx exact = exact_two_point(f, g, Geometry::line);
    BoundParams bp;
    bp.M = p.M();
    bp.D = f.derivative_norm() * f.support_width();
    EXPECT_LE(std::abs(mera - exact), error_bound(wc, bp, L));
}

TEST(Transform, PeriodicMeraWithinBound) {
    const FilterPair p = design_hilbert_pair(3, 3);
    const int L = 6;
    const ScalingFunctions fn = evaluate_functions(p, 8);
    const WaveletConstants wc = certify_constants(p, 10);
    const SymbolMatrix sm = build_symbol_periodic(p, L);
    DiscretizeOptions opt;
    opt.geometry = Geometry::periodic;
    const SpinorSmearing f = chiral_gaussian(0.25, 0.05), g = chiral_gaussian(0.5, 0.05);
    const Eigen::VectorXcd vf = sm.embed(discretize(f, fn, L, opt)), vg = sm.embed(discretize(g, fn, L, opt));
    const cplx mera = vg.dot(sm.Q * vf);
    const cplx exact = exact_two_point(f, g, Geometry::periodic);
    BoundParams bp;
    bp.M = p.M();
    bp.periodic = true;
    bp.D = f.derivative_norm();
    EXPECT_LE(std::abs(mera - exact), error_bound(wc, bp, L));
}

TEST(Transform, SmearingCsvRoundTrip) {
    const std::string path = ::testing::TempDir() + "smear.csv";
    {
        std::ofstream out(path);
        out << "x,re1,im1,re2,im2\n";
        for (int i = 0; i <= 10; ++i) out << 0.1 * i << "," << i << ",0," << -i << ",1\n";
    }
    const SpinorSmearing s = load_smearing_csv(path);
    std::remove(path.c_str());
    EXPECT_NEAR(std::abs(s.comp[0](0.5) - cplx(5.0)), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(s.comp[1](0.25) - cplx(-2.5, 1.0)), 0.0, 1e-12);
}

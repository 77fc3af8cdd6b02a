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

#include <cmath>

#include "hmera/cascade.hpp"

using namespace hmera;

namespace {

Filter daubechies4() {
    const double s3 = std::sqrt(3.0), d = 4.0 * std::sqrt(2.0);
    return Filter{{(1 + s3) / d, (3 + s3) / d, (3 - s3) / d, (1 - s3) / d}, 0};
}

}  // namespace

TEST(Cascade, Daubechies4IntegerValues) {
    const auto v = scaling_integer_values(daubechies4());
    ASSERT_EQ(v.size(), 4u);
    EXPECT_NEAR(v[0], 0.0, 1e-14);
    EXPECT_NEAR(v[1], (1 + std::sqrt(3.0)) / 2, 1e-13);
    EXPECT_NEAR(v[2], (1 - std::sqrt(3.0)) / 2, 1e-13);
    EXPECT_NEAR(v[3], 0.0, 1e-14);
}

TEST(Cascade, HaarIsIndicator) {
    const DyadicFunction phi = cascade_scaling(haar_pair().g_s, 6);
    EXPECT_NEAR(phi(0.25), 1.0, 1e-14);
    EXPECT_NEAR(phi(0.75), 1.0, 1e-14);
    EXPECT_NEAR(phi(1.5), 0.0, 1e-14);
}

TEST(Cascade, PartitionOfUnityAndMoments) {
    for (int K = 1; K <= 3; ++K) {
        const FilterPair p = design_hilbert_pair(K, K);
        const ScalingFunctions fn = evaluate_functions(p, 8);
        for (const DyadicFunction* f : {&fn.phi_g, &fn.phi_h}) {
            const long per = f->samples_per_unit();
            for (long t = 0; t < per; t += 17) {
                double s = 0.0;
                for (long k = f->a; k <= f->b; ++k) s += f->at_index(k * per + t);
                EXPECT_NEAR(s, 1.0, 1e-11) << "K=" << K << " t=" << t;
            }
            EXPECT_NEAR(f->integral(), 1.0, 1e-10);
        }
        EXPECT_NEAR(fn.psi_g.integral(), 0.0, 1e-10);
        EXPECT_NEAR(fn.psi_h.integral(), 0.0, 1e-10);
        EXPECT_LT(refinement_residual(fn.phi_g, p.g_s), 1e-12);
        EXPECT_LT(refinement_residual(fn.phi_h, p.h_s), 1e-12);
    }
}

TEST(Cascade, HaarWaveletIsStep) {
    const ScalingFunctions fn = evaluate_functions(haar_pair(), 20);
    EXPECT_NEAR(std::abs(fn.psi_g(0.25)), 1.0, 1e-14);
    EXPECT_NEAR(fn.psi_g(0.25), -fn.psi_g(0.75), 1e-14);
    EXPECT_NEAR(fn.psi_g.integral(), 0.0, 1e-6);
}

TEST(Cascade, ResidualDecreasesWithDepth) {
    for (int K = 1; K <= 6; ++K) {
        const FilterPair p = design_hilbert_pair(K, K);
        double prev = 1e300;
        for (int r = 6; r <= 10; r += 2) {
            const double res = refinement_residual(cascade_scaling(p.g_s, r), p.g_s);
            EXPECT_LE(res, std::max(prev, 1e-13)) << "K=" << K << " r=" << r;
            EXPECT_LE(res, 1e-8);
            prev = res;
        }
    }
}

TEST(Cascade, SpecExamples) {
    const WaveletConstants c1 = certify_constants(design_hilbert_pair(1, 1), 10);
    EXPECT_NEAR(c1.C_IR / 2.542073, 1.0, 0.05);
    const WaveletConstants c2 = certify_constants(design_hilbert_pair(2, 2), 10);
    EXPECT_NEAR(c2.C_UV / 0.622182, 1.0, 0.05);
    const WaveletConstants c5 = certify_constants(design_hilbert_pair(5, 5), 10);
    EXPECT_NEAR(c5.C_chi_prime / 0.005999, 1.0, 0.10);
    const ScalingFunctions f2 = evaluate_functions(design_hilbert_pair(2, 2), 10);
    EXPECT_EQ(f2.phi_g.b - f2.phi_g.a, 7);
}

TEST(Cascade, IntegerShiftsAreOrthonormal) {
    const FilterPair p = design_hilbert_pair(2, 2);
    const DyadicFunction phi = cascade_scaling(p.g_s, 10);
    const long per = phi.samples_per_unit();
    for (long s = 0; s <= 2; ++s) {
        double acc = 0.0;
        for (long i = 0; i < static_cast<long>(phi.values.size()); ++i) acc += phi.values[i] * phi.at_index(phi.a * per + i + s * per);
        acc *= phi.step();
        EXPECT_NEAR(acc, s == 0 ? 1.0 : 0.0, 2e-3);
    }
}

TEST(Cascade, DegenerateFilterRejected) {
    const double r = 1.0 / std::sqrt(2.0);
    EXPECT_THROW(scaling_integer_values(Filter{{r, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, r}, 0}), DegenerateFilter);
}

TEST(Cascade, ShallowDepthRejected) {
    EXPECT_THROW(evaluate_functions(design_hilbert_pair(1, 1), 5), InvalidInput);
}

TEST(Cascade, HaarConstants) {
    const WaveletConstants c = certify_constants(haar_pair(), 10);
    EXPECT_NEAR(c.C_IR, 1.0, 1e-6);
}

TEST(Cascade, TableExamplesForCertify) {
    const WaveletConstants c4 = certify_constants(design_hilbert_pair(4, 4), 10);
    EXPECT_NEAR(c4.C_UV / 0.626782, 1.0, 0.05);
    FilterPair p9 = design_hilbert_pair(9, 9);
    EXPECT_NEAR(certify_epsilon(p9), 0.000009, 5e-6);
}

TEST(Cascade, ConstantsJsonRoundTrip) {
    const WaveletConstants c = certify_constants(design_hilbert_pair(1, 1), 8);
    const WaveletConstants d = constants_from_json(constants_to_json(c));
    EXPECT_DOUBLE_EQ(d.epsilon, c.epsilon);
    EXPECT_DOUBLE_EQ(d.C_UV, c.C_UV);
    EXPECT_DOUBLE_EQ(d.C_IR, c.C_IR);
    EXPECT_DOUBLE_EQ(d.C_chi, c.C_chi);
    EXPECT_EQ(d.C_phi_convention, c.C_phi_convention);
}

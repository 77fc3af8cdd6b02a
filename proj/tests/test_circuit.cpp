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

#include "hmera/circuit.hpp"

using namespace hmera;

TEST(Circuit, HaarSingleGate) {
    const FilterPair p = haar_pair();
    const CircuitLayer layer = decompose_layer(p);
    ASSERT_EQ(layer.sublayers.size(), 1u);
    EXPECT_EQ(layer.depth(), 2);
    const Eigen::MatrixXd A = assemble_layer(layer, 2, Channel::g);
    const double a = 0.3, b = -1.7;
    const Eigen::Vector2d out = A * Eigen::Vector2d(a, b);
    EXPECT_NEAR(out(0), (-a + b) / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(out(1), (a + b) / std::sqrt(2.0), 1e-15);
}

TEST(Circuit, SublayerCountIsHalfFilterLength) {
    for (auto [K, L] : {std::pair{1, 1}, {2, 1}, {2, 2}, {3, 3}}) {
        const FilterPair p = design_hilbert_pair(K, L);
        const CircuitLayer layer = decompose_layer(p);
        EXPECT_EQ(static_cast<int>(layer.sublayers.size()), p.M() / 2);
        EXPECT_EQ(layer.depth(), p.M() / 2 + 1);
        for (std::size_t i = 1; i < layer.sublayers.size(); ++i) EXPECT_NE(layer.sublayers[i].parity, layer.sublayers[i - 1].parity);
    }
}

TEST(Circuit, ReassemblyMatchesDenseTransform) {
    for (auto [K, L] : {std::pair{1, 1}, {2, 2}, {3, 3}}) {
        const FilterPair p = design_hilbert_pair(K, L);
        const CircuitLayer layer = decompose_layer(p);
        EXPECT_LE(reassembly_defect(p, layer, 32), 1e-10) << "K=" << K;
        for (int c = 0; c < 2; ++c) {
            const Eigen::MatrixXd A = assemble_layer(layer, 32, static_cast<Channel>(c));
            EXPECT_LE(unitarity_defect(A.cast<cplx>()), 1e-12);
        }
    }
}

TEST(Circuit, IdentityAnglesGivePermutation) {
    CircuitLayer layer;
    layer.M = 4;
    layer.shift = 3;
    layer.sublayers.resize(2);
    layer.sublayers[1].parity = 1;
    const long N = 8;
    const Eigen::MatrixXd A = assemble_layer(layer, N, Channel::h);
    for (long m = 0; m < N; ++m)
        for (long n = 0; n < N; ++n) EXPECT_EQ(A(m, n), n == (m + 3) % N ? 1.0 : 0.0);
}

TEST(Circuit, OddWindowThrows) {
    const CircuitLayer layer = decompose_layer(haar_pair());
    EXPECT_THROW(assemble_layer(layer, 7, Channel::g), InvalidInput);
}

TEST(Circuit, DepthOneSymbolRank) {
    const FilterPair p = design_hilbert_pair(1, 1);
    const MeraUnitary mu = build_mera_unitary(p, 1, 16, false);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(mu.symbol());
    int rank = 0;
    for (long i = 0; i < es.eigenvalues().size(); ++i) rank += es.eigenvalues()(i) > 0.5;
    EXPECT_EQ(rank, 8);
}

TEST(Circuit, MeraSymbolMatchesTransformSymbol) {
    const FilterPair p = design_hilbert_pair(1, 1);
    const int depth = 3;
    const long N = 64;
    const MeraUnitary mu = build_mera_unitary(p, depth, N, false);
    EXPECT_LE(unitarity_defect(mu.U), 1e-12);
    const SymbolMatrix sm = build_symbol_mera(p, 0, depth, 0, N, 24, 39);
    EXPECT_LE((mu.symbol() - sm.Q).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Circuit, PeriodicHaarUnitary) {
    const MeraUnitary mu = build_mera_unitary(haar_pair(), 4, 16, true);
    EXPECT_EQ(mu.U.rows(), 32);
    EXPECT_LE(unitarity_defect(mu.U), 1e-12);
    EXPECT_THROW(build_mera_unitary(haar_pair(), 4, 32, true), InvalidInput);
}

TEST(Circuit, ScalingCovariance) {
    for (int K : {1, 3}) {
        const FilterPair p = design_hilbert_pair(K, K);
        const ScalingFunctions fn = evaluate_functions(p, 10);
        const int j = 4;
        const CovarianceReport rep = check_scaling_covariance(p, fn, j, dyadic_grid(0.0, 1.0, j, 10, 16));
        EXPECT_LE(rep.scaling_residual, 1e-8) << "K=" << K;
        EXPECT_EQ(rep.shift_residual, 0.0);
    }
}

TEST(Circuit, TimeTranslationBasisIsUnitary) {
    const Eigen::Matrix2cd T = time_translation_basis();
    EXPECT_LE((T.adjoint() * T - Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff(), 1e-15);
    EXPECT_NEAR(std::abs(T(0, 1) - cplx(0.0, 1.0 / std::sqrt(2.0))), 0.0, 1e-15);
}

TEST(Circuit, JsonExport) {
    const FilterPair p = design_hilbert_pair(2, 2);
    const MeraUnitary mu = build_mera_unitary(p, 2, 16, false);
    const nlohmann::json j = circuit_to_json(mu, reassembly_defect(p, mu.layers[0], 32));
    ASSERT_EQ(j["layers"].size(), 2u);
    EXPECT_EQ(j["layers"][0]["sublayers"].size(), 4u);
    EXPECT_TRUE(j["layers"][0]["hadamard"].get<bool>());
}

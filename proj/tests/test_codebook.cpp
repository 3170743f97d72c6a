// SPDX-License-Identifier: Apache-2.0
//
// mcbf - multicell coordinated beamforming with limited feedback
// Copyright (C) 2026 The mcbf authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "mcbf/codebook.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace mcbf;

namespace {

CVector vec(std::initializer_list<Complex> v) {
    CVector out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index k = 0;
    for (auto x : v)
        out[k++] = x;
    return out;
}

CVector random_unit(Rng& rng, int m) {
    CVector h = complex_normal_vector(rng, static_cast<std::size_t>(m));
    return h / h.norm();
}

} // namespace

TEST(GenerateCodebook, Sizes) {
    Rng rng(1);
    EXPECT_EQ(generate_codebook(rng, 3, 0).size(), 1u);
    const Codebook cb = generate_codebook(rng, 3, 3);
    ASSERT_EQ(cb.size(), 8u);
    for (const auto& c : cb.vectors) {
        EXPECT_EQ(c.size(), 3);
        EXPECT_NEAR(c.norm(), 1.0, 1e-12);
    }
}

TEST(GenerateCodebook, BitCap) {
    Rng rng(1);
    EXPECT_THROW(generate_codebook(rng, 3, 17), std::invalid_argument);
    EXPECT_THROW(generate_codebook(rng, 3, -1), std::invalid_argument);
    EXPECT_THROW(generate_codebook(rng, 1, 2), std::invalid_argument);
}

TEST(GenerateCodebook, DistinctStreamsShareNoCodeword) {
    Rng a = derive_stream(9, {1}), b = derive_stream(9, {2});
    const Codebook ca = generate_codebook(a, 3, 6), cb = generate_codebook(b, 3, 6);
    for (const auto& x : ca.vectors)
        for (const auto& y : cb.vectors)
            EXPECT_LT(std::norm(x.dot(y)), 1.0 - 1e-9);
}

TEST(Quantize, PicksLargestInnerProduct) {
    Codebook cb{1, {vec({1.0, 0.0}), vec({0.0, 1.0})}};
    const auto q = quantize(vec({0.6, 0.8}), cb);
    EXPECT_EQ(q.index, 1u);
    EXPECT_NEAR(q.fidelity, 0.64, 1e-12);
}

TEST(Quantize, ExactMemberAndGlobalPhase) {
    Rng rng(4);
    const Codebook cb = generate_codebook(rng, 3, 4);
    const Complex phase = std::polar(1.0, 0.7);
    for (std::size_t k = 0; k < cb.size(); ++k) {
        const auto q = quantize(cb.vectors[k], cb);
        EXPECT_EQ(q.index, k);
        EXPECT_NEAR(q.fidelity, 1.0, 1e-12);
        const auto r = quantize(CVector(phase * cb.vectors[k]), cb);
        EXPECT_EQ(r.index, k);
        EXPECT_NEAR(r.fidelity, 1.0, 1e-12);
    }
}

TEST(Quantize, TiesGoToLowestIndex) {
    Codebook cb{1, {vec({0.0, 1.0}), vec({1.0, 0.0}), vec({1.0, 0.0})}};
    EXPECT_EQ(quantize(vec({1.0, 0.0}), cb).index, 1u);
}

TEST(Quantize, Errors) {
    Rng rng(4);
    const Codebook cb = generate_codebook(rng, 3, 2);
    EXPECT_THROW(quantize(vec({1.0, 0.0}), cb), std::invalid_argument);
    EXPECT_THROW(quantize(vec({1.0, 1.0, 0.0}), cb), std::invalid_argument);
}

TEST(Quantize, FidelityMatchesStoredCodewordAndPhaseInvariant) {
    Rng rng(5);
    for (int t = 0; t < 500; ++t) {
        const Codebook cb = generate_codebook(rng, 3, 5);
        const CVector h = random_unit(rng, 3);
        const auto q = quantize(h, cb);
        EXPECT_GE(q.fidelity, 0.0);
        EXPECT_LE(q.fidelity, 1.0);
        EXPECT_NEAR(q.fidelity, std::norm(h.dot(q.vector)), 1e-12);
        const Complex phase = std::polar(1.0, 2.0 * std::numbers::pi * t / 500.0);
        const auto r = quantize(CVector(phase * h), cb);
        EXPECT_EQ(r.index, q.index);
    }
}

TEST(Quantize, MeanFidelityGrowsWithBits) {
    double previous = 0.0;
    for (int B : {1, 2, 4, 6}) {
        double acc = 0.0;
        constexpr int pairs = 10000;
        for (int t = 0; t < pairs; ++t) {
            Rng rng = derive_stream(77, {static_cast<std::uint64_t>(B), static_cast<std::uint64_t>(t)});
            const Codebook cb = generate_codebook(rng, 3, B);
            acc += quantize(random_unit(rng, 3), cb).fidelity;
        }
        const double mean = acc / pairs;
        EXPECT_GE(mean, previous) << "B = " << B;
        previous = mean;
    }
}

TEST(QuantizationErrorBound, Identities) {
    for (double eps : {0.0, 0.3, 0.9, 1.0})
        EXPECT_NEAR(quantization_error_bound(0, 3, eps), 1.0, 1e-14);
    for (int B : {0, 3, 10})
        for (int M : {2, 3, 5})
            EXPECT_DOUBLE_EQ(quantization_error_bound(B, M, 0.0), 1.0);
}

TEST(QuantizationErrorBound, MatchesProductFormOracle) {
    // beta(16, 1.5) through (n-1)! / prod (y + k)
    EXPECT_NEAR(quantization_error_bound(4, 3, 1.0), oracle::leakage_bound(4, 3, 1.0), 1e-12);
    EXPECT_NEAR(quantization_error_bound(4, 3, 1.0), 0.325, 1e-3);
    for (int B : {1, 2, 5, 8, 12})
        for (int M : {2, 3, 4})
            for (double eps : {0.5, 0.9})
                EXPECT_NEAR(quantization_error_bound(B, M, eps), oracle::leakage_bound(B, M, eps), 1e-11);
}

TEST(QuantizationErrorBound, Monotonicity) {
    for (int M : {2, 3, 4}) {
        for (double eps : {0.2, 0.7, 1.0})
            for (int B = 0; B < 16; ++B)
                EXPECT_LE(quantization_error_bound(B + 1, M, eps), quantization_error_bound(B, M, eps) + 1e-15);
        // the leakage term is < 1 for B >= 1, so more correlation means a smaller bound
        for (int B = 1; B <= 12; ++B)
            for (int k = 0; k < 20; ++k)
                EXPECT_GE(quantization_error_bound(B, M, k / 20.0), quantization_error_bound(B, M, (k + 1) / 20.0) - 1e-15);
    }
}

TEST(QuantizationErrorBound, TightForUnnormalizedChannel) {
    // With unnormalized CN(0, I) channels the bound is an equality in expectation.
    for (double eps : {0.5, 0.9}) {
        const auto samples = oracle::leakage_samples(4, eps, 10000, 314);
        const auto m = oracle::moments(samples.unnormalized);
        EXPECT_NEAR(m.mean, quantization_error_bound(4, 3, eps), 4.0 * m.std_err) << "eps " << eps;
        const auto n = oracle::moments(samples.normalized);
        EXPECT_LE(n.mean, quantization_error_bound(4, 3, eps));
    }
}

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

#include "mcbf/afp.hpp"
#include "mcbf/fading.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace mcbf;

namespace {

double eps_kmh(double kmh) { return correlation_coefficient(kmh_to_mps(kmh), kDefaultCarrierHz, kSpeedOfLight, 5e-3); }

// User 1 of the three-cell layout at mu11 = 10 dB: cross links at 8 and 7 dB,
// stations 2 and 3 serving users at 9 and 8 km/h.
AfpProblem reference_problem() {
    return {LinkStats{{db_to_linear(8.0), db_to_linear(7.0)}, {eps_kmh(9.0), eps_kmh(8.0)}}, 3, 30, 20};
}

RVector random_interior(const AfpProblem& p, Rng& rng) {
    std::uniform_real_distribution<double> w(1.5, p.T - 0.5), b(0.5, p.Bs / static_cast<double>(p.links()) - 0.5);
    RVector x(p.dim());
    const auto n = static_cast<Eigen::Index>(p.links());
    for (Eigen::Index j = 0; j < n; ++j)
        x[j] = w(rng);
    for (Eigen::Index j = 0; j + 1 < n; ++j)
        x[n + j] = b(rng);
    return x;
}

} // namespace

TEST(AfpObjective, Examples) {
    const LinkStats s{{1, 1}, {0.7, 0.3}};
    EXPECT_DOUBLE_EQ(afp_objective(std::vector<double>{1, 1}, std::vector<double>{0, 0}, s, 3, 30), 3.0);
    const LinkStats one{{1, 1}, {1, 1}};
    EXPECT_NEAR(afp_objective(std::vector<double>{1, 1}, std::vector<double>{60, 60}, one, 3, 30), 1.5, 1e-15);
    EXPECT_LT(afp_objective(std::vector<double>{1, 1}, std::vector<double>{1e4, 1e4}, one, 3, 30), 1e-40);
    EXPECT_THROW(afp_objective(std::vector<double>{1}, std::vector<double>{0, 0}, s, 3, 30), std::invalid_argument);
}

TEST(AfpGradient, UnitCorrelationClosedForm) {
    const AfpProblem p{LinkStats{{2.0, 3.0}, {1.0, 1.0}}, 3, 30, 20};
    const RVector x = p.pack(std::vector<double>{4.0, 7.0}, std::vector<double>{12.0, 8.0});
    const RVector g = afp_gradient(p, x);
    const double bits[2] = {12.0, 8.0}, omega[2] = {4.0, 7.0}, mu[2] = {2.0, 3.0};
    for (int j = 0; j < 2; ++j) {
        const double expect =
            -mu[j] * bits[j] * std::numbers::ln2 / 60.0 * 1.5 * std::exp2(-omega[j] * bits[j] / 60.0);
        EXPECT_NEAR(g[j], expect, 1e-14 * std::abs(expect));
    }
    const RVector fd = oracle::fd_gradient([&](const RVector& y) { return p.value(y); }, x, 1e-5);
    EXPECT_LE(oracle::rel_err(g, fd), 1e-6);
}

// Correlations in the slow-fading range; far below it rho^(omega-1) underflows
// against mu and central differences only measure rounding noise.
TEST(AfpGradient, MatchesFiniteDifferences) {
    Rng rng(404);
    std::uniform_real_distribution<double> u(0.85, 0.999), db(0.0, 15.0);
    for (int t = 0; t < 50; ++t) {
        const AfpProblem p{LinkStats{{db_to_linear(db(rng)), db_to_linear(db(rng))}, {u(rng), u(rng)}}, 3, 30, 20};
        const RVector x = random_interior(p, rng);
        const RVector fd = oracle::fd_gradient([&](const RVector& y) { return p.value(y); }, x, 1e-5);
        EXPECT_LE(oracle::rel_err(afp_gradient(p, x), fd), 1e-5);
    }
}

TEST(AfpHessian, SymmetricAndMatchesFiniteDifferences) {
    Rng rng(405);
    std::uniform_real_distribution<double> u(0.3, 0.999), db(0.0, 15.0);
    for (int t = 0; t < 50; ++t) {
        const AfpProblem p{LinkStats{{db_to_linear(db(rng)), db_to_linear(db(rng)), db_to_linear(db(rng))},
                                     {u(rng), u(rng), u(rng)}},
                           4, 30, 24};
        const RVector x = random_interior(p, rng);
        const RMatrix H = afp_hessian(p, x);
        EXPECT_EQ((H - H.transpose()).cwiseAbs().maxCoeff(), 0.0);
        const RMatrix fd = oracle::fd_jacobian([&](const RVector& y) { return afp_gradient(p, y); }, x, 1e-5);
        EXPECT_LE(oracle::rel_err(H, fd), 1e-3);
    }
}

TEST(AfpSolver, ReferenceSetConverges) {
    const AfpProblem p = reference_problem();
    const AfpPlan plan = afp_solve_continuous(p);
    EXPECT_LE(plan.gradient_norm, 1e-6);
    EXPECT_LE(plan.iterations, 10);
    for (const auto& start : detail::afp_warm_starts(p)) {
        const AfpPlan from = afp_solve_from(p, start);
        EXPECT_LE(from.iterations, 10);
        EXPECT_GE(from.objective_value, plan.objective_value);
    }
}

TEST(AfpSolver, ReferenceRunStaysInConvexRegion) {
    const AfpProblem p = reference_problem();
    const AfpPlan plan = afp_solve_from(p, detail::afp_warm_starts(p).front());
    ASSERT_GE(plan.iterates.size(), 2u);
    for (const RVector& x : plan.iterates) {
        Eigen::SelfAdjointEigenSolver<RMatrix> es(afp_hessian(p, x));
        EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8);
    }
}

TEST(AfpSolver, MatchesIntegerGridOptimum) {
    const AfpProblem p = reference_problem();
    const AfpPlan plan = afp_optimize(p.stats, p.M, p.T, p.Bs);
    double best = std::numeric_limits<double>::infinity();
    for (int w0 = 1; w0 <= p.T; ++w0)
        for (int w1 = 1; w1 <= p.T; ++w1)
            for (int b = 0; b <= p.Bs; ++b) {
                const std::vector<int> w = {w0, w1}, bits = {b, p.Bs - b};
                bool ok = true;
                for (int j = 0; j < 2; ++j)
                    ok = ok && std::lround(static_cast<double>(bits[j]) * w[j] / p.T) <= kMaxBitsPerLink;
                if (ok)
                    best = std::min(best, detail::afp_integer_objective(p, w, bits));
            }
    EXPECT_LE(plan.objective_value, best * 1.01);
}

TEST(AfpOptimize, SymmetricLinks) {
    for (double eps : {0.95, 0.97, 0.99, 0.999}) {
        const AfpPlan plan = afp_optimize(LinkStats{{5.0, 5.0}, {eps, eps}}, 3, 30, 20);
        EXPECT_EQ(plan.omega[0], plan.omega[1]) << eps;
        EXPECT_EQ(plan.bits_total[0], plan.bits_total[1]) << eps;
    }
}

TEST(AfpOptimize, SymmetryBreaksForFastFading) {
    // g is not convex: at lower correlation, spending the whole budget on one
    // link beats every symmetric plan.
    const AfpProblem p{LinkStats{{5.0, 5.0}, {0.9, 0.9}}, 3, 30, 20};
    const AfpPlan plan = afp_optimize(p.stats, p.M, p.T, p.Bs);
    EXPECT_NE(plan.bits_total[0], plan.bits_total[1]);
    for (int w = 1; w <= p.T; ++w)
        EXPECT_LT(plan.objective_value, detail::afp_integer_objective(p, {w, w}, {10, 10}));
}

TEST(AfpOptimize, UncorrelatedLinkGetsNoBits) {
    const AfpPlan plan = afp_optimize(LinkStats{{5.0, 5.0}, {1e-6, 0.93}}, 3, 30, 20);
    EXPECT_EQ(plan.bits_total[0], 0);
    EXPECT_EQ(plan.bits_total[1], 20);
}

TEST(AfpOptimize, InvariantsOnRandomInstances) {
    Rng rng(9);
    std::uniform_real_distribution<double> u(0.5, 0.999), db(0.0, 15.0);
    for (int t = 0; t < 40; ++t) {
        const LinkStats s{{db_to_linear(db(rng)), db_to_linear(db(rng))}, {u(rng), u(rng)}};
        const AfpPlan plan = afp_optimize(s, 3, 30, 20);
        EXPECT_EQ(plan.bits_total[0] + plan.bits_total[1], 20);
        for (std::size_t j = 0; j < 2; ++j) {
            EXPECT_GE(plan.omega[j], 1);
            EXPECT_LE(plan.omega[j], 30);
            EXPECT_GE(plan.bits_total[j], 0);
            EXPECT_LE(plan.bits_per_update[j], kMaxBitsPerLink);
        }
        // never worse than per-subframe feedback with the MFP split
        const AfpProblem p{s, 3, 30, 20};
        const std::vector<int> ones = {1, 1};
        for (int b = 0; b <= 20; ++b)
            EXPECT_LE(plan.objective_value, detail::afp_integer_objective(p, ones, {b, 20 - b}) * (1 + 1e-12));

        const AfpPlan again = afp_optimize(s, 3, 30, 20);
        EXPECT_EQ(again.omega, plan.omega);
        EXPECT_EQ(again.bits_total, plan.bits_total);
        EXPECT_EQ(again.objective_value, plan.objective_value);
    }
}

TEST(AfpOptimize, IterationLimitCarriesLastIterate) {
    const AfpProblem p = reference_problem();
    try {
        afp_optimize(p.stats, p.M, p.T, p.Bs, AfpSolverOptions{1e-6, 0});
        FAIL() << "expected AfpConvergenceError";
    } catch (const AfpConvergenceError& e) {
        EXPECT_EQ(e.last_iterate.size(), p.dim());
    }
}

TEST(AfpOptimize, OtherNetworkSizes) {
    const AfpPlan two = afp_optimize(LinkStats{{3.0}, {0.9}}, 2, 30, 10);
    EXPECT_EQ(two.bits_total, (std::vector<int>{10}));
    const AfpPlan four = afp_optimize(LinkStats{{3.0, 2.0, 1.0}, {0.9, 0.92, 0.95}}, 4, 30, 30);
    EXPECT_EQ(four.bits_total[0] + four.bits_total[1] + four.bits_total[2], 30);
    EXPECT_THROW(afp_optimize(LinkStats{{3.0, 2.0}, {0.9, 0.9}}, 4, 30, 30), UnsupportedConfiguration);
    EXPECT_THROW(afp_optimize(LinkStats{{3.0, 2.0}, {0.9, 0.9}}, 3, 0, 30), std::invalid_argument);
}

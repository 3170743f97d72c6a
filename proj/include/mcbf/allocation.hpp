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

#ifndef MCBF_ALLOCATION_HPP
#define MCBF_ALLOCATION_HPP

#include "common.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

namespace mcbf {

/// Power and one-step correlation of the K-1 interfering links of one user,
/// in ascending station order with the user's own station skipped.
struct LinkStats {
    std::vector<double> mu;
    std::vector<double> eps;

    std::size_t count() const { return mu.size(); }

    void validate() const {
        if (mu.size() != eps.size() || mu.empty())
            throw std::invalid_argument("LinkStats: mu and eps must be nonempty and of equal length");
        for (std::size_t j = 0; j < mu.size(); ++j) {
            if (!(mu[j] > 0.0) || !std::isfinite(mu[j]))
                throw std::invalid_argument("LinkStats: mu must be positive");
            if (!(std::abs(eps[j]) <= 1.0))
                throw std::invalid_argument("LinkStats: |eps| must be <= 1");
        }
    }
};

enum class AllocationScheme { MfpAdaptive, MfpEqual };

struct BitAllocation {
    std::vector<int> bits;
    AllocationScheme scheme = AllocationScheme::MfpAdaptive;

    int total() const { return std::accumulate(bits.begin(), bits.end(), 0); }
};

/// Rate-loss surrogate sum_j mu_j eps_j^2 2^{-B_j/(M-1)}.
inline double mfp_objective(std::span<const double> bits, const LinkStats& stats, int M) {
    if (bits.size() != stats.count())
        throw std::invalid_argument("mfp_objective: bits and stats lengths differ");
    double g = 0.0;
    for (std::size_t j = 0; j < bits.size(); ++j)
        g += stats.mu[j] * stats.eps[j] * stats.eps[j] * std::exp2(-bits[j] / (M - 1.0));
    return g;
}

inline double mfp_objective(std::span<const int> bits, const LinkStats& stats, int M) {
    std::vector<double> b(bits.begin(), bits.end());
    return mfp_objective(std::span<const double>(b), stats, M);
}

/*
 * Closed-form stationary point of the MFP objective under sum_j B_j = Bs:
 *
 *   B_j = Bs/(M-1) + (M-1) log2( a_j / prod_l a_l^{1/(M-1)} ),  a_j = mu_j eps_j^2
 *
 * Links with a_j = 0 do not depend on B and get 0 bits; the remaining n
 * links share Bs as Bs/n + (M-1)(log2 a_j - mean log2 a), which is the same
 * expression when n = M-1. Values may be negative; see integerize().
 */
inline std::vector<double> mfp_allocate_real(const LinkStats& stats, int M, int Bs) {
    stats.validate();
    if (static_cast<std::size_t>(M) != stats.count() + 1)
        throw UnsupportedConfiguration("mfp_allocate_real: requires M = K");
    if (Bs < 0)
        throw std::invalid_argument("mfp_allocate_real: Bs must be >= 0");

    const std::size_t n = stats.count();
    std::vector<double> out(n, 0.0);
    std::vector<std::size_t> live;
    double mean_log = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double a = stats.mu[j] * stats.eps[j] * stats.eps[j];
        if (a > 0.0) {
            live.push_back(j);
            mean_log += std::log2(a);
        }
    }
    if (live.empty()) {
        std::fill(out.begin(), out.end(), static_cast<double>(Bs) / n);
        return out;
    }
    mean_log /= static_cast<double>(live.size());
    for (auto j : live) {
        const double a = stats.mu[j] * stats.eps[j] * stats.eps[j];
        out[j] = static_cast<double>(Bs) / live.size() + (M - 1.0) * (std::log2(a) - mean_log);
    }
    return out;
}

/*
 * Integer split of `budget` over links minimizing a separable cost.
 *
 * Starts from `start` clamped to [0, cap], adds (or removes) one bit at a
 * time where it helps (hurts) the cost most, then runs single-bit exchanges
 * between links until none lowers the cost. For convex per-link costs the
 * result is the integer optimum. Ties go to the lowest link index.
 *
 * cost(j, b) is the cost of link j holding b bits.
 */
template <typename Cost>
std::vector<int> allocate_integer(std::vector<int> start, int budget, std::span<const int> caps, Cost&& cost) {
    const std::size_t n = start.size();
    if (caps.size() != n)
        throw std::invalid_argument("allocate_integer: caps length mismatch");
    long cap_total = 0;
    for (std::size_t j = 0; j < n; ++j) {
        start[j] = std::clamp(start[j], 0, caps[j]);
        cap_total += caps[j];
    }
    if (budget < 0 || budget > cap_total)
        throw std::invalid_argument("allocate_integer: budget infeasible under per-link caps");

    int total = std::accumulate(start.begin(), start.end(), 0);
    while (total < budget) {
        std::size_t best = n;
        double gain = -std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (start[j] >= caps[j])
                continue;
            const double d = cost(j, start[j]) - cost(j, start[j] + 1);
            if (d > gain) {
                gain = d;
                best = j;
            }
        }
        ++start[best];
        ++total;
    }
    while (total > budget) {
        std::size_t best = n;
        double loss = std::numeric_limits<double>::infinity();
        for (std::size_t j = 0; j < n; ++j) {
            if (start[j] <= 0)
                continue;
            const double d = cost(j, start[j] - 1) - cost(j, start[j]);
            if (d < loss) {
                loss = d;
                best = j;
            }
        }
        --start[best];
        --total;
    }

    for (int pass = 0; pass < 64 * budget + 64; ++pass) {
        std::size_t from = n, to = n;
        double best_gain = 0.0;
        for (std::size_t d = 0; d < n; ++d) {
            if (start[d] <= 0)
                continue;
            const double release = cost(d, start[d]) - cost(d, start[d] - 1);
            for (std::size_t r = 0; r < n; ++r) {
                if (r == d || start[r] >= caps[r])
                    continue;
                const double gain = release + cost(r, start[r]) - cost(r, start[r] + 1);
                const double scale = std::abs(cost(d, start[d])) + std::abs(cost(r, start[r]));
                if (gain > best_gain && gain > 1e-14 * scale) {
                    best_gain = gain;
                    from = d;
                    to = r;
                }
            }
        }
        if (from == n)
            break;
        --start[from];
        ++start[to];
    }
    return start;
}

/// Nonnegative integer bits summing to Bs, refined against mfp_objective.
inline BitAllocation integerize(std::span<const double> raw, const LinkStats& stats, int M, int Bs) {
    if (raw.size() != stats.count())
        throw std::invalid_argument("integerize: raw and stats lengths differ");
    std::vector<int> start(raw.size());
    for (std::size_t j = 0; j < raw.size(); ++j)
        start[j] = static_cast<int>(std::floor(std::max(0.0, raw[j])));
    const std::vector<int> caps(raw.size(), kMaxBitsPerLink);
    auto cost = [&](std::size_t j, int b) {
        return stats.mu[j] * stats.eps[j] * stats.eps[j] * std::exp2(-b / (M - 1.0));
    };
    return {allocate_integer(std::move(start), Bs, caps, cost), AllocationScheme::MfpAdaptive};
}

inline BitAllocation mfp_allocate(const LinkStats& stats, int M, int Bs) {
    const auto raw = mfp_allocate_real(stats, M, Bs);
    return integerize(raw, stats, M, Bs);
}

/// floor(Bs/(K-1)) bits per link; the remainder goes to the lowest indices.
inline BitAllocation equal_allocate(int Bs, int K) {
    if (K < 2)
        throw std::invalid_argument("equal_allocate: K must be >= 2");
    if (Bs < 0)
        throw std::invalid_argument("equal_allocate: Bs must be >= 0");
    const int n = K - 1;
    std::vector<int> bits(static_cast<std::size_t>(n), Bs / n);
    for (int j = 0; j < Bs % n; ++j)
        ++bits[static_cast<std::size_t>(j)];
    return {std::move(bits), AllocationScheme::MfpEqual};
}

} // namespace mcbf

#endif

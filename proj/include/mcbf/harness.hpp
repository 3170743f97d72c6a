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

#ifndef MCBF_HARNESS_HPP
#define MCBF_HARNESS_HPP

#include "afp.hpp"
#include "allocation.hpp"
#include "codebook.hpp"
#include "common.hpp"
#include "fading.hpp"
#include "zf.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace mcbf {

enum class SchemeId { PerfectCsi = 0, MfpAdaptive = 1, MfpEqual = 2, Afp = 3 };

inline constexpr std::array<SchemeId, 4> kAllSchemes = {SchemeId::PerfectCsi, SchemeId::MfpAdaptive,
                                                        SchemeId::MfpEqual, SchemeId::Afp};

inline std::string_view scheme_name(SchemeId s) {
    switch (s) {
    case SchemeId::PerfectCsi: return "perfect-csi";
    case SchemeId::MfpAdaptive: return "mfp-adaptive";
    case SchemeId::MfpEqual: return "mfp-equal";
    case SchemeId::Afp: return "afp";
    }
    return "unknown";
}

inline std::optional<SchemeId> parse_scheme(std::string_view name) {
    for (auto s : kAllSchemes)
        if (scheme_name(s) == name)
            return s;
    return std::nullopt;
}

/// Interfering-link statistics of `user`: stations in ascending order, own skipped.
inline LinkStats link_stats(const LinkGrid<double>& mu, const CorrelationTable& corr, std::size_t user) {
    LinkStats s;
    for (std::size_t j = 0; j < mu.size(); ++j)
        if (j != user) {
            s.mu.push_back(mu(user, j));
            s.eps.push_back(corr.eps(user, j));
        }
    return s;
}

/// Who feeds back what: per (user, station) codebook bits and update period.
struct FeedbackSchedule {
    SchemeId scheme = SchemeId::PerfectCsi;
    LinkGrid<int> bits;
    LinkGrid<int> period;
    // Per-user allocation detail, filled for the scheme that produced it.
    std::vector<BitAllocation> mfp;
    std::vector<AfpPlan> afp;
};

/// Allocation for every user at one power point. Propagates AfpConvergenceError.
inline FeedbackSchedule plan_scheme(const NetworkConfig& cfg, SchemeId scheme, const LinkGrid<double>& mu,
                                    const CorrelationTable& corr) {
    const auto k = static_cast<std::size_t>(cfg.K);
    FeedbackSchedule out{scheme, LinkGrid<int>(k, 0), LinkGrid<int>(k, 1), {}, {}};
    if (scheme == SchemeId::PerfectCsi)
        return out;

    for (std::size_t i = 0; i < k; ++i) {
        const LinkStats stats = link_stats(mu, corr, i);
        std::vector<int> bits, period(k - 1, 1);
        if (scheme == SchemeId::MfpAdaptive) {
            out.mfp.push_back(mfp_allocate(stats, cfg.M, cfg.Bs));
            bits = out.mfp.back().bits;
        } else if (scheme == SchemeId::MfpEqual) {
            out.mfp.push_back(equal_allocate(cfg.Bs, cfg.K));
            bits = out.mfp.back().bits;
        } else {
            out.afp.push_back(afp_optimize(stats, cfg.M, cfg.T, cfg.Bs));
            bits = out.afp.back().bits_per_update;
            period = out.afp.back().omega;
        }
        std::size_t r = 0;
        for (std::size_t j = 0; j < k; ++j)
            if (j != i) {
                out.bits(i, j) = bits[r];
                out.period(i, j) = period[r];
                ++r;
            }
    }
    return out;
}

using CodebookSet = LinkGrid<Codebook>;

/// One independent codebook per interfering link, sized by the schedule.
inline CodebookSet make_codebooks(const FeedbackSchedule& schedule, int M, Rng& rng) {
    const std::size_t k = schedule.bits.size();
    CodebookSet set(k);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            if (i != j)
                set(i, j) = generate_codebook(rng, M, schedule.bits(i, j));
    return set;
}

struct TrialResult {
    SchemeId scheme = SchemeId::PerfectCsi;
    std::vector<double> sum_rates; // one per subframe n = 1..T
    double mean = 0.0;
    double max_cross_leakage = 0.0; // max |hbar_ij^H b_j|^2, i != j, over the horizon
    int feedback_count = 0;         // quantized directions fed back over the horizon

    bool operator==(const TrialResult&) const = default;
};

namespace detail {

inline CVector unit(const CVector& h) { return h / h.norm(); }

/// Beamformer of station j from the directions of every other user's channel from j.
inline Beamformer station_beamformer(const LinkGrid<CVector>& directions, std::size_t j) {
    const std::size_t k = directions.size();
    std::vector<CVector> rows;
    rows.reserve(k - 1);
    for (std::size_t i = 0; i < k; ++i)
        if (i != j)
            rows.push_back(directions(i, j));
    return nullspace_direction(stack_interference(rows, j, k));
}

} // namespace detail

/*
 * One Monte Carlo realization over the horizon n = 1..T.
 *
 * Perfect CSI rebuilds every beamformer from the true directions each
 * subframe. Limited-feedback schemes quantize link (i, j) when n = 1 or n is
 * a multiple of its period, keep the last quantized direction otherwise, and
 * rebuild a station's beamformer only when one of its inputs changed.
 * `cfg.mu` supplies the powers; `codebooks` may be null for perfect CSI.
 */
inline TrialResult run_trial(const NetworkConfig& cfg, const FeedbackSchedule& schedule, const CodebookSet* codebooks,
                             Rng& rng) {
    const auto k = static_cast<std::size_t>(cfg.K);
    const bool perfect = schedule.scheme == SchemeId::PerfectCsi;
    if (!perfect && (codebooks == nullptr || codebooks->size() != k))
        throw std::invalid_argument("run_trial: limited-feedback scheme needs a K x K codebook set");
    if (schedule.bits.size() != k || schedule.period.size() != k)
        throw std::invalid_argument("run_trial: schedule does not match K");

    const CorrelationTable corr = correlation_table(cfg);
    ChannelState state = init_channels(rng, cfg.M, cfg.K);

    TrialResult out;
    out.scheme = schedule.scheme;
    out.sum_rates.reserve(static_cast<std::size_t>(cfg.T));

    LinkGrid<CVector> directions(k);
    std::vector<Beamformer> beams(k);
    std::vector<CVector> h_row(k);
    std::vector<double> mu_row(k), sinrs(k);

    for (int n = 1; n <= cfg.T; ++n) {
        state = evolve(state, corr, rng);

        std::vector<bool> dirty(k, false);
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) {
                if (i == j)
                    continue;
                if (perfect) {
                    directions(i, j) = detail::unit(state.h(i, j));
                    dirty[j] = true;
                } else if (n == 1 || n % schedule.period(i, j) == 0) {
                    directions(i, j) = quantize(detail::unit(state.h(i, j)), (*codebooks)(i, j)).vector;
                    dirty[j] = true;
                    ++out.feedback_count;
                }
            }
        for (std::size_t j = 0; j < k; ++j)
            if (dirty[j])
                beams[j] = detail::station_beamformer(directions, j);

        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t j = 0; j < k; ++j) {
                h_row[j] = state.h(i, j);
                mu_row[j] = cfg.mu(i, j);
                if (j != i)
                    out.max_cross_leakage =
                        std::max(out.max_cross_leakage, std::norm(detail::unit(state.h(i, j)).dot(beams[j].b)));
            }
            sinrs[i] = perfect ? sinr_perfect(state.h(i, i), beams[i], cfg.mu(i, i))
                               : sinr_delayed(h_row, beams, mu_row, i);
        }
        out.sum_rates.push_back(sum_rate(sinrs));
    }
    out.mean = pairwise_sum(out.sum_rates) / static_cast<double>(out.sum_rates.size());
    return out;
}

struct SweepRow {
    double mu11_db = 0.0;
    SchemeId scheme = SchemeId::PerfectCsi;
    double mean_rate = 0.0;
    double std_err = 0.0;
    int trials = 0;

    bool operator==(const SweepRow&) const = default;
};

/// Sort key of the CSV output: power first, then scheme name.
inline bool sweep_row_less(const SweepRow& a, const SweepRow& b) {
    if (a.mu11_db != b.mu11_db)
        return a.mu11_db < b.mu11_db;
    return scheme_name(a.scheme) < scheme_name(b.scheme);
}

inline constexpr std::uint64_t kTrialStreamTag = 0x7472;
inline constexpr std::uint64_t kCodebookStreamTag = 0x6362;

inline Rng trial_stream(std::uint64_t seed, std::size_t power_index, SchemeId scheme, std::size_t trial) {
    return derive_stream(seed, {power_index, static_cast<std::uint64_t>(scheme), kTrialStreamTag, trial});
}

inline Rng codebook_stream(std::uint64_t seed, std::size_t power_index, SchemeId scheme, std::size_t batch) {
    return derive_stream(seed, {power_index, static_cast<std::uint64_t>(scheme), kCodebookStreamTag, batch});
}

/// Allocation chosen at one sweep point, reported before its trials run.
struct SweepPoint {
    std::size_t power_index = 0;
    double mu11_db = 0.0;
    const FeedbackSchedule* schedule = nullptr;
};

struct SweepOptions {
    unsigned threads = 0; // 0: hardware concurrency
    std::function<void(const SweepPoint&)> on_plan;
};

/// Per-trial means for one (power, scheme) point; trial t always uses the
/// same streams regardless of threading.
inline std::vector<double> run_point_trials(const NetworkConfig& cfg, std::size_t power_index,
                                            const FeedbackSchedule& schedule, unsigned threads) {
    const auto trials = static_cast<std::size_t>(cfg.trials);
    const auto refresh = static_cast<std::size_t>(cfg.codebook_refresh);
    const bool perfect = schedule.scheme == SchemeId::PerfectCsi;

    std::vector<CodebookSet> books;
    if (!perfect)
        for (std::size_t b = 0; b * refresh < trials; ++b) {
            Rng rng = codebook_stream(cfg.seed, power_index, schedule.scheme, b);
            books.push_back(make_codebooks(schedule, cfg.M, rng));
        }

    std::vector<double> means(trials, 0.0);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t = next++; t < trials; t = next++) {
            Rng rng = trial_stream(cfg.seed, power_index, schedule.scheme, t);
            means[t] = run_trial(cfg, schedule, perfect ? nullptr : &books[t / refresh], rng).mean;
        }
    };
    if (threads == 0)
        threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, trials));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < threads; ++w)
            pool.emplace_back(worker);
    }
    return means;
}

inline SweepRow summarize(double mu11_db, SchemeId scheme, const std::vector<double>& means) {
    const double n = static_cast<double>(means.size());
    const double mean = pairwise_sum(means) / n;
    std::vector<double> sq(means.size());
    for (std::size_t t = 0; t < means.size(); ++t)
        sq[t] = (means[t] - mean) * (means[t] - mean);
    const double se = means.size() > 1 ? std::sqrt(pairwise_sum(sq) / (n - 1.0)) / std::sqrt(n) : 0.0;
    return {mu11_db, scheme, mean, se, static_cast<int>(means.size())};
}

/*
 * Power sweep: for every mu11 point the cross powers follow the configured
 * offsets, allocations are recomputed from (mu, eps) once, and `cfg.trials`
 * trials run per scheme with all codebooks regenerated every
 * `cfg.codebook_refresh` trials. Rows come back sorted by (mu11_db, scheme name).
 */
inline std::vector<SweepRow> run_sweep(const NetworkConfig& cfg, std::span<const SchemeId> schemes,
                                       const SweepOptions& opt = {}) {
    cfg.validate();
    std::vector<SweepRow> rows;
    const auto points = cfg.sweep_points_db();
    for (std::size_t p = 0; p < points.size(); ++p) {
        NetworkConfig point = cfg;
        point.mu = cfg.powers_at(points[p]);
        const CorrelationTable corr = correlation_table(point);
        for (auto s : schemes) {
            FeedbackSchedule schedule;
            try {
                schedule = plan_scheme(point, s, point.mu, corr);
            } catch (const AfpConvergenceError& e) {
                throw AfpConvergenceError("mu11 = " + std::to_string(points[p]) + " dB, " +
                                              std::string(scheme_name(s)) + ": " + e.what(),
                                          e.last_iterate);
            }
            if (opt.on_plan)
                opt.on_plan({p, points[p], &schedule});
            rows.push_back(summarize(points[p], s, run_point_trials(point, p, schedule, opt.threads)));
        }
    }
    std::stable_sort(rows.begin(), rows.end(), sweep_row_less);
    return rows;
}

} // namespace mcbf

#endif

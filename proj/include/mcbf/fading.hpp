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

#ifndef MCBF_FADING_HPP
#define MCBF_FADING_HPP

#include "common.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace mcbf {

/*
 * Bessel function of the first kind, order zero.
 *
 * |x| <= 12 uses the ascending power series, summed until a term drops
 * below 1e-16. Larger arguments use the Hankel asymptotic expansion, which
 * at x = 12 already resolves J0 to better than 1e-12.
 */
inline double bessel_j0(double x) {
    if (!std::isfinite(x))
        throw std::invalid_argument("bessel_j0: argument must be finite");
    x = std::abs(x);

    if (x <= 12.0) {
        const double q = 0.25 * x * x;
        double term = 1.0;
        double sum = 1.0;
        for (int k = 1; k < 200; ++k) {
            term *= -q / (static_cast<double>(k) * static_cast<double>(k));
            sum += term;
            if (std::abs(term) < 1e-16)
                break;
        }
        return sum;
    }

    // u_k = prod_{m<=k} (-(2m-1)^2) / (k! (8x)^k); P takes even k, Q odd k.
    double p = 1.0, q = 0.0, u = 1.0, prev = 1.0;
    for (int k = 1; k < 60; ++k) {
        const double odd = 2.0 * k - 1.0;
        u *= -(odd * odd) / (k * 8.0 * x);
        if (std::abs(u) > std::abs(prev) || std::abs(u) < 1e-17)
            break;
        const double sign = ((k / 2) % 2 == 0) ? 1.0 : -1.0;
        if (k % 2 == 0)
            p += sign * u;
        else
            q += sign * u;
        prev = u;
    }
    const double chi = x - 0.25 * std::numbers::pi;
    return std::sqrt(2.0 / (std::numbers::pi * x)) * (p * std::cos(chi) - q * std::sin(chi));
}

/// Clarke-model one-step temporal correlation J0(2 pi f_d Ts), f_d = v fc / c.
inline double correlation_coefficient(double velocity_mps, double fc_hz, double c_mps, double ts_s) {
    if (!(c_mps > 0.0) || !std::isfinite(c_mps))
        throw std::invalid_argument("correlation_coefficient: propagation speed must be positive");
    if (!(velocity_mps >= 0.0) || !(fc_hz >= 0.0) || !(ts_s >= 0.0) || !std::isfinite(velocity_mps) ||
        !std::isfinite(fc_hz) || !std::isfinite(ts_s))
        throw std::invalid_argument("correlation_coefficient: inputs must be finite and nonnegative");
    const double doppler = velocity_mps * fc_hz / c_mps;
    return bessel_j0(2.0 * std::numbers::pi * doppler * ts_s);
}

inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr double kDefaultCarrierHz = 2.0e9;

inline double kmh_to_mps(double kmh) { return kmh / 3.6; }

/// Scenario parameters. Channel index convention throughout the library:
/// h(i, j) is the channel seen by user i from station j, mu(i, j) the
/// corresponding power and v(i, j) the relative velocity of that link.
struct NetworkConfig {
    int M = 3;
    int K = 3;
    LinkGrid<double> mu;        // linear
    LinkGrid<double> v;         // m/s
    double fc = kDefaultCarrierHz;
    double c = kSpeedOfLight;
    double Ts = 5e-3;           // s
    int T = 30;
    int Bs = 20;
    int trials = 500;
    int codebook_refresh = 50;
    std::uint64_t seed = 1;

    // Power sweep: mu(i,i) = start..stop dB, mu(i, i+r mod K) = mu11 - cross_offsets_db[r-1].
    double sweep_start_db = 10.0;
    double sweep_stop_db = 19.0;
    double sweep_step_db = 1.0;
    std::vector<double> cross_offsets_db;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const {
        if (M < 2)
            throw std::invalid_argument("M: antenna count must be >= 2");
        if (K < 2)
            throw std::invalid_argument("K: cell count must be >= 2");
        if (M != K)
            throw UnsupportedConfiguration("M, K: zero-forcing with a unique nullspace direction requires M = K");
        const auto k = static_cast<std::size_t>(K);
        if (mu.size() != k || v.size() != k)
            throw std::invalid_argument("mu, v: link matrices must be K x K");
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j) {
                if (!(mu(i, j) > 0.0) || !std::isfinite(mu(i, j)))
                    throw std::invalid_argument("mu: all power constraints must be positive");
                if (!(v(i, j) >= 0.0) || !std::isfinite(v(i, j)))
                    throw std::invalid_argument("v: velocities must be nonnegative");
            }
        if (!(fc > 0.0))
            throw std::invalid_argument("fc: carrier frequency must be positive");
        if (!(c > 0.0))
            throw std::invalid_argument("c: propagation speed must be positive");
        if (!(Ts > 0.0))
            throw std::invalid_argument("Ts: subframe duration must be positive");
        if (T < 1)
            throw std::invalid_argument("T: horizon must be >= 1 subframe");
        if (Bs < 0)
            throw std::invalid_argument("Bs: bit budget must be >= 0");
        if (Bs > kMaxBitsPerLink * (K - 1))
            throw std::invalid_argument("Bs: bit budget exceeds the per-link cap times K-1");
        if (trials < 1)
            throw std::invalid_argument("trials: must be >= 1");
        if (codebook_refresh < 1)
            throw std::invalid_argument("codebook_refresh: must be >= 1");
        if (cross_offsets_db.size() != k - 1)
            throw std::invalid_argument("cross_offsets_db: need K-1 offsets");
        if (!(sweep_step_db > 0.0) || sweep_stop_db < sweep_start_db)
            throw std::invalid_argument("sweep: need step > 0 and stop >= start");
    }

    /// Power grid for one sweep point (diagonal mu11_db, cyclic cross offsets).
    LinkGrid<double> powers_at(double mu11_db) const {
        const auto k = static_cast<std::size_t>(K);
        LinkGrid<double> out(k, 0.0);
        for (std::size_t i = 0; i < k; ++i) {
            out(i, i) = db_to_linear(mu11_db);
            for (std::size_t r = 1; r < k; ++r)
                out(i, (i + r) % k) = db_to_linear(mu11_db - cross_offsets_db[r - 1]);
        }
        return out;
    }

    std::vector<double> sweep_points_db() const {
        std::vector<double> pts;
        for (int n = 0;; ++n) {
            const double p = sweep_start_db + n * sweep_step_db;
            if (p > sweep_stop_db + 1e-9)
                break;
            pts.push_back(p);
        }
        return pts;
    }
};

/// Per-link cross offsets {2, 3, 4, ...} dB; for K = 3 this is the
/// mu12 = mu11 - 2, mu13 = mu11 - 3 layout.
inline std::vector<double> default_cross_offsets_db(int k) {
    std::vector<double> out;
    for (int r = 1; r < k; ++r)
        out.push_back(1.0 + r);
    return out;
}

/// Link velocity v(i, j) = velocity of user j.
inline LinkGrid<double> velocities_from_users(const std::vector<double>& user_mps) {
    const std::size_t k = user_mps.size();
    LinkGrid<double> v(k, 0.0);
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            v(i, j) = user_mps[j];
    return v;
}

struct CorrelationTable {
    LinkGrid<double> eps;

    std::size_t size() const { return eps.size(); }
};

inline CorrelationTable correlation_table(const NetworkConfig& cfg) {
    const auto k = static_cast<std::size_t>(cfg.K);
    CorrelationTable out{LinkGrid<double>(k, 1.0)};
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            out.eps(i, j) = correlation_coefficient(cfg.v(i, j), cfg.fc, cfg.c, cfg.Ts);
    return out;
}

/// All K x K channel vectors at time index n.
struct ChannelState {
    LinkGrid<CVector> h;
    int n = 0;

    std::size_t cells() const { return h.size(); }
    Eigen::Index antennas() const { return h.size() ? h(0, 0).size() : 0; }
};

/// Stationary start: every entry i.i.d. CN(0,1).
inline ChannelState init_channels(Rng& rng, int M, int K) {
    if (M < 2 || K < 2)
        throw std::invalid_argument("init_channels: M and K must be >= 2");
    const auto k = static_cast<std::size_t>(K);
    ChannelState s{LinkGrid<CVector>(k), 0};
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j)
            s.h(i, j) = complex_normal_vector(rng, static_cast<std::size_t>(M));
    return s;
}

/// One first-order Gauss-Markov step: h <- eps h + sqrt(1 - eps^2) w.
inline ChannelState evolve(const ChannelState& state, const CorrelationTable& corr, Rng& rng) {
    const std::size_t k = state.cells();
    if (corr.size() != k)
        throw std::invalid_argument("evolve: correlation table does not match channel grid");
    ChannelState next{LinkGrid<CVector>(k), state.n + 1};
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) {
            const double e = corr.eps(i, j);
            const double innovation = std::sqrt(std::max(0.0, 1.0 - e * e));
            CVector h = e * state.h(i, j);
            for (Eigen::Index m = 0; m < h.size(); ++m)
                h[m] += innovation * complex_normal(rng);
            next.h(i, j) = std::move(h);
        }
    return next;
}

} // namespace mcbf

#endif

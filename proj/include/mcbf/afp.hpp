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

#ifndef MCBF_AFP_HPP
#define MCBF_AFP_HPP

#include "allocation.hpp"
#include "common.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcbf {

/*
 * Adaptive feedback period (AFP) planning.
 *
 * Each interfering link j of a user gets an update period omega_j (in
 * subframes) and a share B_j of the horizon bit budget, sum_j B_j = Bs. The
 * rate-loss surrogate is
 *
 *   g = sum_j mu_j { rho_j^(omega_j - 1) ( M/(M-1) 2^(-omega_j B_j / ((M-1) T)) - 1 ) + 1 },
 *
 * with rho_j = eps_j^2. The budget constraint is removed by substituting
 * B_n = Bs - sum_{j<n} B_j, leaving the reduced variable
 *
 *   x = [omega_0 .. omega_{n-1}, B_0 .. B_{n-2}]
 *
 * on the set omega in [1, T], B_j >= 0, sum_{j<n} B_j <= Bs.
 */

namespace detail {

/// Per-link term of g and its partial derivatives in (omega, B).
struct AfpTerm {
    double f, f_w, f_b, f_ww, f_bb, f_wb;
};

/// rho is floored at 1e-24 (|eps| >= 1e-12) so log(rho) stays finite.
inline AfpTerm afp_term(double mu, double eps, double omega, double bits, int M, int T) {
    const double rho = std::max(eps * eps, 1e-24);
    const double L = std::log(rho);
    const double gam = static_cast<double>(M) / (M - 1);
    const double kap = std::numbers::ln2 / ((M - 1.0) * T);
    const double decay = std::pow(rho, omega - 1.0);
    const double E = std::exp(-kap * omega * bits);
    const double lead = gam * E - 1.0;

    AfpTerm t{};
    t.f = mu * (decay * lead + 1.0);
    t.f_w = mu * decay * (L * lead - gam * kap * bits * E);
    t.f_b = -mu * decay * gam * kap * omega * E;
    t.f_ww = mu * decay * (L * L * lead - 2.0 * L * gam * kap * bits * E + gam * kap * kap * bits * bits * E);
    t.f_bb = mu * decay * gam * kap * kap * omega * omega * E;
    t.f_wb = -mu * decay * gam * kap * E * (1.0 + L * omega - kap * omega * bits);
    return t;
}

/// Euclidean projection onto {y >= 0, sum y <= s}.
inline RVector project_capped_simplex(const RVector& x, double s) {
    RVector y = x.cwiseMax(0.0);
    if (y.sum() <= s)
        return y;
    std::vector<double> sorted(x.data(), x.data() + x.size());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double acc = 0.0, tau = 0.0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        acc += sorted[k];
        const double t = (acc - s) / static_cast<double>(k + 1);
        if (k + 1 == sorted.size() || sorted[k + 1] <= t) {
            tau = t;
            break;
        }
    }
    return (x.array() - tau).cwiseMax(0.0).matrix();
}

} // namespace detail

/// Exact evaluation of g on the full (unsubstituted) variables.
inline double afp_objective(std::span<const double> omega, std::span<const double> bits_total,
                            const LinkStats& stats, int M, int T) {
    if (omega.size() != stats.count() || bits_total.size() != stats.count())
        throw std::invalid_argument("afp_objective: lengths differ from link count");
    double g = 0.0;
    for (std::size_t j = 0; j < omega.size(); ++j)
        g += detail::afp_term(stats.mu[j], stats.eps[j], omega[j], bits_total[j], M, T).f;
    return g;
}

/// The substituted, box-and-simplex constrained AFP problem for one user.
struct AfpProblem {
    LinkStats stats;
    int M = 3;
    int T = 30;
    int Bs = 20;

    std::size_t links() const { return stats.count(); }
    Eigen::Index dim() const { return static_cast<Eigen::Index>(2 * links() - 1); }

    double omega(const RVector& x, std::size_t j) const { return x[static_cast<Eigen::Index>(j)]; }

    double bits(const RVector& x, std::size_t j) const {
        const auto n = static_cast<Eigen::Index>(links());
        if (static_cast<Eigen::Index>(j) + 1 < n)
            return x[n + static_cast<Eigen::Index>(j)];
        return Bs - x.tail(n - 1).sum();
    }

    /// Reduced point from full per-link values.
    RVector pack(std::span<const double> omega_full, std::span<const double> bits_full) const {
        const auto n = static_cast<Eigen::Index>(links());
        RVector x(dim());
        for (Eigen::Index j = 0; j < n; ++j)
            x[j] = omega_full[static_cast<std::size_t>(j)];
        for (Eigen::Index j = 0; j + 1 < n; ++j)
            x[n + j] = bits_full[static_cast<std::size_t>(j)];
        return x;
    }

    detail::AfpTerm term(const RVector& x, std::size_t j) const {
        return detail::afp_term(stats.mu[j], stats.eps[j], omega(x, j), bits(x, j), M, T);
    }

    double value(const RVector& x) const {
        double g = 0.0;
        for (std::size_t j = 0; j < links(); ++j)
            g += term(x, j).f;
        return g;
    }

    RVector project(const RVector& x) const {
        const auto n = static_cast<Eigen::Index>(links());
        RVector y(x.size());
        y.head(n) = x.head(n).cwiseMax(1.0).cwiseMin(static_cast<double>(T));
        if (n > 1)
            y.tail(n - 1) = detail::project_capped_simplex(x.tail(n - 1), Bs);
        return y;
    }

    /// ||x - P(x - grad)||, zero exactly at first-order stationary points.
    double projected_gradient_norm(const RVector& x, const RVector& grad) const {
        return (x - project(x - grad)).norm();
    }
};

/// Analytic gradient of the substituted g.
inline RVector afp_gradient(const AfpProblem& p, const RVector& x) {
    const auto n = static_cast<Eigen::Index>(p.links());
    RVector g = RVector::Zero(p.dim());
    const auto last = p.term(x, static_cast<std::size_t>(n - 1));
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto t = p.term(x, static_cast<std::size_t>(j));
        g[j] = t.f_w;
        if (j + 1 < n)
            g[n + j] = t.f_b - last.f_b;
    }
    return g;
}

/// Analytic Hessian of the substituted g; symmetric by construction.
inline RMatrix afp_hessian(const AfpProblem& p, const RVector& x) {
    const auto n = static_cast<Eigen::Index>(p.links());
    RMatrix H = RMatrix::Zero(p.dim(), p.dim());
    const auto last = p.term(x, static_cast<std::size_t>(n - 1));
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto t = p.term(x, static_cast<std::size_t>(j));
        H(j, j) = t.f_ww;
        if (j + 1 < n) {
            H(j, n + j) = H(n + j, j) = t.f_wb;
            H(n + j, n + j) = t.f_bb;
        }
    }
    // d/dB_k of the substituted last link: chain rule through B_n = Bs - sum B_k
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
        H(n - 1, n + k) -= last.f_wb;
        H(n + k, n - 1) -= last.f_wb;
        for (Eigen::Index l = 0; l + 1 < n; ++l)
            H(n + k, n + l) += last.f_bb;
    }
    return H;
}

struct AfpPlan {
    std::vector<int> omega;
    std::vector<int> bits_total;
    std::vector<int> bits_per_update;
    double objective_value = 0.0;
    int iterations = 0;

    // Solver diagnostics for the continuous relaxation.
    double gradient_norm = 0.0;
    std::vector<double> omega_continuous;
    std::vector<double> bits_continuous;
    std::vector<RVector> iterates; // accepted points, starting point first
};

class AfpConvergenceError : public std::runtime_error {
  public:
    AfpConvergenceError(const std::string& what, RVector last) : std::runtime_error(what), last_iterate(std::move(last)) {}
    RVector last_iterate;
};

struct AfpSolverOptions {
    double tolerance = 1e-6;
    int max_iterations = 100;
};

namespace detail {

/// omega_j minimizing link j's term over the integer grid 1..T at fixed bits.
inline double best_grid_period(const AfpProblem& p, std::size_t j, double bits) {
    double best = std::numeric_limits<double>::infinity(), omega = 1.0;
    for (int w = 1; w <= p.T; ++w) {
        const double f = afp_term(p.stats.mu[j], p.stats.eps[j], w, bits, p.M, p.T).f;
        if (f < best) {
            best = f;
            omega = w;
        }
    }
    return omega;
}

/*
 * Starting points: the equal bit split, then every link in turn holding the
 * whole budget. Periods are the per-link grid minimizers at those bits. g is
 * not convex in general (the -rho^(omega-1) part is concave in omega), so
 * the solver runs from each start and keeps the lowest minimum.
 */
inline std::vector<RVector> afp_warm_starts(const AfpProblem& p) {
    const std::size_t n = p.links();
    std::vector<std::vector<double>> splits;
    splits.emplace_back(n, static_cast<double>(p.Bs) / static_cast<double>(n));
    if (n > 1)
        for (std::size_t j = 0; j < n; ++j) {
            std::vector<double> b(n, 0.0);
            b[j] = p.Bs;
            splits.push_back(std::move(b));
        }
    std::vector<RVector> starts;
    for (const auto& bits : splits) {
        std::vector<double> omega(n);
        for (std::size_t j = 0; j < n; ++j)
            omega[j] = best_grid_period(p, j, bits[j]);
        starts.push_back(p.pack(omega, bits));
    }
    return starts;
}

/// Basis of {d : d_k = 0 for fixed k, sum over `sum_idx` of d = 0 if sum_active}.
inline RMatrix free_subspace(Eigen::Index dim, const std::vector<Eigen::Index>& fixed,
                             const std::vector<Eigen::Index>& sum_idx, bool sum_active) {
    const auto rows = static_cast<Eigen::Index>(fixed.size() + (sum_active ? 1 : 0));
    if (rows == 0)
        return RMatrix::Identity(dim, dim);
    RMatrix A = RMatrix::Zero(rows, dim);
    for (std::size_t r = 0; r < fixed.size(); ++r)
        A(static_cast<Eigen::Index>(r), fixed[r]) = 1.0;
    if (sum_active)
        for (auto k : sum_idx)
            A(rows - 1, k) = 1.0;
    Eigen::FullPivLU<RMatrix> lu(A);
    if (lu.rank() == dim)
        return RMatrix(dim, 0);
    return lu.kernel();
}

} // namespace detail

/*
 * Projected Newton method on the continuous relaxation.
 *
 * Each iteration fixes the bounds that are active with an outward-pointing
 * gradient, takes a Newton step in the remaining subspace (Hessian shifted by
 * lambda I, lambda = 1e-8 doubling, until its Cholesky factorization exists),
 * projects back onto the feasible set and backtracks by halving until the
 * Armijo condition with c = 1e-4 holds. Stops when the projected gradient
 * norm drops to `tolerance`.
 */
inline AfpPlan afp_solve_from(const AfpProblem& p, const RVector& start, const AfpSolverOptions& opt = {}) {
    const auto n = static_cast<Eigen::Index>(p.links());
    const Eigen::Index d = p.dim();

    RVector x = p.project(start);
    AfpPlan plan;
    plan.iterates.push_back(x);

    std::vector<Eigen::Index> bit_idx;
    for (Eigen::Index k = 0; k + 1 < n; ++k)
        bit_idx.push_back(n + k);

    for (int it = 0;; ++it) {
        const RVector G = afp_gradient(p, x);
        const double pg = p.projected_gradient_norm(x, G);
        if (pg <= opt.tolerance) {
            plan.iterations = it;
            plan.gradient_norm = pg;
            break;
        }
        if (it >= opt.max_iterations)
            throw AfpConvergenceError("afp_optimize: no convergence after " + std::to_string(opt.max_iterations) +
                                          " iterations (projected gradient norm " + std::to_string(pg) + ")",
                                      x);

        const double delta = std::min(1e-3, pg);
        std::vector<Eigen::Index> fixed;
        for (Eigen::Index j = 0; j < n; ++j) {
            const bool at_low = x[j] - 1.0 <= delta && G[j] > 0.0;
            const bool at_high = p.T - x[j] <= delta && G[j] < 0.0;
            if (at_low || at_high)
                fixed.push_back(j);
        }
        double bit_sum = 0.0, outward = 0.0;
        std::vector<Eigen::Index> free_bits;
        for (auto k : bit_idx) {
            bit_sum += x[k];
            if (x[k] <= delta && G[k] > 0.0)
                fixed.push_back(k);
            else {
                free_bits.push_back(k);
                outward -= G[k];
            }
        }
        const bool sum_active = !bit_idx.empty() && p.Bs - bit_sum <= delta && outward > 0.0 && !free_bits.empty();

        const RMatrix Z = detail::free_subspace(d, fixed, free_bits, sum_active);
        RVector step;
        if (Z.cols() > 0) {
            const RMatrix Hr = Z.transpose() * afp_hessian(p, x) * Z;
            const RVector gr = Z.transpose() * G;
            Eigen::LLT<RMatrix> llt(Hr);
            double lambda = 1e-8;
            while (llt.info() != Eigen::Success) {
                llt.compute(Hr + lambda * RMatrix::Identity(Hr.rows(), Hr.cols()));
                lambda *= 2.0;
            }
            step = -Z * llt.solve(gr);
        }
        if (step.size() == 0 || !(G.dot(step) < 0.0))
            step = p.project(x - G) - x;

        const double g0 = p.value(x);
        RVector next = x;
        bool accepted = false;
        for (double alpha = 1.0; alpha > 1e-12; alpha *= 0.5) {
            const RVector trial = p.project(x + alpha * step);
            const double decrease = G.dot(trial - x);
            if (p.value(trial) <= g0 + 1e-4 * decrease && decrease <= 0.0) {
                next = trial;
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            // Newton direction failed; fall back to a projected-gradient step.
            const RVector pgstep = p.project(x - G) - x;
            for (double alpha = 1.0; alpha > 1e-12; alpha *= 0.5) {
                const RVector trial = p.project(x + alpha * pgstep);
                if (p.value(trial) <= g0 + 1e-4 * G.dot(trial - x)) {
                    next = trial;
                    break;
                }
            }
        }
        x = next;
        plan.iterates.push_back(x);
    }

    for (Eigen::Index j = 0; j < n; ++j) {
        plan.omega_continuous.push_back(p.omega(x, static_cast<std::size_t>(j)));
        plan.bits_continuous.push_back(p.bits(x, static_cast<std::size_t>(j)));
    }
    plan.objective_value = p.value(x);
    return plan;
}

/// Best of afp_solve_from() over the warm starts; ties keep the earlier start.
inline AfpPlan afp_solve_continuous(const AfpProblem& p, const AfpSolverOptions& opt = {}) {
    std::optional<AfpPlan> best;
    for (const RVector& start : detail::afp_warm_starts(p)) {
        AfpPlan plan = afp_solve_from(p, start, opt);
        if (!best || plan.objective_value < best->objective_value)
            best = std::move(plan);
    }
    return std::move(*best);
}

namespace detail {

/// Integer bit shares for fixed integer periods, per-update size capped at 16 bits.
inline std::vector<int> afp_integer_bits(const AfpProblem& p, const std::vector<int>& omega,
                                         const std::vector<double>& bits_hint) {
    const std::size_t n = p.links();
    std::vector<int> caps(n), start(n);
    for (std::size_t j = 0; j < n; ++j) {
        int cap = p.Bs;
        while (cap > 0 && std::lround(static_cast<double>(cap) * omega[j] / p.T) > kMaxBitsPerLink)
            --cap;
        caps[j] = cap;
        start[j] = static_cast<int>(std::floor(std::max(0.0, bits_hint[j])));
    }
    auto cost = [&](std::size_t j, int b) {
        return afp_term(p.stats.mu[j], p.stats.eps[j], omega[j], b, p.M, p.T).f;
    };
    return allocate_integer(std::move(start), p.Bs, caps, cost);
}

inline double afp_integer_objective(const AfpProblem& p, const std::vector<int>& omega, const std::vector<int>& bits) {
    std::vector<double> w(omega.begin(), omega.end()), b(bits.begin(), bits.end());
    return afp_objective(w, b, p.stats, p.M, p.T);
}

} // namespace detail

/*
 * Joint period/bit plan for one user. Solves the continuous relaxation, rounds
 * each omega to the nearest integer in [1, T] and distributes integer bit
 * shares against g at those periods. The all-ones period plan (feedback every
 * subframe) is kept as a fallback when it scores lower after rounding.
 */
inline AfpPlan afp_optimize(const LinkStats& stats, int M, int T, int Bs, const AfpSolverOptions& opt = {}) {
    stats.validate();
    if (static_cast<std::size_t>(M) != stats.count() + 1)
        throw UnsupportedConfiguration("afp_optimize: requires M = K");
    if (T < 1)
        throw std::invalid_argument("afp_optimize: T must be >= 1");
    if (Bs < 0)
        throw std::invalid_argument("afp_optimize: Bs must be >= 0");

    const AfpProblem p{stats, M, T, Bs};
    AfpPlan plan = afp_solve_continuous(p, opt);

    const std::size_t n = p.links();
    std::vector<int> omega(n);
    for (std::size_t j = 0; j < n; ++j)
        omega[j] = std::clamp(static_cast<int>(std::lround(plan.omega_continuous[j])), 1, T);
    std::vector<int> bits = detail::afp_integer_bits(p, omega, plan.bits_continuous);
    double value = detail::afp_integer_objective(p, omega, bits);

    const std::vector<int> ones(n, 1);
    const std::vector<int> ones_bits = detail::afp_integer_bits(p, ones, std::vector<double>(n, 0.0));
    const double ones_value = detail::afp_integer_objective(p, ones, ones_bits);
    if (ones_value < value) {
        omega = ones;
        bits = ones_bits;
        value = ones_value;
    }

    plan.omega = omega;
    plan.bits_total = bits;
    plan.objective_value = value;
    plan.bits_per_update.resize(n);
    for (std::size_t j = 0; j < n; ++j)
        plan.bits_per_update[j] =
            std::min(kMaxBitsPerLink, static_cast<int>(std::lround(static_cast<double>(bits[j]) * omega[j] / T)));
    return plan;
}

} // namespace mcbf

#endif

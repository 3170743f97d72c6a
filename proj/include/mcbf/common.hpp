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

#ifndef MCBF_COMMON_HPP
#define MCBF_COMMON_HPP

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace mcbf {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

/// Raised when a configuration is structurally valid but outside what the
/// library models (e.g. M != K for zero-forcing nullspace extraction).
class UnsupportedConfiguration : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// Largest per-link codebook size exponent. A codebook of B bits stores
/// 2^B * M complex values.
inline constexpr int kMaxBitsPerLink = 16;

/// Dense K x K grid, row-major. Used for per-link quantities indexed by
/// (user, station).
template <typename T>
class LinkGrid {
  public:
    LinkGrid() = default;
    LinkGrid(std::size_t k, const T& fill) : k_(k), data_(k * k, fill) {}
    explicit LinkGrid(std::size_t k) : k_(k), data_(k * k) {}

    T& operator()(std::size_t user, std::size_t station) { return data_[user * k_ + station]; }
    const T& operator()(std::size_t user, std::size_t station) const { return data_[user * k_ + station]; }

    std::size_t size() const { return k_; }
    bool operator==(const LinkGrid&) const = default;

  private:
    std::size_t k_ = 0;
    std::vector<T> data_;
};

// ---- random streams -------------------------------------------------------

using Rng = std::mt19937_64;

/// splitmix64 finalizer.
inline constexpr std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Independent generator keyed by a master seed and a tuple of stream tags
/// (power index, scheme, trial, ...). Streams with different tag tuples are
/// statistically independent and do not depend on the order they are drawn.
inline Rng derive_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t h = mix64(seed);
    for (auto t : tags)
        h = mix64(h ^ mix64(t + 0x632be59bd9b4e019ULL));
    return Rng(h);
}

/// Draw from CN(0,1): variance 1/2 on each of the real and imaginary parts.
inline Complex complex_normal(Rng& rng) {
    std::normal_distribution<double> normal(0.0, std::numbers::sqrt2 / 2.0);
    const double re = normal(rng);
    const double im = normal(rng);
    return {re, im};
}

inline CVector complex_normal_vector(Rng& rng, std::size_t m) {
    CVector v(static_cast<Eigen::Index>(m));
    for (Eigen::Index k = 0; k < v.size(); ++k)
        v[k] = complex_normal(rng);
    return v;
}

// ---- small numerics -------------------------------------------------------

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

/// Pairwise (cascade) summation over a fixed index order.
inline double pairwise_sum(const double* x, std::size_t n) {
    if (n == 0)
        return 0.0;
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            s += x[k];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

inline double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

} // namespace mcbf

#endif

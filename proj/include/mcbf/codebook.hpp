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

#ifndef MCBF_CODEBOOK_HPP
#define MCBF_CODEBOOK_HPP

#include "common.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mcbf {

/// Random vector quantization codebook: 2^B isotropic unit vectors in C^M.
struct Codebook {
    int bits = 0;
    std::vector<CVector> vectors;

    std::size_t size() const { return vectors.size(); }
    Eigen::Index dimension() const { return vectors.empty() ? 0 : vectors.front().size(); }
};

struct QuantizedDirection {
    std::size_t index = 0;
    CVector vector;
    double fidelity = 0.0; // |hbar^H c|^2
};

inline Codebook generate_codebook(Rng& rng, int M, int B) {
    if (M < 2)
        throw std::invalid_argument("generate_codebook: M must be >= 2");
    if (B < 0 || B > kMaxBitsPerLink)
        throw std::invalid_argument("generate_codebook: B must lie in [0, 16]");
    Codebook cb;
    cb.bits = B;
    const std::size_t n = std::size_t{1} << B;
    cb.vectors.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        CVector c = complex_normal_vector(rng, static_cast<std::size_t>(M));
        c /= c.norm();
        cb.vectors.push_back(std::move(c));
    }
    return cb;
}

/// Codeword maximizing |hbar^H c|^2; ties go to the lowest index.
inline QuantizedDirection quantize(const CVector& hbar, const Codebook& cb) {
    if (cb.vectors.empty())
        throw std::invalid_argument("quantize: empty codebook");
    if (hbar.size() != cb.dimension())
        throw std::invalid_argument("quantize: direction and codebook dimensions differ");
    if (std::abs(hbar.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("quantize: direction must be unit norm");

    std::size_t best = 0;
    double best_fid = -1.0;
    for (std::size_t k = 0; k < cb.vectors.size(); ++k) {
        const double fid = std::norm(hbar.dot(cb.vectors[k]));
        if (fid > best_fid) {
            best_fid = fid;
            best = k;
        }
    }
    return {best, cb.vectors[best], std::min(best_fid, 1.0)};
}

/// Beta function through log-gamma.
inline double beta_function(double x, double y) {
    return std::exp(std::lgamma(x) + std::lgamma(y) - std::lgamma(x + y));
}

/*
 * Upper bound on E|h_ij^H bhat_j|^2 for a B-bit RVQ feedback link with
 * one-step correlation eps:
 *
 *   1 - eps^2 + eps^2 * 2^B * beta(2^B, M/(M-1)) * M/(M-1)
 *
 * evaluated with the exact beta function.
 */
inline double quantization_error_bound(int B, int M, double eps) {
    if (B < 0)
        throw std::invalid_argument("quantization_error_bound: B must be >= 0");
    if (M < 2)
        throw std::invalid_argument("quantization_error_bound: M must be >= 2");
    if (!(std::abs(eps) <= 1.0))
        throw std::invalid_argument("quantization_error_bound: |eps| must be <= 1");
    const double y = static_cast<double>(M) / (M - 1);
    const double n = std::exp2(static_cast<double>(B));
    const double e2 = eps * eps;
    return 1.0 - e2 + e2 * n * beta_function(n, y) * y;
}

} // namespace mcbf

#endif

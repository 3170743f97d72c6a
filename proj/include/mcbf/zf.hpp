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

#ifndef MCBF_ZF_HPP
#define MCBF_ZF_HPP

#include "common.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

namespace mcbf {

/// Rows are the conjugate-transposed unit directions of every other user's
/// channel from station i, in ascending user order (i skipped).
struct InterferenceMatrix {
    CMatrix rows;
};

struct Beamformer {
    CVector b;
    double residual = 0.0; // max_r |rows_r . b| at construction
};

/// `directions` holds the K-1 unit vectors hbar_{j i}, j != i, in ascending j.
inline InterferenceMatrix stack_interference(std::span<const CVector> directions, std::size_t i, std::size_t K) {
    if (K < 2 || i >= K)
        throw std::invalid_argument("stack_interference: user index out of range");
    if (directions.size() != K - 1)
        throw std::invalid_argument("stack_interference: expected K-1 interference directions");
    const Eigen::Index m = directions.front().size();
    InterferenceMatrix out{CMatrix(static_cast<Eigen::Index>(K - 1), m)};
    for (std::size_t r = 0; r < directions.size(); ++r) {
        const CVector& d = directions[r];
        if (d.size() != m)
            throw std::invalid_argument("stack_interference: direction lengths differ");
        if (std::abs(d.norm() - 1.0) > 1e-9)
            throw std::invalid_argument("stack_interference: directions must be unit norm");
        out.rows.row(static_cast<Eigen::Index>(r)) = d.adjoint();
    }
    return out;
}

/*
 * Right singular vector of the interference matrix for its smallest singular
 * value. With M = K the nullspace of a rank K-1 matrix is one-dimensional and
 * this vector zero-forces every row. The phase is fixed so the first
 * component with magnitude above 1e-12 is real and positive.
 */
inline Beamformer nullspace_direction(const InterferenceMatrix& H) {
    const Eigen::Index rows = H.rows.rows();
    const Eigen::Index m = H.rows.cols();
    if (m != rows + 1)
        throw UnsupportedConfiguration("nullspace_direction: requires M = K (matrix must be (M-1) x M)");

    Eigen::JacobiSVD<CMatrix> svd(H.rows, Eigen::ComputeFullV);
    CVector b = svd.matrixV().col(m - 1);
    b /= b.norm();

    for (Eigen::Index k = 0; k < m; ++k) {
        const double mag = std::abs(b[k]);
        if (mag > 1e-12) {
            b *= std::conj(b[k]) / mag;
            b[k] = Complex(std::abs(b[k]), 0.0);
            break;
        }
    }

    double residual = 0.0;
    for (Eigen::Index r = 0; r < rows; ++r)
        residual = std::max(residual, std::abs((H.rows.row(r) * b).value()));
    return {std::move(b), residual};
}

/// Interference-free SINR mu_ii |h_ii^H b_i|^2.
inline double sinr_perfect(const CVector& h_ii, const Beamformer& b_i, double mu_ii) {
    return mu_ii * std::norm(h_ii.dot(b_i.b));
}

/*
 * SINR of user i when every station transmits on its (possibly quantized)
 * beamformer:
 *
 *   mu_ii |h_ii^H b_i|^2 / (1 + sum_{j != i} mu_ij |h_ij^H b_j|^2)
 *
 * h_row[j] is the channel from station j to user i.
 */
inline double sinr_delayed(std::span<const CVector> h_row, std::span<const Beamformer> beams,
                           std::span<const double> mu_row, std::size_t i) {
    const std::size_t k = h_row.size();
    if (beams.size() != k || mu_row.size() != k || i >= k)
        throw std::invalid_argument("sinr_delayed: inconsistent dimensions");
    double interference = 0.0;
    for (std::size_t j = 0; j < k; ++j)
        if (j != i)
            interference += mu_row[j] * std::norm(h_row[j].dot(beams[j].b));
    return mu_row[i] * std::norm(h_row[i].dot(beams[i].b)) / (1.0 + interference);
}

/// Sum over users of log2(1 + SINR), bits/s/Hz.
inline double sum_rate(std::span<const double> sinrs) {
    double r = 0.0;
    for (double s : sinrs) {
        if (!(s >= 0.0))
            throw std::invalid_argument("sum_rate: SINR must be nonnegative");
        r += std::log2(1.0 + s);
    }
    return r;
}

} // namespace mcbf

#endif

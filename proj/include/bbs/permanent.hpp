/**
 * Copyright 2026 The BBS Authors
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
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace bbs {

/// Permanent of a square matrix by Ryser's formula with Gray-code updates,
/// O(2^n n). The empty matrix has permanent 1.
template <class Derived>
typename Derived::Scalar permanent(const Eigen::MatrixBase<Derived>& a) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index n = a.rows();
  if (a.cols() != n) throw std::invalid_argument("permanent: matrix must be square");
  if (n == 0) return Scalar(1);
  if (n == 1) return a(0, 0);
  if (n > 30) throw std::invalid_argument("permanent: matrix too large");

  std::vector<Scalar> row_sums(static_cast<std::size_t>(n), Scalar(0));
  Scalar total(0);
  const std::uint64_t subsets = std::uint64_t{1} << n;
  std::uint64_t gray_prev = 0;
  for (std::uint64_t k = 1; k < subsets; ++k) {
    const std::uint64_t gray = k ^ (k >> 1);
    const std::uint64_t changed = gray ^ gray_prev;
    const int col = __builtin_ctzll(changed);
    const bool added = (gray & changed) != 0;
    for (Eigen::Index r = 0; r < n; ++r) {
      if (added) {
        row_sums[static_cast<std::size_t>(r)] += a(r, col);
      } else {
        row_sums[static_cast<std::size_t>(r)] -= a(r, col);
      }
    }
    Scalar prod(1);
    for (const auto& s : row_sums) prod *= s;
    const int size = __builtin_popcountll(gray);
    if ((n - size) % 2 == 0) {
      total += prod;
    } else {
      total -= prod;
    }
    gray_prev = gray;
  }
  return total;
}

}  // namespace bbs

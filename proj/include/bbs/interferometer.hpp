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

// Exact simulation of a time-bin loop interferometer fed with single photons.
//
// Modes are time bins. A delay loop of length l couples bins i and i+l with a
// programmable beamsplitter; loops are traversed one after another. Each
// beamsplitter is the real rotation [[cos t, -sin t], [sin t, cos t]], so
// starting from a Fock state every amplitude stays real and amplitudes are
// stored as doubles.
//
// Mode indices are 0-based throughout this header.

#include "bbs/bitstring.hpp"
#include "bbs/permanent.hpp"
#include "bbs/rng.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bbs {

/// Raised when the Fock space of a circuit exceeds the configured bound;
/// callers should switch to the permanent sampler backend.
class DimensionLimitError : public std::runtime_error {
 public:
  DimensionLimitError(std::size_t dimension, std::size_t limit)
      : std::runtime_error("Fock dimension " + std::to_string(dimension) + " exceeds limit " +
                           std::to_string(limit)),
        dimension_(dimension) {}
  std::size_t dimension() const noexcept { return dimension_; }

 private:
  std::size_t dimension_;
};

inline constexpr std::size_t kDefaultMaxFockDimension = std::size_t{1} << 20;

struct Coupler {
  std::size_t first;
  std::size_t second;
  friend bool operator==(const Coupler&, const Coupler&) = default;
};

/// Ordered list of two-mode couplers induced by a sequence of delay loops.
class CircuitLayout {
 public:
  CircuitLayout() = default;

  static CircuitLayout build(std::size_t modes, std::vector<std::size_t> loop_lengths) {
    if (modes < 2) throw std::invalid_argument("CircuitLayout: need at least 2 modes");
    if (loop_lengths.empty()) throw std::invalid_argument("CircuitLayout: empty loop list");
    CircuitLayout out;
    out.modes_ = modes;
    for (auto l : loop_lengths) {
      if (l < 1 || l >= modes) {
        throw std::invalid_argument("CircuitLayout: loop length " + std::to_string(l) +
                                    " must lie in [1, " + std::to_string(modes - 1) + "]");
      }
      for (std::size_t i = 0; i + l < modes; ++i) out.couplers_.push_back({i, i + l});
    }
    out.loops_ = std::move(loop_lengths);
    return out;
  }

  std::size_t modes() const noexcept { return modes_; }
  const std::vector<std::size_t>& loop_lengths() const noexcept { return loops_; }
  const std::vector<Coupler>& couplers() const noexcept { return couplers_; }
  std::size_t coupler_count() const noexcept { return couplers_.size(); }

 private:
  std::size_t modes_ = 0;
  std::vector<std::size_t> loops_;
  std::vector<Coupler> couplers_;
};

/// The 1-3-9 power-law loops, keeping those shorter than `modes`.
inline std::vector<std::size_t> default_loop_lengths(std::size_t modes) {
  std::vector<std::size_t> out;
  for (std::size_t l : {1, 3, 9}) {
    if (l < modes) out.push_back(l);
  }
  return out;
}

inline Eigen::Matrix2d coupler_unitary(double theta) {
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Eigen::Matrix2d u;
  u << c, -s, s, c;
  return u;
}

/// U = B_last ... B_first, with B_k the k-th coupler rotation embedded in the
/// identity. Column j holds the output amplitudes of a photon entering mode j.
inline Eigen::MatrixXd circuit_unitary(const CircuitLayout& layout, std::span<const double> thetas) {
  if (thetas.size() != layout.coupler_count()) {
    throw std::invalid_argument("circuit_unitary: expected " + std::to_string(layout.coupler_count()) +
                                " angles, got " + std::to_string(thetas.size()));
  }
  const auto m = static_cast<Eigen::Index>(layout.modes());
  Eigen::MatrixXd u = Eigen::MatrixXd::Identity(m, m);
  for (std::size_t k = 0; k < thetas.size(); ++k) {
    const auto a = static_cast<Eigen::Index>(layout.couplers()[k].first);
    const auto b = static_cast<Eigen::Index>(layout.couplers()[k].second);
    const double c = std::cos(thetas[k]);
    const double s = std::sin(thetas[k]);
    const Eigen::RowVectorXd ra = u.row(a);
    const Eigen::RowVectorXd rb = u.row(b);
    u.row(a) = c * ra - s * rb;
    u.row(b) = s * ra + c * rb;
  }
  return u;
}

/// Photon counts per mode.
struct OccupationPattern {
  std::vector<int> counts;

  std::size_t modes() const noexcept { return counts.size(); }
  int photons() const noexcept { return std::accumulate(counts.begin(), counts.end(), 0); }

  /// Click detection: 1 wherever at least one photon arrived.
  BitString threshold() const {
    BitString out(counts.size());
    for (std::size_t i = 0; i < counts.size(); ++i) out[i] = counts[i] > 0 ? 1 : 0;
    return out;
  }

  friend bool operator==(const OccupationPattern&, const OccupationPattern&) = default;
  friend auto operator<=>(const OccupationPattern&, const OccupationPattern&) = default;
};

/// |1,0,1,0,...>: one photon in every other mode starting with the first,
/// so ceil(m/2) photons.
inline OccupationPattern alternating_input(std::size_t modes) {
  OccupationPattern p{std::vector<int>(modes, 0)};
  for (std::size_t i = 0; i < modes; i += 2) p.counts[i] = 1;
  return p;
}

/// Number of ways to put `photons` bosons into `modes` modes.
inline std::uint64_t fock_dimension(std::size_t modes, std::size_t photons) {
  if (modes == 0) return photons == 0 ? 1 : 0;
  // binomial(modes + photons - 1, photons) with exact incremental products
  std::uint64_t result = 1;
  const std::size_t k = std::min(photons, modes - 1);
  const std::size_t n = modes + photons - 1;
  for (std::size_t i = 1; i <= k; ++i) {
    const unsigned __int128 next = static_cast<unsigned __int128>(result) * (n - k + i) / i;
    if (next > UINT64_MAX) throw std::overflow_error("fock_dimension overflow");
    result = static_cast<std::uint64_t>(next);
  }
  return result;
}

/// Occupation basis with fixed photon number, ranked in ascending
/// lexicographic order of the count tuple: index 0 is (0,...,0,n) and the
/// last index is (n,0,...,0).
class FockBasis {
 public:
  FockBasis(std::size_t modes, std::size_t photons, std::size_t max_dimension = kDefaultMaxFockDimension)
      : modes_(modes), photons_(photons) {
    if (modes == 0) throw std::invalid_argument("FockBasis: need at least one mode");
    if (modes > 64) throw std::invalid_argument("FockBasis: at most 64 modes supported");
    const auto dim = fock_dimension(modes, photons);
    if (dim > max_dimension) throw DimensionLimitError(dim, max_dimension);
    dimension_ = static_cast<std::size_t>(dim);

    completions_.assign((modes + 1) * (photons + 1), 0);
    for (std::size_t k = 0; k <= modes; ++k) {
      for (std::size_t r = 0; r <= photons; ++r) completions_[k * (photons + 1) + r] = fock_dimension(k, r);
    }

    table_.reserve(dimension_ * modes_);
    masks_.reserve(dimension_);
    std::vector<std::uint8_t> counts(modes_, 0);
    enumerate(0, photons_, counts);
  }

  std::size_t modes() const noexcept { return modes_; }
  std::size_t photons() const noexcept { return photons_; }
  std::size_t dimension() const noexcept { return dimension_; }

  std::span<const std::uint8_t> counts(std::size_t index) const noexcept {
    return {table_.data() + index * modes_, modes_};
  }
  OccupationPattern pattern(std::size_t index) const {
    auto c = counts(index);
    return OccupationPattern{std::vector<int>(c.begin(), c.end())};
  }
  /// Bit i set iff mode i is occupied.
  std::uint64_t click_mask(std::size_t index) const noexcept { return masks_[index]; }

  template <class Int>
  std::size_t rank(std::span<const Int> counts) const {
    if (counts.size() != modes_) throw std::invalid_argument("FockBasis::rank: wrong mode count");
    std::size_t r = photons_;
    std::uint64_t index = 0;
    for (std::size_t i = 0; i < modes_; ++i) {
      if (counts[i] < 0 || static_cast<std::size_t>(counts[i]) > r) {
        throw std::invalid_argument("FockBasis::rank: pattern does not match photon number");
      }
      const std::size_t after = modes_ - i - 1;
      for (std::size_t c = 0; c < static_cast<std::size_t>(counts[i]); ++c) index += completion(after, r - c);
      r -= static_cast<std::size_t>(counts[i]);
    }
    if (r != 0) throw std::invalid_argument("FockBasis::rank: pattern does not match photon number");
    return static_cast<std::size_t>(index);
  }
  std::size_t rank(const OccupationPattern& p) const { return rank(std::span<const int>(p.counts)); }

 private:
  std::uint64_t completion(std::size_t modes, std::size_t photons) const noexcept {
    return completions_[modes * (photons_ + 1) + photons];
  }

  void enumerate(std::size_t mode, std::size_t remaining, std::vector<std::uint8_t>& counts) {
    if (mode + 1 == modes_) {
      counts[mode] = static_cast<std::uint8_t>(remaining);
      table_.insert(table_.end(), counts.begin(), counts.end());
      std::uint64_t mask = 0;
      for (std::size_t i = 0; i < modes_; ++i) {
        if (counts[i] > 0) mask |= std::uint64_t{1} << i;
      }
      masks_.push_back(mask);
      return;
    }
    for (std::size_t c = 0; c <= remaining; ++c) {
      counts[mode] = static_cast<std::uint8_t>(c);
      enumerate(mode + 1, remaining - c, counts);
    }
    counts[mode] = 0;
  }

  std::size_t modes_;
  std::size_t photons_;
  std::size_t dimension_ = 0;
  std::vector<std::uint64_t> completions_;
  std::vector<std::uint8_t> table_;
  std::vector<std::uint64_t> masks_;
};

/// Amplitudes over a FockBasis.
class FockStateVector {
 public:
  FockStateVector(std::shared_ptr<const FockBasis> basis, std::vector<double> amplitudes)
      : basis_(std::move(basis)), amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() != basis_->dimension()) {
      throw std::invalid_argument("FockStateVector: amplitude count does not match basis");
    }
  }

  static FockStateVector basis_state(std::shared_ptr<const FockBasis> basis, const OccupationPattern& p) {
    std::vector<double> amps(basis->dimension(), 0.0);
    amps[basis->rank(p)] = 1.0;
    return FockStateVector(std::move(basis), std::move(amps));
  }

  const FockBasis& basis() const noexcept { return *basis_; }
  const std::shared_ptr<const FockBasis>& basis_ptr() const noexcept { return basis_; }
  std::size_t photon_number() const noexcept { return basis_->photons(); }
  std::size_t mode_count() const noexcept { return basis_->modes(); }
  std::span<const double> amplitudes() const noexcept { return amplitudes_; }
  std::vector<double>& mutable_amplitudes() noexcept { return amplitudes_; }

  double amplitude(const OccupationPattern& p) const { return amplitudes_[basis_->rank(p)]; }
  double probability(const OccupationPattern& p) const {
    const double a = amplitude(p);
    return a * a;
  }
  double norm_squared() const noexcept {
    double s = 0.0;
    for (double a : amplitudes_) s += a * a;
    return s;
  }

 private:
  std::shared_ptr<const FockBasis> basis_;
  std::vector<double> amplitudes_;
};

namespace detail {

/// Action of one rotation on the (s+1)-dimensional block |k, s-k>, k = 0..s,
/// of two coupled modes. Row-major: out[k] = sum_p block[k*(s+1)+p] * in[p].
inline std::vector<double> beamsplitter_block(double theta, std::size_t s) {
  const double c = std::cos(theta);
  const double sn = std::sin(theta);
  const std::size_t d = s + 1;
  std::vector<double> fact(d, 1.0);
  std::vector<double> cpow(d, 1.0);
  std::vector<double> spow(d, 1.0);
  std::vector<double> mspow(d, 1.0);
  for (std::size_t i = 1; i < d; ++i) {
    fact[i] = fact[i - 1] * static_cast<double>(i);
    cpow[i] = cpow[i - 1] * c;
    spow[i] = spow[i - 1] * sn;
    mspow[i] = -mspow[i - 1] * sn;
  }
  auto binom = [&](std::size_t n, std::size_t k) { return fact[n] / (fact[k] * fact[n - k]); };
  std::vector<double> block(d * d, 0.0);
  for (std::size_t p = 0; p <= s; ++p) {
    const std::size_t q = s - p;
    // (c x + sn y)^p (-sn x + c y)^q, coefficient of x^(i+j)
    for (std::size_t i = 0; i <= p; ++i) {
      const double a = binom(p, i) * cpow[i] * spow[p - i];
      for (std::size_t j = 0; j <= q; ++j) {
        block[(i + j) * d + p] += a * binom(q, j) * mspow[j] * cpow[q - j];
      }
    }
    const double in_norm = fact[p] * fact[q];
    for (std::size_t k = 0; k <= s; ++k) block[k * d + p] *= std::sqrt(fact[k] * fact[s - k] / in_norm);
  }
  return block;
}

}  // namespace detail

/// Precomputed index structure for applying a layout's couplers to states in
/// one FockBasis. Immutable after construction; safe to share across threads.
class FockPropagator {
 public:
  FockPropagator(std::shared_ptr<const FockBasis> basis, CircuitLayout layout)
      : basis_(std::move(basis)), layout_(std::move(layout)) {
    if (layout_.modes() != basis_->modes()) {
      throw std::invalid_argument("FockPropagator: layout and basis mode counts differ");
    }
    const std::size_t n = basis_->photons();
    groups_.resize(layout_.coupler_count());
    std::vector<int> scratch(basis_->modes());
    for (std::size_t k = 0; k < layout_.coupler_count(); ++k) {
      const auto [a, b] = layout_.couplers()[k];
      auto& by_total = groups_[k];
      by_total.assign(n + 1, {});
      for (std::size_t idx = 0; idx < basis_->dimension(); ++idx) {
        const auto counts = basis_->counts(idx);
        // one group per configuration of the other modes: head has n_b == 0
        if (counts[b] != 0) continue;
        const std::size_t s = counts[a];
        if (s == 0) continue;
        std::copy(counts.begin(), counts.end(), scratch.begin());
        auto& flat = by_total[s];
        for (std::size_t na = 0; na <= s; ++na) {
          scratch[a] = static_cast<int>(na);
          scratch[b] = static_cast<int>(s - na);
          flat.push_back(static_cast<std::uint32_t>(basis_->rank(std::span<const int>(scratch))));
        }
      }
    }
  }

  const FockBasis& basis() const noexcept { return *basis_; }
  const std::shared_ptr<const FockBasis>& basis_ptr() const noexcept { return basis_; }
  const CircuitLayout& layout() const noexcept { return layout_; }

  /// Applies coupler `k` with angle `theta` in place.
  void apply_coupler(std::size_t k, double theta, std::span<double> amps) const {
    const auto& by_total = groups_[k];
    std::vector<double> in;
    for (std::size_t s = 1; s < by_total.size(); ++s) {
      const auto& flat = by_total[s];
      if (flat.empty()) continue;
      const std::size_t d = s + 1;
      if (s == 1) {
        const double c = std::cos(theta);
        const double sn = std::sin(theta);
        for (std::size_t g = 0; g < flat.size(); g += 2) {
          // flat[g]: photon in b, flat[g+1]: photon in a
          const double vb = amps[flat[g]];
          const double va = amps[flat[g + 1]];
          amps[flat[g]] = c * vb + sn * va;
          amps[flat[g + 1]] = -sn * vb + c * va;
        }
        continue;
      }
      const auto block = detail::beamsplitter_block(theta, s);
      in.resize(d);
      for (std::size_t g = 0; g < flat.size(); g += d) {
        for (std::size_t p = 0; p < d; ++p) in[p] = amps[flat[g + p]];
        for (std::size_t kk = 0; kk < d; ++kk) {
          double acc = 0.0;
          const double* row = block.data() + kk * d;
          for (std::size_t p = 0; p < d; ++p) acc += row[p] * in[p];
          amps[flat[g + kk]] = acc;
        }
      }
    }
  }

  /// Applies couplers [from, coupler_count) in order.
  void apply_range(std::size_t from, std::span<const double> thetas, std::span<double> amps) const {
    for (std::size_t k = from; k < layout_.coupler_count(); ++k) apply_coupler(k, thetas[k], amps);
  }

  FockStateVector evolve(const OccupationPattern& input, std::span<const double> thetas) const {
    if (thetas.size() != layout_.coupler_count()) {
      throw std::invalid_argument("evolve: expected " + std::to_string(layout_.coupler_count()) + " angles, got " +
                                  std::to_string(thetas.size()));
    }
    if (input.modes() != basis_->modes() || static_cast<std::size_t>(input.photons()) != basis_->photons()) {
      throw std::invalid_argument("evolve: input pattern does not match basis");
    }
    auto state = FockStateVector::basis_state(basis_, input);
    apply_range(0, thetas, state.mutable_amplitudes());
    return state;
  }

 private:
  std::shared_ptr<const FockBasis> basis_;
  CircuitLayout layout_;
  // groups_[coupler][s]: flattened (s+1)-tuples of basis indices with
  // n_a = 0..s photons in the first mode of the coupler.
  std::vector<std::vector<std::vector<std::uint32_t>>> groups_;
};

/// Convenience one-shot evolution. Throws DimensionLimitError above `max_dimension`.
inline FockStateVector evolve(const OccupationPattern& input, const CircuitLayout& layout,
                              std::span<const double> thetas,
                              std::size_t max_dimension = kDefaultMaxFockDimension) {
  if (input.modes() != layout.modes()) throw std::invalid_argument("evolve: input has wrong mode count");
  for (int c : input.counts) {
    if (c < 0) throw std::invalid_argument("evolve: negative photon count");
  }
  auto basis = std::make_shared<const FockBasis>(layout.modes(), static_cast<std::size_t>(input.photons()),
                                                 max_dimension);
  FockPropagator prop(std::move(basis), layout);
  return prop.evolve(input, thetas);
}

struct Outcome {
  OccupationPattern pattern;
  double probability;
};

/// |amplitude|^2 for every basis pattern, in basis order.
inline std::vector<Outcome> output_distribution(const FockStateVector& state) {
  std::vector<Outcome> out;
  out.reserve(state.basis().dimension());
  const auto amps = state.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) out.push_back({state.basis().pattern(i), amps[i] * amps[i]});
  return out;
}

/// Marginal over click patterns, keyed by click mask (bit i = mode i).
inline std::vector<std::pair<std::uint64_t, double>> threshold_distribution(const FockStateVector& state) {
  std::vector<std::pair<std::uint64_t, double>> acc;
  const auto amps = state.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) acc.emplace_back(state.basis().click_mask(i), amps[i] * amps[i]);
  std::sort(acc.begin(), acc.end());
  std::vector<std::pair<std::uint64_t, double>> out;
  for (const auto& [mask, p] : acc) {
    if (!out.empty() && out.back().first == mask) {
      out.back().second += p;
    } else {
      out.emplace_back(mask, p);
    }
  }
  return out;
}

inline void to_json(nlohmann::json& j, const Outcome& o) {
  j = nlohmann::json{{"pattern", o.pattern.counts}, {"probability", o.probability}};
}

inline nlohmann::json distribution_to_json(const std::vector<Outcome>& dist) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& o : dist) j.push_back(o);
  return j;
}

inline void mask_to_bits(std::uint64_t mask, std::span<std::uint8_t> out) noexcept {
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = static_cast<std::uint8_t>((mask >> i) & 1U);
}

/// Exact sampler over a precomputed state: inverse-CDF lookup per draw.
class StatevectorSampler {
 public:
  explicit StatevectorSampler(const FockStateVector& state) : basis_(state.basis_ptr()) {
    const auto amps = state.amplitudes();
    cdf_.resize(amps.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < amps.size(); ++i) {
      acc += amps[i] * amps[i];
      cdf_[i] = acc;
    }
  }

  std::size_t modes() const noexcept { return basis_->modes(); }

  template <class URBG>
  std::size_t draw_index(URBG& rng) const {
    const double u = uniform01(rng) * cdf_.back();
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    if (it == cdf_.end()) --it;
    auto idx = static_cast<std::size_t>(it - cdf_.begin());
    return idx;
  }

  template <class URBG>
  OccupationPattern draw_pattern(URBG& rng) const {
    return basis_->pattern(draw_index(rng));
  }

  template <class URBG>
  void draw_threshold(URBG& rng, std::span<std::uint8_t> out) const {
    mask_to_bits(basis_->click_mask(draw_index(rng)), out);
  }

 private:
  std::shared_ptr<const FockBasis> basis_;
  std::vector<double> cdf_;
};

/// Per-sample exact boson sampler (Clifford & Clifford, algorithm B): photons
/// are placed one at a time, each conditional marginal built from permanents
/// of growing submatrices. Cost O(n^2 2^n + m n) per sample, no Fock space.
class PermanentSampler {
 public:
  PermanentSampler(const Eigen::MatrixXd& unitary, const OccupationPattern& input) : modes_(input.modes()) {
    if (static_cast<std::size_t>(unitary.rows()) != modes_ || unitary.rows() != unitary.cols()) {
      throw std::invalid_argument("PermanentSampler: unitary does not match input modes");
    }
    for (std::size_t j = 0; j < modes_; ++j) {
      for (int c = 0; c < input.counts[j]; ++c) columns_.push_back(static_cast<Eigen::Index>(j));
    }
    if (columns_.size() > 24) throw std::invalid_argument("PermanentSampler: too many photons");
    a_.resize(unitary.rows(), static_cast<Eigen::Index>(columns_.size()));
    for (std::size_t c = 0; c < columns_.size(); ++c) a_.col(static_cast<Eigen::Index>(c)) = unitary.col(columns_[c]);
  }

  std::size_t modes() const noexcept { return modes_; }

  template <class URBG>
  OccupationPattern draw_pattern(URBG& rng) const {
    const auto n = a_.cols();
    const auto m = a_.rows();
    OccupationPattern out{std::vector<int>(modes_, 0)};
    if (n == 0) return out;

    // random column order, Fisher-Yates
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    for (std::size_t i = order.size() - 1; i > 0; --i) {
      std::swap(order[i], order[uniform_below(rng, i + 1)]);
    }
    Eigen::MatrixXd perm_a(m, n);
    for (Eigen::Index c = 0; c < n; ++c) perm_a.col(c) = a_.col(order[static_cast<std::size_t>(c)]);

    std::vector<Eigen::Index> rows;
    std::vector<double> weights(static_cast<std::size_t>(m));
    std::vector<double> minors;
    Eigen::MatrixXd sub;
    for (Eigen::Index k = 1; k <= n; ++k) {
      // minors[l] = Perm(rows chosen so far x first k columns without l)
      minors.assign(static_cast<std::size_t>(k), 0.0);
      sub.resize(k - 1, k - 1);
      for (Eigen::Index l = 0; l < k; ++l) {
        for (Eigen::Index r = 0; r < k - 1; ++r) {
          Eigen::Index cc = 0;
          for (Eigen::Index c = 0; c < k; ++c) {
            if (c == l) continue;
            sub(r, cc++) = perm_a(rows[static_cast<std::size_t>(r)], c);
          }
        }
        minors[static_cast<std::size_t>(l)] = permanent(sub);
      }
      double total = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) {
        double amp = 0.0;
        for (Eigen::Index l = 0; l < k; ++l) amp += perm_a(i, l) * minors[static_cast<std::size_t>(l)];
        weights[static_cast<std::size_t>(i)] = amp * amp;
        total += amp * amp;
      }
      double u = uniform01(rng) * total;
      Eigen::Index pick = m - 1;
      for (Eigen::Index i = 0; i < m; ++i) {
        u -= weights[static_cast<std::size_t>(i)];
        if (u < 0.0) {
          pick = i;
          break;
        }
      }
      // guard against landing on a zero-weight tail through rounding
      while (weights[static_cast<std::size_t>(pick)] == 0.0 && pick > 0) --pick;
      rows.push_back(pick);
    }
    for (auto r : rows) ++out.counts[static_cast<std::size_t>(r)];
    return out;
  }

  template <class URBG>
  void draw_threshold(URBG& rng, std::span<std::uint8_t> out) const {
    const auto p = draw_pattern(rng);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = p.counts[i] > 0 ? 1 : 0;
  }

 private:
  std::size_t modes_;
  std::vector<Eigen::Index> columns_;
  Eigen::MatrixXd a_;
};

/// Draws `count` click patterns from any sampler exposing draw_threshold.
template <class Sampler, class URBG>
std::vector<BitString> sample_threshold(const Sampler& sampler, URBG& rng, std::size_t count) {
  std::vector<BitString> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    BitString x(sampler.modes());
    sampler.draw_threshold(rng, x.view());
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace bbs

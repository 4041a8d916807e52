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

// Bosonic Binary Solver training loop.
//
// Each update step draws S click patterns from the interferometer, passes
// them through trainable per-bit flips and averages the cost (forward pass),
// then estimates the gradient of every beamsplitter angle with the photonic
// shift rule and of every flip parameter from the stored raw patterns, and
// finally applies one synchronous SGD update. Every candidate string that is
// costed, including those drawn for gradients, competes for the returned
// best solution.
//
// Costs are handled internally in the minimization sense; maximization
// problems are negated on the way in and reported natively.

#include "bbs/bitstring.hpp"
#include "bbs/interferometer.hpp"
#include "bbs/problems.hpp"
#include "bbs/rng.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

namespace bbs {

enum class SamplerBackend { statevector, permanent };

inline std::string to_string(SamplerBackend b) { return b == SamplerBackend::statevector ? "statevector" : "permanent"; }

inline SamplerBackend parse_sampler_backend(std::string_view s) {
  if (s == "statevector") return SamplerBackend::statevector;
  if (s == "permanent") return SamplerBackend::permanent;
  throw std::invalid_argument("unknown sampler backend '" + std::string(s) + "'");
}

inline double sigmoid(double a) noexcept { return 1.0 / (1.0 + std::exp(-a)); }
inline double sigmoid_derivative(double a) noexcept {
  const double s = sigmoid(a);
  return s * (1.0 - s);
}

struct BbsConfig {
  std::size_t updates = 200;  // N
  std::size_t samples = 50;   // S
  double lr_theta = 0.01;
  double lr_alpha = 0.05;
  double shift = std::numbers::pi / 2;
  // Empty means the 1-3-9 power-law loops shorter than the circuit.
  std::vector<std::size_t> loop_lengths;
  std::size_t tile_size = 0;  // 0: one circuit spanning all bits
  std::uint64_t seed = 0;
  SamplerBackend backend = SamplerBackend::statevector;
  double gradient_scale = 1.0;
  bool common_random_numbers = false;
  std::size_t max_fock_dimension = kDefaultMaxFockDimension;

  void validate() const {
    if (updates < 1) throw std::invalid_argument("BbsConfig: updates must be >= 1");
    if (samples < 1) throw std::invalid_argument("BbsConfig: samples must be >= 1");
    if (!(shift > 0.0 && shift < std::numbers::pi)) throw std::invalid_argument("BbsConfig: shift must lie in (0, pi)");
    if (tile_size == 1) throw std::invalid_argument("BbsConfig: tile_size must be 0 or >= 2");
    if (!std::isfinite(lr_theta) || !std::isfinite(lr_alpha) || !std::isfinite(gradient_scale)) {
      throw std::invalid_argument("BbsConfig: learning rates and gradient scale must be finite");
    }
    for (auto l : loop_lengths) {
      if (l < 1) throw std::invalid_argument("BbsConfig: loop lengths must be >= 1");
    }
  }

  /// Hardware emulation preset: one loop of length 1 on 8-mode tiles,
  /// 50 updates of 20 samples.
  static BbsConfig hardware_emulation() {
    BbsConfig c;
    c.updates = 50;
    c.samples = 20;
    c.loop_lengths = {1};
    c.tile_size = 8;
    return c;
  }
};

// ------------------------------------------------------------------ tiling

struct Tile {
  std::size_t offset;  // first bit covered
  std::size_t size;
  CircuitLayout layout;
};

/// Contiguous partition of the bits into independently parametrized circuits.
struct TilePlan {
  std::size_t modes = 0;
  std::vector<Tile> tiles;

  std::size_t coupler_count() const noexcept {
    std::size_t n = 0;
    for (const auto& t : tiles) n += t.layout.coupler_count();
    return n;
  }
  /// Index of the tile's first angle in the concatenated angle vector.
  std::size_t theta_offset(std::size_t tile) const noexcept {
    std::size_t n = 0;
    for (std::size_t t = 0; t < tile; ++t) n += tiles[t].layout.coupler_count();
    return n;
  }
  std::vector<std::size_t> block_sizes() const {
    std::vector<std::size_t> out;
    for (const auto& t : tiles) out.push_back(t.size);
    return out;
  }
};

namespace detail {
inline std::vector<std::size_t> loops_for_block(std::size_t block, const std::vector<std::size_t>& loops) {
  if (loops.empty()) return default_loop_lengths(block);
  std::vector<std::size_t> out;
  for (auto l : loops) {
    if (l < block) out.push_back(l);
  }
  return out;
}
}  // namespace detail

/// Blocks of `tile_size` bits; a trailing block of one bit borrows one from
/// its neighbour. Loops that do not fit a block are dropped for that block.
inline TilePlan make_tiles(std::size_t m, std::size_t tile_size, const std::vector<std::size_t>& loop_lengths) {
  if (m < 2) throw std::invalid_argument("make_tiles: need at least 2 bits");
  if (tile_size < 2) throw std::invalid_argument("make_tiles: tile_size must be >= 2");
  std::vector<std::size_t> sizes;
  if (tile_size >= m) {
    sizes.push_back(m);
  } else {
    sizes.assign(m / tile_size, tile_size);
    const std::size_t rest = m % tile_size;
    if (rest == 1) {
      if (tile_size < 3) throw std::invalid_argument("make_tiles: cannot split an odd size into blocks of 2");
      sizes.back() -= 1;
      sizes.push_back(2);
    } else if (rest > 0) {
      sizes.push_back(rest);
    }
  }
  TilePlan plan;
  plan.modes = m;
  std::size_t offset = 0;
  for (auto s : sizes) {
    auto loops = detail::loops_for_block(s, loop_lengths);
    if (loops.empty()) {
      throw std::invalid_argument("make_tiles: no loop fits a block of " + std::to_string(s) + " modes");
    }
    plan.tiles.push_back({offset, s, CircuitLayout::build(s, std::move(loops))});
    offset += s;
  }
  return plan;
}

/// One circuit across all bits. Loops of length m or more are dropped.
inline TilePlan untiled_plan(std::size_t m, const std::vector<std::size_t>& loop_lengths) {
  if (m < 2) throw std::invalid_argument("untiled_plan: need at least 2 bits");
  TilePlan plan;
  plan.modes = m;
  auto loops = detail::loops_for_block(m, loop_lengths);
  if (loops.empty()) throw std::invalid_argument("untiled_plan: no loop fits " + std::to_string(m) + " modes");
  plan.tiles.push_back({0, m, CircuitLayout::build(m, std::move(loops))});
  return plan;
}

inline TilePlan plan_for(std::size_t m, const BbsConfig& cfg) {
  return cfg.tile_size == 0 ? untiled_plan(m, cfg.loop_lengths) : make_tiles(m, cfg.tile_size, cfg.loop_lengths);
}

/// Upper bound on cost calls: N S (2 * couplers + 2 m + 1), couplers summed
/// over tiles.
inline std::uint64_t budget_bound(const TilePlan& plan, std::size_t updates, std::size_t samples) {
  return static_cast<std::uint64_t>(updates) * samples * (2 * plan.coupler_count() + 2 * plan.modes + 1);
}

inline std::uint64_t budget_bound(std::size_t m, const std::vector<std::size_t>& loop_lengths, std::size_t updates,
                                  std::size_t samples) {
  std::uint64_t couplers = 0;
  for (auto l : loop_lengths) {
    if (l >= m) throw std::invalid_argument("budget_bound: loop length must be shorter than m");
    couplers += m - l;
  }
  return static_cast<std::uint64_t>(updates) * samples * (2 * couplers + 2 * m + 1);
}

inline std::uint64_t budget_bound(std::size_t m, const BbsConfig& cfg) {
  return budget_bound(plan_for(m, cfg), cfg.updates, cfg.samples);
}

// --------------------------------------------------------------- the model

struct BbsParams {
  std::vector<double> thetas;  // one per coupler, tiles concatenated
  std::vector<double> alphas;  // one per bit

  std::vector<double> probs() const {
    std::vector<double> p(alphas.size());
    for (std::size_t i = 0; i < p.size(); ++i) p[i] = sigmoid(alphas[i]);
    return p;
  }
};

/// Draws concatenated click patterns from the tiles of a plan. Holds per-run
/// caches (prepared distributions, prefix states), so one model must not be
/// shared between concurrent runs.
class BbsModel {
 public:
  using Prepared = std::variant<StatevectorSampler, PermanentSampler>;

  BbsModel(TilePlan plan, SamplerBackend backend, std::size_t max_fock_dimension = kDefaultMaxFockDimension)
      : plan_(std::move(plan)), backend_(backend) {
    for (const auto& tile : plan_.tiles) {
      TileState st;
      st.input = alternating_input(tile.size);
      if (backend_ == SamplerBackend::statevector) {
        auto basis = std::make_shared<const FockBasis>(tile.size, static_cast<std::size_t>(st.input.photons()),
                                                       max_fock_dimension);
        st.propagator = std::make_shared<const FockPropagator>(std::move(basis), tile.layout);
        // prefix states are worth keeping while they fit in ~256 MiB
        st.keep_prefixes = tile.layout.coupler_count() * st.propagator->basis().dimension() <= (std::size_t{1} << 25);
      }
      tiles_.push_back(std::move(st));
    }
  }

  const TilePlan& plan() const noexcept { return plan_; }
  std::size_t modes() const noexcept { return plan_.modes; }
  std::size_t coupler_count() const noexcept { return plan_.coupler_count(); }
  SamplerBackend backend() const noexcept { return backend_; }

  /// Keep shifted-angle distributions across calls as long as the base angles
  /// do not change (useful when angles are frozen).
  void set_retain_shifted(bool on) noexcept { retain_shifted_ = on; }

  /// Locates the tile and local coupler index of a global angle index.
  std::pair<std::size_t, std::size_t> locate(std::size_t global) const {
    std::size_t off = 0;
    for (std::size_t t = 0; t < plan_.tiles.size(); ++t) {
      const auto n = plan_.tiles[t].layout.coupler_count();
      if (global < off + n) return {t, global - off};
      off += n;
    }
    throw std::out_of_range("BbsModel: angle index out of range");
  }

  /// Fills `out` (size m) with one raw sample at angles `thetas`. When
  /// `shift` is set, global angle shift->first is displaced by shift->second.
  template <class URBG>
  void draw(std::span<const double> thetas, std::optional<std::pair<std::size_t, double>> shift, URBG& rng,
            std::span<std::uint8_t> out) {
    std::optional<std::pair<std::size_t, std::size_t>> where;
    if (shift) where = locate(shift->first);
    for (std::size_t t = 0; t < plan_.tiles.size(); ++t) {
      const auto& tile = plan_.tiles[t];
      const auto local = thetas.subspan(plan_.theta_offset(t), tile.layout.coupler_count());
      const Prepared* sampler;
      if (where && where->first == t) {
        sampler = &shifted(t, local, where->second, shift->second);
      } else {
        sampler = &base(t, local);
      }
      auto dst = out.subspan(tile.offset, tile.size);
      std::visit([&](const auto& s) { s.draw_threshold(rng, dst); }, *sampler);
    }
  }

  /// Exact click-pattern distribution of the concatenated tiles (small m).
  std::vector<std::pair<BitString, double>> exact_distribution(std::span<const double> thetas,
                                                               std::optional<std::pair<std::size_t, double>> shift = {}) const {
    std::vector<std::pair<BitString, double>> acc{{BitString(0), 1.0}};
    for (std::size_t t = 0; t < plan_.tiles.size(); ++t) {
      const auto& tile = plan_.tiles[t];
      std::vector<double> local(thetas.begin() + static_cast<std::ptrdiff_t>(plan_.theta_offset(t)),
                                thetas.begin() + static_cast<std::ptrdiff_t>(plan_.theta_offset(t) +
                                                                             tile.layout.coupler_count()));
      if (shift) {
        const auto [st, li] = locate(shift->first);
        if (st == t) local[li] += shift->second;
      }
      const auto state = evolve(tiles_[t].input, tile.layout, local, kDefaultMaxFockDimension);
      const auto marg = threshold_distribution(state);
      std::vector<std::pair<BitString, double>> next;
      for (const auto& [prefix, p] : acc) {
        for (const auto& [mask, q] : marg) {
          std::vector<std::uint8_t> bits(prefix.data());
          for (std::size_t i = 0; i < tile.size; ++i) bits.push_back(static_cast<std::uint8_t>((mask >> i) & 1U));
          next.emplace_back(BitString(std::move(bits)), p * q);
        }
      }
      acc = std::move(next);
    }
    return acc;
  }

 private:
  struct TileState {
    OccupationPattern input;
    std::shared_ptr<const FockPropagator> propagator;
    bool keep_prefixes = false;
    std::vector<double> base_thetas;
    std::optional<Prepared> base;
    std::vector<std::vector<double>> prefixes;  // prefixes[k]: state before coupler k
    std::map<std::pair<std::size_t, double>, Prepared> shifted;
  };

  Prepared prepare_full(std::size_t t, std::span<const double> local) const {
    const auto& st = tiles_[t];
    if (backend_ == SamplerBackend::statevector) return StatevectorSampler(st.propagator->evolve(st.input, local));
    return PermanentSampler(circuit_unitary(plan_.tiles[t].layout, local), st.input);
  }

  const Prepared& base(std::size_t t, std::span<const double> local) {
    auto& st = tiles_[t];
    if (st.base && std::equal(local.begin(), local.end(), st.base_thetas.begin(), st.base_thetas.end())) {
      return *st.base;
    }
    st.base_thetas.assign(local.begin(), local.end());
    st.shifted.clear();
    st.prefixes.clear();
    if (backend_ == SamplerBackend::statevector && st.keep_prefixes) {
      auto state = FockStateVector::basis_state(st.propagator->basis_ptr(), st.input);
      auto& amps = state.mutable_amplitudes();
      for (std::size_t k = 0; k < local.size(); ++k) {
        st.prefixes.push_back(amps);
        st.propagator->apply_coupler(k, local[k], amps);
      }
      st.base.emplace(StatevectorSampler(state));
    } else {
      st.base.emplace(prepare_full(t, local));
    }
    return *st.base;
  }

  const Prepared& shifted(std::size_t t, std::span<const double> local, std::size_t index, double delta) {
    base(t, local);  // refresh caches for these angles
    auto& st = tiles_[t];
    const auto key = std::make_pair(index, delta);
    if (auto it = st.shifted.find(key); it != st.shifted.end()) return it->second;
    // without retention only the up/down pair of the current index is kept
    if (!retain_shifted_ && !st.shifted.empty() && st.shifted.begin()->first.first != index) st.shifted.clear();
    std::vector<double> angles(local.begin(), local.end());
    angles[index] += delta;
    if (!st.prefixes.empty()) {
      FockStateVector state(st.propagator->basis_ptr(), st.prefixes[index]);
      auto& amps = state.mutable_amplitudes();
      for (std::size_t k = index; k < angles.size(); ++k) st.propagator->apply_coupler(k, angles[k], amps);
      return st.shifted.emplace(key, StatevectorSampler(state)).first->second;
    }
    return st.shifted.emplace(key, prepare_full(t, angles)).first->second;
  }

  TilePlan plan_;
  SamplerBackend backend_;
  bool retain_shifted_ = false;
  std::vector<TileState> tiles_;
};

// ------------------------------------------------------------------ ledger

/// Memoizing cost-call counter with global best tracking. Every request
/// counts as a call, cache hit or not.
class EvalLedger {
 public:
  explicit EvalLedger(const CostFunction& cost) : cost_(&cost) {}

  /// Minimization-sense cost of x.
  double evaluate(const BitString& x) {
    ++calls_;
    double internal;
    if (auto it = memo_.find(x); it != memo_.end()) {
      internal = it->second;
    } else {
      const double native = (*cost_)(x);
      if (!std::isfinite(native)) throw std::runtime_error("cost function returned a non-finite value");
      internal = to_minimization(cost_->sense(), native);
      memo_.emplace(x, internal);
      if (!best_ || internal < best_internal_) {
        best_internal_ = internal;
        best_ = x;
      }
    }
    return internal;
  }

  std::uint64_t call_count() const noexcept { return calls_; }
  std::uint64_t unique_count() const noexcept { return memo_.size(); }
  Sense sense() const noexcept { return cost_->sense(); }
  bool has_best() const noexcept { return best_.has_value(); }
  const BitString& best_bits() const { return best_.value(); }
  /// Best cost in the problem's native sense.
  double best_cost() const { return to_minimization(cost_->sense(), best_internal_); }
  double best_internal() const noexcept { return best_internal_; }
  double native(double internal) const noexcept { return to_minimization(cost_->sense(), internal); }

 private:
  const CostFunction* cost_;
  std::unordered_map<BitString, double, BitStringHash> memo_;
  std::uint64_t calls_ = 0;
  std::optional<BitString> best_;
  double best_internal_ = 0.0;
};

// -------------------------------------------------------------- operations

/// All angles uniform on [0, 2 pi), all flip parameters 0 (p = 1/2).
template <class URBG>
BbsParams init_params(const TilePlan& plan, URBG& rng) {
  BbsParams p;
  p.thetas.resize(plan.coupler_count());
  for (auto& t : p.thetas) t = 2.0 * std::numbers::pi * uniform01(rng);
  p.alphas.assign(plan.modes, 0.0);
  return p;
}

/// Flips bit i with probability probs[i]; one uniform draw per bit.
template <class URBG>
void apply_bitflips(std::span<std::uint8_t> x, std::span<const double> probs, URBG& rng) {
  if (x.size() != probs.size()) throw std::invalid_argument("apply_bitflips: size mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (uniform01(rng) < probs[i]) x[i] ^= 1U;
  }
}

template <class URBG>
BitString apply_bitflips(const BitString& x, std::span<const double> probs, URBG& rng) {
  BitString y = x;
  apply_bitflips(y.view(), probs, rng);
  return y;
}

struct ForwardPass {
  double mean;         // minimization sense
  double native_mean;  // problem sense
  std::vector<BitString> raw;
};

/// Mean cost of S flipped samples; raw (pre-flip) samples are kept for the
/// flip-parameter gradients.
template <class URBG>
ForwardPass estimate_mean_cost(BbsModel& model, const BbsParams& params, std::size_t samples, URBG& rng,
                               EvalLedger& ledger) {
  if (samples < 1) throw std::invalid_argument("estimate_mean_cost: need at least one sample");
  const auto probs = params.probs();
  ForwardPass out{0.0, 0.0, {}};
  out.raw.reserve(samples);
  double sum = 0.0;
  for (std::size_t k = 0; k < samples; ++k) {
    BitString x(model.modes());
    model.draw(params.thetas, std::nullopt, rng, x.view());
    out.raw.push_back(x);
    apply_bitflips(x.view(), probs, rng);
    sum += ledger.evaluate(x);
  }
  out.mean = sum / static_cast<double>(samples);
  out.native_mean = ledger.native(out.mean);
  return out;
}

/// Shift-rule estimate scale * (E[C](theta_i + phi) - E[C](theta_i - phi)) / sin(phi)
/// from S fresh flipped samples on each side.
template <class URBG>
double grad_theta(BbsModel& model, const BbsParams& params, std::size_t index, std::size_t samples, double phi,
                  URBG& rng, EvalLedger& ledger, double gradient_scale = 1.0) {
  if (index >= params.thetas.size()) throw std::out_of_range("grad_theta: index out of range");
  if (!(phi > 0.0 && phi < std::numbers::pi)) throw std::invalid_argument("grad_theta: phi must lie in (0, pi)");
  const auto probs = params.probs();
  double up = 0.0;
  double down = 0.0;
  BitString xu(model.modes());
  BitString xd(model.modes());
  for (std::size_t l = 0; l < samples; ++l) {
    model.draw(params.thetas, std::make_pair(index, phi), rng, xu.view());
    model.draw(params.thetas, std::make_pair(index, -phi), rng, xd.view());
    apply_bitflips(xu.view(), probs, rng);
    apply_bitflips(xd.view(), probs, rng);
    up += ledger.evaluate(xu);
    down += ledger.evaluate(xd);
  }
  const double n = static_cast<double>(samples);
  return gradient_scale * (up / n - down / n) / std::sin(phi);
}

/// sigma'(alpha_i) * (E[C | p_i = 1] - E[C | p_i = 0]) over the stored raw
/// samples, the other bits flipped with their current probabilities. With
/// `common_random_numbers` both sides share the other bits' flip draws.
template <class URBG>
double grad_alpha(std::span<const BitString> raw, const BbsParams& params, std::size_t index, EvalLedger& ledger,
                  URBG& rng, bool common_random_numbers = false) {
  if (raw.empty()) throw std::invalid_argument("grad_alpha: no stored samples");
  if (index >= params.alphas.size()) throw std::out_of_range("grad_alpha: index out of range");
  auto probs_up = params.probs();
  auto probs_down = probs_up;
  probs_up[index] = 1.0;
  probs_down[index] = 0.0;
  double up = 0.0;
  double down = 0.0;
  std::vector<double> u(params.alphas.size());
  for (const auto& x : raw) {
    BitString xu = x;
    BitString xd = x;
    if (common_random_numbers) {
      for (auto& v : u) v = uniform01(rng);
      for (std::size_t j = 0; j < u.size(); ++j) {
        if (u[j] < probs_up[j]) xu.flip(j);
        if (u[j] < probs_down[j]) xd.flip(j);
      }
    } else {
      apply_bitflips(xu.view(), probs_up, rng);
      apply_bitflips(xd.view(), probs_down, rng);
    }
    up += ledger.evaluate(xu);
    down += ledger.evaluate(xd);
  }
  const double n = static_cast<double>(raw.size());
  return sigmoid_derivative(params.alphas[index]) * (up / n - down / n);
}

/// theta -= lr_theta * g_theta, alpha -= lr_alpha * g_alpha, jointly.
inline void sgd_update(BbsParams& params, std::span<const double> g_theta, std::span<const double> g_alpha,
                       double lr_theta, double lr_alpha) {
  if (g_theta.size() != params.thetas.size() || g_alpha.size() != params.alphas.size()) {
    throw std::invalid_argument("sgd_update: gradient length mismatch");
  }
  for (double g : g_theta) {
    if (!std::isfinite(g)) throw std::invalid_argument("sgd_update: non-finite angle gradient");
  }
  for (double g : g_alpha) {
    if (!std::isfinite(g)) throw std::invalid_argument("sgd_update: non-finite flip gradient");
  }
  for (std::size_t i = 0; i < g_theta.size(); ++i) params.thetas[i] -= lr_theta * g_theta[i];
  for (std::size_t i = 0; i < g_alpha.size(); ++i) params.alphas[i] -= lr_alpha * g_alpha[i];
}

// ------------------------------------------------------------ exact oracles

/// E[C(flip(X))] by enumerating every flip outcome of every raw pattern.
/// Exponential in m; meant for m <= ~10.
inline double exact_expected_cost(const std::vector<std::pair<BitString, double>>& raw_distribution,
                                  std::span<const double> probs, const CostFunction& cost) {
  const std::size_t m = probs.size();
  const std::uint64_t flips = std::uint64_t{1} << m;
  double e = 0.0;
  for (const auto& [x, px] : raw_distribution) {
    if (px == 0.0) continue;
    for (std::uint64_t f = 0; f < flips; ++f) {
      double pf = 1.0;
      BitString y = x;
      for (std::size_t i = 0; i < m; ++i) {
        if ((f >> i) & 1U) {
          pf *= probs[i];
          y.flip(i);
        } else {
          pf *= 1.0 - probs[i];
        }
      }
      if (pf == 0.0) continue;
      e += px * pf * to_minimization(cost.sense(), cost(y));
    }
  }
  return e;
}

/// Flip-parameter gradient from exact expectations.
inline double exact_alpha_gradient(const std::vector<std::pair<BitString, double>>& raw_distribution,
                                   std::span<const double> alphas, std::size_t index, const CostFunction& cost) {
  std::vector<double> probs(alphas.size());
  for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = sigmoid(alphas[i]);
  auto up = probs;
  auto down = probs;
  up[index] = 1.0;
  down[index] = 0.0;
  return sigmoid_derivative(alphas[index]) *
         (exact_expected_cost(raw_distribution, up, cost) - exact_expected_cost(raw_distribution, down, cost));
}

/// Shift-rule value from exact expectations.
inline double exact_theta_gradient(const BbsModel& model, const BbsParams& params, std::size_t index, double phi,
                                   const CostFunction& cost, double gradient_scale = 1.0) {
  const auto probs = params.probs();
  const double up = exact_expected_cost(model.exact_distribution(params.thetas, std::make_pair(index, phi)), probs, cost);
  const double down =
      exact_expected_cost(model.exact_distribution(params.thetas, std::make_pair(index, -phi)), probs, cost);
  return gradient_scale * (up - down) / std::sin(phi);
}

// ------------------------------------------------------------- training run

struct TraceRecord {
  std::size_t step;  // 1-based
  double loss;       // forward-pass mean cost, native sense
  double best_cost;  // running best, native sense
  std::vector<double> probs;
  std::vector<double> thetas;
};

/// Per-update records; probabilities and angles are those the forward pass
/// of that step used.
struct TrainingTrace {
  std::vector<TraceRecord> records;

  void write_csv(std::ostream& os) const;
};

struct BbsResult {
  BitString best_bits;
  double best_cost = 0.0;
  std::uint64_t calls = 0;
  std::uint64_t unique_evals = 0;
  std::uint64_t budget_bound = 0;
  std::uint64_t seed = 0;
  TrainingTrace trace;
  BbsParams final_params;
};

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void TrainingTrace::write_csv(std::ostream& os) const {
  const std::size_t m = records.empty() ? 0 : records.front().probs.size();
  const std::size_t t = records.empty() ? 0 : records.front().thetas.size();
  os << "step,loss,best_cost";
  for (std::size_t i = 1; i <= m; ++i) os << ",p_" << i;
  for (std::size_t i = 1; i <= t; ++i) os << ",theta_" << i;
  os << '\n';
  for (const auto& r : records) {
    os << r.step << ',' << format_double(r.loss) << ',' << format_double(r.best_cost);
    for (double p : r.probs) os << ',' << format_double(p);
    for (double th : r.thetas) os << ',' << format_double(th);
    os << '\n';
  }
}

inline nlohmann::json bits_to_json(const BitString& x) {
  nlohmann::json j = nlohmann::json::array();
  for (auto b : x.view()) j.push_back(static_cast<int>(b));
  return j;
}

inline nlohmann::json result_json(const BitString& bits, double cost, std::uint64_t calls, std::uint64_t unique,
                                  std::uint64_t bound, std::uint64_t seed) {
  return {{"best_bits", bits_to_json(bits)}, {"best_cost", cost},           {"calls", calls},
          {"unique_evals", unique},          {"budget_bound", bound},       {"seed", seed}};
}

inline nlohmann::json to_json(const BbsResult& r) {
  return result_json(r.best_bits, r.best_cost, r.calls, r.unique_evals, r.budget_bound, r.seed);
}

/// Runs N update steps on `cost` and returns the best string ever costed.
inline BbsResult run_bbs(const CostFunction& cost, const BbsConfig& cfg) {
  cfg.validate();
  const std::size_t m = cost.size();
  BbsModel model(plan_for(m, cfg), cfg.backend, cfg.max_fock_dimension);
  model.set_retain_shifted(cfg.lr_theta == 0.0);
  Rng rng(cfg.seed);
  EvalLedger ledger(cost);

  BbsResult res;
  res.seed = cfg.seed;
  res.budget_bound = budget_bound(model.plan(), cfg.updates, cfg.samples);
  BbsParams params = init_params(model.plan(), rng);
  std::vector<double> g_theta(params.thetas.size());
  std::vector<double> g_alpha(params.alphas.size());
  res.trace.records.reserve(cfg.updates);

  for (std::size_t step = 1; step <= cfg.updates; ++step) {
    const auto fwd = estimate_mean_cost(model, params, cfg.samples, rng, ledger);
    for (std::size_t i = 0; i < g_theta.size(); ++i) {
      g_theta[i] = grad_theta(model, params, i, cfg.samples, cfg.shift, rng, ledger, cfg.gradient_scale);
    }
    for (std::size_t i = 0; i < g_alpha.size(); ++i) {
      g_alpha[i] = grad_alpha(std::span<const BitString>(fwd.raw), params, i, ledger, rng, cfg.common_random_numbers);
    }
    res.trace.records.push_back({step, fwd.native_mean, ledger.best_cost(), params.probs(), params.thetas});
    sgd_update(params, g_theta, g_alpha, cfg.lr_theta, cfg.lr_alpha);
  }

  res.best_bits = ledger.best_bits();
  res.best_cost = ledger.best_cost();
  res.calls = ledger.call_count();
  res.unique_evals = ledger.unique_count();
  res.final_params = std::move(params);
  return res;
}

}  // namespace bbs

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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace bbs {

/// A candidate solution: one 0/1 byte per binary variable, bit 0 first.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::size_t size) : bits_(size, 0) {}
  explicit BitString(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
    for (auto b : bits_) {
      if (b > 1) throw std::invalid_argument("BitString: entries must be 0 or 1");
    }
  }
  BitString(std::initializer_list<int> bits) {
    bits_.reserve(bits.size());
    for (int b : bits) {
      if (b != 0 && b != 1) throw std::invalid_argument("BitString: entries must be 0 or 1");
      bits_.push_back(static_cast<std::uint8_t>(b));
    }
  }

  /// Parses "0110"-style text.
  static BitString parse(std::string_view text) {
    BitString out(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
      if (text[i] == '1') {
        out.bits_[i] = 1;
      } else if (text[i] != '0') {
        throw std::invalid_argument("BitString::parse: expected only '0' and '1'");
      }
    }
    return out;
  }

  /// Big-endian: bit 0 is the most significant. Requires size() <= 64.
  static BitString from_integer(std::uint64_t value, std::size_t size) {
    BitString out(size);
    for (std::size_t i = 0; i < size; ++i) {
      out.bits_[size - 1 - i] = static_cast<std::uint8_t>((value >> i) & 1U);
    }
    return out;
  }

  std::uint64_t to_integer() const {
    if (bits_.size() > 64) throw std::out_of_range("BitString::to_integer: more than 64 bits");
    std::uint64_t v = 0;
    for (auto b : bits_) v = (v << 1) | b;
    return v;
  }

  std::size_t size() const noexcept { return bits_.size(); }
  bool empty() const noexcept { return bits_.empty(); }
  std::uint8_t operator[](std::size_t i) const noexcept { return bits_[i]; }
  std::uint8_t& operator[](std::size_t i) noexcept { return bits_[i]; }
  void flip(std::size_t i) noexcept { bits_[i] ^= 1U; }

  std::span<const std::uint8_t> view() const noexcept { return bits_; }
  std::span<std::uint8_t> view() noexcept { return bits_; }
  const std::vector<std::uint8_t>& data() const noexcept { return bits_; }

  std::size_t popcount() const noexcept {
    std::size_t n = 0;
    for (auto b : bits_) n += b;
    return n;
  }

  std::string to_string() const {
    std::string s(bits_.size(), '0');
    for (std::size_t i = 0; i < bits_.size(); ++i) s[i] = bits_[i] ? '1' : '0';
    return s;
  }

  friend bool operator==(const BitString&, const BitString&) = default;
  friend auto operator<=>(const BitString&, const BitString&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

struct BitStringHash {
  std::size_t operator()(const BitString& x) const noexcept {
    // FNV-1a
    std::uint64_t h = 1469598103934665603ULL;
    for (auto b : x.view()) {
      h ^= b;
      h *= 1099511628211ULL;
    }
    h ^= x.size();
    return static_cast<std::size_t>(h);
  }
};

/// Optimization direction of a cost function.
enum class Sense { minimize, maximize };

inline std::string_view to_string(Sense s) noexcept {
  return s == Sense::minimize ? "minimize" : "maximize";
}

/// Maps a native-sense cost to the minimization convention used internally.
inline double to_minimization(Sense s, double native) noexcept {
  return s == Sense::maximize ? -native : native;
}

/// True when `a` is strictly better than `b` in sense `s`.
inline bool better(Sense s, double a, double b) noexcept {
  return s == Sense::minimize ? a < b : a > b;
}

}  // namespace bbs

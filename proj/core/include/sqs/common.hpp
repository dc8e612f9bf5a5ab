// Copyright 2026 The sqs-sim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <bit>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

namespace sqs {

using cplx = std::complex<double>;

/// Occupation string of at most 64 atoms; bit i set means atom i is in |r>.
using Config = std::uint64_t;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Error categories. Precondition violations on plain arguments throw
// std::invalid_argument / std::out_of_range; the classes below carry the
// categories the command-line runner maps onto exit codes.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BudgetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fixed-capacity vertex set for graphs of up to 128 atoms (the 73-atom
/// 2D arrays do not fit a single machine word).
class AtomSet {
 public:
  static constexpr std::size_t kCapacity = 128;

  constexpr AtomSet() = default;
  static AtomSet from_config(Config c) {
    AtomSet s;
    s.w_[0] = c;
    return s;
  }

  bool test(std::size_t i) const { return (w_[i >> 6] >> (i & 63)) & 1u; }
  void set(std::size_t i) { w_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  void reset(std::size_t i) { w_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
  void flip(std::size_t i) { w_[i >> 6] ^= std::uint64_t{1} << (i & 63); }

  std::size_t count() const { return static_cast<std::size_t>(std::popcount(w_[0]) + std::popcount(w_[1])); }
  bool none() const { return (w_[0] | w_[1]) == 0; }
  bool any() const { return !none(); }

  /// Index of the lowest set bit, or kCapacity when empty.
  std::size_t first() const {
    if (w_[0]) return static_cast<std::size_t>(std::countr_zero(w_[0]));
    if (w_[1]) return 64 + static_cast<std::size_t>(std::countr_zero(w_[1]));
    return kCapacity;
  }

  /// Lossy when any atom >= 64 is set; callers check `fits_config()`.
  Config to_config() const { return w_[0]; }
  bool fits_config() const { return w_[1] == 0; }

  AtomSet operator&(const AtomSet& o) const { return {w_[0] & o.w_[0], w_[1] & o.w_[1]}; }
  AtomSet operator|(const AtomSet& o) const { return {w_[0] | o.w_[0], w_[1] | o.w_[1]}; }
  AtomSet operator^(const AtomSet& o) const { return {w_[0] ^ o.w_[0], w_[1] ^ o.w_[1]}; }
  AtomSet without(const AtomSet& o) const { return {w_[0] & ~o.w_[0], w_[1] & ~o.w_[1]}; }
  AtomSet& operator|=(const AtomSet& o) {
    w_[0] |= o.w_[0];
    w_[1] |= o.w_[1];
    return *this;
  }
  AtomSet& operator&=(const AtomSet& o) {
    w_[0] &= o.w_[0];
    w_[1] &= o.w_[1];
    return *this;
  }
  bool operator==(const AtomSet&) const = default;
  auto operator<=>(const AtomSet& o) const {
    if (w_[1] != o.w_[1]) return w_[1] <=> o.w_[1];
    return w_[0] <=> o.w_[0];
  }

  /// 0/1 characters, atom 0 first.
  std::string to_string(std::size_t n_atoms) const;
  static AtomSet from_string(std::string_view bits);

  template <class F>
  void for_each(F&& f) const {
    for (int k = 0; k < 2; ++k) {
      std::uint64_t w = w_[k];
      while (w) {
        f(static_cast<std::size_t>(64 * k + std::countr_zero(w)));
        w &= w - 1;
      }
    }
  }

 private:
  constexpr AtomSet(std::uint64_t lo, std::uint64_t hi) : w_{lo, hi} {}
  std::array<std::uint64_t, 2> w_{0, 0};
};

/// Counter-based random stream. A (seed, index) pair names an independent
/// stream, so per-shot work can run in any order with identical output.
class Stream {
 public:
  Stream(std::uint64_t seed, std::uint64_t index);
  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, n).
  std::size_t below(std::size_t n);

 private:
  std::uint64_t state_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// FNV-1a 64-bit content fingerprint rendered as 16 hex digits.
std::string fnv1a_hex(std::string_view bytes);
std::uint64_t fnv1a(std::string_view bytes);

/// Shortest-roundtrip-safe fixed formatting (17 significant digits).
std::string fmt17(double v);

/// Calls f(i) for i in [0, n) on up to `threads` workers. The first exception
/// thrown by any call is rethrown after all workers finish.
template <class F>
void parallel_for(std::size_t n, unsigned threads, F&& f) {
  std::atomic<std::size_t> next{0};
  std::mutex mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        f(i);
      } catch (...) {
        std::lock_guard lock(mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  const auto n_workers = static_cast<unsigned>(std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1)));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < n_workers; ++w) pool.emplace_back(worker);
    worker();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace sqs

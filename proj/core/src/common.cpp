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

#include "sqs/common.hpp"

#include <cstdio>

namespace sqs {

std::string AtomSet::to_string(std::size_t n_atoms) const {
  if (n_atoms > kCapacity) throw std::invalid_argument("AtomSet::to_string: too many atoms");
  std::string s(n_atoms, '0');
  for (std::size_t i = 0; i < n_atoms; ++i) {
    if (test(i)) s[i] = '1';
  }
  return s;
}

AtomSet AtomSet::from_string(std::string_view bits) {
  if (bits.size() > kCapacity) throw std::invalid_argument("bitstring longer than 128 atoms");
  AtomSet s;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1') {
      s.set(i);
    } else if (bits[i] != '0') {
      throw std::invalid_argument("bitstring contains a character other than 0/1");
    }
  }
  return s;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

Stream::Stream(std::uint64_t seed, std::uint64_t index)
    : state_(splitmix64(seed ^ splitmix64(index + 0x632be59bd9b4e019ull))) {}

std::uint64_t Stream::next_u64() {
  state_ += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double Stream::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::size_t Stream::below(std::size_t n) {
  if (n == 0) throw std::invalid_argument("Stream::below(0)");
  // Rejection of the biased low range, then modulo.
  const auto range = static_cast<std::uint64_t>(n);
  const std::uint64_t threshold = (0 - range) % range;
  while (true) {
    const std::uint64_t x = next_u64();
    if (x >= threshold) return static_cast<std::size_t>(x % range);
  }
}

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string fnv1a_hex(std::string_view bytes) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(bytes)));
  return buf;
}

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace sqs

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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "sqs/common.hpp"
#include "sqs/dyn_dense.hpp"
#include "sqs/geometry.hpp"

namespace sqs {

enum class Provenance { raw = 0, noisy = 1, postprocessed = 2 };

std::string to_string(Provenance p);
Provenance parse_provenance(const std::string& s);

/// Measured bitstrings, one entry per shot, in the fixed atom order.
class ShotSet {
 public:
  ShotSet(std::size_t n_atoms, std::vector<AtomSet> shots, std::optional<std::uint64_t> seed, Provenance provenance,
          std::string array_hash);

  std::size_t n_atoms() const { return n_atoms_; }
  std::size_t size() const { return shots_.size(); }
  const std::vector<AtomSet>& shots() const { return shots_; }
  const AtomSet& operator[](std::size_t i) const { return shots_[i]; }
  std::optional<std::uint64_t> seed() const { return seed_; }
  Provenance provenance() const { return provenance_; }
  const std::string& array_hash() const { return array_hash_; }

  /// Loading postselection applied by an external source (metadata only).
  bool postselected() const { return postselected_; }
  void set_postselected(bool v) { postselected_ = v; }

  /// Distinct configurations with their multiplicities (all >= 1).
  std::map<AtomSet, std::size_t> counts() const;

  /// Copy carrying new shots and a later provenance stage.
  /// Throws std::logic_error when `next` does not move forward.
  ShotSet advance(std::vector<AtomSet> shots, Provenance next, std::optional<std::uint64_t> seed) const;

 private:
  std::size_t n_atoms_;
  std::vector<AtomSet> shots_;
  std::optional<std::uint64_t> seed_;
  Provenance provenance_;
  std::string array_hash_;
  bool postselected_ = false;
};

/// Cumulative-probability inversion over |amplitude|^2; shot i draws from
/// stream (seed, i).
ShotSet sample_dense(const DenseState& state, std::size_t shots, std::uint64_t seed, std::string array_hash = {});

/// Independent per-atom readout flips r->g with `p_r_to_g` and g->r with `p_g_to_r`.
ShotSet detection_channel(const ShotSet& in, double p_r_to_g, double p_g_to_r, std::uint64_t seed);

/// Probability that a configuration with `n_r` excitations and `n_g` ground
/// atoms is read out without error.
double exact_readout_probability(std::size_t n_r, std::size_t n_g, double p_r_to_g, double p_g_to_r);

/// Blockade repair: drop the Rydberg atom with the most violations (uniform
/// tie-break) until none remain, then add uniformly random unblockaded ground
/// atoms until the set is maximal.
AtomSet postprocess_algorithm1(const AtomSet& config, const BlockadeGraph& graph, Stream& rng);
/// Shot-level application with per-shot streams (seed, i).
ShotSet postprocess_algorithm1(const ShotSet& in, const BlockadeGraph& graph, std::uint64_t seed);

struct Estimate {
  double p = 0.0;
  double standard_error = 0.0;
  /// True when p is 0 or 1 and the binomial standard error collapses to zero.
  bool degenerate_error = false;
  std::size_t hits = 0;
  std::size_t shots = 0;
};

Estimate estimate(const ShotSet& shots, const std::function<bool(const AtomSet&)>& predicate);
Estimate estimate(const ShotSet& shots, std::span<const AtomSet> targets);

/// Connected correlation sum over `pairs` from empirical means.
double connected_correlation_sum(const ShotSet& shots, std::span<const std::pair<std::size_t, std::size_t>> pairs);
std::vector<double> expectation_n(const ShotSet& shots);

/// Keeps shots whose flag is true and marks the set as postselected.
ShotSet filter_loaded(const ShotSet& in, const std::vector<bool>& fully_loaded);

/// `<path>` holds one 0/1 line per shot; `<path>.json` is the sidecar.
void write_shots(const std::string& path, const ShotSet& shots);
/// Reads the shot file and, if present, its sidecar. External data without a
/// sidecar is ingested as raw with no seed.
ShotSet read_shots(const std::string& path);
nlohmann::json sidecar(const ShotSet& shots);

}  // namespace sqs

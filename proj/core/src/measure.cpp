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

#include "sqs/measure.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <stdexcept>

namespace sqs {

std::string to_string(Provenance p) {
  switch (p) {
    case Provenance::raw:
      return "raw";
    case Provenance::noisy:
      return "noisy";
    case Provenance::postprocessed:
      return "postprocessed";
  }
  throw std::invalid_argument("unknown provenance");
}

Provenance parse_provenance(const std::string& s) {
  if (s == "raw") return Provenance::raw;
  if (s == "noisy") return Provenance::noisy;
  if (s == "postprocessed") return Provenance::postprocessed;
  throw std::invalid_argument("unknown provenance '" + s + "'");
}

ShotSet::ShotSet(std::size_t n_atoms, std::vector<AtomSet> shots, std::optional<std::uint64_t> seed,
                 Provenance provenance, std::string array_hash)
    : n_atoms_(n_atoms),
      shots_(std::move(shots)),
      seed_(seed),
      provenance_(provenance),
      array_hash_(std::move(array_hash)) {
  if (n_atoms_ > AtomSet::kCapacity) throw std::invalid_argument("ShotSet: too many atoms");
}

std::map<AtomSet, std::size_t> ShotSet::counts() const {
  std::map<AtomSet, std::size_t> out;
  for (const AtomSet& s : shots_) ++out[s];
  return out;
}

ShotSet ShotSet::advance(std::vector<AtomSet> shots, Provenance next, std::optional<std::uint64_t> seed) const {
  if (static_cast<int>(next) <= static_cast<int>(provenance_)) {
    throw std::logic_error("shot provenance can only move forward (" + to_string(provenance_) + " -> " +
                           to_string(next) + ")");
  }
  ShotSet out(n_atoms_, std::move(shots), seed, next, array_hash_);
  out.postselected_ = postselected_;
  return out;
}

ShotSet sample_dense(const DenseState& state, std::size_t shots, std::uint64_t seed, std::string array_hash) {
  const BasisSet& b = *state.basis;
  std::vector<double> cdf(b.size());
  double acc = 0.0;
  for (std::size_t a = 0; a < b.size(); ++a) {
    acc += std::norm(state.amplitudes(static_cast<Eigen::Index>(a)));
    cdf[a] = acc;
  }
  if (!(acc > 0.0)) throw NumericError("sample_dense: state has zero norm");
  std::vector<AtomSet> out(shots);
  for (std::size_t i = 0; i < shots; ++i) {
    Stream rng(seed, i);
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    // Rounding can put u at the total; fall back to the last populated entry.
    if (it == cdf.end()) it = std::lower_bound(cdf.begin(), cdf.end(), acc);
    out[i] = AtomSet::from_config(b.config(static_cast<std::size_t>(it - cdf.begin())));
  }
  return ShotSet(b.n_atoms(), std::move(out), seed, Provenance::raw, std::move(array_hash));
}

ShotSet detection_channel(const ShotSet& in, double p_r_to_g, double p_g_to_r, std::uint64_t seed) {
  if (!(p_r_to_g >= 0.0 && p_r_to_g <= 1.0) || !(p_g_to_r >= 0.0 && p_g_to_r <= 1.0)) {
    throw std::invalid_argument("detection_channel: probabilities must lie in [0, 1]");
  }
  std::vector<AtomSet> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    Stream rng(seed, i);
    AtomSet s = in[i];
    for (std::size_t a = 0; a < in.n_atoms(); ++a) {
      const double u = rng.uniform();
      if (s.test(a) ? u < p_r_to_g : u < p_g_to_r) s.flip(a);
    }
    out[i] = s;
  }
  return in.advance(std::move(out), Provenance::noisy, seed);
}

double exact_readout_probability(std::size_t n_r, std::size_t n_g, double p_r_to_g, double p_g_to_r) {
  return std::pow(1.0 - p_r_to_g, static_cast<double>(n_r)) * std::pow(1.0 - p_g_to_r, static_cast<double>(n_g));
}

AtomSet postprocess_algorithm1(const AtomSet& config, const BlockadeGraph& graph, Stream& rng) {
  AtomSet s = config;
  std::vector<std::size_t> candidates;
  while (true) {
    std::size_t most = 0;
    candidates.clear();
    s.for_each([&](std::size_t v) {
      const std::size_t viol = (graph.neighbors[v] & s).count();
      if (viol > most) {
        most = viol;
        candidates.clear();
      }
      if (viol == most && viol > 0) candidates.push_back(v);
    });
    if (most == 0) break;
    s.reset(candidates[rng.below(candidates.size())]);
  }
  while (true) {
    candidates.clear();
    for (std::size_t v = 0; v < graph.n_vertices; ++v) {
      if (!s.test(v) && (graph.neighbors[v] & s).none()) candidates.push_back(v);
    }
    if (candidates.empty()) break;
    s.set(candidates[rng.below(candidates.size())]);
  }
  return s;
}

ShotSet postprocess_algorithm1(const ShotSet& in, const BlockadeGraph& graph, std::uint64_t seed) {
  if (graph.n_vertices != in.n_atoms()) throw std::invalid_argument("postprocess: graph does not match the shots");
  std::vector<AtomSet> out(in.size());
  for (std::size_t i = 0; i < in.size(); ++i) {
    Stream rng(seed, i);
    out[i] = postprocess_algorithm1(in[i], graph, rng);
  }
  return in.advance(std::move(out), Provenance::postprocessed, seed);
}

Estimate estimate(const ShotSet& shots, const std::function<bool(const AtomSet&)>& predicate) {
  if (shots.size() == 0) throw std::invalid_argument("estimate: empty shot set");
  Estimate e;
  e.shots = shots.size();
  for (const AtomSet& s : shots.shots()) e.hits += predicate(s) ? 1 : 0;
  e.p = static_cast<double>(e.hits) / static_cast<double>(e.shots);
  e.standard_error = std::sqrt(e.p * (1.0 - e.p) / static_cast<double>(e.shots));
  e.degenerate_error = e.hits == 0 || e.hits == e.shots;
  return e;
}

Estimate estimate(const ShotSet& shots, std::span<const AtomSet> targets) {
  const std::set<AtomSet> set(targets.begin(), targets.end());
  return estimate(shots, [&](const AtomSet& s) { return set.contains(s); });
}

std::vector<double> expectation_n(const ShotSet& shots) {
  if (shots.size() == 0) throw std::invalid_argument("expectation_n: empty shot set");
  std::vector<double> n(shots.n_atoms(), 0.0);
  for (const AtomSet& s : shots.shots()) s.for_each([&](std::size_t a) { n[a] += 1.0; });
  for (double& v : n) v /= static_cast<double>(shots.size());
  return n;
}

double connected_correlation_sum(const ShotSet& shots, std::span<const std::pair<std::size_t, std::size_t>> pairs) {
  const std::vector<double> n = expectation_n(shots);
  double sum = 0.0;
  for (const auto& [i, j] : pairs) {
    std::size_t both = 0;
    for (const AtomSet& s : shots.shots()) both += (s.test(i) && s.test(j)) ? 1 : 0;
    sum += static_cast<double>(both) / static_cast<double>(shots.size()) - n[i] * n[j];
  }
  return sum;
}

ShotSet filter_loaded(const ShotSet& in, const std::vector<bool>& fully_loaded) {
  if (fully_loaded.size() != in.size()) throw std::invalid_argument("filter_loaded: one flag per shot expected");
  std::vector<AtomSet> kept;
  for (std::size_t i = 0; i < in.size(); ++i) {
    if (fully_loaded[i]) kept.push_back(in[i]);
  }
  ShotSet out(in.n_atoms(), std::move(kept), in.seed(), in.provenance(), in.array_hash());
  out.set_postselected(true);
  return out;
}

nlohmann::json sidecar(const ShotSet& shots) {
  nlohmann::json j{{"n_atoms", shots.n_atoms()},
                   {"n_shots", shots.size()},
                   {"provenance", to_string(shots.provenance())},
                   {"array_hash", shots.array_hash()},
                   {"postselected", shots.postselected()}};
  j["seed"] = shots.seed() ? nlohmann::json(*shots.seed()) : nlohmann::json(nullptr);
  return j;
}

void write_shots(const std::string& path, const ShotSet& shots) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  for (const AtomSet& s : shots.shots()) os << s.to_string(shots.n_atoms()) << '\n';
  std::ofstream js(path + ".json");
  if (!js) throw std::runtime_error("cannot open " + path + ".json for writing");
  js << sidecar(shots).dump(2) << '\n';
}

ShotSet read_shots(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  std::vector<AtomSet> shots;
  std::size_t n_atoms = 0;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (shots.empty()) n_atoms = line.size();
    if (line.size() != n_atoms || line.find_first_not_of("01") != std::string::npos) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": malformed shot line");
    }
    shots.push_back(AtomSet::from_string(line));
  }
  std::optional<std::uint64_t> seed;
  Provenance prov = Provenance::raw;
  std::string hash;
  bool postselected = false;
  if (std::filesystem::exists(path + ".json")) {
    std::ifstream js(path + ".json");
    const nlohmann::json j = nlohmann::json::parse(js);
    if (j.contains("seed") && !j["seed"].is_null()) seed = j["seed"].get<std::uint64_t>();
    prov = parse_provenance(j.value("provenance", std::string("raw")));
    hash = j.value("array_hash", std::string());
    postselected = j.value("postselected", false);
    if (j.contains("n_atoms") && !shots.empty() && j["n_atoms"].get<std::size_t>() != n_atoms) {
      throw std::runtime_error(path + ": sidecar atom count disagrees with the shot lines");
    }
    if (shots.empty()) n_atoms = j.value("n_atoms", std::size_t{0});
  }
  ShotSet out(n_atoms, std::move(shots), seed, prov, std::move(hash));
  out.set_postselected(postselected);
  return out;
}

}  // namespace sqs

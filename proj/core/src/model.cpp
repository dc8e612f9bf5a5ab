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

#include "sqs/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace sqs {

// ------------------------------------------------------------------ basis

BasisSet::BasisSet(std::vector<Config> configs, std::size_t n_atoms, Constraint constraint)
    : configs_(std::move(configs)), n_atoms_(n_atoms), constraint_(constraint) {}

BasisSet BasisSet::enumerate(const BlockadeGraph& graph, Constraint constraint, std::size_t max_size) {
  const std::size_t n = graph.n_vertices;
  if (n > 63) throw BudgetError("basis enumeration supports at most 63 atoms");
  if (constraint == Constraint::full) {
    const std::size_t dim = std::size_t{1} << n;
    if (dim > max_size) {
      throw BudgetError("full basis of " + std::to_string(n) + " atoms exceeds budget of " + std::to_string(max_size) +
                        " configs");
    }
    std::vector<Config> configs(dim);
    for (std::size_t c = 0; c < dim; ++c) configs[c] = c;
    return BasisSet(std::move(configs), n, constraint);
  }

  // Masks of lower-indexed neighbours; a vertex may be added when none of its
  // earlier neighbours is occupied. Sweeping in index order is a site-by-site
  // transfer sweep for chain layouts.
  std::vector<Config> earlier(n, 0);
  for (auto [i, j] : graph.edges) earlier[j] |= Config{1} << i;

  std::vector<Config> configs;
  std::vector<std::pair<std::size_t, Config>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [v, c] = stack.back();
    stack.pop_back();
    if (v == n) {
      if (configs.size() >= max_size) {
        throw BudgetError("blockade basis exceeds budget of " + std::to_string(max_size) + " configs");
      }
      configs.push_back(c);
      continue;
    }
    stack.emplace_back(v + 1, c);
    if ((earlier[v] & c) == 0) stack.emplace_back(v + 1, c | (Config{1} << v));
  }
  std::sort(configs.begin(), configs.end());
  return BasisSet(std::move(configs), n, constraint);
}

std::optional<std::size_t> BasisSet::index_of(Config c) const {
  if (constraint_ == Constraint::full) {
    if (c < configs_.size()) return static_cast<std::size_t>(c);
    return std::nullopt;
  }
  auto it = std::lower_bound(configs_.begin(), configs_.end(), c);
  if (it == configs_.end() || *it != c) return std::nullopt;
  return static_cast<std::size_t>(it - configs_.begin());
}

std::string BasisSet::hash() const {
  std::string bytes;
  bytes.reserve(configs_.size() * sizeof(Config) + 16);
  bytes += std::to_string(n_atoms_);
  bytes += constraint_ == Constraint::full ? "F" : "B";
  for (Config c : configs_) bytes.append(reinterpret_cast<const char*>(&c), sizeof c);
  return fnv1a_hex(bytes);
}

nlohmann::json BasisSet::dump() const {
  nlohmann::json list = nlohmann::json::array();
  for (Config c : configs_) list.push_back(AtomSet::from_config(c).to_string(n_atoms_));
  return {{"n_atoms", n_atoms_},
          {"constraint", constraint_ == Constraint::full ? "full" : "blockade"},
          {"size", configs_.size()},
          {"hash", hash()},
          {"configs", list}};
}

// ------------------------------------------------------- classical energy

double classical_energy(Config c, const Eigen::MatrixXd& v, double delta) {
  double e = -delta * std::popcount(c);
  for (Config a = c; a; a &= a - 1) {
    const int i = std::countr_zero(a);
    for (Config b = a & (a - 1); b; b &= b - 1) {
      e += v(i, std::countr_zero(b));
    }
  }
  return e;
}

double classical_energy(const AtomSet& c, const Eigen::MatrixXd& v, double delta) {
  std::vector<Eigen::Index> on;
  c.for_each([&](std::size_t i) { on.push_back(static_cast<Eigen::Index>(i)); });
  double e = -delta * static_cast<double>(on.size());
  for (std::size_t a = 0; a < on.size(); ++a) {
    for (std::size_t b = a + 1; b < on.size(); ++b) e += v(on[a], on[b]);
  }
  return e;
}

// ------------------------------------------------------------ Hamiltonian

struct HamiltonianOperator::Structure {
  std::shared_ptr<const BasisSet> basis;
  std::vector<double> occupation;
  std::vector<double> interaction;
  std::vector<std::uint32_t> hop_a;
  std::vector<std::uint32_t> hop_b;
  std::vector<double> hop_amp;  // scale_i / 2, multiplied by Omega at apply time
  std::vector<double> row_abs;  // sum of |hop_amp| touching each row
  double max_interaction = 0.0;
};

HamiltonianOperator::HamiltonianOperator(std::shared_ptr<const Structure> s, double omega, double delta)
    : s_(std::move(s)), omega_(omega), delta_(delta) {}

HamiltonianOperator HamiltonianOperator::build(const AtomArray& array, std::shared_ptr<const BasisSet> basis,
                                               const Eigen::MatrixXd& interactions, double omega, double delta) {
  if (!basis) throw std::invalid_argument("HamiltonianOperator::build: null basis");
  const std::size_t n = array.size();
  if (basis->n_atoms() != n) throw std::invalid_argument("basis and array have different atom counts");
  if (static_cast<std::size_t>(interactions.rows()) != n || static_cast<std::size_t>(interactions.cols()) != n) {
    throw std::invalid_argument("interaction matrix does not match the array");
  }
  if (basis->size() > std::size_t{0xffffffffu}) throw BudgetError("basis too large for 32-bit hop indices");

  auto s = std::make_shared<Structure>();
  s->basis = basis;
  const std::size_t dim = basis->size();
  s->occupation.resize(dim);
  s->interaction.resize(dim);
  s->row_abs.assign(dim, 0.0);
  for (std::size_t a = 0; a < dim; ++a) {
    const Config c = basis->config(a);
    s->occupation[a] = std::popcount(c);
    s->interaction[a] = classical_energy(c, interactions, 0.0);
    s->max_interaction = std::max(s->max_interaction, std::abs(s->interaction[a]));
    for (std::size_t i = 0; i < n; ++i) {
      const Config flipped = c ^ (Config{1} << i);
      if (flipped < c) continue;
      if (auto b = basis->index_of(flipped)) {
        const double amp = 0.5 * array[i].rabi_scale;
        s->hop_a.push_back(static_cast<std::uint32_t>(a));
        s->hop_b.push_back(static_cast<std::uint32_t>(*b));
        s->hop_amp.push_back(amp);
        s->row_abs[a] += amp;
        s->row_abs[*b] += amp;
      }
    }
  }
  return HamiltonianOperator(std::move(s), omega, delta);
}

HamiltonianOperator HamiltonianOperator::at(double omega, double delta) const {
  return HamiltonianOperator(s_, omega, delta);
}

std::size_t HamiltonianOperator::dim() const { return s_->basis->size(); }
const BasisSet& HamiltonianOperator::basis() const { return *s_->basis; }
std::shared_ptr<const BasisSet> HamiltonianOperator::basis_ptr() const { return s_->basis; }
std::size_t HamiltonianOperator::n_offdiagonal() const { return s_->hop_a.size(); }

double HamiltonianOperator::diagonal(std::size_t a) const { return -delta_ * s_->occupation[a] + s_->interaction[a]; }

double HamiltonianOperator::interaction_energy(std::size_t a) const { return s_->interaction[a]; }

template <class T>
void HamiltonianOperator::apply_impl(std::span<const T> in, std::span<T> out) const {
  const std::size_t dim = this->dim();
  if (in.size() != dim || out.size() != dim) throw std::invalid_argument("HamiltonianOperator::apply: size mismatch");
  const double* occ = s_->occupation.data();
  const double* inter = s_->interaction.data();
  for (std::size_t a = 0; a < dim; ++a) out[a] = (inter[a] - delta_ * occ[a]) * in[a];
  const std::size_t nh = s_->hop_a.size();
  const std::uint32_t* ha = s_->hop_a.data();
  const std::uint32_t* hb = s_->hop_b.data();
  const double* amp = s_->hop_amp.data();
  for (std::size_t k = 0; k < nh; ++k) {
    const double w = omega_ * amp[k];
    out[ha[k]] += w * in[hb[k]];
    out[hb[k]] += w * in[ha[k]];
  }
}

void HamiltonianOperator::apply(std::span<const cplx> in, std::span<cplx> out) const { apply_impl(in, out); }
void HamiltonianOperator::apply(std::span<const double> in, std::span<double> out) const { apply_impl(in, out); }

double HamiltonianOperator::norm_bound() const {
  double best = 0.0;
  for (std::size_t a = 0; a < dim(); ++a) {
    best = std::max(best, std::abs(diagonal(a)) + std::abs(omega_) * s_->row_abs[a]);
  }
  return best;
}

Eigen::MatrixXd HamiltonianOperator::to_dense() const {
  const auto d = static_cast<Eigen::Index>(dim());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(d, d);
  for (Eigen::Index a = 0; a < d; ++a) m(a, a) = diagonal(static_cast<std::size_t>(a));
  for (std::size_t k = 0; k < s_->hop_a.size(); ++k) {
    const double w = omega_ * s_->hop_amp[k];
    m(s_->hop_a[k], s_->hop_b[k]) += w;
    m(s_->hop_b[k], s_->hop_a[k]) += w;
  }
  return m;
}

nlohmann::json HamiltonianOperator::dump() const {
  const auto& basis = *s_->basis;
  nlohmann::json diag = nlohmann::json::array();
  for (std::size_t a = 0; a < dim(); ++a) {
    diag.push_back({{"config", AtomSet::from_config(basis.config(a)).to_string(basis.n_atoms())},
                    {"occupation", s_->occupation[a]},
                    {"interaction", s_->interaction[a]}});
  }
  nlohmann::json off = nlohmann::json::array();
  for (std::size_t k = 0; k < s_->hop_a.size(); ++k) {
    off.push_back({s_->hop_a[k], s_->hop_b[k], s_->hop_amp[k]});
  }
  return {{"omega", omega_}, {"delta", delta_}, {"basis_hash", basis.hash()}, {"diagonal", diag}, {"offdiagonal", off}};
}

// ----------------------------------------------------------- named states

std::string to_string(StateKind k) {
  switch (k) {
    case StateKind::MIS:
      return "MIS";
    case StateKind::S:
      return "S";
    case StateKind::Z:
      return "Z";
    case StateKind::Zbar:
      return "Zbar";
    case StateKind::ZigzagMix:
      return "ZigzagMix";
  }
  return "?";
}

StateKind parse_state_kind(const std::string& s) {
  for (StateKind k : {StateKind::MIS, StateKind::S, StateKind::Z, StateKind::Zbar, StateKind::ZigzagMix}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown named state '" + s + "'");
}

std::size_t doublet_chain_atom(int site, AtomKind kind) {
  if (site < 1) throw std::out_of_range("doublet_chain_atom: site must be >= 1");
  if (site % 2 == 1) {
    if (kind != AtomKind::single) throw std::invalid_argument("odd doublet-chain sites hold a single atom");
    return static_cast<std::size_t>(3 * (site - 1) / 2);
  }
  if (kind == AtomKind::single) throw std::invalid_argument("even doublet-chain sites hold a doublet");
  const auto top = static_cast<std::size_t>((3 * site - 4) / 2);
  return kind == AtomKind::doublet_top ? top : top + 1;
}

std::vector<Config> NamedState::support() const {
  std::vector<Config> out;
  for (const auto& t : terms) out.push_back(t.first);
  return out;
}

namespace {

Config bit(int site, AtomKind kind) { return Config{1} << doublet_chain_atom(site, kind); }

Config zigzag_config(int L, bool start_top) {
  Config c = bit(1, AtomKind::single) | bit(L, AtomKind::single);
  bool top = start_top;
  for (int site = 4; site <= L - 3; site += 2) {
    c |= bit(site, top ? AtomKind::doublet_top : AtomKind::doublet_bottom);
    top = !top;
  }
  return c;
}

}  // namespace

std::vector<std::pair<Config, double>> named_state_terms(StateKind kind, int L) {
  if (L < 3 || L % 2 == 0) throw std::invalid_argument("named states need an odd chain length L >= 3");
  if (3 * (L - 1) / 2 + 1 > 64) throw std::invalid_argument("named states support at most 64 atoms");
  if (kind == StateKind::MIS) {
    Config c = 0;
    for (int site = 1; site <= L; site += 2) c |= bit(site, AtomKind::single);
    return {{c, 1.0}};
  }
  if (L < 7) throw std::invalid_argument(to_string(kind) + " needs at least one bulk doublet (L >= 7)");
  switch (kind) {
    case StateKind::Z:
      return {{zigzag_config(L, true), 1.0}};
    case StateKind::Zbar:
      return {{zigzag_config(L, false), 1.0}};
    case StateKind::ZigzagMix: {
      const double a = 1.0 / std::sqrt(2.0);
      return {{zigzag_config(L, true), a}, {zigzag_config(L, false), a}};
    }
    case StateKind::S: {
      const Config boundary = bit(1, AtomKind::single) | bit(L, AtomKind::single);
      std::vector<int> bulk;
      for (int site = 4; site <= L - 3; site += 2) bulk.push_back(site);
      const std::size_t n = std::size_t{1} << bulk.size();
      const double amp = std::pow(2.0, -0.5 * static_cast<double>(bulk.size()));
      std::vector<std::pair<Config, double>> terms;
      for (std::size_t m = 0; m < n; ++m) {
        Config c = boundary;
        for (std::size_t k = 0; k < bulk.size(); ++k) {
          c |= bit(bulk[k], ((m >> k) & 1) ? AtomKind::doublet_bottom : AtomKind::doublet_top);
        }
        terms.emplace_back(c, amp);
      }
      std::sort(terms.begin(), terms.end());
      return terms;
    }
    default:
      break;
  }
  throw std::invalid_argument("unhandled named state");
}

NamedState named_state(StateKind kind, int L, const BasisSet& basis) {
  NamedState s{kind, named_state_terms(kind, L), Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis.size()))};
  for (const auto& [c, amp] : s.terms) {
    auto idx = basis.index_of(c);
    if (!idx) throw std::invalid_argument("named state " + to_string(kind) + " has support outside the basis");
    s.amplitudes(static_cast<Eigen::Index>(*idx)) = amp;
  }
  return s;
}

std::vector<std::pair<std::size_t, std::size_t>> zigzag_correlation_pairs(int L) {
  if (L < 9 || L % 2 == 0) throw std::invalid_argument("zigzag correlations need odd L >= 9");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (int site = 4; site + 2 <= L - 3; site += 2) {
    pairs.emplace_back(doublet_chain_atom(site, AtomKind::doublet_top),
                       doublet_chain_atom(site + 2, AtomKind::doublet_bottom));
    pairs.emplace_back(doublet_chain_atom(site, AtomKind::doublet_bottom),
                       doublet_chain_atom(site + 2, AtomKind::doublet_top));
  }
  return pairs;
}

// -------------------------------------------------------------- exact MIS

namespace {

class MisSearch {
 public:
  MisSearch(const BlockadeGraph& g, std::size_t max_nodes, std::size_t max_solutions)
      : g_(g), max_nodes_(max_nodes), max_solutions_(max_solutions) {}

  MisResult run() {
    AtomSet all;
    for (std::size_t v = 0; v < g_.n_vertices; ++v) all.set(v);
    // Greedy lower bound so that pruning is effective from the start.
    AtomSet greedy;
    AtomSet left = all;
    while (left.any()) {
      std::size_t best = left.first();
      std::size_t best_deg = AtomSet::kCapacity;
      left.for_each([&](std::size_t v) {
        const std::size_t d = (g_.neighbors[v] & left).count();
        if (d < best_deg) {
          best_deg = d;
          best = v;
        }
      });
      greedy.set(best);
      left = left.without(g_.neighbors[best]);
      left.reset(best);
    }
    best_ = greedy.count();
    recurse(all, AtomSet{});
    std::sort(solutions_.begin(), solutions_.end());
    return {best_, std::move(solutions_)};
  }

 private:
  std::size_t clique_cover_bound(AtomSet p) const {
    std::size_t cliques = 0;
    while (p.any()) {
      const std::size_t u = p.first();
      AtomSet clique;
      clique.set(u);
      AtomSet cand = g_.neighbors[u] & p;
      while (cand.any()) {
        const std::size_t w = cand.first();
        clique.set(w);
        cand = cand & g_.neighbors[w];
      }
      p = p.without(clique);
      ++cliques;
    }
    return cliques;
  }

  void recurse(AtomSet p, AtomSet c) {
    if (++nodes_ > max_nodes_) throw BudgetError("exact_mis: node budget exhausted");
    // Vertices isolated within the candidate set belong to every maximum
    // extension of the current set.
    bool changed = true;
    while (changed) {
      changed = false;
      AtomSet iso;
      p.for_each([&](std::size_t v) {
        if ((g_.neighbors[v] & p).none()) iso.set(v);
      });
      if (iso.any()) {
        c |= iso;
        p = p.without(iso);
        changed = true;
      }
    }
    if (p.none()) {
      const std::size_t k = c.count();
      if (k > best_) {
        best_ = k;
        solutions_.clear();
      }
      if (k == best_) {
        if (solutions_.size() >= max_solutions_) throw BudgetError("exact_mis: too many maximizers");
        solutions_.push_back(c);
      }
      return;
    }
    if (c.count() + clique_cover_bound(p) < best_) return;

    std::size_t pivot = p.first();
    std::size_t best_deg = 0;
    p.for_each([&](std::size_t v) {
      const std::size_t d = (g_.neighbors[v] & p).count();
      if (d > best_deg) {
        best_deg = d;
        pivot = v;
      }
    });
    AtomSet with = c;
    with.set(pivot);
    AtomSet p_with = p.without(g_.neighbors[pivot]);
    p_with.reset(pivot);
    recurse(p_with, with);
    AtomSet p_without = p;
    p_without.reset(pivot);
    recurse(p_without, c);
  }

  const BlockadeGraph& g_;
  std::size_t max_nodes_;
  std::size_t max_solutions_;
  std::size_t nodes_ = 0;
  std::size_t best_ = 0;
  std::vector<AtomSet> solutions_;
};

}  // namespace

MisResult exact_mis(const BlockadeGraph& graph, std::size_t max_nodes, std::size_t max_solutions) {
  if (graph.n_vertices == 0) return {0, {AtomSet{}}};
  return MisSearch(graph, max_nodes, max_solutions).run();
}

}  // namespace sqs

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

#include <Eigen/Core>
#include <cstddef>
#include <nlohmann/json.hpp>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "sqs/common.hpp"

namespace sqs {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

enum class AtomKind { single, doublet_top, doublet_bottom };

enum class Layout { doublet_chain, zigzag_chain, straight_chain, grid_2d, custom };

struct Atom {
  Vec2 pos;                 // micrometres
  double rabi_scale = 1.0;  // multiplier of the global Rabi frequency
  int site = 0;             // 1-based chain site (chains) or cell index + 1 (grids); 0 = unlabeled
  AtomKind kind = AtomKind::single;
};

/// Immutable set of atom positions with chain/grid labels.
///
/// Atom order is the bit order used by every basis, shot file and MPS: chain
/// sites ascending, doublet top before doublet bottom.
class AtomArray {
 public:
  AtomArray(std::vector<Atom> atoms, Layout layout, int grid_rows = 0, int grid_cols = 0);

  std::size_t size() const { return atoms_.size(); }
  const Atom& operator[](std::size_t i) const { return atoms_[i]; }
  std::span<const Atom> atoms() const { return atoms_; }
  Layout layout() const { return layout_; }
  int grid_rows() const { return rows_; }
  int grid_cols() const { return cols_; }

  /// True for the chain layouts, whose site labels drive `nnn` truncation,
  /// entanglement cuts and named states.
  bool is_chain() const;
  /// Number of chain sites L (largest site label).
  int num_sites() const { return num_sites_; }
  /// Atom indices belonging to chain site `site` (1-based), ascending.
  std::vector<std::size_t> atoms_at_site(int site) const;
  /// Number of atoms on sites 1..site, i.e. the bit offset of a chain cut.
  std::size_t atoms_up_to_site(int site) const;

  double distance(std::size_t i, std::size_t j) const;

  /// Copy with every coordinate multiplied by `factor`.
  AtomArray scaled(double factor) const;

  /// Fingerprint over positions, scales and labels.
  std::string hash() const;

 private:
  std::vector<Atom> atoms_;
  Layout layout_;
  int rows_ = 0;
  int cols_ = 0;
  int num_sites_ = 0;
};

// ---------------------------------------------------------------- builders

/// Doublet chain with horizontal next-nearest spacing `s_x` (site j to j+2)
/// and doublet height `s_y`. Odd sites hold one atom on the axis, even sites a
/// vertical doublet. Requires odd L >= 3.
AtomArray build_doublet_chain(int L, double s_x, double s_y);

/// Equilateral doublet chain with nearest-neighbour side `s`
/// (s_x = s*sqrt(3), s_y = s).
AtomArray build_doublet_chain(int L, double s);

/// Square grid of pitch `a`; cells with odd row+col hold a diagonal doublet of
/// separation `d` centred on the cell.
AtomArray build_2d_doublet_grid(int rows, int cols, double a, double d);

/// 1D chain with consecutive distance `s`: odd sites on the axis, even sites
/// alternating between y = +offset/2 and y = -offset/2, so the two kinds of
/// next-nearest pairs sit at different distances.
AtomArray build_zigzag_chain(int L, double s, double offset);

/// Straight chain of pitch `s` where even (1-based) sites have Rabi scale k.
AtomArray build_enhanced_rabi_chain(int L, double s, double k);

// ------------------------------------------------------------- interactions

/// Van der Waals coefficient in units of Omega * um^6.
struct Calibration {
  double c6 = 0.0;

  /// Pair energy `v_nn` (units of Omega) at distance `r_nn` (um).
  static Calibration from_pair(double v_nn, double r_nn);
  /// V_nn = 12.5 Omega at 5.5 um.
  static Calibration standard() { return from_pair(12.5, 5.5); }

  double energy(double r) const;
  double blockade_radius(double omega) const;
};

struct BlockadeGraph {
  std::size_t n_vertices = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  // i < j, sorted, unique
  std::vector<AtomSet> neighbors;                          // per vertex

  BlockadeGraph() = default;
  BlockadeGraph(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> edge_list);

  bool adjacent(std::size_t i, std::size_t j) const { return neighbors[i].test(j); }
  std::size_t degree(std::size_t i) const { return neighbors[i].count(); }
  /// Subgraph induced by `subset`, relabeled 0..k-1 in ascending order.
  BlockadeGraph induced(std::span<const std::size_t> subset) const;
  bool is_independent(const AtomSet& s) const;
};

/// Edge iff c6 / r^6 >= omega (the boundary r == R_b is included).
BlockadeGraph blockade_graph(const AtomArray& array, const Calibration& cal, double omega = 1.0);

enum class Truncation { nn, nnn, full };

/// Symmetric pair-energy matrix in units of Omega, zero diagonal.
///   nn   : blockade-graph edges only (threshold `omega`)
///   nnn  : pairs of chain sites at most two apart (chain layouts only)
///   full : all pairs
Eigen::MatrixXd interaction_matrix(const AtomArray& array, const Calibration& cal, Truncation truncation,
                                   double omega = 1.0);

Truncation parse_truncation(const std::string& name);
std::string to_string(Truncation t);
std::string to_string(Layout l);
std::string to_string(AtomKind k);

// -------------------------------------------------------------------- JSON

/// `{atoms: [{x, y, rabi_scale, site, kind}], units: "um", layout, rows, cols}`
nlohmann::json to_json(const AtomArray& array);
AtomArray atom_array_from_json(const nlohmann::json& j);

}  // namespace sqs

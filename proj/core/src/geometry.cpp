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

#include "sqs/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace sqs {

AtomArray::AtomArray(std::vector<Atom> atoms, Layout layout, int grid_rows, int grid_cols)
    : atoms_(std::move(atoms)), layout_(layout), rows_(grid_rows), cols_(grid_cols) {
  if (atoms_.size() > AtomSet::kCapacity) {
    throw std::invalid_argument("AtomArray: more than 128 atoms are not supported");
  }
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (!(atoms_[i].rabi_scale > 0.0)) {
      throw std::invalid_argument("AtomArray: rabi_scale must be positive");
    }
    num_sites_ = std::max(num_sites_, atoms_[i].site);
    for (std::size_t j = 0; j < i; ++j) {
      if (!(distance(i, j) > 0.0)) {
        throw std::invalid_argument("AtomArray: coincident atoms " + std::to_string(j) + " and " + std::to_string(i));
      }
    }
  }
  if (is_chain()) {
    for (std::size_t i = 1; i < atoms_.size(); ++i) {
      if (atoms_[i].site < atoms_[i - 1].site || atoms_[i].site < 1) {
        throw std::invalid_argument("AtomArray: chain atoms must be ordered by site");
      }
    }
  }
}

bool AtomArray::is_chain() const {
  return layout_ == Layout::doublet_chain || layout_ == Layout::zigzag_chain || layout_ == Layout::straight_chain;
}

std::vector<std::size_t> AtomArray::atoms_at_site(int site) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < atoms_.size(); ++i) {
    if (atoms_[i].site == site) out.push_back(i);
  }
  return out;
}

std::size_t AtomArray::atoms_up_to_site(int site) const {
  return static_cast<std::size_t>(
      std::count_if(atoms_.begin(), atoms_.end(), [site](const Atom& a) { return a.site <= site; }));
}

double AtomArray::distance(std::size_t i, std::size_t j) const {
  return std::hypot(atoms_[i].pos.x - atoms_[j].pos.x, atoms_[i].pos.y - atoms_[j].pos.y);
}

AtomArray AtomArray::scaled(double factor) const {
  if (!(factor > 0.0)) throw std::invalid_argument("AtomArray::scaled: factor must be positive");
  auto atoms = atoms_;
  for (auto& a : atoms) {
    a.pos.x *= factor;
    a.pos.y *= factor;
  }
  return AtomArray(std::move(atoms), layout_, rows_, cols_);
}

std::string AtomArray::hash() const { return fnv1a_hex(to_json(*this).dump()); }

// ---------------------------------------------------------------- builders

AtomArray build_doublet_chain(int L, double s_x, double s_y) {
  if (L < 3 || L % 2 == 0) throw std::invalid_argument("doublet chain needs odd L >= 3");
  if (!(s_x > 0.0) || !(s_y > 0.0)) throw std::invalid_argument("doublet chain spacing must be positive");
  const double step = 0.5 * s_x;
  const double half = 0.5 * s_y;
  std::vector<Atom> atoms;
  atoms.reserve(static_cast<std::size_t>((3 * L - 1) / 2));
  for (int j = 1; j <= L; ++j) {
    const double x = step * (j - 1);
    if (j % 2 == 1) {
      atoms.push_back({{x, 0.0}, 1.0, j, AtomKind::single});
    } else {
      atoms.push_back({{x, half}, 1.0, j, AtomKind::doublet_top});
      atoms.push_back({{x, -half}, 1.0, j, AtomKind::doublet_bottom});
    }
  }
  return AtomArray(std::move(atoms), Layout::doublet_chain);
}

AtomArray build_doublet_chain(int L, double s) {
  if (!(s > 0.0)) throw std::invalid_argument("doublet chain spacing must be positive");
  return build_doublet_chain(L, s * std::sqrt(3.0), s);
}

AtomArray build_2d_doublet_grid(int rows, int cols, double a, double d) {
  if (rows < 2 || cols < 2) throw std::invalid_argument("2D grid needs rows, cols >= 2");
  if (!(d > 0.0) || !(a > d)) throw std::invalid_argument("2D grid needs a > d > 0");
  const double off = 0.5 * d / std::sqrt(2.0);
  std::vector<Atom> atoms;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const Vec2 centre{a * c, a * r};
      const int cell = r * cols + c + 1;
      if ((r + c) % 2 == 0) {
        atoms.push_back({centre, 1.0, cell, AtomKind::single});
      } else {
        atoms.push_back({{centre.x + off, centre.y + off}, 1.0, cell, AtomKind::doublet_top});
        atoms.push_back({{centre.x - off, centre.y - off}, 1.0, cell, AtomKind::doublet_bottom});
      }
    }
  }
  return AtomArray(std::move(atoms), Layout::grid_2d, rows, cols);
}

AtomArray build_zigzag_chain(int L, double s, double offset) {
  if (L < 2) throw std::invalid_argument("zigzag chain needs L >= 2");
  if (!(s > 0.0) || offset < 0.0) throw std::invalid_argument("zigzag chain needs s > 0, offset >= 0");
  if (offset >= 2.0 * s) throw std::invalid_argument("zigzag offset must be below 2*s");
  // Odd sites sit on the axis; even sites alternate above and below it.
  const double dx = std::sqrt(s * s - 0.25 * offset * offset);
  std::vector<Atom> atoms;
  for (int j = 1; j <= L; ++j) {
    double y = 0.0;
    if (j % 2 == 0) y = (j % 4 == 2) ? 0.5 * offset : -0.5 * offset;
    atoms.push_back({{dx * (j - 1), y}, 1.0, j, AtomKind::single});
  }
  return AtomArray(std::move(atoms), Layout::zigzag_chain);
}

AtomArray build_enhanced_rabi_chain(int L, double s, double k) {
  if (L < 2) throw std::invalid_argument("enhanced-Rabi chain needs L >= 2");
  if (!(s > 0.0)) throw std::invalid_argument("enhanced-Rabi chain spacing must be positive");
  if (!(k > 0.0)) throw std::invalid_argument("enhancement factor must be positive");
  std::vector<Atom> atoms;
  for (int j = 1; j <= L; ++j) {
    atoms.push_back({{s * (j - 1), 0.0}, (j % 2 == 0) ? k : 1.0, j, AtomKind::single});
  }
  return AtomArray(std::move(atoms), Layout::straight_chain);
}

// ------------------------------------------------------------- interactions

Calibration Calibration::from_pair(double v_nn, double r_nn) {
  if (!(v_nn > 0.0) || !(r_nn > 0.0)) throw std::invalid_argument("calibration pair must be positive");
  return Calibration{v_nn * std::pow(r_nn, 6)};
}

double Calibration::energy(double r) const {
  const double r2 = r * r;
  return c6 / (r2 * r2 * r2);
}

double Calibration::blockade_radius(double omega) const {
  if (!(c6 > 0.0) || !(omega > 0.0)) throw std::invalid_argument("blockade radius needs c6, omega > 0");
  return std::pow(c6 / omega, 1.0 / 6.0);
}

BlockadeGraph::BlockadeGraph(std::size_t n, std::vector<std::pair<std::size_t, std::size_t>> edge_list)
    : n_vertices(n), neighbors(n) {
  if (n > AtomSet::kCapacity) throw std::invalid_argument("BlockadeGraph: more than 128 vertices");
  for (auto [i, j] : edge_list) {
    if (i == j) throw std::invalid_argument("BlockadeGraph: self-loop");
    if (i >= n || j >= n) throw std::out_of_range("BlockadeGraph: vertex out of range");
    if (i > j) std::swap(i, j);
    if (neighbors[i].test(j)) continue;
    neighbors[i].set(j);
    neighbors[j].set(i);
    edges.emplace_back(i, j);
  }
  std::sort(edges.begin(), edges.end());
}

BlockadeGraph BlockadeGraph::induced(std::span<const std::size_t> subset) const {
  std::vector<std::size_t> sorted(subset.begin(), subset.end());
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t a = 0; a < sorted.size(); ++a) {
    for (std::size_t b = a + 1; b < sorted.size(); ++b) {
      if (adjacent(sorted[a], sorted[b])) e.emplace_back(a, b);
    }
  }
  return BlockadeGraph(sorted.size(), std::move(e));
}

bool BlockadeGraph::is_independent(const AtomSet& s) const {
  bool ok = true;
  s.for_each([&](std::size_t i) {
    if ((neighbors[i] & s).any()) ok = false;
  });
  return ok;
}

BlockadeGraph blockade_graph(const AtomArray& array, const Calibration& cal, double omega) {
  if (!(cal.c6 > 0.0) || !(omega > 0.0)) throw std::invalid_argument("blockade_graph needs c6, omega > 0");
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (std::size_t i = 0; i < array.size(); ++i) {
    for (std::size_t j = i + 1; j < array.size(); ++j) {
      if (cal.energy(array.distance(i, j)) >= omega) edges.emplace_back(i, j);
    }
  }
  return BlockadeGraph(array.size(), std::move(edges));
}

Eigen::MatrixXd interaction_matrix(const AtomArray& array, const Calibration& cal, Truncation truncation,
                                   double omega) {
  if (!(cal.c6 > 0.0)) throw std::invalid_argument("interaction_matrix needs c6 > 0");
  if (truncation == Truncation::nnn && !array.is_chain()) {
    throw std::invalid_argument("nnn truncation requires chain site labels");
  }
  const std::size_t n = array.size();
  Eigen::MatrixXd v = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double e = cal.energy(array.distance(i, j));
      bool keep = false;
      switch (truncation) {
        case Truncation::full:
          keep = true;
          break;
        case Truncation::nn:
          keep = e >= omega;
          break;
        case Truncation::nnn:
          keep = std::abs(array[i].site - array[j].site) <= 2;
          break;
      }
      if (keep) {
        v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = e;
        v(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = e;
      }
    }
  }
  return v;
}

Truncation parse_truncation(const std::string& name) {
  if (name == "nn") return Truncation::nn;
  if (name == "nnn") return Truncation::nnn;
  if (name == "full") return Truncation::full;
  throw std::invalid_argument("unknown truncation '" + name + "' (expected nn|nnn|full)");
}

std::string to_string(Truncation t) {
  switch (t) {
    case Truncation::nn:
      return "nn";
    case Truncation::nnn:
      return "nnn";
    case Truncation::full:
      return "full";
  }
  return "?";
}

std::string to_string(Layout l) {
  switch (l) {
    case Layout::doublet_chain:
      return "doublet_chain";
    case Layout::zigzag_chain:
      return "zigzag_chain";
    case Layout::straight_chain:
      return "straight_chain";
    case Layout::grid_2d:
      return "grid_2d";
    case Layout::custom:
      return "custom";
  }
  return "?";
}

std::string to_string(AtomKind k) {
  switch (k) {
    case AtomKind::single:
      return "single";
    case AtomKind::doublet_top:
      return "doublet-top";
    case AtomKind::doublet_bottom:
      return "doublet-bottom";
  }
  return "?";
}

namespace {

Layout parse_layout(const std::string& s) {
  for (Layout l :
       {Layout::doublet_chain, Layout::zigzag_chain, Layout::straight_chain, Layout::grid_2d, Layout::custom}) {
    if (to_string(l) == s) return l;
  }
  throw std::invalid_argument("unknown layout '" + s + "'");
}

AtomKind parse_kind(const std::string& s) {
  for (AtomKind k : {AtomKind::single, AtomKind::doublet_top, AtomKind::doublet_bottom}) {
    if (to_string(k) == s) return k;
  }
  throw std::invalid_argument("unknown atom kind '" + s + "'");
}

}  // namespace

nlohmann::json to_json(const AtomArray& array) {
  nlohmann::json atoms = nlohmann::json::array();
  for (const auto& a : array.atoms()) {
    atoms.push_back(
        {{"x", a.pos.x}, {"y", a.pos.y}, {"rabi_scale", a.rabi_scale}, {"site", a.site}, {"kind", to_string(a.kind)}});
  }
  nlohmann::json j{{"atoms", atoms}, {"units", "um"}, {"layout", to_string(array.layout())}};
  if (array.layout() == Layout::grid_2d) {
    j["rows"] = array.grid_rows();
    j["cols"] = array.grid_cols();
  }
  return j;
}

AtomArray atom_array_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("atoms")) throw std::invalid_argument("geometry JSON needs an 'atoms' list");
  if (j.value("units", std::string("um")) != "um") throw std::invalid_argument("geometry JSON units must be \"um\"");
  std::vector<Atom> atoms;
  for (const auto& a : j.at("atoms")) {
    Atom atom;
    atom.pos = {a.at("x").get<double>(), a.at("y").get<double>()};
    atom.rabi_scale = a.value("rabi_scale", 1.0);
    atom.site = a.value("site", 0);
    atom.kind = parse_kind(a.value("kind", std::string("single")));
    atoms.push_back(atom);
  }
  const Layout layout = parse_layout(j.value("layout", std::string("custom")));
  return AtomArray(std::move(atoms), layout, j.value("rows", 0), j.value("cols", 0));
}

}  // namespace sqs

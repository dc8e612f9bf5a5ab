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

#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "fixtures.hpp"
#include "sqs/geometry.hpp"
#include "sqs/model.hpp"

namespace sqs {
namespace {

// Pairs of atoms whose chain sites are exactly two apart.
std::vector<double> nnn_distances(const AtomArray& a) {
  std::vector<double> d;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      if (std::abs(a[i].site - a[j].site) == 2) d.push_back(a.distance(i, j));
    }
  }
  return d;
}

TEST(Geometry, DoubletChainL3IsEquilateral) {
  const AtomArray a = build_doublet_chain(3, 5.5);
  ASSERT_EQ(a.size(), 4u);
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      if (std::abs(a[i].site - a[j].site) <= 1) {
        EXPECT_NEAR(a.distance(i, j), 5.5, 5.5e-12);
      }
    }
  }
}

TEST(Geometry, DoubletChainAtomCount) {
  for (int L = 3; L <= 21; L += 2)
    EXPECT_EQ(build_doublet_chain(L, 5.5).size(), static_cast<std::size_t>((3 * L - 1) / 2));
  EXPECT_EQ(build_doublet_chain(9, 5.5).size(), 13u);
  EXPECT_EQ(build_doublet_chain(15, 5.5).size(), 22u);
}

TEST(Geometry, DoubletChainNextNearestDistances) {
  const double s = 5.5;
  const AtomArray a = build_doublet_chain(15, s);
  std::set<long> distinct;
  for (double d : nnn_distances(a)) distinct.insert(std::lround(d * 1e9));
  ASSERT_EQ(distinct.size(), 2u);
  const double h = *distinct.begin() * 1e-9;
  const double diag = *distinct.rbegin() * 1e-9;
  EXPECT_NEAR(h, s * std::sqrt(3.0), 1e-8);
  EXPECT_NEAR(h, 9.5262794416, 1e-8);
  EXPECT_NEAR(diag, 2.0 * s, 1e-8);
  EXPECT_NEAR(diag / h, 2.0 / std::sqrt(3.0), 1e-8);
}

TEST(Geometry, DoubletChainLabelsAndBitOrder) {
  const AtomArray a = build_doublet_chain(7, 5.5);
  EXPECT_EQ(a.num_sites(), 7);
  EXPECT_EQ(a[0].kind, AtomKind::single);
  EXPECT_EQ(a[1].kind, AtomKind::doublet_top);
  EXPECT_EQ(a[2].kind, AtomKind::doublet_bottom);
  EXPECT_GT(a[1].pos.y, a[2].pos.y);
  EXPECT_EQ(a.atoms_at_site(4), (std::vector<std::size_t>{4, 5}));
  EXPECT_EQ(a.atoms_up_to_site(3), 4u);
  EXPECT_EQ(doublet_chain_atom(4, AtomKind::doublet_top), 4u);
  EXPECT_EQ(doublet_chain_atom(4, AtomKind::doublet_bottom), 5u);
  EXPECT_EQ(doublet_chain_atom(7, AtomKind::single), 9u);
}

TEST(Geometry, DoubletChainGeneralSpacing) {
  const AtomArray a = build_doublet_chain(5, 10.0, 4.0);
  // Consecutive sites are s_x / 2 apart horizontally; doublets have height s_y.
  EXPECT_NEAR(a.distance(1, 2), 4.0, 1e-12);
  EXPECT_NEAR(a.distance(0, 3), 10.0, 1e-12);
  EXPECT_NEAR(a.distance(0, 1), std::hypot(5.0, 2.0), 1e-12);
}

TEST(Geometry, DoubletChainRejectsBadInput) {
  EXPECT_THROW(build_doublet_chain(4, 5.5), std::invalid_argument);
  EXPECT_THROW(build_doublet_chain(1, 5.5), std::invalid_argument);
  EXPECT_THROW(build_doublet_chain(5, 0.0), std::invalid_argument);
  EXPECT_THROW(build_doublet_chain(5, 5.0, -1.0), std::invalid_argument);
}

TEST(Geometry, GridCounts) {
  EXPECT_EQ(build_2d_doublet_grid(7, 7, 6.5, 3.0).size(), 73u);
  EXPECT_EQ(build_2d_doublet_grid(3, 3, 6.5, 3.0).size(), 13u);
  EXPECT_EQ(build_2d_doublet_grid(2, 2, 6.5, 3.0).size(), 6u);
  const AtomArray g = build_2d_doublet_grid(3, 3, 6.5, 3.0);
  std::size_t singles = 0;
  for (const Atom& at : g.atoms()) singles += at.kind == AtomKind::single;
  EXPECT_EQ(singles, 5u);
  // Corner cells are singles; doublet partners sit d apart on the diagonal.
  EXPECT_EQ(g[0].kind, AtomKind::single);
  EXPECT_NEAR(g.distance(1, 2), 3.0, 1e-12);
  EXPECT_NEAR(std::abs(g[1].pos.x - g[2].pos.x), std::abs(g[1].pos.y - g[2].pos.y), 1e-12);
}

TEST(Geometry, GridRejectsBadInput) {
  EXPECT_THROW(build_2d_doublet_grid(1, 3, 6.5, 3.0), std::invalid_argument);
  EXPECT_THROW(build_2d_doublet_grid(3, 3, 3.0, 3.0), std::invalid_argument);
  EXPECT_THROW(build_2d_doublet_grid(3, 3, 6.5, 0.0), std::invalid_argument);
}

TEST(Geometry, ZigzagChain) {
  const AtomArray straight = build_zigzag_chain(6, 5.5, 0.0);
  for (double d : nnn_distances(straight)) EXPECT_NEAR(d, 11.0, 1e-12);
  const AtomArray z = build_zigzag_chain(5, 5.5, 2.0);
  for (std::size_t i = 0; i + 1 < z.size(); ++i) EXPECT_NEAR(z.distance(i, i + 1), 5.5, 1e-12);
  std::set<long> distinct;
  for (double d : nnn_distances(z)) distinct.insert(std::lround(d * 1e9));
  EXPECT_EQ(distinct.size(), 2u);
  EXPECT_EQ(nnn_distances(build_zigzag_chain(3, 4.0, 1.0)).size(), 1u);
  EXPECT_THROW(build_zigzag_chain(5, 5.5, 11.0), std::invalid_argument);
}

TEST(Geometry, EnhancedRabiChain) {
  const AtomArray a = build_enhanced_rabi_chain(4, 5.5, 2.0);
  std::vector<double> scales;
  for (const Atom& at : a.atoms()) scales.push_back(at.rabi_scale);
  EXPECT_EQ(scales, (std::vector<double>{1, 2, 1, 2}));
  for (const Atom& at : build_enhanced_rabi_chain(5, 5.5, 1.0).atoms()) EXPECT_EQ(at.rabi_scale, 1.0);
  const AtomArray r = build_enhanced_rabi_chain(6, 5.5, std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(r[1].rabi_scale, std::sqrt(2.0));
  EXPECT_THROW(build_enhanced_rabi_chain(4, 5.5, 0.0), std::invalid_argument);
}

TEST(Geometry, CalibrationMatchesNearestNeighbourEnergy) {
  const Calibration cal = Calibration::standard();
  EXPECT_NEAR(cal.energy(5.5), 12.5, 1e-12);
  EXPECT_NEAR(cal.c6, 12.5 * std::pow(5.5, 6), 1e-6);
  EXPECT_NEAR(cal.energy(5.5 * std::sqrt(3.0)), 12.5 / 27.0, 1e-12);
  EXPECT_NEAR(cal.blockade_radius(1.0), 5.5 * std::pow(12.5, 1.0 / 6.0), 1e-12);
}

TEST(Geometry, BlockadeGraphOfDoubletChain) {
  const AtomArray a = build_doublet_chain(9, 5.5);
  const BlockadeGraph g = blockade_graph(a, Calibration::standard());
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) {
      EXPECT_EQ(g.adjacent(i, j), std::abs(a[i].site - a[j].site) <= 1) << i << "," << j;
      EXPECT_EQ(g.adjacent(i, j), g.adjacent(j, i));
    }
    EXPECT_FALSE(g.adjacent(i, i));
  }
  std::set<std::pair<std::size_t, std::size_t>> unique(g.edges.begin(), g.edges.end());
  EXPECT_EQ(unique.size(), g.edges.size());
}

TEST(Geometry, BlockadeEdgeAtExactRadiusIsIncluded) {
  const Calibration cal{64.0};  // R_b = 2 at omega = 1
  const AtomArray pair({{{0.0, 0.0}}, {{2.0, 0.0}}}, Layout::custom);
  EXPECT_EQ(blockade_graph(pair, cal).edges.size(), 1u);
  const AtomArray apart({{{0.0, 0.0}}, {{2.0000001, 0.0}}}, Layout::custom);
  EXPECT_TRUE(blockade_graph(apart, cal).edges.empty());
  const AtomArray single({{{0.0, 0.0}}}, Layout::custom);
  EXPECT_TRUE(blockade_graph(single, cal).edges.empty());
}

TEST(Geometry, InteractionRatioIs64Over27) {
  const AtomArray a = build_doublet_chain(15, 5.5);
  const Eigen::MatrixXd v = interaction_matrix(a, Calibration::standard(), Truncation::nnn);
  // Atom 0 (site 1) and atom 3 (site 3): horizontal; atom 1 (site 2 top) and atom 5 (site 4 bottom): diagonal.
  const double vh = v(0, 3);
  const double vd = v(1, 5);
  EXPECT_NEAR(vh / vd, 64.0 / 27.0, 1e-12);
  EXPECT_NEAR(vh / vd, 2.37, 5e-3);
}

TEST(Geometry, TruncationsNestAndAreSymmetric) {
  const AtomArray a = build_doublet_chain(9, 5.5);
  const Calibration cal = Calibration::standard();
  const Eigen::MatrixXd nn = interaction_matrix(a, cal, Truncation::nn);
  const Eigen::MatrixXd nnn = interaction_matrix(a, cal, Truncation::nnn);
  const Eigen::MatrixXd full = interaction_matrix(a, cal, Truncation::full);
  for (const auto* m : {&nn, &nnn, &full}) {
    EXPECT_EQ(*m, m->transpose());
    EXPECT_EQ(m->diagonal().cwiseAbs().maxCoeff(), 0.0);
  }
  for (Eigen::Index i = 0; i < full.rows(); ++i) {
    for (Eigen::Index j = 0; j < full.cols(); ++j) {
      if (i == j) continue;
      const double r = a.distance(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      const int gap = std::abs(a[static_cast<std::size_t>(i)].site - a[static_cast<std::size_t>(j)].site);
      EXPECT_NEAR(full(i, j), cal.c6 / std::pow(r, 6), 1e-12 * full(i, j));
      if (nn(i, j) != 0.0) {
        EXPECT_EQ(nnn(i, j), nn(i, j));
      }
      if (nnn(i, j) != 0.0) {
        EXPECT_EQ(full(i, j), nnn(i, j));
      }
      EXPECT_EQ(full(i, j) != nnn(i, j), gap >= 3);
    }
  }
}

TEST(Geometry, NearestTruncationOfDistantPairIsZero) {
  const AtomArray pair({{{0.0, 0.0}}, {{20.0, 0.0}}}, Layout::custom);
  EXPECT_EQ(interaction_matrix(pair, Calibration::standard(), Truncation::nn).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Geometry, NnnNeedsChainLabels) {
  const AtomArray g = build_2d_doublet_grid(3, 3, 6.5, 3.0);
  EXPECT_THROW(interaction_matrix(g, Calibration::standard(), Truncation::nnn), std::invalid_argument);
}

TEST(Geometry, ScaleCovariance) {
  const AtomArray a = build_doublet_chain(7, 5.5);
  const double lambda = 1.3;
  const Calibration cal = Calibration::standard();
  const Eigen::MatrixXd v = interaction_matrix(a, cal, Truncation::full);
  const Eigen::MatrixXd vs = interaction_matrix(a.scaled(lambda), cal, Truncation::full);
  EXPECT_LT((vs - v * std::pow(lambda, -6)).cwiseAbs().maxCoeff(), 1e-12 * v.cwiseAbs().maxCoeff());
}

TEST(Geometry, DoubletChainMisSizeMatchesBruteForce) {
  for (int L = 3; L <= 9; L += 2) {
    for (double s : {5.0, 5.5, 6.0}) {
      const AtomArray a = build_doublet_chain(L, s);
      const BlockadeGraph g = blockade_graph(a, Calibration::standard());
      EXPECT_EQ(testing::brute_force_mis(g), static_cast<std::size_t>((L + 1) / 2)) << "L=" << L << " s=" << s;
      EXPECT_EQ(exact_mis(g).size, static_cast<std::size_t>((L + 1) / 2));
    }
  }
}

TEST(Geometry, JsonRoundTrip) {
  const AtomArray a = build_enhanced_rabi_chain(5, 5.5, 1.5);
  const nlohmann::json j = to_json(a);
  EXPECT_EQ(j.at("units"), "um");
  const AtomArray b = atom_array_from_json(j);
  EXPECT_EQ(a.hash(), b.hash());
  ASSERT_EQ(b.size(), a.size());
  EXPECT_EQ(b[1].rabi_scale, 1.5);
  const AtomArray g = build_2d_doublet_grid(3, 4, 6.5, 3.0);
  EXPECT_EQ(atom_array_from_json(to_json(g)).hash(), g.hash());
}

TEST(Geometry, CoincidentAtomsRejected) {
  EXPECT_THROW(AtomArray({{{1.0, 1.0}}, {{1.0, 1.0}}}, Layout::custom), std::invalid_argument);
}

}  // namespace
}  // namespace sqs

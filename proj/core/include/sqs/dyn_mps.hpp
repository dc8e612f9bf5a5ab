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
#include <cstdint>
#include <utility>
#include <vector>

#include "sqs/dyn_dense.hpp"
#include "sqs/geometry.hpp"
#include "sqs/measure.hpp"
#include "sqs/schedule.hpp"

namespace sqs {

using RowMatrixXcd = Eigen::Matrix<cplx, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Open-boundary matrix-product state over two-level atoms. MPS position p
/// holds atom p: chain arrays store atoms site by site (top before bottom
/// within a doublet), which is already the snake order through the chain.
///
/// Each site tensor is kept as a (D_left * 2) x D_right row-major matrix with
/// row index l * 2 + s. Exactly one site, the orthogonality centre, is not
/// isometric.
class MPSState {
 public:
  static MPSState product(std::size_t n_atoms, const AtomSet& config);

  std::size_t size() const { return sites_.size(); }
  /// Bond b sits between positions b - 1 and b, for b in [1, size - 1].
  std::size_t bond_dim(std::size_t b) const;
  std::size_t max_bond_dim() const;
  std::size_t center() const { return center_; }
  /// Product of retained Schmidt weight over every truncation so far.
  double kept_norm() const { return kept_norm_; }
  double norm() const;

  const RowMatrixXcd& site(std::size_t p) const { return sites_[p]; }

  /// Shifts the orthogonality centre with QR/LQ sweeps; the state is unchanged.
  void move_center(std::size_t p);

 private:
  friend class MpsKernel;
  std::vector<RowMatrixXcd> sites_;
  std::size_t center_ = 0;
  double kept_norm_ = 1.0;
};

MPSState mps_from_product(const AtomArray& array, Config config);
/// Exact MPS (successive SVD, no cap) of a basis-restricted dense state.
MPSState mps_from_dense(const DenseState& state, double cutoff = 1e-14);
/// Amplitudes on every configuration of `basis`.
Eigen::VectorXcd mps_to_dense(const MPSState& mps, const BasisSet& basis);

/// How the Hamiltonian is represented on the full two-level product space.
///  blockade: X terms carry projectors onto ground-state blockade neighbours,
///            blockaded pairs are dropped (dynamics stays in the independent-set
///            sector when it starts there).
///  soft:     every pair interaction is kept at its finite value.
enum class MpsMode { blockade, soft };

/// The Hamiltonian cut into contiguous overlapping blocks, one per chain site,
/// each covering sites [j - r, j + r]. Blocks j and j + 2r + 1 are disjoint,
/// so the 2r + 1 layers each consist of commuting gates.
class TebdModel {
 public:
  /// Throws BudgetError when a block would exceed `max_window_atoms`.
  static TebdModel build(const AtomArray& array, const BlockadeGraph& graph, const Eigen::MatrixXd& interactions,
                         MpsMode mode, std::size_t max_window_atoms = 10);

  struct Block {
    std::size_t first = 0;   // MPS position of the window start
    std::size_t width = 0;   // atoms in the window
    Eigen::MatrixXd x_part;  // coefficient of Omega
    Eigen::VectorXd n_part;  // coefficient of -Delta (diagonal)
    Eigen::VectorXd v_part;  // interactions (diagonal)

    Eigen::MatrixXd at(double omega, double delta) const;
  };

  std::size_t n_atoms() const { return n_atoms_; }
  int reach() const { return reach_; }
  MpsMode mode() const { return mode_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  /// Block indices per layer, ascending.
  const std::vector<std::vector<std::size_t>>& layers() const { return layers_; }

 private:
  std::size_t n_atoms_ = 0;
  int reach_ = 1;
  MpsMode mode_ = MpsMode::blockade;
  std::vector<Block> blocks_;
  std::vector<std::vector<std::size_t>> layers_;
};

struct TebdOptions {
  std::size_t n_steps = 1000;
  std::size_t chi_max = 0;  // 0: uncapped
  double cutoff = 1e-8;     // drop Schmidt values below cutoff * (norm of the Schmidt vector)
};

struct MpsEvolutionResult {
  Trajectory trajectory;
  MPSState final_state;
};

/// Second-order Trotter TEBD with H frozen at each step's midpoint. Step
/// placement matches `evolve`. Checkpoints are a dense-engine feature and are
/// rejected here.
MpsEvolutionResult tebd_evolve(const MPSState& initial, const TebdModel& model, const ControlSource& controls,
                               const TebdOptions& opts, const ObservableSpec& spec);

/// One Trotter step of length dt (units of 2pi/Omega) at fixed controls.
void tebd_step(MPSState& mps, const TebdModel& model, Controls c, double dt, const TebdOptions& opts);

/// Quench-duration scan with prefix sharing (see `dense_quench_scan`).
std::vector<MPSState> mps_quench_scan(const MPSState& initial, const TebdModel& model, const SqsParams& base,
                                      const std::vector<double>& tq_grid, const TebdOptions& opts,
                                      unsigned threads = 1);

// ------------------------------------------------------------ observables

std::vector<double> mps_expectation_n(const MPSState& mps);
double mps_probability(const MPSState& mps, const AtomSet& config);
double mps_correlation_sum(const MPSState& mps, const std::vector<std::pair<std::size_t, std::size_t>>& pairs);
/// Entropy (nats) across bond `bond` in [1, size - 1].
double mps_entropy(const MPSState& mps, std::size_t bond);
double mps_energy(const MPSState& mps, const TebdModel& model, Controls c);

/// Sequential conditional sampling; shot i uses stream (seed, i).
ShotSet mps_sample(const MPSState& mps, std::size_t shots, std::uint64_t seed, std::string array_hash = {});

struct ImaginaryTimeOptions {
  std::size_t chi_max = 64;
  double cutoff = 1e-10;
  double tol = 1e-9;  // energy change per step at the smallest step size
  std::vector<double> taus{0.1, 0.05, 0.02, 0.01, 0.005};
  std::size_t max_steps_per_tau = 2000;
};

/// Imaginary-time TEBD from the all-ground product state.
/// Throws NumericError when the energy does not settle within the budget.
MPSState imaginary_time_ground(const TebdModel& model, Controls c, const ImaginaryTimeOptions& opts = {});

}  // namespace sqs

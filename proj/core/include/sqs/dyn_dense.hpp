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
#include <iosfwd>
#include <memory>
#include <nlohmann/json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "sqs/krylov.hpp"
#include "sqs/model.hpp"
#include "sqs/schedule.hpp"

namespace sqs {

struct DenseState {
  std::shared_ptr<const BasisSet> basis;
  Eigen::VectorXcd amplitudes;

  double norm() const { return amplitudes.norm(); }
  std::vector<double> probabilities() const;
};

/// Configuration with amplitude one.
DenseState basis_state(std::shared_ptr<const BasisSet> basis, Config c);

enum class InitialMode { all_ground, exact_ground };

/// `h` is the Hamiltonian at the first waveform sample; used by exact_ground.
DenseState initial_state(const HamiltonianOperator& h, InitialMode mode);

// ------------------------------------------------------------ observables

/// What to record along a trajectory. Configurations are in the bit order of
/// the basis; entropy cuts are bit offsets (atoms on the left of the cut).
struct ObservableSpec {
  std::size_t stride = 10;  // record every `stride` steps, plus t = 0 and the end
  bool per_atom_n = true;
  std::vector<Config> mis_configs;
  std::vector<Config> zigzag_configs;
  std::vector<std::pair<std::size_t, std::size_t>> order_pairs;
  double order_prefactor = 0.0;
  std::vector<std::size_t> entropy_cuts;
  std::size_t checkpoint_stride = 0;  // 0: no checkpoints
  bool energy = true;

  /// P_MIS, P_zigzag, <O> (L >= 9) and the central-cut entropy for a doublet chain.
  static ObservableSpec doublet_chain(const AtomArray& array, std::size_t stride = 10);
};

/// Bit offset of the cut between chain site `site` and `site + 1`.
std::size_t chain_cut(const AtomArray& array, int site);
/// The central cut after site ceil(L/2).
std::size_t central_cut(const AtomArray& array);

struct Sample {
  double t = 0.0;
  double omega = 0.0;
  double delta = 0.0;
  std::vector<double> n;
  double p_mis = 0.0;
  double p_zigzag = 0.0;
  double order = 0.0;
  double energy = 0.0;
  double norm = 1.0;
  std::vector<double> entropy;
  // Tensor-network columns.
  std::size_t bond_dim_max = 0;
  double kept_norm = 1.0;
};

struct Checkpoint {
  double t = 0.0;
  Controls controls;
  Eigen::VectorXcd amplitudes;
};

struct Trajectory {
  std::vector<std::size_t> entropy_cuts;
  std::vector<Sample> samples;
  std::vector<Checkpoint> checkpoints;
  bool mps_columns = false;
};

void write_trajectory_csv(std::ostream& os, const Trajectory& traj);
nlohmann::json to_json(const Trajectory& traj);

// ------------------------------------------------------------- evolution

enum class Integrator { krylov, rk4 };

struct EvolveOptions {
  std::size_t n_steps = 1000;
  Integrator method = Integrator::krylov;
  KrylovOptions krylov{};
  double rk4_norm_tol = 1e-12;  // per-step norm drift bound for RK4 substepping
};

struct EvolutionResult {
  Trajectory trajectory;
  DenseState final_state;
};

struct StepPlan {
  double t0 = 0.0;
  double dt = 0.0;
};

/// Steps for each smooth piece of `controls`: ceil(n_steps * len / T), at least one.
std::vector<StepPlan> plan_steps(const ControlSource& controls, std::size_t n_steps);

/// Piecewise-constant propagation: the total duration is split into
/// `n_steps` steps distributed over the waveform's smooth pieces (steps never
/// straddle a breakpoint) and H is frozen at each step's midpoint.
EvolutionResult evolve(const DenseState& initial, const HamiltonianOperator& family, const ControlSource& controls,
                       const EvolveOptions& opts, const ObservableSpec& spec);

/// psi <- exp(-i 2pi H dt) psi with `family` evaluated at `c`.
void dense_step(Eigen::VectorXcd& psi, const HamiltonianOperator& family, Controls c, double dt,
                const EvolveOptions& opts);

/// Advance over [t0, t1] of `controls` in `n_steps` midpoint steps.
void dense_advance(Eigen::VectorXcd& psi, const HamiltonianOperator& family, const ControlSource& controls, double t0,
                   double t1, std::size_t n_steps, const EvolveOptions& opts);

// ------------------------------------------------------------ diagnostics

std::vector<double> expectation_n(const DenseState& state);
/// Per-site sums (doublets summed together), index 0 = site 1.
std::vector<double> site_occupations(const AtomArray& array, const std::vector<double>& n);

double state_probability(const DenseState& state, Config c);
/// |<target|psi>|^2; a ZigzagMix target reports P(Z) + P(Zbar).
double state_probability(const DenseState& state, const NamedState& target);

/// Von Neumann entropy (nats) across a cut after `n_left` atoms in bit order.
double entanglement_entropy(const DenseState& state, std::size_t n_left);
/// Entropy across the cut between chain sites `site` and `site + 1`.
double entanglement_entropy(const DenseState& state, const AtomArray& array, int site);
/// Eigenvalues of the reduced density matrix on the left (`left = true`) or
/// right side, descending.
std::vector<double> reduced_spectrum(const DenseState& state, std::size_t n_left, bool left);
double reduced_entropy(const DenseState& state, std::size_t n_left, bool left);

/// Order parameter from exact diagonal correlators (see analysis::order_parameter).
double connected_correlation_sum(const DenseState& state,
                                 const std::vector<std::pair<std::size_t, std::size_t>>& pairs);

/// <psi|H|psi>.
double energy(const DenseState& state, const HamiltonianOperator& h);

// --------------------------------------------------------- checkpoint I/O

/// Writes `<prefix>.bin` (little-endian complex64) and `<prefix>.json`.
void write_checkpoint(const std::string& prefix, const BasisSet& basis, const Checkpoint& cp);
Checkpoint read_checkpoint(const std::string& prefix, const BasisSet& basis);

/// Fixed-step quench-duration scan: sweep to delta_i once, hold delta_q while
/// stepping through `tq_grid` (ascending, from 0), and finish the sweep from
/// each checkpoint. Step size is (linear sweep duration) / n_steps.
/// Returns the final state for every grid point.
std::vector<DenseState> dense_quench_scan(const DenseState& initial, const HamiltonianOperator& family,
                                          const SqsParams& base, const std::vector<double>& tq_grid,
                                          const EvolveOptions& opts, unsigned threads = 1);

}  // namespace sqs

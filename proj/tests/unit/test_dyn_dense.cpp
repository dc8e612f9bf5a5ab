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

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>
#include <sstream>

#include "fixtures.hpp"
#include "sqs/dyn_dense.hpp"

namespace sqs {
namespace {

using testing::make_chain;

DenseState random_state(std::shared_ptr<const BasisSet> basis, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N;
  Eigen::VectorXcd v(static_cast<Eigen::Index>(basis->size()));
  for (auto& x : v) x = {N(rng), N(rng)};
  v.normalize();
  return {std::move(basis), v};
}

// Oracle: exp(-i tau H) psi through a full eigendecomposition.
Eigen::VectorXcd exact_propagate(const HamiltonianOperator& h, double tau, const Eigen::VectorXcd& psi) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.to_dense());
  const Eigen::MatrixXcd U = es.eigenvectors().cast<cplx>();
  Eigen::VectorXcd phases(es.eigenvalues().size());
  for (Eigen::Index k = 0; k < phases.size(); ++k) phases(k) = std::exp(cplx(0.0, -tau * es.eigenvalues()(k)));
  return U * phases.asDiagonal() * (U.adjoint() * psi);
}

// Oracle: entropy from the singular values of the amplitude matrix on the full 2^N space.
double entropy_oracle(const DenseState& s, std::size_t n_left) {
  const std::size_t n = s.basis->n_atoms();
  const Eigen::Index rows = Eigen::Index{1} << n_left;
  const Eigen::Index cols = Eigen::Index{1} << (n - n_left);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(rows, cols);
  for (std::size_t a = 0; a < s.basis->size(); ++a) {
    const Config c = s.basis->config(a);
    m(static_cast<Eigen::Index>(c & ((Config{1} << n_left) - 1)), static_cast<Eigen::Index>(c >> n_left)) =
        s.amplitudes(static_cast<Eigen::Index>(a));
  }
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m);
  double e = 0.0;
  for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k) {
    const double p = svd.singularValues()(k) * svd.singularValues()(k);
    if (p > 1e-300) e -= p * std::log(p);
  }
  return e;
}

TEST(Krylov, MatchesExactPropagator) {
  const auto c = make_chain(9, 1.1);
  const DenseState s = random_state(c.basis, 3);
  for (double tau : {0.01, 0.7, 3.0}) {
    Eigen::VectorXcd psi = s.amplitudes;
    const std::size_t mv = krylov_expm(c.family, tau, psi);
    EXPECT_GT(mv, 0u);
    EXPECT_LT((psi - exact_propagate(c.family, tau, s.amplitudes)).norm(), 1e-9) << "tau=" << tau;
    EXPECT_NEAR(psi.norm(), 1.0, 1e-12);
  }
}

TEST(Krylov, TinySpaceAndZeroTime) {
  const auto c = make_chain(3, 0.2);
  const DenseState s = random_state(c.basis, 4);
  Eigen::VectorXcd psi = s.amplitudes;
  krylov_expm(c.family, 0.0, psi);
  EXPECT_LT((psi - s.amplitudes).norm(), 1e-15);
  krylov_expm(c.family, 5.0, psi);
  EXPECT_LT((psi - exact_propagate(c.family, 5.0, s.amplitudes)).norm(), 1e-9);
}

TEST(DenseStep, SingleAtomRabiOscillation) {
  const AtomArray one({{{0.0, 0.0}}}, Layout::custom);
  const auto g = blockade_graph(one, Calibration::standard());
  auto basis = std::make_shared<const BasisSet>(BasisSet::enumerate(g, Constraint::full));
  const auto h = HamiltonianOperator::build(one, basis, Eigen::MatrixXd::Zero(1, 1), 1.0, 0.0);
  for (Integrator method : {Integrator::krylov, Integrator::rk4}) {
    EvolveOptions opts;
    opts.method = method;
    for (double t : {0.1, 0.25, 0.5, 0.8}) {
      DenseState s = basis_state(basis, 0);
      dense_step(s.amplitudes, h, {1.0, 0.0}, t, opts);
      EXPECT_NEAR(std::norm(s.amplitudes(1)), std::pow(std::sin(kPi * t), 2), 1e-10) << "t=" << t;
    }
  }
}

TEST(DenseStep, Rk4AgreesWithKrylov) {
  const auto c = make_chain(7, 0.0);
  const DenseState s = random_state(c.basis, 5);
  EvolveOptions kr;
  EvolveOptions rk;
  rk.method = Integrator::rk4;
  Eigen::VectorXcd a = s.amplitudes;
  Eigen::VectorXcd b = s.amplitudes;
  dense_step(a, c.family, {1.0, 0.8}, 0.05, kr);
  dense_step(b, c.family, {1.0, 0.8}, 0.05, rk);
  EXPECT_LT((a - b).norm(), 1e-8);
}

TEST(PlanSteps, CountsAndBreakpoints) {
  const Waveform w = sweep_quench_sweep(SqsParams{});
  const auto plan = plan_steps(w, 1000);
  EXPECT_GE(plan.size(), 1000u);
  EXPECT_LE(plan.size(), 1003u);
  double t = 0.0;
  for (const auto& p : plan) {
    EXPECT_NEAR(p.t0, t, 1e-12);
    for (double b : w.breakpoints()) EXPECT_FALSE(p.t0 < b - 1e-12 && p.t0 + p.dt > b + 1e-12);
    t += p.dt;
  }
  EXPECT_NEAR(t, w.duration(), 1e-12);
  EXPECT_THROW(plan_steps(w, 0), std::invalid_argument);
}

TEST(Evolve, NormAndAdiabaticLimit) {
  const auto c = make_chain(5);
  const Waveform w = linear_sweep(-4.0, 4.0, 0.05);
  const DenseState init = initial_state(c.family.at(1.0, -4.0), InitialMode::exact_ground);
  EvolveOptions opts;
  opts.n_steps = 2000;
  ObservableSpec spec = ObservableSpec::doublet_chain(c.array, 100);
  const EvolutionResult r = evolve(init, c.family, w, opts, spec);
  EXPECT_NEAR(r.final_state.norm(), 1.0, 1e-10);
  const DenseState ground = initial_state(c.family.at(1.0, 4.0), InitialMode::exact_ground);
  EXPECT_GT(std::norm(ground.amplitudes.dot(r.final_state.amplitudes)), 0.99);
  EXPECT_GT(r.trajectory.samples.back().p_mis, 0.9);
  EXPECT_EQ(r.trajectory.samples.front().t, 0.0);
  EXPECT_NEAR(r.trajectory.samples.back().t, w.duration(), 1e-12);
  for (const auto& s : r.trajectory.samples) EXPECT_NEAR(s.norm, 1.0, 1e-9);
}

TEST(Evolve, SuddenSweepLeavesStateAlone) {
  const auto c = make_chain(5);
  const Waveform w = linear_sweep(-4.0, 4.0, 1e6);
  DenseState all_g = basis_state(c.basis, 0);
  EvolveOptions opts;
  opts.n_steps = 10;
  const EvolutionResult r = evolve(all_g, c.family, w, opts, ObservableSpec{});
  EXPECT_GT(std::norm(r.final_state.amplitudes(0)), 1.0 - 1e-6);
}

TEST(InitialState, ExactGroundIsLowestEigenvector) {
  const auto c = make_chain(7);
  const HamiltonianOperator h = c.family.at(1.0, -4.0);
  const DenseState g = initial_state(h, InitialMode::exact_ground);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.to_dense());
  EXPECT_NEAR(energy(g, h), es.eigenvalues()(0), 1e-10);
  const DenseState z = initial_state(h, InitialMode::all_ground);
  EXPECT_EQ(z.amplitudes(0), cplx(1.0, 0.0));
}

TEST(Observables, OccupationsAndCorrelations) {
  const auto c = make_chain(9, 0.3);
  const DenseState s = random_state(c.basis, 11);
  const std::vector<double> n = expectation_n(s);
  // Oracle: direct sums over the basis.
  for (std::size_t i = 0; i < n.size(); ++i) {
    double want = 0.0;
    for (std::size_t a = 0; a < c.basis->size(); ++a) {
      if ((c.basis->config(a) >> i) & 1) want += std::norm(s.amplitudes(static_cast<Eigen::Index>(a)));
    }
    EXPECT_NEAR(n[i], want, 1e-14);
  }
  const auto sites = site_occupations(c.array, n);
  ASSERT_EQ(sites.size(), 9u);
  EXPECT_NEAR(std::accumulate(sites.begin(), sites.end(), 0.0), std::accumulate(n.begin(), n.end(), 0.0), 1e-12);
  EXPECT_NEAR(sites[1], n[1] + n[2], 1e-15);

  const std::vector<std::pair<std::size_t, std::size_t>> pairs{{0, 4}, {3, 8}};
  double want = 0.0;
  for (const auto& [i, j] : pairs) {
    double nn = 0.0;
    for (std::size_t a = 0; a < c.basis->size(); ++a) {
      const Config cf = c.basis->config(a);
      if (((cf >> i) & 1) && ((cf >> j) & 1)) nn += std::norm(s.amplitudes(static_cast<Eigen::Index>(a)));
    }
    want += nn - n[i] * n[j];
  }
  EXPECT_NEAR(connected_correlation_sum(s, pairs), want, 1e-14);
}

TEST(Observables, EntropyMatchesSvdOracle) {
  const auto c = make_chain(7, 0.3);
  const DenseState s = random_state(c.basis, 12);
  for (std::size_t cut = 1; cut < c.basis->n_atoms(); ++cut) {
    EXPECT_NEAR(entanglement_entropy(s, cut), entropy_oracle(s, cut), 1e-10) << "cut=" << cut;
  }
  EXPECT_THROW(entanglement_entropy(s, 0), std::out_of_range);
  EXPECT_NEAR(reduced_entropy(s, 4, true), reduced_entropy(s, 4, false), 1e-10);
  const auto spec = reduced_spectrum(s, 4, true);
  EXPECT_NEAR(std::accumulate(spec.begin(), spec.end(), 0.0), 1.0, 1e-12);
  EXPECT_NEAR(entanglement_entropy(basis_state(c.basis, 0), 5), 0.0, 1e-14);
  EXPECT_NEAR(entanglement_entropy(s, c.array, 3), entropy_oracle(s, chain_cut(c.array, 3)), 1e-10);
}

TEST(Observables, NamedStateProbabilities) {
  const auto c = make_chain(9);
  const NamedState mix = named_state(StateKind::ZigzagMix, 9, *c.basis);
  const DenseState s{c.basis, mix.amplitudes};
  EXPECT_NEAR(state_probability(s, mix), 1.0, 1e-12);
  EXPECT_NEAR(state_probability(s, named_state(StateKind::Z, 9, *c.basis)), 0.5, 1e-12);
  EXPECT_NEAR(state_probability(s, named_state(StateKind::MIS, 9, *c.basis)), 0.0, 1e-15);
  const ObservableSpec spec = ObservableSpec::doublet_chain(c.array);
  EXPECT_NEAR(spec.order_prefactor * connected_correlation_sum(s, spec.order_pairs), 1.0, 1e-12);
}

TEST(Trajectory, CsvHasHeaderAndRows) {
  const auto c = make_chain(5);
  EvolveOptions opts;
  opts.n_steps = 20;
  const auto r = evolve(basis_state(c.basis, 0), c.family, linear_sweep(-1.0, 1.0, 1.0), opts,
                        ObservableSpec::doublet_chain(c.array, 5));
  std::ostringstream os;
  write_trajectory_csv(os, r.trajectory);
  const std::string text = os.str();
  EXPECT_EQ(text.rfind("t,", 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n')), r.trajectory.samples.size() + 1);
  EXPECT_EQ(to_json(r.trajectory)["samples"].size(), r.trajectory.samples.size());
}

TEST(Checkpoint, RoundTrip) {
  const auto c = make_chain(7);
  const DenseState s = random_state(c.basis, 13);
  const auto dir = std::filesystem::temp_directory_path() / "sqs_ckpt_test";
  std::filesystem::create_directories(dir);
  const Checkpoint cp{1.25, {1.0, 0.5}, s.amplitudes};
  write_checkpoint((dir / "cp").string(), *c.basis, cp);
  const Checkpoint back = read_checkpoint((dir / "cp").string(), *c.basis);
  EXPECT_EQ(back.t, 1.25);
  EXPECT_EQ(back.controls.delta, 0.5);
  EXPECT_LT((back.amplitudes - s.amplitudes).cwiseAbs().maxCoeff(), 1e-6);  // complex64 on disk
  const auto other = make_chain(5);
  EXPECT_ANY_THROW(read_checkpoint((dir / "cp").string(), *other.basis));
  std::filesystem::remove_all(dir);
}

TEST(QuenchScan, PrefixSharingMatchesIndependentRuns) {
  const auto c = make_chain(7);
  const DenseState init = initial_state(c.family.at(1.0, -4.0), InitialMode::exact_ground);
  EvolveOptions opts;
  opts.n_steps = 1500;
  const std::vector<double> grid{0.0, 0.2, 0.45};
  const auto finals = dense_quench_scan(init, c.family, SqsParams{}, grid, opts, 2);
  ASSERT_EQ(finals.size(), grid.size());
  const NamedState mis = named_state(StateKind::MIS, 7, *c.basis);
  for (std::size_t k = 0; k < grid.size(); ++k) {
    SqsParams p;
    p.t_q = grid[k];
    const auto r = evolve(init, c.family, sweep_quench_sweep(p), opts, ObservableSpec{});
    EXPECT_NEAR(state_probability(finals[k], mis), state_probability(r.final_state, mis), 2e-3) << "tq=" << grid[k];
  }
}

}  // namespace
}  // namespace sqs

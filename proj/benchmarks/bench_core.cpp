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

#include <benchmark/benchmark.h>

#include <memory>

#include "sqs/dyn_dense.hpp"
#include "sqs/dyn_mps.hpp"
#include "sqs/krylov.hpp"
#include "sqs/spectra.hpp"

namespace {

using namespace sqs;

struct Chain {
  AtomArray array;
  BlockadeGraph graph;
  Eigen::MatrixXd v;
  std::shared_ptr<const BasisSet> basis;
};

Chain chain(int L) {
  AtomArray array = build_doublet_chain(L, 5.5);
  BlockadeGraph graph = blockade_graph(array, Calibration::standard());
  Eigen::MatrixXd v = interaction_matrix(array, Calibration::standard(), Truncation::nnn);
  auto basis = std::make_shared<const BasisSet>(BasisSet::enumerate(graph, Constraint::blockade));
  return {std::move(array), std::move(graph), std::move(v), std::move(basis)};
}

void BM_HamiltonianApply(benchmark::State& state) {
  const Chain c = chain(static_cast<int>(state.range(0)));
  const auto h = HamiltonianOperator::build(c.array, c.basis, c.v, 1.0, 1.5);
  Eigen::VectorXcd in = Eigen::VectorXcd::Random(static_cast<Eigen::Index>(h.dim()));
  Eigen::VectorXcd out(in.size());
  for (auto _ : state) {
    h.apply(std::span<const cplx>(in.data(), h.dim()), std::span<cplx>(out.data(), h.dim()));
    benchmark::DoNotOptimize(out.data());
  }
  state.counters["dim"] = static_cast<double>(h.dim());
}
BENCHMARK(BM_HamiltonianApply)->Arg(9)->Arg(13)->Arg(15);

void BM_KrylovStep(benchmark::State& state) {
  const Chain c = chain(static_cast<int>(state.range(0)));
  const auto h = HamiltonianOperator::build(c.array, c.basis, c.v, 1.0, 1.5);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Random(static_cast<Eigen::Index>(h.dim())).normalized();
  for (auto _ : state) benchmark::DoNotOptimize(krylov_expm(h, 2.0 * 3.141592653589793 * 0.01, psi));
}
BENCHMARK(BM_KrylovStep)->Arg(9)->Arg(13)->Arg(15);

void BM_TebdStep(benchmark::State& state) {
  const Chain c = chain(15);
  const TebdModel model = TebdModel::build(c.array, c.graph, c.v, MpsMode::blockade);
  TebdOptions o;
  o.chi_max = static_cast<std::size_t>(state.range(0));
  MPSState mps = mps_from_dense(
      initial_state(HamiltonianOperator::build(c.array, c.basis, c.v, 1.0, 1.5), InitialMode::exact_ground));
  for (auto _ : state) tebd_step(mps, model, {1.0, 1.5}, 0.01, o);
  state.counters["chi"] = static_cast<double>(mps.max_bond_dim());
}
BENCHMARK(BM_TebdStep)->Arg(5)->Arg(20)->Unit(benchmark::kMillisecond);

void BM_LanczosLowEigs(benchmark::State& state) {
  const Chain c = chain(static_cast<int>(state.range(0)));
  const auto h = HamiltonianOperator::build(c.array, c.basis, c.v, 1.0, 2.5);
  EigenOptions o;
  o.dense_threshold = 0;
  for (auto _ : state) benchmark::DoNotOptimize(low_eigs(h, 2, o).energies.data());
}
BENCHMARK(BM_LanczosLowEigs)->Arg(13)->Arg(15)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();

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

#include "sqs/dyn_dense.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <bit>
#include <cmath>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <unordered_map>

#include "sqs/spectra.hpp"

namespace sqs {

std::vector<double> DenseState::probabilities() const {
  std::vector<double> p(static_cast<std::size_t>(amplitudes.size()));
  for (Eigen::Index i = 0; i < amplitudes.size(); ++i) p[static_cast<std::size_t>(i)] = std::norm(amplitudes(i));
  return p;
}

DenseState basis_state(std::shared_ptr<const BasisSet> basis, Config c) {
  auto idx = basis->index_of(c);
  if (!idx) throw std::invalid_argument("basis_state: configuration outside the basis");
  DenseState s{basis, Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis->size()))};
  s.amplitudes(static_cast<Eigen::Index>(*idx)) = 1.0;
  return s;
}

DenseState initial_state(const HamiltonianOperator& h, InitialMode mode) {
  if (mode == InitialMode::all_ground) return basis_state(h.basis_ptr(), 0);
  EigenPairs g = low_eigs(h, 1);
  return {h.basis_ptr(), g.vectors.col(0).cast<cplx>()};
}

// ------------------------------------------------------------ observables

std::size_t chain_cut(const AtomArray& array, int site) {
  if (!array.is_chain()) throw std::invalid_argument("chain cuts need a chain layout");
  if (site < 1 || site > array.num_sites() - 1) {
    throw std::out_of_range("cut after site " + std::to_string(site) + " is outside 1..L-1");
  }
  return array.atoms_up_to_site(site);
}

std::size_t central_cut(const AtomArray& array) { return chain_cut(array, (array.num_sites() + 1) / 2); }

ObservableSpec ObservableSpec::doublet_chain(const AtomArray& array, std::size_t stride) {
  if (array.layout() != Layout::doublet_chain)
    throw std::invalid_argument("doublet_chain observables need a doublet chain");
  const int L = array.num_sites();
  ObservableSpec spec;
  spec.stride = stride;
  for (const auto& t : named_state_terms(StateKind::MIS, L)) spec.mis_configs.push_back(t.first);
  if (L >= 7) {
    for (const auto& t : named_state_terms(StateKind::ZigzagMix, L)) spec.zigzag_configs.push_back(t.first);
  }
  if (L >= 9) {
    spec.order_pairs = zigzag_correlation_pairs(L);
    spec.order_prefactor = 4.0 / static_cast<double>(L - 7);
  }
  if (L >= 2) spec.entropy_cuts.push_back(central_cut(array));
  return spec;
}

std::vector<double> expectation_n(const DenseState& state) {
  const BasisSet& b = *state.basis;
  std::vector<double> n(b.n_atoms(), 0.0);
  for (std::size_t a = 0; a < b.size(); ++a) {
    const double p = std::norm(state.amplitudes(static_cast<Eigen::Index>(a)));
    Config c = b.config(a);
    while (c) {
      n[static_cast<std::size_t>(std::countr_zero(c))] += p;
      c &= c - 1;
    }
  }
  return n;
}

std::vector<double> site_occupations(const AtomArray& array, const std::vector<double>& n) {
  if (n.size() != array.size()) throw std::invalid_argument("site_occupations: size mismatch");
  std::vector<double> out(static_cast<std::size_t>(array.num_sites()), 0.0);
  for (std::size_t i = 0; i < array.size(); ++i) {
    const int site = array[i].site;
    if (site >= 1) out[static_cast<std::size_t>(site - 1)] += n[i];
  }
  return out;
}

double state_probability(const DenseState& state, Config c) {
  auto idx = state.basis->index_of(c);
  if (!idx) throw std::invalid_argument("state_probability: target outside the basis");
  return std::norm(state.amplitudes(static_cast<Eigen::Index>(*idx)));
}

double state_probability(const DenseState& state, const NamedState& target) {
  if (target.kind == StateKind::ZigzagMix) {
    double p = 0.0;
    for (const auto& t : target.terms) p += state_probability(state, t.first);
    return p;
  }
  cplx ovl = 0.0;
  for (const auto& [c, amp] : target.terms) {
    auto idx = state.basis->index_of(c);
    if (!idx) throw std::invalid_argument("state_probability: target outside the basis");
    ovl += amp * state.amplitudes(static_cast<Eigen::Index>(*idx));
  }
  return std::norm(ovl);
}

namespace {

double probability_sum(const DenseState& state, const std::vector<Config>& configs) {
  double p = 0.0;
  for (Config c : configs) {
    if (auto idx = state.basis->index_of(c)) p += std::norm(state.amplitudes(static_cast<Eigen::Index>(*idx)));
  }
  return p;
}

// Amplitudes arranged as (left substring) x (right substring).
Eigen::MatrixXcd schmidt_matrix(const DenseState& state, std::size_t n_left) {
  const BasisSet& b = *state.basis;
  if (n_left == 0 || n_left >= b.n_atoms()) throw std::out_of_range("entanglement cut must split the atoms");
  const Config mask = (Config{1} << n_left) - 1;
  std::unordered_map<Config, Eigen::Index> rows;
  std::unordered_map<Config, Eigen::Index> cols;
  for (Config c : b.configs()) {
    rows.try_emplace(c & mask, static_cast<Eigen::Index>(rows.size()));
    cols.try_emplace(c >> n_left, static_cast<Eigen::Index>(cols.size()));
  }
  Eigen::MatrixXcd m =
      Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t a = 0; a < b.size(); ++a) {
    const Config c = b.config(a);
    m(rows[c & mask], cols[c >> n_left]) = state.amplitudes(static_cast<Eigen::Index>(a));
  }
  return m;
}

double entropy_of(const std::vector<double>& weights) {
  double total = 0.0;
  for (double w : weights) total += std::max(w, 0.0);
  double s = 0.0;
  for (double w : weights) {
    const double p = std::max(w, 0.0) / total;
    if (p > 1e-300) s -= p * std::log(p);
  }
  return s;
}

}  // namespace

double entanglement_entropy(const DenseState& state, std::size_t n_left) {
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(schmidt_matrix(state, n_left));
  std::vector<double> w;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) w.push_back(std::pow(svd.singularValues()(i), 2));
  return entropy_of(w);
}

double entanglement_entropy(const DenseState& state, const AtomArray& array, int site) {
  return entanglement_entropy(state, chain_cut(array, site));
}

std::vector<double> reduced_spectrum(const DenseState& state, std::size_t n_left, bool left) {
  Eigen::MatrixXcd m = schmidt_matrix(state, n_left);
  Eigen::MatrixXcd rho = left ? Eigen::MatrixXcd(m * m.adjoint()) : Eigen::MatrixXcd(m.adjoint() * m);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(rho, Eigen::EigenvaluesOnly);
  std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  std::sort(ev.rbegin(), ev.rend());
  return ev;
}

double reduced_entropy(const DenseState& state, std::size_t n_left, bool left) {
  return entropy_of(reduced_spectrum(state, n_left, left));
}

double connected_correlation_sum(const DenseState& state,
                                 const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  const BasisSet& b = *state.basis;
  std::vector<double> n = expectation_n(state);
  double sum = 0.0;
  for (const auto& [i, j] : pairs) {
    const Config m = (Config{1} << i) | (Config{1} << j);
    double nn = 0.0;
    for (std::size_t a = 0; a < b.size(); ++a) {
      if ((b.config(a) & m) == m) nn += std::norm(state.amplitudes(static_cast<Eigen::Index>(a)));
    }
    sum += nn - n[i] * n[j];
  }
  return sum;
}

double energy(const DenseState& state, const HamiltonianOperator& h) {
  Eigen::VectorXcd hpsi(state.amplitudes.size());
  h.apply(std::span<const cplx>(state.amplitudes.data(), static_cast<std::size_t>(state.amplitudes.size())),
          std::span<cplx>(hpsi.data(), static_cast<std::size_t>(hpsi.size())));
  return state.amplitudes.dot(hpsi).real();
}

// ----------------------------------------------------------- trajectories

void write_trajectory_csv(std::ostream& os, const Trajectory& traj) {
  const std::size_t n_atoms = traj.samples.empty() ? 0 : traj.samples.front().n.size();
  os << "t,omega,delta,p_mis,p_zigzag,order,energy,norm";
  for (std::size_t c : traj.entropy_cuts) os << ",S_cut" << c;
  if (traj.mps_columns) os << ",bond_dim_max,kept_norm";
  for (std::size_t i = 0; i < n_atoms; ++i) os << ",n_" << i;
  os << '\n';
  for (const Sample& s : traj.samples) {
    os << fmt17(s.t) << ',' << fmt17(s.omega) << ',' << fmt17(s.delta) << ',' << fmt17(s.p_mis) << ','
       << fmt17(s.p_zigzag) << ',' << fmt17(s.order) << ',' << fmt17(s.energy) << ',' << fmt17(s.norm);
    for (double e : s.entropy) os << ',' << fmt17(e);
    if (traj.mps_columns) os << ',' << s.bond_dim_max << ',' << fmt17(s.kept_norm);
    for (double v : s.n) os << ',' << fmt17(v);
    os << '\n';
  }
}

nlohmann::json to_json(const Trajectory& traj) {
  nlohmann::json samples = nlohmann::json::array();
  for (const Sample& s : traj.samples) {
    nlohmann::json j{
        {"t", s.t},         {"omega", s.omega},   {"delta", s.delta}, {"p_mis", s.p_mis},     {"p_zigzag", s.p_zigzag},
        {"order", s.order}, {"energy", s.energy}, {"norm", s.norm},   {"entropy", s.entropy}, {"n", s.n}};
    if (traj.mps_columns) {
      j["bond_dim_max"] = s.bond_dim_max;
      j["kept_norm"] = s.kept_norm;
    }
    samples.push_back(std::move(j));
  }
  return {{"entropy_cuts", traj.entropy_cuts}, {"samples", std::move(samples)}};
}

// ------------------------------------------------------------- evolution

namespace {

// Largest number of RK4 substeps we accept before calling the step hopeless.
constexpr std::size_t kMaxRk4Substeps = 1u << 20;

void rk4_step(Eigen::VectorXcd& psi, const HamiltonianOperator& h, double tau, double norm_tol) {
  // |R(-i x)|^2 = 1 - x^6/72 + x^8/576 for x = lambda * h_sub, so the per-step
  // drift is bounded by n_sub * x^6 / 72 with x <= ||H|| tau / n_sub.
  const double x0 = h.norm_bound() * std::abs(tau);
  std::size_t n_sub = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(x0 / 0.5)));
  while (static_cast<double>(n_sub) * std::pow(x0 / static_cast<double>(n_sub), 6) / 72.0 > norm_tol) {
    n_sub *= 2;
    if (n_sub > kMaxRk4Substeps) throw NumericError("rk4: norm-drift bound needs too many substeps");
  }
  const double hs = tau / static_cast<double>(n_sub);
  const auto n = static_cast<std::size_t>(psi.size());
  Eigen::VectorXcd k1(psi.size()), k2(psi.size()), k3(psi.size()), k4(psi.size()), tmp(psi.size());
  const cplx mi(0.0, -1.0);
  auto deriv = [&](const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
    h.apply(std::span<const cplx>(in.data(), n), std::span<cplx>(out.data(), n));
    out *= mi;
  };
  for (std::size_t s = 0; s < n_sub; ++s) {
    deriv(psi, k1);
    tmp = psi + (0.5 * hs) * k1;
    deriv(tmp, k2);
    tmp = psi + (0.5 * hs) * k2;
    deriv(tmp, k3);
    tmp = psi + hs * k3;
    deriv(tmp, k4);
    psi += (hs / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
}

Sample record(const DenseState& state, const HamiltonianOperator& family, Controls c, double t,
              const ObservableSpec& spec) {
  Sample s;
  s.t = t;
  s.omega = c.omega;
  s.delta = c.delta;
  s.norm = state.norm();
  std::vector<double> n = expectation_n(state);
  s.p_mis = probability_sum(state, spec.mis_configs);
  s.p_zigzag = probability_sum(state, spec.zigzag_configs);
  if (!spec.order_pairs.empty()) s.order = spec.order_prefactor * connected_correlation_sum(state, spec.order_pairs);
  if (spec.energy) s.energy = energy(state, family.at(c.omega, c.delta));
  for (std::size_t cut : spec.entropy_cuts) s.entropy.push_back(entanglement_entropy(state, cut));
  if (spec.per_atom_n) s.n = std::move(n);
  return s;
}

}  // namespace

std::vector<StepPlan> plan_steps(const ControlSource& controls, std::size_t n_steps) {
  if (n_steps == 0) throw std::invalid_argument("n_steps must be >= 1");
  const double total = controls.duration();
  std::vector<double> edges{0.0};
  for (double b : controls.breakpoints()) {
    if (b > edges.back() && b < total) edges.push_back(b);
  }
  edges.push_back(total);
  std::vector<StepPlan> plan;
  for (std::size_t k = 0; k + 1 < edges.size(); ++k) {
    const double len = edges[k + 1] - edges[k];
    if (len <= 0.0) continue;
    const double want = static_cast<double>(n_steps) * len / total;
    const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(want - 1e-9)));
    const double dt = len / static_cast<double>(m);
    for (std::size_t s = 0; s < m; ++s) plan.push_back({edges[k] + static_cast<double>(s) * dt, dt});
  }
  return plan;
}

void dense_step(Eigen::VectorXcd& psi, const HamiltonianOperator& family, Controls c, double dt,
                const EvolveOptions& opts) {
  const HamiltonianOperator h = family.at(c.omega, c.delta);
  const double tau = kTwoPi * dt;
  if (opts.method == Integrator::krylov) {
    krylov_expm(h, tau, psi, opts.krylov);
  } else {
    rk4_step(psi, h, tau, opts.rk4_norm_tol);
  }
}

void dense_advance(Eigen::VectorXcd& psi, const HamiltonianOperator& family, const ControlSource& controls, double t0,
                   double t1, std::size_t n_steps, const EvolveOptions& opts) {
  if (n_steps == 0 || t1 <= t0) return;
  const double dt = (t1 - t0) / static_cast<double>(n_steps);
  for (std::size_t s = 0; s < n_steps; ++s) {
    dense_step(psi, family, controls.sample(t0 + (static_cast<double>(s) + 0.5) * dt), dt, opts);
  }
}

EvolutionResult evolve(const DenseState& initial, const HamiltonianOperator& family, const ControlSource& controls,
                       const EvolveOptions& opts, const ObservableSpec& spec) {
  if (initial.basis.get() != &family.basis() && initial.basis->hash() != family.basis().hash()) {
    throw std::invalid_argument("evolve: state and Hamiltonian use different bases");
  }
  const std::vector<StepPlan> plan = plan_steps(controls, opts.n_steps);
  const std::size_t stride = std::max<std::size_t>(1, spec.stride);

  EvolutionResult out{Trajectory{}, initial};
  out.trajectory.entropy_cuts = spec.entropy_cuts;
  DenseState& state = out.final_state;

  auto checkpoint = [&](double t, Controls c) { out.trajectory.checkpoints.push_back({t, c, state.amplitudes}); };
  const Controls c0 = controls.sample(0.0);
  out.trajectory.samples.push_back(record(state, family, c0, 0.0, spec));
  if (spec.checkpoint_stride > 0) checkpoint(0.0, c0);

  for (std::size_t k = 0; k < plan.size(); ++k) {
    const StepPlan& p = plan[k];
    dense_step(state.amplitudes, family, controls.sample(p.t0 + 0.5 * p.dt), p.dt, opts);
    const double drift = std::abs(state.norm() - 1.0);
    if (drift > 1e-9) throw NumericError("evolve: norm drifted by " + fmt17(drift));
    const std::size_t step = k + 1;
    const bool last = step == plan.size();
    const double t = last ? controls.duration() : p.t0 + p.dt;
    if (step % stride == 0 || last) {
      out.trajectory.samples.push_back(record(state, family, controls.sample(t), t, spec));
    }
    if (spec.checkpoint_stride > 0 && (step % spec.checkpoint_stride == 0 || last)) {
      checkpoint(t, controls.sample(t));
    }
  }
  return out;
}

// --------------------------------------------------------- checkpoint I/O

void write_checkpoint(const std::string& prefix, const BasisSet& basis, const Checkpoint& cp) {
  if (static_cast<std::size_t>(cp.amplitudes.size()) != basis.size()) {
    throw std::invalid_argument("write_checkpoint: amplitude count does not match the basis");
  }
  std::ofstream bin(prefix + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open " + prefix + ".bin for writing");
  for (Eigen::Index i = 0; i < cp.amplitudes.size(); ++i) {
    for (float f : {static_cast<float>(cp.amplitudes(i).real()), static_cast<float>(cp.amplitudes(i).imag())}) {
      const auto u = std::bit_cast<std::uint32_t>(f);
      const char bytes[4] = {static_cast<char>(u & 0xff), static_cast<char>((u >> 8) & 0xff),
                             static_cast<char>((u >> 16) & 0xff), static_cast<char>((u >> 24) & 0xff)};
      bin.write(bytes, 4);
    }
  }
  nlohmann::json header{{"format", "complex64-le"},   {"basis_hash", basis.hash()}, {"dim", basis.size()}, {"t", cp.t},
                        {"omega", cp.controls.omega}, {"delta", cp.controls.delta}};
  std::ofstream js(prefix + ".json");
  if (!js) throw std::runtime_error("cannot open " + prefix + ".json for writing");
  js << header.dump(2) << '\n';
}

Checkpoint read_checkpoint(const std::string& prefix, const BasisSet& basis) {
  std::ifstream js(prefix + ".json");
  if (!js) throw std::runtime_error("cannot open " + prefix + ".json");
  const nlohmann::json header = nlohmann::json::parse(js);
  if (header.at("format").get<std::string>() != "complex64-le") throw std::runtime_error("unknown checkpoint format");
  if (header.at("basis_hash").get<std::string>() != basis.hash()) {
    throw std::invalid_argument("checkpoint was written for a different basis");
  }
  const auto dim = header.at("dim").get<std::size_t>();
  std::ifstream bin(prefix + ".bin", std::ios::binary);
  if (!bin) throw std::runtime_error("cannot open " + prefix + ".bin");
  Checkpoint cp{header.at("t").get<double>(),
                {header.at("omega").get<double>(), header.at("delta").get<double>()},
                Eigen::VectorXcd(static_cast<Eigen::Index>(dim))};
  for (std::size_t i = 0; i < dim; ++i) {
    float parts[2];
    for (float& f : parts) {
      unsigned char b[4];
      if (!bin.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error("checkpoint payload is truncated");
      f = std::bit_cast<float>(static_cast<std::uint32_t>(b[0]) | static_cast<std::uint32_t>(b[1]) << 8 |
                               static_cast<std::uint32_t>(b[2]) << 16 | static_cast<std::uint32_t>(b[3]) << 24);
    }
    cp.amplitudes(static_cast<Eigen::Index>(i)) = cplx(parts[0], parts[1]);
  }
  return cp;
}

// ------------------------------------------------------------ quench scan

namespace {

void advance_linear(Eigen::VectorXcd& psi, const HamiltonianOperator& family, double d0, double d1, double len,
                    double dt, const EvolveOptions& opts) {
  if (len <= 0.0) return;
  const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / dt - 1e-9)));
  const double h = len / static_cast<double>(m);
  for (std::size_t s = 0; s < m; ++s) {
    const double f = (static_cast<double>(s) + 0.5) / static_cast<double>(m);
    dense_step(psi, family, {family.omega(), d0 + (d1 - d0) * f}, h, opts);
  }
}

}  // namespace

std::vector<DenseState> dense_quench_scan(const DenseState& initial, const HamiltonianOperator& family,
                                          const SqsParams& base, const std::vector<double>& tq_grid,
                                          const EvolveOptions& opts, unsigned threads) {
  if (tq_grid.empty()) return {};
  for (std::size_t i = 0; i < tq_grid.size(); ++i) {
    if (tq_grid[i] < 0.0 || (i > 0 && tq_grid[i] <= tq_grid[i - 1])) {
      throw std::invalid_argument("quench-duration grid must be non-negative and strictly increasing");
    }
  }
  sweep_quench_sweep(base);  // validates the schedule parameters
  const double span = std::abs(base.delta_end - base.delta_start);
  const double dt = span / base.rate / static_cast<double>(std::max<std::size_t>(1, opts.n_steps));

  Eigen::VectorXcd psi = initial.amplitudes;
  advance_linear(psi, family, base.delta_start, base.delta_i, std::abs(base.delta_i - base.delta_start) / base.rate, dt,
                 opts);

  std::vector<Eigen::VectorXcd> held;
  double t_prev = 0.0;
  for (double tq : tq_grid) {
    advance_linear(psi, family, base.delta_q, base.delta_q, tq - t_prev, dt, opts);
    held.push_back(psi);
    t_prev = tq;
  }

  const double resume = base.resume_at_quench ? base.delta_q : base.delta_i;
  std::vector<DenseState> out(tq_grid.size(), DenseState{initial.basis, {}});
  parallel_for(held.size(), threads, [&](std::size_t i) {
    advance_linear(held[i], family, resume, base.delta_end, std::abs(base.delta_end - resume) / base.rate, dt, opts);
    out[i].amplitudes = std::move(held[i]);
  });
  return out;
}

}  // namespace sqs

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

#include "sqs/dyn_mps.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace sqs {
namespace {

using Index = Eigen::Index;
using ConstRowMap = Eigen::Map<const RowMatrixXcd>;

RowMatrixXcd reshaped(const RowMatrixXcd& m, Index rows, Index cols) { return ConstRowMap(m.data(), rows, cols); }

// Rows of a site tensor with physical index s: a D_left x D_right matrix.
Eigen::MatrixXcd slice(const RowMatrixXcd& site, int s) { return site(Eigen::seqN(s, site.rows() / 2, 2), Eigen::all); }

struct SplitResult {
  RowMatrixXcd left;   // isometry, rows x k
  RowMatrixXcd right;  // k x cols, unit norm
  double kept = 1.0;   // retained weight fraction
};

// Keeps Schmidt values with sigma >= cutoff * ||sigma||, at most chi_max of them.
std::size_t keep_count(const std::vector<double>& w_desc, double total, std::size_t chi_max, double cutoff) {
  std::size_t k = w_desc.size();
  while (k > 1 && w_desc[k - 1] < cutoff * cutoff * total) --k;
  if (chi_max > 0) k = std::min(k, chi_max);
  return std::max<std::size_t>(k, 1);
}

// Truncated factorization m ~ left * right; left is an isometry.
SplitResult split(const RowMatrixXcd& m, std::size_t chi_max, double cutoff) {
  SplitResult out;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(Eigen::MatrixXcd(m), Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw NumericError("tebd: SVD failed");
  const Eigen::VectorXd& sv = svd.singularValues();
  std::vector<double> w(static_cast<std::size_t>(sv.size()));
  double total = 0.0;
  for (Index i = 0; i < sv.size(); ++i) total += (w[static_cast<std::size_t>(i)] = sv(i) * sv(i));
  if (!(total > 0.0)) throw NumericError("tebd: state collapsed to zero norm");
  const auto k = static_cast<Index>(keep_count(w, total, chi_max, cutoff));
  double kept = 0.0;
  for (Index i = 0; i < k; ++i) kept += w[static_cast<std::size_t>(i)];
  out.kept = std::min(1.0, kept / total);
  out.left = svd.matrixU().leftCols(k);
  out.right = (sv.head(k) / std::sqrt(kept)).asDiagonal() * svd.matrixV().leftCols(k).adjoint();
  return out;
}

double entropy_from_weights(const Eigen::VectorXd& sv) {
  double total = sv.squaredNorm();
  double s = 0.0;
  for (Index i = 0; i < sv.size(); ++i) {
    const double p = sv(i) * sv(i) / total;
    if (p > 1e-300) s -= p * std::log(p);
  }
  return s;
}

}  // namespace

// Internal operations needing access to the site tensors.
class MpsKernel {
 public:
  static std::vector<RowMatrixXcd>& sites(MPSState& m) { return m.sites_; }
  static void set_center(MPSState& m, std::size_t c) { m.center_ = c; }
  static void reset_kept(MPSState& m) { m.kept_norm_ = 1.0; }

  static RowMatrixXcd contract(const MPSState& m, std::size_t first, std::size_t width) {
    RowMatrixXcd theta = m.sites_[first];
    for (std::size_t p = first + 1; p < first + width; ++p) {
      const RowMatrixXcd& nxt = m.sites_[p];
      const Index d = nxt.rows() / 2;
      const RowMatrixXcd prod = theta * ConstRowMap(nxt.data(), d, 2 * nxt.cols());
      theta = reshaped(prod, prod.rows() * 2, nxt.cols());
    }
    return theta;
  }

  // Gate on the window [first, first + width); the centre must be inside.
  static void apply(MPSState& m, std::size_t first, std::size_t width, const Eigen::MatrixXcd& gate,
                    std::size_t chi_max, double cutoff) {
    m.move_center(first);
    RowMatrixXcd theta = contract(m, first, width);
    const Index dim = Index{1} << width;
    const Index dr = theta.cols();
    const Index dl = theta.rows() / dim;
    for (Index l = 0; l < dl; ++l) {
      Eigen::Map<RowMatrixXcd> blk(theta.data() + l * dim * dr, dim, dr);
      blk = (gate * blk).eval();
    }
    RowMatrixXcd cur = std::move(theta);
    Index chi = dl;
    for (std::size_t k = 0; k + 1 < width; ++k) {
      const Index rows = chi * 2;
      const Index cols = cur.size() / rows;
      SplitResult sp = split(reshaped(cur, rows, cols), chi_max, cutoff);
      m.kept_norm_ *= sp.kept;
      m.sites_[first + k] = std::move(sp.left);
      chi = sp.right.rows();
      cur = std::move(sp.right);
    }
    const double nrm = cur.norm();
    if (!(nrm > 0.0)) throw NumericError("tebd: state collapsed to zero norm");
    m.sites_[first + width - 1] = reshaped(cur, chi * 2, dr) / nrm;
    m.center_ = first + width - 1;
  }
};

// ---------------------------------------------------------------- MPSState

MPSState MPSState::product(std::size_t n_atoms, const AtomSet& config) {
  if (n_atoms == 0) throw std::invalid_argument("an MPS needs at least one site");
  MPSState m;
  for (std::size_t p = 0; p < n_atoms; ++p) {
    RowMatrixXcd a = RowMatrixXcd::Zero(2, 1);
    a(config.test(p) ? 1 : 0, 0) = 1.0;
    m.sites_.push_back(std::move(a));
  }
  return m;
}

std::size_t MPSState::bond_dim(std::size_t b) const {
  if (b == 0 || b >= sites_.size()) throw std::out_of_range("bond index outside [1, size - 1]");
  return static_cast<std::size_t>(sites_[b - 1].cols());
}

std::size_t MPSState::max_bond_dim() const {
  std::size_t best = 1;
  for (std::size_t b = 1; b < sites_.size(); ++b) best = std::max(best, bond_dim(b));
  return best;
}

double MPSState::norm() const { return sites_[center_].norm(); }

void MPSState::move_center(std::size_t p) {
  if (p >= sites_.size()) throw std::out_of_range("move_center: position outside the chain");
  while (center_ < p) {
    RowMatrixXcd& a = sites_[center_];
    const Index rows = a.rows();
    const Index k = std::min(rows, a.cols());
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr{Eigen::MatrixXcd(a)};
    const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(rows, k);
    const Eigen::MatrixXcd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    a = q;
    RowMatrixXcd& b = sites_[center_ + 1];
    const Index d = b.rows() / 2;
    const RowMatrixXcd nb = r * ConstRowMap(b.data(), d, 2 * b.cols());
    b = reshaped(nb, k * 2, b.cols());
    ++center_;
  }
  while (center_ > p) {
    RowMatrixXcd& a = sites_[center_];
    const Index d = a.rows() / 2;
    const Eigen::MatrixXcd wide = ConstRowMap(a.data(), d, 2 * a.cols());
    const Index k = std::min(d, wide.cols());
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr{Eigen::MatrixXcd(wide.adjoint())};
    const Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(wide.cols(), k);
    const Eigen::MatrixXcd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    const RowMatrixXcd qt = q.adjoint();
    const Index dr = a.cols();
    a = reshaped(qt, k * 2, dr);
    RowMatrixXcd& b = sites_[center_ - 1];
    b = (b * r.adjoint()).eval();
    --center_;
  }
}

MPSState mps_from_product(const AtomArray& array, Config config) {
  return MPSState::product(array.size(), AtomSet::from_config(config));
}

MPSState mps_from_dense(const DenseState& state, double cutoff) {
  const BasisSet& b = *state.basis;
  const std::size_t n = b.n_atoms();
  std::map<Config, Eigen::VectorXcd> cols;  // suffix -> vector over the left bond
  for (std::size_t a = 0; a < b.size(); ++a) {
    const cplx amp = state.amplitudes(static_cast<Index>(a));
    if (amp != cplx(0.0)) cols[b.config(a)] = Eigen::VectorXcd::Constant(1, amp);
  }
  if (cols.empty()) throw NumericError("mps_from_dense: zero state");
  MPSState m = MPSState::product(n, AtomSet{});
  auto& sites = MpsKernel::sites(m);
  Index chi = 1;
  for (std::size_t p = 0; p + 1 < n; ++p) {
    std::map<Config, Index> col_index;
    for (const auto& [suffix, v] : cols) col_index.try_emplace(suffix >> 1, static_cast<Index>(col_index.size()));
    Eigen::MatrixXcd mat = Eigen::MatrixXcd::Zero(2 * chi, static_cast<Index>(col_index.size()));
    for (const auto& [suffix, v] : cols) {
      const Index s = static_cast<Index>(suffix & 1);
      const Index c = col_index[suffix >> 1];
      for (Index l = 0; l < chi; ++l) mat(l * 2 + s, c) += v(l);
    }
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(mat, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();
    std::vector<double> w(static_cast<std::size_t>(sv.size()));
    double total = 0.0;
    for (Index i = 0; i < sv.size(); ++i) total += (w[static_cast<std::size_t>(i)] = sv(i) * sv(i));
    const auto k = static_cast<Index>(keep_count(w, total, 0, cutoff));
    sites[p] = svd.matrixU().leftCols(k);
    const Eigen::MatrixXcd rest = sv.head(k).asDiagonal() * svd.matrixV().leftCols(k).adjoint();
    std::map<Config, Eigen::VectorXcd> next;
    for (const auto& [key, c] : col_index) next[key] = rest.col(c);
    cols = std::move(next);
    chi = k;
  }
  RowMatrixXcd last = RowMatrixXcd::Zero(2 * chi, 1);
  for (const auto& [suffix, v] : cols) {
    for (Index l = 0; l < chi; ++l) last(l * 2 + static_cast<Index>(suffix & 1), 0) = v(l);
  }
  sites[n - 1] = std::move(last);
  MpsKernel::set_center(m, n - 1);
  return m;
}

namespace {

cplx amplitude(const MPSState& mps, const AtomSet& config) {
  Eigen::RowVectorXcd v = Eigen::RowVectorXcd::Ones(1);
  for (std::size_t p = 0; p < mps.size(); ++p) v = v * slice(mps.site(p), config.test(p) ? 1 : 0);
  return v(0);
}

}  // namespace

Eigen::VectorXcd mps_to_dense(const MPSState& mps, const BasisSet& basis) {
  if (basis.n_atoms() != mps.size()) throw std::invalid_argument("mps_to_dense: atom count mismatch");
  Eigen::VectorXcd out(static_cast<Index>(basis.size()));
  for (std::size_t a = 0; a < basis.size(); ++a)
    out(static_cast<Index>(a)) = amplitude(mps, AtomSet::from_config(basis.config(a)));
  return out;
}

// --------------------------------------------------------------- TebdModel

Eigen::MatrixXd TebdModel::Block::at(double omega, double delta) const {
  Eigen::MatrixXd h = omega * x_part;
  h.diagonal() += v_part - delta * n_part;
  return h;
}

TebdModel TebdModel::build(const AtomArray& array, const BlockadeGraph& graph, const Eigen::MatrixXd& interactions,
                           MpsMode mode, std::size_t max_window_atoms) {
  if (!array.is_chain()) throw std::invalid_argument("TEBD needs a chain layout");
  const std::size_t n = array.size();
  if (graph.n_vertices != n || static_cast<std::size_t>(interactions.rows()) != n) {
    throw std::invalid_argument("TebdModel: graph/interaction size mismatch");
  }
  const int L = array.num_sites();
  auto site = [&](std::size_t i) { return array[i].site; };
  auto pair_active = [&](std::size_t a, std::size_t b) {
    return interactions(static_cast<Index>(a), static_cast<Index>(b)) != 0.0 &&
           !(mode == MpsMode::blockade && graph.adjacent(a, b));
  };

  int reach = 1;
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const int d = std::abs(site(a) - site(b));
      if (mode == MpsMode::blockade && graph.adjacent(a, b)) reach = std::max(reach, d);
      if (pair_active(a, b)) reach = std::max(reach, (d + 1) / 2);
    }
  }

  TebdModel model;
  model.n_atoms_ = n;
  model.reach_ = reach;
  model.mode_ = mode;
  model.layers_.resize(static_cast<std::size_t>(2 * reach + 1));
  for (int j = 1; j <= L; ++j) {
    const int lo = std::max(1, j - reach);
    const int hi = std::min(L, j + reach);
    Block blk;
    blk.first = array.atoms_up_to_site(lo - 1);
    blk.width = array.atoms_up_to_site(hi) - blk.first;
    if (blk.width > max_window_atoms) {
      throw BudgetError("TEBD block of " + std::to_string(blk.width) + " atoms exceeds the window budget of " +
                        std::to_string(max_window_atoms));
    }
    const Index dim = Index{1} << blk.width;
    auto bit = [&](std::size_t atom) { return Index{1} << (blk.width - 1 - (atom - blk.first)); };
    blk.x_part = Eigen::MatrixXd::Zero(dim, dim);
    blk.n_part = Eigen::VectorXd::Zero(dim);
    blk.v_part = Eigen::VectorXd::Zero(dim);
    for (std::size_t a : array.atoms_at_site(j)) {
      Index blocked = 0;
      if (mode == MpsMode::blockade) graph.neighbors[a].for_each([&](std::size_t b) { blocked |= bit(b); });
      const double amp = 0.5 * array[a].rabi_scale;
      for (Index x = 0; x < dim; ++x) {
        if (x & blocked) continue;
        blk.x_part(x ^ bit(a), x) += amp;
        if (x & bit(a)) blk.n_part(x) += 1.0;
      }
    }
    for (std::size_t a = blk.first; a < blk.first + blk.width; ++a) {
      for (std::size_t b = a + 1; b < blk.first + blk.width; ++b) {
        if (!pair_active(a, b) || (site(a) + site(b)) / 2 != j) continue;
        const double v = interactions(static_cast<Index>(a), static_cast<Index>(b));
        for (Index x = 0; x < dim; ++x) {
          if ((x & bit(a)) && (x & bit(b))) blk.v_part(x) += v;
        }
      }
    }
    model.layers_[static_cast<std::size_t>((j - 1) % (2 * reach + 1))].push_back(model.blocks_.size());
    model.blocks_.push_back(std::move(blk));
  }
  return model;
}

// --------------------------------------------------------------- evolution

namespace {

// exp(-i 2pi h dt), or exp(-2pi h tau) for imaginary time.
Eigen::MatrixXcd gate(const Eigen::MatrixXd& h, double dt, bool imaginary) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  const Eigen::VectorXd& w = es.eigenvalues();
  Eigen::VectorXcd phase(w.size());
  for (Index i = 0; i < w.size(); ++i) {
    phase(i) = imaginary ? cplx(std::exp(-kTwoPi * dt * (w(i) - w(0))), 0.0) : std::polar(1.0, -kTwoPi * dt * w(i));
  }
  const Eigen::MatrixXcd v = es.eigenvectors().cast<cplx>();
  return v * phase.asDiagonal() * v.adjoint();
}

void trotter_step(MPSState& mps, const TebdModel& model, Controls c, double dt, std::size_t chi_max, double cutoff,
                  bool imaginary) {
  const auto& layers = model.layers();
  const std::size_t k = layers.size();
  std::vector<Eigen::MatrixXd> h;
  h.reserve(model.blocks().size());
  for (const auto& b : model.blocks()) h.push_back(b.at(c.omega, c.delta));
  auto run_layer = [&](std::size_t li, double len) {
    for (std::size_t bi : layers[li]) {
      const auto& b = model.blocks()[bi];
      MpsKernel::apply(mps, b.first, b.width, gate(h[bi], len, imaginary), chi_max, cutoff);
    }
  };
  for (std::size_t li = 0; li + 1 < k; ++li) run_layer(li, 0.5 * dt);
  run_layer(k - 1, dt);
  for (std::size_t li = k - 1; li-- > 0;) run_layer(li, 0.5 * dt);
}

Sample record(const MPSState& mps, const TebdModel& model, Controls c, double t, const ObservableSpec& spec) {
  Sample s;
  s.t = t;
  s.omega = c.omega;
  s.delta = c.delta;
  s.norm = mps.norm();
  s.bond_dim_max = mps.max_bond_dim();
  s.kept_norm = mps.kept_norm();
  for (Config cfg : spec.mis_configs) s.p_mis += mps_probability(mps, AtomSet::from_config(cfg));
  for (Config cfg : spec.zigzag_configs) s.p_zigzag += mps_probability(mps, AtomSet::from_config(cfg));
  if (!spec.order_pairs.empty()) s.order = spec.order_prefactor * mps_correlation_sum(mps, spec.order_pairs);
  if (spec.energy) s.energy = mps_energy(mps, model, c);
  for (std::size_t cut : spec.entropy_cuts) s.entropy.push_back(mps_entropy(mps, cut));
  if (spec.per_atom_n) s.n = mps_expectation_n(mps);
  return s;
}

}  // namespace

void tebd_step(MPSState& mps, const TebdModel& model, Controls c, double dt, const TebdOptions& opts) {
  if (mps.size() != model.n_atoms()) throw std::invalid_argument("tebd: MPS and model sizes differ");
  trotter_step(mps, model, c, dt, opts.chi_max, opts.cutoff, false);
}

MpsEvolutionResult tebd_evolve(const MPSState& initial, const TebdModel& model, const ControlSource& controls,
                               const TebdOptions& opts, const ObservableSpec& spec) {
  if (spec.checkpoint_stride > 0) throw std::invalid_argument("tebd_evolve: checkpoints need the dense engine");
  const std::vector<StepPlan> plan = plan_steps(controls, opts.n_steps);
  const std::size_t stride = std::max<std::size_t>(1, spec.stride);
  MpsEvolutionResult out{Trajectory{}, initial};
  out.trajectory.entropy_cuts = spec.entropy_cuts;
  out.trajectory.mps_columns = true;
  out.trajectory.samples.push_back(record(out.final_state, model, controls.sample(0.0), 0.0, spec));
  for (std::size_t k = 0; k < plan.size(); ++k) {
    tebd_step(out.final_state, model, controls.sample(plan[k].t0 + 0.5 * plan[k].dt), plan[k].dt, opts);
    const std::size_t step = k + 1;
    const bool last = step == plan.size();
    if (step % stride == 0 || last) {
      const double t = last ? controls.duration() : plan[k].t0 + plan[k].dt;
      out.trajectory.samples.push_back(record(out.final_state, model, controls.sample(t), t, spec));
    }
  }
  return out;
}

namespace {

void advance_linear(MPSState& mps, const TebdModel& model, double omega, double d0, double d1, double len, double dt,
                    const TebdOptions& opts) {
  if (len <= 0.0) return;
  const auto m = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / dt - 1e-9)));
  const double h = len / static_cast<double>(m);
  for (std::size_t s = 0; s < m; ++s) {
    const double f = (static_cast<double>(s) + 0.5) / static_cast<double>(m);
    tebd_step(mps, model, {omega, d0 + (d1 - d0) * f}, h, opts);
  }
}

}  // namespace

std::vector<MPSState> mps_quench_scan(const MPSState& initial, const TebdModel& model, const SqsParams& base,
                                      const std::vector<double>& tq_grid, const TebdOptions& opts, unsigned threads) {
  for (std::size_t i = 0; i < tq_grid.size(); ++i) {
    if (tq_grid[i] < 0.0 || (i > 0 && tq_grid[i] <= tq_grid[i - 1])) {
      throw std::invalid_argument("quench-duration grid must be non-negative and strictly increasing");
    }
  }
  sweep_quench_sweep(base);
  const double omega = 1.0;
  const double dt = std::abs(base.delta_end - base.delta_start) / base.rate /
                    static_cast<double>(std::max<std::size_t>(1, opts.n_steps));
  MPSState mps = initial;
  advance_linear(mps, model, omega, base.delta_start, base.delta_i,
                 std::abs(base.delta_i - base.delta_start) / base.rate, dt, opts);
  std::vector<MPSState> held;
  double t_prev = 0.0;
  for (double tq : tq_grid) {
    advance_linear(mps, model, omega, base.delta_q, base.delta_q, tq - t_prev, dt, opts);
    held.push_back(mps);
    t_prev = tq;
  }
  const double resume = base.resume_at_quench ? base.delta_q : base.delta_i;
  parallel_for(held.size(), threads, [&](std::size_t i) {
    advance_linear(held[i], model, omega, resume, base.delta_end, std::abs(base.delta_end - resume) / base.rate, dt,
                   opts);
  });
  return held;
}

// ------------------------------------------------------------ observables

std::vector<double> mps_expectation_n(const MPSState& mps) {
  MPSState w = mps;
  w.move_center(0);
  std::vector<double> n(w.size());
  for (std::size_t p = 0; p < w.size(); ++p) {
    if (p > 0) w.move_center(p);
    const RowMatrixXcd& a = w.site(p);
    n[p] = slice(a, 1).squaredNorm() / a.squaredNorm();
  }
  return n;
}

double mps_probability(const MPSState& mps, const AtomSet& config) {
  const double nrm = mps.norm();
  return std::norm(amplitude(mps, config)) / (nrm * nrm);
}

double mps_correlation_sum(const MPSState& mps, const std::vector<std::pair<std::size_t, std::size_t>>& pairs) {
  const std::vector<double> n = mps_expectation_n(mps);
  MPSState w = mps;
  double sum = 0.0;
  for (auto [i, j] : pairs) {
    if (i > j) std::swap(i, j);
    if (j >= w.size()) throw std::out_of_range("mps_correlation_sum: atom index outside the chain");
    w.move_center(i);
    const double nrm2 = w.site(i).squaredNorm();
    double nn = 0.0;
    if (i == j) {
      nn = n[i];
    } else {
      const auto a1 = slice(w.site(i), 1);
      Eigen::MatrixXcd env = a1.adjoint() * a1;
      for (std::size_t q = i + 1; q < j; ++q) {
        const auto s0 = slice(w.site(q), 0);
        const auto s1 = slice(w.site(q), 1);
        env = (s0.adjoint() * env * s0 + s1.adjoint() * env * s1).eval();
      }
      const auto b1 = slice(w.site(j), 1);
      nn = (b1.adjoint() * env * b1).trace().real() / nrm2;
    }
    sum += nn - n[i] * n[j];
  }
  return sum;
}

double mps_entropy(const MPSState& mps, std::size_t bond) {
  if (bond == 0 || bond >= mps.size()) throw std::out_of_range("mps_entropy: bond outside [1, size - 1]");
  MPSState w = mps;
  w.move_center(bond - 1);
  Eigen::BDCSVD<Eigen::MatrixXcd> svd{Eigen::MatrixXcd(w.site(bond - 1))};
  return entropy_from_weights(svd.singularValues());
}

double mps_energy(const MPSState& mps, const TebdModel& model, Controls c) {
  MPSState w = mps;
  double e = 0.0;
  for (const auto& b : model.blocks()) {
    w.move_center(b.first);
    const RowMatrixXcd theta = MpsKernel::contract(w, b.first, b.width);
    const Eigen::MatrixXcd h = b.at(c.omega, c.delta).cast<cplx>();
    const Index dim = Index{1} << b.width;
    const Index dr = theta.cols();
    for (Index l = 0; l < theta.rows() / dim; ++l) {
      const Eigen::Map<const RowMatrixXcd> blk(theta.data() + l * dim * dr, dim, dr);
      e += (blk.adjoint() * h * blk).trace().real();
    }
  }
  const double nrm = mps.norm();
  return e / (nrm * nrm);
}

ShotSet mps_sample(const MPSState& mps, std::size_t shots, std::uint64_t seed, std::string array_hash) {
  MPSState w = mps;
  w.move_center(0);
  std::vector<AtomSet> out(shots);
  for (std::size_t i = 0; i < shots; ++i) {
    Stream rng(seed, i);
    Eigen::RowVectorXcd v = Eigen::RowVectorXcd::Ones(1);
    AtomSet config;
    for (std::size_t p = 0; p < w.size(); ++p) {
      const Eigen::RowVectorXcd v0 = v * slice(w.site(p), 0);
      const Eigen::RowVectorXcd v1 = v * slice(w.site(p), 1);
      const double p0 = v0.squaredNorm();
      const double p1 = v1.squaredNorm();
      if (rng.uniform() * (p0 + p1) < p0) {
        v = v0 / std::sqrt(p0);
      } else {
        config.set(p);
        v = v1 / std::sqrt(p1);
      }
    }
    out[i] = config;
  }
  return ShotSet(w.size(), std::move(out), seed, Provenance::raw, std::move(array_hash));
}

MPSState imaginary_time_ground(const TebdModel& model, Controls c, const ImaginaryTimeOptions& opts) {
  if (opts.taus.empty()) throw std::invalid_argument("imaginary_time_ground: no step sizes given");
  MPSState mps = MPSState::product(model.n_atoms(), AtomSet{});
  double e_prev = mps_energy(mps, model, c);
  bool settled = false;
  for (double tau : opts.taus) {
    settled = false;
    for (std::size_t s = 0; s < opts.max_steps_per_tau; ++s) {
      trotter_step(mps, model, c, tau, opts.chi_max, opts.cutoff, true);
      const double e = mps_energy(mps, model, c);
      const double change = std::abs(e - e_prev);
      e_prev = e;
      if (change < opts.tol) {
        settled = true;
        break;
      }
    }
  }
  if (!settled) throw NumericError("imaginary_time_ground: energy did not settle within the step budget");
  // Projection discards weight by design; the result starts a fresh record.
  MpsKernel::reset_kept(mps);
  return mps;
}

}  // namespace sqs

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

#include "sqs/spectra.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace sqs {
namespace {

void fix_sign(Eigen::Ref<Eigen::VectorXd> x) {
  Eigen::Index arg = 0;
  double best = -1.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (std::abs(x(i)) > best * (1.0 + 1e-12)) {
      best = std::abs(x(i));
      arg = i;
    }
  }
  if (x(arg) < 0.0) x = -x;
}

Eigen::VectorXd apply(const HamiltonianOperator& h, const Eigen::VectorXd& x) {
  Eigen::VectorXd y(x.size());
  h.apply(std::span<const double>(x.data(), static_cast<std::size_t>(x.size())),
          std::span<double>(y.data(), static_cast<std::size_t>(y.size())));
  return y;
}

EigenPairs sorted_pairs(std::vector<double> energies, const Eigen::MatrixXd& vectors, int k) {
  std::vector<int> order(energies.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return energies[static_cast<std::size_t>(a)] < energies[static_cast<std::size_t>(b)];
  });
  EigenPairs out;
  out.vectors.resize(vectors.rows(), k);
  for (int j = 0; j < k; ++j) {
    out.energies.push_back(energies[static_cast<std::size_t>(order[static_cast<std::size_t>(j)])]);
    out.vectors.col(j) = vectors.col(order[static_cast<std::size_t>(j)]);
    fix_sign(out.vectors.col(j));
  }
  return out;
}

EigenPairs dense_eigs(const HamiltonianOperator& h, int k) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h.to_dense());
  if (es.info() != Eigen::Success) throw NumericError("dense eigensolver failed");
  std::vector<double> e(es.eigenvalues().data(), es.eigenvalues().data() + k);
  return sorted_pairs(std::move(e), es.eigenvectors().leftCols(k), k);
}

struct Cycle {
  std::vector<double> theta;  // lowest `want` Ritz values, ascending
  Eigen::MatrixXd ritz;       // matching Ritz vectors
};

// One Lanczos cycle in the complement of `locked`, full reorthogonalization.
Cycle lanczos_cycle(const HamiltonianOperator& h, Eigen::VectorXd start, const Eigen::MatrixXd& locked, int want,
                    const EigenOptions& opts) {
  const auto n = static_cast<Eigen::Index>(h.dim());
  auto project = [&](Eigen::VectorXd& w) {
    if (locked.cols() > 0) w -= locked * (locked.transpose() * w);
  };
  project(start);
  project(start);
  if (start.norm() < 1e-300) throw NumericError("lanczos: start vector lies in the locked subspace");
  const int m_max = static_cast<int>(std::min<Eigen::Index>(opts.max_subspace, n - locked.cols()));
  Eigen::MatrixXd v(n, m_max);
  v.col(0) = start / start.norm();
  std::vector<double> alpha;
  std::vector<double> beta;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  int m = 0;
  for (int j = 0; j < m_max; ++j) {
    Eigen::VectorXd w = apply(h, v.col(j));
    alpha.push_back(v.col(j).dot(w));
    for (int pass = 0; pass < 2; ++pass) {
      w -= v.leftCols(j + 1) * (v.leftCols(j + 1).transpose() * w);
      project(w);
    }
    const double b = w.norm();
    m = j + 1;
    const bool exhausted = b < 1e-12 * std::max(1.0, std::abs(alpha.back())) || m == m_max;
    if (m >= want && (m % 10 == 0 || exhausted)) {
      Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
      for (int i = 0; i < m; ++i) {
        t(i, i) = alpha[static_cast<std::size_t>(i)];
        if (i + 1 < m) t(i, i + 1) = t(i + 1, i) = beta[static_cast<std::size_t>(i)];
      }
      es.compute(t);
      bool converged = true;
      for (int i = 0; i < want; ++i) {
        if (b * std::abs(es.eigenvectors()(m - 1, i)) > 0.1 * opts.residual_tol) converged = false;
      }
      if (converged || exhausted) break;
    }
    beta.push_back(b);
    v.col(j + 1) = w / b;
  }
  Cycle c;
  const int got = std::min(want, m);
  for (int i = 0; i < got; ++i) c.theta.push_back(es.eigenvalues()(i));
  c.ritz = v.leftCols(m) * es.eigenvectors().leftCols(got);
  return c;
}

class LowEigs {
 public:
  LowEigs(const HamiltonianOperator& h, int k, const EigenOptions& opts)
      : h_(h), k_(k), opts_(opts), locked_(static_cast<Eigen::Index>(h.dim()), 0) {}

  EigenPairs run() {
    Eigen::VectorXd start = random_vector(0);
    int cycles = 0;
    while (static_cast<int>(energies_.size()) < k_) {
      if (cycles++ > opts_.max_restarts) throw NumericError("lanczos: no convergence within the restart budget");
      const int want = k_ - static_cast<int>(energies_.size());
      Cycle c = lanczos_cycle(h_, start, locked_, want, opts_);
      Eigen::VectorXd next = Eigen::VectorXd::Zero(locked_.rows());
      for (int i = 0; i < static_cast<int>(c.theta.size()); ++i) {
        if (!try_lock(c.ritz.col(i))) next += c.ritz.col(i);
      }
      start = next.norm() > 0.0 ? next : random_vector(static_cast<std::uint64_t>(cycles));
    }
    if (opts_.deflation_check) deflate(cycles);
    return sorted_pairs(energies_, locked_, k_);
  }

 private:
  Eigen::VectorXd random_vector(std::uint64_t index) const {
    Stream rng(opts_.seed, index);
    Eigen::VectorXd x(locked_.rows());
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = rng.uniform() - 0.5;
    return x;
  }

  bool try_lock(Eigen::VectorXd x) {
    if (locked_.cols() > 0) x -= locked_ * (locked_.transpose() * x);
    x.normalize();
    const Eigen::VectorXd hx = apply(h_, x);
    const double e = x.dot(hx);
    if ((hx - e * x).norm() >= opts_.residual_tol) return false;
    locked_.conservativeResize(Eigen::NoChange, locked_.cols() + 1);
    locked_.col(locked_.cols() - 1) = x;
    energies_.push_back(e);
    return true;
  }

  // A single Krylov space sees one vector per distinct eigenvalue, so an
  // exactly degenerate partner of a locked state is searched for explicitly.
  void deflate(int& cycles) {
    Eigen::VectorXd start = random_vector(0x9e3779b9ULL);
    while (true) {
      if (static_cast<std::size_t>(locked_.cols()) >= h_.dim()) return;
      if (cycles++ > opts_.max_restarts + 2) throw NumericError("lanczos: deflation check did not converge");
      Cycle c = lanczos_cycle(h_, start, locked_, 1, opts_);
      if (c.theta.empty()) return;
      const double top = *std::max_element(energies_.begin(), energies_.end());
      const double slack = opts_.residual_tol * std::max(1.0, std::abs(top));
      if (c.theta[0] >= top - slack) return;
      if (!try_lock(c.ritz.col(0))) {
        start = c.ritz.col(0);
        continue;
      }
      // Drop the highest state to keep k pairs.
      const auto worst =
          static_cast<Eigen::Index>(std::max_element(energies_.begin(), energies_.end()) - energies_.begin());
      const Eigen::Index last = locked_.cols() - 1;
      locked_.col(worst) = locked_.col(last);
      energies_[static_cast<std::size_t>(worst)] = energies_[static_cast<std::size_t>(last)];
      locked_.conservativeResize(Eigen::NoChange, last);
      energies_.pop_back();
      start = random_vector(0x9e3779b9ULL + static_cast<std::uint64_t>(cycles));
    }
  }

  const HamiltonianOperator& h_;
  int k_;
  EigenOptions opts_;
  Eigen::MatrixXd locked_;
  std::vector<double> energies_;
};

}  // namespace

EigenPairs low_eigs(const HamiltonianOperator& h, int k, const EigenOptions& opts) {
  if (k < 1) throw std::invalid_argument("low_eigs: k must be >= 1");
  if (static_cast<std::size_t>(k) > h.dim()) throw std::invalid_argument("low_eigs: k exceeds the dimension");
  if (h.dim() <= opts.dense_threshold) return dense_eigs(h, k);
  return LowEigs(h, k, opts).run();
}

double residual(const HamiltonianOperator& h, const EigenPairs& pairs, int j) {
  const Eigen::VectorXd x = pairs.vectors.col(j);
  return (apply(h, x) - pairs.energies[static_cast<std::size_t>(j)] * x).norm();
}

// ------------------------------------------------------------------ scans

namespace {

double weight(const BasisSet& basis, const Eigen::VectorXd& x, const std::vector<Config>& configs) {
  double p = 0.0;
  for (Config c : configs) {
    if (auto idx = basis.index_of(c)) p += x(static_cast<Eigen::Index>(*idx)) * x(static_cast<Eigen::Index>(*idx));
  }
  return p;
}

}  // namespace

SpectrumScan ground_scan(const AtomArray& array, const HamiltonianOperator& family, std::span<const double> deltas,
                         int k, const ObservableSpec& targets, const EigenOptions& opts, unsigned threads) {
  SpectrumScan scan;
  scan.k = k;
  scan.points.resize(deltas.size());
  parallel_for(deltas.size(), threads, [&](std::size_t g) {
    const HamiltonianOperator h = family.at(family.omega(), deltas[g]);
    const EigenPairs eig = low_eigs(h, k, opts);
    SpectrumPoint& pt = scan.points[g];
    pt.delta = deltas[g];
    pt.energies = eig.energies;
    for (int j = 0; j < k; ++j) {
      const Eigen::VectorXd x = eig.vectors.col(j);
      pt.overlap_mis.push_back(weight(h.basis(), x, targets.mis_configs));
      pt.overlap_zigzag.push_back(weight(h.basis(), x, targets.zigzag_configs));
    }
    const DenseState ground{h.basis_ptr(), eig.vectors.col(0).cast<cplx>()};
    const std::vector<double> n = expectation_n(ground);
    pt.n_total = std::accumulate(n.begin(), n.end(), 0.0);
    pt.n_site = array.is_chain() ? site_occupations(array, n) : n;
    pt.p_mis = pt.overlap_mis[0];
    if (!targets.order_pairs.empty()) {
      pt.order = targets.order_prefactor * connected_correlation_sum(ground, targets.order_pairs);
    }
  });
  return scan;
}

void write_spectrum_csv(std::ostream& os, const SpectrumScan& scan) {
  os << "delta";
  for (int j = 0; j < scan.k; ++j) os << ",E" << j;
  for (int j = 0; j < scan.k; ++j) os << ",ovl_mis_" << j;
  for (int j = 0; j < scan.k; ++j) os << ",ovl_zz_" << j;
  os << ",n_total,P_mis,O\n";
  for (const SpectrumPoint& p : scan.points) {
    os << fmt17(p.delta);
    for (double e : p.energies) os << ',' << fmt17(e);
    for (double o : p.overlap_mis) os << ',' << fmt17(o);
    for (double o : p.overlap_zigzag) os << ',' << fmt17(o);
    os << ',' << fmt17(p.n_total) << ',' << fmt17(p.p_mis) << ',' << fmt17(p.order) << '\n';
  }
}

nlohmann::json to_json(const SpectrumScan& scan) {
  nlohmann::json pts = nlohmann::json::array();
  for (const SpectrumPoint& p : scan.points) {
    pts.push_back({{"delta", p.delta},
                   {"energies", p.energies},
                   {"overlap_mis", p.overlap_mis},
                   {"overlap_zigzag", p.overlap_zigzag},
                   {"n_total", p.n_total},
                   {"n_site", p.n_site},
                   {"p_mis", p.p_mis},
                   {"order", p.order}});
  }
  return {{"k", scan.k}, {"points", std::move(pts)}};
}

GapMinimum min_gap(const HamiltonianOperator& family, double lo, double hi, const MinGapOptions& opts) {
  if (!(hi > lo)) throw std::invalid_argument("min_gap: empty window");
  if (opts.coarse_points < 3) throw std::invalid_argument("min_gap: need at least three coarse points");
  if (family.dim() < 2) throw std::invalid_argument("min_gap: a gap needs two levels");
  auto gap = [&](double d) {
    const EigenPairs e = low_eigs(family.at(family.omega(), d), 2, opts.eig);
    return e.energies[1] - e.energies[0];
  };
  GapMinimum out;
  const int n = opts.coarse_points;
  std::size_t arg = 0;
  for (int i = 0; i < n; ++i) {
    const double d = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
    out.coarse.emplace_back(d, gap(d));
    if (out.coarse.back().second < out.coarse[arg].second) arg = static_cast<std::size_t>(i);
  }
  if (arg == 0 || arg + 1 == out.coarse.size()) {
    throw std::domain_error("min_gap: the coarse minimum lies on the window boundary");
  }
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = out.coarse[arg - 1].first;
  double b = out.coarse[arg + 1].first;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = gap(x1);
  double f2 = gap(x2);
  while (b - a > opts.resolution) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = gap(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = gap(x2);
    }
  }
  if (f1 < f2) {
    out.delta = x1;
    out.gap = f1;
  } else {
    out.delta = x2;
    out.gap = f2;
  }
  if (out.coarse[arg].second < out.gap) {
    out.delta = out.coarse[arg].first;
    out.gap = out.coarse[arg].second;
  }
  return out;
}

std::vector<OverlapRow> instantaneous_overlaps(std::span<const Checkpoint> checkpoints,
                                               const HamiltonianOperator& family, int k, const EigenOptions& opts) {
  if (checkpoints.empty()) throw std::invalid_argument("instantaneous_overlaps: no checkpoints recorded");
  std::vector<OverlapRow> rows;
  for (const Checkpoint& cp : checkpoints) {
    if (static_cast<std::size_t>(cp.amplitudes.size()) != family.dim()) {
      throw std::invalid_argument("instantaneous_overlaps: checkpoint dimension mismatch");
    }
    const EigenPairs eig = low_eigs(family.at(cp.controls.omega, cp.controls.delta), k, opts);
    OverlapRow row{cp.t, cp.controls.delta, eig.energies, {}, 0.0};
    for (int j = 0; j < k; ++j) {
      const double p = std::norm(eig.vectors.col(j).cast<cplx>().dot(cp.amplitudes));
      row.overlaps.push_back(p);
      row.captured += p;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::uint64_t count_independent_sets(const BlockadeGraph& graph, const AtomSet& subset, std::size_t max_states) {
  std::vector<std::size_t> order;
  subset.for_each([&](std::size_t v) {
    if (v >= graph.n_vertices) throw std::out_of_range("count_independent_sets: vertex outside the graph");
    order.push_back(v);
  });
  // A chosen vertex stays in the frontier until its last neighbour is decided.
  std::vector<std::size_t> last(graph.n_vertices, 0);
  for (std::size_t v : order) {
    last[v] = v;
    (graph.neighbors[v] & subset).for_each([&](std::size_t u) { last[v] = std::max(last[v], u); });
  }
  std::map<AtomSet, std::uint64_t> states{{AtomSet{}, 1}};
  for (std::size_t v : order) {
    std::map<AtomSet, std::uint64_t> next;
    auto add = [&](AtomSet s, std::uint64_t c) {
      AtomSet kept;
      s.for_each([&](std::size_t u) {
        if (last[u] > v) kept.set(u);
      });
      std::uint64_t& slot = next[kept];
      if (__builtin_add_overflow(slot, c, &slot)) throw BudgetError("count_independent_sets: count overflows 64 bits");
    };
    for (const auto& [s, c] : states) {
      add(s, c);
      if ((graph.neighbors[v] & s).none()) {
        AtomSet with = s;
        with.set(v);
        add(with, c);
      }
    }
    if (next.size() > max_states) throw BudgetError("count_independent_sets: frontier exceeds the state budget");
    states = std::move(next);
  }
  std::uint64_t total = 0;
  for (const auto& [s, c] : states) {
    if (__builtin_add_overflow(total, c, &total)) throw BudgetError("count_independent_sets: count overflows 64 bits");
  }
  return total;
}

std::uint64_t count_independent_sets(const BlockadeGraph& graph) {
  AtomSet all;
  for (std::size_t v = 0; v < graph.n_vertices; ++v) all.set(v);
  return count_independent_sets(graph, all);
}

}  // namespace sqs

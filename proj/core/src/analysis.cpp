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

#include "sqs/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "sqs/spectra.hpp"

namespace sqs {

namespace {

double order_prefactor(int L) {
  if (L < 9) throw std::invalid_argument("order parameter needs L >= 9 (no bulk diagonal pairs)");
  return 4.0 / static_cast<double>(L - 7);
}

}  // namespace

double order_parameter(const DenseState& state, int L) {
  const double f = order_prefactor(L);
  return f * connected_correlation_sum(state, zigzag_correlation_pairs(L));
}

double order_parameter(const ShotSet& shots, int L) {
  const double f = order_prefactor(L);
  const auto pairs = zigzag_correlation_pairs(L);
  return f * connected_correlation_sum(shots, pairs);
}

double order_parameter(const MPSState& mps, int L) {
  const double f = order_prefactor(L);
  return f * mps_correlation_sum(mps, zigzag_correlation_pairs(L));
}

double entropy_upper_bound(const BlockadeGraph& graph, std::size_t n_left) {
  if (n_left == 0 || n_left >= graph.n_vertices) throw std::out_of_range("entropy bound: cut must split the atoms");
  AtomSet left;
  AtomSet right;
  for (std::size_t v = 0; v < graph.n_vertices; ++v) (v < n_left ? left : right).set(v);
  const auto dl = count_independent_sets(graph, left);
  const auto dr = count_independent_sets(graph, right);
  return std::log(static_cast<double>(std::min(dl, dr)));
}

double entropy_upper_bound(const AtomArray& array, const BlockadeGraph& graph, int site) {
  return entropy_upper_bound(graph, chain_cut(array, site));
}

ScalingFit scaling_fit(std::span<const double> sizes, std::span<const double> probs, std::span<const double> errors,
                       double n0) {
  if (sizes.size() != probs.size() || (!errors.empty() && errors.size() != probs.size())) {
    throw std::invalid_argument("scaling_fit: column lengths differ");
  }
  for (std::size_t i = 1; i < sizes.size(); ++i) {
    if (!(sizes[i] > sizes[i - 1])) throw std::invalid_argument("scaling_fit: sizes must be strictly increasing");
  }
  const bool weighted = std::any_of(errors.begin(), errors.end(), [](double e) { return e != 0.0; });
  if (weighted && std::any_of(errors.begin(), errors.end(), [](double e) { return !(e > 0.0); })) {
    throw std::invalid_argument("scaling_fit: errors must be all positive or all zero");
  }
  ScalingFit fit;
  fit.n0 = n0;
  std::vector<double> x, y, w;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (probs[i] < 0.0 || !std::isfinite(probs[i])) throw std::invalid_argument("scaling_fit: negative probability");
    if (probs[i] == 0.0) {
      fit.excluded_sizes.push_back(sizes[i]);
      continue;
    }
    fit.sizes.push_back(sizes[i]);
    fit.probabilities.push_back(probs[i]);
    double weight = 1.0;
    if (!errors.empty()) fit.errors.push_back(errors[i]);
    if (weighted) weight = std::pow(probs[i] / errors[i], 2);
    x.push_back(sizes[i] - n0);
    y.push_back(std::log(probs[i]));
    w.push_back(weight);
  }
  if (x.size() < 2) throw std::invalid_argument("scaling_fit: need at least two positive probabilities");
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sw += w[i];
    sx += w[i] * x[i];
    sy += w[i] * y[i];
  }
  const double mx = sx / sw;
  const double my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += w[i] * (x[i] - mx) * (x[i] - mx);
    sxy += w[i] * (x[i] - mx) * (y[i] - my);
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  fit.b = std::exp(slope);
  fit.p = std::exp(intercept);
  fit.p_at_zero = std::exp(intercept - slope * n0);
  for (std::size_t i = 0; i < x.size(); ++i) fit.residuals.push_back(y[i] - (intercept + slope * x[i]));
  for (std::size_t i = 1; i < x.size(); ++i) fit.local_slopes.push_back((y[i] - y[i - 1]) / (x[i] - x[i - 1]));
  return fit;
}

std::optional<std::size_t> find_first_revival(std::span<const double> p) {
  for (std::size_t i = 1; i + 1 < p.size(); ++i) {
    if (p[i] > p[i - 1] && p[i] >= p[i + 1] && p[i] > p[0]) return i;
  }
  return std::nullopt;
}

QuenchScan quench_scan_summary(std::span<const double> tq, std::span<const double> p, std::span<const double> errors) {
  if (tq.size() != p.size() || (!errors.empty() && errors.size() != p.size())) {
    throw std::invalid_argument("quench_scan_summary: column lengths differ");
  }
  if (tq.empty()) throw std::invalid_argument("quench_scan_summary: empty scan");
  for (std::size_t i = 1; i < tq.size(); ++i) {
    if (!(tq[i] > tq[i - 1])) throw std::invalid_argument("quench_scan_summary: grid must be strictly increasing");
  }
  QuenchScan s;
  s.tq.assign(tq.begin(), tq.end());
  s.p.assign(p.begin(), p.end());
  s.errors.assign(errors.begin(), errors.end());
  s.argmax = static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
  s.first_revival = find_first_revival(p);
  if (!s.first_revival) throw std::domain_error("quench_scan_summary: no local maximum above the baseline");
  return s;
}

nlohmann::json to_json(const ScalingFit& fit) {
  return {{"sizes", fit.sizes},
          {"probabilities", fit.probabilities},
          {"errors", fit.errors},
          {"excluded_sizes", fit.excluded_sizes},
          {"b", fit.b},
          {"shifted", {{"n0", fit.n0}, {"p", fit.p}, {"form", "p * b^(N - n0)"}}},
          {"unshifted", {{"p", fit.p_at_zero}, {"form", "p * b^N"}}},
          {"residuals", fit.residuals},
          {"local_slopes", fit.local_slopes}};
}

nlohmann::json to_json(const QuenchScan& scan) {
  nlohmann::json j{{"tq", scan.tq}, {"p_mis", scan.p}, {"errors", scan.errors}, {"argmax_tq", scan.best_tq()}};
  j["first_revival_tq"] = scan.first_revival ? nlohmann::json(scan.first_revival_time()) : nlohmann::json(nullptr);
  return j;
}

FitTable read_fit_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("fit CSV is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      cell.erase(0, cell.find_first_not_of(" \t\r"));
      cell.erase(cell.find_last_not_of(" \t\r") + 1);
      header.push_back(cell);
    }
  }
  auto column = [&](const std::string& name) -> std::optional<std::size_t> {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) return std::nullopt;
    return static_cast<std::size_t>(it - header.begin());
  };
  const auto cn = column("N");
  const auto cp = column("P");
  const auto ce = column("err");
  if (!cn || !cp) throw std::invalid_argument("fit CSV needs columns N and P");
  FitTable t;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        cells.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::invalid_argument("fit CSV line " + std::to_string(lineno) + ": not a number: '" + cell + "'");
      }
    }
    if (cells.size() != header.size()) {
      throw std::invalid_argument("fit CSV line " + std::to_string(lineno) + ": wrong number of columns");
    }
    t.sizes.push_back(cells[*cn]);
    t.probabilities.push_back(cells[*cp]);
    if (ce) t.errors.push_back(cells[*ce]);
  }
  return t;
}

}  // namespace sqs

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

#include "commands.hpp"

#include <cmath>
#include <fstream>
#include <iterator>
#include <memory>
#include <optional>
#include <sstream>

#include "sqs/analysis.hpp"
#include "sqs/dyn_dense.hpp"
#include "sqs/dyn_mps.hpp"
#include "sqs/geometry.hpp"
#include "sqs/measure.hpp"
#include "sqs/model.hpp"
#include "sqs/schedule.hpp"
#include "sqs/spectra.hpp"

namespace sqs::cli {

namespace fs = std::filesystem;
using nlohmann::json;

OutputSink::OutputSink(fs::path dir) : dir_(std::move(dir)) { fs::create_directories(dir_); }

void OutputSink::write(const std::string& name, const std::string& content) {
  std::ofstream os(path(name), std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path(name).string());
  os << content;
  if (!os) throw ConfigError("write failed for " + path(name).string());
  os.close();
  entries_.push_back({{"file", name}, {"bytes", content.size()}, {"fnv1a", fnv1a_hex(content)}});
}

void OutputSink::record(const std::string& name) {
  std::ifstream is(path(name), std::ios::binary);
  if (!is) throw ConfigError("expected output " + path(name).string() + " is missing");
  const std::string content{std::istreambuf_iterator<char>(is), std::istreambuf_iterator<char>()};
  entries_.push_back({{"file", name}, {"bytes", content.size()}, {"fnv1a", fnv1a_hex(content)}});
}

namespace {

// ------------------------------------------------------------ config access

double num(const json& cfg, const char* section, const char* key) { return cfg.at(section).at(key).get<double>(); }

std::size_t count(const json& cfg, const char* section, const char* key, std::size_t min = 0) {
  const double v = num(cfg, section, key);
  if (v < static_cast<double>(min)) {
    throw ConfigError(std::string("[") + section + "] " + key + " must be >= " + std::to_string(min));
  }
  return static_cast<std::size_t>(v);
}

std::string str(const json& cfg, const char* section, const char* key) {
  const json& v = cfg.at(section).at(key);
  if (v.is_null()) throw ConfigError(std::string("[") + section + "] " + key + " is required here");
  return v.get<std::string>();
}

bool has(const json& cfg, const char* section, const char* key) { return !cfg.at(section).at(key).is_null(); }

template <class T>
T choose(const std::string& value, const char* what, std::initializer_list<std::pair<const char*, T>> options) {
  for (const auto& [name, v] : options) {
    if (value == name) return v;
  }
  std::string allowed;
  for (const auto& [name, v] : options) allowed += std::string(allowed.empty() ? "" : " | ") + name;
  throw ConfigError(std::string(what) + ": '" + value + "' is not one of " + allowed);
}

// Length of the time unit 2pi/Omega in microseconds, when [units] is set.
std::optional<double> time_unit_us(const json& cfg) {
  const bool has_omega = has(cfg, "units", "omega");
  const bool has_unit = has(cfg, "units", "omega_unit");
  if (!has_omega && !has_unit) return std::nullopt;
  if (!has_omega || !has_unit) throw ConfigError("[units] needs both omega and omega_unit");
  const double omega = num(cfg, "units", "omega");
  if (!(omega > 0.0)) throw ConfigError("[units] omega must be positive");
  const auto unit = str(cfg, "units", "omega_unit");
  // rad_per_us: Omega is an angular frequency. cycles_per_us: Omega / 2pi is given.
  const double cycles =
      choose<double>(unit, "[units] omega_unit", {{"rad_per_us", 1.0 / kTwoPi}, {"cycles_per_us", 1.0}});
  return 1.0 / (omega * cycles);
}

// Reduced time from either the plain key or its `_ns` twin.
double reduced_time(const json& cfg, const char* key, const char* ns_key) {
  if (!has(cfg, "schedule", ns_key)) return num(cfg, "schedule", key);
  const auto unit = time_unit_us(cfg);
  if (!unit) throw ConfigError(std::string("[schedule] ") + ns_key + " needs [units] omega and omega_unit");
  return num(cfg, "schedule", ns_key) * 1e-3 / *unit;
}

// --------------------------------------------------------------- experiment

AtomArray build_array(const json& cfg, std::optional<int> L_override = std::nullopt) {
  const auto builder = str(cfg, "geometry", "builder");
  const int L = L_override ? *L_override : static_cast<int>(num(cfg, "geometry", "L"));
  const double s = num(cfg, "geometry", "s");
  if (builder == "doublet_chain") {
    if (has(cfg, "geometry", "s_x") != has(cfg, "geometry", "s_y")) {
      throw ConfigError("[geometry] s_x and s_y must be given together");
    }
    if (has(cfg, "geometry", "s_x"))
      return build_doublet_chain(L, num(cfg, "geometry", "s_x"), num(cfg, "geometry", "s_y"));
    return build_doublet_chain(L, s);
  }
  if (L_override) throw ConfigError("size scans need a chain builder");
  if (builder == "grid_2d") {
    return build_2d_doublet_grid(static_cast<int>(num(cfg, "geometry", "rows")),
                                 static_cast<int>(num(cfg, "geometry", "cols")), num(cfg, "geometry", "a"),
                                 num(cfg, "geometry", "d"));
  }
  if (builder == "zigzag_chain") return build_zigzag_chain(L, s, num(cfg, "geometry", "offset"));
  if (builder == "enhanced_rabi_chain") return build_enhanced_rabi_chain(L, s, num(cfg, "geometry", "k"));
  if (builder == "file") {
    const std::string path = str(cfg, "geometry", "path");
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open geometry file " + path);
    json j;
    try {
      is >> j;
    } catch (const json::exception& e) {
      throw ConfigError("geometry file " + path + ": " + e.what());
    }
    return atom_array_from_json(j);
  }
  throw ConfigError("[geometry] builder '" + builder +
                    "' is not one of doublet_chain | grid_2d | zigzag_chain | enhanced_rabi_chain | file");
}

struct Experiment {
  AtomArray array;
  Calibration cal;
  BlockadeGraph graph;
  Eigen::MatrixXd interactions;
  Constraint constraint;
};

Experiment build_experiment(const json& cfg, std::optional<int> L_override = std::nullopt) {
  AtomArray array = build_array(cfg, L_override);
  const Calibration cal = has(cfg, "interaction", "c6") ? Calibration{num(cfg, "interaction", "c6")}
                                                        : Calibration::from_pair(num(cfg, "interaction", "v_nn"),
                                                                                 num(cfg, "interaction", "r_nn"));
  BlockadeGraph graph = blockade_graph(array, cal);
  Eigen::MatrixXd v = interaction_matrix(array, cal, parse_truncation(str(cfg, "interaction", "truncation")));
  const auto constraint = choose<Constraint>(str(cfg, "interaction", "constraint"), "[interaction] constraint",
                                             {{"blockade", Constraint::blockade}, {"full", Constraint::full}});
  return {std::move(array), cal, std::move(graph), std::move(v), constraint};
}

SqsParams sqs_params(const json& cfg) {
  SqsParams p;
  p.delta_start = num(cfg, "schedule", "delta_start");
  p.delta_end = num(cfg, "schedule", "delta_end");
  p.rate = num(cfg, "schedule", "rate");
  p.delta_i = num(cfg, "schedule", "delta_i");
  p.delta_q = num(cfg, "schedule", "delta_q");
  p.t_q = reduced_time(cfg, "t_q", "t_q_ns");
  p.resume_at_quench = cfg.at("schedule").at("resume_at_quench").get<bool>();
  return p;
}

bool has_response(const json& cfg) {
  return reduced_time(cfg, "tau", "tau_ns") > 0.0 || reduced_time(cfg, "shift", "shift_ns") > 0.0 ||
         num(cfg, "schedule", "omega_ramp") > 0.0;
}

std::unique_ptr<ControlSource> build_schedule(const json& cfg, const SqsParams& p) {
  const auto kind = str(cfg, "schedule", "kind");
  Waveform w = choose<int>(kind, "[schedule] kind", {{"sqs", 0}, {"linear", 1}}) == 0
                   ? sweep_quench_sweep(p)
                   : linear_sweep(p.delta_start, p.delta_end, p.rate);
  const double ramp = num(cfg, "schedule", "omega_ramp");
  if (ramp > 0.0) w = with_omega_ramp(w, ramp);
  const double tau = reduced_time(cfg, "tau", "tau_ns");
  const double shift = reduced_time(cfg, "shift", "shift_ns");
  if (tau > 0.0 || shift > 0.0) return std::make_unique<ResponseFilter>(std::move(w), tau, shift);
  return std::make_unique<Waveform>(std::move(w));
}

bool use_mps(const json& cfg) {
  return choose<bool>(str(cfg, "engine", "kind"), "[engine] kind", {{"dense", false}, {"mps", true}});
}

ObservableSpec observables(const json& cfg, const Experiment& ex) {
  const std::size_t stride = count(cfg, "engine", "stride", 1);
  if (ex.array.layout() == Layout::doublet_chain) {
    ObservableSpec spec = ObservableSpec::doublet_chain(ex.array, stride);
    spec.checkpoint_stride = count(cfg, "engine", "checkpoint_stride");
    return spec;
  }
  ObservableSpec spec;
  spec.stride = stride;
  spec.checkpoint_stride = count(cfg, "engine", "checkpoint_stride");
  if (ex.array.size() <= 64) {
    for (const auto& m : exact_mis(ex.graph).maximizers) spec.mis_configs.push_back(m.to_config());
  }
  if (ex.array.size() >= 2) spec.entropy_cuts.push_back(ex.array.size() / 2);
  return spec;
}

EvolveOptions dense_options(const json& cfg) {
  EvolveOptions o;
  o.n_steps = count(cfg, "engine", "n_steps", 1);
  o.method = choose<Integrator>(str(cfg, "engine", "method"), "[engine] method",
                                {{"krylov", Integrator::krylov}, {"rk4", Integrator::rk4}});
  o.krylov.tol = num(cfg, "engine", "krylov_tol");
  o.krylov.max_dim = static_cast<int>(count(cfg, "engine", "krylov_max_dim", 2));
  return o;
}

TebdOptions mps_options(const json& cfg) {
  TebdOptions o;
  o.n_steps = count(cfg, "engine", "n_steps", 1);
  o.chi_max = count(cfg, "engine", "chi_max");
  o.cutoff = num(cfg, "engine", "cutoff");
  return o;
}

InitialMode initial_mode(const json& cfg) {
  return choose<InitialMode>(str(cfg, "engine", "initial"), "[engine] initial",
                             {{"exact_ground", InitialMode::exact_ground}, {"all_ground", InitialMode::all_ground}});
}

struct DenseSetup {
  std::shared_ptr<const BasisSet> basis;
  HamiltonianOperator family;
};

DenseSetup dense_setup(const Experiment& ex, Controls c0) {
  auto basis = std::make_shared<const BasisSet>(BasisSet::enumerate(ex.graph, ex.constraint));
  auto family = HamiltonianOperator::build(ex.array, basis, ex.interactions, c0.omega, c0.delta);
  return {std::move(basis), std::move(family)};
}

TebdModel mps_model(const Experiment& ex) {
  const MpsMode mode = ex.constraint == Constraint::blockade ? MpsMode::blockade : MpsMode::soft;
  return TebdModel::build(ex.array, ex.graph, ex.interactions, mode);
}

MPSState mps_initial(const json& cfg, const TebdModel& model, Controls c0) {
  if (initial_mode(cfg) == InitialMode::all_ground) return MPSState::product(model.n_atoms(), AtomSet{});
  ImaginaryTimeOptions o;
  const std::size_t chi = count(cfg, "engine", "chi_max");
  if (chi > 0) o.chi_max = chi;
  return imaginary_time_ground(model, c0, o);
}

// Final-state summary shared by every engine.
struct Observed {
  double p_mis = 0.0;
  double p_zigzag = 0.0;
  double order = 0.0;
};

Observed observe(const DenseState& s, const ObservableSpec& spec) {
  Observed o;
  for (Config c : spec.mis_configs) o.p_mis += state_probability(s, c);
  for (Config c : spec.zigzag_configs) o.p_zigzag += state_probability(s, c);
  if (!spec.order_pairs.empty()) o.order = spec.order_prefactor * connected_correlation_sum(s, spec.order_pairs);
  return o;
}

Observed observe(const MPSState& m, const ObservableSpec& spec) {
  Observed o;
  for (Config c : spec.mis_configs) o.p_mis += mps_probability(m, AtomSet::from_config(c));
  for (Config c : spec.zigzag_configs) o.p_zigzag += mps_probability(m, AtomSet::from_config(c));
  if (!spec.order_pairs.empty()) o.order = spec.order_prefactor * mps_correlation_sum(m, spec.order_pairs);
  return o;
}

struct RunOutcome {
  Trajectory trajectory;
  std::optional<DenseState> dense;
  std::optional<MPSState> mps;
  Observed final;
};

RunOutcome run_schedule(const json& cfg, const Experiment& ex, const ControlSource& controls,
                        const ObservableSpec& spec) {
  const Controls c0 = controls.sample(0.0);
  RunOutcome out;
  if (use_mps(cfg)) {
    if (spec.checkpoint_stride > 0) throw ConfigError("[engine] checkpoint_stride needs the dense engine");
    const TebdModel model = mps_model(ex);
    auto r = tebd_evolve(mps_initial(cfg, model, c0), model, controls, mps_options(cfg), spec);
    out.final = observe(r.final_state, spec);
    out.trajectory = std::move(r.trajectory);
    out.mps = std::move(r.final_state);
  } else {
    const DenseSetup d = dense_setup(ex, c0);
    auto r = evolve(initial_state(d.family, initial_mode(cfg)), d.family, controls, dense_options(cfg), spec);
    out.final = observe(r.final_state, spec);
    out.trajectory = std::move(r.trajectory);
    out.dense = std::move(r.final_state);
  }
  return out;
}

json observed_json(const Observed& o) { return {{"p_mis", o.p_mis}, {"p_zigzag", o.p_zigzag}, {"order", o.order}}; }

std::vector<double> linspace(double lo, double hi, std::size_t n) {
  if (n < 2) throw ConfigError("a grid needs at least two points");
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  return v;
}

std::vector<double> tq_grid(const json& cfg) {
  const double lo = num(cfg, "scan", "tq_start");
  const double hi = num(cfg, "scan", "tq_stop");
  const double step = num(cfg, "scan", "tq_step");
  if (!(step > 0.0) || !(hi > lo) || lo < 0.0)
    throw ConfigError("[scan] needs 0 <= tq_start < tq_stop and tq_step > 0");
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9)) + 1;
  std::vector<double> g(n);
  // Snap to 1e-12 so grid points print as the decimals the user typed.
  for (std::size_t i = 0; i < n; ++i) g[i] = std::round((lo + step * static_cast<double>(i)) * 1e12) / 1e12;
  return g;
}

bool wants(const json& cfg, const char* format) {
  for (const auto& f : cfg.at("output").at("formats")) {
    if (!f.is_string() || (f != "csv" && f != "json"))
      throw ConfigError("[output] formats may list only \"csv\" and \"json\"");
  }
  for (const auto& f : cfg.at("output").at("formats")) {
    if (f == format) return true;
  }
  return false;
}

unsigned threads(const json& cfg) { return static_cast<unsigned>(count(cfg, "run", "threads", 1)); }
std::uint64_t seed(const json& cfg) { return static_cast<std::uint64_t>(num(cfg, "run", "seed")); }

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// ---------------------------------------------------------------- commands

void cmd_geometry(const json& cfg, OutputSink& sink, json& summary) {
  const Experiment ex = build_experiment(cfg);
  sink.write("geometry.json", dump(to_json(ex.array)));
  json edges = json::array();
  for (auto [i, j] : ex.graph.edges) edges.push_back({i, j});
  sink.write("blockade_graph.json", dump({{"n_vertices", ex.graph.n_vertices}, {"edges", edges}}));
  std::ostringstream v;
  for (Eigen::Index i = 0; i < ex.interactions.rows(); ++i) {
    for (Eigen::Index j = 0; j < ex.interactions.cols(); ++j) v << (j ? "," : "") << fmt17(ex.interactions(i, j));
    v << "\n";
  }
  sink.write("interactions.csv", v.str());
  const MisResult mis = exact_mis(ex.graph);
  summary = {{"n_atoms", ex.array.size()},
             {"n_edges", ex.graph.edges.size()},
             {"c6", ex.cal.c6},
             {"blockade_radius_um", ex.cal.blockade_radius(1.0)},
             {"mis_size", mis.size},
             {"mis_count", mis.maximizers.size()},
             {"independent_sets", count_independent_sets(ex.graph)},
             {"array_hash", ex.array.hash()}};
  sink.write("summary.json", dump(summary));
}

void cmd_groundscan(const json& cfg, OutputSink& sink, json& summary) {
  if (use_mps(cfg)) throw ConfigError("groundscan uses the constrained eigensolver; set [engine] kind = \"dense\"");
  const Experiment ex = build_experiment(cfg);
  const auto deltas = linspace(num(cfg, "spectra", "delta_start"), num(cfg, "spectra", "delta_stop"),
                               count(cfg, "spectra", "delta_points", 2));
  const DenseSetup d = dense_setup(ex, {1.0, deltas.front()});
  const int k = static_cast<int>(count(cfg, "spectra", "k", 1));
  const SpectrumScan scan = ground_scan(ex.array, d.family, deltas, k, observables(cfg, ex), {}, threads(cfg));
  if (wants(cfg, "csv")) {
    std::ostringstream os;
    write_spectrum_csv(os, scan);
    sink.write("spectrum.csv", os.str());
  }
  if (wants(cfg, "json")) sink.write("spectrum.json", dump(to_json(scan)));
  summary = {{"basis_size", d.basis->size()}, {"points", deltas.size()}};
  if (has(cfg, "spectra", "gap_lo") || has(cfg, "spectra", "gap_hi")) {
    const GapMinimum g = min_gap(d.family, num(cfg, "spectra", "gap_lo"), num(cfg, "spectra", "gap_hi"));
    json coarse = json::array();
    for (auto [x, gap] : g.coarse) coarse.push_back({x, gap});
    const json gj{{"delta_star", g.delta},
                  {"gap", g.gap},
                  {"n_atoms", ex.array.size()},
                  {"L", ex.array.num_sites()},
                  {"coarse", coarse}};
    sink.write("gap.json", dump(gj));
    summary["delta_star"] = g.delta;
    summary["gap"] = g.gap;
  }
}

void write_trajectory(const json& cfg, OutputSink& sink, const Trajectory& traj) {
  if (wants(cfg, "csv")) {
    std::ostringstream os;
    write_trajectory_csv(os, traj);
    sink.write("trajectory.csv", os.str());
  }
  if (wants(cfg, "json")) sink.write("trajectory.json", dump(to_json(traj)));
}

void cmd_sweep(const json& cfg, OutputSink& sink, json& summary) {
  const Experiment ex = build_experiment(cfg);
  const auto controls = build_schedule(cfg, sqs_params(cfg));
  const ObservableSpec spec = observables(cfg, ex);
  RunOutcome r = run_schedule(cfg, ex, *controls, spec);
  write_trajectory(cfg, sink, r.trajectory);
  if (r.dense && !r.trajectory.checkpoints.empty()) {
    for (std::size_t i = 0; i < r.trajectory.checkpoints.size(); ++i) {
      const std::string prefix = "checkpoint_" + std::to_string(i);
      write_checkpoint(sink.path(prefix).string(), *r.dense->basis, r.trajectory.checkpoints[i]);
      sink.record(prefix + ".bin");
      sink.record(prefix + ".json");
    }
  }
  summary = observed_json(r.final);
  summary["duration"] = controls->duration();
  summary["n_atoms"] = ex.array.size();
  const Sample& last = r.trajectory.samples.back();
  summary["norm"] = last.norm;
  if (!last.entropy.empty()) summary["entropy_center"] = last.entropy.front();
  if (r.mps) {
    summary["bond_dim_max"] = last.bond_dim_max;
    summary["kept_norm"] = last.kept_norm;
  }
  sink.write("summary.json", dump(summary));
}

void cmd_scan_tq(const json& cfg, OutputSink& sink, json& summary) {
  const Experiment ex = build_experiment(cfg);
  const ObservableSpec spec = observables(cfg, ex);
  const auto grid = tq_grid(cfg);
  const SqsParams base = sqs_params(cfg);
  if (str(cfg, "schedule", "kind") != "sqs") throw ConfigError("scan-tq needs [schedule] kind = \"sqs\"");
  std::vector<Observed> points(grid.size());
  const Controls c0{1.0, base.delta_start};
  if (has_response(cfg)) {
    // Response models break prefix sharing: one full run per grid point.
    parallel_for(grid.size(), threads(cfg), [&](std::size_t i) {
      SqsParams p = base;
      p.t_q = grid[i];
      json point_cfg = cfg;
      point_cfg["schedule"]["t_q"] = grid[i];
      point_cfg["schedule"]["t_q_ns"] = nullptr;
      const auto controls = build_schedule(point_cfg, p);
      ObservableSpec quiet = spec;
      quiet.stride = std::numeric_limits<std::size_t>::max();
      points[i] = run_schedule(cfg, ex, *controls, quiet).final;
    });
  } else if (use_mps(cfg)) {
    const TebdModel model = mps_model(ex);
    const auto finals = mps_quench_scan(mps_initial(cfg, model, c0), model, base, grid, mps_options(cfg), threads(cfg));
    for (std::size_t i = 0; i < grid.size(); ++i) points[i] = observe(finals[i], spec);
  } else {
    const DenseSetup d = dense_setup(ex, c0);
    const auto finals = dense_quench_scan(initial_state(d.family, initial_mode(cfg)), d.family, base, grid,
                                          dense_options(cfg), threads(cfg));
    for (std::size_t i = 0; i < grid.size(); ++i) points[i] = observe(finals[i], spec);
  }
  std::vector<double> p(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) p[i] = points[i].p_mis;
  if (wants(cfg, "csv")) {
    std::ostringstream os;
    os << "tq,p_mis,p_zigzag,order\n";
    for (std::size_t i = 0; i < grid.size(); ++i) {
      os << fmt17(grid[i]) << ',' << fmt17(points[i].p_mis) << ',' << fmt17(points[i].p_zigzag) << ','
         << fmt17(points[i].order) << '\n';
    }
    sink.write("scan.csv", os.str());
  }
  json sj;
  try {
    sj = to_json(quench_scan_summary(grid, p));
  } catch (const std::domain_error&) {
    // A trace without a revival is a result, not a failure of the run.
    sj = {{"tq", grid}, {"p_mis", p}, {"errors", json::array()}, {"first_revival_tq", nullptr}};
    sj["argmax_tq"] = grid[static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin())];
  }
  sj["delta_q"] = base.delta_q;
  sj["delta_i"] = base.delta_i;
  sj["rate"] = base.rate;
  if (wants(cfg, "json")) sink.write("scan.json", dump(sj));
  summary = {{"argmax_tq", sj["argmax_tq"]},
             {"first_revival_tq", sj["first_revival_tq"]},
             {"max_p_mis", *std::max_element(p.begin(), p.end())}};
}

void cmd_scan_size(const json& cfg, OutputSink& sink, json& summary) {
  std::vector<int> sizes;
  for (const auto& v : cfg.at("scan").at("sizes")) {
    if (!v.is_number() || std::floor(v.get<double>()) != v.get<double>())
      throw ConfigError("[scan] sizes must be integers");
    sizes.push_back(v.get<int>());
  }
  if (sizes.size() < 2) throw ConfigError("[scan] sizes needs at least two chain lengths");
  const SqsParams params = sqs_params(cfg);
  std::vector<double> n_atoms(sizes.size()), probs(sizes.size());
  std::vector<Observed> points(sizes.size());
  parallel_for(sizes.size(), threads(cfg), [&](std::size_t i) {
    const Experiment ex = build_experiment(cfg, sizes[i]);
    const auto controls = build_schedule(cfg, params);
    ObservableSpec spec = observables(cfg, ex);
    spec.stride = std::numeric_limits<std::size_t>::max();
    points[i] = run_schedule(cfg, ex, *controls, spec).final;
    n_atoms[i] = static_cast<double>(ex.array.size());
    probs[i] = points[i].p_mis;
  });
  if (wants(cfg, "csv")) {
    std::ostringstream os;
    os << "L,N,P,p_zigzag\n";
    for (std::size_t i = 0; i < sizes.size(); ++i) {
      os << sizes[i] << ',' << fmt17(n_atoms[i]) << ',' << fmt17(probs[i]) << ',' << fmt17(points[i].p_zigzag) << '\n';
    }
    sink.write("scan.csv", os.str());
  }
  json fj = to_json(scaling_fit(n_atoms, probs, {}, num(cfg, "fit", "n0")));
  fj["L"] = sizes;
  sink.write("fit.json", dump(fj));
  summary = {{"b", fj["b"]}, {"p", fj["shifted"]["p"]}};
}

void cmd_spectra(const json& cfg, OutputSink& sink, json& summary) {
  if (use_mps(cfg)) throw ConfigError("spectra needs the dense engine");
  json local = cfg;
  if (num(cfg, "engine", "checkpoint_stride") == 0) {
    local["engine"]["checkpoint_stride"] = std::max<std::size_t>(1, count(cfg, "engine", "n_steps", 1) / 50);
  }
  const Experiment ex = build_experiment(local);
  const auto controls = build_schedule(local, sqs_params(local));
  const ObservableSpec spec = observables(local, ex);
  RunOutcome r = run_schedule(local, ex, *controls, spec);
  const DenseSetup d = dense_setup(ex, controls->sample(0.0));
  const int k = static_cast<int>(count(cfg, "spectra", "overlap_k", 1));
  const auto rows = instantaneous_overlaps(r.trajectory.checkpoints, d.family, k);
  std::ostringstream os;
  os << "t,delta";
  for (int j = 0; j < k; ++j) os << ",E" << j;
  for (int j = 0; j < k; ++j) os << ",ovl_" << j;
  os << ",captured\n";
  for (const auto& row : rows) {
    os << fmt17(row.t) << ',' << fmt17(row.delta);
    for (double e : row.energies) os << ',' << fmt17(e);
    for (double o : row.overlaps) os << ',' << fmt17(o);
    os << ',' << fmt17(row.captured) << '\n';
  }
  sink.write("overlaps.csv", os.str());
  const auto deltas = linspace(num(cfg, "spectra", "delta_start"), num(cfg, "spectra", "delta_stop"),
                               count(cfg, "spectra", "delta_points", 2));
  const SpectrumScan scan =
      ground_scan(ex.array, d.family, deltas, static_cast<int>(count(cfg, "spectra", "k", 1)), spec, {}, threads(cfg));
  std::ostringstream ss;
  write_spectrum_csv(ss, scan);
  sink.write("spectrum.csv", ss.str());
  write_trajectory(local, sink, r.trajectory);
  summary = observed_json(r.final);
  summary["checkpoints"] = rows.size();
}

void cmd_sample(const json& cfg, OutputSink& sink, json& summary) {
  const std::size_t shots = count(cfg, "measure", "shots");
  if (shots == 0) throw ConfigError("sample needs [measure] shots > 0");
  const Experiment ex = build_experiment(cfg);
  const auto controls = build_schedule(cfg, sqs_params(cfg));
  ObservableSpec spec = observables(cfg, ex);
  spec.stride = std::numeric_limits<std::size_t>::max();
  RunOutcome r = run_schedule(cfg, ex, *controls, spec);
  const std::uint64_t s = seed(cfg);
  ShotSet set =
      r.dense ? sample_dense(*r.dense, shots, s, ex.array.hash()) : mps_sample(*r.mps, shots, s, ex.array.hash());
  std::vector<AtomSet> mis;
  for (Config c : spec.mis_configs) mis.push_back(AtomSet::from_config(c));
  json stages = json::array();
  auto report = [&](const ShotSet& x) {
    const Estimate e = estimate(x, mis);
    json j{{"provenance", to_string(x.provenance())}, {"p_mis", e.p},   {"standard_error", e.standard_error},
           {"degenerate_error", e.degenerate_error},  {"hits", e.hits}, {"shots", e.shots}};
    if (ex.array.layout() == Layout::doublet_chain && ex.array.num_sites() >= 9) {
      j["order"] = order_parameter(x, ex.array.num_sites());
    }
    stages.push_back(j);
  };
  write_shots(sink.path("shots_raw.txt").string(), set);
  sink.record("shots_raw.txt");
  sink.record("shots_raw.txt.json");
  report(set);
  if (cfg.at("measure").at("noise").get<bool>()) {
    set = detection_channel(set, num(cfg, "measure", "p_r_to_g"), num(cfg, "measure", "p_g_to_r"), splitmix64(s ^ 1));
    report(set);
  }
  const bool post = choose<int>(str(cfg, "measure", "postprocess"), "[measure] postprocess",
                                {{"auto", ex.array.layout() == Layout::grid_2d ? 1 : 0}, {"on", 1}, {"off", 0}}) == 1;
  if (post) {
    set = postprocess_algorithm1(set, ex.graph, splitmix64(s ^ 2));
    report(set);
  }
  write_shots(sink.path("shots.txt").string(), set);
  sink.record("shots.txt");
  sink.record("shots.txt.json");
  summary = {{"exact", observed_json(r.final)}, {"stages", stages}};
  sink.write("estimates.json", dump(summary));
}

void cmd_fit(const json& cfg, OutputSink& sink, json& summary) {
  const std::string path = str(cfg, "fit", "input");
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open fit input " + path);
  FitTable t;
  try {
    t = read_fit_csv(is);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(path + ": " + e.what());
  }
  const json fj = to_json(scaling_fit(t.sizes, t.probabilities, t.errors, num(cfg, "fit", "n0")));
  sink.write("fit.json", dump(fj));
  summary = {{"b", fj["b"]}, {"p", fj["shifted"]["p"]}, {"p_unshifted", fj["unshifted"]["p"]}};
}

}  // namespace

void run_command(const std::string& command, const json& config, OutputSink& sink, json& manifest) {
  json summary;
  if (command == "geometry")
    cmd_geometry(config, sink, summary);
  else if (command == "groundscan")
    cmd_groundscan(config, sink, summary);
  else if (command == "sweep")
    cmd_sweep(config, sink, summary);
  else if (command == "scan-tq")
    cmd_scan_tq(config, sink, summary);
  else if (command == "scan-size")
    cmd_scan_size(config, sink, summary);
  else if (command == "spectra")
    cmd_spectra(config, sink, summary);
  else if (command == "sample")
    cmd_sample(config, sink, summary);
  else if (command == "fit")
    cmd_fit(config, sink, summary);
  else
    throw ConfigError("unknown subcommand '" + command + "'");
  manifest["summary"] = summary;
  if (const auto unit = time_unit_us(config)) manifest["time_unit_us"] = *unit;
  manifest["outputs"] = sink.entries();
  sink.write("manifest.json", dump(manifest));
}

}  // namespace sqs::cli

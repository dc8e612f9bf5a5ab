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

#include "sqs/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "sqs/common.hpp"

namespace sqs {

Waveform::Waveform(std::vector<Segment> segments) : segments_(std::move(segments)) {
  if (segments_.empty()) throw std::invalid_argument("Waveform needs at least one segment");
  if (segments_.front().t_start != 0.0) throw std::invalid_argument("Waveform must start at t = 0");
  for (std::size_t k = 0; k < segments_.size(); ++k) {
    if (!(segments_[k].t_end > segments_[k].t_start)) {
      throw std::invalid_argument("Waveform segment with t_end <= t_start");
    }
    if (k > 0 && segments_[k].t_start != segments_[k - 1].t_end) {
      throw std::invalid_argument("Waveform segments must be contiguous");
    }
  }
}

Controls Waveform::sample(double t) const {
  if (!(t >= 0.0) || t > duration()) throw std::out_of_range("Waveform::sample: t outside [0, duration]");
  // Last segment whose start is <= t: right-continuous at jumps.
  auto it =
      std::upper_bound(segments_.begin(), segments_.end(), t, [](double v, const Segment& s) { return v < s.t_start; });
  const Segment& s = *(it - 1);
  const double u = t - s.t_start;
  return {s.omega_start + s.omega_slope * u, s.delta_start + s.delta_slope * u};
}

std::vector<double> Waveform::breakpoints() const {
  std::vector<double> out;
  for (std::size_t k = 1; k < segments_.size(); ++k) out.push_back(segments_[k].t_start);
  return out;
}

Waveform linear_sweep(double delta_start, double delta_end, double rate) {
  if (!(rate > 0.0)) throw std::invalid_argument("linear_sweep: rate must be positive");
  if (delta_end == delta_start) throw std::invalid_argument("linear_sweep: empty sweep");
  const double duration = std::abs(delta_end - delta_start) / rate;
  const double slope = delta_end > delta_start ? rate : -rate;
  return Waveform({Segment{0.0, duration, delta_start, slope, 1.0, 0.0}});
}

Waveform sweep_quench_sweep(const SqsParams& p) {
  if (!(p.rate > 0.0)) throw std::invalid_argument("sqs: rate must be positive");
  if (!(p.delta_end > p.delta_start)) throw std::invalid_argument("sqs: delta_end must exceed delta_start");
  if (!(p.delta_i > p.delta_start && p.delta_i < p.delta_end)) {
    throw std::invalid_argument("sqs: delta_i outside the sweep range");
  }
  if (!(p.t_q >= 0.0)) throw std::invalid_argument("sqs: t_q must be non-negative");
  if (p.t_q == 0.0 && !p.resume_at_quench) return linear_sweep(p.delta_start, p.delta_end, p.rate);

  const double resume = p.resume_at_quench ? p.delta_q : p.delta_i;
  if (!(p.delta_end > resume)) throw std::invalid_argument("sqs: resumption detuning beyond delta_end");
  const double t1 = (p.delta_i - p.delta_start) / p.rate;
  const double t2 = t1 + p.t_q;
  const double t3 = t2 + (p.delta_end - resume) / p.rate;
  std::vector<Segment> segs;
  segs.push_back({0.0, t1, p.delta_start, p.rate, 1.0, 0.0});
  if (p.t_q > 0.0) segs.push_back({t1, t2, p.delta_q, 0.0, 1.0, 0.0});
  segs.push_back({t2, t3, resume, p.rate, 1.0, 0.0});
  return Waveform(std::move(segs));
}

Waveform with_omega_ramp(const Waveform& w, double t_ramp) {
  if (!(t_ramp > 0.0)) throw std::invalid_argument("with_omega_ramp: t_ramp must be positive");
  const Controls first = w.sample(0.0);
  std::vector<Segment> segs;
  segs.push_back({0.0, t_ramp, first.delta, 0.0, 0.0, first.omega / t_ramp});
  for (Segment s : w.segments()) {
    s.t_start += t_ramp;
    s.t_end += t_ramp;
    segs.push_back(s);
  }
  return Waveform(std::move(segs));
}

// ---------------------------------------------------------------- filter

ResponseFilter::ResponseFilter(Waveform base, double tau, double shift)
    : base_(std::move(base)), tau_(tau), shift_(shift) {
  if (!(tau >= 0.0) || !(shift >= 0.0)) throw std::invalid_argument("ResponseFilter: tau, shift must be >= 0");
  const auto& segs = base_.segments();
  y_start_.resize(segs.size());
  y_start_[0] = segs[0].delta_start;
  if (tau_ > 0.0) {
    for (std::size_t k = 0; k + 1 < segs.size(); ++k) {
      const Segment& s = segs[k];
      const double len = s.t_end - s.t_start;
      const double a = s.delta_start;
      const double b = s.delta_slope;
      const double x_end = a + b * len;
      y_start_[k + 1] = x_end - b * tau_ + (y_start_[k] - a + b * tau_) * std::exp(-len / tau_);
    }
  }
}

Controls ResponseFilter::sample(double t) const {
  if (!(t >= 0.0) || t > duration()) throw std::out_of_range("ResponseFilter::sample: t outside [0, duration]");
  const double u = std::max(0.0, t - shift_);
  const Controls x = base_.sample(u);
  if (tau_ == 0.0 || u == 0.0) return x;
  const auto& segs = base_.segments();
  auto it = std::upper_bound(segs.begin(), segs.end(), u, [](double v, const Segment& s) { return v < s.t_start; });
  const std::size_t k = static_cast<std::size_t>(it - segs.begin()) - 1;
  const Segment& s = segs[k];
  const double du = u - s.t_start;
  const double b = s.delta_slope;
  const double y = x.delta - b * tau_ + (y_start_[k] - s.delta_start + b * tau_) * std::exp(-du / tau_);
  return {x.omega, y};
}

std::vector<double> ResponseFilter::breakpoints() const {
  std::vector<double> out;
  if (shift_ > 0.0) out.push_back(shift_);
  for (double b : base_.breakpoints()) out.push_back(b + shift_);
  return out;
}

// ------------------------------------------------------------------- I/O

nlohmann::json to_json(const Waveform& w) {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : w.segments()) {
    segs.push_back({{"t_start", s.t_start},
                    {"t_end", s.t_end},
                    {"delta_start", s.delta_start},
                    {"delta_slope", s.delta_slope},
                    {"omega_start", s.omega_start},
                    {"omega_slope", s.omega_slope}});
  }
  return {{"time_unit", "2pi/Omega"}, {"total_duration", w.duration()}, {"segments", segs}};
}

Waveform waveform_from_json(const nlohmann::json& j) {
  std::vector<Segment> segs;
  for (const auto& s : j.at("segments")) {
    segs.push_back({s.at("t_start").get<double>(), s.at("t_end").get<double>(), s.at("delta_start").get<double>(),
                    s.value("delta_slope", 0.0), s.value("omega_start", 1.0), s.value("omega_slope", 0.0)});
  }
  return Waveform(std::move(segs));
}

void write_samples_csv(std::ostream& os, const ControlSource& source, int n_points) {
  if (n_points < 2) throw std::invalid_argument("write_samples_csv: need at least two points");
  os << "t,omega,delta\n";
  const double T = source.duration();
  for (int k = 0; k < n_points; ++k) {
    const double t = (k == n_points - 1) ? T : T * k / (n_points - 1);
    const Controls c = source.sample(t);
    os << fmt17(t) << ',' << fmt17(c.omega) << ',' << fmt17(c.delta) << '\n';
  }
}

}  // namespace sqs

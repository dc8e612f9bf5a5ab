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

#include <iosfwd>
#include <nlohmann/json.hpp>
#include <vector>

namespace sqs {

// Units: time in 2*pi/Omega, detuning and Rabi frequency in Omega. A sweep
// rate of r (in R0 = Omega^2 / 2pi) therefore changes Delta by r per time unit.

struct Controls {
  double omega = 1.0;
  double delta = 0.0;
};

/// Anything the dynamics engines can integrate against.
class ControlSource {
 public:
  virtual ~ControlSource() = default;
  virtual Controls sample(double t) const = 0;
  virtual double duration() const = 0;
  /// Times in (0, duration) where the controls jump or change slope; time
  /// steps never straddle them.
  virtual std::vector<double> breakpoints() const = 0;
};

struct Segment {
  double t_start = 0.0;
  double t_end = 0.0;
  double delta_start = 0.0;  // Delta(t) = delta_start + delta_slope * (t - t_start)
  double delta_slope = 0.0;
  double omega_start = 1.0;  // Omega(t) = omega_start + omega_slope * (t - t_start)
  double omega_slope = 0.0;
};

/// Piecewise-affine schedule, right-continuous at segment boundaries.
class Waveform final : public ControlSource {
 public:
  explicit Waveform(std::vector<Segment> segments);

  Controls sample(double t) const override;
  double duration() const override { return segments_.back().t_end; }
  std::vector<double> breakpoints() const override;

  const std::vector<Segment>& segments() const { return segments_; }

 private:
  std::vector<Segment> segments_;
};

/// Single segment from `delta_start` to `delta_end` at `rate` (units of R0).
Waveform linear_sweep(double delta_start, double delta_end, double rate);

struct SqsParams {
  double delta_start = -4.0;
  double delta_end = 4.0;
  double rate = 1.5;
  double delta_i = 0.55;
  double delta_q = 1.5;
  double t_q = 0.45;
  /// Resume the second sweep at delta_q instead of delta_i.
  bool resume_at_quench = false;
};

/// Sweep to delta_i, hold delta_q for t_q, then continue the sweep.
/// With t_q == 0 and the default resumption the result is `linear_sweep`.
Waveform sweep_quench_sweep(const SqsParams& p);

/// Prepend an Omega ramp 0 -> omega over `t_ramp` at the initial detuning.
Waveform with_omega_ramp(const Waveform& w, double t_ramp);

/// Hardware response model: a pure delay `shift` followed by an optional
/// first-order low-pass with time constant `tau` on Delta(t). The evaluator
/// spans the delayed waveform, so its duration is `duration + shift`.
class ResponseFilter final : public ControlSource {
 public:
  ResponseFilter(Waveform base, double tau, double shift);

  Controls sample(double t) const override;
  double duration() const override { return base_.duration() + shift_; }
  std::vector<double> breakpoints() const override;

  double tau() const { return tau_; }
  double shift() const { return shift_; }

 private:
  Waveform base_;
  double tau_;
  double shift_;
  std::vector<double> y_start_;  // filtered Delta at each segment start
};

nlohmann::json to_json(const Waveform& w);
Waveform waveform_from_json(const nlohmann::json& j);

/// `t,omega,delta` rows on a uniform grid of `n_points` >= 2 samples.
void write_samples_csv(std::ostream& os, const ControlSource& source, int n_points);

}  // namespace sqs

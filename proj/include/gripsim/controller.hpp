#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "gripsim/classifier.hpp"
#include "gripsim/features.hpp"
#include "gripsim/sensor.hpp"
#include "gripsim/types.hpp"

namespace gripsim {

struct ControllerParams {
  double s_slip = 0.2;
  double s_not_slip = 0.02;
  double alpha = 1.0;
  double beta = 0.002;  // m/s
  double l_min = -5.0;
  double l_max = 5.0;
};

void validate(const ControllerParams& params);

// s_slip and s_not_slip are per 100 Hz frame; faster sensors get proportionally
// smaller steps so l moves at the same rate per second.
ControllerParams rate_scaled(ControllerParams params, SensorKind variant);

struct FingerControllerState {
  double l = 0.0;
  ControllerParams params;
  double last_speed = 0.0;  // m/s
};

// Leaky slip statistic: +s_slip on slip, -s_not_slip on contact, unchanged
// without contact; clamped to [l_min, l_max].
FingerControllerState update_statistic(FingerControllerState state, Label predicted);

// beta * normal * exp(alpha * l). Throws ValidationError for a non-unit normal.
Vec2 command_velocity(const FingerControllerState& state, const Vec2& normal);

enum class NormalEstimator { Geometric, ElectrodeCentroid };

struct NormalContext {
  std::optional<Vec2> geometric_normal;  // from the simulator's finger site
  Vec2 approach_direction = Vec2::UnitX();
  const SensorFrame* grounded_frame = nullptr;  // for the electrode estimator
};

// Unit contact normal N(x_t). Falls back to the approach direction when there is
// no contact information.
Vec2 estimate_contact_normal(const NormalContext& context,
                             NormalEstimator estimator = NormalEstimator::Geometric);

struct PidGains {
  double kp = 2.5e-4;            // m/s per pressure unit
  double ki = 5.0e-4;            // m/s per (unit * s)
  double kd = 0.0;               // m/s per (unit / s)
  double integral_limit = 20.0;  // |integral| bound, unit * s
  double output_limit = 0.01;    // |command| bound, m/s
};

void validate(const PidGains& gains);

// PID on grounded p_dc error driving the fingertip along its normal.
class PressurePid {
 public:
  explicit PressurePid(PidGains gains = {});

  double update(double measured, double target, double dt);
  void reset();

  double integral_term() const { return gains_.ki * integral_; }
  const PidGains& gains() const { return gains_; }

 private:
  PidGains gains_;
  double integral_ = 0.0;
  std::optional<double> previous_error_;
};

double pid_pressure_regulate(PressurePid& pid, double measured, double target, double dt);

// One finger's reactive grip controller. Holds its own frame window and refuses
// frames tagged with any other finger id.
class FingerController {
 public:
  FingerController(int finger_id, ControllerParams params, FeatureParams features,
                   Grounding grounding);

  int finger_id() const { return finger_id_; }
  const FingerControllerState& state() const { return state_; }
  std::int64_t frames_consumed() const { return frames_consumed_; }
  const std::optional<Label>& last_label() const { return last_label_; }

  // Append a raw frame; throws ValidationError if it belongs to another finger.
  void observe(const SensorFrame& frame);

  // Predict from the current window (if full) and update the statistic.
  std::optional<Label> update(const SlipModel& model);

  // Normal speed command (>= 0) for the given unit contact normal.
  double command_speed(const Vec2& normal);

 private:
  int finger_id_;
  FingerControllerState state_;
  FeatureParams features_;
  Grounding grounding_;
  std::deque<SensorFrame> window_;
  std::int64_t frames_consumed_ = 0;
  std::optional<Label> last_label_;
};

}  // namespace gripsim

#include "gripsim/controller.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace gripsim {

void validate(const ControllerParams& p) {
  if (!(p.s_slip > 0)) throw ValidationError("controller.s_slip must be > 0");
  if (!(p.s_not_slip > 0)) throw ValidationError("controller.s_not_slip must be > 0");
  if (!(p.alpha > 0)) throw ValidationError("controller.alpha must be > 0");
  if (!(p.beta > 0)) throw ValidationError("controller.beta must be > 0");
  if (!(p.l_min <= 0 && 0 <= p.l_max))
    throw ValidationError("controller clamp must satisfy l_min <= 0 <= l_max");
}

ControllerParams rate_scaled(ControllerParams params, SensorKind variant) {
  constexpr double kReferencePeriod = 0.01;
  const double k = variant_info(variant).frame_period() / kReferencePeriod;
  params.s_slip *= k;
  params.s_not_slip *= k;
  return params;
}

FingerControllerState update_statistic(FingerControllerState state, Label predicted) {
  const auto& p = state.params;
  switch (predicted) {
    case Label::Slip: state.l += p.s_slip; break;
    case Label::Contact: state.l -= p.s_not_slip; break;
    case Label::NoContact: break;
  }
  state.l = std::clamp(state.l, p.l_min, p.l_max);
  return state;
}

Vec2 command_velocity(const FingerControllerState& state, const Vec2& normal) {
  if (!normal.allFinite() || std::abs(normal.norm() - 1.0) > 1e-6)
    throw ValidationError("contact normal must be a unit vector");
  const auto& p = state.params;
  return p.beta * std::exp(p.alpha * state.l) * normal;
}

Vec2 estimate_contact_normal(const NormalContext& ctx, NormalEstimator estimator) {
  const Vec2 approach = ctx.approach_direction.normalized();
  if (estimator == NormalEstimator::ElectrodeCentroid && ctx.grounded_frame) {
    // Tilt the approach direction toward the electrode pressure centroid.
    const auto& e = ctx.grounded_frame->electrodes;
    const int n = static_cast<int>(e.size());
    double sx = 0, sy = 0, total = 0;
    for (int j = 0; j < n; ++j) {
      const double a = 2 * std::numbers::pi * j / n;
      const double w = std::max(0.0, e[j]);
      sx += w * std::cos(a);
      sy += w * std::sin(a);
      total += w;
    }
    if (total > 0) {
      const double offset = std::clamp(sy / total, -0.5, 0.5);
      const Vec2 tangent(-approach.y(), approach.x());
      return (approach + offset * tangent).normalized();
    }
    return approach;
  }
  if (ctx.geometric_normal && ctx.geometric_normal->norm() > 0)
    return ctx.geometric_normal->normalized();
  return approach;
}

void validate(const PidGains& g) {
  if (!(g.kp >= 0 && g.ki >= 0 && g.kd >= 0)) throw ValidationError("PID gains must be >= 0");
  if (!(g.integral_limit > 0 && g.output_limit > 0))
    throw ValidationError("PID limits must be > 0");
}

PressurePid::PressurePid(PidGains gains) : gains_(gains) { validate(gains_); }

void PressurePid::reset() {
  integral_ = 0.0;
  previous_error_.reset();
}

double PressurePid::update(double measured, double target, double dt) {
  if (!(target > 0)) throw ValidationError("target pressure must be > 0");
  const double error = target - measured;
  const double derivative = previous_error_ ? (error - *previous_error_) / dt : 0.0;
  previous_error_ = error;
  // Anti-windup: bounded integral.
  integral_ = std::clamp(integral_ + error * dt, -gains_.integral_limit, gains_.integral_limit);
  const double out = gains_.kp * error + gains_.ki * integral_ + gains_.kd * derivative;
  return std::clamp(out, -gains_.output_limit, gains_.output_limit);
}

double pid_pressure_regulate(PressurePid& pid, double measured, double target, double dt) {
  return pid.update(measured, target, dt);
}

FingerController::FingerController(int finger_id, ControllerParams params,
                                   FeatureParams features, Grounding grounding)
    : finger_id_(finger_id), features_(features), grounding_(std::move(grounding)) {
  validate(params);
  validate(features_);
  state_.params = params;
}

void FingerController::observe(const SensorFrame& frame) {
  if (frame.finger != finger_id_)
    throw ValidationError("controller for finger " + std::to_string(finger_id_) +
                          " was handed a frame from finger " + std::to_string(frame.finger));
  window_.push_back(ground(frame, grounding_));
  while (static_cast<int>(window_.size()) > features_.tau_h) window_.pop_front();
  ++frames_consumed_;
}

std::optional<Label> FingerController::update(const SlipModel& model) {
  if (static_cast<int>(window_.size()) < features_.tau_h) return std::nullopt;
  const std::vector<SensorFrame> frames(window_.begin(), window_.end());
  const auto label = predict(model, extract(frames, features_)).label;
  state_ = update_statistic(state_, label);
  last_label_ = label;
  return label;
}

double FingerController::command_speed(const Vec2& normal) {
  state_.last_speed = command_velocity(state_, normal).norm();
  return state_.last_speed;
}

}  // namespace gripsim

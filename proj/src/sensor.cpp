#include "gripsim/sensor.hpp"

#include <cmath>
#include <numbers>

namespace gripsim {

void validate(const SensorParams& p) {
  if (!(p.gain_dc > 0)) throw ValidationError("sensor.gain_dc must be > 0");
  if (!(p.noise_dc >= 0 && p.pac_floor > 0 && p.pac_slip_gain >= 0 &&
        p.pac_incipient_gain >= 0 && p.electrode_noise >= 0))
    throw ValidationError("sensor noise levels must be >= 0 (pac_floor > 0)");
  if (!(p.electrode_gain > 0)) throw ValidationError("sensor.electrode_gain must be > 0");
}

SensorUnit make_sensor_unit(SensorKind variant, int finger, const SensorParams& params,
                            Rng& rng) {
  const int n = variant_info(variant).electrode_count;
  SensorUnit u;
  u.variant = variant;
  u.finger = finger;
  u.dc_baseline = params.dc_baseline + rng.uniform(-1, 1) * params.dc_baseline_spread;
  u.electrode_baseline.resize(n);
  u.profile.resize(n);
  u.shear.resize(n);
  const double phase = rng.uniform(0, 2 * std::numbers::pi);
  for (int j = 0; j < n; ++j) {
    const double a = 2 * std::numbers::pi * j / n + phase;
    u.electrode_baseline[j] =
        params.electrode_baseline + rng.uniform(-1, 1) * params.electrode_baseline_spread;
    u.profile[j] = 1.0 + 0.3 * std::cos(a);
    u.shear[j] = std::numbers::sqrt2 * std::sin(a);
  }
  return u;
}

double rms(std::span<const double> samples) {
  if (samples.empty()) return 0.0;
  double s = 0;
  for (double x : samples) s += x * x;
  return std::sqrt(s / samples.size());
}

SensorFrame synth_frame(const ContactState& contact, bool was_in_contact,
                        const SensorUnit& unit, const SensorParams& params, Rng& rng,
                        std::int64_t t) {
  const auto& info = variant_info(unit.variant);
  SensorFrame f;
  f.t = t;
  f.finger = unit.finger;
  f.variant = unit.variant;

  const double force = contact.in_contact ? contact.normal_force : 0.0;
  const double slip = contact.in_contact ? contact.slip_speed : 0.0;
  f.p_dc = unit.dc_baseline + params.gain_dc * force + rng.normal(0, params.noise_dc);

  // Vibration: a few random tones in the upper two thirds of the band.
  const double incipient = contact.in_contact ? contact.incipient : 0.0;
  const double vib = params.pac_slip_gain * slip * force + params.pac_incipient_gain * incipient;
  f.p_ac.assign(info.p_ac_batch_size, 0.0);
  for (auto& s : f.p_ac) s = rng.normal(0, params.pac_floor);
  if (vib > 0) {
    constexpr int kTones = 3;
    const double amp = vib * std::sqrt(2.0 / kTones);
    for (int k = 0; k < kTones; ++k) {
      const double w = std::numbers::pi * rng.uniform(0.4, 0.95);
      const double ph = rng.uniform(0, 2 * std::numbers::pi);
      for (int i = 0; i < info.p_ac_batch_size; ++i) f.p_ac[i] += amp * std::sin(w * i + ph);
    }
  }
  if (contact.in_contact != was_in_contact) {
    for (int i = 0; i < info.p_ac_batch_size; ++i)
      f.p_ac[i] += params.pac_transient * std::exp(-0.5 * i) * (i % 2 == 0 ? 1 : -1);
  }

  const double shear = contact.in_contact ? contact.friction_load : 0.0;
  f.electrodes.resize(info.electrode_count);
  for (int j = 0; j < info.electrode_count; ++j) {
    f.electrodes[j] = unit.electrode_baseline[j] +
                      params.electrode_gain * force * unit.profile[j] +
                      params.electrode_shear_gain * shear * unit.shear[j] +
                      rng.normal(0, params.electrode_noise);
  }
  f.t_dc = params.t_dc + rng.normal(0, params.temperature_noise);
  f.t_ac = params.t_ac + rng.normal(0, params.temperature_noise);
  return f;
}

Grounding grounding_from(const SensorFrame& contactless) {
  return {contactless.p_dc, contactless.electrodes};
}

SensorFrame ground(const SensorFrame& frame, const Grounding& g) {
  if (g.electrodes.size() != frame.electrodes.size())
    throw ValidationError("grounding baseline does not match the frame's electrode count");
  SensorFrame out = frame;
  out.p_dc -= g.p_dc;
  for (std::size_t j = 0; j < out.electrodes.size(); ++j) out.electrodes[j] -= g.electrodes[j];
  return out;
}

}  // namespace gripsim

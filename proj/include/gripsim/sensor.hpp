#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "gripsim/rng.hpp"
#include "gripsim/types.hpp"

namespace gripsim {

// Synthetic BioTac response model. p_dc is affine in normal force; p_ac carries a
// noise floor plus band-limited vibration that grows with slip speed under load;
// the electrode array mixes a pressure profile with a shear-dependent asymmetry.
struct SensorParams {
  double gain_dc = 10.0;              // units per N; P* of 20/50/80 maps to 2/5/8 N
  double dc_baseline = 2000.0;        // nominal fluid pressure before grounding
  double dc_baseline_spread = 150.0;  // per-unit offset spread
  double noise_dc = 0.3;
  double pac_floor = 1.0;             // p_ac RMS with no slip
  double pac_slip_gain = 400.0;       // p_ac RMS per (m/s * N) of slip
  double pac_incipient_gain = 2.0;    // p_ac RMS at full micro-slip activity
  double pac_transient = 6.0;         // spike on contact make/break
  double electrode_gain = 1.0;        // per N of normal force
  double electrode_shear_gain = 3.0;  // per N of transmitted tangential load
  double electrode_noise = 0.05;
  double electrode_baseline = 3000.0;
  double electrode_baseline_spread = 40.0;
  double t_dc = 2500.0;
  double t_ac = 0.0;
  double temperature_noise = 1.0;
};

void validate(const SensorParams& params);

// Per-finger sensor instance: baselines and contact-location profile are drawn
// once per trial.
struct SensorUnit {
  SensorKind variant = SensorKind::BioTac;
  int finger = 0;
  double dc_baseline = 0.0;
  Eigen::VectorXd electrode_baseline;
  Eigen::VectorXd profile;  // pressure profile, mean 1
  Eigen::VectorXd shear;    // zero-sum shear pattern orthogonal to the profile
};

SensorUnit make_sensor_unit(SensorKind variant, int finger, const SensorParams& params,
                            Rng& rng);

SensorFrame synth_frame(const ContactState& contact, bool was_in_contact,
                        const SensorUnit& unit, const SensorParams& params, Rng& rng,
                        std::int64_t t);

double rms(std::span<const double> samples);

// Offsets removed from p_dc and electrodes, taken from a contactless frame.
struct Grounding {
  double p_dc = 0.0;
  std::vector<double> electrodes;
};

Grounding grounding_from(const SensorFrame& contactless);
SensorFrame ground(const SensorFrame& frame, const Grounding& grounding);

}  // namespace gripsim

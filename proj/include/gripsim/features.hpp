#pragma once

#include <array>
#include <span>
#include <string_view>

#include <Eigen/Core>

#include "gripsim/types.hpp"

namespace gripsim {

// Slot order is frozen; model files record kFeatureLayoutVersion.
inline constexpr int kFeatureLayoutVersion = 1;
inline constexpr int kFeatureCount = 10;

enum FeatureSlot : int {
  kPdcMean = 0,
  kPdcSlope,
  kPacRms,
  kPacRmsDelta,
  kPacBandLow,
  kPacBandMid,
  kPacBandHigh,
  kElectrodeMeanDelta,
  kElectrodeSpatialVariance,
  kContactFraction,
};

const std::array<std::string_view, kFeatureCount>& feature_names();

struct FeatureParams {
  int tau_h = 10;                    // frames per window
  double contact_threshold = 10.0;   // grounded p_dc units
  double spatial_floor = 0.01;       // regularizes the electrode variance ratio
};

void validate(const FeatureParams& params);

struct FeatureVector {
  Eigen::VectorXd values;
  SensorKind variant = SensorKind::BioTac;
  int tau_h = 0;
};

// phi(x_{t-tau_H : t}) over grounded frames of a single finger.
FeatureVector extract(std::span<const SensorFrame> window, const FeatureParams& params);

// Log power of the mean-removed, Hann-windowed signal in three equal-width
// bands covering (0, Nyquist].
std::array<double, 3> band_energies(std::span<const double> samples);

struct Normalizer {
  Eigen::VectorXd mean;
  Eigen::VectorXd stddev;  // zero marks a constant slot, which standardizes to 0

  Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
  bool operator==(const Normalizer&) const = default;
};

// Columns of `samples` are feature vectors.
Normalizer fit_normalizer(const Eigen::MatrixXd& samples);
Normalizer fit_normalizer(std::span<const FeatureVector> samples);

}  // namespace gripsim

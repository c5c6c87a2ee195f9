#include "gripsim/features.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "gripsim/sensor.hpp"

namespace gripsim {

const std::array<std::string_view, kFeatureCount>& feature_names() {
  static const std::array<std::string_view, kFeatureCount> names{
      "p_dc_mean",          "p_dc_slope",       "p_ac_rms",         "p_ac_rms_delta",
      "p_ac_band_low",      "p_ac_band_mid",    "p_ac_band_high",   "electrode_mean_delta",
      "electrode_spatial_variance", "contact_fraction"};
  return names;
}

void validate(const FeatureParams& p) {
  if (p.tau_h < 1) throw ValidationError("tau_h must be >= 1");
  if (!(p.spatial_floor > 0)) throw ValidationError("features.spatial_floor must be > 0");
}

std::array<double, 3> band_energies(std::span<const double> samples) {
  const std::size_t n = samples.size();
  std::array<double, 3> out{0, 0, 0};
  if (n < 2) return out;

  double mean = 0;
  for (double s : samples) mean += s;
  mean /= n;

  std::vector<double> x(n);
  double wsum = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 0.5 - 0.5 * std::cos(2 * std::numbers::pi * i / n);
    x[i] = (samples[i] - mean) * w;
    wsum += w * w;
  }
  Eigen::FFT<double> fft;
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, x);

  const std::size_t half = n / 2;
  for (std::size_t k = 1; k <= half; ++k) {
    const double frac = static_cast<double>(k) / half;
    const int band = frac <= 1.0 / 3 ? 0 : (frac <= 2.0 / 3 ? 1 : 2);
    out[band] += std::norm(spectrum[k]) / wsum;
  }
  for (auto& e : out) e = std::log1p(e);
  return out;
}

namespace {

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / v.size();
}

}  // namespace

FeatureVector extract(std::span<const SensorFrame> window, const FeatureParams& params) {
  validate(params);
  if (static_cast<int>(window.size()) != params.tau_h)
    throw ValidationError("feature window has " + std::to_string(window.size()) +
                          " frames, tau_h is " + std::to_string(params.tau_h));
  const auto& first = window.front();
  for (std::size_t i = 0; i < window.size(); ++i) {
    const auto& f = window[i];
    if (f.variant != first.variant) throw ValidationError("feature window mixes sensor variants");
    if (f.finger != first.finger) throw ValidationError("feature window mixes fingers");
    if (f.t != first.t + static_cast<std::int64_t>(i))
      throw ValidationError("feature window frames are not contiguous");
    check_frame_shape(f);
  }

  const int n = params.tau_h;
  const double period = variant_info(first.variant).frame_period();
  FeatureVector fv;
  fv.variant = first.variant;
  fv.tau_h = n;
  fv.values = Eigen::VectorXd::Zero(kFeatureCount);
  auto& v = fv.values;

  // Least-squares slope of p_dc against frame time.
  double mean_p = 0;
  for (const auto& f : window) mean_p += f.p_dc;
  mean_p /= n;
  v[kPdcMean] = mean_p;
  if (n > 1) {
    const double ct = (n - 1) / 2.0;
    double num = 0, den = 0;
    for (int i = 0; i < n; ++i) {
      num += (i - ct) * (window[i].p_dc - mean_p);
      den += (i - ct) * (i - ct);
    }
    v[kPdcSlope] = num / den / period;
  }

  std::vector<double> samples;
  std::vector<double> early, late;
  for (int i = 0; i < n; ++i) {
    const auto& pac = window[i].p_ac;
    samples.insert(samples.end(), pac.begin(), pac.end());
    auto& half = i < n / 2 ? early : late;
    half.insert(half.end(), pac.begin(), pac.end());
  }
  v[kPacRms] = rms(samples);
  if (n > 1) v[kPacRmsDelta] = rms(late) - rms(early);
  const auto bands = band_energies(samples);
  v[kPacBandLow] = bands[0];
  v[kPacBandMid] = bands[1];
  v[kPacBandHigh] = bands[2];

  v[kElectrodeMeanDelta] = mean_of(window.back().electrodes) - mean_of(first.electrodes);

  // Spatial variance of the window-averaged array relative to its squared mean:
  // pressure scales the whole array, shear skews it.
  const std::size_t m = first.electrodes.size();
  Eigen::VectorXd avg = Eigen::VectorXd::Zero(m);
  for (const auto& f : window)
    avg += Eigen::Map<const Eigen::VectorXd>(f.electrodes.data(), m);
  avg /= n;
  const double emean = avg.mean();
  const double evar = (avg.array() - emean).square().mean();
  v[kElectrodeSpatialVariance] = evar / (emean * emean + params.spatial_floor);

  int touching = 0;
  for (const auto& f : window) touching += f.p_dc > params.contact_threshold ? 1 : 0;
  v[kContactFraction] = static_cast<double>(touching) / n;
  return fv;
}

Eigen::VectorXd Normalizer::apply(const Eigen::VectorXd& v) const {
  if (v.size() != mean.size()) throw ValidationError("normalizer size mismatch");
  Eigen::VectorXd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i)
    out[i] = stddev[i] > 0 ? (v[i] - mean[i]) / stddev[i] : 0.0;
  return out;
}

Normalizer fit_normalizer(const Eigen::MatrixXd& samples) {
  if (samples.cols() == 0) throw ValidationError("cannot fit a normalizer on an empty dataset");
  Normalizer nz;
  nz.mean = samples.rowwise().mean();
  nz.stddev.resize(samples.rows());
  for (Eigen::Index i = 0; i < samples.rows(); ++i) {
    const double var = (samples.row(i).array() - nz.mean[i]).square().mean();
    const double sd = std::sqrt(var);
    nz.stddev[i] = sd > 1e-12 * (1.0 + std::abs(nz.mean[i])) ? sd : 0.0;
  }
  return nz;
}

Normalizer fit_normalizer(std::span<const FeatureVector> samples) {
  if (samples.empty()) throw ValidationError("cannot fit a normalizer on an empty dataset");
  Eigen::MatrixXd m(samples.front().values.size(), samples.size());
  for (std::size_t j = 0; j < samples.size(); ++j) m.col(j) = samples[j].values;
  return fit_normalizer(m);
}

}  // namespace gripsim

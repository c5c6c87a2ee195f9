#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "gripsim/features.hpp"
#include "gripsim/rng.hpp"
#include "support.hpp"

using namespace gripsim;

namespace {

std::vector<SensorFrame> noisy_window(SensorKind v, int n, std::uint64_t seed, double p_dc = 40.0) {
  Rng rng(seed);
  std::vector<SensorFrame> w;
  for (int i = 0; i < n; ++i) {
    auto f = test::frame(v, 100 + i, 1, p_dc + rng.normal(0, 1));
    for (auto& s : f.p_ac) s = rng.normal(0, 1);
    for (auto& e : f.electrodes) e = 4.0 + rng.normal(0, 0.5);
    w.push_back(f);
  }
  return w;
}

}  // namespace

TEST_CASE("layout has ten named slots") {
  CHECK(feature_names().size() == kFeatureCount);
  CHECK(feature_names()[kPdcSlope] == "p_dc_slope");
  CHECK(feature_names()[kContactFraction] == "contact_fraction");
}

TEST_CASE("identical frames have zero slope and zero RMS delta") {
  FeatureParams p;
  auto f = test::frame(SensorKind::BioTac, 0, 0, 30.0);
  for (std::size_t i = 0; i < f.p_ac.size(); ++i) f.p_ac[i] = std::sin(0.7 * i);
  std::vector<SensorFrame> w;
  for (int i = 0; i < p.tau_h; ++i) {
    w.push_back(f);
    w.back().t = i;
  }
  const auto v = extract(w, p).values;
  CHECK(v[kPdcSlope] == 0.0);
  CHECK(v[kPacRmsDelta] == 0.0);
  CHECK(v[kPdcMean] == doctest::Approx(30.0));
  CHECK(v[kContactFraction] == 1.0);
}

TEST_CASE("linearly rising p_dc gives the exact slope") {
  for (auto variant : {SensorKind::BioTac, SensorKind::BioTacSP}) {
    FeatureParams p;
    std::vector<SensorFrame> w;
    for (int i = 0; i < p.tau_h; ++i)
      w.push_back(test::frame(variant, i, 0, 10.0 + 10.0 * i / (p.tau_h - 1)));
    const double duration = (p.tau_h - 1) * variant_info(variant).frame_period();
    CHECK(std::abs(extract(w, p).values[kPdcSlope] - 10.0 / duration) <= 1e-9 * (10.0 / duration));
  }
}

TEST_CASE("electrode permutation leaves the spatial variance slot unchanged") {
  FeatureParams p;
  auto a = noisy_window(SensorKind::BioTacSP, p.tau_h, 3);
  auto b = a;
  Rng rng(4);
  std::vector<int> perm(a[0].electrodes.size());
  std::iota(perm.begin(), perm.end(), 0);
  for (std::size_t i = perm.size() - 1; i > 0; --i)
    std::swap(perm[i], perm[static_cast<std::size_t>(rng.uniform(0, i + 1))]);
  for (auto& f : b) {
    auto e = f.electrodes;
    for (std::size_t j = 0; j < e.size(); ++j) f.electrodes[j] = e[perm[j]];
  }
  const double va = extract(a, p).values[kElectrodeSpatialVariance];
  const double vb = extract(b, p).values[kElectrodeSpatialVariance];
  // Direct computation of the same quantity.
  const std::size_t m = a[0].electrodes.size();
  std::vector<double> avg(m, 0.0);
  for (const auto& f : a)
    for (std::size_t j = 0; j < m; ++j) avg[j] += f.electrodes[j] / p.tau_h;
  double mean = 0, var = 0;
  for (double x : avg) mean += x / m;
  for (double x : avg) var += (x - mean) * (x - mean) / m;
  CHECK(va == doctest::Approx(vb).epsilon(1e-12));
  CHECK(va == doctest::Approx(var / (mean * mean + p.spatial_floor)).epsilon(1e-12));
}

TEST_CASE("a p_dc offset only moves the p_dc mean slot") {
  FeatureParams p;
  const auto a = noisy_window(SensorKind::BioTac, p.tau_h, 5);
  auto b = a;
  for (auto& f : b) f.p_dc += 7.5;
  const auto va = extract(a, p).values, vb = extract(b, p).values;
  CHECK(vb[kPdcMean] == doctest::Approx(va[kPdcMean] + 7.5));
  for (int k = 0; k < kFeatureCount; ++k)
    if (k != kPdcMean) CHECK(vb[k] == doctest::Approx(va[k]).epsilon(1e-9));
}

TEST_CASE("extract is pure") {
  FeatureParams p;
  const auto w = noisy_window(SensorKind::BioTac, p.tau_h, 6);
  const auto a = extract(w, p), b = extract(w, p);
  CHECK(a.values == b.values);
  CHECK(a.values.allFinite());
  CHECK(a.variant == SensorKind::BioTac);
  CHECK(a.tau_h == p.tau_h);
}

TEST_CASE("bad windows are rejected") {
  FeatureParams p;
  auto w = noisy_window(SensorKind::BioTac, p.tau_h, 7);
  SUBCASE("too short") {
    w.pop_back();
    CHECK_THROWS_AS(extract(w, p), ValidationError);
  }
  SUBCASE("mixed variants") {
    w[3] = test::frame(SensorKind::BioTacSP, w[3].t, w[3].finger, 40.0);
    CHECK_THROWS_AS(extract(w, p), ValidationError);
  }
  SUBCASE("mixed fingers") {
    w[3].finger = 0;
    CHECK_THROWS_AS(extract(w, p), ValidationError);
  }
  SUBCASE("gap in time") {
    w[5].t += 1;
    CHECK_THROWS_AS(extract(w, p), ValidationError);
  }
  SUBCASE("bad batch size") {
    w[2].p_ac.push_back(0.0);
    CHECK_THROWS_AS(extract(w, p), ValidationError);
  }
}

TEST_CASE("band energies locate tones") {
  const int n = 220;
  auto tone = [&](double fraction_of_nyquist) {
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = std::sin(std::numbers::pi * fraction_of_nyquist * i);
    return band_energies(x);
  };
  const auto low = tone(0.15), mid = tone(0.5), high = tone(0.85);
  CHECK(low[0] > low[1]);
  CHECK(low[0] > low[2]);
  CHECK(mid[1] > mid[0]);
  CHECK(mid[1] > mid[2]);
  CHECK(high[2] > high[0]);
  CHECK(high[2] > high[1]);
  const auto flat = band_energies(std::vector<double>(n, 3.0));
  for (double e : flat) CHECK(e == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("normalizer") {
  SUBCASE("one vector maps to zeros") {
    Eigen::MatrixXd one = Eigen::VectorXd::LinSpaced(kFeatureCount, 1, 10);
    const Normalizer nz = fit_normalizer(one);
    CHECK(nz.apply(one.col(0)).isZero());
  }
  SUBCASE("standardized data has mean 0 and std 1") {
    Rng rng(9);
    Eigen::MatrixXd d(kFeatureCount, 500);
    for (Eigen::Index j = 0; j < d.cols(); ++j)
      for (Eigen::Index i = 0; i < d.rows(); ++i) d(i, j) = rng.normal(i * 10.0, 1.0 + i);
    d.row(4).setConstant(2.5);
    const Normalizer nz = fit_normalizer(d);
    Eigen::MatrixXd s(d.rows(), d.cols());
    for (Eigen::Index j = 0; j < d.cols(); ++j) s.col(j) = nz.apply(d.col(j));
    for (Eigen::Index i = 0; i < s.rows(); ++i) {
      const double mean = s.row(i).mean();
      const double sd = std::sqrt((s.row(i).array() - mean).square().mean());
      CHECK(std::abs(mean) < 1e-9);
      if (i == 4)
        CHECK(s.row(i).isZero());
      else
        CHECK(std::abs(sd - 1.0) < 1e-9);
    }
  }
  SUBCASE("train fit applies to unseen windows") {
    FeatureParams p;
    std::vector<FeatureVector> train;
    for (std::uint64_t s = 0; s < 50; ++s) train.push_back(extract(noisy_window(SensorKind::BioTac, p.tau_h, s), p));
    const Normalizer nz = fit_normalizer(train);
    for (std::uint64_t s = 100; s < 120; ++s) {
      auto w = noisy_window(SensorKind::BioTac, p.tau_h, s, 5.0 + s);
      CHECK(nz.apply(extract(w, p).values).allFinite());
    }
  }
  SUBCASE("empty and mismatched inputs") {
    CHECK_THROWS_AS(fit_normalizer(std::span<const FeatureVector>{}), ValidationError);
    CHECK_THROWS_AS(fit_normalizer(Eigen::MatrixXd(kFeatureCount, 0)), ValidationError);
    const Normalizer nz = fit_normalizer(Eigen::MatrixXd::Ones(kFeatureCount, 2));
    CHECK_THROWS_AS(nz.apply(Eigen::VectorXd::Zero(3)), ValidationError);
  }
}

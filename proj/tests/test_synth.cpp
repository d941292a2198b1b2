#include "doctest.h"

#include <cmath>
#include <numbers>
#include <vector>

#include "defectspec/error.hpp"
#include "defectspec/polarfit.hpp"
#include "defectspec/spectrum.hpp"
#include "defectspec/synth.hpp"

using namespace defectspec;
using namespace defectspec::synth;

namespace {

constexpr double deg = std::numbers::pi / 180.0;

std::vector<double> angle_grid(double step) {
  std::vector<double> a;
  for (double t = 0.0; t < 180.0 - 1e-9; t += step) a.push_back(t);
  return a;
}

double axis_distance(double x, double y) {
  const double d = std::fmod(std::abs(x - y), 180.0);
  return std::min(d, 180.0 - d);
}

SyntheticDefect defect(double theta_abs, double theta_emit) {
  SyntheticDefect d;
  d.system = {2.06, {{180.0, 1.0}}, theta_emit, theta_abs};
  d.brightness = 500.0;
  return d;
}

}  // namespace

TEST_CASE("counter RNG is reproducible and stream-separated") {
  CounterRng a(7, 3), b(7, 3), c(7, 4), d(8, 3);
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    CHECK(x == b());
    CHECK(x != c());
    CHECK(x != d());
  }
  CHECK(a.counter() == 100);
  CounterRng u(1, 1);
  double mean = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double x = u.uniform();
    CHECK((x >= 0.0 && x < 1.0));
    mean += x;
  }
  CHECK(mean / 100000 == doctest::Approx(0.5).epsilon(0.01));
  CHECK(CounterRng::algorithm == "splitmix64-counter");
}

TEST_CASE("modulation from visibility") {
  for (double v : {0.1, 0.5, 0.8, 1.0}) {
    const auto [a, b] = modulation_for_visibility(v);
    CHECK(a + b == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(b / (b + 2 * a) == doctest::Approx(v).epsilon(1e-14));
  }
}

TEST_CASE("noiseless emission scan is the dipole model at every energy") {
  auto d = defect(20.0, 65.0);
  d.emit_visibility = 0.7;
  const auto grid = spectra::uniform_grid(1.7, 2.15, 0.002);
  const auto angles = angle_grid(20.0);
  const auto scan = generate_scan(d, polarfit::ScanRole::emission_scan, angles, grid, {});
  const auto profile = spectra::render_band(d.band_model(), grid, spectra::BandDirection::emission);
  const double peak = *std::max_element(profile.values().begin(), profile.values().end());
  const auto [a, b] = modulation_for_visibility(0.7);
  for (std::size_t i = 0; i < angles.size(); ++i) {
    const double c = std::cos((angles[i] - 65.0) * deg);
    for (std::size_t k = 0; k < grid.size(); k += 7) {
      const double want = 500.0 * profile.values()[k] / peak * (a + b * c * c);
      CHECK(scan.spectra[i].values()[k] == doctest::Approx(want).epsilon(1e-14).scale(1e-300));
    }
  }
  const auto fit = polarfit::fit_spectrally_averaged(scan);
  CHECK(axis_distance(fit.theta0_deg, 65.0) < 1e-9);
  CHECK(polarfit::visibility(fit).value == doctest::Approx(0.7).epsilon(1e-9));
}

TEST_CASE("absorption scans follow the excitation mechanism") {
  const auto grid = spectra::uniform_grid(1.9, 2.1, 0.002);
  const auto angles = angle_grid(10.0);
  auto d = defect(40.0, 40.0);
  CHECK(axis_distance(polarfit::fit_spectrally_averaged(
                          generate_scan(d, polarfit::ScanRole::absorption_scan, angles, grid, {}))
                          .theta0_deg,
                      40.0) < 1e-9);

  d.mechanism = {MechanismKind::indirect, 90.0, 0.0};
  CHECK(axis_distance(polarfit::fit_spectrally_averaged(
                          generate_scan(d, polarfit::ScanRole::absorption_scan, angles, grid, {}))
                          .theta0_deg,
                      90.0) < 1e-9);

  // mixed channels: theta0 is the weighted circular mean of the two axes in doubled-angle space
  for (double w : {0.2, 0.5, 0.7}) {
    d.mechanism = {MechanismKind::mixed, 100.0, w};
    d.abs_visibility = 0.8;
    const auto fit = polarfit::fit_spectrally_averaged(
        generate_scan(d, polarfit::ScanRole::absorption_scan, angles, grid, {}));
    const double x = (1 - w) * std::cos(2 * 40.0 * deg) + w * std::cos(2 * 100.0 * deg);
    const double y = (1 - w) * std::sin(2 * 40.0 * deg) + w * std::sin(2 * 100.0 * deg);
    const double mean = 0.5 * std::atan2(y, x) / deg;
    CHECK(axis_distance(fit.theta0_deg, mean) < 1e-8);
  }
  d.mechanism.indirect_weight = 1.5;
  CHECK_THROWS_AS(generate_scan(d, polarfit::ScanRole::absorption_scan, angles, grid, {}), Error);
}

TEST_CASE("noisy scans are seed-deterministic and unbiased") {
  const auto d = defect(0.0, 30.0);
  const auto grid = spectra::uniform_grid(2.0, 2.1, 0.01);
  const auto angles = angle_grid(30.0);
  const NoiseSpec noise{99, NoiseKind::poisson};
  const auto s1 = generate_scan(d, polarfit::ScanRole::emission_scan, angles, grid, noise);
  const auto s2 = generate_scan(d, polarfit::ScanRole::emission_scan, angles, grid, noise);
  for (std::size_t i = 0; i < angles.size(); ++i) CHECK(s1.spectra[i].values() == s2.spectra[i].values());

  const auto clean = generate_scan(d, polarfit::ScanRole::emission_scan, angles, grid, {});
  const int seeds = 10000;
  std::vector<std::vector<double>> sum(angles.size(), std::vector<double>(grid.size(), 0.0));
  for (int s = 0; s < seeds; ++s) {
    const auto scan =
        generate_scan(d, polarfit::ScanRole::emission_scan, angles, grid, {static_cast<std::uint64_t>(s), NoiseKind::poisson});
    for (std::size_t i = 0; i < angles.size(); ++i)
      for (std::size_t k = 0; k < grid.size(); ++k) sum[i][k] += scan.spectra[i].values()[k];
  }
  for (std::size_t i = 0; i < angles.size(); ++i)
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double mu = clean.spectra[i].values()[k];
      const double mean = sum[i][k] / seeds;
      // standard error of the mean of Poisson(mu) is sqrt(mu / seeds)
      CHECK(std::abs(mean - mu) <= 5.0 * std::sqrt(std::max(mu, 1e-3) / seeds) + 1e-12);
    }
}

TEST_CASE("visibility survives Poisson noise on average") {
  auto d = defect(0.0, 50.0);
  d.emit_visibility = 0.6;
  d.brightness = 200.0;
  const auto grid = spectra::uniform_grid(2.03, 2.09, 0.002);
  const auto angles = angle_grid(10.0);
  double sum = 0.0, sum2 = 0.0;
  const int seeds = 500;
  for (int s = 0; s < seeds; ++s) {
    const auto scan =
        generate_scan(d, polarfit::ScanRole::emission_scan, angles, grid, {static_cast<std::uint64_t>(s), NoiseKind::poisson});
    const double v = polarfit::visibility(polarfit::fit_spectrally_averaged(scan)).value;
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / seeds;
  const double sd = std::sqrt(sum2 / seeds - mean * mean);
  CHECK(std::abs(mean - 0.6) < 4.0 * sd / std::sqrt(double(seeds)) + 1e-3);
}

TEST_CASE("survey generator") {
  const NoiseSpec noise{2024, NoiseKind::none};
  const auto a = generate_survey(50, {}, {}, noise);
  const auto b = generate_survey(50, {}, {}, noise);
  const auto prefix = generate_survey(10, {}, {}, noise);
  REQUIRE(a.size() == 50);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].theta_abs_deg == b[i].theta_abs_deg);
    CHECK(a[i].zpl_energy_ev == b[i].zpl_energy_ev);
    CHECK(a[i].delta_theta_deg == doctest::Approx(polarfit::delta_theta(a[i].theta_abs_deg, a[i].theta_emit_deg)).epsilon(1e-12));
    CHECK(a[i].stokes_shift_mev == doctest::Approx((a[i].excitation_energy_ev - a[i].zpl_energy_ev) * 1000.0).epsilon(1e-12));
    if (i < prefix.size()) CHECK(prefix[i].theta_emit_deg == a[i].theta_emit_deg);
  }

  SurveyMix one;
  one.direct_fraction = 1.0;
  one.direct_stokes_min_mev = one.direct_stokes_max_mev = 180.0;
  const auto single = generate_survey(1, one, {}, noise);
  CHECK(single[0].stokes_shift_mev == doctest::Approx(180.0).epsilon(1e-9));
  CHECK(single[0].region == classify::RegionLabel::RegionI);
  CHECK(single[0].mechanism == classify::Mechanism::DirectConsistent);
  CHECK_THROWS_AS(generate_survey(0, {}, {}, noise), Error);
}

TEST_CASE("indirect-only populations have a flat misalignment histogram") {
  SurveyMix mix;
  mix.direct_fraction = 0.0;
  // chi-square with 8 degrees of freedom; 15.507 is the 95th percentile
  int rejections = 0;
  const int runs = 1000;
  for (int run = 0; run < runs; ++run) {
    const auto recs = generate_survey(90, mix, {}, {static_cast<std::uint64_t>(run), NoiseKind::none});
    std::vector<int> counts(9, 0);
    for (const auto& r : recs) counts[std::min(8, static_cast<int>(r.delta_theta_deg / 10.0))] += 1;
    double chi2 = 0.0;
    for (int c : counts) chi2 += (c - 10.0) * (c - 10.0) / 10.0;
    if (chi2 > 15.507) ++rejections;
  }
  // expected 50 rejections; binomial sd ~ 6.9
  CHECK(rejections >= 25);
  CHECK(rejections <= 75);
}

TEST_CASE("decay and g2 generators are seed-deterministic") {
  std::vector<double> t;
  for (int i = 0; i < 400; ++i) t.push_back(i * 0.1);
  const NoiseSpec noise{5, NoiseKind::poisson};
  CHECK(generate_decay({}, t, noise).counts == generate_decay({}, t, noise).counts);
  CHECK(generate_decay({}, t, noise).counts != generate_decay({}, t, {6, NoiseKind::poisson}).counts);
  std::vector<double> tau;
  for (int i = -100; i <= 100; ++i) tau.push_back(i * 0.5);
  CHECK(generate_g2(0.7, 3.0, tau, 50.0, noise).g2 == generate_g2(0.7, 3.0, tau, 50.0, noise).g2);
}

TEST_CASE("retarder instrument") {
  const RetarderInstrument inst;
  // no retardance at the compensated wavelength: a pure rotation
  const double rot = inst.rotation_offset_deg + inst.rotation_curvature_deg * std::pow((600.0 - 633.0) / 100.0, 2);
  for (double th : {0.0, 33.0, 91.0, 150.0}) {
    CHECK(axis_distance(inst.measured_angle_deg(th, 600.0), th + rot) < 1e-12);
    CHECK(inst.visibility(th, 600.0) == doctest::Approx(1.0).epsilon(1e-15));
  }
  // light along the fast axis is unaffected by retardance
  CHECK(inst.visibility(inst.fast_axis_deg, 740.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(inst.visibility(inst.fast_axis_deg + 45.0, 740.0) == doctest::Approx(std::cos(inst.retardance_deg(740.0) * deg)).epsilon(1e-14));
  const auto sweep = calibration_sweep(inst, {600.0, 700.0});
  CHECK(sweep.size() == 12);
}

#include "defectspec/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <string>

#include "defectspec/error.hpp"
#include "defectspec/units.hpp"

namespace defectspec::synth {

namespace {

constexpr std::uint64_t golden_gamma = 0x9e3779b97f4a7c15ULL;
constexpr std::uint64_t emission_stream_tag = 0x454d4953ULL << 32;
constexpr std::uint64_t absorption_stream_tag = 0x41425352ULL << 32;

double standard_normal(CounterRng& rng) {
  // Box-Muller on two fresh uniforms; u1 in (0, 1] keeps the log finite.
  const double u1 = 1.0 - rng.uniform();
  const double u2 = rng.uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double uniform_between(CounterRng& rng, double lo, double hi) { return lo + (hi - lo) * rng.uniform(); }

double channel_modulation(double theta_deg, double dipole_deg, double visibility) {
  const auto [a, b] = modulation_for_visibility(visibility);
  const double c = std::cos((theta_deg - dipole_deg) * units::deg_to_rad);
  return a + b * c * c;
}

void check_visibility(double v, const char* what) {
  if (!(v > 0.0 && v <= 1.0)) throw Error(ErrorKind::domain, std::string(what) + " must lie in (0, 1]");
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += golden_gamma;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream) : key_(splitmix64(seed ^ splitmix64(stream))) {}

CounterRng::result_type CounterRng::operator()() {
  ++counter_;
  return splitmix64(key_ + counter_ * golden_gamma);
}

double CounterRng::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

std::string_view to_string(NoiseKind kind) { return kind == NoiseKind::poisson ? "poisson" : "none"; }

NoiseKind parse_noise_kind(std::string_view text) {
  if (text == "none") return NoiseKind::none;
  if (text == "poisson") return NoiseKind::poisson;
  throw Error(ErrorKind::schema, "unknown noise kind '" + std::string(text) + "'");
}

double poisson_sample(CounterRng& rng, double mean) {
  if (!(mean > 0.0)) return 0.0;
  std::poisson_distribution<long long> dist(mean);
  return static_cast<double>(dist(rng));
}

std::string_view to_string(MechanismKind kind) {
  switch (kind) {
    case MechanismKind::direct: return "direct";
    case MechanismKind::indirect: return "indirect";
    case MechanismKind::mixed: return "mixed";
  }
  return "unknown";
}

MechanismKind parse_mechanism_kind(std::string_view text) {
  for (auto k : {MechanismKind::direct, MechanismKind::indirect, MechanismKind::mixed})
    if (to_string(k) == text) return k;
  throw Error(ErrorKind::schema, "unknown excitation mechanism '" + std::string(text) + "'");
}

void SyntheticDefect::validate() const {
  system.validate();
  lineshape.validate();
  check_visibility(abs_visibility, "absorption visibility");
  check_visibility(emit_visibility, "emission visibility");
  if (!(brightness > 0.0) || !std::isfinite(brightness)) throw Error(ErrorKind::domain, "brightness must be positive");
  if (!(temperature_k >= 0.0)) throw Error(ErrorKind::domain, "temperature must be non-negative");
  if (mechanism.kind == MechanismKind::mixed && !(mechanism.indirect_weight >= 0.0 && mechanism.indirect_weight <= 1.0))
    throw Error(ErrorKind::domain, "mixed-mechanism weight must lie in [0, 1]");
}

spectra::BandModel SyntheticDefect::band_model() const {
  spectra::BandModel m;
  m.system = system;
  m.lineshape = lineshape;
  m.temperature_k = temperature_k;
  return m;
}

Modulation modulation_for_visibility(double visibility) {
  const double b = 2.0 * visibility / (1.0 + visibility);
  return {1.0 - b, b};
}

double absorption_modulation(const SyntheticDefect& d, double theta_deg) {
  const double v = d.abs_visibility;
  switch (d.mechanism.kind) {
    case MechanismKind::direct: return channel_modulation(theta_deg, d.system.absorption_dipole_deg, v);
    case MechanismKind::indirect: return channel_modulation(theta_deg, d.mechanism.indirect_theta_deg, v);
    case MechanismKind::mixed: {
      const double w = d.mechanism.indirect_weight;
      return (1.0 - w) * channel_modulation(theta_deg, d.system.absorption_dipole_deg, v) +
             w * channel_modulation(theta_deg, d.mechanism.indirect_theta_deg, v);
    }
  }
  return 0.0;
}

polarfit::AngleResolvedSpectrum generate_scan(const SyntheticDefect& defect, polarfit::ScanRole role,
                                              const std::vector<double>& angles_deg,
                                              const std::vector<double>& grid_ev, const NoiseSpec& noise,
                                              const std::optional<RetarderInstrument>& collection) {
  defect.validate();
  if (angles_deg.empty() || grid_ev.empty()) throw Error(ErrorKind::domain, "scan needs angles and a grid");
  const bool emission = role == polarfit::ScanRole::emission_scan;

  const auto band = spectra::render_band(defect.band_model(), grid_ev, spectra::BandDirection::emission);
  const double peak = *std::max_element(band.values().begin(), band.values().end());
  std::vector<double> profile(band.values());
  if (peak > 0.0)
    for (auto& v : profile) v /= peak;

  // apparent emission dipole and visibility per energy sample
  std::vector<double> dipole(grid_ev.size(), defect.system.emission_dipole_deg);
  std::vector<double> vis(grid_ev.size(), defect.emit_visibility);
  if (emission && collection) {
    for (std::size_t k = 0; k < grid_ev.size(); ++k) {
      const double lambda = units::energy_ev_to_wavelength_nm(grid_ev[k]);
      dipole[k] = collection->measured_angle_deg(defect.system.emission_dipole_deg, lambda);
      vis[k] = defect.emit_visibility * collection->visibility(defect.system.emission_dipole_deg, lambda);
    }
  }

  const std::uint64_t tag = emission ? emission_stream_tag : absorption_stream_tag;
  polarfit::AngleResolvedSpectrum scan;
  scan.role = role;
  scan.angles_deg = angles_deg;
  for (std::size_t i = 0; i < angles_deg.size(); ++i) {
    const double theta = angles_deg[i];
    const double abs_mod = emission ? 0.0 : absorption_modulation(defect, theta);
    std::vector<double> counts(profile.size());
    for (std::size_t k = 0; k < profile.size(); ++k) {
      const double mod = emission ? channel_modulation(theta, dipole[k], vis[k]) : abs_mod;
      counts[k] = defect.brightness * profile[k] * mod;
    }
    if (noise.kind == NoiseKind::poisson) {
      CounterRng rng(noise.seed, tag | i);
      for (auto& c : counts) c = poisson_sample(rng, c);
    }
    scan.spectra.emplace_back(spectra::AxisKind::energy_ev, spectra::UnitsKind::counts_per_energy, grid_ev,
                              std::move(counts));
  }
  return scan;
}

photostats::CorrelationTrace generate_g2(double dip_depth, double tau_c_ns, const std::vector<double>& tau_grid_ns,
                                         double mean_coincidences, const NoiseSpec& noise) {
  if (tau_grid_ns.empty()) throw Error(ErrorKind::domain, "g2 grid is empty");
  if (!(dip_depth >= 0.0 && dip_depth <= 1.0)) throw Error(ErrorKind::domain, "dip depth must lie in [0, 1]");
  if (!(tau_c_ns > 0.0)) throw Error(ErrorKind::domain, "correlation time must be positive");
  if (!(mean_coincidences > 0.0)) throw Error(ErrorKind::domain, "mean coincidences must be positive");

  photostats::CorrelationTrace t;
  t.tau_ns = tau_grid_ns;
  t.g2.reserve(tau_grid_ns.size());
  for (double tau : tau_grid_ns) t.g2.push_back(1.0 - dip_depth * std::exp(-std::abs(tau) / tau_c_ns));
  if (noise.kind == NoiseKind::poisson) {
    CounterRng rng(noise.seed, 0);
    t.sigma.reserve(t.g2.size());
    for (auto& g : t.g2) {
      const double counts = poisson_sample(rng, mean_coincidences * g);
      g = counts / mean_coincidences;
      t.sigma.push_back(std::sqrt(std::max(counts, 1.0)) / mean_coincidences);
    }
  }
  return t;
}

photostats::DecayHistogram generate_decay(const DecaySpec& spec, const std::vector<double>& grid,
                                          const NoiseSpec& noise) {
  if (grid.size() < 2) throw Error(ErrorKind::domain, "decay grid needs at least two bins");
  if (!(spec.tau_ns > 0.0) || !(spec.pulse_fwhm_ns > 0.0) || !(spec.total_counts >= 0.0) ||
      !(spec.background_per_bin >= 0.0))
    throw Error(ErrorKind::domain, "invalid decay specification");

  const double sigma = spec.pulse_fwhm_ns / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
  const double tau = spec.tau_ns;
  photostats::DecayHistogram h;
  h.time_ns = grid;
  h.counts.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double dt = i + 1 < grid.size() ? grid[i + 1] - grid[i] : grid[i] - grid[i - 1];
    const double x = grid[i] - spec.pulse_time_ns;
    // Exponentially modified Gaussian density; the exponent is bounded where
    // the erfc factor is not negligible.
    const double cdf = 0.5 * std::erfc(-(x / sigma - sigma / tau) / std::numbers::sqrt2);
    const double density = cdf > 0.0 ? std::exp(0.5 * sigma * sigma / (tau * tau) - x / tau) * cdf / tau : 0.0;
    h.counts[i] = spec.total_counts * density * dt + spec.background_per_bin;
  }
  if (noise.kind == NoiseKind::poisson) {
    CounterRng rng(noise.seed, 0);
    for (auto& c : h.counts) c = poisson_sample(rng, c);
  }
  return h;
}

std::vector<classify::DefectRecord> generate_survey(std::size_t n, const SurveyMix& mix,
                                                    const classify::PhononCatalog& catalog, const NoiseSpec& noise,
                                                    double theta_tolerance_deg) {
  if (n == 0) throw Error(ErrorKind::domain, "survey needs at least one defect");
  catalog.validate();
  if (!(mix.direct_fraction >= 0.0 && mix.direct_fraction <= 1.0))
    throw Error(ErrorKind::domain, "direct fraction must lie in [0, 1]");
  if (!(mix.direct_stokes_min_mev <= mix.direct_stokes_max_mev) ||
      !(mix.indirect_stokes_min_mev <= mix.indirect_stokes_max_mev))
    throw Error(ErrorKind::domain, "Stokes-shift ranges must satisfy lower <= upper");

  const double e_exc = units::wavelength_nm_to_energy_ev(mix.excitation_nm);
  std::vector<classify::DefectRecord> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    CounterRng rng(noise.seed, i);
    const bool direct = rng.uniform() < mix.direct_fraction;
    const double stokes = direct ? uniform_between(rng, mix.direct_stokes_min_mev, mix.direct_stokes_max_mev)
                                 : uniform_between(rng, mix.indirect_stokes_min_mev, mix.indirect_stokes_max_mev);
    const double dtheta = direct ? std::min(90.0, std::abs(standard_normal(rng)) * mix.direct_sigma_deg)
                                 : uniform_between(rng, 0.0, 90.0);
    const double theta_emit = uniform_between(rng, 0.0, 180.0);
    const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
    const double v_emit = uniform_between(rng, mix.emit_visibility_min, mix.emit_visibility_max);
    const double v_abs =
        direct ? std::clamp(v_emit + mix.direct_visibility_scatter * standard_normal(rng), 0.01, 1.0)
               : v_emit * uniform_between(rng, mix.indirect_abs_ratio_min, mix.indirect_abs_ratio_max);

    classify::DefectRecord r;
    r.excitation_energy_ev = e_exc;
    r.zpl_energy_ev = e_exc - stokes / 1000.0;
    r.theta_emit_deg = theta_emit;
    r.theta_abs_deg = units::reduce_axis_deg(theta_emit + sign * dtheta);
    r.emit_visibility = v_emit;
    r.abs_visibility = v_abs;
    out.push_back(classify::complete_record(r, theta_tolerance_deg, catalog));
  }
  return out;
}

double RetarderInstrument::retardance_deg(double wavelength_nm) const {
  return retardance_slope_deg_per_nm * (wavelength_nm - compensated_nm);
}

double RetarderInstrument::measured_angle_deg(double theta_true_deg, double wavelength_nm) const {
  const double x = 2.0 * (theta_true_deg - fast_axis_deg) * units::deg_to_rad;
  const double delta = retardance_deg(wavelength_nm) * units::deg_to_rad;
  const double rel = 0.5 * std::atan2(std::sin(x) * std::cos(delta), std::cos(x)) * units::rad_to_deg;
  const double u = (wavelength_nm - 633.0) / 100.0;
  const double rotation = rotation_offset_deg + rotation_curvature_deg * u * u;
  return units::reduce_axis_deg(rel + fast_axis_deg + rotation);
}

double RetarderInstrument::visibility(double theta_true_deg, double wavelength_nm) const {
  const double x = 2.0 * (theta_true_deg - fast_axis_deg) * units::deg_to_rad;
  const double cd = std::cos(retardance_deg(wavelength_nm) * units::deg_to_rad);
  const double c = std::cos(x);
  const double s = std::sin(x);
  return std::sqrt(c * c + s * s * cd * cd);
}

std::vector<polarfit::CalibrationMeasurement> calibration_sweep(const RetarderInstrument& instrument,
                                                                const std::vector<double>& wavelengths_nm) {
  std::vector<polarfit::CalibrationMeasurement> out;
  for (double lambda : wavelengths_nm) {
    for (double theta : polarfit::CalibrationMap::reference_angles_deg) {
      out.push_back({lambda, theta, instrument.measured_angle_deg(theta, lambda), instrument.visibility(theta, lambda)});
    }
  }
  return out;
}

}  // namespace defectspec::synth

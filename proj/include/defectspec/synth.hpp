#pragma once

// Forward models: synthetic defects and the measurements an analysis run
// would see. Every generator is a pure function of its inputs and seed.

#include <cstdint>
#include <limits>
#include <string_view>
#include <optional>
#include <vector>

#include "defectspec/band.hpp"
#include "defectspec/calibration.hpp"
#include "defectspec/classify.hpp"
#include "defectspec/photostats.hpp"
#include "defectspec/polarfit.hpp"

namespace defectspec::synth {

/// Counter-based generator: output k of stream (seed, stream) is
/// splitmix64(key + (k + 1) * golden), key = splitmix64(seed ^ splitmix64(stream)).
/// Any draw can be reproduced from (seed, stream, k) alone.
class CounterRng {
public:
  using result_type = std::uint64_t;
  static constexpr std::string_view algorithm = "splitmix64-counter";

  CounterRng(std::uint64_t seed, std::uint64_t stream);

  result_type operator()();
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  std::uint64_t counter() const { return counter_; }
  double uniform();  ///< [0, 1) with 53 random bits

private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x);

enum class NoiseKind { none, poisson };

struct NoiseSpec {
  std::uint64_t seed = 0;
  NoiseKind kind = NoiseKind::none;
};

std::string_view to_string(NoiseKind kind);
NoiseKind parse_noise_kind(std::string_view text);

/// Poisson draw with the given mean; 0 for a non-positive mean.
double poisson_sample(CounterRng& rng, double mean);

enum class MechanismKind { direct, indirect, mixed };

std::string_view to_string(MechanismKind kind);
MechanismKind parse_mechanism_kind(std::string_view text);

/// Excitation channel(s) seen by an absorption scan. Direct excites along the
/// system's absorption dipole; indirect along `indirect_theta_deg`; mixed is
/// the incoherent sum with `indirect_weight` on the indirect channel.
struct ExcitationMechanism {
  MechanismKind kind = MechanismKind::direct;
  double indirect_theta_deg = 0.0;
  double indirect_weight = 0.0;
};

struct SyntheticDefect {
  vibronic::VibronicSystem system;
  spectra::LineshapeSpec lineshape;
  double temperature_k = 0.0;
  ExcitationMechanism mechanism;
  double abs_visibility = 1.0;
  double emit_visibility = 1.0;
  double brightness = 1000.0;  ///< expected counts at the brightest (angle, energy) sample

  void validate() const;
  spectra::BandModel band_model() const;
};

/// (A, B) of A + B cos^2 with A + B = 1 and B/(B + 2A) = visibility.
struct Modulation {
  double offset;
  double amplitude;
};
Modulation modulation_for_visibility(double visibility);

struct RetarderInstrument {
  double fast_axis_deg = 20.0;
  double compensated_nm = 600.0;
  double retardance_slope_deg_per_nm = 12.0 / 140.0;
  double rotation_offset_deg = 1.5;
  double rotation_curvature_deg = 2.0;  ///< times ((lambda - 633)/100)^2

  double retardance_deg(double wavelength_nm) const;
  double measured_angle_deg(double theta_true_deg, double wavelength_nm) const;
  double visibility(double theta_true_deg, double wavelength_nm) const;
};

/// Expected (or Poisson-sampled) counts I(theta, E) = band(E) * modulation(theta).
/// Each angle draws from its own stream (seed, angle index, role). An emission
/// scan recorded through `collection` sees, at each energy, the dipole angle and
/// visibility that instrument produces at that wavelength.
polarfit::AngleResolvedSpectrum generate_scan(const SyntheticDefect& defect, polarfit::ScanRole role,
                                              const std::vector<double>& angles_deg,
                                              const std::vector<double>& grid_ev, const NoiseSpec& noise,
                                              const std::optional<RetarderInstrument>& collection = {});

/// Noiseless modulation of an absorption scan at angle theta (sum over channels).
double absorption_modulation(const SyntheticDefect& defect, double theta_deg);

/// g2 trace with baseline `mean_coincidences` per delay bin; with Poisson
/// noise the per-point sigma is filled in.
photostats::CorrelationTrace generate_g2(double dip_depth, double tau_c_ns, const std::vector<double>& tau_grid_ns,
                                         double mean_coincidences, const NoiseSpec& noise);

struct DecaySpec {
  double tau_ns = 3.0;
  double total_counts = 1e5;        ///< expected signal counts over the grid
  double pulse_time_ns = 5.0;
  double pulse_fwhm_ns = 0.35;
  double background_per_bin = 0.0;
};

/// Decay histogram: exponential convolved with a Gaussian excitation pulse.
photostats::DecayHistogram generate_decay(const DecaySpec& spec, const std::vector<double>& time_grid_ns,
                                          const NoiseSpec& noise);

struct SurveyMix {
  double direct_fraction = 0.4;
  double direct_sigma_deg = 3.0;  ///< half-normal width of direct delta_theta
  double direct_stokes_min_mev = 75.0;
  double direct_stokes_max_mev = 203.0;
  double indirect_stokes_min_mev = 203.0;
  double indirect_stokes_max_mev = 655.0;
  double excitation_nm = 532.0;
  double emit_visibility_min = 0.6;
  double emit_visibility_max = 0.95;
  double direct_visibility_scatter = 0.03;
  double indirect_abs_ratio_min = 0.3;
  double indirect_abs_ratio_max = 0.9;
};

/// Population of surveyed ZPLs; record i draws only from stream (seed, i).
std::vector<classify::DefectRecord> generate_survey(std::size_t n_defects, const SurveyMix& mix,
                                                    const classify::PhononCatalog& catalog, const NoiseSpec& noise,
                                                    double theta_tolerance_deg = classify::default_theta_tolerance_deg);

/// Collection path modeled as a linear retarder (fast axis `fast_axis_deg`,
/// retardance linear in wavelength, zero at `compensated_nm`) followed by a
/// wavelength-dependent rotation.
/// The six-angle calibration sweep of `instrument` at each wavelength.
std::vector<polarfit::CalibrationMeasurement> calibration_sweep(const RetarderInstrument& instrument,
                                                                const std::vector<double>& wavelengths_nm);

}  // namespace defectspec::synth

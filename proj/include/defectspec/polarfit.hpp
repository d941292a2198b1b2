#pragma once

// Polarization analysis of angle-resolved spectra: the cos^2 dipole model
// A + B cos^2(theta - theta0), its visibility, and the per-energy-bin fits.

#include <optional>
#include <span>
#include <vector>

#include "defectspec/spectrum.hpp"

namespace defectspec::polarfit {

enum class ScanRole { absorption_scan, emission_scan };

std::string_view to_string(ScanRole role);
ScanRole parse_scan_role(std::string_view text);

/// One spectrum per polarizer (or half-wave-plate derived) angle on a shared
/// axis. Values are photon counts per axis sample.
struct AngleResolvedSpectrum {
  std::vector<double> angles_deg;
  std::vector<spectra::Spectrum> spectra;
  ScanRole role = ScanRole::emission_scan;

  /// Throws ErrorKind::domain on fewer than 6 distinct angles, duplicate
  /// angles, or spectra that do not share one axis.
  void validate() const;
};

struct Cos2Fit {
  double offset_a = 0.0;
  double amplitude_b = 0.0;
  double theta0_deg = 0.0;  ///< in [0,180); meaningless when degenerate
  double residual_rms = 0.0;
  bool degenerate = false;  ///< B not distinguishable from 0 at 2 sigma

  double amplitude_b_sigma = 0.0;
  double theta0_sigma_deg = 0.0;
  double chi2 = 0.0;
  std::size_t samples = 0;
  bool offset_clamped = false;  ///< refit under A = 0

  std::optional<double> theta() const {
    if (degenerate) return std::nullopt;
    return theta0_deg;
  }
};

/// Closed-form weighted least squares in the double-angle basis
/// a + b cos 2t + c sin 2t. B = 2 sqrt(b^2 + c^2), A = a - B/2, theta0 =
/// atan2(c, b)/2. A negative offset triggers a refit of B cos^2(t - theta0)
/// alone. `weights` are inverse variances; when empty, Poisson weights
/// 1/max(y, 1) are used.
///
/// Throws ErrorKind::domain with fewer than 6 samples and
/// ErrorKind::degenerate_design when fewer than 4 distinct angles mod 180
/// remain (aliased design).
Cos2Fit fit_cos2(std::span<const double> angles_deg, std::span<const double> intensities,
                 std::span<const double> weights = {});

/// Model value A + B cos^2(theta - theta0).
double evaluate(const Cos2Fit& fit, double theta_deg);

struct Visibility {
  double value = 0.0;
  bool degenerate = false;
};

/// B / (B + 2A); 0 with the flag set for a degenerate fit.
Visibility visibility(const Cos2Fit& fit);

struct SpectrallyResolvedPolarization {
  std::vector<double> energies_ev;   ///< mean sample energy of each bin, ascending
  std::vector<double> total_counts;  ///< summed over angles
  std::vector<Cos2Fit> fits;
  std::vector<double> visibility;

  std::size_t size() const { return energies_ev.size(); }
  std::optional<double> theta_deg(std::size_t bin) const { return fits[bin].theta(); }
  /// Index of the bin with the largest total count.
  std::size_t brightest_bin() const;
  /// Index of the bin whose energy is closest to `energy_ev`.
  std::size_t bin_near(double energy_ev) const;
};

/// Sums counts into consecutive energy bins of width `bin_width_ev` (a
/// wavelength axis is mapped per sample through E = hc/lambda) and fits each
/// bin with Poisson weights. Bins are independent; `threads` > 1 splits them
/// across workers with bit-identical results.
SpectrallyResolvedPolarization fit_spectrally_resolved(const AngleResolvedSpectrum& scan, double bin_width_ev,
                                                       unsigned threads = 1);

/// Fit of the counts summed over the whole axis at each angle.
Cos2Fit fit_spectrally_averaged(const AngleResolvedSpectrum& scan);

/// Sum over angles: the unpolarized spectrum.
spectra::Spectrum unpolarized_spectrum(const AngleResolvedSpectrum& scan);

/// Folded dipole misalignment |a - b| reduced to [0, 90].
double delta_theta(double theta_abs_deg, double theta_emit_deg);

}  // namespace defectspec::polarfit

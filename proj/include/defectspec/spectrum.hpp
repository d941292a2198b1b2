#pragma once

// Sampled intensity on a strictly monotone axis, plus the unit conversions
// that move a measured spectrum between wavelength, energy and Stokes-shift
// axes.

#include <string_view>
#include <vector>

namespace defectspec::spectra {

enum class AxisKind { wavelength_nm, energy_ev, stokes_mev };
enum class UnitsKind { counts_per_wavelength, counts_per_energy, band_density };

std::string_view to_string(AxisKind kind);
std::string_view to_string(UnitsKind kind);
AxisKind parse_axis_kind(std::string_view text);
UnitsKind parse_units_kind(std::string_view text);

class Spectrum {
public:
  /// Throws ErrorKind::domain unless the axis is strictly monotone, the
  /// values are finite and non-negative, and the lengths match.
  Spectrum(AxisKind axis_kind, UnitsKind units_kind, std::vector<double> axis, std::vector<double> values);

  AxisKind axis_kind() const noexcept { return axis_kind_; }
  UnitsKind units_kind() const noexcept { return units_kind_; }
  const std::vector<double>& axis() const noexcept { return axis_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return axis_.size(); }
  bool ascending() const noexcept { return axis_.size() < 2 || axis_[1] > axis_[0]; }

  /// Trapezoidal integral over the axis (positive for either orientation).
  double integral() const;

  /// Linear interpolation; zero outside the sampled range.
  double interpolate(double x) const;

  Spectrum scaled(double factor) const;

private:
  AxisKind axis_kind_;
  UnitsKind units_kind_;
  std::vector<double> axis_;
  std::vector<double> values_;
};

/// Uniform grid start, start + step, ... up to and including stop (within step/1000).
std::vector<double> uniform_grid(double start, double stop, double step);

/// Grid symmetric about `center`: center +/- k*step for k = 0..half_count.
std::vector<double> symmetric_grid(double center, double half_span, double step);

/// counts per nm -> counts per eV: E = hc/lambda, values *= lambda^2/hc,
/// axis re-sorted ascending in energy.
Spectrum wavelength_counts_to_energy_counts(const Spectrum& s);

/// Inverse of wavelength_counts_to_energy_counts.
Spectrum energy_counts_to_wavelength_counts(const Spectrum& s);

/// Luminescence (counts per eV) -> emission band: values *= E^-3.
Spectrum luminescence_to_emission_band(const Spectrum& s);

/// Reflect a band about the ZPL: axis -> 2 E_zpl - axis, re-sorted ascending.
Spectrum mirror_band(const Spectrum& band, double zpl_energy_ev);

/// Energy axis -> Stokes-shift axis (E - E_zpl) in meV; values untouched.
Spectrum to_stokes_axis(const Spectrum& band, double zpl_energy_ev);

}  // namespace defectspec::spectra

#pragma once

// Wavelength- and polarization-dependent angle calibration of the
// collection path: a table of angle errors (measured minus true, in the
// polarization-angle space) and instrument visibilities over wavelength and
// the six reference angles 0, 30, ..., 150 degrees.

#include <array>
#include <vector>

namespace defectspec::polarfit {

struct CalibrationMeasurement {
  double wavelength_nm;
  double theta_true_deg;
  double theta_measured_deg;
  double visibility;
};

struct Interpolated {
  double value;
  bool clamped;  ///< wavelength fell outside the table and was clamped
};

class CalibrationMap {
public:
  static constexpr std::array<double, 6> reference_angles_deg{0.0, 30.0, 60.0, 90.0, 120.0, 150.0};

  CalibrationMap(std::vector<double> wavelengths_nm, std::vector<double> angle_error_deg,
                 std::vector<double> instrument_visibility);

  const std::vector<double>& wavelengths_nm() const { return wavelengths_; }
  /// Row-major [wavelength][reference angle].
  const std::vector<double>& angle_error_deg() const { return error_; }
  const std::vector<double>& instrument_visibility() const { return visibility_; }

  /// Bilinear in wavelength and true angle; periodic in angle with period 180.
  Interpolated angle_error_at(double wavelength_nm, double theta_true_deg) const;
  Interpolated visibility_at(double wavelength_nm, double theta_true_deg) const;

private:
  Interpolated interpolate(const std::vector<double>& table, double wavelength_nm, double theta_deg) const;

  std::vector<double> wavelengths_;
  std::vector<double> error_;
  std::vector<double> visibility_;
};

/// Tabulates errors (wrapped into [-90, 90)) and visibilities. Throws
/// ErrorKind::incomplete_calibration unless every wavelength carries all six
/// reference angles, and ErrorKind::domain on fewer than two wavelengths,
/// duplicate entries, or visibilities outside (0, 1]. With `hwp_angles` the
/// measured column holds half-wave-plate angles and is doubled first.
CalibrationMap build_calibration(const std::vector<CalibrationMeasurement>& measurements, bool hwp_angles = false);

struct CalibratedAngle {
  double theta_true_deg;
  bool clamped;
  int iterations;
};

/// Inverts theta_measured = theta_true + error(lambda, theta_true) by damped
/// fixed-point iteration (damping 0.5). Throws ErrorKind::calibration after 50
/// iterations without convergence.
CalibratedAngle apply_calibration(double theta_measured_deg, double wavelength_nm, const CalibrationMap& map);

/// min(1, v_measured / v_instrument). Throws ErrorKind::unreliable_correction
/// when the interpolated instrument visibility is <= 0.05.
double correct_visibility(double v_measured, double wavelength_nm, double theta_true_deg, const CalibrationMap& map);

}  // namespace defectspec::polarfit

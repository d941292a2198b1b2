#include "defectspec/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "defectspec/error.hpp"
#include "defectspec/units.hpp"

namespace defectspec::polarfit {

namespace {

constexpr double angle_step_deg = 30.0;
constexpr int max_fixed_point_iterations = 50;
constexpr double fixed_point_damping = 0.5;
constexpr double fixed_point_tolerance_deg = 1e-10;
constexpr double min_instrument_visibility = 0.05;

int reference_index(double theta_deg) {
  const double r = units::reduce_axis_deg(theta_deg);
  for (std::size_t j = 0; j < CalibrationMap::reference_angles_deg.size(); ++j) {
    const double d = std::abs(units::wrap_axis_difference_deg(r - CalibrationMap::reference_angles_deg[j]));
    if (d < 1e-6) return static_cast<int>(j);
  }
  return -1;
}

}  // namespace

CalibrationMap::CalibrationMap(std::vector<double> wavelengths_nm, std::vector<double> angle_error_deg,
                               std::vector<double> instrument_visibility)
    : wavelengths_(std::move(wavelengths_nm)),
      error_(std::move(angle_error_deg)),
      visibility_(std::move(instrument_visibility)) {
  const std::size_t cells = wavelengths_.size() * reference_angles_deg.size();
  if (wavelengths_.size() < 2) throw Error(ErrorKind::domain, "calibration needs at least two wavelengths");
  if (error_.size() != cells || visibility_.size() != cells)
    throw Error(ErrorKind::domain, "calibration tables do not match the grid");
  for (std::size_t i = 1; i < wavelengths_.size(); ++i) {
    if (!(wavelengths_[i] > wavelengths_[i - 1]))
      throw Error(ErrorKind::domain, "calibration wavelengths must be strictly increasing");
  }
  for (double v : visibility_) {
    if (!(v > 0.0 && v <= 1.0)) throw Error(ErrorKind::domain, "instrument visibilities must lie in (0, 1]");
  }
  for (double e : error_) {
    if (!std::isfinite(e)) throw Error(ErrorKind::domain, "non-finite calibration error");
  }
}

Interpolated CalibrationMap::interpolate(const std::vector<double>& table, double wavelength_nm,
                                         double theta_deg) const {
  const std::size_t na = reference_angles_deg.size();
  bool clamped = false;
  double lambda = wavelength_nm;
  if (lambda < wavelengths_.front()) {
    lambda = wavelengths_.front();
    clamped = true;
  } else if (lambda > wavelengths_.back()) {
    lambda = wavelengths_.back();
    clamped = true;
  }
  auto it = std::upper_bound(wavelengths_.begin(), wavelengths_.end(), lambda);
  std::size_t i1 = static_cast<std::size_t>(it - wavelengths_.begin());
  if (i1 >= wavelengths_.size()) i1 = wavelengths_.size() - 1;
  if (i1 == 0) i1 = 1;
  const std::size_t i0 = i1 - 1;
  const double u = (lambda - wavelengths_[i0]) / (wavelengths_[i1] - wavelengths_[i0]);

  const double t = units::reduce_axis_deg(theta_deg) / angle_step_deg;
  auto j0 = static_cast<std::size_t>(std::floor(t));
  const double v = t - static_cast<double>(j0);
  j0 %= na;
  const std::size_t j1 = (j0 + 1) % na;

  const double f00 = table[i0 * na + j0], f01 = table[i0 * na + j1];
  const double f10 = table[i1 * na + j0], f11 = table[i1 * na + j1];
  const double value = (1 - u) * ((1 - v) * f00 + v * f01) + u * ((1 - v) * f10 + v * f11);
  return {value, clamped};
}

Interpolated CalibrationMap::angle_error_at(double wavelength_nm, double theta_true_deg) const {
  return interpolate(error_, wavelength_nm, theta_true_deg);
}

Interpolated CalibrationMap::visibility_at(double wavelength_nm, double theta_true_deg) const {
  return interpolate(visibility_, wavelength_nm, theta_true_deg);
}

CalibrationMap build_calibration(const std::vector<CalibrationMeasurement>& measurements, bool hwp_angles) {
  const std::size_t na = CalibrationMap::reference_angles_deg.size();
  std::map<double, std::vector<int>> seen;  // wavelength -> filled flags
  std::map<double, std::vector<double>> err, vis;
  for (const auto& m : measurements) {
    if (!(std::isfinite(m.wavelength_nm) && m.wavelength_nm > 0.0))
      throw Error(ErrorKind::domain, "calibration wavelength must be positive");
    if (!(m.visibility > 0.0 && m.visibility <= 1.0))
      throw Error(ErrorKind::domain, "calibration visibility must lie in (0, 1]");
    const int j = reference_index(m.theta_true_deg);
    if (j < 0) {
      throw Error(ErrorKind::domain,
                  "calibration angle " + std::to_string(m.theta_true_deg) + " is not one of the reference angles");
    }
    auto& flags = seen[m.wavelength_nm];
    if (flags.empty()) {
      flags.assign(na, 0);
      err[m.wavelength_nm].assign(na, 0.0);
      vis[m.wavelength_nm].assign(na, 0.0);
    }
    if (flags[static_cast<std::size_t>(j)])
      throw Error(ErrorKind::domain, "duplicate calibration entry at " + std::to_string(m.wavelength_nm) + " nm");
    flags[static_cast<std::size_t>(j)] = 1;
    const double measured = hwp_angles ? 2.0 * m.theta_measured_deg : m.theta_measured_deg;
    err[m.wavelength_nm][static_cast<std::size_t>(j)] = units::wrap_axis_difference_deg(measured - m.theta_true_deg);
    vis[m.wavelength_nm][static_cast<std::size_t>(j)] = m.visibility;
  }
  if (seen.size() < 2) throw Error(ErrorKind::domain, "calibration needs at least two wavelengths");

  std::vector<double> wavelengths, error_table, vis_table;
  for (const auto& [lambda, flags] : seen) {
    for (std::size_t j = 0; j < na; ++j) {
      if (!flags[j]) {
        throw Error(ErrorKind::incomplete_calibration,
                    "missing reference angle " + std::to_string(CalibrationMap::reference_angles_deg[j]) + " at " +
                        std::to_string(lambda) + " nm");
      }
    }
    wavelengths.push_back(lambda);
    error_table.insert(error_table.end(), err[lambda].begin(), err[lambda].end());
    vis_table.insert(vis_table.end(), vis[lambda].begin(), vis[lambda].end());
  }
  return CalibrationMap(std::move(wavelengths), std::move(error_table), std::move(vis_table));
}

CalibratedAngle apply_calibration(double theta_measured_deg, double wavelength_nm, const CalibrationMap& map) {
  if (!std::isfinite(theta_measured_deg)) throw Error(ErrorKind::domain, "measured angle must be finite");
  const Interpolated first = map.angle_error_at(wavelength_nm, theta_measured_deg);
  double theta = units::reduce_axis_deg(theta_measured_deg - first.value);
  for (int it = 1; it <= max_fixed_point_iterations; ++it) {
    const double predicted = theta + map.angle_error_at(wavelength_nm, theta).value;
    const double residual = units::wrap_axis_difference_deg(theta_measured_deg - predicted);
    if (std::abs(residual) < fixed_point_tolerance_deg) return {units::reduce_axis_deg(theta), first.clamped, it};
    theta = units::reduce_axis_deg(theta + fixed_point_damping * residual);
  }
  throw Error(ErrorKind::calibration, "calibration inversion did not converge",
              "theta_measured=" + std::to_string(theta_measured_deg) + " lambda=" + std::to_string(wavelength_nm));
}

double correct_visibility(double v_measured, double wavelength_nm, double theta_true_deg, const CalibrationMap& map) {
  const double v_inst = map.visibility_at(wavelength_nm, theta_true_deg).value;
  if (v_inst <= min_instrument_visibility) {
    throw Error(ErrorKind::unreliable_correction, "instrument visibility too low for correction",
                "v_instrument=" + std::to_string(v_inst));
  }
  return std::min(1.0, v_measured / v_inst);
}

}  // namespace defectspec::polarfit

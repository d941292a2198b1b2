#include "defectspec/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "defectspec/error.hpp"
#include "defectspec/kernels/kernels.hpp"
#include "defectspec/units.hpp"

namespace defectspec {

double units::reduce_axis_deg(double theta_deg) {
  double r = std::fmod(theta_deg, 180.0);
  if (r < 0.0) r += 180.0;
  if (r >= 180.0) r -= 180.0;
  return r;
}

double units::wrap_axis_difference_deg(double diff_deg) {
  double r = std::fmod(diff_deg + 90.0, 180.0);
  if (r < 0.0) r += 180.0;
  return r - 90.0;
}

double units::wavelength_nm_to_energy_ev(double lambda_nm) {
  if (!(std::isfinite(lambda_nm) && lambda_nm > 0.0)) throw Error(ErrorKind::domain, "wavelength must be positive");
  return hc_ev_nm / lambda_nm;
}

double units::energy_ev_to_wavelength_nm(double energy_ev) {
  if (!(std::isfinite(energy_ev) && energy_ev > 0.0)) throw Error(ErrorKind::domain, "energy must be positive");
  return hc_ev_nm / energy_ev;
}

}  // namespace defectspec

namespace defectspec::spectra {

std::string_view to_string(AxisKind kind) {
  switch (kind) {
    case AxisKind::wavelength_nm: return "wavelength_nm";
    case AxisKind::energy_ev: return "energy_ev";
    case AxisKind::stokes_mev: return "stokes_mev";
  }
  return "unknown";
}

std::string_view to_string(UnitsKind kind) {
  switch (kind) {
    case UnitsKind::counts_per_wavelength: return "counts_per_wavelength";
    case UnitsKind::counts_per_energy: return "counts_per_energy";
    case UnitsKind::band_density: return "band_density";
  }
  return "unknown";
}

AxisKind parse_axis_kind(std::string_view text) {
  for (AxisKind k : {AxisKind::wavelength_nm, AxisKind::energy_ev, AxisKind::stokes_mev})
    if (to_string(k) == text) return k;
  throw Error(ErrorKind::schema, "unknown axis kind '" + std::string(text) + "'");
}

UnitsKind parse_units_kind(std::string_view text) {
  for (UnitsKind k : {UnitsKind::counts_per_wavelength, UnitsKind::counts_per_energy, UnitsKind::band_density})
    if (to_string(k) == text) return k;
  throw Error(ErrorKind::schema, "unknown units kind '" + std::string(text) + "'");
}

Spectrum::Spectrum(AxisKind axis_kind, UnitsKind units_kind, std::vector<double> axis, std::vector<double> values)
    : axis_kind_(axis_kind), units_kind_(units_kind), axis_(std::move(axis)), values_(std::move(values)) {
  if (axis_.size() != values_.size()) throw Error(ErrorKind::domain, "axis and values differ in length");
  if (axis_.empty()) throw Error(ErrorKind::domain, "spectrum is empty");
  for (std::size_t i = 0; i < axis_.size(); ++i) {
    if (!std::isfinite(axis_[i])) throw Error(ErrorKind::domain, "non-finite axis sample");
    if (!(std::isfinite(values_[i]) && values_[i] >= 0.0))
      throw Error(ErrorKind::domain, "spectrum values must be finite and non-negative");
  }
  if (axis_.size() >= 2) {
    const bool up = axis_[1] > axis_[0];
    for (std::size_t i = 1; i < axis_.size(); ++i) {
      if (up ? !(axis_[i] > axis_[i - 1]) : !(axis_[i] < axis_[i - 1]))
        throw Error(ErrorKind::domain, "spectrum axis must be strictly monotone");
    }
  }
}

double Spectrum::integral() const {
  double s = 0.0;
  for (std::size_t i = 1; i < axis_.size(); ++i) s += 0.5 * (values_[i] + values_[i - 1]) * (axis_[i] - axis_[i - 1]);
  return std::abs(s);
}

double Spectrum::interpolate(double x) const {
  const std::size_t n = axis_.size();
  if (n == 1) return x == axis_[0] ? values_[0] : 0.0;
  const bool up = ascending();
  const double lo = up ? axis_.front() : axis_.back();
  const double hi = up ? axis_.back() : axis_.front();
  if (x < lo || x > hi) return 0.0;
  std::size_t j;
  if (up) {
    j = static_cast<std::size_t>(std::upper_bound(axis_.begin(), axis_.end(), x) - axis_.begin());
  } else {
    j = static_cast<std::size_t>(
        std::upper_bound(axis_.begin(), axis_.end(), x, [](double a, double b) { return a > b; }) - axis_.begin());
  }
  if (j == 0) return values_[0];
  if (j >= n) return values_[n - 1];
  const double x0 = axis_[j - 1], x1 = axis_[j];
  const double t = (x - x0) / (x1 - x0);
  return values_[j - 1] + t * (values_[j] - values_[j - 1]);
}

Spectrum Spectrum::scaled(double factor) const {
  std::vector<double> v = values_;
  for (double& e : v) e *= factor;
  return Spectrum(axis_kind_, units_kind_, axis_, std::move(v));
}

std::vector<double> uniform_grid(double start, double stop, double step) {
  if (!(step > 0.0) || !(stop >= start)) throw Error(ErrorKind::domain, "invalid grid specification");
  const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-3)) + 1;
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i) g[i] = start + static_cast<double>(i) * step;
  return g;
}

std::vector<double> symmetric_grid(double center, double half_span, double step) {
  if (!(step > 0.0) || !(half_span > 0.0)) throw Error(ErrorKind::domain, "invalid grid specification");
  const auto half = static_cast<long>(std::floor(half_span / step + 1e-3));
  std::vector<double> g;
  g.reserve(static_cast<std::size_t>(2 * half + 1));
  for (long k = -half; k <= half; ++k) g.push_back(center + static_cast<double>(k) * step);
  return g;
}

namespace {

void require_axis(const Spectrum& s, AxisKind kind, const char* what) {
  if (s.axis_kind() != kind) throw Error(ErrorKind::domain, std::string(what) + ": wrong axis kind");
}

void require_units(const Spectrum& s, UnitsKind kind, const char* what) {
  if (s.units_kind() != kind) throw Error(ErrorKind::domain, std::string(what) + ": wrong units kind");
}

void require_positive_axis(const Spectrum& s, const char* what) {
  for (double x : s.axis())
    if (!(x > 0.0)) throw Error(ErrorKind::domain, std::string(what) + ": axis must be strictly positive");
}

// Reciprocal axis transform (x -> c/x), values scaled by factor * x^power,
// result re-sorted ascending.
Spectrum reciprocal_transform(const Spectrum& s, AxisKind out_axis, UnitsKind out_units, int power, double factor,
                              double c) {
  std::vector<double> values = s.values();
  kernels::scale_by_axis_power(s.axis(), power, factor, values);
  std::vector<double> axis(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) axis[i] = c / s.axis()[i];
  if (axis.size() > 1 && axis[1] < axis[0]) {
    std::reverse(axis.begin(), axis.end());
    std::reverse(values.begin(), values.end());
  }
  return Spectrum(out_axis, out_units, std::move(axis), std::move(values));
}

}  // namespace

Spectrum wavelength_counts_to_energy_counts(const Spectrum& s) {
  require_axis(s, AxisKind::wavelength_nm, "wavelength_counts_to_energy_counts");
  require_units(s, UnitsKind::counts_per_wavelength, "wavelength_counts_to_energy_counts");
  require_positive_axis(s, "wavelength_counts_to_energy_counts");
  return reciprocal_transform(s, AxisKind::energy_ev, UnitsKind::counts_per_energy, 2, 1.0 / units::hc_ev_nm,
                              units::hc_ev_nm);
}

Spectrum energy_counts_to_wavelength_counts(const Spectrum& s) {
  require_axis(s, AxisKind::energy_ev, "energy_counts_to_wavelength_counts");
  require_units(s, UnitsKind::counts_per_energy, "energy_counts_to_wavelength_counts");
  require_positive_axis(s, "energy_counts_to_wavelength_counts");
  return reciprocal_transform(s, AxisKind::wavelength_nm, UnitsKind::counts_per_wavelength, 2,
                              1.0 / units::hc_ev_nm, units::hc_ev_nm);
}

Spectrum luminescence_to_emission_band(const Spectrum& s) {
  require_axis(s, AxisKind::energy_ev, "luminescence_to_emission_band");
  require_units(s, UnitsKind::counts_per_energy, "luminescence_to_emission_band");
  require_positive_axis(s, "luminescence_to_emission_band");
  std::vector<double> values = s.values();
  kernels::scale_by_axis_power(s.axis(), -3, 1.0, values);
  return Spectrum(AxisKind::energy_ev, UnitsKind::band_density, s.axis(), std::move(values));
}

Spectrum mirror_band(const Spectrum& band, double zpl_energy_ev) {
  require_axis(band, AxisKind::energy_ev, "mirror_band");
  require_units(band, UnitsKind::band_density, "mirror_band");
  std::vector<double> axis(band.size());
  for (std::size_t i = 0; i < band.size(); ++i) axis[i] = 2.0 * zpl_energy_ev - band.axis()[i];
  std::vector<double> values = band.values();
  if (axis.size() > 1 && axis[1] < axis[0]) {
    std::reverse(axis.begin(), axis.end());
    std::reverse(values.begin(), values.end());
  }
  return Spectrum(AxisKind::energy_ev, UnitsKind::band_density, std::move(axis), std::move(values));
}

Spectrum to_stokes_axis(const Spectrum& band, double zpl_energy_ev) {
  require_axis(band, AxisKind::energy_ev, "to_stokes_axis");
  std::vector<double> axis(band.size());
  for (std::size_t i = 0; i < band.size(); ++i) axis[i] = (band.axis()[i] - zpl_energy_ev) * 1000.0;
  return Spectrum(AxisKind::stokes_mev, band.units_kind(), std::move(axis), band.values());
}

}  // namespace defectspec::spectra

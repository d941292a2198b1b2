#include "defectspec/band.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "defectspec/error.hpp"
#include "defectspec/kernels/kernels.hpp"

namespace defectspec::spectra {

namespace {

constexpr double fwhm_to_sigma = 0.42466090014400953;  // 1 / (2 sqrt(2 ln 2))
constexpr double min_samples_per_fwhm = 4.0;

using Direction = BandDirection;

void check_grid(const BandModel& model, const std::vector<double>& grid, Direction dir) {
  if (grid.size() < 2) throw Error(ErrorKind::domain, "band grid needs at least two samples");
  const auto [lo_it, hi_it] = std::minmax_element(grid.begin(), grid.end());
  double max_step = 0.0;
  for (std::size_t i = 1; i < grid.size(); ++i) max_step = std::max(max_step, std::abs(grid[i] - grid[i - 1]));

  double max_phonon = 0.0;
  for (const auto& m : model.system.modes) max_phonon = std::max(max_phonon, m.energy_mev);
  const double zpl = model.system.zpl_energy_ev;
  const double reach = 5.0 * max_phonon * std::max(1.0, model.system.total_huang_rhys()) / 1000.0;
  const double margin = 3.0 * model.lineshape.zpl_fwhm_mev / 1000.0;
  const double slack = 1e-9;
  const bool spans = dir == Direction::emission
                         ? (*lo_it <= zpl - reach + slack && *hi_it >= zpl + margin - slack)
                         : (*lo_it <= zpl - margin + slack && *hi_it >= zpl + reach - slack);
  if (!spans) {
    throw Error(ErrorKind::domain, "band grid does not span the required energy range",
                "grid=[" + std::to_string(*lo_it) + "," + std::to_string(*hi_it) + "]");
  }
  if (max_step * min_samples_per_fwhm > model.lineshape.zpl_fwhm_mev / 1000.0 * (1.0 + 1e-9)) {
    throw Error(ErrorKind::sampling, "grid too coarse to resolve the zero-phonon line",
                "max_step_ev=" + std::to_string(max_step));
  }
}

}  // namespace

Spectrum render_band(const BandModel& model, const std::vector<double>& grid, BandDirection dir) {
  model.validate();
  if (grid.empty()) throw Error(ErrorKind::domain, "band grid is empty");
  const double sign = dir == Direction::emission ? -1.0 : 1.0;
  std::vector<kernels::Line> lines;
  for (const auto& vl : band_lines(model)) {
    const double fwhm_ev = model.lineshape.fwhm_mev(vl.phonon_count) / 1000.0;
    const double width = model.lineshape.kind == LineshapeKind::gaussian ? fwhm_ev * fwhm_to_sigma : 0.5 * fwhm_ev;
    lines.push_back({model.system.zpl_energy_ev + sign * vl.offset_mev / 1000.0,
                     model.oscillator_strength * vl.weight, width});
  }
  std::vector<double> values(grid.size(), 0.0);
  if (model.lineshape.kind == LineshapeKind::gaussian) {
    kernels::add_gaussians(grid, lines, values);
  } else {
    kernels::add_lorentzians(grid, lines, values);
  }
  return Spectrum(AxisKind::energy_ev, UnitsKind::band_density, grid, std::move(values));
}

namespace {

Spectrum synthesize(const BandModel& model, const std::vector<double>& grid, Direction dir) {
  model.validate();
  check_grid(model, grid, dir);
  return render_band(model, grid, dir);
}

}  // namespace

void LineshapeSpec::validate() const {
  if (!(zpl_fwhm_mev > 0.0) || !(sideband_fwhm_growth_mev > 0.0))
    throw Error(ErrorKind::domain, "lineshape widths must be positive");
}

void BandModel::validate() const {
  system.validate();
  lineshape.validate();
  if (!(oscillator_strength > 0.0)) throw Error(ErrorKind::domain, "oscillator strength must be positive");
  if (!(temperature_k >= 0.0)) throw Error(ErrorKind::domain, "temperature must be non-negative");
}

std::vector<vibronic::VibronicLine> band_lines(const BandModel& model) {
  return vibronic::combined_lines(model.system.modes, model.temperature_k, model.truncation_tolerance);
}

Spectrum synthesize_emission_band(const BandModel& model, const std::vector<double>& grid_ev) {
  return synthesize(model, grid_ev, Direction::emission);
}

Spectrum synthesize_absorption_band(const BandModel& model, const std::vector<double>& grid_ev) {
  return synthesize(model, grid_ev, Direction::absorption);
}

}  // namespace defectspec::spectra

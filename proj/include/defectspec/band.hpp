#pragma once

#include <vector>

#include "defectspec/spectrum.hpp"
#include "defectspec/vibronic.hpp"

namespace defectspec::spectra {

enum class LineshapeKind { gaussian, lorentzian };

/// Profile of the n-phonon line: FWHM = zpl_fwhm + n * sideband_fwhm_growth.
struct LineshapeSpec {
  LineshapeKind kind = LineshapeKind::gaussian;
  double zpl_fwhm_mev = 10.0;
  double sideband_fwhm_growth_mev = 10.0;

  double fwhm_mev(int phonon_count) const { return zpl_fwhm_mev + phonon_count * sideband_fwhm_growth_mev; }
  void validate() const;
};

struct BandModel {
  vibronic::VibronicSystem system;
  LineshapeSpec lineshape;
  double oscillator_strength = 1.0;  ///< W0, the integrated band
  double temperature_k = 0.0;
  double truncation_tolerance = 1e-9;

  void validate() const;
};

/// The delta-line content of the band before broadening.
std::vector<vibronic::VibronicLine> band_lines(const BandModel& model);

/// Emission band: lines at E_zpl - offset, integrated weight W0.
/// Throws ErrorKind::domain if the grid does not span
/// [E_zpl - 5 max(hw) max(1,S), E_zpl + 3 fwhm_zpl], and ErrorKind::sampling
/// if the grid has fewer than 4 samples per ZPL FWHM.
Spectrum synthesize_emission_band(const BandModel& model, const std::vector<double>& grid_ev);

/// Absorption band: lines at E_zpl + offset (the mirror image at T = 0).
Spectrum synthesize_absorption_band(const BandModel& model, const std::vector<double>& grid_ev);

enum class BandDirection { emission, absorption };

/// Same sum of broadened lines without the span and sampling checks; used by
/// forward models that only need part of the band.
Spectrum render_band(const BandModel& model, const std::vector<double>& grid_ev, BandDirection direction);

}  // namespace defectspec::spectra

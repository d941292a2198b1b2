#pragma once

#include <vector>

#include "defectspec/spectrum.hpp"

namespace defectspec::spectra {

struct PeakReport {
  double zpl_energy_ev = 0.0;
  double zpl_uncertainty_ev = 0.0;
  std::vector<double> sideband_energies_ev;      ///< descending in energy
  std::vector<double> sideband_uncertainties_ev;
  double phonon_energy_mev = 0.0;  ///< 0 when no sidebands were found
  double phonon_energy_uncertainty_mev = 0.0;
};

/// Locate the ZPL (highest-energy prominent peak) and its red-shifted phonon
/// sidebands in an emission spectrum on an energy axis. Peaks must have a
/// topographic prominence of at least `min_prominence` times the spectrum
/// range (max - min), which makes detection invariant to a constant offset.
/// Positions are refined by a least-squares parabola over the half-prominence
/// window; the phonon energy is the inverse-variance mean of
/// consecutive spacings.
PeakReport find_zpl_and_sidebands(const Spectrum& s, double min_prominence = 0.05);

}  // namespace defectspec::spectra

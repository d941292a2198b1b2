#pragma once

#include <numbers>

namespace defectspec::units {

/// Photon energy-wavelength product, eV*nm.
inline constexpr double hc_ev_nm = 1239.8419;

/// Boltzmann constant, meV/K.
inline constexpr double k_boltzmann_mev_per_k = 8.617333262e-2;

inline constexpr double deg_to_rad = std::numbers::pi / 180.0;
inline constexpr double rad_to_deg = 180.0 / std::numbers::pi;

/// Reduce an axis angle (a dipole orientation, not a vector) into [0, 180).
double reduce_axis_deg(double theta_deg);

/// Signed axis difference wrapped into [-90, 90).
double wrap_axis_difference_deg(double diff_deg);

double wavelength_nm_to_energy_ev(double lambda_nm);
double energy_ev_to_wavelength_nm(double energy_ev);

}  // namespace defectspec::units

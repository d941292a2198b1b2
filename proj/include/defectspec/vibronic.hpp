#pragma once

// Two-state configuration-coordinate (Huang-Rhys) model with linear modes:
// Franck-Condon factors, thermal occupation, Debye-Waller weights and the
// distribution of net created phonons per radiative transition.

#include <vector>

namespace defectspec::vibronic {

/// One linear phonon mode. The Huang-Rhys factor already absorbs the
/// effective mass and the equilibrium displacement between the two states.
struct PhononMode {
  double energy_mev;  ///< phonon quantum, > 0
  double huang_rhys;  ///< S >= 0

  void validate() const;
};

/// One electronic transition together with its phonon modes and the
/// orientation of its dipole axes (degrees, reduced mod 180).
struct VibronicSystem {
  double zpl_energy_ev;
  std::vector<PhononMode> modes;
  double emission_dipole_deg = 0.0;
  double absorption_dipole_deg = 0.0;

  void validate() const;
  double total_huang_rhys() const;
};

/// Probability per net created phonon count m = net_phonon_min + index.
struct SidebandWeights {
  int net_phonon_min = 0;
  std::vector<double> weights;

  double at(int m) const;
  int net_phonon_max() const { return net_phonon_min + static_cast<int>(weights.size()) - 1; }
  double total() const;
  double mean() const;
};

/// Squared overlap |<n|n*>|^2 of two displaced oscillators with equal frequency:
/// e^{-S} S^{n-n*} (n*!/n!) [L_{n*}^{n-n*}(S)]^2 for n >= n*, symmetric in (n, n*).
double franck_condon_factor(double huang_rhys, int n, int n_star);

/// Independent route to the same quantity: trapezoidal quadrature of the
/// product of two Hermite functions displaced by sqrt(2S). Valid for
/// n, n* <= 30 and S <= 10; throws ErrorKind::numerical if halving the step
/// changes the overlap by more than 1e-12.
double overlap_oracle(double huang_rhys, int n, int n_star);

/// Associated Laguerre polynomial L_n^alpha(x) by upward recurrence in n.
double associated_laguerre(int n, double alpha, double x);

/// Bose-Einstein mean occupation; exactly 0 at T = 0.
double bose_occupation(double energy_mev, double temperature_k);

/// ZPL fraction of the band, exp(-sum_k S_k (2 n_k + 1)).
double debye_waller(const std::vector<PhononMode>& modes, double temperature_k);

/// Net-phonon distribution of one mode at temperature T, thermally averaged
/// over the initial occupation. At T = 0 this is Poisson(S).
SidebandWeights sideband_weights(const PhononMode& mode, double temperature_k,
                                 double truncation_tolerance = 1e-9);

/// A vibronic line of a multi-mode system: offset below (emission) or above
/// (absorption) the ZPL, its probability, and the number of phonons involved.
struct VibronicLine {
  double offset_mev;
  double weight;
  int phonon_count;  ///< sum over modes of |m_k|
};

/// Joint distribution over all modes by discrete convolution of the
/// per-mode weights. Lines that coincide in energy and phonon count merge.
/// Sorted by offset, then phonon count.
std::vector<VibronicLine> combined_lines(const std::vector<PhononMode>& modes, double temperature_k,
                                         double truncation_tolerance = 1e-9);

}  // namespace defectspec::vibronic

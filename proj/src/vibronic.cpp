#include "defectspec/vibronic.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>

#include "defectspec/error.hpp"
#include "defectspec/units.hpp"

namespace defectspec::vibronic {

namespace {

constexpr double bose_mass_target = 1.0 - 1e-12;
constexpr int bose_occupation_cap = 200;
constexpr int row_extent_cap = 400;

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorKind::domain, what);
}

// Normalized Hermite functions psi_0..psi_nmax at x by the stable
// three-term recurrence (no explicit factorials).
void hermite_functions(double x, int nmax, std::vector<double>& psi) {
  psi.assign(nmax + 1, 0.0);
  psi[0] = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
  if (nmax >= 1) psi[1] = std::numbers::sqrt2 * x * psi[0];
  for (int k = 1; k < nmax; ++k) {
    psi[k + 1] = std::sqrt(2.0 / (k + 1)) * x * psi[k] - std::sqrt(static_cast<double>(k) / (k + 1)) * psi[k - 1];
  }
}

double trapezoid_overlap(int n, int n_star, double d, double step) {
  const int nmax = std::max(n, n_star);
  const double half_width = std::sqrt(2.0 * nmax + 1.0) + 0.5 * d + 12.0;
  const double center = 0.5 * d;
  const auto count = static_cast<long>(std::ceil(2.0 * half_width / step));
  std::vector<double> a, b;
  double sum = 0.0;
  for (long i = 0; i <= count; ++i) {
    const double x = center - half_width + static_cast<double>(i) * step;
    hermite_functions(x, nmax, a);
    hermite_functions(x - d, nmax, b);
    const double f = a[n] * b[n_star];
    sum += (i == 0 || i == count) ? 0.5 * f : f;
  }
  return sum * step;
}

}  // namespace

void PhononMode::validate() const {
  require(std::isfinite(energy_mev) && energy_mev > 0.0, "phonon energy must be positive");
  require(std::isfinite(huang_rhys) && huang_rhys >= 0.0, "Huang-Rhys factor must be non-negative");
}

void VibronicSystem::validate() const {
  require(std::isfinite(zpl_energy_ev) && zpl_energy_ev > 0.0, "ZPL energy must be positive");
  require(!modes.empty(), "a vibronic system needs at least one phonon mode");
  for (const auto& m : modes) m.validate();
  require(std::isfinite(emission_dipole_deg) && std::isfinite(absorption_dipole_deg),
          "dipole angles must be finite");
}

double VibronicSystem::total_huang_rhys() const {
  double s = 0.0;
  for (const auto& m : modes) s += m.huang_rhys;
  return s;
}

double SidebandWeights::at(int m) const {
  const int i = m - net_phonon_min;
  if (i < 0 || i >= static_cast<int>(weights.size())) return 0.0;
  return weights[static_cast<std::size_t>(i)];
}

double SidebandWeights::total() const {
  double s = 0.0;
  for (double w : weights) s += w;
  return s;
}

double SidebandWeights::mean() const {
  double s = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * (net_phonon_min + static_cast<int>(i));
  return s / total();
}

double associated_laguerre(int n, double alpha, double x) {
  require(n >= 0, "Laguerre degree must be non-negative");
  if (n == 0) return 1.0;
  double prev = 1.0;
  double cur = 1.0 + alpha - x;
  for (int k = 1; k < n; ++k) {
    const double next = ((2.0 * k + 1.0 + alpha - x) * cur - (k + alpha) * prev) / (k + 1.0);
    prev = cur;
    cur = next;
  }
  return cur;
}

double franck_condon_factor(double huang_rhys, int n, int n_star) {
  require(std::isfinite(huang_rhys) && huang_rhys >= 0.0, "Huang-Rhys factor must be non-negative");
  require(n >= 0 && n_star >= 0, "phonon counts must be non-negative");
  if (n < n_star) std::swap(n, n_star);
  const int m = n - n_star;
  if (huang_rhys == 0.0) return m == 0 ? 1.0 : 0.0;

  const double lag = associated_laguerre(n_star, m, huang_rhys);
  if (lag == 0.0) return 0.0;
  const double log_value = -huang_rhys + m * std::log(huang_rhys) + std::lgamma(n_star + 1.0) -
                           std::lgamma(n + 1.0) + 2.0 * std::log(std::abs(lag));
  return std::min(1.0, std::exp(log_value));
}

double overlap_oracle(double huang_rhys, int n, int n_star) {
  require(std::isfinite(huang_rhys) && huang_rhys >= 0.0 && huang_rhys <= 10.0,
          "overlap oracle requires 0 <= S <= 10");
  require(n >= 0 && n_star >= 0 && n <= 30 && n_star <= 30, "overlap oracle requires 0 <= n, n* <= 30");
  const double d = std::sqrt(2.0 * huang_rhys);
  const double coarse = trapezoid_overlap(n, n_star, d, 0.05);
  const double fine = trapezoid_overlap(n, n_star, d, 0.025);
  if (std::abs(coarse - fine) > 1e-12) {
    std::ostringstream diag;
    diag.precision(17);
    diag << "S=" << huang_rhys << " n=" << n << " n*=" << n_star << " coarse=" << coarse << " fine=" << fine;
    throw Error(ErrorKind::numerical, "overlap quadrature did not converge", diag.str());
  }
  return fine * fine;
}

double bose_occupation(double energy_mev, double temperature_k) {
  require(std::isfinite(energy_mev) && energy_mev > 0.0, "phonon energy must be positive");
  require(std::isfinite(temperature_k) && temperature_k >= 0.0, "temperature must be non-negative");
  if (temperature_k == 0.0) return 0.0;
  const double x = energy_mev / (units::k_boltzmann_mev_per_k * temperature_k);
  return 1.0 / std::expm1(x);
}

double debye_waller(const std::vector<PhononMode>& modes, double temperature_k) {
  require(std::isfinite(temperature_k) && temperature_k >= 0.0, "temperature must be non-negative");
  double exponent = 0.0;
  for (const auto& mode : modes) {
    mode.validate();
    exponent += mode.huang_rhys * (2.0 * bose_occupation(mode.energy_mev, temperature_k) + 1.0);
  }
  return std::exp(-exponent);
}

SidebandWeights sideband_weights(const PhononMode& mode, double temperature_k, double truncation_tolerance) {
  mode.validate();
  require(std::isfinite(temperature_k) && temperature_k >= 0.0, "temperature must be non-negative");
  require(truncation_tolerance > 0.0 && truncation_tolerance <= 1e-3, "truncation tolerance must lie in (0, 1e-3]");

  // Initial-occupation distribution P(n) = (1 - x) x^n, x = nbar / (1 + nbar).
  std::vector<double> occupation{1.0};
  if (temperature_k > 0.0) {
    const double nbar = bose_occupation(mode.energy_mev, temperature_k);
    const double x = nbar / (1.0 + nbar);
    occupation.assign(1, 1.0 - x);
    double cumulative = occupation[0];
    while (cumulative < bose_mass_target) {
      if (static_cast<int>(occupation.size()) > bose_occupation_cap) {
        throw Error(ErrorKind::truncation, "thermal occupation sum exceeded the hard cap",
                    "nbar=" + std::to_string(nbar) + " cumulative=" + std::to_string(cumulative));
      }
      occupation.push_back(occupation.back() * x);
      cumulative += occupation.back();
    }
  }

  const int n_initial_max = static_cast<int>(occupation.size()) - 1;
  const double row_target = 1.0 - 0.1 * truncation_tolerance;
  std::vector<double> weights;  // index = m + n_initial_max
  for (int n = 0; n <= n_initial_max; ++n) {
    double row_mass = 0.0;
    int n_final = 0;
    for (;; ++n_final) {
      if (n_final > n + row_extent_cap) {
        throw Error(ErrorKind::truncation, "Franck-Condon row did not reach the truncation tolerance",
                    "n=" + std::to_string(n) + " row_mass=" + std::to_string(row_mass));
      }
      const double f = franck_condon_factor(mode.huang_rhys, n_final, n);
      row_mass += f;
      const std::size_t idx = static_cast<std::size_t>(n_final - n + n_initial_max);
      if (idx >= weights.size()) weights.resize(idx + 1, 0.0);
      weights[idx] += occupation[static_cast<std::size_t>(n)] * f;
      if (n_final >= n && row_mass >= row_target) break;
    }
  }

  SidebandWeights out;
  std::size_t first = 0;
  while (first + 1 < weights.size() && weights[first] == 0.0) ++first;
  std::size_t last = weights.size();
  while (last > first + 1 && weights[last - 1] == 0.0) --last;
  out.net_phonon_min = static_cast<int>(first) - n_initial_max;
  out.weights.assign(weights.begin() + static_cast<long>(first), weights.begin() + static_cast<long>(last));
  return out;
}

std::vector<VibronicLine> combined_lines(const std::vector<PhononMode>& modes, double temperature_k,
                                         double truncation_tolerance) {
  require(!modes.empty(), "at least one phonon mode is required");
  std::vector<VibronicLine> lines{{0.0, 1.0, 0}};
  const double per_mode_tol = truncation_tolerance / static_cast<double>(modes.size());
  for (const auto& mode : modes) {
    const SidebandWeights sw = sideband_weights(mode, temperature_k, per_mode_tol);
    std::vector<VibronicLine> next;
    next.reserve(lines.size() * sw.weights.size());
    for (const auto& line : lines) {
      for (std::size_t i = 0; i < sw.weights.size(); ++i) {
        if (sw.weights[i] == 0.0) continue;
        const int m = sw.net_phonon_min + static_cast<int>(i);
        next.push_back({line.offset_mev + m * mode.energy_mev, line.weight * sw.weights[i],
                        line.phonon_count + std::abs(m)});
      }
    }
    std::sort(next.begin(), next.end(), [](const VibronicLine& a, const VibronicLine& b) {
      if (a.offset_mev != b.offset_mev) return a.offset_mev < b.offset_mev;
      return a.phonon_count < b.phonon_count;
    });
    lines.clear();
    for (const auto& l : next) {
      if (!lines.empty() && lines.back().phonon_count == l.phonon_count &&
          std::abs(lines.back().offset_mev - l.offset_mev) < 1e-9) {
        lines.back().weight += l.weight;
      } else {
        lines.push_back(l);
      }
    }
  }
  return lines;
}

}  // namespace defectspec::vibronic

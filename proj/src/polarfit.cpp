#include "defectspec/polarfit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <numbers>
#include <string>
#include <thread>

#include "defectspec/error.hpp"
#include "defectspec/kernels/kernels.hpp"
#include "defectspec/units.hpp"

namespace defectspec::polarfit {

std::string_view to_string(ScanRole role) {
  return role == ScanRole::absorption_scan ? "absorption_scan" : "emission_scan";
}

ScanRole parse_scan_role(std::string_view text) {
  if (text == "absorption_scan") return ScanRole::absorption_scan;
  if (text == "emission_scan") return ScanRole::emission_scan;
  throw Error(ErrorKind::schema, "unknown scan role '" + std::string(text) + "'");
}

namespace {

std::size_t distinct_axis_angles(std::span<const double> angles_deg) {
  std::vector<double> r;
  r.reserve(angles_deg.size());
  for (double a : angles_deg) r.push_back(units::reduce_axis_deg(a));
  std::sort(r.begin(), r.end());
  std::size_t count = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (i == 0 || r[i] - r[i - 1] > 1e-9) ++count;
  }
  // 0 and 179.999999999 are the same axis
  if (count > 1 && r.back() - r.front() > 180.0 - 1e-9) --count;
  return count;
}

// Constrained refit with A = 0: y = amp (1 + cos(2t - phi)). For fixed phi the
// amplitude is linear; phi solves d(chi2)/d(phi) = 0 by bisection.
struct Constrained {
  double amp;
  double phi;
};

Constrained refit_zero_offset(std::span<const double> two_t, std::span<const double> y, std::span<const double> w,
                              double phi_start) {
  auto amplitude = [&](double phi) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double g = 1.0 + std::cos(two_t[i] - phi);
      num += w[i] * y[i] * g;
      den += w[i] * g * g;
    }
    return den > 0.0 ? std::max(0.0, num / den) : 0.0;
  };
  auto chi2 = [&](double phi) {
    const double amp = amplitude(phi);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double r = y[i] - amp * (1.0 + std::cos(two_t[i] - phi));
      s += w[i] * r * r;
    }
    return s;
  };
  auto slope = [&](double phi) {
    const double amp = amplitude(phi);
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double r = y[i] - amp * (1.0 + std::cos(two_t[i] - phi));
      s += w[i] * r * std::sin(two_t[i] - phi);
    }
    return -2.0 * amp * s;
  };

  constexpr int scan_points = 720;
  const double step = 2.0 * std::numbers::pi / scan_points;
  double best_phi = phi_start;
  double best = chi2(phi_start);
  for (int k = 0; k < scan_points; ++k) {
    const double phi = phi_start + k * step;
    const double v = chi2(phi);
    if (v < best) {
      best = v;
      best_phi = phi;
    }
  }
  double lo = best_phi - step, hi = best_phi + step;
  double slo = slope(lo), shi = slope(hi);
  if (slo < 0.0 && shi > 0.0) {
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double sm = slope(mid);
      if (sm < 0.0) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    best_phi = 0.5 * (lo + hi);
  }
  return {amplitude(best_phi), best_phi};
}

}  // namespace

void AngleResolvedSpectrum::validate() const {
  if (angles_deg.size() != spectra.size()) throw Error(ErrorKind::domain, "one spectrum per angle is required");
  if (angles_deg.empty()) throw Error(ErrorKind::domain, "angle-resolved scan is empty");
  std::vector<double> sorted = angles_deg;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
    throw Error(ErrorKind::domain, "scan angles must be distinct");
  if (sorted.size() < 6) throw Error(ErrorKind::domain, "a scan needs at least 6 distinct angles");
  const auto& axis = spectra.front().axis();
  for (const auto& s : spectra) {
    if (s.axis() != axis || s.axis_kind() != spectra.front().axis_kind())
      throw Error(ErrorKind::domain, "all spectra of a scan must share one axis");
  }
}

Cos2Fit fit_cos2(std::span<const double> angles_deg, std::span<const double> intensities,
                 std::span<const double> weights) {
  const std::size_t n = intensities.size();
  if (angles_deg.size() != n) throw Error(ErrorKind::domain, "angles and intensities differ in length");
  if (!weights.empty() && weights.size() != n) throw Error(ErrorKind::domain, "weights differ in length");
  if (n < 6) throw Error(ErrorKind::domain, "cos^2 fit needs at least 6 samples");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(angles_deg[i]) || !std::isfinite(intensities[i]))
      throw Error(ErrorKind::domain, "non-finite sample in cos^2 fit");
  }
  if (distinct_axis_angles(angles_deg) < 4)
    throw Error(ErrorKind::degenerate_design, "fewer than 4 distinct angles mod 180; design is aliased");

  std::vector<double> two_t(n), c2(n), s2(n), w(n);
  for (std::size_t i = 0; i < n; ++i) {
    two_t[i] = 2.0 * angles_deg[i] * units::deg_to_rad;
    c2[i] = std::cos(two_t[i]);
    s2[i] = std::sin(two_t[i]);
    if (weights.empty()) {
      w[i] = 1.0 / std::max(intensities[i], 1.0);
    } else {
      if (!(weights[i] >= 0.0) || !std::isfinite(weights[i])) throw Error(ErrorKind::domain, "invalid weight");
      w[i] = weights[i];
    }
  }

  const kernels::Cos2Sums s = kernels::cos2_sums(c2, s2, intensities, w);
  Eigen::Matrix3d normal;
  normal << s[0], s[1], s[2], s[1], s[3], s[4], s[2], s[4], s[5];
  const Eigen::Vector3d rhs(s[6], s[7], s[8]);
  const Eigen::FullPivLU<Eigen::Matrix3d> lu(normal);
  if (lu.rank() < 3) throw Error(ErrorKind::degenerate_design, "cos^2 design matrix is rank deficient");
  const Eigen::Vector3d coef = lu.solve(rhs);
  const Eigen::Matrix3d cov = lu.inverse();

  const double a = coef(0), b = coef(1), c = coef(2);
  const double amp = std::hypot(b, c);

  Cos2Fit fit;
  fit.samples = n;
  fit.amplitude_b = 2.0 * amp;
  fit.theta0_deg = units::reduce_axis_deg(0.5 * std::atan2(c, b) * units::rad_to_deg);
  if (amp > 0.0) {
    const double var_amp = (b * b * cov(1, 1) + c * c * cov(2, 2) + 2.0 * b * c * cov(1, 2)) / (amp * amp);
    const double var_phi =
        (c * c * cov(1, 1) + b * b * cov(2, 2) - 2.0 * b * c * cov(1, 2)) / (amp * amp * amp * amp);
    fit.amplitude_b_sigma = 2.0 * std::sqrt(std::max(0.0, var_amp));
    fit.theta0_sigma_deg = 0.5 * std::sqrt(std::max(0.0, var_phi)) * units::rad_to_deg;
  } else {
    fit.amplitude_b_sigma = 2.0 * std::sqrt(std::max(0.0, 0.5 * (cov(1, 1) + cov(2, 2))));
    fit.theta0_sigma_deg = 90.0;
  }
  fit.degenerate = !(amp > 0.0) || fit.amplitude_b < 2.0 * fit.amplitude_b_sigma;

  double offset = a - amp;
  const double rounding = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(a) + amp);
  if (offset < 0.0 && offset >= -rounding) {
    offset = 0.0;
  } else if (offset < 0.0) {
    const Constrained cf = refit_zero_offset(two_t, intensities, w, std::atan2(c, b));
    offset = 0.0;
    fit.amplitude_b = 2.0 * cf.amp;
    fit.theta0_deg = units::reduce_axis_deg(0.5 * cf.phi * units::rad_to_deg);
    fit.offset_clamped = true;
    fit.degenerate = !(cf.amp > 0.0) || fit.amplitude_b < 2.0 * fit.amplitude_b_sigma;
  }
  fit.offset_a = offset;

  double sq = 0.0, chi2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = intensities[i] - evaluate(fit, angles_deg[i]);
    sq += r * r;
    chi2 += w[i] * r * r;
  }
  fit.residual_rms = std::sqrt(sq / static_cast<double>(n));
  fit.chi2 = chi2;
  return fit;
}

double evaluate(const Cos2Fit& fit, double theta_deg) {
  const double d = (theta_deg - fit.theta0_deg) * units::deg_to_rad;
  const double cs = std::cos(d);
  return fit.offset_a + fit.amplitude_b * cs * cs;
}

Visibility visibility(const Cos2Fit& fit) {
  if (fit.degenerate) return {0.0, true};
  const double den = fit.amplitude_b + 2.0 * fit.offset_a;
  if (!(den > 0.0)) return {0.0, true};
  return {std::clamp(fit.amplitude_b / den, 0.0, 1.0), false};
}

std::size_t SpectrallyResolvedPolarization::brightest_bin() const {
  return static_cast<std::size_t>(std::max_element(total_counts.begin(), total_counts.end()) - total_counts.begin());
}

std::size_t SpectrallyResolvedPolarization::bin_near(double energy_ev) const {
  std::size_t best = 0;
  for (std::size_t i = 1; i < energies_ev.size(); ++i) {
    if (std::abs(energies_ev[i] - energy_ev) < std::abs(energies_ev[best] - energy_ev)) best = i;
  }
  return best;
}

SpectrallyResolvedPolarization fit_spectrally_resolved(const AngleResolvedSpectrum& scan, double bin_width_ev,
                                                       unsigned threads) {
  if (scan.spectra.empty() || scan.angles_deg.empty()) throw Error(ErrorKind::domain, "angle-resolved scan is empty");
  scan.validate();
  if (!(bin_width_ev > 0.0)) throw Error(ErrorKind::domain, "bin width must be positive");

  const auto& axis = scan.spectra.front().axis();
  const auto kind = scan.spectra.front().axis_kind();
  if (kind == spectra::AxisKind::stokes_mev) throw Error(ErrorKind::domain, "scan axis must be energy or wavelength");

  std::vector<double> energy(axis.size());
  for (std::size_t i = 0; i < axis.size(); ++i)
    energy[i] = kind == spectra::AxisKind::energy_ev ? axis[i] : units::wavelength_nm_to_energy_ev(axis[i]);
  std::vector<std::size_t> order(axis.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return energy[a] < energy[b]; });

  // group samples into bins [e0 + k w, e0 + (k+1) w)
  const double e0 = energy[order.front()];
  std::vector<std::vector<std::size_t>> members;
  long current = -1;
  for (std::size_t idx : order) {
    const auto k = static_cast<long>(std::floor((energy[idx] - e0) / bin_width_ev));
    if (k != current) {
      members.emplace_back();
      current = k;
    }
    members.back().push_back(idx);
  }

  const std::size_t nbins = members.size();
  const std::size_t nang = scan.angles_deg.size();
  SpectrallyResolvedPolarization out;
  out.energies_ev.resize(nbins);
  out.total_counts.resize(nbins);
  out.fits.resize(nbins);
  out.visibility.resize(nbins);

  auto work = [&](std::size_t begin, std::size_t end) {
    std::vector<double> counts(nang);
    for (std::size_t b = begin; b < end; ++b) {
      double esum = 0.0;
      for (std::size_t idx : members[b]) esum += energy[idx];
      out.energies_ev[b] = esum / static_cast<double>(members[b].size());
      double total = 0.0;
      for (std::size_t a = 0; a < nang; ++a) {
        double sum = 0.0;
        for (std::size_t idx : members[b]) sum += scan.spectra[a].values()[idx];
        counts[a] = sum;
        total += sum;
      }
      out.total_counts[b] = total;
      out.fits[b] = fit_cos2(scan.angles_deg, counts);
      out.visibility[b] = visibility(out.fits[b]).value;
    }
  };

  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(nbins)));
  if (threads == 1) {
    work(0, nbins);
  } else {
    const std::size_t chunk = (nbins + threads - 1) / threads;
    std::vector<std::exception_ptr> failures(threads);
    {
      std::vector<std::jthread> pool;
      for (unsigned t = 0; t < threads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(nbins, begin + chunk);
        if (begin >= end) continue;
        pool.emplace_back([&work, &failures, t, begin, end] {
          try {
            work(begin, end);
          } catch (...) {
            failures[t] = std::current_exception();
          }
        });
      }
    }
    // lowest chunk first, matching the single-threaded failure
    for (const auto& f : failures)
      if (f) std::rethrow_exception(f);
  }
  return out;
}

Cos2Fit fit_spectrally_averaged(const AngleResolvedSpectrum& scan) {
  scan.validate();
  std::vector<double> counts;
  for (const auto& s : scan.spectra) {
    double sum = 0.0;
    for (double v : s.values()) sum += v;
    counts.push_back(sum);
  }
  return fit_cos2(scan.angles_deg, counts);
}

spectra::Spectrum unpolarized_spectrum(const AngleResolvedSpectrum& scan) {
  scan.validate();
  std::vector<double> sum(scan.spectra.front().size(), 0.0);
  for (const auto& s : scan.spectra)
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += s.values()[i];
  const auto& first = scan.spectra.front();
  return spectra::Spectrum(first.axis_kind(), first.units_kind(), first.axis(), std::move(sum));
}

double delta_theta(double theta_abs_deg, double theta_emit_deg) {
  if (!std::isfinite(theta_abs_deg) || !std::isfinite(theta_emit_deg))
    throw Error(ErrorKind::domain, "angles must be finite");
  const double d = std::fmod(std::abs(theta_abs_deg - theta_emit_deg), 180.0);
  return std::min(d, 180.0 - d);
}

}  // namespace defectspec::polarfit

#pragma once

// Phenomenological photon-statistics fits: the antibunching dip of the
// second-order correlation and the mono-exponential excited-state decay.

#include <string_view>
#include <vector>

namespace defectspec::photostats {

struct CorrelationTrace {
  std::vector<double> tau_ns;
  std::vector<double> g2;
  std::vector<double> sigma;  ///< optional per-point standard error; empty = uniform
};

struct G2Fit {
  double dip_depth = 0.0;            ///< a
  double correlation_time_ns = 0.0;  ///< tau_c
  double g2_zero = 1.0;              ///< 1 - a
  double background = 1.0;           ///< long-delay level the trace normalizes to
  double g2_zero_sigma = 0.0;
  double correlation_time_sigma_ns = 0.0;
  double chi2 = 0.0;
  int iterations = 0;
};

/// Levenberg-Marquardt fit of g2(tau) = background * (1 - a exp(-|tau|/tau_c)),
/// started from a = 1 - min(g2), tau_c = half-width of the dip. Throws
/// ErrorKind::domain on fewer than 20 points or a grid spanning less than 5
/// initial tau_c, and ErrorKind::fit when 200 iterations do not converge.
G2Fit fit_g2(const CorrelationTrace& trace);

enum class EmitterVerdict { single, not_single, inconclusive };

std::string_view to_string(EmitterVerdict v);

/// 2-sigma decision band around g2(0) = 0.5.
EmitterVerdict is_single_emitter(double g2_zero, double uncertainty);

struct DecayHistogram {
  std::vector<double> time_ns;
  std::vector<double> counts;
};

struct TimeWindow {
  double start_ns;
  double stop_ns;
};

struct LifetimeFit {
  double tau_ns = 0.0;
  double tau_sigma_ns = 0.0;
  double amplitude = 0.0;  ///< counts per bin at the start of the fitted tail
  double background = 0.0;
  double tail_start_ns = 0.0;
  std::size_t tail_bins = 0;
  double chi2 = 0.0;
  int iterations = 0;
};

/// Mono-exponential tail fit. Background is the mean count in
/// `background_window`; the tail starts `tail_offset_ns` after the pulse
/// peak. Throws ErrorKind::domain with fewer than 30 tail bins or an
/// overlapping background window, and ErrorKind::fit for a rising tail.
LifetimeFit fit_lifetime(const DecayHistogram& hist, TimeWindow background_window, double tail_offset_ns = 1.0);

}  // namespace defectspec::photostats

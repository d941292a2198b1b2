#include "defectspec/photostats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "defectspec/error.hpp"
#include "levenberg_marquardt.hpp"

namespace defectspec::photostats {

namespace {

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m) {
  return m.completeOrthogonalDecomposition().pseudoInverse();
}

}  // namespace

std::string_view to_string(EmitterVerdict v) {
  switch (v) {
    case EmitterVerdict::single: return "single";
    case EmitterVerdict::not_single: return "not_single";
    case EmitterVerdict::inconclusive: return "inconclusive";
  }
  return "unknown";
}

EmitterVerdict is_single_emitter(double g2_zero, double uncertainty) {
  if (g2_zero + 2.0 * uncertainty < 0.5) return EmitterVerdict::single;
  if (g2_zero - 2.0 * uncertainty > 0.5) return EmitterVerdict::not_single;
  return EmitterVerdict::inconclusive;
}

G2Fit fit_g2(const CorrelationTrace& trace) {
  const std::size_t n = trace.tau_ns.size();
  if (trace.g2.size() != n) throw Error(ErrorKind::domain, "tau and g2 differ in length");
  if (!trace.sigma.empty() && trace.sigma.size() != n) throw Error(ErrorKind::domain, "sigma differs in length");
  if (n < 20) throw Error(ErrorKind::domain, "g2 fit needs at least 20 points");
  double span = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(trace.tau_ns[i]) || !std::isfinite(trace.g2[i]) || trace.g2[i] < 0.0)
      throw Error(ErrorKind::domain, "g2 trace must be finite and non-negative");
    if (!trace.sigma.empty() && !(trace.sigma[i] > 0.0)) throw Error(ErrorKind::domain, "sigma must be positive");
    span = std::max(span, std::abs(trace.tau_ns[i]));
  }

  double far_sum = 0.0;
  int far_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(trace.tau_ns[i]) >= 0.6 * span) {
      far_sum += trace.g2[i];
      ++far_count;
    }
  }
  const double bg0 = far_count > 0 && far_sum > 0.0 ? far_sum / far_count : 1.0;
  const double gmin = *std::min_element(trace.g2.begin(), trace.g2.end());
  const double a0 = 1.0 - gmin / bg0;
  const double half_level = 0.5 * (bg0 + gmin);
  double half_width = span;
  for (std::size_t i = 0; i < n; ++i) {
    if (trace.g2[i] >= half_level) half_width = std::min(half_width, std::abs(trace.tau_ns[i]));
  }
  if (!(half_width > 0.0)) half_width = span / 10.0;
  if (span < 5.0 * half_width) {
    throw Error(ErrorKind::domain, "g2 delay grid must span at least 5 correlation times",
                "span_ns=" + std::to_string(span) + " tau_c_init=" + std::to_string(half_width));
  }

  const auto m = static_cast<int>(n);
  auto model = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
    const double bg = p(0), a = p(1), tc = p(2);
    if (!(tc > 0.0) || !std::isfinite(bg) || !std::isfinite(a)) return false;
    for (int i = 0; i < m; ++i) {
      const double t = std::abs(trace.tau_ns[static_cast<std::size_t>(i)]);
      const double e = std::exp(-t / tc);
      const double s = trace.sigma.empty() ? 1.0 : trace.sigma[static_cast<std::size_t>(i)];
      const double f = bg * (1.0 - a * e);
      r(i) = (trace.g2[static_cast<std::size_t>(i)] - f) / s;
      jac(i, 0) = -(1.0 - a * e) / s;
      jac(i, 1) = bg * e / s;
      jac(i, 2) = bg * a * e * t / (tc * tc) / s;
    }
    return true;
  };
  Eigen::VectorXd p0(3);
  p0 << bg0, a0, half_width;
  const detail::LmResult res = detail::levenberg_marquardt(model, p0, m);

  G2Fit fit;
  fit.background = res.params(0);
  fit.dip_depth = res.params(1);
  fit.correlation_time_ns = res.params(2);
  fit.g2_zero = 1.0 - fit.dip_depth;
  fit.chi2 = res.chi2;
  fit.iterations = res.iterations;
  const double s2 = trace.sigma.empty() ? res.chi2 / std::max(1, m - 3) : 1.0;
  const Eigen::MatrixXd cov = s2 * pseudo_inverse(res.jtj);
  fit.g2_zero_sigma = std::sqrt(std::max(0.0, cov(1, 1)));
  fit.correlation_time_sigma_ns = std::sqrt(std::max(0.0, cov(2, 2)));
  return fit;
}

LifetimeFit fit_lifetime(const DecayHistogram& hist, TimeWindow background_window, double tail_offset_ns) {
  const std::size_t n = hist.time_ns.size();
  if (hist.counts.size() != n || n == 0) throw Error(ErrorKind::domain, "decay histogram is empty or ragged");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(hist.time_ns[i]) || hist.time_ns[i] < 0.0)
      throw Error(ErrorKind::domain, "decay times must be finite and non-negative");
    if (!(std::isfinite(hist.counts[i]) && hist.counts[i] >= 0.0))
      throw Error(ErrorKind::domain, "decay counts must be finite and non-negative");
    if (i > 0 && !(hist.time_ns[i] > hist.time_ns[i - 1]))
      throw Error(ErrorKind::domain, "decay time grid must be strictly increasing");
  }
  if (!(background_window.stop_ns > background_window.start_ns))
    throw Error(ErrorKind::domain, "background window is empty");

  auto in_background = [&](double t) { return t >= background_window.start_ns && t <= background_window.stop_ns; };
  double bg_sum = 0.0;
  int bg_count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (in_background(hist.time_ns[i])) {
      bg_sum += hist.counts[i];
      ++bg_count;
    }
  }
  if (bg_count == 0) throw Error(ErrorKind::domain, "background window contains no bins");
  const double background = bg_sum / bg_count;

  const auto peak = static_cast<std::size_t>(std::max_element(hist.counts.begin(), hist.counts.end()) -
                                             hist.counts.begin());
  const double tail_start = hist.time_ns[peak] + tail_offset_ns;
  std::vector<std::size_t> tail;
  for (std::size_t i = peak; i < n; ++i) {
    const double t = hist.time_ns[i];
    if (t < tail_start) continue;
    if (in_background(t)) {
      // a window after the pulse truncates the tail
      if (background_window.start_ns > tail_start) break;
      throw Error(ErrorKind::domain, "background window overlaps the decay tail");
    }
    tail.push_back(i);
  }
  if (tail.size() < 30) {
    throw Error(ErrorKind::domain, "decay tail needs at least 30 bins", "tail_bins=" + std::to_string(tail.size()));
  }

  // log-linear start on the background-subtracted tail, weighted by counts
  double sw = 0.0, st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  for (std::size_t i : tail) {
    const double y = hist.counts[i] - background;
    if (y <= 0.0) continue;
    const double t = hist.time_ns[i] - tail_start;
    const double w = y;
    const double ly = std::log(y);
    sw += w;
    st += w * t;
    sy += w * ly;
    stt += w * t * t;
    sty += w * t * ly;
  }
  const double den = sw * stt - st * st;
  if (!(sw > 0.0) || !(den > 0.0)) throw Error(ErrorKind::fit, "decay tail carries no signal above background");
  const double slope = (sw * sty - st * sy) / den;
  if (!(slope < 0.0)) {
    throw Error(ErrorKind::fit, "decay tail is not decreasing", "log_slope_per_ns=" + std::to_string(slope));
  }
  const double intercept = (sy - slope * st) / sw;

  const auto m = static_cast<int>(tail.size());
  std::vector<double> variance(tail.size());
  for (std::size_t k = 0; k < tail.size(); ++k) variance[k] = std::max(hist.counts[tail[k]], 1.0);
  auto model = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
    const double amp = p(0), tau = p(1);
    if (!(tau > 0.0) || !std::isfinite(amp)) return false;
    for (int k = 0; k < m; ++k) {
      const std::size_t i = tail[static_cast<std::size_t>(k)];
      const double t = hist.time_ns[i] - tail_start;
      const double e = std::exp(-t / tau);
      const double s = std::sqrt(variance[static_cast<std::size_t>(k)]);
      r(k) = (hist.counts[i] - background - amp * e) / s;
      jac(k, 0) = -e / s;
      jac(k, 1) = -amp * e * t / (tau * tau) / s;
    }
    return true;
  };

  Eigen::VectorXd p(2);
  p << std::exp(intercept), -1.0 / slope;
  detail::LmResult res = detail::levenberg_marquardt(model, p, m);
  int iterations = res.iterations;
  // second pass with model-based Poisson variances
  for (std::size_t k = 0; k < tail.size(); ++k) {
    const double t = hist.time_ns[tail[k]] - tail_start;
    variance[k] = std::max(background + res.params(0) * std::exp(-t / res.params(1)), 1.0);
  }
  res = detail::levenberg_marquardt(model, res.params, m);
  iterations += res.iterations;

  if (!(res.params(1) > 0.0)) throw Error(ErrorKind::fit, "fitted lifetime is not positive");
  LifetimeFit fit;
  fit.tau_ns = res.params(1);
  fit.amplitude = res.params(0);
  fit.background = background;
  fit.tail_start_ns = tail_start;
  fit.tail_bins = tail.size();
  fit.chi2 = res.chi2;
  fit.iterations = iterations;
  const Eigen::MatrixXd cov = pseudo_inverse(res.jtj);
  fit.tau_sigma_ns = std::sqrt(std::max(0.0, cov(1, 1)));
  return fit;
}

}  // namespace defectspec::photostats

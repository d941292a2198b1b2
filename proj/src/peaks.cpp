#include "defectspec/peaks.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "defectspec/error.hpp"

namespace defectspec::spectra {

namespace {

struct Peak {
  std::size_t index;
  double prominence;
  double position;
  double sigma;
};

// Of two separate equal maxima only the rightmost keeps the full prominence:
// the left scan stops at strictly higher samples, the right scan (after
// leaving the peak's own plateau) at equal ones.
double prominence_at(const std::vector<double>& y, std::size_t i) {
  const double h = y[i];
  double left_min = h;
  for (std::size_t j = i; j-- > 0;) {
    if (y[j] > h) break;
    left_min = std::min(left_min, y[j]);
  }
  double right_min = h;
  std::size_t start = i + 1;
  while (start < y.size() && y[start] == h) ++start;
  for (std::size_t j = start; j < y.size(); ++j) {
    if (y[j] >= h) break;
    right_min = std::min(right_min, y[j]);
  }
  return h - std::max(left_min, right_min);
}

// Least-squares parabola over the samples above half prominence; returns the
// vertex and its standard error from the residual scatter.
void refine(const std::vector<double>& x, const std::vector<double>& y, Peak& p) {
  const std::size_t n = x.size();
  const double level = y[p.index] - 0.5 * p.prominence;
  std::size_t lo = p.index, hi = p.index;
  while (lo > 0 && y[lo - 1] > level) --lo;
  while (hi + 1 < n && y[hi + 1] > level) ++hi;
  // symmetric about the maximum (or flat top) so a borderline sample on one
  // side does not tilt the parabola
  std::size_t top_end = p.index;
  while (top_end + 1 < n && y[top_end + 1] == y[p.index]) ++top_end;
  std::size_t half = std::max<std::size_t>(2, std::min(p.index - lo, hi - top_end));
  half = std::min({half, p.index, n - 1 - top_end});
  lo = p.index - half;
  hi = top_end + half;
  if (hi - lo < 2) {
    lo = p.index >= 1 ? p.index - 1 : 0;
    hi = std::min(n - 1, lo + 2);
    lo = hi >= 2 ? hi - 2 : 0;
  }

  const double local_step = std::abs(x[std::min(n - 1, p.index + 1)] - x[p.index > 0 ? p.index - 1 : 0]) /
                            static_cast<double>(std::min(n - 1, p.index + 1) - (p.index > 0 ? p.index - 1 : 0));
  const double sigma_floor = 1e-3 * local_step;

  const auto m = static_cast<Eigen::Index>(hi - lo + 1);
  Eigen::MatrixXd design(m, 3);
  Eigen::VectorXd rhs(m);
  const double x0 = x[p.index];
  for (Eigen::Index k = 0; k < m; ++k) {
    const double t = x[lo + static_cast<std::size_t>(k)] - x0;
    design(k, 0) = 1.0;
    design(k, 1) = t;
    design(k, 2) = t * t;
    rhs(k) = y[lo + static_cast<std::size_t>(k)];
  }
  const Eigen::Matrix3d normal = design.transpose() * design;
  const Eigen::Vector3d coef = normal.ldlt().solve(design.transpose() * rhs);
  const double b = coef(1), c = coef(2);
  if (!(c < 0.0) || !std::isfinite(b)) {
    p.position = x0;
    p.sigma = local_step;
    return;
  }
  double vertex = -b / (2.0 * c);
  if (std::abs(vertex) > std::abs(x[hi] - x[lo])) {
    p.position = x0;
    p.sigma = local_step;
    return;
  }
  const double rss = (design * coef - rhs).squaredNorm();
  const double dof = static_cast<double>(m) - 3.0;
  const double s2 = dof > 0 ? rss / dof : 0.0;
  const Eigen::Matrix3d cov = s2 * normal.inverse();
  const Eigen::Vector3d grad(0.0, -1.0 / (2.0 * c), b / (2.0 * c * c));
  const double var = grad.dot(cov * grad);
  p.position = x0 + vertex;
  p.sigma = std::max(sigma_floor, std::sqrt(std::max(0.0, var)));
}

}  // namespace

PeakReport find_zpl_and_sidebands(const Spectrum& s, double min_prominence) {
  if (s.axis_kind() != AxisKind::energy_ev) throw Error(ErrorKind::domain, "peak finding needs an energy axis");
  if (s.size() < 16) throw Error(ErrorKind::domain, "peak finding needs at least 16 samples");
  if (!(min_prominence > 0.0 && min_prominence < 1.0)) throw Error(ErrorKind::domain, "prominence must lie in (0,1)");

  std::vector<double> x = s.axis();
  std::vector<double> y = s.values();
  if (!s.ascending()) {
    std::reverse(x.begin(), x.end());
    std::reverse(y.begin(), y.end());
  }
  const auto [lo_it, hi_it] = std::minmax_element(y.begin(), y.end());
  const double range = *hi_it - *lo_it;
  if (!(range > 0.0)) throw Error(ErrorKind::not_found, "spectrum is flat; no peak found");
  const double threshold = min_prominence * range;

  std::vector<Peak> peaks;
  for (std::size_t i = 1; i + 1 < y.size(); ++i) {
    if (!(y[i] > y[i - 1] && y[i] >= y[i + 1])) continue;
    const double prom = prominence_at(y, i);
    if (prom >= threshold) peaks.push_back({i, prom, x[i], 0.0});
  }
  if (peaks.empty()) throw Error(ErrorKind::not_found, "no peak above the prominence threshold");
  for (auto& p : peaks) refine(x, y, p);

  // highest energy first
  std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.position > b.position; });

  PeakReport report;
  report.zpl_energy_ev = peaks.front().position;
  report.zpl_uncertainty_ev = peaks.front().sigma;
  double wsum = 0.0, wmean = 0.0;
  for (std::size_t k = 1; k < peaks.size(); ++k) {
    report.sideband_energies_ev.push_back(peaks[k].position);
    report.sideband_uncertainties_ev.push_back(peaks[k].sigma);
    const double spacing = (peaks[k - 1].position - peaks[k].position) * 1000.0;
    const double var = (peaks[k - 1].sigma * peaks[k - 1].sigma + peaks[k].sigma * peaks[k].sigma) * 1e6;
    const double w = 1.0 / var;
    wsum += w;
    wmean += w * spacing;
  }
  if (wsum > 0.0) {
    report.phonon_energy_mev = wmean / wsum;
    report.phonon_energy_uncertainty_mev = 1.0 / std::sqrt(wsum);
  }
  return report;
}

}  // namespace defectspec::spectra

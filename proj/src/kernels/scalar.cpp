#include "defectspec/kernels/kernels.hpp"

#include <cmath>
#include <numbers>

namespace defectspec::kernels::scalar {

namespace {
constexpr double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;

double int_power(double x, int power) {
  double r = 1.0;
  for (int k = 0; k < (power < 0 ? -power : power); ++k) r *= x;
  return r;
}
}  // namespace

void add_gaussians(std::span<const double> x, std::span<const Line> lines, std::span<double> out) {
  for (const Line& line : lines) {
    const double inv = 1.0 / line.width;
    const double norm = line.area * inv * inv_sqrt_2pi;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double t = (x[i] - line.center) * inv;
      out[i] += norm * std::exp(-0.5 * t * t);
    }
  }
}

void add_lorentzians(std::span<const double> x, std::span<const Line> lines, std::span<double> out) {
  for (const Line& line : lines) {
    const double g2 = line.width * line.width;
    const double norm = line.area * line.width * std::numbers::inv_pi;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = x[i] - line.center;
      out[i] += norm / (d * d + g2);
    }
  }
}

void scale_by_axis_power(std::span<const double> x, int power, double factor, std::span<double> values) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xp = int_power(x[i], power);
    values[i] *= power < 0 ? factor / xp : factor * xp;
  }
}

Cos2Sums cos2_sums(std::span<const double> cos2t, std::span<const double> sin2t,
                   std::span<const double> y, std::span<const double> w) {
  Cos2Sums s{};
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double c = cos2t[i];
    const double sn = sin2t[i];
    const double wi = w[i];
    s[0] += wi;
    s[1] += wi * c;
    s[2] += wi * sn;
    s[3] += wi * c * c;
    s[4] += wi * c * sn;
    s[5] += wi * sn * sn;
    s[6] += wi * y[i];
    s[7] += wi * c * y[i];
    s[8] += wi * sn * y[i];
  }
  return s;
}

void exp_inplace(std::span<double> v) {
  for (double& e : v) e = std::exp(e);
}

}  // namespace defectspec::kernels::scalar

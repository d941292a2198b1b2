#include "defectspec/kernels/kernels.hpp"

#include <cmath>
#include <cstdint>
#include <numbers>

#if defined(__x86_64__) || defined(_M_X64)
#include <immintrin.h>
#define DEFECTSPEC_X86 1
#else
#define DEFECTSPEC_X86 0
#endif

namespace defectspec::kernels::avx2 {

#if DEFECTSPEC_X86

#define DS_AVX2 __attribute__((target("avx2,fma")))

namespace {

constexpr double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;

// exp(x) for four doubles. Cody-Waite reduction x = n ln2 + r, |r| <= ln2/2,
// then a degree-13 Taylor polynomial; relative error stays below 2 ulp.
// Inputs below -708 flush to zero (no denormal output).
DS_AVX2 inline __m256d exp4(__m256d x) {
  const __m256d lo_limit = _mm256_set1_pd(-708.0);
  const __m256d hi_limit = _mm256_set1_pd(709.0);
  const __m256d underflow = _mm256_cmp_pd(x, lo_limit, _CMP_LT_OQ);
  x = _mm256_min_pd(_mm256_max_pd(x, lo_limit), hi_limit);

  const __m256d log2e = _mm256_set1_pd(std::numbers::log2e);
  const __m256d ln2_hi = _mm256_set1_pd(6.93145751953125e-1);
  const __m256d ln2_lo = _mm256_set1_pd(1.42860682030941723212e-6);

  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e), _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, ln2_hi, x);
  r = _mm256_fnmadd_pd(n, ln2_lo, r);

  // 1/k! for k = 13 .. 0
  static constexpr double coeff[14] = {
      1.0 / 6227020800.0, 1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0,
      1.0 / 362880.0,     1.0 / 40320.0,     1.0 / 5040.0,     1.0 / 720.0,
      1.0 / 120.0,        1.0 / 24.0,        1.0 / 6.0,        0.5,
      1.0,                1.0};
  __m256d p = _mm256_set1_pd(coeff[0]);
  for (int k = 1; k < 14; ++k) p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(coeff[k]));

  // 2^n via the exponent field
  const __m128i ni = _mm256_cvtpd_epi32(n);
  __m256i e = _mm256_cvtepi32_epi64(ni);
  e = _mm256_add_epi64(e, _mm256_set1_epi64x(1023));
  e = _mm256_slli_epi64(e, 52);
  const __m256d scale = _mm256_castsi256_pd(e);

  return _mm256_andnot_pd(underflow, _mm256_mul_pd(p, scale));
}

DS_AVX2 inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

inline double int_power(double x, int power) {
  double r = 1.0;
  for (int k = 0; k < (power < 0 ? -power : power); ++k) r *= x;
  return r;
}

}  // namespace

DS_AVX2 void add_gaussians(std::span<const double> x, std::span<const Line> lines, std::span<double> out) {
  const std::size_t n = x.size();
  const std::size_t nv = n - n % 4;
  for (const Line& line : lines) {
    const double inv = 1.0 / line.width;
    const double norm = line.area * inv * inv_sqrt_2pi;
    const __m256d vinv = _mm256_set1_pd(inv);
    const __m256d vnorm = _mm256_set1_pd(norm);
    const __m256d vc = _mm256_set1_pd(line.center);
    const __m256d mhalf = _mm256_set1_pd(-0.5);
    for (std::size_t i = 0; i < nv; i += 4) {
      const __m256d t = _mm256_mul_pd(_mm256_sub_pd(_mm256_loadu_pd(&x[i]), vc), vinv);
      const __m256d g = exp4(_mm256_mul_pd(mhalf, _mm256_mul_pd(t, t)));
      _mm256_storeu_pd(&out[i], _mm256_fmadd_pd(vnorm, g, _mm256_loadu_pd(&out[i])));
    }
    for (std::size_t i = nv; i < n; ++i) {
      const double t = (x[i] - line.center) * inv;
      out[i] += norm * std::exp(-0.5 * t * t);
    }
  }
}

DS_AVX2 void add_lorentzians(std::span<const double> x, std::span<const Line> lines, std::span<double> out) {
  const std::size_t n = x.size();
  const std::size_t nv = n - n % 4;
  for (const Line& line : lines) {
    const double g2 = line.width * line.width;
    const double norm = line.area * line.width * std::numbers::inv_pi;
    const __m256d vg2 = _mm256_set1_pd(g2);
    const __m256d vnorm = _mm256_set1_pd(norm);
    const __m256d vc = _mm256_set1_pd(line.center);
    for (std::size_t i = 0; i < nv; i += 4) {
      const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(&x[i]), vc);
      const __m256d den = _mm256_fmadd_pd(d, d, vg2);
      _mm256_storeu_pd(&out[i], _mm256_add_pd(_mm256_loadu_pd(&out[i]), _mm256_div_pd(vnorm, den)));
    }
    for (std::size_t i = nv; i < n; ++i) {
      const double d = x[i] - line.center;
      out[i] += norm / (d * d + g2);
    }
  }
}

DS_AVX2 void scale_by_axis_power(std::span<const double> x, int power, double factor, std::span<double> values) {
  const std::size_t n = x.size();
  const std::size_t nv = n - n % 4;
  const int m = power < 0 ? -power : power;
  const __m256d vf = _mm256_set1_pd(factor);
  for (std::size_t i = 0; i < nv; i += 4) {
    const __m256d xv = _mm256_loadu_pd(&x[i]);
    __m256d xp = _mm256_set1_pd(1.0);
    for (int k = 0; k < m; ++k) xp = _mm256_mul_pd(xp, xv);
    const __m256d s = power < 0 ? _mm256_div_pd(vf, xp) : _mm256_mul_pd(vf, xp);
    _mm256_storeu_pd(&values[i], _mm256_mul_pd(_mm256_loadu_pd(&values[i]), s));
  }
  for (std::size_t i = nv; i < n; ++i) {
    const double xp = int_power(x[i], power);
    values[i] *= power < 0 ? factor / xp : factor * xp;
  }
}

DS_AVX2 Cos2Sums cos2_sums(std::span<const double> cos2t, std::span<const double> sin2t,
                           std::span<const double> y, std::span<const double> w) {
  const std::size_t n = y.size();
  const std::size_t nv = n - n % 4;
  __m256d acc[9];
  for (auto& a : acc) a = _mm256_setzero_pd();
  for (std::size_t i = 0; i < nv; i += 4) {
    const __m256d c = _mm256_loadu_pd(&cos2t[i]);
    const __m256d s = _mm256_loadu_pd(&sin2t[i]);
    const __m256d wi = _mm256_loadu_pd(&w[i]);
    const __m256d yi = _mm256_loadu_pd(&y[i]);
    const __m256d wc = _mm256_mul_pd(wi, c);
    const __m256d ws = _mm256_mul_pd(wi, s);
    acc[0] = _mm256_add_pd(acc[0], wi);
    acc[1] = _mm256_add_pd(acc[1], wc);
    acc[2] = _mm256_add_pd(acc[2], ws);
    acc[3] = _mm256_fmadd_pd(wc, c, acc[3]);
    acc[4] = _mm256_fmadd_pd(wc, s, acc[4]);
    acc[5] = _mm256_fmadd_pd(ws, s, acc[5]);
    acc[6] = _mm256_fmadd_pd(wi, yi, acc[6]);
    acc[7] = _mm256_fmadd_pd(wc, yi, acc[7]);
    acc[8] = _mm256_fmadd_pd(ws, yi, acc[8]);
  }
  Cos2Sums out{};
  for (int k = 0; k < 9; ++k) out[k] = hsum(acc[k]);
  for (std::size_t i = nv; i < n; ++i) {
    const double c = cos2t[i];
    const double sn = sin2t[i];
    const double wi = w[i];
    out[0] += wi;
    out[1] += wi * c;
    out[2] += wi * sn;
    out[3] += wi * c * c;
    out[4] += wi * c * sn;
    out[5] += wi * sn * sn;
    out[6] += wi * y[i];
    out[7] += wi * c * y[i];
    out[8] += wi * sn * y[i];
  }
  return out;
}

DS_AVX2 void exp_inplace(std::span<double> v) {
  const std::size_t n = v.size();
  const std::size_t nv = n - n % 4;
  for (std::size_t i = 0; i < nv; i += 4) _mm256_storeu_pd(&v[i], exp4(_mm256_loadu_pd(&v[i])));
  for (std::size_t i = nv; i < n; ++i) v[i] = std::exp(v[i]);
}

#undef DS_AVX2

#else  // no x86: forward to the reference kernels

void add_gaussians(std::span<const double> x, std::span<const Line> lines, std::span<double> out) {
  scalar::add_gaussians(x, lines, out);
}
void add_lorentzians(std::span<const double> x, std::span<const Line> lines, std::span<double> out) {
  scalar::add_lorentzians(x, lines, out);
}
void scale_by_axis_power(std::span<const double> x, int power, double factor, std::span<double> values) {
  scalar::scale_by_axis_power(x, power, factor, values);
}
Cos2Sums cos2_sums(std::span<const double> cos2t, std::span<const double> sin2t,
                   std::span<const double> y, std::span<const double> w) {
  return scalar::cos2_sums(cos2t, sin2t, y, w);
}
void exp_inplace(std::span<double> v) { scalar::exp_inplace(v); }

#endif

}  // namespace defectspec::kernels::avx2

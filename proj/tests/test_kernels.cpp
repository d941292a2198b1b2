#include "doctest.h"

#include <cmath>
#include <random>
#include <vector>

#include "defectspec/kernels/kernels.hpp"

using namespace defectspec::kernels;

namespace {

bool have_avx2() { return detect_isa() == Isa::avx2; }

std::vector<double> random_vector(std::size_t n, double lo, double hi, unsigned seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (auto& x : v) x = d(gen);
  return v;
}

std::vector<Line> random_lines(std::size_t n, unsigned seed) {
  const auto c = random_vector(n, 1.5, 2.2, seed);
  const auto a = random_vector(n, 0.0, 1.0, seed + 1);
  const auto w = random_vector(n, 0.002, 0.05, seed + 2);
  std::vector<Line> lines;
  for (std::size_t i = 0; i < n; ++i) lines.push_back({c[i], a[i], w[i]});
  return lines;
}

double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double scale = 0.0, diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    scale = std::max(scale, std::abs(a[i]));
    diff = std::max(diff, std::abs(a[i] - b[i]));
  }
  return scale > 0 ? diff / scale : diff;
}

}  // namespace

TEST_CASE("isa names and override") {
  CHECK(to_string(Isa::scalar) == "scalar");
  CHECK(to_string(Isa::avx2) == "avx2");
  const Isa before = active_isa();
  set_active_isa(Isa::scalar);
  CHECK(active_isa() == Isa::scalar);
  set_active_isa(Isa::avx2);
  CHECK(active_isa() == detect_isa());
  set_active_isa(before);
}

// Sizes straddle the vector width so remainder loops are exercised.
TEST_CASE("gaussian and lorentzian kernels agree across ISAs") {
  if (!have_avx2()) return;
  for (std::size_t n : {1u, 3u, 4u, 7u, 1001u}) {
    const auto x = random_vector(n, 1.4, 2.3, 7 + n);
    const auto lines = random_lines(13, 99 + n);
    std::vector<double> s(n, 0.5), v(n, 0.5);
    scalar::add_gaussians(x, lines, s);
    avx2::add_gaussians(x, lines, v);
    CHECK(max_rel_diff(s, v) < 1e-13);
    std::fill(s.begin(), s.end(), 0.0);
    std::fill(v.begin(), v.end(), 0.0);
    scalar::add_lorentzians(x, lines, s);
    avx2::add_lorentzians(x, lines, v);
    CHECK(max_rel_diff(s, v) < 1e-14);
  }
}

TEST_CASE("gaussian kernel integrates each line to its area") {
  std::vector<double> x;
  for (int i = 0; i <= 20000; ++i) x.push_back(1.0 + i * 1e-4);
  const std::vector<Line> lines{{2.0, 0.7, 0.01}};
  std::vector<double> y(x.size(), 0.0);
  add_gaussians(x, lines, y);
  double integral = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) integral += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
  CHECK(integral == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("axis power scaling is bit-identical across ISAs") {
  if (!have_avx2()) return;
  for (int power : {-3, -2, 2, 3}) {
    for (std::size_t n : {2u, 5u, 64u, 333u}) {
      const auto x = random_vector(n, 400.0, 800.0, 3 + n);
      auto s = random_vector(n, 0.0, 100.0, 5 + n);
      auto v = s;
      scalar::scale_by_axis_power(x, power, 1.0 / 1239.8419, s);
      avx2::scale_by_axis_power(x, power, 1.0 / 1239.8419, v);
      CHECK(s == v);
    }
  }
}

TEST_CASE("cos2 normal-equation sums agree across ISAs") {
  if (!have_avx2()) return;
  for (std::size_t n : {6u, 9u, 36u, 181u}) {
    const auto t = random_vector(n, 0.0, 3.14159, 11 + n);
    std::vector<double> c(n), s(n);
    for (std::size_t i = 0; i < n; ++i) {
      c[i] = std::cos(2 * t[i]);
      s[i] = std::sin(2 * t[i]);
    }
    const auto y = random_vector(n, 0.0, 1e4, 17 + n);
    const auto w = random_vector(n, 1e-4, 1.0, 19 + n);
    const auto a = scalar::cos2_sums(c, s, y, w);
    const auto b = avx2::cos2_sums(c, s, y, w);
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(b[k] == doctest::Approx(a[k]).epsilon(1e-13).scale(1e-9));
  }
}

TEST_CASE("vector exp matches std::exp") {
  if (!have_avx2()) return;
  std::vector<double> v{-800.0, -708.5, -50.0, -1e-8, 0.0, 1e-8, 0.5, 1.0, 10.0, 300.0, 700.0};
  const auto extra = random_vector(101, -700.0, 700.0, 23);
  v.insert(v.end(), extra.begin(), extra.end());
  auto s = v, a = v;
  scalar::exp_inplace(s);
  avx2::exp_inplace(a);
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (s[i] < 1e-300) {
      CHECK(a[i] <= 1e-300);
    } else {
      CHECK(a[i] == doctest::Approx(s[i]).epsilon(4e-16));
    }
  }
}

TEST_CASE("dispatched kernels follow the active ISA") {
  const auto x = random_vector(50, 1.8, 2.1, 29);
  const auto lines = random_lines(4, 31);
  const Isa before = active_isa();
  set_active_isa(Isa::scalar);
  std::vector<double> a(50, 0.0), ref(50, 0.0);
  add_gaussians(x, lines, a);
  scalar::add_gaussians(x, lines, ref);
  CHECK(a == ref);
  set_active_isa(before);
}

#include "defectspec/kernels/kernels.hpp"

#include <atomic>
#include <cstdlib>

namespace defectspec::kernels {

std::string_view to_string(Isa isa) {
  switch (isa) {
    case Isa::scalar: return "scalar";
    case Isa::avx2: return "avx2";
  }
  return "unknown";
}

Isa detect_isa() {
#if defined(__x86_64__) || defined(_M_X64)
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) return Isa::avx2;
#endif
  return Isa::scalar;
}

namespace {

Isa initial_isa() {
  if (const char* v = std::getenv("DEFECTSPEC_FORCE_SCALAR"); v != nullptr && *v != '\0' && *v != '0')
    return Isa::scalar;
  return detect_isa();
}

std::atomic<Isa>& current() {
  static std::atomic<Isa> isa{initial_isa()};
  return isa;
}

}  // namespace

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (isa == Isa::avx2 && detect_isa() != Isa::avx2) isa = Isa::scalar;
  current().store(isa, std::memory_order_relaxed);
}

void add_gaussians(std::span<const double> x, std::span<const Line> lines, std::span<double> out) {
  if (active_isa() == Isa::avx2) return avx2::add_gaussians(x, lines, out);
  scalar::add_gaussians(x, lines, out);
}

void add_lorentzians(std::span<const double> x, std::span<const Line> lines, std::span<double> out) {
  if (active_isa() == Isa::avx2) return avx2::add_lorentzians(x, lines, out);
  scalar::add_lorentzians(x, lines, out);
}

void scale_by_axis_power(std::span<const double> x, int power, double factor, std::span<double> values) {
  if (active_isa() == Isa::avx2) return avx2::scale_by_axis_power(x, power, factor, values);
  scalar::scale_by_axis_power(x, power, factor, values);
}

Cos2Sums cos2_sums(std::span<const double> cos2t, std::span<const double> sin2t,
                   std::span<const double> y, std::span<const double> w) {
  if (active_isa() == Isa::avx2) return avx2::cos2_sums(cos2t, sin2t, y, w);
  return scalar::cos2_sums(cos2t, sin2t, y, w);
}

}  // namespace defectspec::kernels

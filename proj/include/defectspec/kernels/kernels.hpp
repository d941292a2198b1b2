#pragma once

// Data-parallel inner loops shared by band synthesis, spectral conversions
// and the polarization fits. Each kernel has a scalar reference and an AVX2
// variant; the dispatcher picks one at runtime from the host CPU features.

#include <array>
#include <span>
#include <string_view>

namespace defectspec::kernels {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa);

/// Best instruction set supported by the running CPU.
Isa detect_isa();

/// Instruction set the dispatcher currently routes to. Starts at
/// detect_isa() unless DEFECTSPEC_FORCE_SCALAR is set in the environment.
Isa active_isa();

/// Overrides the dispatcher; requesting an unsupported ISA falls back to scalar.
void set_active_isa(Isa isa);

/// One spectral line: normalized profile centred at `center` with weight `area`.
/// `width` is the Gaussian sigma or the Lorentzian half-width, in axis units.
struct Line {
  double center;
  double area;
  double width;
};

/// Weighted sums of the double-angle design [1, cos2t, sin2t] against y.
/// Layout: {S_w, S_wc, S_ws, S_wcc, S_wcs, S_wss, S_wy, S_wcy, S_wsy}.
using Cos2Sums = std::array<double, 9>;

// Reference implementations.
namespace scalar {
void add_gaussians(std::span<const double> x, std::span<const Line> lines, std::span<double> out);
void add_lorentzians(std::span<const double> x, std::span<const Line> lines, std::span<double> out);
void scale_by_axis_power(std::span<const double> x, int power, double factor, std::span<double> values);
Cos2Sums cos2_sums(std::span<const double> cos2t, std::span<const double> sin2t,
                   std::span<const double> y, std::span<const double> w);
void exp_inplace(std::span<double> v);
}  // namespace scalar

// AVX2+FMA variants. Only callable when detect_isa() == Isa::avx2.
namespace avx2 {
void add_gaussians(std::span<const double> x, std::span<const Line> lines, std::span<double> out);
void add_lorentzians(std::span<const double> x, std::span<const Line> lines, std::span<double> out);
void scale_by_axis_power(std::span<const double> x, int power, double factor, std::span<double> values);
Cos2Sums cos2_sums(std::span<const double> cos2t, std::span<const double> sin2t,
                   std::span<const double> y, std::span<const double> w);
void exp_inplace(std::span<double> v);
}  // namespace avx2

// Dispatched entry points.
void add_gaussians(std::span<const double> x, std::span<const Line> lines, std::span<double> out);
void add_lorentzians(std::span<const double> x, std::span<const Line> lines, std::span<double> out);

/// values[i] *= factor * x[i]^power
void scale_by_axis_power(std::span<const double> x, int power, double factor, std::span<double> values);

Cos2Sums cos2_sums(std::span<const double> cos2t, std::span<const double> sin2t,
                   std::span<const double> y, std::span<const double> w);

}  // namespace defectspec::kernels

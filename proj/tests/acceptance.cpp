// Acceptance suite: one line per criterion, exit status 1 if any fails.
// Reference values come from closed forms evaluated here, independent of the
// library code paths under test.

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <sys/wait.h>

#include "defectspec/band.hpp"
#include "defectspec/calibration.hpp"
#include "defectspec/classify.hpp"
#include "defectspec/error.hpp"
#include "defectspec/io.hpp"
#include "defectspec/peaks.hpp"
#include "defectspec/photostats.hpp"
#include "defectspec/polarfit.hpp"
#include "defectspec/synth.hpp"
#include "defectspec/units.hpp"
#include "defectspec/vibronic.hpp"

namespace fs = std::filesystem;
using namespace defectspec;
using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "FAILED: " << what << "; ";
    }
  }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

double poisson_pmf(double s, int n) { return std::exp(-s + n * std::log(s) - std::lgamma(n + 1.0)); }

// Distance between two axial angles (period 180), in [0, 90].
double axial_distance(double a, double b) {
  const double d = std::fmod(std::abs(a - b), 180.0);
  return std::min(d, 180.0 - d);
}

vibronic::VibronicSystem reference_system() {
  vibronic::VibronicSystem s;
  s.zpl_energy_ev = 2.06;
  s.modes = {{180.0, 1.0}};
  s.emission_dipole_deg = 35.0;
  s.absorption_dipole_deg = 35.0;
  return s;
}

spectra::LineshapeSpec reference_lineshape() {
  spectra::LineshapeSpec l;
  l.zpl_fwhm_mev = 10.0;
  l.sideband_fwhm_growth_mev = 10.0;
  return l;
}

std::vector<double> reference_grid() { return spectra::uniform_grid(1.1, 2.2, 0.001); }

std::vector<double> scan_angles() {
  std::vector<double> a;
  for (int k = 0; k < 18; ++k) a.push_back(10.0 * k);
  return a;
}

// ------------------------------------------------------------------ CLI

struct Cli {
  fs::path exe = DEFECTSPEC_CLI_PATH;
  fs::path log_dir;

  int run(const fs::path& out_dir, const std::string& args) const {
    static int counter = 0;
    const auto log = log_dir / ("cli_" + std::to_string(counter++) + ".log");
    const std::string cmd =
        "\"" + exe.string() + "\" --out-dir \"" + out_dir.string() + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }
};

fs::path work_root() { return fs::current_path() / "acceptance_work"; }

std::string quoted(const fs::path& p) { return "\"" + p.string() + "\""; }

json read_json(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("missing output " + p.string());
  return json::parse(in);
}

// simulate -> calibrate -> fit -> classify on the bundled fig5 scenario
bool two_wavelength_pipeline(const Cli& cli, const fs::path& dir, unsigned threads, std::string& failure) {
  const fs::path scen = fs::path(DEFECTSPEC_SCENARIO_DIR) / "fig5.json";
  const std::string t = " --threads " + std::to_string(threads);
  const std::vector<std::string> steps = {
      "simulate --scenario " + quoted(scen),
      "calibrate --in " + quoted(dir / "calibration.csv"),
      "fit-polarization --scan " + quoted(dir / "emission.csv") + " --calibration " +
          quoted(dir / "calibration_map.json") + t,
      "fit-polarization --scan " + quoted(dir / "abs532.csv") + t,
      "fit-polarization --scan " + quoted(dir / "abs473.csv") + t,
      "classify --abs " + quoted(dir / "abs532_fit.json") + " --emit " + quoted(dir / "emission_fit.json") +
          " --out r532.jsonl",
      "classify --abs " + quoted(dir / "abs473_fit.json") + " --emit " + quoted(dir / "emission_fit.json") +
          " --out r473.jsonl",
  };
  for (const auto& s : steps) {
    if (const int code = cli.run(dir, s); code != 0) {
      failure = "exit " + std::to_string(code) + " from: " + s;
      return false;
    }
  }
  return true;
}

// ------------------------------------------------------------------ criteria

void franck_condon(Outcome& o) {
  const auto t0 = Clock::now();
  double worst_oracle = 0.0, worst_row = 0.0, worst_column = 0.0;
  for (double s : {0.1, 0.5, 1.0, 2.0, 5.0}) {
    for (int n = 0; n <= 15; ++n)
      for (int m = 0; m <= 15; ++m)
        worst_oracle =
            std::max(worst_oracle, std::abs(vibronic::franck_condon_factor(s, n, m) - vibronic::overlap_oracle(s, n, m)));
    for (int n = 0; n <= 40; ++n)
      worst_row = std::max(worst_row, std::abs(vibronic::franck_condon_factor(s, n, 0) - poisson_pmf(s, n)));
    for (int m = 0; m <= 15; ++m) {
      double sum = 0.0;
      for (int n = 0; n <= 250; ++n) sum += vibronic::franck_condon_factor(s, n, m);
      worst_column = std::max(worst_column, std::abs(sum - 1.0));
    }
  }
  const double elapsed = seconds_since(t0);
  o.require(worst_oracle <= 1e-8, "oracle agreement");
  o.require(worst_row <= 1e-12, "zero-temperature row");
  o.require(worst_column <= 1e-9, "column sums");
  o.require(elapsed < 10.0, "runtime");
  o.detail << "max|F-oracle|=" << worst_oracle << " max|row-Poisson|=" << worst_row
           << " max|colsum-1|=" << worst_column << " t=" << elapsed << "s";
}

void debye_waller(Outcome& o) {
  const double dw0 = vibronic::debye_waller({{180.0, 1.0}}, 0.0);
  o.require(dw0 == std::exp(-1.0), "DW(S=1, T=0) == e^-1");

  spectra::BandModel model;
  model.system = reference_system();
  model.lineshape = reference_lineshape();
  double zpl_weight = 0.0;
  for (const auto& l : spectra::band_lines(model))
    if (l.phonon_count == 0) zpl_weight += l.weight;
  o.require(std::abs(zpl_weight - std::exp(-1.0)) <= 1e-15, "ZPL line weight of the band");

  std::size_t violations = 0;
  for (double e : {10.0, 50.0, 180.0}) {
    const std::vector<vibronic::PhononMode> modes{{e, 1.0}, {2.5 * e, 0.4}};
    double prev = vibronic::debye_waller(modes, 0.0);
    for (int t = 1; t <= 800; ++t) {
      const double cur = vibronic::debye_waller(modes, t);
      if (cur > prev) ++violations;
      prev = cur;
    }
  }
  o.require(violations == 0, "monotone in temperature");
  o.detail << "DW=" << dw0 << " (e^-1=" << std::exp(-1.0) << ") zpl_line=" << zpl_weight
           << " monotonicity violations=" << violations;
}

void mirror_symmetry(Outcome& o) {
  double worst = 0.0;
  std::vector<vibronic::VibronicSystem> systems{reference_system()};
  vibronic::VibronicSystem two = reference_system();
  two.modes = {{180.0, 0.8}, {95.0, 0.6}};
  systems.push_back(two);
  for (const auto& sys : systems) {
    spectra::BandModel model;
    model.system = sys;
    model.lineshape = reference_lineshape();
    model.oscillator_strength = 2.5;
    const auto grid = spectra::symmetric_grid(sys.zpl_energy_ev, 1.3, 0.0005);
    const auto em = spectra::synthesize_emission_band(model, grid);
    const auto ab = spectra::synthesize_absorption_band(model, grid);
    const std::size_t n = grid.size();
    for (std::size_t i = 0; i < n; ++i)
      worst = std::max(worst, std::abs(ab.values()[i] - em.values()[n - 1 - i]) / model.oscillator_strength);
  }
  o.require(worst <= 1e-10, "absorption equals mirrored emission");
  o.detail << "max|abs-mirror(em)|/W0=" << worst;
}

synth::SyntheticDefect reference_defect() {
  synth::SyntheticDefect d;
  d.system = reference_system();
  d.lineshape = reference_lineshape();
  d.emit_visibility = 0.9;
  return d;
}

void phonon_energy_and_flat_angle(Outcome& o) {
  const auto grid = reference_grid();
  const auto angles = scan_angles();
  auto d = reference_defect();

  const auto clean = synth::generate_scan(d, polarfit::ScanRole::emission_scan, angles, grid, {0, synth::NoiseKind::none});
  const auto peaks = spectra::find_zpl_and_sidebands(polarfit::unpolarized_spectrum(clean));
  o.require(std::abs(peaks.phonon_energy_mev - 180.0) <= 2.0, "noiseless phonon energy");
  o.detail << "noiseless hw=" << peaks.phonon_energy_mev << " meV; ";

  // brightness giving 1e5 expected counts in the whole scan
  double total = 0.0;
  for (const auto& s : clean.spectra)
    for (double v : s.values()) total += v;
  d.brightness *= 1e5 / total;
  const int seeds = 200;
  int within = 0;
  double worst = 0.0;
  for (int seed = 0; seed < seeds; ++seed) {
    const auto noisy = synth::generate_scan(d, polarfit::ScanRole::emission_scan, angles, grid,
                                            {static_cast<std::uint64_t>(seed), synth::NoiseKind::poisson});
    double err = 1e9;
    try {
      err = std::abs(spectra::find_zpl_and_sidebands(polarfit::unpolarized_spectrum(noisy)).phonon_energy_mev - 180.0);
    } catch (const Error&) {
    }
    worst = std::max(worst, err);
    if (err <= 5.0) ++within;
  }
  o.require(within == seeds, "noisy phonon energy within 5 meV for every seed");
  o.detail << "1e5-count seeds within 5 meV: " << within << "/" << seeds << " (worst " << worst << "); ";

  // flat dipole angle across the ZPL and the first two sidebands
  const auto resolved = polarfit::fit_spectrally_resolved(clean, 0.002);
  double lo = 1e9, hi = -1e9;
  std::size_t bins = 0;
  for (int k = 0; k <= 2; ++k) {
    const double centre = 2.06 - 0.18 * k;
    const double half = 0.5 * reference_lineshape().fwhm_mev(k) / 1000.0;
    for (std::size_t b = 0; b < resolved.size(); ++b) {
      if (std::abs(resolved.energies_ev[b] - centre) > half) continue;
      const auto th = resolved.theta_deg(b);
      if (!th) {
        lo = -1e9;
        continue;
      }
      lo = std::min(lo, *th);
      hi = std::max(hi, *th);
      ++bins;
    }
  }
  o.require(bins > 0 && hi - lo <= 1.0 && axial_distance(lo, 35.0) <= 1.0 && axial_distance(hi, 35.0) <= 1.0,
            "theta(E) flat across ZPL and sidebands");
  o.detail << "theta(E) range over " << bins << " bins: [" << lo << ", " << hi << "] deg";
}

spectra::Spectrum reference_luminescence(std::optional<std::uint64_t> seed) {
  spectra::BandModel model;
  model.system = reference_system();
  model.lineshape = reference_lineshape();
  const auto grid = reference_grid();
  const auto band = spectra::synthesize_emission_band(model, grid);
  std::vector<double> v(band.values());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] *= std::pow(grid[i], 3);
  const double top = *std::max_element(v.begin(), v.end());
  synth::CounterRng rng(seed.value_or(0), 0);
  for (auto& x : v) {
    x *= 1e5 / top;
    if (seed) x = synth::poisson_sample(rng, x);
  }
  return {spectra::AxisKind::energy_ev, spectra::UnitsKind::counts_per_energy, grid, v};
}

double band_peak_mev(const spectra::Spectrum& lum) {
  const auto w = spectra::to_stokes_axis(spectra::mirror_band(spectra::luminescence_to_emission_band(lum), 2.06), 2.06);
  double best = -1.0, at = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w.axis()[i] >= classify::filter_cutoff_mev && w.values()[i] > best) {
      best = w.values()[i];
      at = w.axis()[i];
    }
  return at;
}

void band_peak_region(Outcome& o) {
  const classify::PhononCatalog catalog;
  const double clean = band_peak_mev(reference_luminescence(std::nullopt));
  o.require(catalog.in_plane_optical.contains(clean), "noiseless W peak in [150, 203] meV");
  int inside = 0;
  const int seeds = 50;
  for (int seed = 1; seed <= seeds; ++seed)
    if (catalog.in_plane_optical.contains(band_peak_mev(reference_luminescence(seed)))) ++inside;
  o.require(inside == seeds, "noisy W peak in [150, 203] meV");
  o.detail << "W peak at " << clean << " meV; Poisson (1e5 peak counts) seeds in region: " << inside << "/" << seeds;
}

void two_wavelength_verdicts(Outcome& o, const Cli& cli) {
  const auto dir = work_root() / "two_wavelength";
  const auto t0 = Clock::now();
  std::string failure;
  const bool ran = two_wavelength_pipeline(cli, dir, 1, failure);
  const double elapsed = seconds_since(t0);
  o.require(ran, "pipeline " + failure);
  if (!ran) return;
  std::ifstream a(dir / "r532.jsonl"), b(dir / "r473.jsonl");
  std::string la, lb;
  std::getline(a, la);
  std::getline(b, lb);
  const auto r532 = json::parse(la);
  const auto r473 = json::parse(lb);
  const double d532 = r532.at("delta_theta_deg"), e532 = r532.at("stokes_shift_mev");
  const double d473 = r473.at("delta_theta_deg"), e473 = r473.at("stokes_shift_mev");
  o.require(d532 <= 5.0, "532 nm delta theta <= 5");
  o.require(r532.at("mechanism") == "DirectConsistent", "532 nm DirectConsistent");
  o.require(std::abs(e532 - 182.0) <= 2.0, "532 nm shift ~182 meV");
  o.require(std::abs(d473 - 50.0) <= 5.0, "473 nm delta theta 50 +/- 5");
  o.require(r473.at("mechanism") == "IndirectLikely", "473 nm IndirectLikely");
  o.require(std::abs(e473 - 472.0) <= 2.0, "473 nm shift ~472 meV");
  o.require(elapsed < 60.0, "runtime");
  o.detail << "532nm: dtheta=" << d532 << " dE=" << e532 << " " << r532.at("mechanism").get<std::string>()
           << "; 473nm: dtheta=" << d473 << " dE=" << e473 << " " << r473.at("mechanism").get<std::string>()
           << "; t=" << elapsed << "s";
}

void polarization_fitting(Outcome& o) {
  const auto angles = scan_angles();
  auto model = [&](double a, double b, double th) {
    std::vector<double> y;
    for (double t : angles) {
      const double c = std::cos((t - th) * units::deg_to_rad);
      y.push_back(a + b * c * c);
    }
    return y;
  };

  // noiseless round trip
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> ua(0.0, 500.0), ub(50.0, 2000.0), ut(0.0, 180.0);
  double worst_theta = 0.0, worst_ab = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double a = ua(gen), b = ub(gen), th = ut(gen);
    const auto f = polarfit::fit_cos2(angles, model(a, b, th));
    worst_theta = std::max(worst_theta, axial_distance(f.theta0_deg, th));
    worst_ab = std::max({worst_ab, std::abs(f.offset_a - a) / (a + b), std::abs(f.amplitude_b - b) / (a + b)});
  }
  o.require(worst_theta <= 1e-10 && worst_ab <= 1e-10, "noiseless round trip");

  // Poisson recovery at 1e4 mean counts per angle, V = 0.8
  const auto [a8, b8] = synth::modulation_for_visibility(0.8);
  int within = 0;
  const int seeds = 500;
  for (int seed = 0; seed < seeds; ++seed) {
    synth::CounterRng rng(seed, 1);
    const double th = 180.0 * rng.uniform();
    // mean of A + B cos^2 over angle is A + B/2
    const double scale = 1e4 / (a8 + 0.5 * b8);
    auto y = model(scale * a8, scale * b8, th);
    for (auto& v : y) v = synth::poisson_sample(rng, v);
    const auto f = polarfit::fit_cos2(angles, y);
    if (!f.degenerate && axial_distance(f.theta0_deg, th) <= 2.0) ++within;
  }
  o.require(within >= 475, "theta0 within 2 deg in >= 95% of seeds");

  // rotation equivariance and scale invariance on noisy data
  double worst_rot = 0.0, worst_scale = 0.0;
  for (int seed = 0; seed < 100; ++seed) {
    synth::CounterRng rng(seed, 2);
    const double th = 180.0 * rng.uniform();
    auto y = model(300.0, 900.0, th);
    for (auto& v : y) v = synth::poisson_sample(rng, v);
    const auto f = polarfit::fit_cos2(angles, y);
    for (int shift = 1; shift < 18; shift += 4) {
      std::vector<double> rotated(angles.size());
      for (std::size_t i = 0; i < angles.size(); ++i) rotated[(i + shift) % angles.size()] = y[i];
      const auto g = polarfit::fit_cos2(angles, rotated);
      worst_rot = std::max(worst_rot, axial_distance(g.theta0_deg, f.theta0_deg + 10.0 * shift));
    }
    for (double k : {3.0, 17.5}) {
      std::vector<double> scaled(y);
      for (auto& v : scaled) v *= k;
      const auto g = polarfit::fit_cos2(angles, scaled);
      worst_scale = std::max({worst_scale, axial_distance(g.theta0_deg, f.theta0_deg),
                              std::abs(g.amplitude_b / k - f.amplitude_b) / f.amplitude_b});
    }
  }
  o.require(worst_rot <= 1e-9, "rotation equivariance");
  o.require(worst_scale <= 1e-9, "scale invariance");
  o.detail << "round trip max dtheta=" << worst_theta << " max dA,dB/(A+B)=" << worst_ab << "; within 2 deg: " << within
           << "/" << seeds << "; equivariance=" << worst_rot << " scale=" << worst_scale;
}

void calibration(Outcome& o) {
  const synth::RetarderInstrument inst;
  const auto map = polarfit::build_calibration(synth::calibration_sweep(inst, spectra::uniform_grid(550.0, 740.0, 10.0)));
  double worst = 0.0;
  for (double lambda = 550.0; lambda <= 740.0 + 1e-9; lambda += 2.5)
    for (double theta = 0.0; theta < 180.0; theta += 0.5) {
      const double measured = inst.measured_angle_deg(theta, lambda);
      const auto c = polarfit::apply_calibration(measured, lambda, map);
      worst = std::max(worst, axial_distance(c.theta_true_deg, theta));
    }
  o.require(worst <= 0.5, "residual <= 0.5 deg");
  o.detail << "max residual " << worst << " deg over 550-740 nm, 0-180 deg";
}

void survey(Outcome& o) {
  const classify::PhononCatalog catalog;
  auto check = [&](std::uint64_t seed, std::ostringstream* detail) {
    const auto records = synth::generate_survey(103, {}, catalog, {seed, synth::NoiseKind::poisson});
    const auto st = classify::survey_stats(records, 5.0, catalog);
    const double frac = st.below_critical ? double(st.below_critical_small_delta) / st.below_critical : 0.0;
    const bool small = st.below_critical > 0 && frac >= 0.9;
    const bool ks = st.above_critical_uniformity.p_value >= 0.05;
    const bool vis = 2 * st.indirect_emit_exceeds_abs > st.indirect_records;
    if (detail) {
      *detail << "below 203 meV: " << st.below_critical_small_delta << "/" << st.below_critical
              << " with dtheta<15; KS D=" << st.above_critical_uniformity.statistic
              << " p=" << st.above_critical_uniformity.p_value << " (n=" << st.above_critical_uniformity.samples
              << "); indirect emitV>absV: " << st.indirect_emit_exceeds_abs << "/" << st.indirect_records;
    }
    return std::array<bool, 3>{small, ks, vis};
  };
  const auto r = check(2024, &o.detail);
  o.require(r[0], "small misalignment below the critical shift");
  o.require(r[1], "KS uniformity above the critical shift");
  o.require(r[2], "indirect emission visibility exceeds absorption");
  int all = 0;
  const int seeds = 200;
  for (int s = 0; s < seeds; ++s) {
    const auto x = check(static_cast<std::uint64_t>(s), nullptr);
    if (x[0] && x[1] && x[2]) ++all;
  }
  o.detail << "; over " << seeds << " other seeds all three hold in " << all;
}

void photostats_criterion(Outcome& o) {
  const auto tau = spectra::uniform_grid(-50.0, 50.0, 0.5);
  int single = 0;
  const int seeds = 500;
  for (int seed = 0; seed < seeds; ++seed) {
    const auto trace = synth::generate_g2(0.75, 3.0, tau, 200.0, {static_cast<std::uint64_t>(seed), synth::NoiseKind::poisson});
    try {
      const auto f = photostats::fit_g2(trace);
      if (photostats::is_single_emitter(f.g2_zero, f.g2_zero_sigma) == photostats::EmitterVerdict::single) ++single;
    } catch (const Error&) {
    }
  }
  o.require(single >= 495, "single-emitter verdict in >= 99% of seeds");

  const auto t = spectra::uniform_grid(0.0, 120.0, 0.05);
  double worst = 0.0;
  for (double tau_ns : {1.5, 3.0, 8.0}) {
    synth::DecaySpec spec;
    spec.tau_ns = tau_ns;
    spec.total_counts = 1e5;
    spec.background_per_bin = 2.0;
    for (int seed = 0; seed < 50; ++seed) {
      const auto h = synth::generate_decay(spec, t, {static_cast<std::uint64_t>(seed), synth::NoiseKind::poisson});
      const auto f = photostats::fit_lifetime(h, {0.0, 3.0});
      worst = std::max(worst, std::abs(f.tau_ns - tau_ns) / tau_ns);
    }
  }
  o.require(worst <= 0.05, "lifetime within 5%");
  o.detail << "single verdicts " << single << "/" << seeds << "; worst lifetime error " << 100.0 * worst
           << "% over tau in {1.5, 3, 8} ns x 50 seeds";
}

std::vector<std::pair<std::string, std::string>> snapshot(const fs::path& dir) {
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    files.emplace_back(fs::relative(e.path(), dir).string(), ss.str());
  }
  std::sort(files.begin(), files.end());
  return files;
}

bool full_pipeline(const Cli& cli, const fs::path& dir, unsigned threads, std::string& failure) {
  const fs::path scen = fs::path(DEFECTSPEC_SCENARIO_DIR);
  if (!two_wavelength_pipeline(cli, dir / "fig5", threads, failure)) return false;
  const auto f5 = dir / "fig5";
  const auto f3 = dir / "fig3";
  const std::vector<std::pair<fs::path, std::string>> steps = {
      {f5, "survey --svg --in " + quoted(f5 / "records.jsonl") + " --bin 5"},
      {f5, "g2-fit --in " + quoted(f5 / "g2.csv")},
      {f5, "lifetime-fit --in " + quoted(f5 / "decay.csv") + " --bg-window 0 3"},
      {f3, "simulate --scenario " + quoted(scen / "fig3.json")},
      {f3, "band --svg --in " + quoted(f3 / "luminescence.csv")},
      {f3, "fit-polarization --svg --scan " + quoted(f3 / "emission.csv") + " --threads " + std::to_string(threads)},
      {f3, "fc-table --s 0.5 --s 1 --n-max 15 --n-star-max 3"},
  };
  for (const auto& [out, args] : steps) {
    if (const int code = cli.run(out, args); code != 0) {
      failure = "exit " + std::to_string(code) + " from: " + args;
      return false;
    }
  }
  return true;
}

void determinism(Outcome& o, const Cli& cli) {
  const auto a = work_root() / "run_a";
  const auto b = work_root() / "run_b";
  std::string failure;
  const bool ok = full_pipeline(cli, a, 1, failure) && full_pipeline(cli, b, 4, failure);
  o.require(ok, "pipeline " + failure);
  if (!ok) return;
  const auto sa = snapshot(a);
  const auto sb = snapshot(b);
  std::size_t differing = 0;
  if (sa.size() != sb.size()) {
    o.require(false, "same file set");
  } else {
    for (std::size_t i = 0; i < sa.size(); ++i)
      if (sa[i] != sb[i]) {
        ++differing;
        o.detail << "differs: " << sa[i].first << "; ";
      }
  }
  o.require(differing == 0, "byte-identical outputs");
  o.detail << sa.size() << " files compared between a single-threaded and a 4-thread run";
}

}  // namespace

int main() {
  Cli cli;
  std::error_code ec;
  fs::remove_all(work_root(), ec);
  fs::create_directories(work_root());
  cli.log_dir = work_root();

  const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
      {"1 franck-condon factors", franck_condon},
      {"2 debye-waller weight", debye_waller},
      {"3 mirror symmetry", mirror_symmetry},
      {"4 phonon energy and flat dipole angle", phonon_energy_and_flat_angle},
      {"5 band peak in the in-plane optical region", band_peak_region},
      {"6 two-wavelength pipeline verdicts", [&](Outcome& o) { two_wavelength_verdicts(o, cli); }},
      {"7 polarization fitting", polarization_fitting},
      {"8 calibration round trip", calibration},
      {"9 survey statistics", survey},
      {"10 photon statistics", photostats_criterion},
      {"11 determinism", [&](Outcome& o) { determinism(o, cli); }},
  };

  int failed = 0;
  for (const auto& [name, run] : criteria) {
    Outcome o;
    try {
      run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail << "exception: " << e.what();
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << name << "  | " << o.detail.str() << std::endl;
  }
  std::cout << (failed ? "FAILED " : "ALL PASSED ") << criteria.size() - failed << "/" << criteria.size() << std::endl;
  return failed ? 1 : 0;
}

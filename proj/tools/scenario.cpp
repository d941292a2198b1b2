#include "scenario.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "defectspec/band.hpp"
#include "defectspec/calibration.hpp"
#include "defectspec/io.hpp"
#include "defectspec/synth.hpp"
#include "defectspec/units.hpp"
#include "json_util.hpp"

namespace defectspec::cli {

namespace {

// Distinct noise streams per product, all derived from the scenario seed.
enum class Product : std::uint64_t { scan = 1, g2 = 2, decay = 3, survey = 4, luminescence = 5 };

std::uint64_t product_seed(std::uint64_t seed, Product p, std::uint64_t index = 0) {
  return synth::splitmix64(seed ^ synth::splitmix64((static_cast<std::uint64_t>(p) << 32) | index));
}

std::vector<double> range(const nlohmann::json& j, std::string_view where, bool inclusive) {
  check_keys(j, where, {"start", "stop", "step"});
  const double start = required<double>(j, "start", where);
  const double stop = required<double>(j, "stop", where);
  const double step = required<double>(j, "step", where);
  if (!(step > 0.0) || !(stop > start)) throw Error(ErrorKind::domain, std::string(where) + " must have stop > start and step > 0");
  std::vector<double> out;
  const auto n = static_cast<long>(std::floor((stop - start) / step + 1e-9));
  for (long k = 0; k <= n; ++k) {
    const double v = start + static_cast<double>(k) * step;
    if (!inclusive && v > stop - 1e-9 * step) break;
    out.push_back(v);
  }
  return out;
}

vibronic::VibronicSystem parse_system(const nlohmann::json& j) {
  check_keys(j, "system",
             {"zpl_energy_ev", "zpl_wavelength_nm", "modes", "emission_dipole_deg", "absorption_dipole_deg"});
  nlohmann::json copy = j;
  if (j.contains("zpl_wavelength_nm")) {
    if (j.contains("zpl_energy_ev")) throw Error(ErrorKind::schema, "give either zpl_energy_ev or zpl_wavelength_nm");
    copy["zpl_energy_ev"] = units::wavelength_nm_to_energy_ev(required<double>(j, "zpl_wavelength_nm", "system"));
    copy.erase("zpl_wavelength_nm");
  }
  return io::system_from_json(copy);
}

spectra::LineshapeSpec parse_lineshape(const nlohmann::json& j) {
  check_keys(j, "lineshape", {"kind", "zpl_fwhm_mev", "sideband_fwhm_growth_mev"});
  spectra::LineshapeSpec l;
  const auto kind = value_or<std::string>(j, "kind", "gaussian");
  if (kind == "gaussian") {
    l.kind = spectra::LineshapeKind::gaussian;
  } else if (kind == "lorentzian") {
    l.kind = spectra::LineshapeKind::lorentzian;
  } else {
    throw Error(ErrorKind::schema, "unknown lineshape kind '" + kind + "'");
  }
  l.zpl_fwhm_mev = value_or(j, "zpl_fwhm_mev", l.zpl_fwhm_mev);
  l.sideband_fwhm_growth_mev = value_or(j, "sideband_fwhm_growth_mev", l.sideband_fwhm_growth_mev);
  l.validate();
  return l;
}

class Writer {
public:
  Writer(std::string dir, io::Metadata provenance) : dir_(std::move(dir)), provenance_(std::move(provenance)) {
    std::filesystem::create_directories(dir_);
  }

  template <class F>
  void write(const std::string& name, F&& body) {
    const auto path = (std::filesystem::path(dir_) / name).string();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorKind::parse, "cannot write '" + path + "'");
    body(out);
    written_.push_back(path);
    names_.push_back(name);
  }

  io::Metadata meta(io::Metadata extra = {}) const {
    for (const auto& [k, v] : provenance_) extra.emplace(k, v);
    return extra;
  }

  const std::vector<std::string>& written() const { return written_; }
  const std::vector<std::string>& names() const { return names_; }

private:
  std::string dir_;
  io::Metadata provenance_;
  std::vector<std::string> written_;
  std::vector<std::string> names_;
};

std::string safe_name(const std::string& name) {
  if (name.empty() || name.find_first_of("/\\") != std::string::npos || name.front() == '.')
    throw Error(ErrorKind::schema, "output name '" + name + "' must be a plain file stem");
  return name;
}

synth::RetarderInstrument parse_instrument(const nlohmann::json& cj) {
  check_keys(cj, "calibration",
             {"wavelengths_nm", "fast_axis_deg", "compensated_nm", "retardance_slope_deg_per_nm",
              "rotation_offset_deg", "rotation_curvature_deg"});
  synth::RetarderInstrument inst;
  inst.fast_axis_deg = value_or(cj, "fast_axis_deg", inst.fast_axis_deg);
  inst.compensated_nm = value_or(cj, "compensated_nm", inst.compensated_nm);
  inst.retardance_slope_deg_per_nm = value_or(cj, "retardance_slope_deg_per_nm", inst.retardance_slope_deg_per_nm);
  inst.rotation_offset_deg = value_or(cj, "rotation_offset_deg", inst.rotation_offset_deg);
  inst.rotation_curvature_deg = value_or(cj, "rotation_curvature_deg", inst.rotation_curvature_deg);
  return inst;
}

}  // namespace

std::vector<std::string> run_scenario(const nlohmann::json& sc, const SimulateOptions& opt) {
  check_keys(sc, "scenario",
             {"name", "description", "seed", "noise", "system", "lineshape", "temperature_k", "grid_ev", "angles_deg",
              "brightness", "emit_visibility", "scans", "luminescence", "band", "g2", "decay", "survey",
              "calibration"});
  const std::uint64_t seed = opt.seed ? *opt.seed : value_or<std::uint64_t>(sc, "seed", 0);
  const auto noise_kind = synth::parse_noise_kind(value_or<std::string>(sc, "noise", "poisson"));
  const std::string name = value_or<std::string>(sc, "name", "scenario");

  Writer w(opt.out_dir, {{"seed", std::to_string(seed)}, {"rng", std::string(synth::CounterRng::algorithm)},
                         {"scenario", name}});
  nlohmann::json manifest;
  manifest["scenario"] = name;
  manifest["seed"] = seed;
  manifest["rng"] = synth::CounterRng::algorithm;
  manifest["noise"] = synth::to_string(noise_kind);

  // emission scans are recorded through the calibration instrument when one is declared
  std::optional<synth::RetarderInstrument> instrument;
  if (sc.contains("calibration")) instrument = parse_instrument(sc.at("calibration"));

  std::optional<synth::SyntheticDefect> defect;
  std::vector<double> grid;
  if (sc.contains("system")) {
    synth::SyntheticDefect d;
    d.system = parse_system(sc.at("system"));
    if (sc.contains("lineshape")) d.lineshape = parse_lineshape(sc.at("lineshape"));
    d.temperature_k = value_or(sc, "temperature_k", 0.0);
    d.brightness = value_or(sc, "brightness", 1e4);
    d.emit_visibility = value_or(sc, "emit_visibility", 1.0);
    d.validate();
    defect = d;
    if (!sc.contains("grid_ev")) throw Error(ErrorKind::schema, "scenario with a system needs grid_ev");
    grid = range(sc.at("grid_ev"), "grid_ev", true);
  }

  if (sc.contains("band") || sc.contains("luminescence")) {
    if (!defect) throw Error(ErrorKind::schema, "band output needs a system");
    spectra::BandModel model = defect->band_model();
    model.truncation_tolerance = opt.truncation_tolerance;
    if (value_or(sc, "band", false)) {
      const auto band = spectra::synthesize_emission_band(model, grid);
      w.write("band.csv", [&](std::ostream& o) { io::write_spectrum(o, band, w.meta()); });
    }
    if (sc.contains("luminescence")) {
      const auto& lj = sc.at("luminescence");
      check_keys(lj, "luminescence", {"peak_counts", "noise"});
      const double peak_counts = value_or(lj, "peak_counts", 1e4);
      const bool noisy = synth::parse_noise_kind(value_or<std::string>(lj, "noise", "none")) == synth::NoiseKind::poisson;
      // luminescence ~ E^3 times the emission band
      const auto band = spectra::synthesize_emission_band(model, grid);
      std::vector<double> v(band.values());
      for (std::size_t i = 0; i < v.size(); ++i) v[i] *= grid[i] * grid[i] * grid[i];
      const double top = *std::max_element(v.begin(), v.end());
      synth::CounterRng rng(product_seed(seed, Product::luminescence), 0);
      for (auto& x : v) {
        x = peak_counts * x / top;
        if (noisy) x = synth::poisson_sample(rng, x);
      }
      const spectra::Spectrum lum(spectra::AxisKind::energy_ev, spectra::UnitsKind::counts_per_energy, grid, v);
      w.write("luminescence.csv", [&](std::ostream& o) {
        io::write_spectrum(o, lum, w.meta({{"zpl_energy_ev", io::format_double(defect->system.zpl_energy_ev)}}));
      });
    }
  }

  if (sc.contains("scans")) {
    if (!defect) throw Error(ErrorKind::schema, "scans need a system");
    if (!sc.contains("angles_deg")) throw Error(ErrorKind::schema, "scans need angles_deg");
    const auto angles = range(sc.at("angles_deg"), "angles_deg", false);
    std::uint64_t index = 0;
    for (const auto& sj : sc.at("scans")) {
      check_keys(sj, "scan",
                 {"name", "role", "excitation_nm", "mechanism", "indirect_theta_deg", "indirect_weight",
                  "abs_visibility", "emit_visibility"});
      auto d = *defect;
      const auto role = polarfit::parse_scan_role(required<std::string>(sj, "role", "scan"));
      d.mechanism.kind = synth::parse_mechanism_kind(value_or<std::string>(sj, "mechanism", "direct"));
      d.mechanism.indirect_theta_deg = value_or(sj, "indirect_theta_deg", 0.0);
      d.mechanism.indirect_weight = value_or(sj, "indirect_weight", 0.0);
      d.abs_visibility = value_or(sj, "abs_visibility", 1.0);
      d.emit_visibility = value_or(sj, "emit_visibility", d.emit_visibility);
      const auto stem = safe_name(required<std::string>(sj, "name", "scan"));
      const auto scan =
          synth::generate_scan(d, role, angles, grid, {product_seed(seed, Product::scan, index++), noise_kind}, instrument);
      io::Metadata extra;
      if (sj.contains("excitation_nm")) extra["excitation_nm"] = io::format_double(required<double>(sj, "excitation_nm", "scan"));
      w.write(stem + ".csv", [&](std::ostream& o) { io::write_scan(o, scan, w.meta(extra)); });
    }
  }

  if (sc.contains("g2")) {
    const auto& gj = sc.at("g2");
    check_keys(gj, "g2", {"dip_depth", "tau_c_ns", "tau_ns", "mean_coincidences"});
    const auto tau = range(gj.contains("tau_ns") ? gj.at("tau_ns") : nlohmann::json{{"start", -50}, {"stop", 50}, {"step", 0.5}},
                           "g2.tau_ns", true);
    const auto trace = synth::generate_g2(required<double>(gj, "dip_depth", "g2"), required<double>(gj, "tau_c_ns", "g2"),
                                          tau, value_or(gj, "mean_coincidences", 200.0),
                                          {product_seed(seed, Product::g2), noise_kind});
    w.write("g2.csv", [&](std::ostream& o) { io::write_g2(o, trace, w.meta()); });
  }

  if (sc.contains("decay")) {
    const auto& dj = sc.at("decay");
    check_keys(dj, "decay", {"tau_ns", "total_counts", "pulse_time_ns", "pulse_fwhm_ns", "background_per_bin", "time_ns"});
    synth::DecaySpec spec;
    spec.tau_ns = required<double>(dj, "tau_ns", "decay");
    spec.total_counts = value_or(dj, "total_counts", spec.total_counts);
    spec.pulse_time_ns = value_or(dj, "pulse_time_ns", spec.pulse_time_ns);
    spec.pulse_fwhm_ns = value_or(dj, "pulse_fwhm_ns", spec.pulse_fwhm_ns);
    spec.background_per_bin = value_or(dj, "background_per_bin", spec.background_per_bin);
    const auto t = range(dj.contains("time_ns") ? dj.at("time_ns") : nlohmann::json{{"start", 0}, {"stop", 60}, {"step", 0.05}},
                         "decay.time_ns", true);
    const auto h = synth::generate_decay(spec, t, {product_seed(seed, Product::decay), noise_kind});
    w.write("decay.csv", [&](std::ostream& o) { io::write_decay(o, h, w.meta()); });
  }

  if (sc.contains("survey")) {
    const auto& sj = sc.at("survey");
    check_keys(sj, "survey", {"n", "mix"});
    synth::SurveyMix mix;
    if (sj.contains("mix")) {
      const auto& mj = sj.at("mix");
      check_keys(mj, "survey.mix",
                 {"direct_fraction", "direct_sigma_deg", "direct_stokes_mev", "indirect_stokes_mev", "excitation_nm",
                  "emit_visibility", "direct_visibility_scatter", "indirect_abs_ratio"});
      auto pair = [&](const char* key, double& lo, double& hi) {
        if (!mj.contains(key)) return;
        const auto v = value_or<std::vector<double>>(mj, key, {});
        if (v.size() != 2) throw Error(ErrorKind::schema, std::string("'") + key + "' needs two values");
        lo = v[0];
        hi = v[1];
      };
      mix.direct_fraction = value_or(mj, "direct_fraction", mix.direct_fraction);
      mix.direct_sigma_deg = value_or(mj, "direct_sigma_deg", mix.direct_sigma_deg);
      mix.excitation_nm = value_or(mj, "excitation_nm", mix.excitation_nm);
      mix.direct_visibility_scatter = value_or(mj, "direct_visibility_scatter", mix.direct_visibility_scatter);
      pair("direct_stokes_mev", mix.direct_stokes_min_mev, mix.direct_stokes_max_mev);
      pair("indirect_stokes_mev", mix.indirect_stokes_min_mev, mix.indirect_stokes_max_mev);
      pair("emit_visibility", mix.emit_visibility_min, mix.emit_visibility_max);
      pair("indirect_abs_ratio", mix.indirect_abs_ratio_min, mix.indirect_abs_ratio_max);
    }
    const auto records = synth::generate_survey(required<std::size_t>(sj, "n", "survey"), mix, {},
                                                {product_seed(seed, Product::survey), noise_kind});
    w.write("records.jsonl", [&](std::ostream& o) { io::write_records(o, records); });
  }

  if (instrument) {
    const auto& cj = sc.at("calibration");
    const auto lambdas = range(required<nlohmann::json>(cj, "wavelengths_nm", "calibration"), "calibration.wavelengths_nm", true);
    const auto sweep = synth::calibration_sweep(*instrument, lambdas);
    w.write("calibration.csv", [&](std::ostream& o) { io::write_calibration_measurements(o, sweep, w.meta()); });
  }

  manifest["files"] = w.names();
  w.write("manifest.json", [&](std::ostream& o) { o << io::dump_json(manifest); });
  return w.written();
}

}  // namespace defectspec::cli

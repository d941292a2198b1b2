// defectspec command-line front end. Each subcommand reads CSV/JSON inputs,
// runs one analysis stage and writes its declared outputs into the output
// directory; written paths are listed on stdout.
//
// Exit status: 0 success, 2 usage error, 1 data or fit error (with a one-line
// JSON error object on stderr).

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "defectspec/band.hpp"
#include "defectspec/calibration.hpp"
#include "defectspec/classify.hpp"
#include "defectspec/error.hpp"
#include "defectspec/io.hpp"
#include "defectspec/peaks.hpp"
#include "defectspec/photostats.hpp"
#include "defectspec/polarfit.hpp"
#include "defectspec/units.hpp"
#include "defectspec/vibronic.hpp"
#include "json_util.hpp"
#include "scenario.hpp"
#include "svg.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace defectspec;

namespace {

constexpr const char* out_dir_env = "DEFECTSPEC_OUT_DIR";

struct RunConfig {
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  double theta_tolerance_deg = classify::default_theta_tolerance_deg;
  double truncation_tolerance = 1e-9;
  double prominence = 0.05;
  double bin_width_ev = 0.002;
  unsigned threads = 1;
  bool svg = false;
  classify::PhononCatalog catalog;
};

classify::PhononCatalog load_catalog(const json& j) {
  if (j.is_string()) return io::catalog_from_json(io::read_json_file(j.get<std::string>()));
  return io::catalog_from_json(j);
}

void apply_config_file(const std::string& path, RunConfig& cfg) {
  const json j = io::read_json_file(path);
  cli::check_keys(j, "config",
                  {"out_dir", "seed", "theta_tolerance_deg", "truncation_tolerance", "prominence", "bin_width_ev",
                   "threads", "svg", "catalog"});
  cfg.out_dir = cli::value_or(j, "out_dir", cfg.out_dir);
  if (j.contains("seed")) cfg.seed = cli::value_or<std::uint64_t>(j, "seed", 0);
  cfg.theta_tolerance_deg = cli::value_or(j, "theta_tolerance_deg", cfg.theta_tolerance_deg);
  cfg.truncation_tolerance = cli::value_or(j, "truncation_tolerance", cfg.truncation_tolerance);
  cfg.prominence = cli::value_or(j, "prominence", cfg.prominence);
  cfg.bin_width_ev = cli::value_or(j, "bin_width_ev", cfg.bin_width_ev);
  cfg.threads = cli::value_or(j, "threads", cfg.threads);
  cfg.svg = cli::value_or(j, "svg", cfg.svg);
  if (j.contains("catalog")) cfg.catalog = load_catalog(j.at("catalog"));
}

void validate_config(const RunConfig& cfg) {
  if (!(cfg.theta_tolerance_deg > 0.0 && cfg.theta_tolerance_deg <= 90.0))
    throw Error(ErrorKind::domain, "theta tolerance must lie in (0, 90] degrees");
  if (!(cfg.truncation_tolerance > 0.0 && cfg.truncation_tolerance <= 1e-3))
    throw Error(ErrorKind::domain, "truncation tolerance must lie in (0, 1e-3]");
  if (!(cfg.prominence > 0.0 && cfg.prominence < 1.0)) throw Error(ErrorKind::domain, "prominence must lie in (0, 1)");
  if (!(cfg.bin_width_ev > 0.0)) throw Error(ErrorKind::domain, "bin width must be positive");
  if (cfg.threads < 1 || cfg.threads > 256) throw Error(ErrorKind::domain, "threads must lie in [1, 256]");
  cfg.catalog.validate();
}

class Outputs {
public:
  explicit Outputs(std::string dir) : dir_(std::move(dir)) {}

  std::string path(const std::string& name) const { return (fs::path(dir_) / name).string(); }

  void write(const std::string& name, const std::string& content) {
    fs::create_directories(dir_);
    const auto p = path(name);
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorKind::parse, "cannot write '" + p + "'");
    out << content;
    std::cout << p << '\n';
  }

  template <class F>
  void write_with(const std::string& name, F&& body) {
    std::ostringstream os;
    body(os);
    write(name, os.str());
  }

private:
  std::string dir_;
};

template <class F>
auto read_file(const std::string& path, F&& reader) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::parse, "cannot open '" + path + "'");
  return reader(in);
}

json nullable(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

std::string stem_of(const std::string& path) { return fs::path(path).stem().string(); }

// ---------------------------------------------------------------- fc-table

struct FcTableArgs {
  std::vector<double> huang_rhys;
  int n_max = 10;
  int n_star_max = 0;
  std::string out = "fc_table.csv";
};

void run_fc_table(const FcTableArgs& a, const RunConfig&, Outputs& out) {
  if (a.n_max < 0 || a.n_star_max < 0) throw Error(ErrorKind::domain, "phonon numbers must be non-negative");
  io::Table t;
  t.columns = {"S", "n", "n_star", "F"};
  for (double s : a.huang_rhys)
    for (int ns = 0; ns <= a.n_star_max; ++ns)
      for (int n = 0; n <= a.n_max; ++n)
        t.rows.push_back({s, double(n), double(ns), vibronic::franck_condon_factor(s, n, ns)});
  out.write_with(a.out, [&](std::ostream& o) { io::write_table(o, t); });
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
  std::string scenario;
};

std::string resolve_scenario(const std::string& path) {
  if (fs::exists(path)) return path;
#ifdef DEFECTSPEC_BUNDLED_SCENARIOS
  const auto bundled = fs::path(DEFECTSPEC_BUNDLED_SCENARIOS) / path;
  if (fs::exists(bundled)) return bundled.string();
#endif
  throw Error(ErrorKind::parse, "cannot open scenario '" + path + "'");
}

void run_simulate(const SimulateArgs& a, const RunConfig& cfg, Outputs&) {
  const json sc = io::read_json_file(resolve_scenario(a.scenario));
  cli::SimulateOptions opt;
  opt.out_dir = cfg.out_dir;
  opt.seed = cfg.seed;
  opt.truncation_tolerance = cfg.truncation_tolerance;
  for (const auto& p : cli::run_scenario(sc, opt)) std::cout << p << '\n';
}

// ---------------------------------------------------------------- band

struct BandArgs {
  std::string input;
  std::optional<double> zpl_ev;
  std::string prefix = "w_band";
};

void run_band(const BandArgs& a, const RunConfig& cfg, Outputs& out) {
  io::Table raw = read_file(a.input, [](std::istream& in) { return io::read_table(in); });
  const auto lum_in = read_file(a.input, [](std::istream& in) { return io::read_spectrum(in); });
  double zpl = 0.0;
  if (a.zpl_ev) {
    zpl = *a.zpl_ev;
  } else if (raw.meta.count("zpl_energy_ev")) {
    zpl = std::stod(raw.meta.at("zpl_energy_ev"));
  } else {
    throw Error(ErrorKind::schema, "ZPL energy needed: pass --zpl-ev or a zpl_energy_ev header entry");
  }
  if (!(zpl > 0.0)) throw Error(ErrorKind::domain, "ZPL energy must be positive");

  spectra::Spectrum lum = lum_in;
  if (lum.axis_kind() == spectra::AxisKind::wavelength_nm) lum = spectra::wavelength_counts_to_energy_counts(lum);
  if (lum.units_kind() != spectra::UnitsKind::counts_per_energy)
    throw Error(ErrorKind::schema, "luminescence input must be counts per wavelength or per energy");
  const auto w = spectra::to_stokes_axis(spectra::mirror_band(spectra::luminescence_to_emission_band(lum), zpl), zpl);

  // sideband maximum: the ZPL itself sits at zero shift, below the filter cutoff
  std::optional<double> peak;
  double best = -1.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w.axis()[i] >= classify::filter_cutoff_mev && w.values()[i] > best) {
      best = w.values()[i];
      peak = w.axis()[i];
    }
  }
  json summary;
  summary["input"] = fs::path(a.input).filename().string();
  summary["zpl_energy_ev"] = zpl;
  summary["sideband_peak_stokes_mev"] = nullable(peak);
  summary["sideband_peak_region"] = peak ? json(classify::to_string(classify::phonon_region(*peak, cfg.catalog))) : json(nullptr);
  summary["search_from_mev"] = classify::filter_cutoff_mev;

  out.write_with(a.prefix + ".csv", [&](std::ostream& o) { io::write_spectrum(o, w, {{"zpl_energy_ev", io::format_double(zpl)}}); });
  out.write(a.prefix + "_summary.json", io::dump_json(summary));
  if (cfg.svg) {
    cli::PlotSpec spec{"W(dE): mirrored emission band", "Stokes shift (meV)", "band density (arb.)", {}};
    for (int k = 1; k <= 3; ++k) {
      spec.x_markers.push_back(cfg.catalog.region(k).lo_mev);
      spec.x_markers.push_back(cfg.catalog.region(k).hi_mev);
    }
    out.write(a.prefix + ".svg", cli::render_svg(spec, {{"W", w.axis(), w.values(), false}}));
  }
}

// ---------------------------------------------------------------- fit-polarization

struct FitArgs {
  std::string scan;
  std::optional<std::string> calibration;
  std::optional<double> excitation_nm;
  std::optional<std::string> prefix;
};

void run_fit_polarization(const FitArgs& a, const RunConfig& cfg, Outputs& out) {
  const io::Table raw = read_file(a.scan, [](std::istream& in) { return io::read_table(in); });
  const auto scan = read_file(a.scan, [](std::istream& in) { return io::read_scan(in); });
  std::optional<double> excitation = a.excitation_nm;
  if (!excitation && raw.meta.count("excitation_nm")) excitation = std::stod(raw.meta.at("excitation_nm"));
  std::optional<polarfit::CalibrationMap> cal;
  if (a.calibration) cal = io::calibration_map_from_json(io::read_json_file(*a.calibration));
  const bool calibrate = cal && scan.role == polarfit::ScanRole::emission_scan;

  const auto resolved = polarfit::fit_spectrally_resolved(scan, cfg.bin_width_ev, cfg.threads);
  const auto averaged = polarfit::fit_spectrally_averaged(scan);

  auto unpolarized = polarfit::unpolarized_spectrum(scan);
  if (unpolarized.axis_kind() == spectra::AxisKind::wavelength_nm)
    unpolarized = spectra::wavelength_counts_to_energy_counts(unpolarized);
  std::optional<spectra::PeakReport> peaks;
  try {
    peaks = spectra::find_zpl_and_sidebands(unpolarized, cfg.prominence);
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::not_found) throw;
  }

  // calibration corrects angles in the collection path at each bin's wavelength
  auto corrected = [&](double theta, double energy_ev) {
    if (!calibrate) return theta;
    return polarfit::apply_calibration(theta, units::energy_ev_to_wavelength_nm(energy_ev), *cal).theta_true_deg;
  };
  auto corrected_visibility = [&](double v, double theta_true, double energy_ev) {
    if (!calibrate) return v;
    return polarfit::correct_visibility(v, units::energy_ev_to_wavelength_nm(energy_ev), theta_true, *cal);
  };

  io::Table t;
  t.meta = raw.meta;
  t.meta["role"] = std::string(polarfit::to_string(scan.role));
  t.meta["calibrated"] = calibrate ? "true" : "false";
  t.columns = {"energy_ev", "total_counts", "theta_deg", "theta_sigma_deg", "visibility", "degenerate"};
  std::vector<double> plot_e, plot_theta;
  for (std::size_t b = 0; b < resolved.size(); ++b) {
    const auto& f = resolved.fits[b];
    const double e = resolved.energies_ev[b];
    double theta = std::numeric_limits<double>::quiet_NaN();
    double vis = resolved.visibility[b];
    if (!f.degenerate) {
      theta = corrected(f.theta0_deg, e);
      vis = corrected_visibility(vis, theta, e);
    }
    t.rows.push_back({e, resolved.total_counts[b], theta, f.theta0_sigma_deg, vis, f.degenerate ? 1.0 : 0.0});
    plot_e.push_back(e);
    plot_theta.push_back(theta);
  }

  const double reference_e = peaks ? peaks->zpl_energy_ev : resolved.energies_ev[resolved.brightest_bin()];
  std::optional<double> theta_avg;
  double vis_avg = polarfit::visibility(averaged).value;
  bool degenerate = averaged.degenerate;
  if (calibrate) {
    // the correction depends on wavelength, so average corrected bins: a
    // count-weighted mean in doubled-angle space
    double c2 = 0.0, s2 = 0.0, vsum = 0.0, wsum = 0.0;
    for (const auto& row : t.rows) {
      if (row[5] != 0.0) continue;
      const double phi = 2.0 * row[2] * units::deg_to_rad;
      c2 += row[1] * row[4] * std::cos(phi);
      s2 += row[1] * row[4] * std::sin(phi);
      vsum += row[1] * row[4];
      wsum += row[1];
    }
    degenerate = !(wsum > 0.0);
    if (!degenerate) {
      double th = 0.5 * std::atan2(s2, c2) * units::rad_to_deg;
      if (th < 0.0) th += 180.0;
      theta_avg = th;
      vis_avg = vsum / wsum;
    }
  } else {
    theta_avg = averaged.theta();
  }
  const std::size_t zb = resolved.bin_near(reference_e);
  std::optional<double> theta_zpl;
  if (resolved.theta_deg(zb)) theta_zpl = corrected(*resolved.theta_deg(zb), resolved.energies_ev[zb]);

  json s;
  s["scan"] = fs::path(a.scan).filename().string();
  s["role"] = polarfit::to_string(scan.role);
  s["metadata"] = raw.meta;
  s["excitation_nm"] = nullable(excitation);
  s["bin_width_ev"] = cfg.bin_width_ev;
  s["calibrated"] = calibrate;
  s["theta_deg"] = nullable(theta_avg);
  s["visibility"] = vis_avg;
  s["degenerate"] = degenerate;
  s["theta_zpl_deg"] = nullable(theta_zpl);
  s["fit"] = io::to_json(averaged);
  if (peaks) {
    s["zpl_energy_ev"] = peaks->zpl_energy_ev;
    s["zpl_uncertainty_ev"] = peaks->zpl_uncertainty_ev;
    s["sideband_energies_ev"] = peaks->sideband_energies_ev;
    s["phonon_energy_mev"] = peaks->phonon_energy_mev;
    s["phonon_energy_uncertainty_mev"] = peaks->phonon_energy_uncertainty_mev;
  } else {
    s["zpl_energy_ev"] = nullptr;
  }

  const std::string prefix = a.prefix ? *a.prefix : stem_of(a.scan);
  out.write_with(prefix + "_theta.csv", [&](std::ostream& o) { io::write_table(o, t); });
  out.write(prefix + "_fit.json", io::dump_json(s));
  if (cfg.svg) {
    cli::PlotSpec spec{"dipole angle vs energy (" + std::string(polarfit::to_string(scan.role)) + ")", "energy (eV)",
                       "theta (deg)", {}};
    if (peaks) spec.x_markers.push_back(peaks->zpl_energy_ev);
    out.write(prefix + "_theta.svg", cli::render_svg(spec, {{"theta", plot_e, plot_theta, true}}));
  }
}

// ---------------------------------------------------------------- calibrate

struct CalibrateArgs {
  std::string input;
  bool hwp = false;
  std::string out = "calibration_map.json";
};

void run_calibrate(const CalibrateArgs& a, const RunConfig&, Outputs& out) {
  const auto m = read_file(a.input, [](std::istream& in) { return io::read_calibration_measurements(in); });
  const auto map = polarfit::build_calibration(m, a.hwp);
  out.write(a.out, io::dump_json(io::to_json(map)));
}

// ---------------------------------------------------------------- classify

struct ClassifyArgs {
  std::optional<std::string> abs_fit;
  std::optional<std::string> emit_fit;
  std::optional<std::string> record;
  std::optional<double> excitation_nm;
  std::optional<double> zpl_ev;
  bool tilt_caveat = false;
  std::string out = "record.jsonl";
};

double fit_number(const json& j, const char* key, const std::string& file) {
  if (!j.contains(key) || j.at(key).is_null())
    throw Error(ErrorKind::schema, std::string("fit summary '") + file + "' has no usable '" + key + "'");
  return cli::value_or<double>(j, key, 0.0);
}

void run_classify(const ClassifyArgs& a, const RunConfig& cfg, Outputs& out) {
  classify::DefectRecord r;
  if (a.record) {
    if (a.abs_fit || a.emit_fit) throw Error(ErrorKind::schema, "give either --record or fit summaries, not both");
    r = io::record_from_json(io::read_json_file(*a.record));
  } else {
    if (!a.abs_fit || !a.emit_fit) throw Error(ErrorKind::schema, "classify needs --abs and --emit fit summaries");
    const json ja = io::read_json_file(*a.abs_fit);
    const json je = io::read_json_file(*a.emit_fit);
    if (cli::value_or<std::string>(ja, "role", "") != "absorption_scan")
      throw Error(ErrorKind::schema, "'" + *a.abs_fit + "' is not an absorption-scan fit");
    if (cli::value_or<std::string>(je, "role", "") != "emission_scan")
      throw Error(ErrorKind::schema, "'" + *a.emit_fit + "' is not an emission-scan fit");
    r.theta_abs_deg = fit_number(ja, "theta_deg", *a.abs_fit);
    r.theta_emit_deg = fit_number(je, "theta_deg", *a.emit_fit);
    r.abs_visibility = fit_number(ja, "visibility", *a.abs_fit);
    r.emit_visibility = fit_number(je, "visibility", *a.emit_fit);
    if (!a.excitation_nm) r.excitation_energy_ev = units::wavelength_nm_to_energy_ev(fit_number(ja, "excitation_nm", *a.abs_fit));
    if (!a.zpl_ev) r.zpl_energy_ev = fit_number(je, "zpl_energy_ev", *a.emit_fit);
  }
  if (a.excitation_nm) r.excitation_energy_ev = units::wavelength_nm_to_energy_ev(*a.excitation_nm);
  if (a.zpl_ev) r.zpl_energy_ev = *a.zpl_ev;
  r.tilt_caveat = r.tilt_caveat || a.tilt_caveat;
  r = classify::complete_record(r, cfg.theta_tolerance_deg, cfg.catalog);
  out.write(a.out, io::to_json(r).dump() + "\n");
}

// ---------------------------------------------------------------- survey

struct SurveyArgs {
  std::string input;
  double bin_deg = 5.0;
  double cluster_tolerance_deg = 5.0;
  std::string prefix = "survey";
};

void run_survey(const SurveyArgs& a, const RunConfig& cfg, Outputs& out) {
  auto records = read_file(a.input, [](std::istream& in) { return io::read_records(in); });
  for (auto& r : records) r = classify::complete_record(r, cfg.theta_tolerance_deg, cfg.catalog);
  const auto st = classify::survey_stats(records, a.bin_deg, cfg.catalog, a.cluster_tolerance_deg);

  std::ostringstream scatter;
  scatter << "stokes_shift_mev,delta_theta_deg,region,mechanism\n";
  std::vector<double> sx, sy;
  for (const auto& row : st.scatter) {
    scatter << io::format_double(row.stokes_shift_mev) << ',' << io::format_double(row.delta_theta_deg) << ','
            << classify::to_string(row.region) << ',' << classify::to_string(row.mechanism) << '\n';
    sx.push_back(row.stokes_shift_mev);
    sy.push_back(row.delta_theta_deg);
  }
  io::Table hist;
  hist.columns = {"bin_lo_deg", "bin_hi_deg", "count"};
  for (std::size_t b = 0; b < st.histogram_counts.size(); ++b)
    hist.rows.push_back({st.histogram_edges_deg[b], st.histogram_edges_deg[b + 1], double(st.histogram_counts[b])});

  json s;
  s["records"] = records.size();
  s["histogram_bin_deg"] = st.histogram_bin_deg;
  s["critical_stokes_mev"] = cfg.catalog.critical_stokes();
  s["theta_tolerance_deg"] = cfg.theta_tolerance_deg;
  s["cluster_tolerance_deg"] = st.cluster_tolerance_deg;
  s["clusters"] = json::array();
  for (const auto& c : st.clusters) s["clusters"].push_back({{"angle_deg", c.angle_deg}, {"fraction", c.fraction}});
  s["below_critical"] = st.below_critical;
  s["below_critical_small_delta"] = st.below_critical_small_delta;
  s["small_delta_deg"] = st.small_delta_deg;
  s["above_critical_ks"] = {{"statistic", st.above_critical_uniformity.statistic},
                            {"p_value", st.above_critical_uniformity.p_value},
                            {"samples", st.above_critical_uniformity.samples}};
  s["emit_exceeds_abs"] = st.emit_exceeds_abs;
  s["indirect_records"] = st.indirect_records;
  s["indirect_emit_exceeds_abs"] = st.indirect_emit_exceeds_abs;

  out.write(a.prefix + "_scatter.csv", scatter.str());
  out.write_with(a.prefix + "_histogram.csv", [&](std::ostream& o) { io::write_table(o, hist); });
  out.write(a.prefix + "_summary.json", io::dump_json(s));
  if (cfg.svg) {
    cli::PlotSpec spec{"dipole misalignment vs Stokes shift", "Stokes shift (meV)", "delta theta (deg)",
                       {cfg.catalog.critical_stokes()}};
    out.write(a.prefix + "_scatter.svg", cli::render_svg(spec, {{"records", sx, sy, true}}));
  }
}

// ---------------------------------------------------------------- g2-fit / lifetime-fit

struct G2Args {
  std::string input;
  std::string out = "g2_fit.json";
};

void run_g2(const G2Args& a, const RunConfig&, Outputs& out) {
  const auto trace = read_file(a.input, [](std::istream& in) { return io::read_g2(in); });
  const auto f = photostats::fit_g2(trace);
  json s;
  s["input"] = fs::path(a.input).filename().string();
  s["dip_depth"] = f.dip_depth;
  s["correlation_time_ns"] = f.correlation_time_ns;
  s["correlation_time_sigma_ns"] = f.correlation_time_sigma_ns;
  s["g2_zero"] = f.g2_zero;
  s["g2_zero_sigma"] = f.g2_zero_sigma;
  s["background"] = f.background;
  s["chi2"] = f.chi2;
  s["iterations"] = f.iterations;
  s["verdict"] = photostats::to_string(photostats::is_single_emitter(f.g2_zero, f.g2_zero_sigma));
  out.write(a.out, io::dump_json(s));
}

struct LifetimeArgs {
  std::string input;
  std::vector<double> bg_window;
  double tail_offset_ns = 1.0;
  std::string out = "lifetime_fit.json";
};

void run_lifetime(const LifetimeArgs& a, const RunConfig&, Outputs& out) {
  const auto h = read_file(a.input, [](std::istream& in) { return io::read_decay(in); });
  const auto f = photostats::fit_lifetime(h, {a.bg_window.at(0), a.bg_window.at(1)}, a.tail_offset_ns);
  json s;
  s["input"] = fs::path(a.input).filename().string();
  s["tau_ns"] = f.tau_ns;
  s["tau_sigma_ns"] = f.tau_sigma_ns;
  s["amplitude"] = f.amplitude;
  s["background"] = f.background;
  s["tail_start_ns"] = f.tail_start_ns;
  s["tail_bins"] = f.tail_bins;
  s["chi2"] = f.chi2;
  s["iterations"] = f.iterations;
  out.write(a.out, io::dump_json(s));
}

void report_error(const Error& e) {
  json j;
  j["error"] = to_string(e.kind());
  j["message"] = e.what();
  if (const auto* pe = dynamic_cast<const ParseError*>(&e)) j["line"] = pe->line();
  if (!e.diagnostics().empty()) j["diagnostics"] = e.diagnostics();
  std::cerr << j.dump() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"defectspec: vibronic band synthesis and polarization spectroscopy analysis"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::string> config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<double> theta_tol, trunc_tol, prominence, bin_width;
  std::optional<unsigned> threads;
  std::optional<std::string> catalog_path;
  bool svg = false;
  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out-dir", out_dir, std::string("output directory (default: $") + out_dir_env + " or .)");
  app.add_option("--seed", seed, "RNG seed override");
  app.add_option("--theta-tolerance", theta_tol, "alignment tolerance for the mechanism verdict (deg)");
  app.add_option("--truncation-tolerance", trunc_tol, "Franck-Condon truncation tolerance");
  app.add_option("--prominence", prominence, "minimum peak prominence as a fraction of the spectrum range");
  app.add_option("--bin-width-ev", bin_width, "energy bin width for spectrally resolved fits (eV)");
  app.add_option("--threads", threads, "worker threads for per-bin fits");
  app.add_option("--catalog", catalog_path, "JSON phonon catalog override");
  app.add_flag("--svg", svg, "also write SVG plots");

  FcTableArgs fc;
  auto* fc_cmd = app.add_subcommand("fc-table", "tabulate Franck-Condon factors");
  fc_cmd->add_option("--s", fc.huang_rhys, "Huang-Rhys factor(s)")->required();
  fc_cmd->add_option("--n-max", fc.n_max, "largest final phonon number");
  fc_cmd->add_option("--n-star-max", fc.n_star_max, "largest initial phonon number");
  fc_cmd->add_option("--out", fc.out, "output file name");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "generate synthetic measurements from a scenario");
  sim_cmd->add_option("--scenario", sim.scenario, "scenario JSON (bundled: fig3.json, fig5.json)")->required();

  BandArgs band;
  auto* band_cmd = app.add_subcommand("band", "luminescence -> mirrored band on a Stokes-shift axis");
  band_cmd->add_option("--in", band.input, "luminescence spectrum CSV")->required();
  band_cmd->add_option("--zpl-ev", band.zpl_ev, "ZPL energy (eV)");
  band_cmd->add_option("--prefix", band.prefix, "output file prefix");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit-polarization", "cos^2 fits of an angle-resolved scan");
  fit_cmd->add_option("--scan", fit.scan, "angle-resolved scan CSV")->required();
  fit_cmd->add_option("--calibration", fit.calibration, "calibration map JSON");
  fit_cmd->add_option("--excitation-nm", fit.excitation_nm, "excitation wavelength (nm)");
  fit_cmd->add_option("--prefix", fit.prefix, "output file prefix (default: scan file stem)");

  CalibrateArgs cal;
  auto* cal_cmd = app.add_subcommand("calibrate", "build a calibration map from reference measurements");
  cal_cmd->add_option("--in", cal.input, "calibration measurement CSV")->required();
  cal_cmd->add_flag("--hwp", cal.hwp, "measured angles are half-wave-plate angles");
  cal_cmd->add_option("--out", cal.out, "output file name");

  ClassifyArgs cls;
  auto* cls_cmd = app.add_subcommand("classify", "classify one defect from fit summaries or a record");
  cls_cmd->add_option("--abs", cls.abs_fit, "absorption-scan fit summary JSON");
  cls_cmd->add_option("--emit", cls.emit_fit, "emission-scan fit summary JSON");
  cls_cmd->add_option("--record", cls.record, "defect record JSON");
  cls_cmd->add_option("--excitation-nm", cls.excitation_nm, "excitation wavelength override (nm)");
  cls_cmd->add_option("--zpl-ev", cls.zpl_ev, "ZPL energy override (eV)");
  cls_cmd->add_flag("--tilt-caveat", cls.tilt_caveat, "flag possible flake tilt");
  cls_cmd->add_option("--out", cls.out, "output file name");

  SurveyArgs sur;
  auto* sur_cmd = app.add_subcommand("survey", "aggregate defect records");
  sur_cmd->add_option("--in", sur.input, "defect records (JSON lines)")->required();
  sur_cmd->add_option("--bin", sur.bin_deg, "histogram bin width (deg)");
  sur_cmd->add_option("--cluster-tolerance", sur.cluster_tolerance_deg, "cluster window half-width (deg)");
  sur_cmd->add_option("--prefix", sur.prefix, "output file prefix");

  G2Args g2;
  auto* g2_cmd = app.add_subcommand("g2-fit", "fit an antibunching dip");
  g2_cmd->add_option("--in", g2.input, "g2 trace CSV")->required();
  g2_cmd->add_option("--out", g2.out, "output file name");

  LifetimeArgs life;
  auto* life_cmd = app.add_subcommand("lifetime-fit", "fit a mono-exponential decay tail");
  life_cmd->add_option("--in", life.input, "decay histogram CSV")->required();
  life_cmd->add_option("--bg-window", life.bg_window, "background window start stop (ns)")->expected(2)->required();
  life_cmd->add_option("--tail-offset", life.tail_offset_ns, "tail start after the pulse peak (ns)");
  life_cmd->add_option("--out", life.out, "output file name");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg;
    if (const char* env = std::getenv(out_dir_env); env && *env) cfg.out_dir = env;
    if (config_path) apply_config_file(*config_path, cfg);
    if (out_dir) cfg.out_dir = *out_dir;
    if (seed) cfg.seed = seed;
    if (theta_tol) cfg.theta_tolerance_deg = *theta_tol;
    if (trunc_tol) cfg.truncation_tolerance = *trunc_tol;
    if (prominence) cfg.prominence = *prominence;
    if (bin_width) cfg.bin_width_ev = *bin_width;
    if (threads) cfg.threads = *threads;
    if (catalog_path) cfg.catalog = load_catalog(json(*catalog_path));
    cfg.svg = cfg.svg || svg;
    validate_config(cfg);

    Outputs out(cfg.out_dir);
    if (fc_cmd->parsed()) run_fc_table(fc, cfg, out);
    if (sim_cmd->parsed()) run_simulate(sim, cfg, out);
    if (band_cmd->parsed()) run_band(band, cfg, out);
    if (fit_cmd->parsed()) run_fit_polarization(fit, cfg, out);
    if (cal_cmd->parsed()) run_calibrate(cal, cfg, out);
    if (cls_cmd->parsed()) run_classify(cls, cfg, out);
    if (sur_cmd->parsed()) run_survey(sur, cfg, out);
    if (g2_cmd->parsed()) run_g2(g2, cfg, out);
    if (life_cmd->parsed()) run_lifetime(life, cfg, out);
  } catch (const Error& e) {
    report_error(e);
    return 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "internal"}, {"message", e.what()}}.dump() << '\n';
    return 1;
  }
  return 0;
}

#include "defectspec/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "defectspec/error.hpp"

namespace defectspec::io {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto comma = line.find(',', pos);
    out.push_back(trim(line.substr(pos, comma == std::string_view::npos ? std::string_view::npos : comma - pos)));
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return out;
}

double parse_number(std::string_view field, std::size_t line) {
  double x = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, x);
  if (field.empty() || ec != std::errc() || ptr != end)
    throw ParseError("malformed number '" + std::string(field) + "' on line " + std::to_string(line), line);
  return x;
}

void parse_metadata(std::string_view body, Metadata& meta) {
  for (auto item : split(body)) {
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) continue;
    meta.emplace(std::string(trim(item.substr(0, eq))), std::string(trim(item.substr(eq + 1))));
  }
}

std::string metadata_line(const Metadata& meta) {
  std::string out = "#";
  bool first = true;
  for (const auto& [k, v] : meta) {
    out += first ? " " : ",";
    out += k + "=" + v;
    first = false;
  }
  return out;
}

const std::string& require_meta(const Table& t, const std::string& key) {
  const auto it = t.meta.find(key);
  if (it == t.meta.end()) throw Error(ErrorKind::schema, "missing '" + key + "' in the header comment");
  return it->second;
}

void expect_columns(const Table& t, std::initializer_list<std::string_view> names) {
  if (t.columns.size() < names.size() ||
      !std::equal(names.begin(), names.end(), t.columns.begin())) {
    std::string want;
    for (auto n : names) want += (want.empty() ? "" : ",") + std::string(n);
    throw Error(ErrorKind::schema, "expected columns '" + want + "'");
  }
}

Metadata merged(Metadata base, const Metadata& extra) {
  for (const auto& [k, v] : extra) base.emplace(k, v);
  return base;
}

template <class T>
T get_field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorKind::schema, std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorKind::schema, std::string("field '") + key + "' has the wrong type");
  }
}

std::vector<double> double_array(const nlohmann::json& j, const char* key) {
  return get_field<std::vector<double>>(j, key);
}

nlohmann::json interval_json(const classify::EnergyInterval& iv) { return nlohmann::json::array({iv.lo_mev, iv.hi_mev}); }

classify::EnergyInterval interval_from(const nlohmann::json& j, const char* key, classify::EnergyInterval fallback) {
  if (!j.contains(key)) return fallback;
  const auto v = double_array(j, key);
  if (v.size() != 2) throw Error(ErrorKind::schema, std::string("interval '") + key + "' needs two bounds");
  return {v[0], v[1]};
}

}  // namespace

std::string format_double(double x) {
  if (x == 0.0) return "0";  // folds -0
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

std::size_t Table::column(std::string_view name) const {
  const auto it = std::find(columns.begin(), columns.end(), name);
  if (it == columns.end()) throw Error(ErrorKind::schema, "missing column '" + std::string(name) + "'");
  return static_cast<std::size_t>(it - columns.begin());
}

Table read_table(std::istream& in) {
  Table t;
  std::string raw;
  std::size_t line = 0;
  bool have_header = false;
  while (std::getline(in, raw)) {
    ++line;
    const auto s = trim(raw);
    if (s.empty()) continue;
    if (s.front() == '#') {
      if (!have_header) parse_metadata(s.substr(1), t.meta);
      continue;
    }
    const auto fields = split(s);
    if (!have_header) {
      for (auto f : fields) t.columns.emplace_back(f);
      have_header = true;
      continue;
    }
    if (fields.size() != t.columns.size())
      throw ParseError("expected " + std::to_string(t.columns.size()) + " fields on line " + std::to_string(line) +
                           ", found " + std::to_string(fields.size()),
                       line);
    std::vector<double> row;
    row.reserve(fields.size());
    for (auto f : fields) row.push_back(parse_number(f, line));
    t.rows.push_back(std::move(row));
    t.row_lines.push_back(line);
  }
  if (!have_header) throw ParseError("missing header row", line);
  return t;
}

void write_table(std::ostream& out, const Table& t) {
  if (!t.meta.empty()) out << metadata_line(t.meta) << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i) out << (i ? "," : "") << t.columns[i];
  out << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_double(row[i]);
    out << '\n';
  }
}

Table read_table_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::parse, "cannot open '" + path + "'");
  return read_table(in);
}

void write_table_file(const std::string& path, const Table& table) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::parse, "cannot write '" + path + "'");
  write_table(out, table);
}

spectra::Spectrum read_spectrum(std::istream& in) {
  const Table t = read_table(in);
  const auto axis_kind = spectra::parse_axis_kind(require_meta(t, "axis_kind"));
  const auto units_kind = spectra::parse_units_kind(require_meta(t, "units_kind"));
  expect_columns(t, {spectra::to_string(axis_kind), spectra::to_string(units_kind)});
  std::vector<double> axis, values;
  for (const auto& r : t.rows) {
    axis.push_back(r[0]);
    values.push_back(r[1]);
  }
  return spectra::Spectrum(axis_kind, units_kind, std::move(axis), std::move(values));
}

void write_spectrum(std::ostream& out, const spectra::Spectrum& s, const Metadata& extra) {
  Table t;
  t.meta = merged({{"axis_kind", std::string(spectra::to_string(s.axis_kind()))},
                   {"units_kind", std::string(spectra::to_string(s.units_kind()))}},
                  extra);
  t.columns = {std::string(spectra::to_string(s.axis_kind())), std::string(spectra::to_string(s.units_kind()))};
  for (std::size_t i = 0; i < s.size(); ++i) t.rows.push_back({s.axis()[i], s.values()[i]});
  write_table(out, t);
}

polarfit::AngleResolvedSpectrum read_scan(std::istream& in) {
  const Table t = read_table(in);
  const auto axis_kind = spectra::parse_axis_kind(require_meta(t, "axis_kind"));
  polarfit::AngleResolvedSpectrum scan;
  scan.role = polarfit::parse_scan_role(require_meta(t, "role"));
  expect_columns(t, {"angle_deg", spectra::to_string(axis_kind), "counts"});
  const auto units_kind = axis_kind == spectra::AxisKind::wavelength_nm ? spectra::UnitsKind::counts_per_wavelength
                                                                         : spectra::UnitsKind::counts_per_energy;
  std::size_t i = 0;
  while (i < t.rows.size()) {
    const double angle = t.rows[i][0];
    std::vector<double> axis, counts;
    for (; i < t.rows.size() && t.rows[i][0] == angle; ++i) {
      axis.push_back(t.rows[i][1]);
      counts.push_back(t.rows[i][2]);
    }
    if (std::find(scan.angles_deg.begin(), scan.angles_deg.end(), angle) != scan.angles_deg.end())
      throw ParseError("rows for angle " + format_double(angle) + " are not contiguous", t.row_lines[i - 1]);
    scan.angles_deg.push_back(angle);
    scan.spectra.emplace_back(axis_kind, units_kind, std::move(axis), std::move(counts));
  }
  scan.validate();
  return scan;
}

void write_scan(std::ostream& out, const polarfit::AngleResolvedSpectrum& scan, const Metadata& extra) {
  if (scan.spectra.empty()) throw Error(ErrorKind::domain, "scan has no spectra");
  const auto axis_kind = scan.spectra.front().axis_kind();
  Table t;
  t.meta = merged({{"axis_kind", std::string(spectra::to_string(axis_kind))},
                   {"role", std::string(polarfit::to_string(scan.role))}},
                  extra);
  t.columns = {"angle_deg", std::string(spectra::to_string(axis_kind)), "counts"};
  for (std::size_t a = 0; a < scan.angles_deg.size(); ++a) {
    const auto& s = scan.spectra[a];
    for (std::size_t k = 0; k < s.size(); ++k) t.rows.push_back({scan.angles_deg[a], s.axis()[k], s.values()[k]});
  }
  write_table(out, t);
}

std::vector<polarfit::CalibrationMeasurement> read_calibration_measurements(std::istream& in) {
  const Table t = read_table(in);
  expect_columns(t, {"wavelength_nm", "theta_true_deg", "theta_measured_deg", "visibility"});
  std::vector<polarfit::CalibrationMeasurement> out;
  for (const auto& r : t.rows) out.push_back({r[0], r[1], r[2], r[3]});
  return out;
}

void write_calibration_measurements(std::ostream& out, const std::vector<polarfit::CalibrationMeasurement>& m,
                                    const Metadata& extra) {
  Table t;
  t.meta = extra;
  t.columns = {"wavelength_nm", "theta_true_deg", "theta_measured_deg", "visibility"};
  for (const auto& x : m) t.rows.push_back({x.wavelength_nm, x.theta_true_deg, x.theta_measured_deg, x.visibility});
  write_table(out, t);
}

photostats::CorrelationTrace read_g2(std::istream& in) {
  const Table t = read_table(in);
  expect_columns(t, {"tau_ns", "g2"});
  const bool has_sigma = std::find(t.columns.begin(), t.columns.end(), "sigma") != t.columns.end();
  const std::size_t sc = has_sigma ? t.column("sigma") : 0;
  photostats::CorrelationTrace tr;
  for (const auto& r : t.rows) {
    tr.tau_ns.push_back(r[0]);
    tr.g2.push_back(r[1]);
    if (has_sigma) tr.sigma.push_back(r[sc]);
  }
  return tr;
}

void write_g2(std::ostream& out, const photostats::CorrelationTrace& tr, const Metadata& extra) {
  Table t;
  t.meta = extra;
  t.columns = {"tau_ns", "g2"};
  const bool has_sigma = !tr.sigma.empty();
  if (has_sigma) t.columns.push_back("sigma");
  for (std::size_t i = 0; i < tr.tau_ns.size(); ++i) {
    t.rows.push_back({tr.tau_ns[i], tr.g2[i]});
    if (has_sigma) t.rows.back().push_back(tr.sigma[i]);
  }
  write_table(out, t);
}

photostats::DecayHistogram read_decay(std::istream& in) {
  const Table t = read_table(in);
  expect_columns(t, {"time_ns", "counts"});
  photostats::DecayHistogram h;
  for (const auto& r : t.rows) {
    h.time_ns.push_back(r[0]);
    h.counts.push_back(r[1]);
  }
  return h;
}

void write_decay(std::ostream& out, const photostats::DecayHistogram& h, const Metadata& extra) {
  Table t;
  t.meta = extra;
  t.columns = {"time_ns", "counts"};
  for (std::size_t i = 0; i < h.time_ns.size(); ++i) t.rows.push_back({h.time_ns[i], h.counts[i]});
  write_table(out, t);
}

nlohmann::json to_json(const classify::DefectRecord& r) {
  nlohmann::json j;
  j["zpl_energy_ev"] = r.zpl_energy_ev;
  j["excitation_energy_ev"] = r.excitation_energy_ev;
  j["theta_abs_deg"] = r.theta_abs_deg;
  j["theta_emit_deg"] = r.theta_emit_deg;
  j["delta_theta_deg"] = r.delta_theta_deg;
  j["stokes_shift_mev"] = r.stokes_shift_mev;
  j["region"] = classify::to_string(r.region);
  j["mechanism"] = classify::to_string(r.mechanism);
  j["tilt_caveat"] = r.tilt_caveat;
  j["abs_visibility"] = r.abs_visibility;
  j["emit_visibility"] = r.emit_visibility;
  j["anti_stokes"] = r.anti_stokes;
  j["below_filter"] = r.below_filter;
  return j;
}

classify::DefectRecord record_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::schema, "record must be a JSON object");
  classify::DefectRecord r;
  r.zpl_energy_ev = get_field<double>(j, "zpl_energy_ev");
  r.excitation_energy_ev = get_field<double>(j, "excitation_energy_ev");
  r.theta_abs_deg = get_field<double>(j, "theta_abs_deg");
  r.theta_emit_deg = get_field<double>(j, "theta_emit_deg");
  if (j.contains("abs_visibility")) r.abs_visibility = get_field<double>(j, "abs_visibility");
  if (j.contains("emit_visibility")) r.emit_visibility = get_field<double>(j, "emit_visibility");
  if (j.contains("tilt_caveat")) r.tilt_caveat = get_field<bool>(j, "tilt_caveat");
  return r;
}

std::vector<classify::DefectRecord> read_records(std::istream& in) {
  std::vector<classify::DefectRecord> out;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (trim(raw).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError("invalid JSON on line " + std::to_string(line) + ": " + e.what(), line);
    }
    try {
      out.push_back(record_from_json(j));
    } catch (const Error& e) {
      throw Error(e.kind(), std::string(e.what()) + " (line " + std::to_string(line) + ")");
    }
  }
  return out;
}

void write_records(std::ostream& out, const std::vector<classify::DefectRecord>& records) {
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

nlohmann::json to_json(const polarfit::CalibrationMap& map) {
  nlohmann::json j;
  j["reference_angles_deg"] = polarfit::CalibrationMap::reference_angles_deg;
  j["wavelengths_nm"] = map.wavelengths_nm();
  j["angle_error_deg"] = map.angle_error_deg();
  j["instrument_visibility"] = map.instrument_visibility();
  return j;
}

polarfit::CalibrationMap calibration_map_from_json(const nlohmann::json& j) {
  if (j.contains("reference_angles_deg")) {
    const auto ref = double_array(j, "reference_angles_deg");
    if (!std::equal(ref.begin(), ref.end(), polarfit::CalibrationMap::reference_angles_deg.begin(),
                    polarfit::CalibrationMap::reference_angles_deg.end()))
      throw Error(ErrorKind::schema, "calibration reference angles must be 0,30,...,150");
  }
  return polarfit::CalibrationMap(double_array(j, "wavelengths_nm"), double_array(j, "angle_error_deg"),
                                  double_array(j, "instrument_visibility"));
}

nlohmann::json to_json(const classify::PhononCatalog& c) {
  nlohmann::json j;
  j["acoustic"] = interval_json(c.acoustic);
  j["out_of_plane_optical"] = interval_json(c.out_of_plane_optical);
  j["in_plane_optical"] = interval_json(c.in_plane_optical);
  if (c.critical_stokes_mev) j["critical_stokes_mev"] = *c.critical_stokes_mev;
  return j;
}

classify::PhononCatalog catalog_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::schema, "catalog must be a JSON object");
  classify::PhononCatalog c;
  c.acoustic = interval_from(j, "acoustic", c.acoustic);
  c.out_of_plane_optical = interval_from(j, "out_of_plane_optical", c.out_of_plane_optical);
  c.in_plane_optical = interval_from(j, "in_plane_optical", c.in_plane_optical);
  if (j.contains("critical_stokes_mev")) c.critical_stokes_mev = get_field<double>(j, "critical_stokes_mev");
  c.validate();
  return c;
}

nlohmann::json to_json(const polarfit::Cos2Fit& fit) {
  nlohmann::json j;
  j["offset_a"] = fit.offset_a;
  j["amplitude_b"] = fit.amplitude_b;
  j["theta0_deg"] = fit.theta() ? nlohmann::json(fit.theta0_deg) : nlohmann::json(nullptr);
  j["visibility"] = polarfit::visibility(fit).value;
  j["degenerate"] = fit.degenerate;
  j["amplitude_b_sigma"] = fit.amplitude_b_sigma;
  j["theta0_sigma_deg"] = fit.theta0_sigma_deg;
  j["residual_rms"] = fit.residual_rms;
  j["chi2"] = fit.chi2;
  j["samples"] = fit.samples;
  j["offset_clamped"] = fit.offset_clamped;
  return j;
}

nlohmann::json to_json(const vibronic::VibronicSystem& s) {
  nlohmann::json j;
  j["zpl_energy_ev"] = s.zpl_energy_ev;
  j["emission_dipole_deg"] = s.emission_dipole_deg;
  j["absorption_dipole_deg"] = s.absorption_dipole_deg;
  j["modes"] = nlohmann::json::array();
  for (const auto& m : s.modes) j["modes"].push_back({{"energy_mev", m.energy_mev}, {"huang_rhys", m.huang_rhys}});
  return j;
}

vibronic::VibronicSystem system_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::schema, "system must be a JSON object");
  vibronic::VibronicSystem s;
  s.zpl_energy_ev = get_field<double>(j, "zpl_energy_ev");
  if (j.contains("emission_dipole_deg")) s.emission_dipole_deg = get_field<double>(j, "emission_dipole_deg");
  if (j.contains("absorption_dipole_deg")) s.absorption_dipole_deg = get_field<double>(j, "absorption_dipole_deg");
  if (!j.contains("modes") || !j.at("modes").is_array()) throw Error(ErrorKind::schema, "system needs a modes array");
  for (const auto& m : j.at("modes"))
    s.modes.push_back({get_field<double>(m, "energy_mev"), get_field<double>(m, "huang_rhys")});
  s.validate();
  return s;
}

nlohmann::json parse_json(std::istream& in) {
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t offset = std::min(e.byte, text.size());
    const auto line = static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n')) + 1;
    throw ParseError(std::string("invalid JSON: ") + e.what(), line);
  }
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::parse, "cannot open '" + path + "'");
  return parse_json(in);
}

std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

}  // namespace defectspec::io

#pragma once

// File formats shared by the analysis modules and the generators. CSV files
// start with one `# key=value,...` comment line naming the axis kind and any
// provenance (seed, rng), followed by a header row whose column names carry
// units. Numbers are written in shortest round-trip form, so output is
// byte-stable.

#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "defectspec/calibration.hpp"
#include "defectspec/classify.hpp"
#include "defectspec/photostats.hpp"
#include "defectspec/polarfit.hpp"
#include "defectspec/spectrum.hpp"
#include "defectspec/vibronic.hpp"

namespace defectspec::io {

using Metadata = std::map<std::string, std::string>;

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

/// Generic CSV table: metadata comment, named columns, numeric rows.
struct Table {
  Metadata meta;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> row_lines;  ///< 1-based source line of each row (reading only)

  std::size_t column(std::string_view name) const;  ///< throws ErrorKind::schema when absent
};

/// Throws ParseError with the offending line for malformed numbers or ragged rows.
Table read_table(std::istream& in);
void write_table(std::ostream& out, const Table& table);

Table read_table_file(const std::string& path);
void write_table_file(const std::string& path, const Table& table);

/// `# axis_kind=..,units_kind=..` then `<axis_kind>,<units_kind>` rows.
spectra::Spectrum read_spectrum(std::istream& in);
void write_spectrum(std::ostream& out, const spectra::Spectrum& s, const Metadata& extra = {});

/// Long format `angle_deg,<axis_kind>,counts`, rows grouped by angle.
polarfit::AngleResolvedSpectrum read_scan(std::istream& in);
void write_scan(std::ostream& out, const polarfit::AngleResolvedSpectrum& scan, const Metadata& extra = {});

/// `wavelength_nm,theta_true_deg,theta_measured_deg,visibility`.
std::vector<polarfit::CalibrationMeasurement> read_calibration_measurements(std::istream& in);
void write_calibration_measurements(std::ostream& out, const std::vector<polarfit::CalibrationMeasurement>& m,
                                    const Metadata& extra = {});

/// `tau_ns,g2` with an optional `sigma` column.
photostats::CorrelationTrace read_g2(std::istream& in);
void write_g2(std::ostream& out, const photostats::CorrelationTrace& t, const Metadata& extra = {});

/// `time_ns,counts`.
photostats::DecayHistogram read_decay(std::istream& in);
void write_decay(std::ostream& out, const photostats::DecayHistogram& h, const Metadata& extra = {});

nlohmann::json to_json(const classify::DefectRecord& r);
/// Requires the measured fields; derived fields are recomputed by the caller.
classify::DefectRecord record_from_json(const nlohmann::json& j);

/// One record per line; blank lines are skipped.
std::vector<classify::DefectRecord> read_records(std::istream& in);
void write_records(std::ostream& out, const std::vector<classify::DefectRecord>& records);

nlohmann::json to_json(const polarfit::CalibrationMap& map);
polarfit::CalibrationMap calibration_map_from_json(const nlohmann::json& j);

nlohmann::json to_json(const classify::PhononCatalog& c);
classify::PhononCatalog catalog_from_json(const nlohmann::json& j);

nlohmann::json to_json(const polarfit::Cos2Fit& fit);

nlohmann::json to_json(const vibronic::VibronicSystem& s);
vibronic::VibronicSystem system_from_json(const nlohmann::json& j);

/// Parses a JSON document; syntax errors become ParseError with the line.
nlohmann::json parse_json(std::istream& in);
nlohmann::json read_json_file(const std::string& path);

/// Pretty-printed with two-space indent and a trailing newline.
std::string dump_json(const nlohmann::json& j);

}  // namespace defectspec::io

#include "doctest.h"

#include <cmath>
#include <limits>
#include <sstream>

#include "defectspec/error.hpp"
#include "defectspec/io.hpp"
#include "defectspec/synth.hpp"

using namespace defectspec;

namespace {

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no exception");
  return ErrorKind::domain;
}

std::size_t parse_line_of(const std::string& text) {
  std::istringstream in(text);
  try {
    io::read_table(in);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

}  // namespace

TEST_CASE("shortest round-trip number formatting") {
  for (double x : {0.0, -0.0, 1.0, 0.1, 2.0599999999999996, 1e-300, 123456789.125, -7.5e21}) {
    const auto s = io::format_double(x);
    CHECK(std::stod(s) == x);
  }
  CHECK(io::format_double(0.1) == "0.1");
  CHECK(io::format_double(-0.0) == "0");
  CHECK(io::format_double(12.0) == "12");
}

TEST_CASE("spectrum CSV round trip") {
  const spectra::Spectrum s(spectra::AxisKind::wavelength_nm, spectra::UnitsKind::counts_per_wavelength,
                            {500.0, 500.5, 501.0}, {1.0, 0.3333333333333333, 2.5});
  std::ostringstream out;
  io::write_spectrum(out, s, {{"seed", "4"}});
  const std::string text = out.str();
  CHECK(text.rfind("# axis_kind=wavelength_nm,seed=4,units_kind=counts_per_wavelength\n"
                   "wavelength_nm,counts_per_wavelength\n",
                   0) == 0);
  std::istringstream in(text);
  const auto back = io::read_spectrum(in);
  CHECK(back.axis() == s.axis());
  CHECK(back.values() == s.values());
  CHECK(back.axis_kind() == s.axis_kind());
}

TEST_CASE("scan CSV round trip") {
  synth::SyntheticDefect d;
  d.system = {2.06, {{180.0, 1.0}}, 30.0, 30.0};
  std::vector<double> angles;
  for (int i = 0; i < 12; ++i) angles.push_back(15.0 * i);
  const auto scan = synth::generate_scan(d, polarfit::ScanRole::absorption_scan, angles,
                                         spectra::uniform_grid(2.0, 2.1, 0.01), {3, synth::NoiseKind::poisson});
  std::ostringstream out;
  io::write_scan(out, scan);
  std::istringstream in(out.str());
  const auto back = io::read_scan(in);
  CHECK(back.role == polarfit::ScanRole::absorption_scan);
  CHECK(back.angles_deg == scan.angles_deg);
  for (std::size_t i = 0; i < angles.size(); ++i) CHECK(back.spectra[i].values() == scan.spectra[i].values());
  std::ostringstream again;
  io::write_scan(again, back);
  CHECK(again.str() == out.str());
}

TEST_CASE("parse errors carry the line number") {
  CHECK(parse_line_of("# a=b\nx,y\n1,2\n3,oops\n") == 4);
  CHECK(parse_line_of("x,y\n1,2\n\n3,4,5\n") == 4);
  CHECK(parse_line_of("x,y\n1,2x\n") == 2);
  std::istringstream missing("# axis_kind=energy_ev\nenergy_ev,counts_per_energy\n1,2\n");
  CHECK(kind_of([&] { io::read_spectrum(missing); }) == ErrorKind::schema);
  std::istringstream wrong("# axis_kind=energy_ev,units_kind=counts_per_energy\nenergy,counts\n1,2\n");
  CHECK(kind_of([&] { io::read_spectrum(wrong); }) == ErrorKind::schema);
}

TEST_CASE("calibration, g2 and decay tables") {
  const auto m = synth::calibration_sweep(synth::RetarderInstrument{}, {600.0, 650.0});
  std::ostringstream out;
  io::write_calibration_measurements(out, m);
  std::istringstream in(out.str());
  const auto back = io::read_calibration_measurements(in);
  REQUIRE(back.size() == m.size());
  CHECK(back[7].theta_measured_deg == m[7].theta_measured_deg);

  std::vector<double> tau;
  for (int i = -50; i <= 50; ++i) tau.push_back(i * 0.5);
  const auto g = synth::generate_g2(0.8, 2.0, tau, 100.0, {1, synth::NoiseKind::poisson});
  std::ostringstream go;
  io::write_g2(go, g);
  std::istringstream gi(go.str());
  const auto gb = io::read_g2(gi);
  CHECK(gb.g2 == g.g2);
  CHECK(gb.sigma == g.sigma);

  photostats::DecayHistogram h{{0.0, 0.1, 0.2}, {1.0, 5.0, 3.0}};
  std::ostringstream ho;
  io::write_decay(ho, h);
  CHECK(ho.str() == "time_ns,counts\n0,1\n0.1,5\n0.2,3\n");
}

TEST_CASE("defect records as JSON lines") {
  const auto recs = synth::generate_survey(5, {}, {}, {11, synth::NoiseKind::none});
  std::ostringstream out;
  io::write_records(out, recs);
  std::istringstream in(out.str());
  const auto back = io::read_records(in);
  REQUIRE(back.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto r = classify::complete_record(back[i]);
    CHECK(r.zpl_energy_ev == recs[i].zpl_energy_ev);
    CHECK(r.delta_theta_deg == recs[i].delta_theta_deg);
    CHECK(r.mechanism == recs[i].mechanism);
    CHECK(r.emit_visibility == recs[i].emit_visibility);
  }
  std::istringstream bad("{\"zpl_energy_ev\": 2.0}\n");
  CHECK(kind_of([&] { io::read_records(bad); }) == ErrorKind::schema);
  std::istringstream broken("\n{\"zpl_energy_ev\": 2.0,\n");
  try {
    io::read_records(broken);
    FAIL("no exception");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
}

TEST_CASE("calibration map and catalog JSON") {
  const auto map = polarfit::build_calibration(synth::calibration_sweep(synth::RetarderInstrument{}, {600.0, 700.0}));
  const auto back = io::calibration_map_from_json(io::to_json(map));
  CHECK(back.angle_error_deg() == map.angle_error_deg());
  CHECK(back.instrument_visibility() == map.instrument_visibility());

  classify::PhononCatalog c;
  c.critical_stokes_mev = 200.0;
  const auto cb = io::catalog_from_json(io::to_json(c));
  CHECK(cb.critical_stokes() == 200.0);
  CHECK(cb.in_plane_optical.hi_mev == 203.0);
  CHECK(kind_of([] { io::catalog_from_json(nlohmann::json{{"acoustic", {1.0}}}); }) == ErrorKind::schema);

  const vibronic::VibronicSystem s{2.06, {{180.0, 1.0}, {90.0, 0.2}}, 10.0, 20.0};
  const auto sb = io::system_from_json(io::to_json(s));
  CHECK(sb.modes.size() == 2);
  CHECK(sb.absorption_dipole_deg == 20.0);
}

TEST_CASE("JSON syntax errors report the line") {
  std::istringstream in("{\n  \"a\": 1,\n  \"b\": ]\n}\n");
  try {
    io::parse_json(in);
    FAIL("no exception");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

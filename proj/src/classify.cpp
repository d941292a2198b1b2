#include "defectspec/classify.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "defectspec/error.hpp"
#include "defectspec/polarfit.hpp"
#include "defectspec/units.hpp"

namespace defectspec::classify {

void PhononCatalog::validate() const {
  for (const auto& iv : {acoustic, out_of_plane_optical, in_plane_optical}) {
    if (!(std::isfinite(iv.lo_mev) && std::isfinite(iv.hi_mev) && iv.lo_mev <= iv.hi_mev))
      throw Error(ErrorKind::domain, "phonon catalog interval must satisfy lower <= upper");
  }
  if (critical_stokes_mev && !(*critical_stokes_mev > 0.0))
    throw Error(ErrorKind::domain, "critical Stokes shift must be positive");
}

std::string_view to_string(RegionLabel r) {
  switch (r) {
    case RegionLabel::SubPhonon: return "SubPhonon";
    case RegionLabel::OutOfPlaneI: return "OutOfPlaneI";
    case RegionLabel::RegionI: return "RegionI";
    case RegionLabel::RegionII: return "RegionII";
    case RegionLabel::RegionIII: return "RegionIII";
    case RegionLabel::BeyondIII: return "BeyondIII";
    case RegionLabel::Gap: return "Gap";
  }
  return "unknown";
}

std::string_view to_string(Mechanism m) {
  switch (m) {
    case Mechanism::DirectConsistent: return "DirectConsistent";
    case Mechanism::IndirectLikely: return "IndirectLikely";
    case Mechanism::Ambiguous: return "Ambiguous";
  }
  return "unknown";
}

RegionLabel parse_region(std::string_view text) {
  for (auto r : {RegionLabel::SubPhonon, RegionLabel::OutOfPlaneI, RegionLabel::RegionI, RegionLabel::RegionII,
                 RegionLabel::RegionIII, RegionLabel::BeyondIII, RegionLabel::Gap})
    if (to_string(r) == text) return r;
  throw Error(ErrorKind::schema, "unknown region label '" + std::string(text) + "'");
}

Mechanism parse_mechanism(std::string_view text) {
  for (auto m : {Mechanism::DirectConsistent, Mechanism::IndirectLikely, Mechanism::Ambiguous})
    if (to_string(m) == text) return m;
  throw Error(ErrorKind::schema, "unknown mechanism '" + std::string(text) + "'");
}

double wavelength_to_energy(double lambda_nm) { return units::wavelength_nm_to_energy_ev(lambda_nm); }

double stokes_shift(double excitation_energy_ev, double zpl_energy_ev) {
  if (!(excitation_energy_ev > 0.0) || !(zpl_energy_ev > 0.0))
    throw Error(ErrorKind::domain, "energies must be positive");
  return (excitation_energy_ev - zpl_energy_ev) * 1000.0;
}

RegionLabel phonon_region(double stokes_mev, const PhononCatalog& catalog) {
  if (!std::isfinite(stokes_mev)) throw Error(ErrorKind::domain, "Stokes shift must be finite");
  if (stokes_mev < 0.0) return RegionLabel::SubPhonon;
  if (catalog.region(1).contains(stokes_mev)) return RegionLabel::RegionI;
  if (catalog.region(2).contains(stokes_mev)) return RegionLabel::RegionII;
  if (catalog.region(3).contains(stokes_mev)) return RegionLabel::RegionIII;
  if (catalog.out_of_plane_optical.contains(stokes_mev)) return RegionLabel::OutOfPlaneI;
  if (catalog.acoustic.contains(stokes_mev)) return RegionLabel::SubPhonon;
  if (stokes_mev > catalog.region(3).hi_mev) return RegionLabel::BeyondIII;
  return RegionLabel::Gap;
}

Mechanism predict_mechanism(const DefectRecord& record, double theta_tolerance_deg, const PhononCatalog& catalog) {
  const double critical = catalog.critical_stokes();
  const bool aligned = record.delta_theta_deg <= theta_tolerance_deg;
  if (record.stokes_shift_mev <= critical && aligned) return Mechanism::DirectConsistent;
  if (record.stokes_shift_mev > critical && !aligned) return Mechanism::IndirectLikely;
  return Mechanism::Ambiguous;
}

DefectRecord complete_record(DefectRecord r, double theta_tolerance_deg, const PhononCatalog& catalog) {
  r.delta_theta_deg = polarfit::delta_theta(r.theta_abs_deg, r.theta_emit_deg);
  r.stokes_shift_mev = stokes_shift(r.excitation_energy_ev, r.zpl_energy_ev);
  r.anti_stokes = r.stokes_shift_mev < 0.0;
  r.below_filter = r.stokes_shift_mev < filter_cutoff_mev;
  r.region = phonon_region(r.stokes_shift_mev, catalog);
  r.mechanism = predict_mechanism(r, theta_tolerance_deg, catalog);
  return r;
}

KsResult ks_uniform(std::vector<double> samples, double lo, double hi) {
  KsResult out;
  out.samples = samples.size();
  if (samples.empty()) return out;
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = std::clamp((samples[i] - lo) / (hi - lo), 0.0, 1.0);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  out.statistic = d;
  const double sn = std::sqrt(n);
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 1e-3) {
    out.p_value = 1.0;
    return out;
  }
  double q = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    q += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-16) break;
  }
  out.p_value = std::clamp(q, 0.0, 1.0);
  return out;
}

SurveyStats survey_stats(const std::vector<DefectRecord>& records, double histogram_bin_deg,
                         const PhononCatalog& catalog, double cluster_tolerance_deg) {
  if (records.empty()) throw Error(ErrorKind::domain, "survey needs at least one record");
  if (!(histogram_bin_deg > 0.0 && histogram_bin_deg <= 90.0))
    throw Error(ErrorKind::domain, "histogram bin width must lie in (0, 90]");

  SurveyStats st;
  st.histogram_bin_deg = histogram_bin_deg;
  st.cluster_tolerance_deg = cluster_tolerance_deg;
  const auto bins = static_cast<std::size_t>(std::ceil(90.0 / histogram_bin_deg - 1e-9));
  for (std::size_t b = 0; b <= bins; ++b)
    st.histogram_edges_deg.push_back(std::min(90.0, static_cast<double>(b) * histogram_bin_deg));
  st.histogram_counts.assign(bins, 0);

  const double critical = catalog.critical_stokes();
  std::array<std::size_t, 4> cluster_counts{};
  constexpr std::array<double, 4> cluster_angles{0.0, 30.0, 60.0, 90.0};
  std::vector<double> above;
  for (const auto& r : records) {
    st.scatter.push_back({r.stokes_shift_mev, r.delta_theta_deg, r.region, r.mechanism});
    auto b = static_cast<std::size_t>(std::floor(r.delta_theta_deg / histogram_bin_deg));
    st.histogram_counts[std::min(b, bins - 1)] += 1;
    for (std::size_t k = 0; k < cluster_angles.size(); ++k) {
      if (std::abs(r.delta_theta_deg - cluster_angles[k]) <= cluster_tolerance_deg) ++cluster_counts[k];
    }
    if (r.emit_visibility > r.abs_visibility) ++st.emit_exceeds_abs;
    if (r.mechanism == Mechanism::IndirectLikely) {
      ++st.indirect_records;
      if (r.emit_visibility > r.abs_visibility) ++st.indirect_emit_exceeds_abs;
    }
    if (r.stokes_shift_mev <= critical) {
      ++st.below_critical;
      if (r.delta_theta_deg < st.small_delta_deg) ++st.below_critical_small_delta;
    } else {
      above.push_back(r.delta_theta_deg);
    }
  }
  for (std::size_t k = 0; k < cluster_angles.size(); ++k) {
    st.clusters.push_back(
        {cluster_angles[k], static_cast<double>(cluster_counts[k]) / static_cast<double>(records.size())});
  }
  st.above_critical_uniformity = ks_uniform(std::move(above), 0.0, 90.0);
  return st;
}

}  // namespace defectspec::classify

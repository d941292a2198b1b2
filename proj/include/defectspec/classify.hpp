#pragma once

// Stokes-shift bookkeeping, assignment of shifts to h-BN phonon regions,
// the direct/indirect excitation verdict, and survey aggregation.

#include <array>
#include <optional>
#include <string_view>
#include <vector>

namespace defectspec::classify {

struct EnergyInterval {
  double lo_mev;
  double hi_mev;
  bool contains(double x) const { return x >= lo_mev && x <= hi_mev; }
};

/// Bulk phonon branch energy ranges (meV).
struct PhononCatalog {
  EnergyInterval acoustic{0.0, 107.0};
  EnergyInterval out_of_plane_optical{72.0, 145.0};
  EnergyInterval in_plane_optical{150.0, 203.0};
  /// Stokes shift above which direct excitation is not expected; defaults to
  /// the in-plane optical maximum when unset.
  std::optional<double> critical_stokes_mev;

  double critical_stokes() const { return critical_stokes_mev.value_or(in_plane_optical.hi_mev); }
  /// Region k in {1,2,3}: k-fold scaling of the in-plane optical interval.
  EnergyInterval region(int k) const { return {k * in_plane_optical.lo_mev, k * in_plane_optical.hi_mev}; }
  void validate() const;
};

enum class RegionLabel { SubPhonon, OutOfPlaneI, RegionI, RegionII, RegionIII, BeyondIII, Gap };
enum class Mechanism { DirectConsistent, IndirectLikely, Ambiguous };

std::string_view to_string(RegionLabel r);
std::string_view to_string(Mechanism m);
RegionLabel parse_region(std::string_view text);
Mechanism parse_mechanism(std::string_view text);

/// Lower edge of the spectral filter box; shifts below it are flagged, not rejected.
inline constexpr double filter_cutoff_mev = 75.0;

struct DefectRecord {
  double zpl_energy_ev = 0.0;
  double excitation_energy_ev = 0.0;
  double theta_abs_deg = 0.0;
  double theta_emit_deg = 0.0;
  double delta_theta_deg = 0.0;
  double stokes_shift_mev = 0.0;
  RegionLabel region = RegionLabel::Gap;
  Mechanism mechanism = Mechanism::Ambiguous;
  bool tilt_caveat = false;
  double abs_visibility = 0.0;
  double emit_visibility = 0.0;
  bool anti_stokes = false;
  bool below_filter = false;
};

double wavelength_to_energy(double lambda_nm);

/// (E_exc - E_zpl) in meV; negative values are anti-Stokes.
double stokes_shift(double excitation_energy_ev, double zpl_energy_ev);

/// First match in the order RegionI, RegionII, RegionIII, OutOfPlaneI,
/// SubPhonon, BeyondIII, Gap. Negative shifts map to SubPhonon.
RegionLabel phonon_region(double stokes_mev, const PhononCatalog& catalog = {});

inline constexpr double default_theta_tolerance_deg = 10.0;

Mechanism predict_mechanism(const DefectRecord& record, double theta_tolerance_deg = default_theta_tolerance_deg,
                            const PhononCatalog& catalog = {});

/// Fills the derived fields (delta_theta, stokes shift, region, mechanism,
/// flags) from the measured ones.
DefectRecord complete_record(DefectRecord record, double theta_tolerance_deg = default_theta_tolerance_deg,
                             const PhononCatalog& catalog = {});

struct ScatterRow {
  double stokes_shift_mev;
  double delta_theta_deg;
  RegionLabel region;
  Mechanism mechanism;
};

struct ClusterFraction {
  double angle_deg;
  double fraction;
};

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t samples = 0;
};

struct SurveyStats {
  std::vector<ScatterRow> scatter;
  double histogram_bin_deg = 0.0;
  std::vector<double> histogram_edges_deg;  ///< size = bins + 1
  std::vector<std::size_t> histogram_counts;
  std::vector<ClusterFraction> clusters;  ///< predicted 0/30/60/90 degree clusters
  double cluster_tolerance_deg = 0.0;
  std::size_t emit_exceeds_abs = 0;           ///< all records
  std::size_t indirect_records = 0;
  std::size_t indirect_emit_exceeds_abs = 0;
  std::size_t below_critical = 0;
  std::size_t below_critical_small_delta = 0;  ///< delta_theta < small_delta_deg
  double small_delta_deg = 15.0;
  KsResult above_critical_uniformity;  ///< KS test of delta_theta vs U[0, 90]
};

/// Throws ErrorKind::domain on an empty record list or a bin width outside (0, 90].
SurveyStats survey_stats(const std::vector<DefectRecord>& records, double histogram_bin_deg,
                         const PhononCatalog& catalog = {}, double cluster_tolerance_deg = 5.0);

/// One-sample Kolmogorov-Smirnov test against U[lo, hi]; p-value from the
/// asymptotic Kolmogorov distribution with Stephens' small-sample correction.
KsResult ks_uniform(std::vector<double> samples, double lo, double hi);

}  // namespace defectspec::classify

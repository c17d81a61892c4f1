#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "spectraclass/spectrum.hpp"

namespace spectraclass {

/// Accumulated statistics for one m/z bin of an ensemble.
struct StatBin {
  double phi = 0.0;     // mean m/z of the member peaks
  std::size_t c = 0;    // spectra with a non-zero peak in the bin
  double a_tot = 0.0;   // sum of abundances
  double a_tot2 = 0.0;  // sum of squared abundances
  double a_max = 0.0;
  double a_min = 0.0;

  double mean() const { return a_tot / static_cast<double>(c); }
  double variance() const { return a_tot2 / static_cast<double>(c) - mean() * mean(); }

  friend bool operator==(const StatBin&, const StatBin&) = default;
};

struct StatDB {
  std::vector<StatBin> bins;  // sorted by phi
  std::size_t n_spectra = 0;
  double epsilon = 0.0;
  double full_scale = kFullScale;

  friend bool operator==(const StatDB&, const StatDB&) = default;
};

/// Local maxima of the stick spectrum, with maxima closer than eps merged
/// into the single largest one. Zero-abundance points never count.
std::vector<Peak> peak_list(const Spectrum& s, double eps);

/// Bins consolidated peaks of every spectrum. Peaks are swept in global m/z
/// order; a new bin starts when a peak lies more than eps above the running
/// mean of the current bin. A spectrum contributes at most one peak (its
/// largest) to each bin.
StatDB build_statdb(std::span<const Spectrum> spectra, double eps);

/// Bin-wise union of two databases built with the same eps over disjoint
/// spectra. Bins whose centers lie within eps are combined.
StatDB merge(const StatDB& a, const StatDB& b);

/// Bins present in every spectrum of the database.
std::vector<StatBin> full_presence_bins(const StatDB& db);

enum class MeanMode {
  present,         // a_tot / c
  zero_inclusive,  // a_tot / n_spectra
};

enum class ReportFlag { key_candidate, low_candidate, unique, partial_presence, none };

std::string_view to_string(ReportFlag flag);

struct ReportRow {
  double phi = 0.0;
  double class_mean = 0.0;
  double ensemble_mean = 0.0;
  double ratio = 0.0;  // +inf when the bin has no ensemble counterpart
  std::size_t count = 0;
  std::size_t n_spectra = 0;
  ReportFlag flag = ReportFlag::none;
};

struct ReportOptions {
  MeanMode mode = MeanMode::present;
  /// Full-presence bins at or above this ratio are flagged key-candidate.
  double key_ratio = 2.0;
  /// Full-presence bins at or below this ratio are flagged low-candidate.
  double low_ratio = 0.5;
  /// Include bins present in only part of the class (flagged
  /// partial-presence, no key/low flag).
  bool include_partial = true;
};

/// Compares each class bin against the ensemble bin nearest to it within
/// eps. IncompatibleDBs when the databases differ in eps or scale.
std::vector<ReportRow> class_vs_ensemble_report(const StatDB& class_db,
                                                const StatDB& ensemble_db,
                                                const ReportOptions& options = {});

/// `phi,class_mean,ensemble_mean,ratio,count,n_spectra,flag`
void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows);

/// Horizontal bar chart of ratios for terminal output.
void render_histogram(std::ostream& out, const std::vector<ReportRow>& rows,
                      std::size_t width = 40);

}  // namespace spectraclass

#pragma once

// Orchestration shared by the C API and anything else driving the toolkit:
// case loading, the extract -> clean -> fit -> power-curve analysis over all
// seven parameters, derivation of a reference envelope from an analysis, and
// the tuned-case writers.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "core/grid_model.hpp"
#include "core/ingest.hpp"
#include "core/interdependence.hpp"
#include "core/per_unit.hpp"
#include "core/reference.hpp"
#include "core/stats.hpp"

namespace branchstat {

struct AnalyzeSettings {
  std::size_t n_bins = 50;
  std::size_t min_count = 10;
  double fence_multiplier = 3.0;
  double class_tolerance = kDefaultClassTolerance;
  double b_threshold = kDefaultBThreshold;
  double r2_threshold = kDefaultR2Threshold;
  double ratio_lo = 0.5;
  double ratio_hi = 2.0;
  std::uint64_t seed = 42;
};

struct SampleSummary {
  std::size_t n_raw = 0;
  std::size_t n_kept = 0;
  std::size_t n_removed = 0;
  double q1 = 0.0, q3 = 0.0, iqr = 0.0;
  double fence_lo = 0.0, fence_hi = 0.0;
  double min = 0.0, max = 0.0, mean = 0.0;
};

struct ClassAnalysis {
  double class_kv = 0.0;
  SampleSummary sample;
  bool degenerate = false;    // all values identical: no histogram, no fits
  Histogram histogram;        // empty when degenerate
  std::vector<DistFit> fits;  // ranked by KL, may be empty if every fit failed
};

struct ParameterAnalysis {
  ParameterKind parameter = ParameterKind::XfmrXpuOwnBase;
  std::size_t value_count = 0;
  SkipReport skips;
  std::vector<ClassAnalysis> classes;  // ascending kV, only classes >= min_count
  std::optional<PowerFit> power_fit;
  std::optional<DependenceClass> dependence;
  std::optional<double> global_mean;  // over the pooled cleaned class values
  std::optional<std::pair<double, double>> independent_range;
  std::vector<std::string> warnings;

  bool no_data() const { return value_count == 0; }
};

struct AnalysisResult {
  std::string case_name;
  AnalyzeSettings settings;
  std::vector<ParameterAnalysis> parameters;  // all seven, declaration order
  std::vector<std::string> warnings;
};

// Runs the full statistics pipeline over the records. Throws
// InsufficientData when every parameter extracts zero values.
AnalysisResult analyze_records(const std::vector<BranchRecord>& records,
                               const AnalyzeSettings& settings, std::string case_name);

// Turns an analysis into a validation/tuning reference: class means and
// best fits become the envelope, the power fits become the curves, and the
// transformer own-base reactance keeps its published (0, 0.25] band.
ReferenceStats reference_from_analysis(const AnalysisResult& analysis);

enum class CaseFormat { MatpowerSubset, BranchCsv };

struct LoadedCase {
  CaseFormat format = CaseFormat::BranchCsv;
  std::string path;
  std::string name;  // file stem
  std::vector<BranchRecord> records;  // line lengths already filled from geography
  std::vector<std::string> warnings;
  std::optional<MatpowerCase> raw;  // present for MATPOWER sources
};

// Loads a case file; the format comes from the extension (.m / .csv) with a
// content sniff as fallback. Throws ParseError on unreadable or malformed
// input.
LoadedCase load_case(const std::string& path,
                     std::optional<double> s_base_override = std::nullopt,
                     double class_tolerance = kDefaultClassTolerance);

// Writes `tuned` in the original case's format. MATPOWER output re-emits the
// parsed subset with r, x and rateA refreshed from the tuned records.
void write_case_file(const LoadedCase& original, const std::vector<BranchRecord>& tuned,
                     const std::string& path);

// Extension for write_case_file's output ("m" or "csv").
std::string case_file_extension(CaseFormat format);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

// Plot-data CSVs (class means, histograms, fitted curves, power curves) under
// `dir`; returns the files written.
std::vector<std::string> write_plot_csvs(const AnalysisResult& analysis, const std::string& dir);

// Console-style analysis summary: per parameter the counts, best family and
// power fit on one line each.
std::string analysis_summary(const AnalysisResult& analysis);

// Power-fit table for the `fit` command.
std::string power_fit_table(const AnalysisResult& analysis);

}  // namespace branchstat

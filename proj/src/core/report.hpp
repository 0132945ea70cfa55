#pragma once

// Case validation against a reference envelope and the check-mark table /
// detail report renderers.

#include <optional>
#include <string>
#include <vector>

#include "core/grid_model.hpp"
#include "core/reference.hpp"

namespace branchstat {

enum class Verdict { Pass, TuningRequired, NoData };

std::string verdict_token(Verdict v);

struct ClassVerdict {
  double class_kv = 0.0;
  std::size_t sample_count = 0;            // cleaned values behind the mean
  std::optional<double> case_mean;
  std::optional<double> reference_value;   // curve value or global mean
  std::optional<double> ratio;             // case mean / reference value
  Verdict verdict = Verdict::NoData;
  std::string note;
};

struct ValidationVerdict {
  ParameterKind parameter = ParameterKind::XfmrXpuOwnBase;
  std::vector<ClassVerdict> classes;
  Verdict overall = Verdict::NoData;
};

struct ValidationSettings {
  double ratio_lo = 0.5;
  double ratio_hi = 2.0;
  std::size_t min_count = 10;
  double fence_multiplier = 3.0;
  double class_tolerance = kDefaultClassTolerance;
};

// One verdict per studied parameter, in declaration order. Voltage-dependent
// parameters pass a class when case-mean / curve-value lies in the ratio
// band; voltage-independent ones when the mean falls in the admissible range
// (lo exclusive, hi inclusive) or within the band around the reference global
// mean. Placeholder references yield NoData, never Pass. Throws on an empty
// record list.
std::vector<ValidationVerdict> validate_case(const std::vector<BranchRecord>& records,
                                             const ReferenceStats& reference,
                                             const ValidationSettings& settings = {});

// Markdown table, one row per parameter, one verdict column; cells are
// "✓", "TR" or "n.d.". Deterministic bytes for identical inputs.
std::string render_table(const std::vector<ValidationVerdict>& verdicts,
                         const std::string& case_name);

// The table plus one detail section per parameter (per-class means, reference
// values, ratios) and the settings used.
std::string render_report(const std::vector<ValidationVerdict>& verdicts,
                          const std::string& case_name, const ValidationSettings& settings,
                          const std::string& reference_provenance);

bool any_tuning_required(const std::vector<ValidationVerdict>& verdicts);
bool all_no_data(const std::vector<ValidationVerdict>& verdicts);

// Failing (parameter, class) pairs, ready to feed tune_case.
std::vector<std::pair<ParameterKind, double>> failing_classes(
    const std::vector<ValidationVerdict>& verdicts);

}  // namespace branchstat

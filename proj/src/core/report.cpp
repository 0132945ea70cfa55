#include "core/report.hpp"

#include <cmath>
#include <map>

#include "core/errors.hpp"
#include "core/interdependence.hpp"
#include "core/per_unit.hpp"
#include "core/textio.hpp"

namespace branchstat {

std::string verdict_token(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "✓";
    case Verdict::TuningRequired: return "TR";
    case Verdict::NoData: return "n.d.";
  }
  return "?";
}

namespace {

// Class means after outlier removal, keyed by canonical level; classes below
// min_count are kept with their (unchecked) count so NoData rows can name
// them.
struct ClassMeanInfo {
  double mean = 0.0;
  std::size_t count = 0;
  bool enough = false;
};

std::map<double, ClassMeanInfo> collect_class_means(const std::vector<ParamValue>& values,
                                                    const ValidationSettings& s) {
  std::map<double, std::vector<double>> groups;
  for (const auto& v : values) {
    if (v.voltage_class.is_canonical()) groups[v.voltage_class.nominal_kv()].push_back(v.value);
  }
  std::map<double, ClassMeanInfo> out;
  for (auto& [kv, group] : groups) {
    std::vector<double> kept = group.size() >= 4
                                   ? remove_extreme_outliers(std::move(group), s.fence_multiplier).values
                                   : std::move(group);
    double sum = 0.0;
    for (double x : kept) sum += x;
    ClassMeanInfo info;
    info.count = kept.size();
    info.enough = kept.size() >= s.min_count;
    info.mean = kept.empty() ? 0.0 : sum / static_cast<double>(kept.size());
    out.emplace(kv, info);
  }
  return out;
}

}  // namespace

std::vector<ValidationVerdict> validate_case(const std::vector<BranchRecord>& records,
                                             const ReferenceStats& reference,
                                             const ValidationSettings& settings) {
  if (records.empty()) throw InvalidInput("validation requires a non-empty case");
  if (!(settings.ratio_lo > 0.0 && settings.ratio_lo < 1.0 && settings.ratio_hi > 1.0)) {
    throw InvalidInput("ratio band must satisfy 0 < lo < 1 < hi");
  }

  std::vector<ValidationVerdict> verdicts;
  for (ParameterKind parameter : kAllParameters) {
    ValidationVerdict verdict;
    verdict.parameter = parameter;
    const ReferenceParameter& rp = reference.parameter(parameter);

    auto extracted = extract_parameter(records, parameter, settings.class_tolerance);
    auto means = collect_class_means(extracted.values, settings);

    bool any_tr = false;
    bool any_pass = false;
    for (const auto& [kv, info] : means) {
      ClassVerdict cv;
      cv.class_kv = kv;
      cv.sample_count = info.count;
      if (!info.enough) {
        cv.verdict = Verdict::NoData;
        cv.note = "fewer than " + std::to_string(settings.min_count) + " values";
        verdict.classes.push_back(cv);
        continue;
      }
      cv.case_mean = info.mean;

      if (rp.placeholder) {
        cv.verdict = Verdict::NoData;
        cv.note = "reference is a placeholder";
      } else if (rp.dependence == DependenceClass::VoltageDependent) {
        if (rp.power_curve && rp.power_curve->usable()) {
          double ref_value = rp.power_curve->evaluate(kv);
          cv.reference_value = ref_value;
          cv.ratio = info.mean / ref_value;
          bool pass = *cv.ratio >= settings.ratio_lo && *cv.ratio <= settings.ratio_hi;
          cv.verdict = pass ? Verdict::Pass : Verdict::TuningRequired;
        } else {
          cv.verdict = Verdict::NoData;
          cv.note = "no usable reference curve";
        }
      } else {
        if (rp.independent_range) {
          const auto& [lo, hi] = *rp.independent_range;
          cv.note = "range (" + to_decimal_string(lo) + ", " + to_decimal_string(hi) + "]";
          bool pass = info.mean > lo && info.mean <= hi;
          cv.verdict = pass ? Verdict::Pass : Verdict::TuningRequired;
        } else if (rp.global_mean && *rp.global_mean != 0.0) {
          cv.reference_value = *rp.global_mean;
          cv.ratio = info.mean / *rp.global_mean;
          bool pass = *cv.ratio >= settings.ratio_lo && *cv.ratio <= settings.ratio_hi;
          cv.verdict = pass ? Verdict::Pass : Verdict::TuningRequired;
        } else {
          cv.verdict = Verdict::NoData;
          cv.note = "no reference envelope";
        }
      }
      any_tr = any_tr || cv.verdict == Verdict::TuningRequired;
      any_pass = any_pass || cv.verdict == Verdict::Pass;
      verdict.classes.push_back(cv);
    }
    verdict.overall =
        any_tr ? Verdict::TuningRequired : (any_pass ? Verdict::Pass : Verdict::NoData);
    verdicts.push_back(std::move(verdict));
  }
  return verdicts;
}

std::string render_table(const std::vector<ValidationVerdict>& verdicts,
                         const std::string& case_name) {
  std::string out;
  out += "| Parameter | " + case_name + " |\n";
  out += "| --- | --- |\n";
  for (const auto& v : verdicts) {
    out += "| ";
    out += parameter_display_name(v.parameter);
    out += " | ";
    out += verdict_token(v.overall);
    out += " |\n";
  }
  return out;
}

namespace {

std::string round6(double v) {
  if (v == 0.0) return "0";
  double scale = std::pow(10.0, 5 - std::floor(std::log10(std::abs(v))));
  return to_decimal_string(std::round(v * scale) / scale);
}

std::string opt6(const std::optional<double>& v) { return v ? round6(*v) : "-"; }

}  // namespace

std::string render_report(const std::vector<ValidationVerdict>& verdicts,
                          const std::string& case_name, const ValidationSettings& settings,
                          const std::string& reference_provenance) {
  std::string out = "# Validation report: " + case_name + "\n\n";
  out += "Reference: " + reference_provenance + "\n\n";
  out += "Settings: ratio band [" + to_decimal_string(settings.ratio_lo) + ", " +
         to_decimal_string(settings.ratio_hi) + "], min count " +
         std::to_string(settings.min_count) + ", fence multiplier " +
         to_decimal_string(settings.fence_multiplier) + "\n\n";
  out += render_table(verdicts, case_name);
  for (const auto& v : verdicts) {
    out += "\n## " + std::string(parameter_display_name(v.parameter)) + "\n\n";
    if (v.classes.empty()) {
      out += "No canonical voltage class carries data for this parameter.\n";
      continue;
    }
    out += "| class kV | n | case mean | reference | ratio | verdict | note |\n";
    out += "| --- | --- | --- | --- | --- | --- | --- |\n";
    for (const auto& c : v.classes) {
      out += "| " + to_decimal_string(c.class_kv) + " | " + std::to_string(c.sample_count) +
             " | " + opt6(c.case_mean) + " | " + opt6(c.reference_value) + " | " +
             opt6(c.ratio) + " | " + verdict_token(c.verdict) + " | " +
             (c.note.empty() ? "-" : c.note) + " |\n";
    }
  }
  return out;
}

bool any_tuning_required(const std::vector<ValidationVerdict>& verdicts) {
  for (const auto& v : verdicts) {
    if (v.overall == Verdict::TuningRequired) return true;
  }
  return false;
}

bool all_no_data(const std::vector<ValidationVerdict>& verdicts) {
  for (const auto& v : verdicts) {
    if (v.overall != Verdict::NoData) return false;
  }
  return true;
}

std::vector<std::pair<ParameterKind, double>> failing_classes(
    const std::vector<ValidationVerdict>& verdicts) {
  std::vector<std::pair<ParameterKind, double>> out;
  for (const auto& v : verdicts) {
    for (const auto& c : v.classes) {
      if (c.verdict == Verdict::TuningRequired) out.emplace_back(v.parameter, c.class_kv);
    }
  }
  return out;
}

}  // namespace branchstat

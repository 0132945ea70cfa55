#include "core/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "core/errors.hpp"
#include "core/textio.hpp"

namespace branchstat {

namespace {

// Box-plot cleaning, degrading to a pass-through for groups too small for
// quartile fences.
CleanSample clean_group(std::vector<double> values, double fence_multiplier) {
  if (values.size() >= 4) return remove_extreme_outliers(std::move(values), fence_multiplier);
  std::sort(values.begin(), values.end());
  CleanSample out;
  out.q1 = interpolated_quantile(values, 0.25);
  out.q3 = interpolated_quantile(values, 0.75);
  out.iqr = out.q3 - out.q1;
  out.fence_lo = out.q1 - fence_multiplier * out.iqr;
  out.fence_hi = out.q3 + fence_multiplier * out.iqr;
  out.values = std::move(values);
  return out;
}

SampleSummary summarize(const CleanSample& s, std::size_t n_raw) {
  SampleSummary out;
  out.n_raw = n_raw;
  out.n_kept = s.values.size();
  out.n_removed = s.removed_outliers.size();
  out.q1 = s.q1;
  out.q3 = s.q3;
  out.iqr = s.iqr;
  out.fence_lo = s.fence_lo;
  out.fence_hi = s.fence_hi;
  out.min = s.values.empty() ? 0.0 : s.values.front();
  out.max = s.values.empty() ? 0.0 : s.values.back();
  out.mean = s.values.empty() ? 0.0 : s.mean();
  return out;
}

}  // namespace

AnalysisResult analyze_records(const std::vector<BranchRecord>& records,
                               const AnalyzeSettings& settings, std::string case_name) {
  AnalysisResult result;
  result.case_name = std::move(case_name);
  result.settings = settings;

  std::size_t total_values = 0;
  for (ParameterKind parameter : kAllParameters) {
    ParameterAnalysis pa;
    pa.parameter = parameter;

    auto extracted = extract_parameter(records, parameter, settings.class_tolerance);
    pa.skips = extracted.skips;
    pa.value_count = extracted.values.size();
    total_values += pa.value_count;

    std::map<double, std::vector<double>> groups;
    for (const auto& v : extracted.values) {
      if (v.voltage_class.is_canonical()) {
        groups[v.voltage_class.nominal_kv()].push_back(v.value);
      }
    }

    std::vector<double> pooled;
    for (auto& [kv, group] : groups) {
      std::size_t n_raw = group.size();
      CleanSample clean = clean_group(std::move(group), settings.fence_multiplier);
      if (clean.values.size() < settings.min_count) {
        pa.warnings.push_back("class " + to_decimal_string(kv) + " kV below min_count (" +
                              std::to_string(clean.values.size()) + " values); skipped");
        continue;
      }
      ClassAnalysis ca;
      ca.class_kv = kv;
      ca.sample = summarize(clean, n_raw);
      pooled.insert(pooled.end(), clean.values.begin(), clean.values.end());

      bool distinct = clean.values.front() != clean.values.back();
      if (!distinct) {
        ca.degenerate = true;
        pa.warnings.push_back("class " + to_decimal_string(kv) +
                              " kV is degenerate (all values identical); no fits");
      } else {
        ca.histogram = build_histogram(clean, settings.n_bins);
        try {
          ca.fits = best_fit(clean, kAllFamilies, settings.n_bins, &pa.warnings);
        } catch (const Error& e) {
          pa.warnings.push_back("class " + to_decimal_string(kv) + " kV: " + e.what());
        }
      }
      pa.classes.push_back(std::move(ca));
    }

    if (!pooled.empty()) {
      double sum = 0.0;
      for (double x : pooled) sum += x;
      pa.global_mean = sum / static_cast<double>(pooled.size());
    }
    if (parameter == ParameterKind::XfmrXpuOwnBase) {
      pa.independent_range = std::make_pair(0.0, 0.25);
    }

    if (pa.classes.size() >= 3) {
      ClassMeanSeries series;
      series.parameter = parameter;
      bool positive = true;
      for (const auto& ca : pa.classes) {
        positive = positive && ca.sample.mean > 0.0;
        series.points.push_back(
            ClassMeanPoint{ca.class_kv, ca.sample.mean, ca.sample.n_kept});
      }
      if (positive) {
        try {
          pa.power_fit = fit_power(series);
          pa.dependence =
              classify_dependence(*pa.power_fit, settings.b_threshold, settings.r2_threshold);
        } catch (const Error& e) {
          pa.warnings.push_back(std::string("power fit failed: ") + e.what());
        }
      } else {
        pa.warnings.push_back("power fit skipped: some class means are not positive");
      }
    } else if (!pa.classes.empty()) {
      pa.warnings.push_back("power fit needs 3 voltage classes, have " +
                            std::to_string(pa.classes.size()));
    }
    result.parameters.push_back(std::move(pa));
  }

  if (total_values == 0) {
    throw InsufficientData("no parameter could be extracted from the case");
  }
  return result;
}

ReferenceStats reference_from_analysis(const AnalysisResult& analysis) {
  ReferenceStats ref;
  ref.provenance = "analyze run " + analysis.case_name + " (seed " +
                   to_decimal_string(analysis.settings.seed) + ")";
  for (const auto& pa : analysis.parameters) {
    ReferenceParameter rp;
    rp.parameter = pa.parameter;
    rp.provenance = ref.provenance;
    rp.dependence = pa.dependence.value_or(DependenceClass::VoltageIndependent);
    if (pa.power_fit) {
      rp.power_curve = ReferencePowerCurve{pa.power_fit->a, pa.power_fit->b, pa.power_fit->rmse,
                                           pa.power_fit->r2};
    }
    rp.independent_range = pa.independent_range;
    rp.global_mean = pa.global_mean;

    // Modal rank-1 family across the classes, ties resolved in enum order.
    std::map<DistFamily, std::size_t> family_votes;
    for (const auto& ca : pa.classes) {
      if (!ca.fits.empty()) ++family_votes[ca.fits.front().family];
    }
    std::size_t best_votes = 0;
    for (DistFamily f : {DistFamily::Normal, DistFamily::Exponential, DistFamily::Gev}) {
      auto it = family_votes.find(f);
      if (it != family_votes.end() && it->second > best_votes) {
        best_votes = it->second;
        rp.family = f;
      }
    }

    for (const auto& ca : pa.classes) {
      ReferenceClassEntry entry;
      entry.class_kv = ca.class_kv;
      entry.sample_count = ca.sample.n_kept;
      entry.mean = ca.sample.mean;
      if (!ca.fits.empty()) entry.fit = ca.fits.front();
      rp.classes.push_back(std::move(entry));
    }
    rp.placeholder = pa.classes.empty();
    ref.parameters.push_back(std::move(rp));
  }
  return ref;
}

// ---------------------------------------------------------------------------
// Case files
// ---------------------------------------------------------------------------

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << text;
  out.flush();
  if (!out) throw IoError("write failed: " + path);
}

std::string case_file_extension(CaseFormat format) {
  return format == CaseFormat::MatpowerSubset ? "m" : "csv";
}

LoadedCase load_case(const std::string& path, std::optional<double> s_base_override,
                     double class_tolerance) {
  std::string text = read_text_file(path);
  std::filesystem::path p(path);
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });

  LoadedCase out;
  out.path = path;
  out.name = p.stem().string();
  if (ext == ".m" || (ext != ".csv" && text.find("mpc.") != std::string::npos)) {
    out.format = CaseFormat::MatpowerSubset;
    try {
      MatpowerParse parsed = parse_matpower_subset(text, s_base_override, class_tolerance);
      out.records = fill_line_lengths(std::move(parsed.result.records));
      out.warnings = std::move(parsed.result.warnings);
      out.raw = std::move(parsed.raw);
    } catch (const ParseError& e) {
      throw ParseError(path + ": " + e.what());
    }
  } else {
    out.format = CaseFormat::BranchCsv;
    try {
      ParseResult parsed = parse_branch_csv(text);
      out.records = fill_line_lengths(std::move(parsed.records));
      out.warnings = std::move(parsed.warnings);
    } catch (const ParseError& e) {
      throw ParseError(path + ": " + e.what());
    }
  }
  return out;
}

void write_case_file(const LoadedCase& original, const std::vector<BranchRecord>& tuned,
                     const std::string& path) {
  if (original.format == CaseFormat::BranchCsv) {
    write_text_file(path, write_branch_csv(tuned));
    return;
  }
  if (!original.raw) throw InvalidInput("MATPOWER case lost its raw tables");
  MatpowerCase raw = *original.raw;
  for (const auto& rec : tuned) {
    if (rec.source_row < 0) continue;
    auto row = static_cast<std::size_t>(rec.source_row);
    if (row >= raw.branch.size()) continue;
    auto& cells = raw.branch[row];
    cells[2] = rec.r_pu;
    cells[3] = rec.x_pu;
    cells[5] = rec.rating_mva.value_or(0.0);
  }
  write_text_file(path, write_matpower_case(raw));
}

// ---------------------------------------------------------------------------
// Plot data and summaries
// ---------------------------------------------------------------------------

std::vector<std::string> write_plot_csvs(const AnalysisResult& analysis, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const std::string& content) {
    std::string path = (std::filesystem::path(dir) / name).string();
    write_text_file(path, content);
    written.push_back(path);
  };

  for (const auto& pa : analysis.parameters) {
    if (pa.classes.empty()) continue;
    std::string token(parameter_token(pa.parameter));

    std::string means = "class_kv,mean,n\n";
    for (const auto& ca : pa.classes) {
      means += to_decimal_string(ca.class_kv) + "," + to_decimal_string(ca.sample.mean) + "," +
               std::to_string(ca.sample.n_kept) + "\n";
    }
    emit(token + "_class_means.csv", means);

    if (pa.power_fit) {
      std::string curve = "kv,model_mean\n";
      double lo = pa.classes.front().class_kv;
      double hi = pa.classes.back().class_kv;
      for (int i = 0; i <= 100; ++i) {
        double kv = lo * std::pow(hi / lo, static_cast<double>(i) / 100.0);
        curve += to_decimal_string(kv) + "," +
                 to_decimal_string(pa.power_fit->a * std::pow(kv, pa.power_fit->b)) + "\n";
      }
      emit(token + "_power_curve.csv", curve);
    }

    for (const auto& ca : pa.classes) {
      if (ca.degenerate || ca.histogram.mass.empty()) continue;
      std::string kv = to_decimal_string(ca.class_kv);
      std::string hist = "bin_lo,bin_hi,mass\n";
      for (std::size_t i = 0; i < ca.histogram.mass.size(); ++i) {
        hist += to_decimal_string(ca.histogram.edges[i]) + "," +
                to_decimal_string(ca.histogram.edges[i + 1]) + "," +
                to_decimal_string(ca.histogram.mass[i]) + "\n";
      }
      emit(token + "_" + kv + "kv_histogram.csv", hist);

      if (!ca.fits.empty()) {
        std::string curve = "x,density\n";
        double lo = ca.sample.min;
        double hi = ca.sample.max;
        for (int i = 0; i <= 200; ++i) {
          double x = lo + (hi - lo) * static_cast<double>(i) / 200.0;
          curve += to_decimal_string(x) + "," +
                   to_decimal_string(dist_pdf(x, ca.fits.front())) + "\n";
        }
        emit(token + "_" + kv + "kv_fit.csv", curve);
      }
    }
  }
  return written;
}

std::string analysis_summary(const AnalysisResult& analysis) {
  std::string out = "case " + analysis.case_name + ": " +
                    std::to_string(analysis.parameters.size()) + " parameters, seed " +
                    to_decimal_string(analysis.settings.seed) + "\n";
  for (const auto& pa : analysis.parameters) {
    out += "  " + std::string(parameter_token(pa.parameter)) + ": ";
    if (pa.no_data()) {
      out += "no data (skips: " + pa.skips.summary() + ")\n";
      continue;
    }
    out += std::to_string(pa.value_count) + " values, " + std::to_string(pa.classes.size()) +
           " classes";
    if (!pa.classes.empty()) {
      std::map<DistFamily, std::size_t> votes;
      for (const auto& ca : pa.classes) {
        if (!ca.fits.empty()) ++votes[ca.fits.front().family];
      }
      if (!votes.empty()) {
        auto best = std::max_element(votes.begin(), votes.end(),
                                     [](const auto& a, const auto& b) { return a.second < b.second; });
        out += ", best family " + family_token(best->first);
      }
    }
    if (pa.power_fit) {
      out += ", mean(V) = " + to_decimal_string(pa.power_fit->a) + "*V^" +
             to_decimal_string(pa.power_fit->b);
      out += pa.dependence == DependenceClass::VoltageDependent ? " (voltage dependent)"
                                                                : " (voltage independent)";
    }
    if (pa.skips.total_skipped() > 0) out += ", skips: " + pa.skips.summary();
    out += "\n";
  }
  return out;
}

std::string power_fit_table(const AnalysisResult& analysis) {
  std::string out = "| Parameter | a | b | rmse | r2 | dependence |\n";
  out += "| --- | --- | --- | --- | --- | --- |\n";
  for (const auto& pa : analysis.parameters) {
    out += "| " + std::string(parameter_display_name(pa.parameter)) + " | ";
    if (pa.power_fit) {
      const auto& f = *pa.power_fit;
      out += to_decimal_string(f.a) + " | " + to_decimal_string(f.b) + " | " +
             to_decimal_string(f.rmse) + " | " + to_decimal_string(f.r2) + " | ";
      out += pa.dependence == DependenceClass::VoltageDependent ? "voltage dependent"
                                                                : "voltage independent";
    } else {
      out += "- | - | - | - | insufficient classes";
    }
    out += " |\n";
  }
  return out;
}

}  // namespace branchstat

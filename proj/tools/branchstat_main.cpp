// branchstat command line: analyze / fit / validate / tune / report over the
// shared-library C API.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "branchstat.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitTuningRequired = 1;
constexpr int kExitInputError = 2;
constexpr int kExitInsufficientData = 3;
constexpr int kExitCannotTune = 4;
constexpr int kExitInternal = 5;

int exit_code_for(bs_status status) {
  switch (status) {
    case BS_OK: return kExitOk;
    case BS_ERR_PARSE:
    case BS_ERR_INVALID_ARGUMENT: return kExitInputError;
    case BS_ERR_INSUFFICIENT_DATA: return kExitInsufficientData;
    case BS_ERR_CANNOT_TUNE: return kExitCannotTune;
    case BS_ERR_IO:
    case BS_ERR_INTERNAL: return kExitInternal;
  }
  return kExitInternal;
}

struct CaseDeleter {
  void operator()(bs_case* c) const { bs_case_free(c); }
};
struct AnalysisDeleter {
  void operator()(bs_analysis* a) const { bs_analysis_free(a); }
};
struct ReferenceDeleter {
  void operator()(bs_reference* r) const { bs_reference_free(r); }
};
struct ValidationDeleter {
  void operator()(bs_validation* v) const { bs_validation_free(v); }
};
struct TuningDeleter {
  void operator()(bs_tuning* t) const { bs_tuning_free(t); }
};

using CasePtr = std::unique_ptr<bs_case, CaseDeleter>;
using AnalysisPtr = std::unique_ptr<bs_analysis, AnalysisDeleter>;
using ReferencePtr = std::unique_ptr<bs_reference, ReferenceDeleter>;
using ValidationPtr = std::unique_ptr<bs_validation, ValidationDeleter>;
using TuningPtr = std::unique_ptr<bs_tuning, TuningDeleter>;

// Prints the library error with context and maps it onto the exit contract.
int report_failure(const char* what, bs_status status) {
  std::fprintf(stderr, "branchstat: %s: %s\n", what, bs_last_error());
  return exit_code_for(status);
}

CasePtr open_case(const std::string& path, const bs_settings& settings, int* exit_code) {
  bs_case* raw = nullptr;
  bs_status status = bs_case_open(path.c_str(), &settings, &raw);
  if (status != BS_OK) {
    *exit_code = report_failure(("cannot load case " + path).c_str(), status);
    return nullptr;
  }
  for (size_t i = 0; i < bs_case_warning_count(raw); ++i) {
    std::fprintf(stderr, "warning: %s: %s\n", path.c_str(), bs_case_warning(raw, i));
  }
  return CasePtr(raw);
}

ReferencePtr open_reference(const std::string& source, int* exit_code) {
  bs_reference* raw = nullptr;
  bs_status status = source == "bundled" ? bs_reference_bundled(&raw)
                                         : bs_reference_load(source.c_str(), &raw);
  if (status != BS_OK) {
    *exit_code = report_failure(("cannot load reference " + source).c_str(), status);
    return nullptr;
  }
  return ReferencePtr(raw);
}

std::string take_text(bs_status status, char* text, int* exit_code, const char* what) {
  if (status != BS_OK) {
    *exit_code = report_failure(what, status);
    return {};
  }
  std::string out(text ? text : "");
  bs_string_free(text);
  return out;
}

bool ensure_out_dir(const std::string& dir, int* exit_code) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    std::fprintf(stderr, "branchstat: cannot create %s: %s\n", dir.c_str(),
                 ec.message().c_str());
    *exit_code = kExitInternal;
    return false;
  }
  return true;
}

bool write_text(const std::string& path, const std::string& text, int* exit_code) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) {
    std::fprintf(stderr, "branchstat: cannot write %s\n", path.c_str());
    *exit_code = kExitInternal;
    return false;
  }
  std::fwrite(text.data(), 1, text.size(), f);
  std::fclose(f);
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Transmission branch parameter statistics, validation and tuning"};
  app.require_subcommand(1);

  bs_settings settings;
  bs_settings_init(&settings);

  // Shared statistics flags; added to every subcommand.
  auto add_flags = [&settings](CLI::App* cmd) {
    cmd->add_option("--bins", settings.n_bins, "Histogram bin count")
        ->check(CLI::Range(2, 100000))
        ->capture_default_str();
    cmd->add_option("--min-count", settings.min_count, "Minimum cleaned values per class")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--fence", settings.fence_multiplier, "Box-plot outlier fence multiplier")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--ratio-lo", settings.ratio_lo, "Validation band lower ratio")
        ->check(CLI::Range(1e-9, 0.999999))
        ->capture_default_str();
    cmd->add_option("--ratio-hi", settings.ratio_hi, "Validation band upper ratio")
        ->check(CLI::Range(1.000001, 1e9))
        ->capture_default_str();
    cmd->add_option("--b-threshold", settings.b_threshold,
                    "|b| below this is voltage independent")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--r2-threshold", settings.r2_threshold,
                    "r2 below this is voltage independent")
        ->check(CLI::Range(1e-9, 1.0))
        ->capture_default_str();
    cmd->add_option("--seed", settings.seed, "Sampler seed")
        ->envname("BRANCHSTAT_SEED")
        ->capture_default_str();
  };

  // analyze -------------------------------------------------------------
  auto* analyze = app.add_subcommand("analyze", "Derive the statistics bundle from case files");
  std::vector<std::string> analyze_inputs;
  std::string analyze_out;
  analyze->add_option("cases", analyze_inputs, "Case files (.m or .csv)")->required();
  analyze->add_option("--out", analyze_out, "Output directory for the bundle and plot CSVs")
      ->required();
  add_flags(analyze);

  // fit -----------------------------------------------------------------
  auto* fit = app.add_subcommand("fit", "Print the power-curve fits per parameter");
  std::vector<std::string> fit_inputs;
  std::string fit_out;
  fit->add_option("cases", fit_inputs, "Case files (.m or .csv)")->required();
  fit->add_option("--out", fit_out, "Optional directory for power_fits.md");
  add_flags(fit);

  // validate --------------------------------------------------------------
  auto* validate = app.add_subcommand("validate", "Check a case against a reference");
  std::string validate_input, validate_reference = "bundled", validate_out;
  validate->add_option("case", validate_input, "Case file")->required();
  validate->add_option("--reference", validate_reference,
                       "Stats bundle path or 'bundled'")
      ->capture_default_str();
  validate->add_option("--out", validate_out, "Optional directory for report.md");
  add_flags(validate);

  // tune ------------------------------------------------------------------
  auto* tune = app.add_subcommand("tune", "Reassign failing parameters from the reference");
  std::string tune_input, tune_reference = "bundled", tune_out;
  std::vector<std::string> tune_params;
  tune->add_option("case", tune_input, "Case file")->required();
  tune->add_option("--reference", tune_reference, "Stats bundle path or 'bundled'")
      ->capture_default_str();
  tune->add_option("--out", tune_out, "Output directory for the tuned case and plan")
      ->required();
  tune->add_option("--param", tune_params,
                   "Force-tune parameter_token[:kv] instead of validating first");
  add_flags(tune);

  // report ------------------------------------------------------------------
  auto* report = app.add_subcommand("report", "Render a saved stats bundle as markdown");
  std::string report_reference, report_out;
  report->add_option("--reference", report_reference, "Stats bundle path")->required();
  report->add_option("--out", report_out, "Optional directory for stats_report.md");
  add_flags(report);

  CLI11_PARSE(app, argc, argv);
  int exit_code = kExitOk;

  if (*analyze || *fit) {
    const auto& inputs = *analyze ? analyze_inputs : fit_inputs;
    std::vector<CasePtr> cases;
    std::vector<const bs_case*> raw;
    for (const auto& path : inputs) {
      auto c = open_case(path, settings, &exit_code);
      if (!c) return exit_code;
      raw.push_back(c.get());
      cases.push_back(std::move(c));
    }
    bs_analysis* a = nullptr;
    bs_status status = bs_analyze(raw.data(), raw.size(), &settings, &a);
    if (status != BS_OK) return report_failure("analysis failed", status);
    AnalysisPtr analysis(a);

    if (*analyze) {
      if (!ensure_out_dir(analyze_out, &exit_code)) return exit_code;
      std::string bundle_path =
          (std::filesystem::path(analyze_out) / "stats_bundle.json").string();
      status = bs_analysis_write_bundle(analysis.get(), bundle_path.c_str());
      if (status != BS_OK) return report_failure("cannot write bundle", status);
      std::string plots_dir = (std::filesystem::path(analyze_out) / "plots").string();
      status = bs_analysis_write_plot_csvs(analysis.get(), plots_dir.c_str());
      if (status != BS_OK) return report_failure("cannot write plot CSVs", status);

      char* text = nullptr;
      bs_status text_status = bs_analysis_summary(analysis.get(), &text);
      std::string summary = take_text(text_status, text, &exit_code, "cannot summarize");
      if (exit_code != kExitOk) return exit_code;
      std::printf("%s", summary.c_str());
      std::printf("bundle: %s\n", bundle_path.c_str());
    } else {
      char* text = nullptr;
      bs_status text_status = bs_analysis_power_table(analysis.get(), &text);
      std::string table = take_text(text_status, text, &exit_code, "cannot render fits");
      if (exit_code != kExitOk) return exit_code;
      std::printf("%s", table.c_str());
      if (!fit_out.empty()) {
        if (!ensure_out_dir(fit_out, &exit_code)) return exit_code;
        if (!write_text((std::filesystem::path(fit_out) / "power_fits.md").string(), table,
                        &exit_code)) {
          return exit_code;
        }
      }
    }
    return kExitOk;
  }

  if (*validate) {
    auto c = open_case(validate_input, settings, &exit_code);
    if (!c) return exit_code;
    auto ref = open_reference(validate_reference, &exit_code);
    if (!ref) return exit_code;

    bs_validation* v = nullptr;
    bs_status status = bs_validate(c.get(), ref.get(), &settings, &v);
    if (status != BS_OK) return report_failure("validation failed", status);
    ValidationPtr validation(v);

    char* text = nullptr;
    bs_status text_status =
        bs_validation_render_table(validation.get(), bs_case_name(c.get()), &text);
    std::string table = take_text(text_status, text, &exit_code, "cannot render table");
    if (exit_code != kExitOk) return exit_code;
    std::printf("%s", table.c_str());

    if (!validate_out.empty()) {
      if (!ensure_out_dir(validate_out, &exit_code)) return exit_code;
      char* rpt = nullptr;
      bs_status rpt_status =
          bs_validation_render_report(validation.get(), bs_case_name(c.get()), &rpt);
      std::string report_text = take_text(rpt_status, rpt, &exit_code, "cannot render report");
      if (exit_code != kExitOk) return exit_code;
      if (!write_text((std::filesystem::path(validate_out) / "report.md").string(), report_text,
                      &exit_code)) {
        return exit_code;
      }
    }
    if (bs_validation_all_no_data(validation.get())) {
      std::fprintf(stderr, "warning: reference carries no usable envelope for this case\n");
      return kExitOk;
    }
    return bs_validation_tuning_required(validation.get()) ? kExitTuningRequired : kExitOk;
  }

  if (*tune) {
    auto c = open_case(tune_input, settings, &exit_code);
    if (!c) return exit_code;
    auto ref = open_reference(tune_reference, &exit_code);
    if (!ref) return exit_code;

    std::vector<const char*> forced;
    forced.reserve(tune_params.size());
    for (const auto& p : tune_params) forced.push_back(p.c_str());

    bs_tuning* t = nullptr;
    bs_status status = bs_tune(c.get(), ref.get(), &settings,
                               forced.empty() ? nullptr : forced.data(), forced.size(), &t);
    if (status != BS_OK) return report_failure("tuning failed", status);
    TuningPtr tuning(t);

    char* text = nullptr;
    bs_status text_status = bs_tuning_summary(tuning.get(), &text);
    std::string summary = take_text(text_status, text, &exit_code, "cannot summarize tuning");
    if (exit_code != kExitOk) return exit_code;
    std::printf("%s", summary.c_str());

    if (bs_tuning_change_count(tuning.get()) == 0) return kExitOk;

    if (!ensure_out_dir(tune_out, &exit_code)) return exit_code;
    std::string case_path =
        (std::filesystem::path(tune_out) /
         (std::string("tuned_case.") + bs_tuning_case_extension(tuning.get())))
            .string();
    status = bs_tuning_write_case(tuning.get(), case_path.c_str());
    if (status != BS_OK) return report_failure("cannot write tuned case", status);
    std::string plan_path = (std::filesystem::path(tune_out) / "tuning_plan.csv").string();
    status = bs_tuning_write_plan_csv(tuning.get(), plan_path.c_str());
    if (status != BS_OK) return report_failure("cannot write tuning plan", status);
    std::printf("tuned case: %s\nplan: %s\n", case_path.c_str(), plan_path.c_str());
    return kExitOk;
  }

  if (*report) {
    bs_analysis* a = nullptr;
    bs_status status = bs_analysis_load_bundle(report_reference.c_str(), &a);
    if (status != BS_OK) return report_failure("cannot load bundle", status);
    AnalysisPtr analysis(a);
    char* text = nullptr;
    bs_status text_status = bs_analysis_render_markdown(analysis.get(), &text);
    std::string markdown = take_text(text_status, text, &exit_code, "cannot render bundle");
    if (exit_code != kExitOk) return exit_code;
    std::printf("%s", markdown.c_str());
    if (!report_out.empty()) {
      if (!ensure_out_dir(report_out, &exit_code)) return exit_code;
      if (!write_text((std::filesystem::path(report_out) / "stats_report.md").string(), markdown,
                      &exit_code)) {
        return exit_code;
      }
    }
    return kExitOk;
  }

  return kExitOk;
}

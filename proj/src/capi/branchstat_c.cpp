// extern-C implementation of include/branchstat.h over the C++ core.

#include "branchstat.h"

#include <algorithm>
#include <memory>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include "core/bundle.hpp"
#include "core/errors.hpp"
#include "core/pipeline.hpp"
#include "core/report.hpp"
#include "core/synthesis.hpp"
#include "core/textio.hpp"

struct bs_case {
  branchstat::LoadedCase data;
};

struct bs_analysis {
  branchstat::AnalysisResult data;
};

struct bs_reference {
  branchstat::ReferenceStats data;
};

struct bs_validation {
  std::vector<branchstat::ValidationVerdict> verdicts;
  branchstat::ValidationSettings settings;
  std::string reference_provenance;
};

struct bs_tuning {
  branchstat::LoadedCase original;
  branchstat::TuningPlan plan;
  std::vector<branchstat::BranchRecord> tuned;
};

namespace {

thread_local std::string g_last_error;

bs_status fail(bs_status code, const std::string& message) {
  g_last_error = message;
  return code;
}

bs_status translate_current_exception() {
  try {
    throw;
  } catch (const branchstat::ParseError& e) {
    return fail(BS_ERR_PARSE, e.what());
  } catch (const branchstat::InsufficientData& e) {
    return fail(BS_ERR_INSUFFICIENT_DATA, e.what());
  } catch (const branchstat::CannotTune& e) {
    return fail(BS_ERR_CANNOT_TUNE, e.what());
  } catch (const branchstat::IoError& e) {
    return fail(BS_ERR_IO, e.what());
  } catch (const branchstat::InvalidInput& e) {
    return fail(BS_ERR_INVALID_ARGUMENT, e.what());
  } catch (const std::exception& e) {
    return fail(BS_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(BS_ERR_INTERNAL, "unknown error");
  }
}

branchstat::AnalyzeSettings to_analyze_settings(const bs_settings* s) {
  branchstat::AnalyzeSettings out;
  if (!s) return out;
  out.n_bins = static_cast<std::size_t>(s->n_bins);
  out.min_count = static_cast<std::size_t>(s->min_count);
  out.fence_multiplier = s->fence_multiplier;
  out.class_tolerance = s->class_tolerance;
  out.ratio_lo = s->ratio_lo;
  out.ratio_hi = s->ratio_hi;
  out.b_threshold = s->b_threshold;
  out.r2_threshold = s->r2_threshold;
  out.seed = s->seed;
  return out;
}

branchstat::ValidationSettings to_validation_settings(const bs_settings* s) {
  branchstat::ValidationSettings out;
  if (!s) return out;
  out.ratio_lo = s->ratio_lo;
  out.ratio_hi = s->ratio_hi;
  out.min_count = static_cast<std::size_t>(s->min_count);
  out.fence_multiplier = s->fence_multiplier;
  out.class_tolerance = s->class_tolerance;
  return out;
}

void validate_settings(const bs_settings* s) {
  if (!s) return;
  using branchstat::InvalidInput;
  if (s->n_bins < 2) throw InvalidInput("n_bins must be at least 2");
  if (s->min_count < 1) throw InvalidInput("min_count must be at least 1");
  if (!(s->fence_multiplier > 0.0)) throw InvalidInput("fence multiplier must be positive");
  if (!(s->class_tolerance >= 0.0 && s->class_tolerance < 0.5)) {
    throw InvalidInput("class tolerance must lie in [0, 0.5)");
  }
  if (!(s->ratio_lo > 0.0 && s->ratio_lo < 1.0 && s->ratio_hi > 1.0)) {
    throw InvalidInput("ratio band must satisfy 0 < lo < 1 < hi");
  }
  if (!(s->b_threshold > 0.0)) throw InvalidInput("b_threshold must be positive");
  if (!(s->r2_threshold > 0.0 && s->r2_threshold <= 1.0)) {
    throw InvalidInput("r2_threshold must lie in (0, 1]");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

bs_status return_text(const std::string& s, char** out_text) {
  *out_text = dup_string(s);
  if (!*out_text) return fail(BS_ERR_INTERNAL, "out of memory");
  return BS_OK;
}

}  // namespace

extern "C" {

const char* bs_version(void) { return "0.1.0"; }

const char* bs_last_error(void) { return g_last_error.c_str(); }

void bs_settings_init(bs_settings* settings) {
  if (!settings) return;
  branchstat::AnalyzeSettings d;
  settings->n_bins = static_cast<int>(d.n_bins);
  settings->min_count = static_cast<int>(d.min_count);
  settings->fence_multiplier = d.fence_multiplier;
  settings->class_tolerance = d.class_tolerance;
  settings->ratio_lo = d.ratio_lo;
  settings->ratio_hi = d.ratio_hi;
  settings->b_threshold = d.b_threshold;
  settings->r2_threshold = d.r2_threshold;
  settings->seed = d.seed;
}

void bs_string_free(char* text) { std::free(text); }

/* --- cases ---------------------------------------------------------------*/

bs_status bs_case_open(const char* path, const bs_settings* settings, bs_case** out_case) {
  if (!path || !out_case) return fail(BS_ERR_INVALID_ARGUMENT, "null argument");
  *out_case = nullptr;
  try {
    validate_settings(settings);
    double tolerance = settings ? settings->class_tolerance : branchstat::kDefaultClassTolerance;
    auto handle = new bs_case{branchstat::load_case(path, std::nullopt, tolerance)};
    *out_case = handle;
    return BS_OK;
  } catch (...) {
    return translate_current_exception();
  }
}

void bs_case_free(bs_case* c) { delete c; }

const char* bs_case_name(const bs_case* c) { return c ? c->data.name.c_str() : ""; }

size_t bs_case_branch_count(const bs_case* c) { return c ? c->data.records.size() : 0; }

size_t bs_case_warning_count(const bs_case* c) { return c ? c->data.warnings.size() : 0; }

const char* bs_case_warning(const bs_case* c, size_t index) {
  if (!c || index >= c->data.warnings.size()) return nullptr;
  return c->data.warnings[index].c_str();
}

/* --- analysis ------------------------------------------------------------*/

bs_status bs_analyze(const bs_case* const* cases, size_t case_count, const bs_settings* settings,
                     bs_analysis** out_analysis) {
  if (!cases || case_count == 0 || !out_analysis) {
    return fail(BS_ERR_INVALID_ARGUMENT, "analyze requires at least one case");
  }
  *out_analysis = nullptr;
  try {
    validate_settings(settings);
    std::vector<branchstat::BranchRecord> records;
    std::string name;
    for (size_t i = 0; i < case_count; ++i) {
      if (!cases[i]) throw branchstat::InvalidInput("null case handle");
      const auto& c = cases[i]->data;
      records.insert(records.end(), c.records.begin(), c.records.end());
      if (!name.empty()) name += "+";
      name += c.name;
    }
    auto analysis =
        branchstat::analyze_records(records, to_analyze_settings(settings), std::move(name));
    for (size_t i = 0; i < case_count; ++i) {
      for (const auto& w : cases[i]->data.warnings) analysis.warnings.push_back(w);
    }
    *out_analysis = new bs_analysis{std::move(analysis)};
    return BS_OK;
  } catch (...) {
    return translate_current_exception();
  }
}

void bs_analysis_free(bs_analysis* a) { delete a; }

const char* bs_analysis_case_name(const bs_analysis* a) {
  return a ? a->data.case_name.c_str() : "";
}

bs_status bs_analysis_write_bundle(const bs_analysis* a, const char* path) {
  if (!a || !path) return fail(BS_ERR_INVALID_ARGUMENT, "null argument");
  try {
    branchstat::write_stats_bundle(a->data, path);
    return BS_OK;
  } catch (...) {
    return translate_current_exception();
  }
}

bs_status bs_analysis_load_bundle(const char* path, bs_analysis** out_analysis) {
  if (!path || !out_analysis) return fail(BS_ERR_INVALID_ARGUMENT, "null argument");
  *out_analysis = nullptr;
  try {
    *out_analysis = new bs_analysis{branchstat::load_stats_bundle(path)};
    return BS_OK;
  } catch (...) {
    return translate_current_exception();
  }
}

bs_status bs_analysis_write_plot_csvs(const bs_analysis* a, const char* dir) {
  if (!a || !dir) return fail(BS_ERR_INVALID_ARGUMENT, "null argument");
  try {
    branchstat::write_plot_csvs(a->data, dir);
    return BS_OK;
  } catch (...) {
    return translate_current_exception();
  }
}

bs_status bs_analysis_summary(const bs_analysis* a, char** out_text) {
  if (!a || !out_text) return fail(BS_ERR_INVALID_ARGUMENT, "null argument");
  return return_text(branchstat::analysis_summary(a->data), out_text);
}

bs_status bs_analysis_power_table(const bs_analysis* a, char** out_text) {
  if (!a || !out_text) return fail(BS_ERR_INVALID_ARGUMENT, "null argument");
  return return_text(branchstat::power_fit_table(a->data), out_text);
}

bs_status bs_analysis_render_markdown(const bs_analysis* a, char** out_text) {
  if (!a || !out_text) return fail(BS_ERR_INVALID_ARGUMENT, "null argument");
  return return_text(branchstat::render_bundle_markdown(a->data), out_text);
}

/* --- references ----------------------------------------------------------*/

bs_status bs_reference_bundled(bs_reference** out_reference) {
  if (!out_reference) return fail(BS_ERR_INVALID_ARGUMENT, "null argument");
  *out_reference = new bs_reference{branchstat::bundled_reference()};
  return BS_OK;
}

bs_status bs_reference_load(const char* bundle_path, bs_reference** out_reference) {
  if (!bundle_path || !out_reference) return fail(BS_ERR_INVALID_ARGUMENT, "null argument");
  *out_reference = nullptr;
  try {
    *out_reference = new bs_reference{branchstat::load_reference_bundle(bundle_path)};
    return BS_OK;
  } catch (...) {
    return translate_current_exception();
  }
}

bs_status bs_reference_from_analysis(const bs_analysis* a, bs_reference** out_reference) {
  if (!a || !out_reference) return fail(BS_ERR_INVALID_ARGUMENT, "null argument");
  *out_reference = nullptr;
  try {
    *out_reference = new bs_reference{branchstat::reference_from_analysis(a->data)};
    return BS_OK;
  } catch (...) {
    return translate_current_exception();
  }
}

void bs_reference_free(bs_reference* r) { delete r; }

const char* bs_reference_provenance(const bs_reference* r) {
  return r ? r->data.provenance.c_str() : "";
}

/* --- validation ----------------------------------------------------------*/

bs_status bs_validate(const bs_case* c, const bs_reference* r, const bs_settings* settings,
                      bs_validation** out_validation) {
  if (!c || !r || !out_validation) return fail(BS_ERR_INVALID_ARGUMENT, "null argument");
  *out_validation = nullptr;
  try {
    validate_settings(settings);
    auto vsettings = to_validation_settings(settings);
    auto verdicts = branchstat::validate_case(c->data.records, r->data, vsettings);
    *out_validation = new bs_validation{std::move(verdicts), vsettings, r->data.provenance};
    return BS_OK;
  } catch (...) {
    return translate_current_exception();
  }
}

void bs_validation_free(bs_validation* v) { delete v; }

int bs_validation_tuning_required(const bs_validation* v) {
  return v && branchstat::any_tuning_required(v->verdicts) ? 1 : 0;
}

int bs_validation_all_no_data(const bs_validation* v) {
  return v && branchstat::all_no_data(v->verdicts) ? 1 : 0;
}

bs_status bs_validation_render_table(const bs_validation* v, const char* case_name,
                                     char** out_text) {
  if (!v || !case_name || !out_text) return fail(BS_ERR_INVALID_ARGUMENT, "null argument");
  return return_text(branchstat::render_table(v->verdicts, case_name), out_text);
}

bs_status bs_validation_render_report(const bs_validation* v, const char* case_name,
                                      char** out_text) {
  if (!v || !case_name || !out_text) return fail(BS_ERR_INVALID_ARGUMENT, "null argument");
  return return_text(
      branchstat::render_report(v->verdicts, case_name, v->settings, v->reference_provenance),
      out_text);
}

/* --- tuning --------------------------------------------------------------*/

bs_status bs_tune(const bs_case* c, const bs_reference* r, const bs_settings* settings,
                  const char* const* forced_failures, size_t forced_count,
                  bs_tuning** out_tuning) {
  if (!c || !r || !out_tuning) return fail(BS_ERR_INVALID_ARGUMENT, "null argument");
  if (forced_count > 0 && !forced_failures) {
    return fail(BS_ERR_INVALID_ARGUMENT, "null forced failure list");
  }
  *out_tuning = nullptr;
  try {
    validate_settings(settings);
    auto vsettings = to_validation_settings(settings);
    std::vector<branchstat::FailureKey> failures;

    if (forced_count > 0) {
      for (size_t i = 0; i < forced_count; ++i) {
        if (!forced_failures[i]) throw branchstat::InvalidInput("null forced failure entry");
        std::string entry(forced_failures[i]);
        std::string token = entry;
        std::optional<double> kv;
        if (auto colon = entry.find(':'); colon != std::string::npos) {
          token = entry.substr(0, colon);
          kv = branchstat::parse_double(entry.substr(colon + 1));
          if (!kv) throw branchstat::InvalidInput("bad class kV in '" + entry + "'");
        }
        auto parameter = branchstat::parse_parameter_token(token);
        if (!parameter) throw branchstat::InvalidInput("unknown parameter '" + token + "'");
        if (kv) {
          failures.push_back(branchstat::FailureKey{*parameter, *kv});
        } else {
          // Every canonical class of this parameter present in the case.
          auto extracted = branchstat::extract_parameter(c->data.records, *parameter,
                                                         vsettings.class_tolerance);
          std::vector<double> seen;
          for (const auto& value : extracted.values) {
            if (!value.voltage_class.is_canonical()) continue;
            double ckv = value.voltage_class.nominal_kv();
            if (std::find(seen.begin(), seen.end(), ckv) == seen.end()) {
              seen.push_back(ckv);
              failures.push_back(branchstat::FailureKey{*parameter, ckv});
            }
          }
        }
      }
    } else {
      auto verdicts = branchstat::validate_case(c->data.records, r->data, vsettings);
      for (const auto& [parameter, kv] : branchstat::failing_classes(verdicts)) {
        failures.push_back(branchstat::FailureKey{parameter, kv});
      }
    }

    auto tuning = std::make_unique<bs_tuning>(bs_tuning{c->data, {}, {}});
    std::uint64_t seed = settings ? settings->seed : branchstat::AnalyzeSettings{}.seed;
    branchstat::SeededRng rng(seed);
    tuning->plan = branchstat::tune_case(c->data.records, r->data, failures, rng,
                                         vsettings.class_tolerance);
    tuning->tuned = branchstat::apply_plan(c->data.records, tuning->plan);
    *out_tuning = tuning.release();
    return BS_OK;
  } catch (...) {
    return translate_current_exception();
  }
}

void bs_tuning_free(bs_tuning* t) { delete t; }

size_t bs_tuning_change_count(const bs_tuning* t) { return t ? t->plan.changes.size() : 0; }

bs_status bs_tuning_write_plan_csv(const bs_tuning* t, const char* path) {
  if (!t || !path) return fail(BS_ERR_INVALID_ARGUMENT, "null argument");
  try {
    branchstat::write_text_file(path, branchstat::write_plan_csv(t->plan));
    return BS_OK;
  } catch (...) {
    return translate_current_exception();
  }
}

bs_status bs_tuning_write_case(const bs_tuning* t, const char* path) {
  if (!t || !path) return fail(BS_ERR_INVALID_ARGUMENT, "null argument");
  try {
    branchstat::write_case_file(t->original, t->tuned, path);
    return BS_OK;
  } catch (...) {
    return translate_current_exception();
  }
}

const char* bs_tuning_case_extension(const bs_tuning* t) {
  static const char* kCsv = "csv";
  static const char* kM = "m";
  if (!t) return kCsv;
  return t->original.format == branchstat::CaseFormat::MatpowerSubset ? kM : kCsv;
}

bs_status bs_tuning_summary(const bs_tuning* t, char** out_text) {
  if (!t || !out_text) return fail(BS_ERR_INVALID_ARGUMENT, "null argument");
  std::string text;
  if (t->plan.changes.empty()) {
    text = "no tuning required: the case conforms to the reference\n";
  } else {
    text = std::to_string(t->plan.changes.size()) + " value(s) reassigned:\n";
    std::string last_desc;
    for (const auto& change : t->plan.changes) {
      if (change.source_desc != last_desc) {
        text += "  " + std::string(branchstat::parameter_token(change.parameter)) + " @ " +
                branchstat::to_decimal_string(change.class_kv) + " kV from " +
                change.source_desc + "\n";
        last_desc = change.source_desc;
      }
    }
  }
  return return_text(text, out_text);
}

} /* extern "C" */

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <doctest.h>

#include "core/bundle.hpp"
#include "core/errors.hpp"
#include "core/pipeline.hpp"
#include "core/report.hpp"
#include "core/synthesis.hpp"
#include "support/toy_case.hpp"

using namespace branchstat;
using testsupport::make_toy_records;
using testsupport::scale_transformer_capacity;

namespace {

std::vector<ValidationVerdict> pattern_verdicts(const std::vector<Verdict>& pattern) {
  std::vector<ValidationVerdict> verdicts;
  for (std::size_t i = 0; i < kAllParameters.size(); ++i) {
    ValidationVerdict v;
    v.parameter = kAllParameters[i];
    v.overall = pattern[i];
    verdicts.push_back(v);
  }
  return verdicts;
}

const ValidationVerdict& verdict_for(const std::vector<ValidationVerdict>& verdicts,
                                     ParameterKind p) {
  auto it = std::find_if(verdicts.begin(), verdicts.end(),
                         [p](const ValidationVerdict& v) { return v.parameter == p; });
  REQUIRE(it != verdicts.end());
  return *it;
}

bool reference_equal(const ReferenceStats& a, const ReferenceStats& b) {
  if (a.provenance != b.provenance) return false;
  if (a.parameters.size() != b.parameters.size()) return false;
  for (std::size_t i = 0; i < a.parameters.size(); ++i) {
    const auto& x = a.parameters[i];
    const auto& y = b.parameters[i];
    if (x.parameter != y.parameter || x.dependence != y.dependence || x.family != y.family ||
        x.placeholder != y.placeholder || x.provenance != y.provenance) {
      return false;
    }
    if (x.power_curve.has_value() != y.power_curve.has_value()) return false;
    if (x.power_curve) {
      if (x.power_curve->a != y.power_curve->a || x.power_curve->b != y.power_curve->b ||
          x.power_curve->rmse != y.power_curve->rmse || x.power_curve->r2 != y.power_curve->r2) {
        return false;
      }
    }
    if (x.independent_range != y.independent_range) return false;
    if (x.global_mean != y.global_mean) return false;
    if (x.classes.size() != y.classes.size()) return false;
    for (std::size_t c = 0; c < x.classes.size(); ++c) {
      const auto& cx = x.classes[c];
      const auto& cy = y.classes[c];
      if (cx.class_kv != cy.class_kv || cx.sample_count != cy.sample_count ||
          cx.mean != cy.mean || cx.fit.has_value() != cy.fit.has_value()) {
        return false;
      }
      if (cx.fit) {
        if (cx.fit->family != cy.fit->family ||
            cx.fit->log_likelihood != cy.fit->log_likelihood ||
            cx.fit->kl_to_empirical != cy.fit->kl_to_empirical ||
            !(cx.fit->params == cy.fit->params)) {
          return false;
        }
      }
    }
  }
  return true;
}

}  // namespace

TEST_CASE("render_table reproduces the published check-mark column") {
  auto verdicts = pattern_verdicts({Verdict::Pass, Verdict::TuningRequired, Verdict::Pass,
                                    Verdict::Pass, Verdict::Pass, Verdict::Pass, Verdict::Pass});
  std::string expected =
      "| Parameter | ACTIVSg 200 |\n"
      "| --- | --- |\n"
      "| Transformer X (p.u.) | ✓ |\n"
      "| Line X (Ω/km) | TR |\n"
      "| Transformer Capacity (MVA) | ✓ |\n"
      "| Transformer X/R ratio | ✓ |\n"
      "| Line Length l (km) | ✓ |\n"
      "| Line X/R ratio | ✓ |\n"
      "| Line Capacity (MVA) | ✓ |\n";
  CHECK(render_table(verdicts, "ACTIVSg 200") == expected);
}

TEST_CASE("render_table degenerate inputs") {
  auto all_pass = pattern_verdicts(std::vector<Verdict>(7, Verdict::Pass));
  std::string table = render_table(all_pass, "case");
  CHECK(std::count(table.begin(), table.end(), '\n') == 9);
  CHECK(table.find("TR") == std::string::npos);
  CHECK(render_table({}, "empty") == "| Parameter | empty |\n| --- | --- |\n");
}

TEST_CASE("toy case validates all-pass against its own analysis") {
  auto records = make_toy_records();
  auto analysis = analyze_records(records, AnalyzeSettings{}, "toy");
  auto reference = reference_from_analysis(analysis);
  auto verdicts = validate_case(records, reference);
  REQUIRE(verdicts.size() == 7);
  CHECK_FALSE(any_tuning_required(verdicts));
  CHECK(verdict_for(verdicts, ParameterKind::XfmrCapacityMva).overall == Verdict::Pass);
  CHECK(verdict_for(verdicts, ParameterKind::XfmrXpuOwnBase).overall == Verdict::Pass);
  CHECK(verdict_for(verdicts, ParameterKind::LineXOhmPerKm).overall == Verdict::Pass);
}

TEST_CASE("a 10x capacity shift flips exactly the capacity row") {
  auto records = make_toy_records();
  auto reference = reference_from_analysis(analyze_records(records, AnalyzeSettings{}, "toy"));
  auto baseline = validate_case(records, reference);
  auto perturbed = validate_case(scale_transformer_capacity(records, 10.0), reference);
  for (std::size_t i = 0; i < perturbed.size(); ++i) {
    if (perturbed[i].parameter == ParameterKind::XfmrCapacityMva) {
      CHECK(perturbed[i].overall == Verdict::TuningRequired);
      for (const auto& c : perturbed[i].classes) {
        if (c.ratio) CHECK(*c.ratio > 2.0);
      }
    } else {
      CHECK(perturbed[i].overall == baseline[i].overall);
    }
  }
}

TEST_CASE("scaling a parameter scales its class ratios linearly") {
  auto records = make_toy_records();
  auto reference = reference_from_analysis(analyze_records(records, AnalyzeSettings{}, "toy"));
  auto base = validate_case(records, reference);
  const double k = 3.0;
  auto scaled = validate_case(scale_transformer_capacity(records, k), reference);
  const auto& b = verdict_for(base, ParameterKind::XfmrCapacityMva);
  const auto& s = verdict_for(scaled, ParameterKind::XfmrCapacityMva);
  REQUIRE(b.classes.size() == s.classes.size());
  for (std::size_t i = 0; i < b.classes.size(); ++i) {
    REQUIRE(b.classes[i].ratio.has_value());
    REQUIRE(s.classes[i].ratio.has_value());
    CHECK(*s.classes[i].ratio == doctest::Approx(k * *b.classes[i].ratio).epsilon(1e-9));
  }
}

TEST_CASE("validation is invariant under record order") {
  auto records = make_toy_records();
  auto reference = reference_from_analysis(analyze_records(records, AnalyzeSettings{}, "toy"));
  auto forward = validate_case(records, reference);
  std::reverse(records.begin(), records.end());
  auto backward = validate_case(records, reference);
  CHECK(render_report(forward, "toy", ValidationSettings{}, "ref") ==
        render_report(backward, "toy", ValidationSettings{}, "ref"));
}

TEST_CASE("placeholder-only references never pass") {
  ReferenceStats ref;
  ref.provenance = "empty";
  for (ParameterKind p : kAllParameters) {
    ReferenceParameter rp;
    rp.parameter = p;
    rp.placeholder = true;
    ref.parameters.push_back(rp);
  }
  auto verdicts = validate_case(make_toy_records(), ref);
  CHECK(all_no_data(verdicts));
  for (const auto& v : verdicts) {
    for (const auto& c : v.classes) CHECK(c.verdict != Verdict::Pass);
  }
}

TEST_CASE("validate_case rejects an empty record list") {
  CHECK_THROWS_AS(validate_case({}, bundled_reference()), InvalidInput);
}

TEST_CASE("stats bundle round-trips losslessly") {
  auto records = make_toy_records();
  auto analysis = analyze_records(records, AnalyzeSettings{}, "toy");
  std::string json = bundle_to_json(analysis);
  AnalysisResult reparsed = parse_bundle_json(json);
  CHECK(bundle_to_json(reparsed) == json);
  CHECK(reference_equal(reference_from_analysis(analysis), reference_from_analysis(reparsed)));
  CHECK(json.find("\"n_bins\": \"50\"") != std::string::npos);
  CHECK(json.find("\"fence_multiplier\": \"3\"") != std::string::npos);
  CHECK(json.find("\"seed\": \"42\"") != std::string::npos);
}

TEST_CASE("bundle marks absent populations as no_data") {
  // Lines only: all transformer parameters must survive as no_data sections.
  std::vector<BranchRecord> lines;
  auto all = make_toy_records();
  for (const auto& rec : all) {
    if (rec.kind == BranchKind::Line) lines.push_back(rec);
  }
  auto analysis = analyze_records(lines, AnalyzeSettings{}, "lines_only");
  std::string json = bundle_to_json(analysis);
  AnalysisResult reparsed = parse_bundle_json(json);
  for (const auto& pa : reparsed.parameters) {
    if (parameter_is_transformer(pa.parameter)) {
      CHECK(pa.no_data());
      CHECK(pa.classes.empty());
    } else {
      CHECK_FALSE(pa.no_data());
    }
  }
}

TEST_CASE("tune_case pins failing classes to the reference curve") {
  auto records = make_toy_records();
  auto reference = reference_from_analysis(analyze_records(records, AnalyzeSettings{}, "toy"));
  auto perturbed = scale_transformer_capacity(records, 10.0);
  auto failures_raw = failing_classes(validate_case(perturbed, reference));
  REQUIRE_FALSE(failures_raw.empty());
  std::vector<FailureKey> failures;
  for (const auto& [p, kv] : failures_raw) {
    CHECK(p == ParameterKind::XfmrCapacityMva);
    failures.push_back(FailureKey{p, kv});
  }

  SeededRng rng(42);
  TuningPlan plan = tune_case(perturbed, reference, failures, rng);
  CHECK(plan.changes.size() >= 100);
  const auto& curve = reference.parameter(ParameterKind::XfmrCapacityMva).power_curve;
  REQUIRE(curve.has_value());
  for (const auto& failure : failures) {
    double target = curve->evaluate(failure.class_kv);
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& change : plan.changes) {
      if (change.class_kv != failure.class_kv) continue;
      CHECK(change.new_value > 0.0);
      sum += change.new_value;
      ++n;
    }
    REQUIRE(n >= 100);
    CHECK(std::abs(sum / static_cast<double>(n) - target) <= 0.10 * target);
  }

  // Applying the plan flips the capacity rows back to pass.
  auto tuned = apply_plan(perturbed, plan);
  auto after = validate_case(tuned, reference);
  CHECK_FALSE(any_tuning_required(after));
  CHECK(verdict_for(after, ParameterKind::XfmrCapacityMva).overall == Verdict::Pass);
}

TEST_CASE("tune_case determinism and edge cases") {
  auto records = make_toy_records();
  auto reference = reference_from_analysis(analyze_records(records, AnalyzeSettings{}, "toy"));

  SeededRng a(42), b(42);
  std::vector<FailureKey> failures{{ParameterKind::XfmrCapacityMva, 230.0}};
  CHECK(write_plan_csv(tune_case(records, reference, failures, a)) ==
        write_plan_csv(tune_case(records, reference, failures, b)));

  SeededRng c(42);
  CHECK(tune_case(records, reference, {}, c).changes.empty());

  CHECK_THROWS_AS(tune_case(records, bundled_reference(),
                            {{ParameterKind::LineCapacityMva, 230.0}}, c),
                  CannotTune);
}

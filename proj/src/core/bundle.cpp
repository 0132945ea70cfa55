#include "core/bundle.hpp"

#include <charconv>

#include <json.hpp>

#include "core/errors.hpp"
#include "core/textio.hpp"

namespace branchstat {

namespace {

using Json = nlohmann::ordered_json;

Json num(double v) { return to_decimal_string(v); }
Json num(std::size_t v) { return to_decimal_string(static_cast<std::uint64_t>(v)); }

double as_double(const Json& j, const char* what) {
  if (!j.is_string()) throw ParseError(std::string("bundle field ") + what + " is not a string");
  auto v = parse_double(j.get_ref<const std::string&>());
  if (!v) throw ParseError(std::string("bundle field ") + what + " is not a number");
  return *v;
}

std::size_t as_count(const Json& j, const char* what) {
  double v = as_double(j, what);
  if (v < 0) throw ParseError(std::string("bundle field ") + what + " is negative");
  return static_cast<std::size_t>(v);
}

Json fit_to_json(const DistFit& fit) {
  Json j;
  j["family"] = family_token(fit.family);
  Json params;
  switch (fit.family) {
    case DistFamily::Normal: {
      const auto& p = std::get<NormalParams>(fit.params);
      params["mu"] = num(p.mu);
      params["sigma"] = num(p.sigma);
      break;
    }
    case DistFamily::Exponential: {
      const auto& p = std::get<ExponentialParams>(fit.params);
      params["rate"] = num(p.rate);
      break;
    }
    case DistFamily::Gev: {
      const auto& p = std::get<GevParams>(fit.params);
      params["zeta"] = num(p.zeta);
      params["mu"] = num(p.mu);
      params["sigma"] = num(p.sigma);
      break;
    }
  }
  j["params"] = std::move(params);
  j["log_likelihood"] = num(fit.log_likelihood);
  j["kl_to_empirical"] = num(fit.kl_to_empirical);
  return j;
}

DistFit fit_from_json(const Json& j) {
  DistFit fit;
  auto family = parse_family_token(j.at("family").get<std::string>());
  if (!family) throw ParseError("bundle fit has unknown family");
  fit.family = *family;
  const Json& p = j.at("params");
  switch (fit.family) {
    case DistFamily::Normal:
      fit.params = NormalParams{as_double(p.at("mu"), "mu"), as_double(p.at("sigma"), "sigma")};
      break;
    case DistFamily::Exponential:
      fit.params = ExponentialParams{as_double(p.at("rate"), "rate")};
      break;
    case DistFamily::Gev:
      fit.params = GevParams{as_double(p.at("zeta"), "zeta"), as_double(p.at("mu"), "mu"),
                             as_double(p.at("sigma"), "sigma")};
      break;
  }
  fit.log_likelihood = as_double(j.at("log_likelihood"), "log_likelihood");
  fit.kl_to_empirical = as_double(j.at("kl_to_empirical"), "kl_to_empirical");
  return fit;
}

}  // namespace

std::string bundle_to_json(const AnalysisResult& analysis) {
  Json root;
  root["schema_version"] = kBundleSchemaVersion;
  root["case_name"] = analysis.case_name;

  const auto& s = analysis.settings;
  Json settings;
  settings["n_bins"] = num(s.n_bins);
  settings["fence_multiplier"] = num(s.fence_multiplier);
  settings["ratio_lo"] = num(s.ratio_lo);
  settings["ratio_hi"] = num(s.ratio_hi);
  settings["min_count"] = num(s.min_count);
  settings["seed"] = to_decimal_string(s.seed);
  settings["class_tolerance"] = num(s.class_tolerance);
  settings["b_threshold"] = num(s.b_threshold);
  settings["r2_threshold"] = num(s.r2_threshold);
  root["settings"] = std::move(settings);

  Json params = Json::array();
  for (const auto& pa : analysis.parameters) {
    Json jp;
    jp["parameter"] = std::string(parameter_token(pa.parameter));
    jp["display_name"] = std::string(parameter_display_name(pa.parameter));
    jp["no_data"] = pa.no_data();
    jp["value_count"] = num(pa.value_count);

    Json skips;
    skips["wrong_kind"] = num(pa.skips.wrong_kind);
    skips["missing_rating"] = num(pa.skips.missing_rating);
    skips["nonpositive_rating"] = num(pa.skips.nonpositive_rating);
    skips["missing_length"] = num(pa.skips.missing_length);
    skips["zero_resistance"] = num(pa.skips.zero_resistance);
    skips["negative_resistance"] = num(pa.skips.negative_resistance);
    skips["negative_reactance"] = num(pa.skips.negative_reactance);
    skips["estimated_length_used"] = num(pa.skips.estimated_length_used);
    jp["skips"] = std::move(skips);

    if (pa.dependence) {
      jp["dependence"] = *pa.dependence == DependenceClass::VoltageDependent
                             ? "voltage_dependent"
                             : "voltage_independent";
    } else {
      jp["dependence"] = nullptr;
    }
    if (pa.power_fit) {
      Json pf;
      pf["a"] = num(pa.power_fit->a);
      pf["b"] = num(pa.power_fit->b);
      pf["rmse"] = num(pa.power_fit->rmse);
      pf["r2"] = num(pa.power_fit->r2);
      jp["power_fit"] = std::move(pf);
    } else {
      jp["power_fit"] = nullptr;
    }
    if (pa.independent_range) {
      Json r;
      r["lo"] = num(pa.independent_range->first);
      r["hi"] = num(pa.independent_range->second);
      jp["independent_range"] = std::move(r);
    } else {
      jp["independent_range"] = nullptr;
    }
    jp["global_mean"] = pa.global_mean ? Json(num(*pa.global_mean)) : Json(nullptr);

    Json classes = Json::array();
    for (const auto& ca : pa.classes) {
      Json jc;
      jc["class_kv"] = num(ca.class_kv);
      Json sm;
      sm["n_raw"] = num(ca.sample.n_raw);
      sm["n_kept"] = num(ca.sample.n_kept);
      sm["n_removed"] = num(ca.sample.n_removed);
      sm["q1"] = num(ca.sample.q1);
      sm["q3"] = num(ca.sample.q3);
      sm["iqr"] = num(ca.sample.iqr);
      sm["fence_lo"] = num(ca.sample.fence_lo);
      sm["fence_hi"] = num(ca.sample.fence_hi);
      sm["min"] = num(ca.sample.min);
      sm["max"] = num(ca.sample.max);
      sm["mean"] = num(ca.sample.mean);
      jc["sample"] = std::move(sm);
      jc["degenerate"] = ca.degenerate;
      if (!ca.histogram.mass.empty()) {
        Json h;
        Json edges = Json::array();
        for (double e : ca.histogram.edges) edges.push_back(num(e));
        Json mass = Json::array();
        for (double m : ca.histogram.mass) mass.push_back(num(m));
        h["edges"] = std::move(edges);
        h["mass"] = std::move(mass);
        h["n"] = num(ca.histogram.n);
        jc["histogram"] = std::move(h);
      } else {
        jc["histogram"] = nullptr;
      }
      Json fits = Json::array();
      for (const auto& fit : ca.fits) fits.push_back(fit_to_json(fit));
      jc["fits"] = std::move(fits);
      classes.push_back(std::move(jc));
    }
    jp["classes"] = std::move(classes);

    Json warnings = Json::array();
    for (const auto& w : pa.warnings) warnings.push_back(w);
    jp["warnings"] = std::move(warnings);
    params.push_back(std::move(jp));
  }
  root["parameters"] = std::move(params);

  Json warnings = Json::array();
  for (const auto& w : analysis.warnings) warnings.push_back(w);
  root["warnings"] = std::move(warnings);
  return root.dump(2) + "\n";
}

AnalysisResult parse_bundle_json(const std::string& text) {
  Json root;
  try {
    root = Json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bundle is not valid JSON: ") + e.what());
  }
  try {
    if (root.at("schema_version").get<std::string>() != kBundleSchemaVersion) {
      throw ParseError("unsupported bundle schema_version");
    }
    AnalysisResult analysis;
    analysis.case_name = root.at("case_name").get<std::string>();

    const Json& s = root.at("settings");
    analysis.settings.n_bins = as_count(s.at("n_bins"), "n_bins");
    analysis.settings.fence_multiplier = as_double(s.at("fence_multiplier"), "fence_multiplier");
    analysis.settings.ratio_lo = as_double(s.at("ratio_lo"), "ratio_lo");
    analysis.settings.ratio_hi = as_double(s.at("ratio_hi"), "ratio_hi");
    analysis.settings.min_count = as_count(s.at("min_count"), "min_count");
    {
      const auto& seed_text = s.at("seed").get_ref<const std::string&>();
      std::uint64_t seed = 0;
      auto res = std::from_chars(seed_text.data(), seed_text.data() + seed_text.size(), seed);
      if (res.ec != std::errc() || res.ptr != seed_text.data() + seed_text.size()) {
        throw ParseError("bundle field seed is not an integer");
      }
      analysis.settings.seed = seed;
    }
    analysis.settings.class_tolerance = as_double(s.at("class_tolerance"), "class_tolerance");
    analysis.settings.b_threshold = as_double(s.at("b_threshold"), "b_threshold");
    analysis.settings.r2_threshold = as_double(s.at("r2_threshold"), "r2_threshold");

    for (const Json& jp : root.at("parameters")) {
      ParameterAnalysis pa;
      auto parameter = parse_parameter_token(jp.at("parameter").get<std::string>());
      if (!parameter) throw ParseError("bundle names an unknown parameter");
      pa.parameter = *parameter;
      pa.value_count = as_count(jp.at("value_count"), "value_count");

      const Json& sk = jp.at("skips");
      pa.skips.wrong_kind = as_count(sk.at("wrong_kind"), "wrong_kind");
      pa.skips.missing_rating = as_count(sk.at("missing_rating"), "missing_rating");
      pa.skips.nonpositive_rating = as_count(sk.at("nonpositive_rating"), "nonpositive_rating");
      pa.skips.missing_length = as_count(sk.at("missing_length"), "missing_length");
      pa.skips.zero_resistance = as_count(sk.at("zero_resistance"), "zero_resistance");
      pa.skips.negative_resistance = as_count(sk.at("negative_resistance"), "negative_resistance");
      pa.skips.negative_reactance = as_count(sk.at("negative_reactance"), "negative_reactance");
      pa.skips.estimated_length_used =
          as_count(sk.at("estimated_length_used"), "estimated_length_used");

      if (!jp.at("dependence").is_null()) {
        pa.dependence = jp.at("dependence").get<std::string>() == "voltage_dependent"
                            ? DependenceClass::VoltageDependent
                            : DependenceClass::VoltageIndependent;
      }
      if (!jp.at("power_fit").is_null()) {
        const Json& pf = jp.at("power_fit");
        PowerFit fit;
        fit.a = as_double(pf.at("a"), "a");
        fit.b = as_double(pf.at("b"), "b");
        fit.rmse = as_double(pf.at("rmse"), "rmse");
        fit.r2 = as_double(pf.at("r2"), "r2");
        pa.power_fit = fit;
      }
      if (!jp.at("independent_range").is_null()) {
        const Json& r = jp.at("independent_range");
        pa.independent_range =
            std::make_pair(as_double(r.at("lo"), "lo"), as_double(r.at("hi"), "hi"));
      }
      if (!jp.at("global_mean").is_null()) {
        pa.global_mean = as_double(jp.at("global_mean"), "global_mean");
      }

      for (const Json& jc : jp.at("classes")) {
        ClassAnalysis ca;
        ca.class_kv = as_double(jc.at("class_kv"), "class_kv");
        const Json& sm = jc.at("sample");
        ca.sample.n_raw = as_count(sm.at("n_raw"), "n_raw");
        ca.sample.n_kept = as_count(sm.at("n_kept"), "n_kept");
        ca.sample.n_removed = as_count(sm.at("n_removed"), "n_removed");
        ca.sample.q1 = as_double(sm.at("q1"), "q1");
        ca.sample.q3 = as_double(sm.at("q3"), "q3");
        ca.sample.iqr = as_double(sm.at("iqr"), "iqr");
        ca.sample.fence_lo = as_double(sm.at("fence_lo"), "fence_lo");
        ca.sample.fence_hi = as_double(sm.at("fence_hi"), "fence_hi");
        ca.sample.min = as_double(sm.at("min"), "min");
        ca.sample.max = as_double(sm.at("max"), "max");
        ca.sample.mean = as_double(sm.at("mean"), "mean");
        ca.degenerate = jc.at("degenerate").get<bool>();
        if (!jc.at("histogram").is_null()) {
          const Json& h = jc.at("histogram");
          for (const Json& e : h.at("edges")) ca.histogram.edges.push_back(as_double(e, "edge"));
          for (const Json& m : h.at("mass")) ca.histogram.mass.push_back(as_double(m, "mass"));
          ca.histogram.n = as_count(h.at("n"), "n");
        }
        for (const Json& jf : jc.at("fits")) ca.fits.push_back(fit_from_json(jf));
        pa.classes.push_back(std::move(ca));
      }
      for (const Json& w : jp.at("warnings")) pa.warnings.push_back(w.get<std::string>());
      analysis.parameters.push_back(std::move(pa));
    }
    for (const Json& w : root.at("warnings")) analysis.warnings.push_back(w.get<std::string>());
    return analysis;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bundle schema error: ") + e.what());
  }
}

void write_stats_bundle(const AnalysisResult& analysis, const std::string& path) {
  write_text_file(path, bundle_to_json(analysis));
}

AnalysisResult load_stats_bundle(const std::string& path) {
  return parse_bundle_json(read_text_file(path));
}

ReferenceStats load_reference_bundle(const std::string& path) {
  return reference_from_analysis(load_stats_bundle(path));
}

std::string render_bundle_markdown(const AnalysisResult& analysis) {
  const auto& s = analysis.settings;
  std::string out = "# Branch statistics: " + analysis.case_name + "\n\n";
  out += "Settings: bins " + std::to_string(s.n_bins) + ", fence multiplier " +
         to_decimal_string(s.fence_multiplier) + ", min count " + std::to_string(s.min_count) +
         ", seed " + to_decimal_string(s.seed) + "\n\n";
  out += power_fit_table(analysis);
  for (const auto& pa : analysis.parameters) {
    out += "\n## " + std::string(parameter_display_name(pa.parameter)) + "\n\n";
    if (pa.no_data()) {
      out += "No data (skips: " + pa.skips.summary() + ").\n";
      continue;
    }
    out += std::to_string(pa.value_count) + " values; skips: " + pa.skips.summary() + "\n\n";
    if (!pa.classes.empty()) {
      out += "| class kV | n raw | n kept | mean | best fit | KL (nats) |\n";
      out += "| --- | --- | --- | --- | --- | --- |\n";
      for (const auto& ca : pa.classes) {
        out += "| " + to_decimal_string(ca.class_kv) + " | " + std::to_string(ca.sample.n_raw) +
               " | " + std::to_string(ca.sample.n_kept) + " | " +
               to_decimal_string(ca.sample.mean) + " | ";
        if (!ca.fits.empty()) {
          out += family_token(ca.fits.front().family) + " | " +
                 to_decimal_string(ca.fits.front().kl_to_empirical);
        } else {
          out += "- | -";
        }
        out += " |\n";
      }
    }
    for (const auto& w : pa.warnings) out += "\n- warning: " + w;
    if (!pa.warnings.empty()) out += "\n";
  }
  return out;
}

}  // namespace branchstat

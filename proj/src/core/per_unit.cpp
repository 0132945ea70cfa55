#include "core/per_unit.hpp"

#include <cmath>

#include "core/errors.hpp"

namespace branchstat {

std::string SkipReport::summary() const {
  std::string s;
  auto add = [&s](const char* name, std::size_t n) {
    if (n == 0) return;
    if (!s.empty()) s += ", ";
    s += name;
    s += "=" + std::to_string(n);
  };
  add("wrong_kind", wrong_kind);
  add("missing_rating", missing_rating);
  add("nonpositive_rating", nonpositive_rating);
  add("missing_length", missing_length);
  add("zero_resistance", zero_resistance);
  add("negative_resistance", negative_resistance);
  add("negative_reactance", negative_reactance);
  add("estimated_length_used", estimated_length_used);
  return s.empty() ? "none" : s;
}

double convert_pu(double z_given, const BaseQuantities& given, const BaseQuantities& new_base) {
  if (!given.valid() || !new_base.valid()) {
    throw InvalidInput("per-unit conversion requires positive finite bases");
  }
  double v_ratio = given.v_base_kv / new_base.v_base_kv;
  return z_given * v_ratio * v_ratio * (new_base.s_base_mva / given.s_base_mva);
}

std::optional<double> to_own_base_x(const BranchRecord& rec) {
  if (rec.kind != BranchKind::Transformer) {
    throw InvalidInput("own-base reactance is defined for transformers");
  }
  if (!rec.rating_mva) return std::nullopt;
  if (*rec.rating_mva <= 0.0) throw InvalidInput("transformer rating must be positive");
  // Voltage bases equal the nominal terminal voltages on both sides of the
  // conversion, so only the power-base ratio remains.
  return rec.x_pu * (*rec.rating_mva / rec.system_base.s_base_mva);
}

std::optional<double> distributed_reactance(const BranchRecord& rec) {
  if (rec.kind != BranchKind::Line) {
    throw InvalidInput("distributed reactance is defined for lines");
  }
  if (!rec.length_km || *rec.length_km <= 0.0) return std::nullopt;
  double v = rec.system_base.v_base_kv;
  return rec.x_pu * v * v / (*rec.length_km * rec.system_base.s_base_mva);
}

std::optional<double> x_over_r(const BranchRecord& rec) {
  if (rec.r_pu < 0.0) throw InvalidInput("negative resistance");
  if (rec.r_pu == 0.0) return std::nullopt;
  return rec.x_pu / rec.r_pu;
}

ExtractResult extract_parameter(const std::vector<BranchRecord>& records, ParameterKind parameter,
                                double class_tolerance) {
  ExtractResult out;
  BranchKind wanted =
      parameter_is_transformer(parameter) ? BranchKind::Transformer : BranchKind::Line;

  for (const auto& rec : records) {
    if (rec.kind != wanted) {
      ++out.skips.wrong_kind;
      continue;
    }
    if (rec.x_pu < 0.0) {
      ++out.skips.negative_reactance;
      continue;
    }

    std::optional<double> value;
    switch (parameter) {
      case ParameterKind::XfmrXpuOwnBase:
        if (!rec.rating_mva) {
          ++out.skips.missing_rating;
        } else if (*rec.rating_mva <= 0.0) {
          ++out.skips.nonpositive_rating;
        } else {
          value = rec.x_pu * (*rec.rating_mva / rec.system_base.s_base_mva);
        }
        break;
      case ParameterKind::LineXOhmPerKm:
        if (!rec.length_km || *rec.length_km <= 0.0) {
          ++out.skips.missing_length;
        } else {
          value = distributed_reactance(rec);
          if (rec.length_estimated) ++out.skips.estimated_length_used;
        }
        break;
      case ParameterKind::XfmrCapacityMva:
      case ParameterKind::LineCapacityMva:
        if (!rec.rating_mva) {
          ++out.skips.missing_rating;
        } else if (*rec.rating_mva <= 0.0) {
          ++out.skips.nonpositive_rating;
        } else {
          value = *rec.rating_mva;
        }
        break;
      case ParameterKind::XfmrXOverR:
      case ParameterKind::LineXOverR:
        if (rec.r_pu < 0.0) {
          ++out.skips.negative_resistance;
        } else if (rec.r_pu == 0.0) {
          ++out.skips.zero_resistance;
        } else {
          value = rec.x_pu / rec.r_pu;
        }
        break;
      case ParameterKind::LineLengthKm:
        if (!rec.length_km || *rec.length_km <= 0.0) {
          ++out.skips.missing_length;
        } else {
          value = *rec.length_km;
          if (rec.length_estimated) ++out.skips.estimated_length_used;
        }
        break;
    }
    if (!value || !std::isfinite(*value)) continue;
    out.values.push_back(ParamValue{rec.id, parameter, *value,
                                    branch_voltage_class(rec, class_tolerance)});
  }
  return out;
}

}  // namespace branchstat

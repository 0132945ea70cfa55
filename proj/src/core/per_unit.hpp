#pragma once

// Per-unit base conversion and the per-branch derivations behind the seven
// studied parameters: own-rating reactance, distributed reactance, X/R,
// capacities and lengths.

#include <optional>
#include <string>
#include <vector>

#include "core/grid_model.hpp"

namespace branchstat {

// One extracted scalar, tagged with the branch's voltage class.
struct ParamValue {
  std::string branch_id;
  ParameterKind parameter;
  double value = 0.0;
  VoltageClass voltage_class = VoltageClass::other(0.0);
};

// Why eligible records were left out of a parameter population.
struct SkipReport {
  std::size_t wrong_kind = 0;
  std::size_t missing_rating = 0;
  std::size_t nonpositive_rating = 0;
  std::size_t missing_length = 0;
  std::size_t zero_resistance = 0;
  std::size_t negative_resistance = 0;
  std::size_t negative_reactance = 0;
  std::size_t estimated_length_used = 0;  // informational, not a skip

  std::size_t total_skipped() const {
    return missing_rating + nonpositive_rating + missing_length + zero_resistance +
           negative_resistance + negative_reactance;
  }
  std::string summary() const;
};

// Z_new = Z_given * (V_given/V_new)^2 * (S_new/S_given). Throws InvalidInput
// on non-positive bases.
double convert_pu(double z_given, const BaseQuantities& given, const BaseQuantities& new_base);

// Transformer reactance re-based onto the equipment's own MVA rating, with
// voltage bases pinned to the nominal terminal voltages (so only the power
// ratio remains). nullopt when the record carries no rating.
std::optional<double> to_own_base_x(const BranchRecord& rec);

// Line series reactance per km: X_pu * V_B^2 / (l * S_B). nullopt when the
// record has no usable length.
std::optional<double> distributed_reactance(const BranchRecord& rec);

// x_pu / r_pu; base-invariant. nullopt for r_pu == 0 (lossless model);
// InvalidInput for r_pu < 0.
std::optional<double> x_over_r(const BranchRecord& rec);

struct ExtractResult {
  std::vector<ParamValue> values;
  SkipReport skips;
};

// Applies the derivation for `parameter` to every eligible record and tags
// values with their voltage class. Ineligible records are counted per skip
// reason; branches with negative series reactance (series capacitors) are
// excluded from every population.
ExtractResult extract_parameter(const std::vector<BranchRecord>& records, ParameterKind parameter,
                                double class_tolerance = kDefaultClassTolerance);

}  // namespace branchstat

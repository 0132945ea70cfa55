#pragma once

// Deterministic inverse-CDF samplers for the three fitted families and the
// tuning procedure that reassigns out-of-envelope parameters from the
// reference distributions pinned to the reference curve mean.

#include <cstdint>
#include <string>
#include <vector>

#include "core/grid_model.hpp"
#include "core/reference.hpp"
#include "core/stats.hpp"

namespace branchstat {

// SplitMix64 stream (Steele, Lea & Flood 2014). Fully specified, so identical
// seeds give identical variates on every platform. Reference vector for seed
// 1, first outputs of next_u64():
//   0x910a2dec89025cc1, 0xbeeb8da1658eec67, 0xf893a2eefb32555e,
//   0x71c18690ee42c90b, 0x71bb54d8d101b5b9
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  // Uniform variate in the open interval (0, 1): ((x >> 11) + 0.5) * 2^-53.
  double next_uniform();

  // Independent substream: the child seed is the SplitMix64 scramble of
  // state ^ (golden-ratio increment * (stream_id + 1)). Deterministic and
  // collision-resistant for the stream ids used here.
  SeededRng split(std::uint64_t stream_id) const;

 private:
  std::uint64_t state_;
};

// Standard normal quantile: Acklam's rational approximation polished with one
// Halley step against erfc, |error| well below 1e-8 on (0, 1).
double normal_quantile(double p);

// Gamma function via the g=7, 9-term Lanczos approximation (relative error
// below 1e-10 on the real axis away from the poles).
double gamma_function(double x);

// Analytic GEV mean mu + sigma*(Gamma(1-zeta)-1)/zeta; requires zeta < 1.
double gev_mean(const GevParams& p);

std::vector<double> sample_normal(const NormalParams& p, SeededRng& rng, std::size_t n);
// x = -ln(1-u)/rate; outputs are >= 0.
std::vector<double> sample_exponential(const ExponentialParams& p, SeededRng& rng, std::size_t n);
// x = mu + sigma*((-ln u)^(-zeta) - 1)/zeta, the inverse of gev_cdf.
std::vector<double> sample_gev(const GevParams& p, SeededRng& rng, std::size_t n);

double sample_one(const DistFit& fit, SeededRng& rng);

// Shifts/scales the fit so its analytic mean equals target_mean, preserving
// the shape: Normal keeps sigma, Exponential re-rates, GEV keeps zeta and
// sigma and moves mu. GEV with zeta >= 1 has no finite mean -> Error.
DistFit pin_mean(DistFit fit, double target_mean);

struct TuningChange {
  std::string branch_id;
  ParameterKind parameter = ParameterKind::XfmrXpuOwnBase;
  double old_value = 0.0;
  double new_value = 0.0;
  double class_kv = 0.0;
  std::string source_desc;  // distribution the new value was drawn from
};

struct TuningPlan {
  std::vector<TuningChange> changes;
};

struct FailureKey {
  ParameterKind parameter = ParameterKind::XfmrXpuOwnBase;
  double class_kv = 0.0;
};

// For each failing (parameter, class): pins the reference class fit to the
// reference target mean (power curve at the class kV, or the independent
// range midpoint) and draws a fresh positive value for every branch in that
// population. Input records are not mutated; apply_plan does that. Throws
// CannotTune when the reference lacks a usable curve/range or class fit.
TuningPlan tune_case(const std::vector<BranchRecord>& records, const ReferenceStats& reference,
                     const std::vector<FailureKey>& failures, const SeededRng& rng,
                     double class_tolerance = kDefaultClassTolerance);

// Applies a plan, translating each parameter value back to the record fields
// (ratings, x_pu via the base/length relations, r_pu via X/R, lengths).
// Changes are applied in ParameterKind declaration order.
std::vector<BranchRecord> apply_plan(std::vector<BranchRecord> records, const TuningPlan& plan);

// CSV with header branch_id,parameter,old,new,class_kv.
std::string write_plan_csv(const TuningPlan& plan);

}  // namespace branchstat

#include "core/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <unordered_map>

#include "core/errors.hpp"
#include "core/per_unit.hpp"
#include "core/textio.hpp"

namespace branchstat {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t splitmix_scramble(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t SeededRng::next_u64() {
  state_ += kGolden;
  return splitmix_scramble(state_);
}

double SeededRng::next_uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
}

SeededRng SeededRng::split(std::uint64_t stream_id) const {
  return SeededRng(splitmix_scramble(state_ ^ (kGolden * (stream_id + 1))));
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw InvalidInput("normal quantile requires p in (0, 1)");

  // Acklam (2003) rational approximation coefficients.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    double q = p - 0.5;
    double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // One Halley step against the exact CDF.
  double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
  double u = e * std::sqrt(2.0 * kPi) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

double gamma_function(double x) {
  // Lanczos, g = 7, 9 terms.
  static const double coef[] = {0.99999999999980993,  676.5203681218851,   -1259.1392167224028,
                                771.32342877765313,   -176.61502916214059, 12.507343278686905,
                                -0.13857109526572012, 9.9843695780195716e-6,
                                1.5056327351493116e-7};
  if (x < 0.5) {
    double s = std::sin(kPi * x);
    if (s == 0.0) throw InvalidInput("gamma function pole");
    return kPi / (s * gamma_function(1.0 - x));
  }
  x -= 1.0;
  double acc = coef[0];
  for (int i = 1; i < 9; ++i) acc += coef[i] / (x + static_cast<double>(i));
  double t = x + 7.5;
  return std::sqrt(2.0 * kPi) * std::pow(t, x + 0.5) * std::exp(-t) * acc;
}

double gev_mean(const GevParams& p) {
  if (p.zeta >= 1.0) throw Error("GEV with shape >= 1 has no finite mean");
  return p.mu + p.sigma * (gamma_function(1.0 - p.zeta) - 1.0) / p.zeta;
}

std::vector<double> sample_normal(const NormalParams& p, SeededRng& rng, std::size_t n) {
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(p.mu + p.sigma * normal_quantile(rng.next_uniform()));
  }
  return out;
}

std::vector<double> sample_exponential(const ExponentialParams& p, SeededRng& rng,
                                       std::size_t n) {
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(-std::log(1.0 - rng.next_uniform()) / p.rate);
  }
  return out;
}

std::vector<double> sample_gev(const GevParams& p, SeededRng& rng, std::size_t n) {
  std::vector<double> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    double u = rng.next_uniform();
    out.push_back(p.mu + p.sigma * (std::pow(-std::log(u), -p.zeta) - 1.0) / p.zeta);
  }
  return out;
}

double sample_one(const DistFit& fit, SeededRng& rng) {
  switch (fit.family) {
    case DistFamily::Normal: {
      const auto& p = std::get<NormalParams>(fit.params);
      return p.mu + p.sigma * normal_quantile(rng.next_uniform());
    }
    case DistFamily::Exponential: {
      const auto& p = std::get<ExponentialParams>(fit.params);
      return -std::log(1.0 - rng.next_uniform()) / p.rate;
    }
    case DistFamily::Gev: {
      const auto& p = std::get<GevParams>(fit.params);
      double u = rng.next_uniform();
      return p.mu + p.sigma * (std::pow(-std::log(u), -p.zeta) - 1.0) / p.zeta;
    }
  }
  throw Error("unknown distribution family");
}

DistFit pin_mean(DistFit fit, double target_mean) {
  switch (fit.family) {
    case DistFamily::Normal: {
      auto p = std::get<NormalParams>(fit.params);
      p.mu = target_mean;
      fit.params = p;
      break;
    }
    case DistFamily::Exponential: {
      if (target_mean <= 0.0) throw InvalidInput("exponential mean must be positive");
      fit.params = ExponentialParams{1.0 / target_mean};
      break;
    }
    case DistFamily::Gev: {
      auto p = std::get<GevParams>(fit.params);
      if (p.zeta >= 1.0) throw Error("cannot pin mean: GEV shape >= 1 has no finite mean");
      p.mu = target_mean - p.sigma * (gamma_function(1.0 - p.zeta) - 1.0) / p.zeta;
      fit.params = p;
      break;
    }
  }
  return fit;
}

namespace {

std::string describe_fit(const DistFit& fit) {
  switch (fit.family) {
    case DistFamily::Normal: {
      const auto& p = std::get<NormalParams>(fit.params);
      return "normal(mu=" + to_decimal_string(p.mu) + " sigma=" + to_decimal_string(p.sigma) + ")";
    }
    case DistFamily::Exponential: {
      const auto& p = std::get<ExponentialParams>(fit.params);
      return "exponential(rate=" + to_decimal_string(p.rate) + ")";
    }
    case DistFamily::Gev: {
      const auto& p = std::get<GevParams>(fit.params);
      return "gev(zeta=" + to_decimal_string(p.zeta) + " mu=" + to_decimal_string(p.mu) +
             " sigma=" + to_decimal_string(p.sigma) + ")";
    }
  }
  return "unknown";
}

std::uint64_t failure_stream_id(ParameterKind p, double class_kv) {
  auto param_index =
      static_cast<std::uint64_t>(std::find(kAllParameters.begin(), kAllParameters.end(), p) -
                                 kAllParameters.begin());
  return (param_index << 20) + static_cast<std::uint64_t>(std::llround(class_kv * 100.0));
}

}  // namespace

TuningPlan tune_case(const std::vector<BranchRecord>& records, const ReferenceStats& reference,
                     const std::vector<FailureKey>& failures, const SeededRng& rng,
                     double class_tolerance) {
  TuningPlan plan;
  for (const auto& failure : failures) {
    const auto& rp = reference.parameter(failure.parameter);
    std::string pname(parameter_token(failure.parameter));
    if (rp.placeholder) {
      throw CannotTune("reference for " + pname + " is a placeholder; run analyze on a trusted case");
    }

    double target = 0.0;
    if (rp.dependence == DependenceClass::VoltageDependent) {
      if (!rp.power_curve || !rp.power_curve->usable()) {
        throw CannotTune("reference for " + pname + " has no usable power curve");
      }
      target = rp.power_curve->evaluate(failure.class_kv);
    } else {
      if (!rp.independent_range) {
        throw CannotTune("reference for " + pname + " has no admissible range");
      }
      target = (rp.independent_range->first + rp.independent_range->second) / 2.0;
    }

    const ReferenceClassEntry* entry = rp.find_class(failure.class_kv);
    if (!entry || !entry->fit) {
      throw CannotTune("reference for " + pname + " has no distribution fit at " +
                       to_decimal_string(failure.class_kv) + " kV");
    }
    DistFit pinned = pin_mean(*entry->fit, target);
    std::string desc = describe_fit(pinned) + " pinned to mean " + to_decimal_string(target) +
                       " at " + to_decimal_string(failure.class_kv) + " kV";

    SeededRng stream = rng.split(failure_stream_id(failure.parameter, failure.class_kv));
    auto extracted = extract_parameter(records, failure.parameter, class_tolerance);
    for (const auto& value : extracted.values) {
      if (!value.voltage_class.is_canonical() ||
          value.voltage_class.nominal_kv() != failure.class_kv) {
        continue;
      }
      double fresh = 0.0;
      bool ok = false;
      for (int attempt = 0; attempt < 100; ++attempt) {
        fresh = sample_one(pinned, stream);
        if (std::isfinite(fresh) && fresh > 0.0) {
          ok = true;
          break;
        }
      }
      if (!ok) {
        throw Error("resampling exhausted for " + pname + " on branch " + value.branch_id);
      }
      plan.changes.push_back(TuningChange{value.branch_id, failure.parameter, value.value, fresh,
                                          failure.class_kv, desc});
    }
  }
  return plan;
}

std::vector<BranchRecord> apply_plan(std::vector<BranchRecord> records, const TuningPlan& plan) {
  std::unordered_map<std::string, std::size_t> index;
  index.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) index.emplace(records[i].id, i);

  auto apply_one = [&](const TuningChange& change) {
    auto it = index.find(change.branch_id);
    if (it == index.end()) throw InvalidInput("plan references unknown branch " + change.branch_id);
    BranchRecord& rec = records[it->second];
    double v = change.new_value;
    switch (change.parameter) {
      case ParameterKind::XfmrCapacityMva:
      case ParameterKind::LineCapacityMva:
        rec.rating_mva = v;
        break;
      case ParameterKind::XfmrXpuOwnBase:
        if (!rec.rating_mva || *rec.rating_mva <= 0.0) {
          throw InvalidInput("cannot apply own-base reactance without a rating: " + rec.id);
        }
        rec.x_pu = v * rec.system_base.s_base_mva / *rec.rating_mva;
        break;
      case ParameterKind::LineXOhmPerKm: {
        if (!rec.length_km || *rec.length_km <= 0.0) {
          throw InvalidInput("cannot apply ohm/km without a length: " + rec.id);
        }
        double vb = rec.system_base.v_base_kv;
        rec.x_pu = v * *rec.length_km * rec.system_base.s_base_mva / (vb * vb);
        break;
      }
      case ParameterKind::XfmrXOverR:
      case ParameterKind::LineXOverR:
        if (v <= 0.0) throw InvalidInput("X/R must be positive");
        rec.r_pu = rec.x_pu / v;
        break;
      case ParameterKind::LineLengthKm:
        rec.length_km = v;
        rec.length_estimated = false;
        break;
    }
  };

  // Dependency order: capacities and lengths first (reactance derivations read
  // them), then reactances, then the ratios that read x_pu.
  const ParameterKind order[] = {ParameterKind::XfmrCapacityMva, ParameterKind::LineCapacityMva,
                                 ParameterKind::LineLengthKm,    ParameterKind::XfmrXpuOwnBase,
                                 ParameterKind::LineXOhmPerKm,   ParameterKind::XfmrXOverR,
                                 ParameterKind::LineXOverR};
  for (ParameterKind stage : order) {
    for (const auto& change : plan.changes) {
      if (change.parameter == stage) apply_one(change);
    }
  }
  return records;
}

std::string write_plan_csv(const TuningPlan& plan) {
  std::string out = "branch_id,parameter,old,new,class_kv\n";
  for (const auto& c : plan.changes) {
    out += c.branch_id;
    out += ',';
    out += parameter_token(c.parameter);
    out += ',';
    out += to_decimal_string(c.old_value);
    out += ',';
    out += to_decimal_string(c.new_value);
    out += ',';
    out += to_decimal_string(c.class_kv);
    out += '\n';
  }
  return out;
}

}  // namespace branchstat

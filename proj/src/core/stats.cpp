#include "core/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "core/errors.hpp"

namespace branchstat {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEulerGamma = 0.5772;  // Gumbel moment-matching constant

double sample_mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sample_std_mle(const std::vector<double>& v, double mean) {
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

}  // namespace

double CleanSample::mean() const {
  if (values.empty()) throw InvalidInput("mean of an empty sample");
  return sample_mean(values);
}

double interpolated_quantile(const std::vector<double>& sorted, double q) {
  if (sorted.empty()) throw InvalidInput("quantile of an empty sample");
  double pos = q * static_cast<double>(sorted.size() - 1);
  auto lo = static_cast<std::size_t>(std::floor(pos));
  auto hi = static_cast<std::size_t>(std::ceil(pos));
  double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

CleanSample remove_extreme_outliers(std::vector<double> values, double fence_multiplier) {
  if (fence_multiplier <= 0.0 || !std::isfinite(fence_multiplier)) {
    throw InvalidInput("fence multiplier must be positive");
  }
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidInput("outlier removal requires finite values");
  }
  if (values.size() < 4) {
    throw InsufficientData("outlier removal needs at least 4 values, got " +
                           std::to_string(values.size()));
  }
  std::sort(values.begin(), values.end());

  CleanSample out;
  out.q1 = interpolated_quantile(values, 0.25);
  out.q3 = interpolated_quantile(values, 0.75);
  out.iqr = out.q3 - out.q1;
  out.fence_lo = out.q1 - fence_multiplier * out.iqr;
  out.fence_hi = out.q3 + fence_multiplier * out.iqr;
  for (double v : values) {
    if (v < out.fence_lo || v > out.fence_hi) {
      out.removed_outliers.push_back(v);
    } else {
      out.values.push_back(v);
    }
  }
  return out;
}

Histogram build_histogram(const CleanSample& sample, std::size_t n_bins) {
  if (n_bins < 2) throw InvalidInput("histogram needs at least 2 bins");
  if (sample.values.size() < 2) throw InsufficientData("histogram needs at least 2 values");
  double lo = sample.values.front();
  double hi = sample.values.back();
  if (lo == hi) throw InvalidInput("degenerate sample: all values identical");

  Histogram h;
  h.n = sample.values.size();
  h.edges.resize(n_bins + 1);
  double width = (hi - lo) / static_cast<double>(n_bins);
  for (std::size_t i = 0; i <= n_bins; ++i) {
    h.edges[i] = lo + width * static_cast<double>(i);
  }
  h.edges.back() = hi;  // guard against rounding drift

  std::vector<std::size_t> counts(n_bins, 0);
  for (double v : sample.values) {
    auto idx = static_cast<std::size_t>((v - lo) / width);
    if (idx >= n_bins) idx = n_bins - 1;  // top edge inclusive
    ++counts[idx];
  }
  h.mass.resize(n_bins);
  for (std::size_t i = 0; i < n_bins; ++i) {
    h.mass[i] = static_cast<double>(counts[i]) / static_cast<double>(h.n);
  }
  return h;
}

double kl_divergence(const Histogram& p, const std::vector<double>& q_mass) {
  if (q_mass.size() != p.mass.size()) {
    throw InvalidInput("KL divergence requires identical bin edges");
  }
  double q_total = std::accumulate(q_mass.begin(), q_mass.end(), 0.0);
  if (std::abs(q_total - 1.0) > 1e-9) {
    throw InvalidInput("model mass must sum to 1");
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < p.mass.size(); ++i) {
    double pi = p.mass[i];
    if (pi <= 0.0) continue;  // 0*ln 0 := 0
    if (q_mass[i] <= 0.0) throw InvalidInput("model mass is zero on a populated bin");
    kl += pi * std::log(pi / q_mass[i]);
  }
  return kl;
}

std::string family_token(DistFamily f) {
  switch (f) {
    case DistFamily::Normal: return "normal";
    case DistFamily::Exponential: return "exponential";
    case DistFamily::Gev: return "gev";
  }
  return "unknown";
}

std::optional<DistFamily> parse_family_token(const std::string& token) {
  if (token == "normal") return DistFamily::Normal;
  if (token == "exponential") return DistFamily::Exponential;
  if (token == "gev") return DistFamily::Gev;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Densities
// ---------------------------------------------------------------------------

double normal_pdf(double x, const NormalParams& p) {
  double z = (x - p.mu) / p.sigma;
  return std::exp(-0.5 * z * z) / (p.sigma * std::sqrt(2.0 * kPi));
}

double normal_cdf(double x, const NormalParams& p) {
  return 0.5 * std::erfc(-(x - p.mu) / (p.sigma * std::sqrt(2.0)));
}

double exponential_pdf(double x, const ExponentialParams& p) {
  return x < 0.0 ? 0.0 : p.rate * std::exp(-p.rate * x);
}

double exponential_cdf(double x, const ExponentialParams& p) {
  return x < 0.0 ? 0.0 : 1.0 - std::exp(-p.rate * x);
}

double gev_pdf(double x, const GevParams& p) {
  if (p.sigma <= 0.0) throw InvalidInput("GEV scale must be positive");
  double t = 1.0 + p.zeta * (x - p.mu) / p.sigma;
  if (t <= 0.0) return 0.0;
  double inv = -1.0 / p.zeta;
  double tpow = std::pow(t, inv);  // t^(-1/zeta)
  return (1.0 / p.sigma) * std::pow(t, inv - 1.0) * std::exp(-tpow);
}

double gev_cdf(double x, const GevParams& p) {
  if (p.sigma <= 0.0) throw InvalidInput("GEV scale must be positive");
  double t = 1.0 + p.zeta * (x - p.mu) / p.sigma;
  if (t <= 0.0) return p.zeta > 0.0 ? 0.0 : 1.0;
  return std::exp(-std::pow(t, -1.0 / p.zeta));
}

double dist_pdf(double x, const DistFit& fit) {
  switch (fit.family) {
    case DistFamily::Normal: return normal_pdf(x, std::get<NormalParams>(fit.params));
    case DistFamily::Exponential:
      return exponential_pdf(x, std::get<ExponentialParams>(fit.params));
    case DistFamily::Gev: return gev_pdf(x, std::get<GevParams>(fit.params));
  }
  return 0.0;
}

double dist_cdf(double x, const DistFit& fit) {
  switch (fit.family) {
    case DistFamily::Normal: return normal_cdf(x, std::get<NormalParams>(fit.params));
    case DistFamily::Exponential:
      return exponential_cdf(x, std::get<ExponentialParams>(fit.params));
    case DistFamily::Gev: return gev_cdf(x, std::get<GevParams>(fit.params));
  }
  return 0.0;
}

std::vector<double> model_mass(const DistFit& fit, const std::vector<double>& edges) {
  if (edges.size() < 2) throw InvalidInput("model mass needs at least one bin");
  std::size_t n_bins = edges.size() - 1;
  std::vector<double> q(n_bins);
  double total = 0.0;
  double prev = dist_cdf(edges.front(), fit);
  for (std::size_t i = 0; i < n_bins; ++i) {
    double next = dist_cdf(edges[i + 1], fit);
    q[i] = std::max(0.0, next - prev);
    total += q[i];
    prev = next;
  }
  if (total <= 0.0) throw FitFailed("fitted distribution has no mass on the histogram support");
  constexpr double eps = 1e-9;
  double denom = 1.0 + static_cast<double>(n_bins) * eps;
  for (double& qi : q) qi = (qi / total + eps) / denom;
  return q;
}

// ---------------------------------------------------------------------------
// Fitting
// ---------------------------------------------------------------------------

namespace {

double normal_log_likelihood(const std::vector<double>& v, const NormalParams& p) {
  double ll = 0.0;
  double inv2s2 = 1.0 / (2.0 * p.sigma * p.sigma);
  double log_norm = -std::log(p.sigma * std::sqrt(2.0 * kPi));
  for (double x : v) ll += log_norm - (x - p.mu) * (x - p.mu) * inv2s2;
  return ll;
}

double exponential_log_likelihood(const std::vector<double>& v, const ExponentialParams& p) {
  double sum = std::accumulate(v.begin(), v.end(), 0.0);
  return static_cast<double>(v.size()) * std::log(p.rate) - p.rate * sum;
}

// Negative GEV log-likelihood with a penalty outside the support (or for
// sigma <= 0), keeping the simplex away from infeasible triples.
double gev_negative_ll(const std::vector<double>& v, double zeta, double mu, double sigma) {
  if (sigma <= 0.0) return 1e15 * (1.0 - sigma);
  if (std::abs(zeta) < 1e-6) zeta = zeta < 0.0 ? -1e-6 : 1e-6;
  double nll = static_cast<double>(v.size()) * std::log(sigma);
  double worst = 0.0;
  for (double x : v) {
    double t = 1.0 + zeta * (x - mu) / sigma;
    if (t <= 1e-12) {
      worst = std::max(worst, 1e-12 - t);
      continue;
    }
    nll += (1.0 + 1.0 / zeta) * std::log(t) + std::pow(t, -1.0 / zeta);
  }
  if (worst > 0.0) return 1e12 * (1.0 + worst);
  return nll;
}

double gev_log_likelihood(const std::vector<double>& v, const GevParams& p) {
  return -gev_negative_ll(v, p.zeta, p.mu, p.sigma);
}

using Point3 = std::array<double, 3>;

// Standard Nelder-Mead on R^3 (reflection 1, expansion 2, contraction 0.5,
// shrink 0.5). Returns the best vertex.
Point3 nelder_mead(const std::function<double(const Point3&)>& f, Point3 start,
                   const Point3& step, std::size_t max_iter, double tol) {
  constexpr std::size_t n = 3;
  std::array<Point3, n + 1> simplex;
  std::array<double, n + 1> value;
  simplex[0] = start;
  for (std::size_t i = 0; i < n; ++i) {
    simplex[i + 1] = start;
    simplex[i + 1][i] += step[i];
  }
  for (std::size_t i = 0; i <= n; ++i) value[i] = f(simplex[i]);

  auto order = [&] {
    std::array<std::size_t, n + 1> idx{};
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
      return value[a] < value[b];
    });
    std::array<Point3, n + 1> s2;
    std::array<double, n + 1> v2;
    for (std::size_t i = 0; i <= n; ++i) {
      s2[i] = simplex[idx[i]];
      v2[i] = value[idx[i]];
    }
    simplex = s2;
    value = v2;
  };

  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    order();
    double spread = std::abs(value[n] - value[0]);
    double scale = std::abs(value[0]) + std::abs(value[n]) + 1e-30;
    if (spread / scale < tol) break;

    Point3 centroid{0, 0, 0};
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < 3; ++d) centroid[d] += simplex[i][d] / n;
    }
    auto blend = [&](double coef) {
      Point3 p;
      for (std::size_t d = 0; d < 3; ++d) {
        p[d] = centroid[d] + coef * (simplex[n][d] - centroid[d]);
      }
      return p;
    };

    Point3 reflected = blend(-1.0);
    double fr = f(reflected);
    if (fr < value[0]) {
      Point3 expanded = blend(-2.0);
      double fe = f(expanded);
      if (fe < fr) {
        simplex[n] = expanded;
        value[n] = fe;
      } else {
        simplex[n] = reflected;
        value[n] = fr;
      }
      continue;
    }
    if (fr < value[n - 1]) {
      simplex[n] = reflected;
      value[n] = fr;
      continue;
    }
    Point3 contracted = blend(fr < value[n] ? -0.5 : 0.5);
    double fc = f(contracted);
    if (fc < std::min(fr, value[n])) {
      simplex[n] = contracted;
      value[n] = fc;
      continue;
    }
    // shrink toward the best vertex
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t d = 0; d < 3; ++d) {
        simplex[i][d] = simplex[0][d] + 0.5 * (simplex[i][d] - simplex[0][d]);
      }
      value[i] = f(simplex[i]);
    }
  }
  order();
  return simplex[0];
}

DistFit finish_fit(DistFamily family, DistParams params, double ll, const CleanSample& sample,
                   std::size_t n_bins) {
  DistFit fit;
  fit.family = family;
  fit.params = std::move(params);
  fit.log_likelihood = ll;
  if (sample.values.front() == sample.values.back()) {
    // Constant sample: no histogram exists, so no divergence to report.
    fit.kl_to_empirical = 0.0;
    return fit;
  }
  Histogram h = build_histogram(sample, n_bins);
  fit.kl_to_empirical = kl_divergence(h, model_mass(fit, h.edges));
  return fit;
}

}  // namespace

DistFit fit_normal(const CleanSample& sample, std::size_t n_bins) {
  if (sample.values.size() < 2) throw InsufficientData("normal fit needs at least 2 values");
  NormalParams p;
  p.mu = sample.mean();
  p.sigma = sample_std_mle(sample.values, p.mu);
  if (p.sigma <= 0.0) throw InvalidInput("degenerate sample: all values identical");
  return finish_fit(DistFamily::Normal, p, normal_log_likelihood(sample.values, p), sample,
                    n_bins);
}

DistFit fit_exponential(const CleanSample& sample, std::size_t n_bins) {
  if (sample.values.empty()) throw InsufficientData("exponential fit needs values");
  for (double v : sample.values) {
    if (v < 0.0) throw InvalidInput("exponential fit requires nonnegative values");
  }
  double mean = sample.mean();
  if (mean <= 0.0) throw InvalidInput("exponential fit requires a positive mean");
  ExponentialParams p{1.0 / mean};
  return finish_fit(DistFamily::Exponential, p, exponential_log_likelihood(sample.values, p),
                    sample, n_bins);
}

DistFit fit_gev(const CleanSample& sample, std::size_t n_bins) {
  const auto& v = sample.values;
  if (v.size() < 20) {
    throw InsufficientData("GEV fit needs at least 20 values, got " + std::to_string(v.size()));
  }
  double mean = sample.mean();
  double sd = sample_std_mle(v, mean);
  if (sd <= 0.0) throw InvalidInput("degenerate sample: all values identical");

  double sigma0 = std::sqrt(6.0) * sd / kPi;
  double mu0 = mean - kEulerGamma * sigma0;

  auto objective = [&v](const Point3& p) { return gev_negative_ll(v, p[0], p[1], p[2]); };

  const double zeta_starts[] = {0.1, -0.1, 0.3, -0.3};
  std::optional<GevParams> best;
  double best_nll = std::numeric_limits<double>::infinity();
  for (double zeta0 : zeta_starts) {
    Point3 start{zeta0, mu0, sigma0};
    Point3 step{0.1, 0.1 * sigma0, 0.1 * sigma0};
    Point3 sol = nelder_mead(objective, start, step, 2000, 1e-12);
    double zeta = std::abs(sol[0]) < 1e-6 ? (sol[0] < 0.0 ? -1e-6 : 1e-6) : sol[0];
    GevParams p{zeta, sol[1], sol[2]};
    if (p.sigma <= 0.0) continue;
    bool feasible = true;
    for (double x : v) {
      if (1.0 + p.zeta * (x - p.mu) / p.sigma <= 0.0) {
        feasible = false;
        break;
      }
    }
    if (!feasible) continue;
    double nll = gev_negative_ll(v, p.zeta, p.mu, p.sigma);
    if (nll < best_nll) {
      best_nll = nll;
      best = p;
    }
  }
  if (!best) throw FitFailed("GEV fit failed: no feasible optimum from any restart");
  return finish_fit(DistFamily::Gev, *best, -best_nll, sample, n_bins);
}

std::vector<DistFit> best_fit(const CleanSample& sample, const std::set<DistFamily>& families,
                              std::size_t n_bins, std::vector<std::string>* warnings) {
  auto warn = [warnings](const std::string& msg) {
    if (warnings) warnings->push_back(msg);
  };
  bool has_negative = !sample.values.empty() && sample.values.front() < 0.0;

  std::vector<DistFit> fits;
  for (DistFamily family : families) {
    if (family == DistFamily::Exponential && has_negative) {
      warn("exponential family skipped: sample contains negative values");
      continue;
    }
    try {
      switch (family) {
        case DistFamily::Normal: fits.push_back(fit_normal(sample, n_bins)); break;
        case DistFamily::Exponential: fits.push_back(fit_exponential(sample, n_bins)); break;
        case DistFamily::Gev: fits.push_back(fit_gev(sample, n_bins)); break;
      }
    } catch (const Error& e) {
      warn(family_token(family) + " fit skipped: " + e.what());
    }
  }
  if (fits.empty()) throw FitFailed("no distribution family applicable to the sample");
  std::stable_sort(fits.begin(), fits.end(), [](const DistFit& a, const DistFit& b) {
    if (a.kl_to_empirical != b.kl_to_empirical) return a.kl_to_empirical < b.kl_to_empirical;
    return a.log_likelihood > b.log_likelihood;
  });
  return fits;
}

}  // namespace branchstat

#pragma once

// Sample cleaning, histograms, distribution fitting (Normal, Exponential,
// GEV) and KL-divergence ranking of the fits.

#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace branchstat {

// A sample with extreme outliers removed by the box-plot rule.
struct CleanSample {
  std::vector<double> values;            // sorted, within the fences
  std::vector<double> removed_outliers;  // sorted
  double q1 = 0.0;
  double q3 = 0.0;
  double iqr = 0.0;
  double fence_lo = 0.0;
  double fence_hi = 0.0;

  std::size_t size() const { return values.size(); }
  double mean() const;
};

// Order statistic at position q*(n-1), linearly interpolated. `sorted` must be
// ascending and non-empty.
double interpolated_quantile(const std::vector<double>& sorted, double q);

// Removes values outside [q1 - m*iqr, q3 + m*iqr] (extreme outliers at the
// conventional m = 3). Requires >= 4 finite values.
CleanSample remove_extreme_outliers(std::vector<double> values, double fence_multiplier = 3.0);

struct Histogram {
  std::vector<double> edges;  // n_bins + 1, strictly increasing
  std::vector<double> mass;   // sums to 1
  std::size_t n = 0;          // sample count

  std::size_t bins() const { return mass.size(); }
};

// Equal-width bins over [min, max]; the top edge is inclusive. Requires at
// least two distinct values and n_bins >= 2.
Histogram build_histogram(const CleanSample& sample, std::size_t n_bins = 50);

// D_KL(P||Q) = sum_i p_i ln(p_i/q_i) in nats, over bins with p_i > 0.
// q_mass must live on p's edges, sum to 1 (within 1e-9) and be positive
// wherever p is.
double kl_divergence(const Histogram& p, const std::vector<double>& q_mass);

enum class DistFamily { Normal, Exponential, Gev };

std::string family_token(DistFamily f);
std::optional<DistFamily> parse_family_token(const std::string& token);

struct NormalParams {
  double mu = 0.0;
  double sigma = 1.0;  // > 0
  friend bool operator==(const NormalParams&, const NormalParams&) = default;
};

struct ExponentialParams {
  double rate = 1.0;  // > 0
  friend bool operator==(const ExponentialParams&, const ExponentialParams&) = default;
};

struct GevParams {
  double zeta = 0.1;  // shape, != 0
  double mu = 0.0;    // location
  double sigma = 1.0; // scale, > 0
  friend bool operator==(const GevParams&, const GevParams&) = default;
};

using DistParams = std::variant<NormalParams, ExponentialParams, GevParams>;

struct DistFit {
  DistFamily family = DistFamily::Normal;
  DistParams params;
  double log_likelihood = 0.0;  // nats, at the fitted parameters
  double kl_to_empirical = 0.0; // nats, vs the empirical histogram
};

double normal_pdf(double x, const NormalParams& p);
double normal_cdf(double x, const NormalParams& p);
double exponential_pdf(double x, const ExponentialParams& p);
double exponential_cdf(double x, const ExponentialParams& p);
double gev_pdf(double x, const GevParams& p);
// exp(-(1 + zeta*(x-mu)/sigma)^(-1/zeta)); 0 or 1 outside the support per the
// sign of zeta. Throws InvalidInput for sigma <= 0.
double gev_cdf(double x, const GevParams& p);

double dist_pdf(double x, const DistFit& fit);
double dist_cdf(double x, const DistFit& fit);

// Model probability mass per histogram bin: the fitted CDF differenced over
// the edges, renormalized over the histogram support, then smoothed with
// q <- (q + eps)/(1 + n_bins*eps), eps = 1e-9, so Q > 0 wherever P > 0.
std::vector<double> model_mass(const DistFit& fit, const std::vector<double>& edges);

// Gaussian MLE (sigma divides by n); KL measured against the sample's
// n_bins-bin histogram.
DistFit fit_normal(const CleanSample& sample, std::size_t n_bins = 50);

// Exponential MLE on support [0, inf): rate = 1/mean. Throws InvalidInput if
// any value is negative.
DistFit fit_exponential(const CleanSample& sample, std::size_t n_bins = 50);

// GEV maximum likelihood by Nelder-Mead simplex over (zeta, mu, sigma) with
// the support constraint enforced via penalty. Gumbel moment-matching start:
// sigma0 = sqrt(6)*std/pi, mu0 = mean - 0.5772*sigma0, zeta0 = 0.1. Requires
// >= 20 values; throws FitFailed when no restart reaches feasibility.
DistFit fit_gev(const CleanSample& sample, std::size_t n_bins = 50);

inline const std::set<DistFamily> kAllFamilies = {DistFamily::Normal, DistFamily::Exponential,
                                                  DistFamily::Gev};

// Fits every applicable family and ranks ascending by KL divergence (ties:
// higher log-likelihood). Exponential is skipped when negatives are present;
// families whose fit fails are dropped with a warning. Throws FitFailed when
// nothing is applicable.
std::vector<DistFit> best_fit(const CleanSample& sample,
                              const std::set<DistFamily>& families = kAllFamilies,
                              std::size_t n_bins = 50,
                              std::vector<std::string>* warnings = nullptr);

}  // namespace branchstat

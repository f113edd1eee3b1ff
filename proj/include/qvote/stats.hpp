#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace qvote::stats {

// Survival function of the chi-square distribution (regularized upper
// incomplete gamma Q(df/2, x/2)).
double chi2_sf(double x, double df);

struct ChiSquareResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int df = 0;
};

// Goodness of fit of observed counts against expected probabilities.
// Sizes must match; expected probabilities must sum to ~1.
ChiSquareResult chi_square_gof(const std::vector<std::uint64_t>& observed,
                               const std::vector<double>& expected_probs);

// Homogeneity test for an r x c contingency table (rows: groups).
// All-zero rows and columns are excluded from the statistic and df.
ChiSquareResult chi_square_homogeneity(const std::vector<std::vector<std::uint64_t>>& table);

struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

// Wilson score interval for a binomial proportion at z standard deviations.
Interval wilson_interval(std::uint64_t successes, std::uint64_t n, double z);

// Plug-in mutual information (bits) of paired categorical samples.
double plugin_mutual_information(const std::vector<std::pair<int, int>>& samples);

struct MiEstimate {
  double mi_bits = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  int bootstrap_resamples = 0;
};

// Plug-in MI with a percentile bootstrap confidence interval.
MiEstimate mutual_information_bootstrap(const std::vector<std::pair<int, int>>& samples,
                                        int resamples, std::uint64_t seed,
                                        double ci_level = 0.95);

// Exact MI (bits) of an explicit joint distribution (rows: X, cols: Y).
double mutual_information_exact(const std::vector<std::vector<double>>& joint);

}  // namespace qvote::stats

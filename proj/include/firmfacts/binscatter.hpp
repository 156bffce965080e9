#ifndef FIRMFACTS_BINSCATTER_HPP
#define FIRMFACTS_BINSCATTER_HPP

#include <array>
#include <vector>

#include "firmfacts/stats.hpp"

namespace firmfacts {

inline constexpr std::array<double, 7> kBinPercentiles{0.01, 0.10, 0.25, 0.50, 0.75, 0.90, 0.99};

struct BinnedStats {
  int bin_index = 0;
  double scale_low = 0.0;
  double scale_high = 0.0;
  double scale_median = 0.0;
  Index count = 0;
  std::array<double, 7> percentiles{};  // at kBinPercentiles
  double iqr = 0.0;
  double mean = 0.0;
  double skewness = 0.0;

  double median() const { return percentiles[3]; }
};

/// Sorts pairs by scale, trims floor(trim * n) pairs from each end and splits
/// the rest into nbins equal-count bins (sizes differ by at most one).
/// Pairs with a non-finite member are dropped first.
std::vector<BinnedStats> binscatter(const VecRef& values, const VecRef& scale, int nbins = 49,
                                    double trim = 0.01);

/// Bin index (0-based) of every pair, -1 for trimmed or dropped pairs.
std::vector<int> bin_assignment(const VecRef& scale, int nbins = 49, double trim = 0.01);

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double se = 0.0;
  double r2 = 0.0;
  Index bins = 0;
};

/// OLS of log(iqr) on bin median scale.
ScalingFit dispersion_scale_fit(const std::vector<BinnedStats>& stats);

struct QuantileFit {
  double intercept = 0.0;
  double slope = 0.0;
  int iterations = 0;
};

/// Minimises sum rho_tau(y - a - b x): majorise-minimise reweighted least
/// squares (weights 1 / (1e-6 + |r|), at most 200 iterations), then a line
/// search of the slope on the profile loss.
QuantileFit quantile_regression(const VecRef& y, const VecRef& x, double tau);
double quantile_slope(const VecRef& y, const VecRef& x, double tau);

/// sum rho_tau(y - a - b x)
double check_loss(const VecRef& y, const VecRef& x, double a, double b, double tau);

}  // namespace firmfacts

#endif  // FIRMFACTS_BINSCATTER_HPP

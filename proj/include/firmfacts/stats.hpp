#ifndef FIRMFACTS_STATS_HPP
#define FIRMFACTS_STATS_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "firmfacts/errors.hpp"

namespace firmfacts {

using Eigen::Index;
using Eigen::VectorXd;
using VecRef = Eigen::Ref<const VectorXd>;

/// First four central moments. `kurtosis` is the plain (non-excess) ratio
/// m4 / m2^2, so a Gaussian has kurtosis 3.
struct Moments {
  double mean = 0.0;
  double sd = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
};

/// Linear-interpolation (type-7) quantile of an already sorted vector.
template <typename Derived>
typename Derived::Scalar quantile_sorted(const Eigen::DenseBase<Derived>& sorted,
                                         double q) {
  using Scalar = typename Derived::Scalar;
  const Index n = sorted.size();
  if (n == 0) throw SampleSizeError("quantile of empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw DomainError("quantile level outside [0,1]");
  const double h = (n - 1) * q;
  const auto lo = static_cast<Index>(std::floor(h));
  const Index hi = std::min(lo + 1, n - 1);
  const Scalar frac = static_cast<Scalar>(h - lo);
  return sorted(lo) + frac * (sorted(hi) - sorted(lo));
}

inline VectorXd sorted_copy(const VecRef& x) {
  VectorXd s = x;
  std::sort(s.begin(), s.end());
  return s;
}

inline double quantile(const VecRef& x, double q) { return quantile_sorted(sorted_copy(x), q); }
inline double median(const VecRef& x) { return quantile(x, 0.5); }

inline double iqr_sorted(const VecRef& sorted) {
  return quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
}
inline double iqr(const VecRef& x) { return iqr_sorted(sorted_copy(x)); }

/// Sample moments; sd uses the n-1 denominator, skewness and kurtosis the
/// moment ratios of the biased central moments.
Moments sample_moments(const VecRef& x);

/// Entries of `x` that are finite, in order.
VectorXd finite_only(const VecRef& x);

/// Ordinary least squares of y on [1, x].
struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double slope_se = 0.0;
  double r2 = 0.0;
  Index n = 0;
};
LineFit fit_line(const VecRef& x, const VecRef& y);

/// OLS of y on the columns of `design` (caller supplies any intercept column).
/// Throws NumericalError when the design is rank deficient.
VectorXd least_squares(const Eigen::Ref<const Eigen::MatrixXd>& design, const VecRef& y);

double pearson(const VecRef& x, const VecRef& y);

}  // namespace firmfacts

#endif  // FIRMFACTS_STATS_HPP

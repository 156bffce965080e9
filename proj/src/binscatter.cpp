#include "firmfacts/binscatter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "firmfacts/errors.hpp"

namespace firmfacts {
namespace {

// Indices of finite pairs ordered by scale, with index as the tie-breaker.
std::vector<Index> ordered_pairs(const VecRef& values, const VecRef& scale) {
  std::vector<Index> idx;
  idx.reserve(scale.size());
  for (Index i = 0; i < scale.size(); ++i)
    if (std::isfinite(scale(i)) && std::isfinite(values(i))) idx.push_back(i);
  std::sort(idx.begin(), idx.end(), [&](Index a, Index b) {
    return scale(a) < scale(b) || (scale(a) == scale(b) && a < b);
  });
  return idx;
}

struct Span {
  std::size_t begin, end;
};

std::vector<Span> equal_count_spans(std::size_t n, int nbins, double trim) {
  if (nbins < 1) throw ConfigError("binscatter: nbins must be positive");
  if (!(trim >= 0.0 && trim < 0.5)) throw ConfigError("binscatter: trim must lie in [0, 0.5)");
  const auto cut = static_cast<std::size_t>(std::floor(trim * static_cast<double>(n)));
  const std::size_t kept = n - 2 * cut;
  if (kept < static_cast<std::size_t>(nbins))
    throw SampleSizeError("binscatter: " + std::to_string(kept) + " observations for " + std::to_string(nbins) +
                          " bins");
  std::vector<Span> spans(nbins);
  for (int b = 0; b < nbins; ++b)
    spans[b] = {cut + kept * b / nbins, cut + kept * (b + 1) / nbins};
  return spans;
}

}  // namespace

std::vector<BinnedStats> binscatter(const VecRef& values, const VecRef& scale, int nbins, double trim) {
  if (values.size() != scale.size()) throw DomainError("binscatter: values and scale differ in length");
  const auto idx = ordered_pairs(values, scale);
  const auto spans = equal_count_spans(idx.size(), nbins, trim);
  std::vector<BinnedStats> out;
  out.reserve(nbins);
  for (int b = 0; b < nbins; ++b) {
    const auto [lo, hi] = spans[b];
    const Index m = static_cast<Index>(hi - lo);
    VectorXd v(m), s(m);
    for (Index k = 0; k < m; ++k) {
      v(k) = values(idx[lo + k]);
      s(k) = scale(idx[lo + k]);
    }
    BinnedStats st;
    st.bin_index = b;
    st.count = m;
    st.scale_low = s(0);
    st.scale_high = s(m - 1);
    st.scale_median = quantile_sorted(s, 0.5);
    std::sort(v.data(), v.data() + m);
    for (std::size_t q = 0; q < kBinPercentiles.size(); ++q) st.percentiles[q] = quantile_sorted(v, kBinPercentiles[q]);
    st.iqr = st.percentiles[4] - st.percentiles[2];
    st.mean = v.mean();
    st.skewness = m >= 2 ? sample_moments(v).skewness : 0.0;
    out.push_back(st);
  }
  return out;
}

std::vector<int> bin_assignment(const VecRef& scale, int nbins, double trim) {
  const auto idx = ordered_pairs(scale, scale);
  const auto spans = equal_count_spans(idx.size(), nbins, trim);
  std::vector<int> bin(scale.size(), -1);
  for (int b = 0; b < nbins; ++b)
    for (std::size_t k = spans[b].begin; k < spans[b].end; ++k) bin[idx[k]] = b;
  return bin;
}

ScalingFit dispersion_scale_fit(const std::vector<BinnedStats>& stats) {
  if (stats.size() < 10) throw SampleSizeError("dispersion_scale_fit: need at least 10 bins");
  VectorXd x(stats.size()), y(stats.size());
  for (std::size_t i = 0; i < stats.size(); ++i) {
    if (!(stats[i].iqr > 0.0)) throw DegenerateGroupError("bin", stats[i].bin_index);
    x(i) = stats[i].scale_median;
    y(i) = std::log(stats[i].iqr);
  }
  const LineFit f = fit_line(x, y);
  return {f.slope, f.intercept, f.slope_se, f.r2, f.n};
}

double check_loss(const VecRef& y, const VecRef& x, double a, double b, double tau) {
  double s = 0.0;
  for (Index i = 0; i < y.size(); ++i) {
    const double r = y(i) - a - b * x(i);
    s += r * (tau - (r < 0.0 ? 1.0 : 0.0));
  }
  return s;
}

namespace {

// Intercept minimising the check loss for a fixed slope: the tau-quantile
// (lower order statistic) of the residuals.
double best_intercept(const VecRef& y, const VecRef& x, double b, double tau, std::vector<double>& buf) {
  const Index n = y.size();
  buf.resize(n);
  for (Index i = 0; i < n; ++i) buf[i] = y(i) - b * x(i);
  const auto k = std::clamp<Index>(static_cast<Index>(std::ceil(tau * n)) - 1, 0, n - 1);
  std::nth_element(buf.begin(), buf.begin() + k, buf.end());
  return buf[k];
}

}  // namespace

QuantileFit quantile_regression(const VecRef& y, const VecRef& x, double tau) {
  if (!(tau > 0.0 && tau < 1.0)) throw DomainError("quantile_regression: tau must lie in (0, 1)");
  if (y.size() != x.size()) throw DomainError("quantile_regression: length mismatch");
  const Index n = y.size();
  if (n < 3) throw SampleSizeError("quantile_regression: need at least three observations");
  if (!y.allFinite() || !x.allFinite()) throw DomainError("quantile_regression: non-finite input");
  constexpr double eps = 1e-6;
  constexpr int max_iter = 200;

  // Reweighted least squares on the smoothed loss gets close; it can stall
  // near the kinks, so the slope is then polished on the profile loss, which
  // is convex in b.
  const LineFit ols = fit_line(x, y);
  Eigen::Vector2d beta(ols.intercept, ols.slope);
  double loss = check_loss(y, x, beta(0), beta(1), tau);
  Eigen::Vector2d best = beta;
  double best_loss = loss;
  const double tilt = 2.0 * tau - 1.0;
  QuantileFit out;
  for (out.iterations = 1; out.iterations <= max_iter; ++out.iterations) {
    Eigen::Matrix2d a = Eigen::Matrix2d::Zero();
    Eigen::Vector2d rhs(tilt * n, tilt * x.sum());
    for (Index i = 0; i < n; ++i) {
      const double w = 1.0 / (eps + std::abs(y(i) - beta(0) - beta(1) * x(i)));
      a(0, 0) += w;
      a(0, 1) += w * x(i);
      a(1, 1) += w * x(i) * x(i);
      rhs(0) += w * y(i);
      rhs(1) += w * x(i) * y(i);
    }
    a(1, 0) = a(0, 1);
    const Eigen::Vector2d next = a.ldlt().solve(rhs);
    if (!next.allFinite()) throw NumericalError("quantile_regression: singular weighted system");
    const double next_loss = check_loss(y, x, next(0), next(1), tau);
    const double step = (next - beta).lpNorm<Eigen::Infinity>();
    const double gain = loss - next_loss;
    beta = next;
    loss = next_loss;
    if (loss < best_loss) {
      best = beta;
      best_loss = loss;
    }
    if (step <= 1e-10 * (1.0 + beta.lpNorm<Eigen::Infinity>()) || std::abs(gain) <= 1e-13 * (1.0 + loss)) break;
  }
  out.iterations = std::min(out.iterations, max_iter);

  std::vector<double> buf;
  auto profile = [&](double b) { return check_loss(y, x, best_intercept(y, x, b, tau, buf), b, tau); };
  double b0 = best(1);
  double f0 = profile(b0);
  double d = std::max({1e-6, 1e-3 * std::abs(b0), ols.slope_se});
  int expansions = 0;
  for (;; ++expansions) {
    if (expansions > 200 || !std::isfinite(f0)) throw NumericalError("quantile_regression: no convergence in the slope search");
    const double fl = profile(b0 - d), fr = profile(b0 + d);
    if (fl >= f0 && fr >= f0) break;
    if (fl < fr) {
      b0 -= d;
      f0 = fl;
    } else {
      b0 += d;
      f0 = fr;
    }
    d *= 2.0;
  }
  const auto [b, fb] = boost::math::tools::brent_find_minima(profile, b0 - d, b0 + d, std::numeric_limits<double>::digits);
  const double slope = fb <= f0 ? b : b0;
  out.slope = slope;
  out.intercept = best_intercept(y, x, slope, tau, buf);
  return out;
}
double quantile_slope(const VecRef& y, const VecRef& x, double tau) { return quantile_regression(y, x, tau).slope; }

}  // namespace firmfacts

#include <map>

#include "firmfacts/errors.hpp"
#include "firmfacts/panel.hpp"
#include "firmfacts/random.hpp"

namespace firmfacts {

SignSplit sign_split_stats(const VecRef& values) {
  std::vector<double> pos, neg;
  Index n = 0;
  for (Index i = 0; i < values.size(); ++i) {
    const double v = values(i);
    if (!std::isfinite(v)) continue;
    ++n;
    if (v > 0.0) pos.push_back(asinh_scale(v));
    if (v < 0.0) neg.push_back(asinh_scale(v));
  }
  if (n == 0) throw SampleSizeError("sign_split_stats: no finite values");
  SignSplit s;
  s.n_positive = static_cast<Index>(pos.size());
  s.n_negative = static_cast<Index>(neg.size());
  s.share_positive = static_cast<double>(s.n_positive) / n;
  s.share_negative = static_cast<double>(s.n_negative) / n;
  if (pos.size() >= 2) s.positive = sample_moments(Eigen::Map<const VectorXd>(pos.data(), s.n_positive));
  if (neg.size() >= 2) s.negative = sample_moments(Eigen::Map<const VectorXd>(neg.data(), s.n_negative));
  return s;
}

double pooled_autocorr(const VecRef& values, const std::vector<Index>& prev) {
  if (static_cast<Index>(prev.size()) != values.size()) throw DomainError("pooled_autocorr: length mismatch");
  std::vector<double> now, lag;
  for (Index r = 0; r < values.size(); ++r) {
    const Index p = prev[r];
    if (p < 0 || !std::isfinite(values(r)) || !std::isfinite(values(p))) continue;
    now.push_back(values(r));
    lag.push_back(values(p));
  }
  if (now.size() < 100)
    throw SampleSizeError("pooled_autocorr: " + std::to_string(now.size()) + " consecutive pairs, need 100");
  const Index m = static_cast<Index>(now.size());
  return pearson(Eigen::Map<const VectorXd>(now.data(), m), Eigen::Map<const VectorXd>(lag.data(), m));
}

double pooled_autocorr(const Panel& panel, std::string_view variable, Subset subset) {
  const VectorXd x = resolve_variable(panel, variable);
  std::vector<Index> prev = panel.prev;
  for (Index r = 0; r < panel.rows(); ++r)
    if (!panel.in_subset(r, subset) || (prev[r] >= 0 && !panel.in_subset(prev[r], subset))) prev[r] = -1;
  return pooled_autocorr(x, prev);
}

double jitter_price(double price, double tick, std::uint64_t seed) {
  if (!(tick > 0.0)) throw DomainError("jitter_price: tick must be positive");
  if (!(price > tick)) throw DomainError("jitter_price: price must exceed the tick");
  Rng rng = make_rng(seed);
  return price + tick * (uniform_open(rng) - 0.5);
}

VectorXd jitter_prices(const VecRef& prices, double tick, std::uint64_t seed) {
  if (!(tick > 0.0)) throw DomainError("jitter_prices: tick must be positive");
  Rng rng = make_rng(seed);
  VectorXd out(prices.size());
  for (Index i = 0; i < prices.size(); ++i) {
    if (!(prices(i) > tick)) throw DomainError("jitter_prices: price must exceed the tick");
    out(i) = prices(i) + tick * (uniform_open(rng) - 0.5);
  }
  return out;
}

std::vector<PerYearStats> per_year_stats(const VecRef& values, const GroupRef& years) {
  if (values.size() != years.size()) throw DomainError("per_year_stats: length mismatch");
  std::map<std::int64_t, std::vector<double>> by_year;
  for (Index i = 0; i < values.size(); ++i)
    if (std::isfinite(values(i))) by_year[years(i)].push_back(values(i));
  std::vector<PerYearStats> out;
  for (auto& [year, v] : by_year) {
    std::sort(v.begin(), v.end());
    const Eigen::Map<const VectorXd> m(v.data(), static_cast<Index>(v.size()));
    PerYearStats s;
    s.year = year;
    s.n = m.size();
    s.mean = m.mean();
    s.sd = s.n > 1 ? std::sqrt((m.array() - s.mean).square().sum() / (s.n - 1)) : 0.0;
    s.p10 = quantile_sorted(m, 0.10);
    s.p25 = quantile_sorted(m, 0.25);
    s.median = quantile_sorted(m, 0.50);
    s.p75 = quantile_sorted(m, 0.75);
    s.p90 = quantile_sorted(m, 0.90);
    s.iqr = s.p75 - s.p25;
    out.push_back(s);
  }
  return out;
}

}  // namespace firmfacts

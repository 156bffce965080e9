#include "firmfacts/transforms.hpp"

#include <algorithm>
#include <map>

#include "firmfacts/binscatter.hpp"
#include "firmfacts/errors.hpp"

namespace firmfacts {

double dlog(double m_t, double m_prev) {
  if (!(m_t > 0.0) || !(m_prev > 0.0)) throw DomainError("dlog: sizes must be strictly positive");
  return std::log(m_t) - std::log(m_prev);
}

double adj_equity_growth(double eq_t, double de_t, double eq_prev) {
  if (!(eq_prev > 0.0)) throw DomainError("adj_equity_growth: lagged equity must be positive");
  if (!(eq_t + de_t > 0.0)) throw DomainError("adj_equity_growth: equity plus dispensations must be positive");
  return std::log(eq_t + de_t) - std::log(eq_prev);
}

namespace {

double component_term(double now, double next, const char* name) {
  if (now < 0.0 || next < 0.0) throw DomainError(std::string("dln_growth: negative ") + name + " component");
  if (now == 0.0 && next == 0.0) return 0.0;
  if (now == 0.0 || next == 0.0)
    throw UndefinedGrowthError(std::string("dln_growth: ") + name + " component is zero at only one date");
  return now * (std::log(next) - std::log(now));
}

}  // namespace

double dln_growth(const SignedDecomposition& d_t, const SignedDecomposition& d_next) {
  const double w = std::abs(d_t.positive_part - d_t.negative_part);
  if (w == 0.0) throw ZeroDenominatorError("dln_growth: positive and negative parts are equal");
  const double tp = component_term(d_t.positive_part, d_next.positive_part, "positive");
  const double tn = component_term(d_t.negative_part, d_next.negative_part, "negative");
  return (tp - tn) / w;
}

const YearAnchors& GroupAnchors::find(std::int64_t group) const {
  const auto it = std::lower_bound(groups.begin(), groups.end(), group,
                                   [](const YearAnchors& a, std::int64_t g) { return a.year < g; });
  if (it == groups.end() || it->year != group)
    throw CoverageError("no anchors for " + group_label + " " + std::to_string(group));
  return *it;
}

namespace {

std::pair<double, double> location_dispersion(std::vector<double>& v, AnchorKind kind) {
  const Eigen::Map<VectorXd> m(v.data(), static_cast<Index>(v.size()));
  if (kind == AnchorKind::MeanSd) {
    const double mean = m.mean();
    const double sd = v.size() > 1 ? std::sqrt((m.array() - mean).square().sum() / (v.size() - 1.0)) : 0.0;
    return {mean, sd};
  }
  std::sort(v.begin(), v.end());
  return {quantile_sorted(m, 0.5), iqr_sorted(m)};
}

void check_lengths(const VecRef& values, const GroupRef& groups) {
  if (values.size() != groups.size()) throw DomainError("transform: values and groups differ in length");
}

}  // namespace

GroupAnchors estimate_group_anchors(const VecRef& values, const GroupRef& groups, AnchorKind kind,
                                    const std::string& label) {
  check_lengths(values, groups);
  std::map<std::int64_t, std::vector<double>> by_group;
  std::vector<double> pooled;
  for (Index i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values(i))) continue;
    by_group[groups(i)].push_back(values(i));
    pooled.push_back(values(i));
  }
  if (pooled.empty()) throw SampleSizeError("transform: no finite values");
  GroupAnchors a;
  a.kind = kind;
  a.group_label = label;
  for (auto& [g, v] : by_group) {
    const auto [loc, dis] = location_dispersion(v, kind);
    if (!(dis > 0.0)) throw DegenerateGroupError(label, g);
    a.groups.push_back({g, loc, dis});
  }
  const auto [loc, dis] = location_dispersion(pooled, kind);
  a.target_location = loc;
  a.target_dispersion = dis;
  return a;
}

VectorXd apply_group_anchors(const VecRef& values, const GroupRef& groups, const GroupAnchors& anchors) {
  check_lengths(values, groups);
  VectorXd out(values.size());
  for (Index i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values(i))) {
      out(i) = values(i);
      continue;
    }
    const YearAnchors& g = anchors.find(groups(i));
    out(i) = (values(i) - g.location) / g.dispersion * anchors.target_dispersion + anchors.target_location;
  }
  return out;
}

VectorXd t1_standardize(const VecRef& values, const GroupRef& years) {
  GroupAnchors a = estimate_group_anchors(values, years, AnchorKind::MeanSd);
  a.target_location = 0.0;
  a.target_dispersion = 1.0;
  return apply_group_anchors(values, years, a);
}

VectorXd t2_reflate(const VecRef& values, const GroupRef& years) {
  return apply_group_anchors(values, years, estimate_group_anchors(values, years, AnchorKind::MeanSd));
}

VectorXd t3_robust_reflate(const VecRef& values, const GroupRef& years) {
  return apply_group_anchors(values, years, estimate_group_anchors(values, years, AnchorKind::MedianIqr));
}

VectorXd t4_size_domain(const VecRef& values, const GroupRef& years) {
  for (Index i = 0; i < values.size(); ++i)
    if (!(values(i) > 0.0) && !std::isnan(values(i))) throw DomainError("t4_size_domain: values must be positive");
  const VectorXd logs = values.array().log();
  return t3_robust_reflate(logs, years).array().exp();
}

VectorXd t5_signed_adjust(const VecRef& values, const GroupRef& years) {
  check_lengths(values, years);
  // Anchors come from the logs of the positive values only.
  VectorXd logpos = VectorXd::Constant(values.size(), std::numeric_limits<double>::quiet_NaN());
  std::map<std::int64_t, int> positives;
  for (Index i = 0; i < values.size(); ++i) {
    if (!std::isnan(values(i))) positives.try_emplace(years(i), 0);
    if (values(i) > 0.0 && std::isfinite(values(i))) {
      logpos(i) = std::log(values(i));
      ++positives[years(i)];
    }
  }
  for (const auto& [year, count] : positives)
    if (count < 2) throw DegenerateGroupError("year", year);
  const GroupAnchors a = estimate_group_anchors(logpos, years, AnchorKind::MedianIqr);
  VectorXd out(values.size());
  for (Index i = 0; i < values.size(); ++i) {
    const double y = values(i);
    if (!std::isfinite(y) || y == 0.0) {
      out(i) = y;
      continue;
    }
    const YearAnchors& g = a.find(years(i));
    const double z = (std::log(std::abs(y)) - g.location) / g.dispersion * a.target_dispersion + a.target_location;
    out(i) = std::copysign(std::exp(z), y);
  }
  return out;
}

VectorXd t6_bin_adjust(const VecRef& values, const GroupRef& bins) {
  return apply_group_anchors(values, bins, estimate_group_anchors(values, bins, AnchorKind::MedianIqr, "bin"));
}

ScaleAnchors estimate_scale_anchors(const VecRef& values, const VecRef& lagged_scale, int nbins, double trim) {
  if (values.size() != lagged_scale.size()) throw DomainError("estimate_scale_anchors: length mismatch");
  std::vector<Index> keep;
  for (Index i = 0; i < values.size(); ++i)
    if (std::isfinite(values(i)) && std::isfinite(lagged_scale(i))) keep.push_back(i);
  const VectorXd x = values(keep), s = lagged_scale(keep);
  ScaleAnchors a;
  const QuantileFit loc = quantile_regression(x, s, 0.5);
  a.b0_loc = loc.intercept;
  a.b1_loc = loc.slope;
  const ScalingFit dis = dispersion_scale_fit(binscatter(x, s, nbins, trim));
  a.b0_dis = dis.intercept;
  a.b1_dis = dis.slope;
  a.median_scale = median(s);
  return a;
}

double t7_scale_adjust(double x, double lagged_scale, const ScaleAnchors& a) {
  if (!std::isfinite(lagged_scale)) throw DomainError("t7_scale_adjust: lagged scale must be finite");
  return (x - a.location(lagged_scale)) / a.dispersion(lagged_scale) * a.dispersion(a.median_scale) +
         a.location(a.median_scale);
}

VectorXd t7_scale_adjust(const VecRef& values, const VecRef& lagged_scale, const ScaleAnchors& a) {
  if (values.size() != lagged_scale.size()) throw DomainError("t7_scale_adjust: length mismatch");
  VectorXd out(values.size());
  for (Index i = 0; i < values.size(); ++i)
    out(i) = std::isfinite(values(i)) && std::isfinite(lagged_scale(i))
                 ? t7_scale_adjust(values(i), lagged_scale(i), a)
                 : std::numeric_limits<double>::quiet_NaN();
  return out;
}

}  // namespace firmfacts

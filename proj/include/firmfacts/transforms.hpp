#ifndef FIRMFACTS_TRANSFORMS_HPP
#define FIRMFACTS_TRANSFORMS_HPP

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <type_traits>
#include <vector>

#include "firmfacts/stats.hpp"

namespace firmfacts {

template <typename T>
  requires std::is_arithmetic_v<T>
T asinh_scale(T x) {
  using std::asinh;
  return asinh(x);
}

template <typename T>
  requires std::is_arithmetic_v<T>
T sinh_unscale(T y) {
  using std::sinh;
  return sinh(y);
}

template <typename Derived>
auto asinh_scale(const Eigen::ArrayBase<Derived>& x) {
  return x.derived().unaryExpr([](typename Derived::Scalar v) { return asinh_scale(v); });
}

template <typename Derived>
auto sinh_unscale(const Eigen::ArrayBase<Derived>& y) {
  return y.derived().unaryExpr([](typename Derived::Scalar v) { return sinh_unscale(v); });
}

/// log(m_t) - log(m_prev); both must be positive.
double dlog(double m_t, double m_prev);

/// Buy-and-hold log return with dispensations: log(eq_t + de_t) - log(eq_prev).
double adj_equity_growth(double eq_t, double de_t, double eq_prev);

struct SignedDecomposition {
  double positive_part = 0.0;
  double negative_part = 0.0;

  double net() const { return positive_part - negative_part; }
};

/// Growth of W = Yp - Yn from t to t+1:
///   (Yp_t dlog Yp + (-Yn_t) dlog Yn) / |W_t|
/// A component that is zero at both dates contributes nothing.
double dln_growth(const SignedDecomposition& d_t, const SignedDecomposition& d_next);

using GroupVector = Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1>;
using GroupRef = Eigen::Ref<const GroupVector>;

/// Location and dispersion of one group (year or bin).
struct YearAnchors {
  std::int64_t year = 0;
  double location = 0.0;
  double dispersion = 1.0;
};

enum class AnchorKind { MeanSd, MedianIqr };

struct GroupAnchors {
  AnchorKind kind = AnchorKind::MedianIqr;
  std::string group_label = "year";
  std::vector<YearAnchors> groups;  // ascending by group key
  double target_location = 0.0;
  double target_dispersion = 1.0;

  const YearAnchors& find(std::int64_t group) const;
};

/// Per-group anchors plus the pooled target computed from `values`.
/// Throws DegenerateGroupError when a group has zero dispersion.
GroupAnchors estimate_group_anchors(const VecRef& values, const GroupRef& groups, AnchorKind kind,
                                    const std::string& label = "year");

/// (x - loc_g) / dis_g * target_dis + target_loc
VectorXd apply_group_anchors(const VecRef& values, const GroupRef& groups, const GroupAnchors& anchors);

VectorXd t1_standardize(const VecRef& values, const GroupRef& years);
VectorXd t2_reflate(const VecRef& values, const GroupRef& years);
VectorXd t3_robust_reflate(const VecRef& values, const GroupRef& years);
/// exp(t3(log y)); every value must be positive.
VectorXd t4_size_domain(const VecRef& values, const GroupRef& years);
/// sign(y) exp(...) with anchors taken from the positive values of each year.
VectorXd t5_signed_adjust(const VecRef& values, const GroupRef& years);
VectorXd t6_bin_adjust(const VecRef& values, const GroupRef& bins);

struct ScaleAnchors {
  double b0_loc = 0.0;
  double b1_loc = 0.0;
  double b0_dis = 0.0;
  double b1_dis = 0.0;
  double median_scale = 0.0;

  double location(double s) const { return b0_loc + b1_loc * s; }
  double dispersion(double s) const { return std::exp(b0_dis + b1_dis * s); }
};

/// Median regression of x on lagged scale for the location line, and OLS of
/// binned log-IQR on bin median scale for the dispersion line.
ScaleAnchors estimate_scale_anchors(const VecRef& values, const VecRef& lagged_scale, int nbins = 49,
                                    double trim = 0.01);

double t7_scale_adjust(double x, double lagged_scale, const ScaleAnchors& a);
VectorXd t7_scale_adjust(const VecRef& values, const VecRef& lagged_scale, const ScaleAnchors& a);

/// Anchors used by an adjustment run, kept for audit.
struct AdjustmentParams {
  std::optional<GroupAnchors> time;
  std::optional<ScaleAnchors> scale;
};

}  // namespace firmfacts

#endif  // FIRMFACTS_TRANSFORMS_HPP

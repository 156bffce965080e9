#include <cmath>
#include <map>
#include <random>

#include "doctest.h"
#include "firmfacts/errors.hpp"
#include "firmfacts/transforms.hpp"

using namespace firmfacts;

namespace {

struct YearPanel {
  VectorXd x;
  GroupVector year;
};

// Years with different location, spread and size.
YearPanel planted_years(std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::normal_distribution<double> z;
  std::vector<double> x;
  std::vector<std::int64_t> y;
  for (int t = 0; t < 6; ++t) {
    const int n = 200 + 37 * t;
    for (int i = 0; i < n; ++i) {
      x.push_back(0.5 * t + (1.0 + 0.2 * t) * z(g) + 0.3 * z(g) * z(g));
      y.push_back(2000 + t);
    }
  }
  YearPanel p;
  p.x = Eigen::Map<VectorXd>(x.data(), x.size());
  p.year = Eigen::Map<GroupVector>(y.data(), y.size());
  return p;
}

std::map<std::int64_t, VectorXd> by_group(const VectorXd& x, const GroupVector& g) {
  std::map<std::int64_t, std::vector<double>> m;
  for (Index i = 0; i < x.size(); ++i) m[g(i)].push_back(x(i));
  std::map<std::int64_t, VectorXd> out;
  for (auto& [k, v] : m) out[k] = Eigen::Map<VectorXd>(v.data(), v.size());
  return out;
}

}  // namespace

TEST_CASE("asinh examples") {
  CHECK(asinh_scale(0.0) == 0.0);
  CHECK(asinh_scale(-7.3) == -asinh_scale(7.3));
  CHECK(asinh_scale(1e6) == doctest::Approx(std::log(2e6)).epsilon(1e-9));
  for (double x : {-1e8, -12345.6, -1.0, -1e-9, 0.0, 3e-7, 0.5, 42.0, 9.9e7, 1e8})
    CHECK(std::abs(sinh_unscale(asinh_scale(x)) - x) <= 1e-12 * std::max(1.0, std::abs(x)));
  Eigen::ArrayXd a(3);
  a << -2, 0, 2;
  const Eigen::ArrayXd b = asinh_scale(a);
  CHECK(b(0) == -b(2));
}

TEST_CASE("dlog and equity growth") {
  CHECK(dlog(5, 5) == 0.0);
  CHECK(dlog(100, 50) == doctest::Approx(0.6931).epsilon(1e-4));
  CHECK(dlog(50, 100) == doctest::Approx(-0.6931).epsilon(1e-4));
  CHECK_THROWS_AS(dlog(0, 1), DomainError);
  CHECK_THROWS_AS(dlog(1, -1), DomainError);
  CHECK(adj_equity_growth(100, 0, 100) == 0.0);
  CHECK(adj_equity_growth(95, 5, 100) == 0.0);
  CHECK(adj_equity_growth(100, 10, 100) == doctest::Approx(0.0953).epsilon(1e-3));
  CHECK_THROWS_AS(adj_equity_growth(10, -10, 100), DomainError);
}

TEST_CASE("dln_growth examples") {
  CHECK(dln_growth({100, 0}, {110, 0}) == doctest::Approx(std::log(1.1)));
  CHECK(dln_growth({200, 100}, {220, 110}) == doctest::Approx(std::log(1.1)).epsilon(1e-14));
  CHECK_THROWS_AS(dln_growth({50, 50}, {60, 40}), ZeroDenominatorError);
  CHECK_THROWS_AS(dln_growth({100, 0}, {110, 5}), UndefinedGrowthError);
  CHECK_THROWS_AS(dln_growth({100, 5}, {110, 0}), UndefinedGrowthError);
  // negative net value: denominator is |W|
  CHECK(dln_growth({100, 200}, {110, 200}) == doctest::Approx(100 * std::log(1.1) / 100));
}

TEST_CASE("T3 equalises per-year median and IQR") {
  const auto p = planted_years(1);
  const VectorXd out = t3_robust_reflate(p.x, p.year);
  const double m = median(p.x), q = iqr(p.x);
  for (const auto& [yr, v] : by_group(out, p.year)) {
    CAPTURE(yr);
    CHECK(std::abs(median(v) - m) <= 1e-9);
    CHECK(std::abs(iqr(v) - q) <= 1e-9);
  }
}

TEST_CASE("T3 examples") {
  VectorXd x(7);
  x << 3, -1, 4, 1, 5, 9, 2;
  const GroupVector one = GroupVector::Constant(7, 2001);
  CHECK((t3_robust_reflate(x, one) - x).cwiseAbs().maxCoeff() < 1e-12);

  VectorXd shifted(14);
  shifted << x, x.array() + 10;
  GroupVector two(14);
  two << one, GroupVector::Constant(7, 2002);
  const VectorXd out = t3_robust_reflate(shifted, two);
  CHECK((out.head(7) - out.tail(7)).cwiseAbs().maxCoeff() < 1e-12);

  VectorXd flat(4);
  flat << 1, 1, 1, 1;
  GroupVector g(4);
  g << 1999, 1999, 2000, 2000;
  VectorXd mixed(4);
  mixed << 1, 2, 5, 5;
  try {
    t3_robust_reflate(mixed, g);
    FAIL("expected a degenerate-year error");
  } catch (const DegenerateGroupError& e) {
    CHECK(std::string(e.what()).find("2000") != std::string::npos);
  }
}

TEST_CASE("T3 is idempotent for fixed targets") {
  const auto p = planted_years(2);
  const GroupAnchors a = estimate_group_anchors(p.x, p.year, AnchorKind::MedianIqr);
  const VectorXd once = apply_group_anchors(p.x, p.year, a);
  GroupAnchors b = estimate_group_anchors(once, p.year, AnchorKind::MedianIqr);
  b.target_location = a.target_location;
  b.target_dispersion = a.target_dispersion;
  const VectorXd twice = apply_group_anchors(once, p.year, b);
  CHECK((twice - once).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("T1 and T2") {
  const auto p = planted_years(3);
  const VectorXd z = t1_standardize(p.x, p.year);
  for (const auto& [yr, v] : by_group(z, p.year)) {
    CHECK(std::abs(v.mean()) < 1e-12);
    CHECK(std::sqrt((v.array() - v.mean()).square().sum() / (v.size() - 1)) == doctest::Approx(1.0).epsilon(1e-12));
  }
  const VectorXd r = t2_reflate(p.x, p.year);
  const double mu = p.x.mean();
  for (const auto& [yr, v] : by_group(r, p.year)) CHECK(v.mean() == doctest::Approx(mu).epsilon(1e-12));
}

TEST_CASE("T4 is exp of T3 in logs") {
  const auto p = planted_years(4);
  const VectorXd y = p.x.array().exp();
  const VectorXd lhs = t4_size_domain(y, p.year);
  const VectorXd rhs = t3_robust_reflate(p.x, p.year).array().exp();
  CHECK(((lhs - rhs).array() / rhs.array()).abs().maxCoeff() < 1e-9);
  CHECK_THROWS_AS(t4_size_domain(-y, p.year), DomainError);

  const GroupVector one = GroupVector::Constant(y.size(), 2010);
  CHECK(((t4_size_domain(y, one) - y).array() / y.array()).abs().maxCoeff() < 1e-12);

  // two log-normal years with planted medians e^1 and e^3
  std::mt19937_64 g(44);
  std::normal_distribution<double> z;
  VectorXd w(2000);
  GroupVector yr(2000);
  for (Index i = 0; i < 2000; ++i) {
    yr(i) = i < 1000 ? 1 : 2;
    w(i) = std::exp((i < 1000 ? 1.0 : 3.0) + 0.7 * z(g));
  }
  const VectorXd t = t4_size_domain(w, yr).array().log();
  CHECK(median(t.head(1000)) == doctest::Approx(median(t.tail(1000))).epsilon(1e-12));
}

TEST_CASE("T5 keeps signs and reduces to T4") {
  const auto p = planted_years(5);
  const VectorXd y = p.x.array().exp();
  CHECK((t5_signed_adjust(y, p.year) - t4_size_domain(y, p.year)).cwiseAbs().maxCoeff() < 1e-9);

  VectorXd s = p.x;  // mixed signs, plus exact zeros
  s(0) = 0.0;
  s(500) = 0.0;
  const VectorXd out = t5_signed_adjust(s, p.year);
  for (Index i = 0; i < s.size(); ++i) {
    const int si = (s(i) > 0) - (s(i) < 0), so = (out(i) > 0) - (out(i) < 0);
    CHECK(si == so);
  }
  CHECK(out(0) == 0.0);

  VectorXd few(4);
  few << 1, -2, -3, 4;
  GroupVector g(4);
  g << 1, 1, 2, 2;
  CHECK_THROWS_AS(t5_signed_adjust(few, g), DegenerateGroupError);
}

TEST_CASE("T6 examples") {
  VectorXd x(10);
  x << 1, 2, 3, 4, 5, 2, 4, 6, 8, 10;
  GroupVector b(10);
  b << 0, 0, 0, 0, 0, 1, 1, 1, 1, 1;
  const VectorXd out = t6_bin_adjust(x, b);
  CHECK(median(out.head(5)) == doctest::Approx(median(out.tail(5))));
  CHECK(median(out) == doctest::Approx(median(x)));
  CHECK(iqr(out.head(5)) == doctest::Approx(iqr(x)).epsilon(1e-12));

  const GroupVector one = GroupVector::Zero(10);
  CHECK((t6_bin_adjust(x, one) - x).cwiseAbs().maxCoeff() < 1e-12);

  VectorXd flat = x;
  flat.tail(5).setConstant(7.0);
  try {
    t6_bin_adjust(flat, b);
    FAIL("expected a degenerate-bin error");
  } catch (const DegenerateGroupError& e) {
    CHECK(std::string(e.what()).find("bin") != std::string::npos);
  }
}

TEST_CASE("T7 examples") {
  ScaleAnchors flat;
  flat.b0_loc = 1.5;
  flat.b0_dis = std::log(2.0);
  flat.median_scale = 5.0;
  for (double x : {-3.0, 0.0, 1.5, 8.0})
    for (double s : {0.0, 5.0, 11.0}) CHECK(t7_scale_adjust(x, s, flat) == doctest::Approx(x));

  ScaleAnchors a{0.3, 0.8, 0.1, -0.13, 6.5};
  for (double s : {2.0, 6.5, 10.0})
    CHECK(t7_scale_adjust(a.location(s), s, a) == doctest::Approx(a.location(a.median_scale)));
  // one unit of local dispersion maps to one unit at the median scale
  CHECK(t7_scale_adjust(a.location(9.0) + a.dispersion(9.0), 9.0, a) ==
        doctest::Approx(a.location(6.5) + a.dispersion(6.5)));
  CHECK_THROWS_AS(t7_scale_adjust(1.0, NAN, a), DomainError);
}

TEST_CASE("transforms are order preserving within a group") {
  const auto p = planted_years(6);
  const VectorXd pos = p.x.array().exp();
  for (const VectorXd& out : {t1_standardize(p.x, p.year), t2_reflate(p.x, p.year), t3_robust_reflate(p.x, p.year),
                              t4_size_domain(pos, p.year), t5_signed_adjust(p.x, p.year)}) {
    for (Index i = 1; i < p.x.size(); ++i)
      if (p.year(i) == p.year(i - 1)) CHECK((p.x(i) < p.x(i - 1)) == (out(i) < out(i - 1)));
  }
}

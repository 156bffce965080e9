// Difference of independent log-normals, W = Yp - Yn.
//
// With Yn = exp(u), u ~ N(mu_n, sigma_n^2), the density is
//   f(w) = int f_LN(w + e^u; mu_p, sigma_p) phi((u - mu_n) / sigma_n) / sigma_n du
// over the u with w + e^u > 0, and the distribution function replaces f_LN by
// the log-normal CDF. The integrand is log-normal shaped in u.
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "families.hpp"
#include "special.hpp"

namespace firmfacts::detail::dln {
namespace {

constexpr double kWidth = 12.0;  // integration half-width in sigma_n units
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Domain {
  std::array<double, 6> cuts{};
  int count = 0;  // number of valid cut points, sorted, first = lower, last = upper
};

// Integration interval in u together with interior breakpoints placed at the
// peaks of both integrand factors.
Domain domain_for(const Params& p, double w) {
  double lo = p.mu_n - kWidth * p.sigma_n;
  if (w < 0.0) lo = std::max(lo, std::log(-w));
  const double hi = std::max(p.mu_n + kWidth * p.sigma_n, lo + kWidth * p.sigma_n);
  Domain d;
  d.cuts[d.count++] = lo;
  auto add = [&](double u) {
    if (std::isfinite(u) && u > lo && u < hi) d.cuts[d.count++] = u;
  };
  add(p.mu_n);
  const double mode_p = std::exp(p.mu_p - p.sigma_p * p.sigma_p) - w;
  if (mode_p > 0.0) add(std::log(mode_p));
  const double median_p = std::exp(p.mu_p) - w;
  if (median_p > 0.0) add(std::log(median_p));
  d.cuts[d.count++] = hi;
  std::sort(d.cuts.begin(), d.cuts.begin() + d.count);
  return d;
}

// log of the density integrand at u.
double log_integrand(const Params& p, double w, double u) {
  const double v = std::exp(u);
  const double y = w + v;
  if (!(y > 0.0)) return kNegInf;
  const double ly = std::log(y);
  const double zp = (ly - p.mu_p) / p.sigma_p;
  const double zn = (u - p.mu_n) / p.sigma_n;
  return log_normal_pdf(zp) - ly - std::log(p.sigma_p) + log_normal_pdf(zn) - std::log(p.sigma_n);
}

// Lower-tail (F) or upper-tail (S) integrand, without the log shift.
double tail_integrand(const Params& p, double w, double u, bool upper) {
  const double y = w + std::exp(u);
  const double zn = (u - p.mu_n) / p.sigma_n;
  const double weight = std::exp(log_normal_pdf(zn)) / p.sigma_n;
  if (!(y > 0.0)) return upper ? weight : 0.0;
  const double zp = (std::log(y) - p.mu_p) / p.sigma_p;
  return weight * (upper ? ndtr(-zp) : ndtr(zp));
}

double shift_for(const Params& p, double w, const Domain& d) {
  double m = kNegInf;
  for (int i = 0; i < d.count; ++i) {
    m = std::max(m, log_integrand(p, w, d.cuts[i]));
    if (i + 1 < d.count) m = std::max(m, log_integrand(p, w, 0.5 * (d.cuts[i] + d.cuts[i + 1])));
  }
  return m;
}

template <typename Rule>
double integrate_panels(const Domain& d, Rule&& rule) {
  double total = 0.0;
  for (int i = 0; i + 1 < d.count; ++i) total += rule(d.cuts[i], d.cuts[i + 1]);
  return total;
}

// Fixed 20-point Gauss-Legendre on each half of each panel.
template <typename F>
double fixed_rule(F&& f, double a, double b) {
  using boost::math::quadrature::gauss;
  const double m = 0.5 * (a + b);
  return gauss<double, 20>::integrate(f, a, m) + gauss<double, 20>::integrate(f, m, b);
}

void check_params(const Params& p) {
  if (!(p.sigma_p > 0.0 && p.sigma_n > 0.0) || !std::isfinite(p.mu_p) || !std::isfinite(p.mu_n))
    throw ParameterDomainError("DLN parameters out of domain");
}

}  // namespace

double logpdf(const Params& p, double w) {
  check_params(p);
  const Domain d = domain_for(p, w);
  const double shift = shift_for(p, w, d);
  if (!std::isfinite(shift)) return kNegInf;
  auto g = [&](double u) { return std::exp(log_integrand(p, w, u) - shift); };
  double err_total = 0.0, l1_total = 0.0;
  const double value = integrate_panels(d, [&](double a, double b) {
    double err = 0.0, l1 = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        g, a, b, 15, 1e-12, &err, &l1);
    err_total += err;
    l1_total += l1;
    return v;
  });
  // Tolerance in density space: absolute 1e-10 or relative 1e-10.
  const double abs_err = err_total * std::exp(shift);
  if (!(value > 0.0) || (abs_err > 1e-10 && err_total > 1e-10 * value))
    throw NumericalError("DLN density quadrature did not converge", err_total / std::max(value, 1e-300));
  return std::log(value) + shift;
}

double cdf(const Params& p, double w) {
  check_params(p);
  const bool upper = w >= 0.0;
  const Domain d = domain_for(p, w);
  auto g = [&](double u) { return tail_integrand(p, w, u, upper); };
  double err_total = 0.0;
  double tail = integrate_panels(d, [&](double a, double b) {
    double err = 0.0;
    const double v = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
        g, a, b, 15, 1e-13, &err);
    err_total += err;
    return v;
  });
  if (upper) {
    tail = std::clamp(tail, 0.0, 1.0);
    if (err_total > 1e-10) throw NumericalError("DLN CDF quadrature did not converge", err_total);
    return 1.0 - tail;
  }
  if (err_total > 1e-10) throw NumericalError("DLN CDF quadrature did not converge", err_total);
  return std::clamp(tail, 0.0, 1.0);
}

double logpdf_fixed(const Params& p, double w) {
  const Domain d = domain_for(p, w);
  const double shift = shift_for(p, w, d);
  if (!std::isfinite(shift)) return kNegInf;
  auto g = [&](double u) { return std::exp(log_integrand(p, w, u) - shift); };
  const double value = integrate_panels(d, [&](double a, double b) { return fixed_rule(g, a, b); });
  return std::log(value) + shift;
}

double cdf_fixed(const Params& p, double w) {
  const bool upper = w >= 0.0;
  const Domain d = domain_for(p, w);
  auto g = [&](double u) { return tail_integrand(p, w, u, upper); };
  const double tail =
      std::clamp(integrate_panels(d, [&](double a, double b) { return fixed_rule(g, a, b); }), 0.0, 1.0);
  return upper ? 1.0 - tail : tail;
}

double quantile(const Params& p, double q) {
  check_params(p);
  // Bracket outward from the difference of medians.
  const double scale = std::exp(std::max(p.mu_p + p.sigma_p, p.mu_n + p.sigma_n));
  double a = std::exp(p.mu_p) - std::exp(p.mu_n) - scale;
  double b = a + 2.0 * scale;
  for (int i = 0; i < 200 && cdf(p, a) > q; ++i) a -= (b - a);
  for (int i = 0; i < 200 && cdf(p, b) < q; ++i) b += (b - a);
  auto f = [&](double w) { return cdf(p, w) - q; };
  boost::uintmax_t max_iter = 300;
  const auto [lo, hi] = boost::math::tools::toms748_solve(
      f, a, b, boost::math::tools::eps_tolerance<double>(50), max_iter);
  return 0.5 * (lo + hi);
}

Table::Table(const Params& p, double lo, double hi, int nodes, bool with_cdf)
    : s0_(0.25 * std::exp(std::min(p.mu_p, p.mu_n))) {
  check_params(p);
  if (!(hi >= lo)) throw DomainError("DLN table: empty range");
  const double ylo = to_grid(lo), yhi = to_grid(hi);
  const double span = std::max(yhi - ylo, 1e-6);
  nodes = std::max(nodes, 16);
  // Three padding nodes each side keep the spline end conditions away from data.
  dy_ = span / (nodes - 7);
  y0_ = ylo - 3.0 * dy_;
  std::vector<double> logf(nodes);
  std::vector<double> cdfv, slope;
  if (with_cdf) {
    cdfv.resize(nodes);
    slope.resize(nodes);
  }
  for (int i = 0; i < nodes; ++i) {
    const double y = y0_ + i * dy_;
    const double w = s0_ * std::sinh(y);
    logf[i] = logpdf_fixed(p, w);
    if (!std::isfinite(logf[i])) logf[i] = -745.0;
    if (with_cdf) {
      cdfv[i] = cdf_fixed(p, w);
      slope[i] = std::exp(logf[i]) * s0_ * std::cosh(y);
    }
  }
  if (with_cdf) {
    for (int i = 1; i < nodes; ++i) cdfv[i] = std::max(cdfv[i], cdfv[i - 1]);
    cdf_ = std::make_unique<boost::math::interpolators::cardinal_cubic_hermite<std::vector<double>>>(
        std::move(cdfv), std::move(slope), y0_, dy_);
  }
  log_density_ = boost::math::interpolators::cardinal_cubic_b_spline<double>(
      logf.data(), logf.size(), y0_, dy_);
}

double Table::logpdf(double w) const { return log_density_(to_grid(w)); }

double Table::cdf(double w) const {
  if (!cdf_) throw DomainError("DLN table built without CDF");
  return std::clamp((*cdf_)(to_grid(w)), 0.0, 1.0);
}

}  // namespace firmfacts::detail::dln

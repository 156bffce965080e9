#include <boost/math/special_functions/owens_t.hpp>
#include <boost/math/tools/roots.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "families.hpp"
#include "special.hpp"

namespace firmfacts::detail::skew_normal {

double logpdf(double xi, double omega, double alpha, double x) {
  const double z = (x - xi) / omega;
  return std::numbers::ln2 - std::log(omega) + log_normal_pdf(z) + log_ndtr(alpha * z);
}

double cdf(double xi, double omega, double alpha, double x) {
  const double z = (x - xi) / omega;
  if (alpha == 0.0) return ndtr(z);
  const double f = ndtr(z) - 2.0 * boost::math::owens_t(z, alpha);
  return std::clamp(f, 0.0, 1.0);
}

double quantile(double xi, double omega, double alpha, double q) {
  if (alpha == 0.0) return xi + omega * ndtri(q);
  // Both tails are at most Gaussian with scale omega.
  const double span = std::max(40.0, 2.0 * std::abs(ndtri(q)) + 10.0);
  auto f = [&](double z) { return cdf(0.0, 1.0, alpha, z) - q; };
  boost::uintmax_t max_iter = 200;
  const auto [a, b] = boost::math::tools::toms748_solve(
      f, -span, span, boost::math::tools::eps_tolerance<double>(50), max_iter);
  return xi + omega * 0.5 * (a + b);
}

double draw(double xi, double omega, double alpha, Rng& rng, NormalSource& normal) {
  const double delta = alpha / std::sqrt(1.0 + alpha * alpha);
  const double u0 = normal(rng);
  const double v = normal(rng);
  const double u1 = delta * u0 + std::sqrt(1.0 - delta * delta) * v;
  return xi + omega * (u0 >= 0.0 ? u1 : -u1);
}

}  // namespace firmfacts::detail::skew_normal

// Stable laws in Nolan's S0 parameterisation. The standardised density is
// obtained by inverting the characteristic function with one FFT; values
// between grid points come from a cubic B-spline, and beyond the grid from
// the Pareto tail asymptote.
#include <unsupported/Eigen/FFT>

#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/tools/roots.hpp>

#include <cmath>
#include <complex>
#include <numbers>

#include "families.hpp"
#include "special.hpp"

namespace firmfacts::detail::stable {
namespace {

using std::numbers::pi;

std::complex<double> log_cf(double alpha, double beta, double t) {
  if (t == 0.0) return {0.0, 0.0};
  const double at = std::abs(t);
  const double sgn = t > 0.0 ? 1.0 : -1.0;
  if (std::abs(alpha - 1.0) < 1e-6) {
    return {-at, -at * beta * (2.0 / pi) * sgn * std::log(at)};
  }
  const double ta = std::pow(at, alpha);
  return {-ta, -beta * sgn * std::tan(pi * alpha / 2.0) * (at - ta)};
}

}  // namespace

StandardGrid::StandardGrid(double alpha, double beta) : alpha_(alpha), beta_(beta) {
  if (!(alpha > 0.0 && alpha <= 2.0) || !(beta >= -1.0 && beta <= 1.0))
    throw ParameterDomainError("stable: need 0 < alpha <= 2 and -1 <= beta <= 1");
  constexpr int n = kPoints;
  constexpr double h = kStep;
  const double dt = 2.0 * pi / (n * h);

  std::vector<std::complex<double>> in(n), out(n);
  for (int k = 0; k < n; ++k) {
    const double t = (k - n / 2) * dt;
    const std::complex<double> phi = std::exp(log_cf(alpha, beta, t));
    in[k] = (k % 2 == 0) ? phi : -phi;
  }
  Eigen::FFT<double> fft;
  fft.fwd(out, in);

  std::vector<double> f(n);
  for (int j = 0; j < n; ++j) {
    const double v = (dt / (2.0 * pi)) * ((j % 2 == 0) ? 1.0 : -1.0) * out[j].real();
    f[j] = std::max(v, 0.0);
  }
  const double x0 = -(n / 2) * h;

  // Cumulative integral of the cubic through neighbouring nodes.
  std::vector<double> F(n, 0.0);
  for (int j = 0; j + 1 < n; ++j) {
    const double fm = f[std::max(j - 1, 0)];
    const double fp = f[std::min(j + 2, n - 1)];
    const double seg = h * (f[j] + f[j + 1]) / 2.0 - h * (fp - f[j + 1] - f[j] + fm) / 24.0;
    F[j + 1] = F[j] + std::max(seg, 0.0);
  }
  const double total = F[n - 1];
  for (double& v : F) v /= total;

  // Only the central 90% of the grid is trusted; aliasing distorts the edges.
  lo_ = 0.9 * x0;
  hi_ = -lo_;
  tail_const_ = alpha < 2.0 ? boost::math::tgamma(alpha) * std::sin(pi * alpha / 2.0) / pi : 0.0;

  std::vector<double> slope(f.begin(), f.end());
  for (double& v : slope) v /= total;
  density_ = boost::math::interpolators::cardinal_cubic_b_spline<double>(f.data(), f.size(), x0, h);
  cdf_ = std::make_unique<boost::math::interpolators::cardinal_cubic_hermite<std::vector<double>>>(
      std::move(F), std::move(slope), x0, h);
}

double StandardGrid::tail_logpdf(double z) const {
  const double side = z > 0.0 ? 1.0 + beta_ : 1.0 - beta_;
  // N(0, 2) is the alpha = 2 member; it dominates when the Pareto term vanishes.
  const double gauss = -z * z / 4.0 - std::log(2.0 * std::sqrt(pi));
  if (tail_const_ <= 0.0 || side <= 0.0) return gauss;
  const double pareto =
      std::log(alpha_ * tail_const_ * side) - (1.0 + alpha_) * std::log(std::abs(z));
  return std::max(pareto, gauss);
}

double StandardGrid::pdf(double z) const { return std::exp(logpdf(z)); }

double StandardGrid::logpdf(double z) const {
  if (z < lo_ || z > hi_) return tail_logpdf(z);
  const double v = density_(z);
  return v > 1e-300 ? std::log(v) : tail_logpdf(z);
}

double StandardGrid::cdf(double z) const {
  if (z < lo_) {
    const double edge = std::clamp((*cdf_)(lo_), 0.0, 1.0);
    if (tail_const_ <= 0.0) return 0.0;
    return std::min(edge, tail_const_ * (1.0 - beta_) * std::pow(-z, -alpha_));
  }
  if (z > hi_) {
    const double edge = std::clamp((*cdf_)(hi_), 0.0, 1.0);
    if (tail_const_ <= 0.0) return 1.0;
    return std::max(edge, 1.0 - tail_const_ * (1.0 + beta_) * std::pow(z, -alpha_));
  }
  return std::clamp((*cdf_)(z), 0.0, 1.0);
}

double StandardGrid::quantile(double q) const {
  double a = lo_, b = hi_;
  if (cdf(a) > q) {
    a = tail_const_ > 0.0 && beta_ < 1.0 ? -std::pow(tail_const_ * (1.0 - beta_) / q, 1.0 / alpha_) : lo_;
    if (cdf(a) > q) return a;
  }
  if (cdf(b) < q) {
    b = tail_const_ > 0.0 && beta_ > -1.0 ? std::pow(tail_const_ * (1.0 + beta_) / (1.0 - q), 1.0 / alpha_)
                                           : hi_;
    if (cdf(b) < q) return b;
  }
  auto f = [&](double z) { return cdf(z) - q; };
  boost::uintmax_t max_iter = 200;
  const auto [lo, hi] = boost::math::tools::toms748_solve(
      f, a, b, boost::math::tools::eps_tolerance<double>(50), max_iter);
  return 0.5 * (lo + hi);
}

std::shared_ptr<const StandardGrid> grid_for(double alpha, double beta) {
  thread_local std::shared_ptr<const StandardGrid> last;
  if (!last || last->alpha() != alpha || last->beta() != beta)
    last = std::make_shared<const StandardGrid>(alpha, beta);
  return last;
}

// Chambers-Mallows-Stuck, followed by the S1 -> S0 shift.
double draw(double alpha, double beta, double c, double delta, Rng& rng) {
  const double v = pi * (uniform_open(rng) - 0.5);
  const double w = -std::log(uniform_open(rng));
  double z;
  if (std::abs(alpha - 1.0) < 1e-6) {
    const double pb = pi / 2.0 + beta * v;
    z = (2.0 / pi) * (pb * std::tan(v) - beta * std::log((pi / 2.0) * w * std::cos(v) / pb));
  } else {
    const double tan_term = beta * std::tan(pi * alpha / 2.0);
    const double b = std::atan(tan_term) / alpha;
    const double s = std::pow(1.0 + tan_term * tan_term, 1.0 / (2.0 * alpha));
    z = s * std::sin(alpha * (v + b)) / std::pow(std::cos(v), 1.0 / alpha) *
        std::pow(std::cos(v - alpha * (v + b)) / w, (1.0 - alpha) / alpha);
    z -= tan_term;
  }
  return c * z + delta;
}

}  // namespace firmfacts::detail::stable

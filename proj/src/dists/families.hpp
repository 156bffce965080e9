// Per-family kernels behind the public dists.hpp dispatch.
#ifndef FIRMFACTS_SRC_DISTS_FAMILIES_HPP
#define FIRMFACTS_SRC_DISTS_FAMILIES_HPP

#include <boost/math/interpolators/cardinal_cubic_b_spline.hpp>
#include <boost/math/interpolators/cubic_hermite.hpp>

#include <memory>
#include <vector>

#include "firmfacts/dists.hpp"
#include "firmfacts/random.hpp"

namespace firmfacts::detail {

namespace skew_normal {
double logpdf(double xi, double omega, double alpha, double x);
double cdf(double xi, double omega, double alpha, double x);
double quantile(double xi, double omega, double alpha, double q);
double draw(double xi, double omega, double alpha, Rng& rng, NormalSource& normal);
}  // namespace skew_normal

namespace dln {

struct Params {
  double mu_p, sigma_p, mu_n, sigma_n;
};

/// Adaptive Gauss-Kronrod evaluation of the convolution integral.
double logpdf(const Params& p, double w);
double cdf(const Params& p, double w);
double quantile(const Params& p, double q);

/// log f(w) and F(w) tabulated on a grid uniform in asinh(w / s0) and
/// interpolated with cubic splines. Node values come from fixed-order
/// Gauss-Legendre rules, so the table is smooth in the parameters.
class Table {
 public:
  Table(const Params& p, double lo, double hi, int nodes, bool with_cdf);
  double logpdf(double w) const;
  double cdf(double w) const;

 private:
  double to_grid(double w) const { return std::asinh(w / s0_); }
  double s0_;
  double y0_, dy_;
  boost::math::interpolators::cardinal_cubic_b_spline<double> log_density_;
  std::unique_ptr<boost::math::interpolators::cardinal_cubic_hermite<std::vector<double>>> cdf_;
};

/// Node evaluations used by Table; exposed for testing.
double logpdf_fixed(const Params& p, double w);
double cdf_fixed(const Params& p, double w);

}  // namespace dln

namespace stable {

/// Density and distribution function of the standardised S0 law
/// (c = 1, delta = 0) on an FFT grid.
class StandardGrid {
 public:
  StandardGrid(double alpha, double beta);
  double alpha() const { return alpha_; }
  double beta() const { return beta_; }
  double pdf(double z) const;
  double logpdf(double z) const;
  double cdf(double z) const;
  double quantile(double q) const;

  static constexpr int kPoints = 1 << 14;
  static constexpr double kStep = 0.02;

 private:
  double tail_logpdf(double z) const;
  double alpha_, beta_;
  double lo_, hi_;
  double tail_const_;
  boost::math::interpolators::cardinal_cubic_b_spline<double> density_;
  std::unique_ptr<boost::math::interpolators::cardinal_cubic_hermite<std::vector<double>>> cdf_;
};

/// Per-thread single-entry cache keyed on (alpha, beta).
std::shared_ptr<const StandardGrid> grid_for(double alpha, double beta);

double draw(double alpha, double beta, double c, double delta, Rng& rng);

}  // namespace stable

}  // namespace firmfacts::detail

#endif  // FIRMFACTS_SRC_DISTS_FAMILIES_HPP

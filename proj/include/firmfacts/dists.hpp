#ifndef FIRMFACTS_DISTS_HPP
#define FIRMFACTS_DISTS_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "firmfacts/stats.hpp"

namespace firmfacts {

enum class Family { Normal, SkewNormal, Laplace, Stable, DLN };

inline constexpr Family kAllFamilies[] = {Family::Normal, Family::SkewNormal, Family::Laplace,
                                          Family::Stable, Family::DLN};

std::string_view family_name(Family f);
/// Case-insensitive; accepts "normal", "skewnormal"/"skew-normal"/"sn",
/// "laplace", "stable", "dln". Throws ConfigError otherwise.
Family parse_family(std::string_view name);
Index parameter_count(Family f);

/// Parameters of one family, validated on construction.
///
///   Normal      (mu, sigma)
///   SkewNormal  (xi location, omega scale, alpha shape)
///   Laplace     (mu, b)
///   Stable      (alpha, beta, c, delta), Nolan S0 parameterisation,
///               0.5 < alpha <= 2
///   DLN         (mu_p, sigma_p, mu_n, sigma_n); W = Yp - Yn with
///               independent Yp ~ logN(mu_p, sigma_p), Yn ~ logN(mu_n, sigma_n)
class ParamVector {
 public:
  ParamVector(Family family, VectorXd values);

  static ParamVector normal(double mu, double sigma);
  static ParamVector skew_normal(double xi, double omega, double alpha);
  static ParamVector laplace(double mu, double b);
  static ParamVector stable(double alpha, double beta, double c, double delta);
  static ParamVector dln(double mu_p, double sigma_p, double mu_n, double sigma_n);

  Family family() const noexcept { return family_; }
  const VectorXd& values() const noexcept { return values_; }
  double operator[](Index i) const { return values_(i); }
  Index size() const noexcept { return values_.size(); }

  std::string to_string() const;
  std::vector<std::string> names() const;

 private:
  Family family_;
  VectorXd values_;
};

enum class FitMethod { MLE, LAD };

struct FitResult {
  ParamVector params;
  double loglik = 0.0;
  Index n = 0;
  FitMethod method = FitMethod::MLE;
  bool converged = false;
  int iterations = 0;
  std::string diagnostics;
};

double logpdf(const ParamVector& p, double x);
double pdf(const ParamVector& p, double x);
double cdf(const ParamVector& p, double x);
/// Throws DomainError unless 0 < q < 1.
double quantile(const ParamVector& p, double q);
VectorXd sample(const ParamVector& p, Index n, std::uint64_t seed);

/// Mean, sd, skewness and (non-excess) kurtosis. Throws UndefinedMomentError
/// for a Stable law whose requested moments do not exist.
Moments moments(const ParamVector& p);
/// Mean only; defined for Stable when alpha > 1.
double mean(const ParamVector& p);

/// Vectorised evaluation. The Stable and DLN families evaluate through a
/// tabulated, spline-interpolated representation over the range of `x`;
/// the scalar overloads use direct quadrature.
VectorXd logpdf(const ParamVector& p, const VecRef& x);
VectorXd cdf(const ParamVector& p, const VecRef& x);
double loglik(const ParamVector& p, const VecRef& x);

/// Maximum likelihood fit. `start` overrides the default initialisation.
FitResult fit_mle(Family family, const VecRef& data,
                  const std::optional<ParamVector>& start = std::nullopt);

/// Robust fit for Normal and Laplace: location is the sample median and the
/// dispersion parameter is sample IQR over the family's unit-parameter IQR.
FitResult fit_lad(Family family, const VecRef& data);

/// Interquartile range of the family at unit dispersion (Normal: 1.3490).
double unit_iqr(Family family);

}  // namespace firmfacts

#endif  // FIRMFACTS_DISTS_HPP

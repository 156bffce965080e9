// Gaussian helpers shared by the distribution families.
#ifndef FIRMFACTS_SRC_DISTS_SPECIAL_HPP
#define FIRMFACTS_SRC_DISTS_SPECIAL_HPP

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <numbers>

namespace firmfacts::detail {

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // log(sqrt(2 pi))

inline double log_normal_pdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

inline double ndtr(double z) { return 0.5 * std::erfc(-z * std::numbers::sqrt2 / 2.0); }

/// log Phi(z), accurate in the far left tail.
inline double log_ndtr(double z) {
  if (z > -20.0) return std::log(ndtr(z));
  // Asymptotic series of the Mills ratio.
  const double z2 = z * z;
  const double series = 1.0 - 1.0 / z2 + 3.0 / (z2 * z2) - 15.0 / (z2 * z2 * z2);
  return -0.5 * z2 - std::log(-z) - kLogSqrt2Pi + std::log(series);
}

/// phi(z) / Phi(z).
inline double inverse_mills(double z) { return std::exp(log_normal_pdf(z) - log_ndtr(z)); }

inline double ndtri(double p) {
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

}  // namespace firmfacts::detail

#endif  // FIRMFACTS_SRC_DISTS_SPECIAL_HPP

#include "firmfacts/dists.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <numbers>
#include <sstream>

#include "families.hpp"
#include "special.hpp"

namespace firmfacts {

using std::numbers::pi;

std::string_view family_name(Family f) {
  switch (f) {
    case Family::Normal: return "Normal";
    case Family::SkewNormal: return "SkewNormal";
    case Family::Laplace: return "Laplace";
    case Family::Stable: return "Stable";
    case Family::DLN: return "DLN";
  }
  return "?";
}

Family parse_family(std::string_view name) {
  std::string s;
  for (char c : name)
    if (c != '-' && c != '_') s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (s == "normal" || s == "n") return Family::Normal;
  if (s == "skewnormal" || s == "sn") return Family::SkewNormal;
  if (s == "laplace") return Family::Laplace;
  if (s == "stable") return Family::Stable;
  if (s == "dln") return Family::DLN;
  throw ConfigError("unknown distribution family '" + std::string(name) + "'");
}

Index parameter_count(Family f) {
  switch (f) {
    case Family::Normal:
    case Family::Laplace: return 2;
    case Family::SkewNormal: return 3;
    case Family::Stable:
    case Family::DLN: return 4;
  }
  return 0;
}

ParamVector::ParamVector(Family family, VectorXd values) : family_(family), values_(std::move(values)) {
  if (values_.size() != parameter_count(family_))
    throw ParameterDomainError(std::string(family_name(family_)) + ": wrong parameter count");
  if (!values_.allFinite())
    throw ParameterDomainError(std::string(family_name(family_)) + ": non-finite parameter");
  const auto& v = values_;
  bool ok = true;
  switch (family_) {
    case Family::Normal:
    case Family::Laplace: ok = v(1) > 0.0; break;
    case Family::SkewNormal: ok = v(1) > 0.0; break;
    case Family::Stable: ok = v(0) > 0.5 && v(0) <= 2.0 && v(1) >= -1.0 && v(1) <= 1.0 && v(2) > 0.0; break;
    case Family::DLN: ok = v(1) > 0.0 && v(3) > 0.0; break;
  }
  if (!ok) throw ParameterDomainError("invalid parameters " + to_string());
}

ParamVector ParamVector::normal(double mu, double sigma) {
  return {Family::Normal, (VectorXd(2) << mu, sigma).finished()};
}
ParamVector ParamVector::skew_normal(double xi, double omega, double alpha) {
  return {Family::SkewNormal, (VectorXd(3) << xi, omega, alpha).finished()};
}
ParamVector ParamVector::laplace(double mu, double b) {
  return {Family::Laplace, (VectorXd(2) << mu, b).finished()};
}
ParamVector ParamVector::stable(double alpha, double beta, double c, double delta) {
  return {Family::Stable, (VectorXd(4) << alpha, beta, c, delta).finished()};
}
ParamVector ParamVector::dln(double mu_p, double sigma_p, double mu_n, double sigma_n) {
  return {Family::DLN, (VectorXd(4) << mu_p, sigma_p, mu_n, sigma_n).finished()};
}

std::vector<std::string> ParamVector::names() const {
  switch (family_) {
    case Family::Normal: return {"mu", "sigma"};
    case Family::SkewNormal: return {"xi", "omega", "alpha"};
    case Family::Laplace: return {"mu", "b"};
    case Family::Stable: return {"alpha", "beta", "c", "delta"};
    case Family::DLN: return {"mu_p", "sigma_p", "mu_n", "sigma_n"};
  }
  return {};
}

std::string ParamVector::to_string() const {
  std::ostringstream os;
  os << family_name(family_) << '(';
  for (Index i = 0; i < values_.size(); ++i) os << (i ? ", " : "") << values_(i);
  os << ')';
  return os.str();
}

namespace {

detail::dln::Params dln_params(const ParamVector& p) { return {p[0], p[1], p[2], p[3]}; }

}  // namespace

double logpdf(const ParamVector& p, double x) {
  switch (p.family()) {
    case Family::Normal: return detail::log_normal_pdf((x - p[0]) / p[1]) - std::log(p[1]);
    case Family::SkewNormal: return detail::skew_normal::logpdf(p[0], p[1], p[2], x);
    case Family::Laplace: return -std::log(2.0 * p[1]) - std::abs(x - p[0]) / p[1];
    case Family::Stable:
      return detail::stable::grid_for(p[0], p[1])->logpdf((x - p[3]) / p[2]) - std::log(p[2]);
    case Family::DLN: return detail::dln::logpdf(dln_params(p), x);
  }
  return 0.0;
}

double pdf(const ParamVector& p, double x) { return std::exp(logpdf(p, x)); }

double cdf(const ParamVector& p, double x) {
  switch (p.family()) {
    case Family::Normal: return detail::ndtr((x - p[0]) / p[1]);
    case Family::SkewNormal: return detail::skew_normal::cdf(p[0], p[1], p[2], x);
    case Family::Laplace: {
      const double z = (x - p[0]) / p[1];
      return z < 0.0 ? 0.5 * std::exp(z) : 1.0 - 0.5 * std::exp(-z);
    }
    case Family::Stable: return detail::stable::grid_for(p[0], p[1])->cdf((x - p[3]) / p[2]);
    case Family::DLN: return detail::dln::cdf(dln_params(p), x);
  }
  return 0.0;
}

double quantile(const ParamVector& p, double q) {
  if (!(q > 0.0 && q < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
  switch (p.family()) {
    case Family::Normal: return p[0] + p[1] * detail::ndtri(q);
    case Family::SkewNormal: return detail::skew_normal::quantile(p[0], p[1], p[2], q);
    case Family::Laplace:
      return q < 0.5 ? p[0] + p[1] * std::log(2.0 * q) : p[0] - p[1] * std::log(2.0 * (1.0 - q));
    case Family::Stable: return p[3] + p[2] * detail::stable::grid_for(p[0], p[1])->quantile(q);
    case Family::DLN: return detail::dln::quantile(dln_params(p), q);
  }
  return 0.0;
}

VectorXd sample(const ParamVector& p, Index n, std::uint64_t seed) {
  if (n < 1) throw SampleSizeError("sample size must be at least 1");
  Rng rng = make_rng(seed);
  NormalSource normal;
  VectorXd out(n);
  switch (p.family()) {
    case Family::Normal:
      for (Index i = 0; i < n; ++i) out(i) = p[0] + p[1] * normal(rng);
      break;
    case Family::SkewNormal:
      for (Index i = 0; i < n; ++i) out(i) = detail::skew_normal::draw(p[0], p[1], p[2], rng, normal);
      break;
    case Family::Laplace:
      for (Index i = 0; i < n; ++i) {
        const double u = uniform_open(rng) - 0.5;
        out(i) = p[0] - p[1] * (u < 0.0 ? -1.0 : 1.0) * std::log1p(-2.0 * std::abs(u));
      }
      break;
    case Family::Stable:
      for (Index i = 0; i < n; ++i) out(i) = detail::stable::draw(p[0], p[1], p[2], p[3], rng);
      break;
    case Family::DLN:
      for (Index i = 0; i < n; ++i) {
        const double yp = std::exp(p[0] + p[1] * normal(rng));
        const double yn = std::exp(p[2] + p[3] * normal(rng));
        out(i) = yp - yn;
      }
      break;
  }
  return out;
}

double mean(const ParamVector& p) {
  switch (p.family()) {
    case Family::Normal:
    case Family::Laplace: return p[0];
    case Family::SkewNormal: {
      const double delta = p[2] / std::sqrt(1.0 + p[2] * p[2]);
      return p[0] + p[1] * delta * std::sqrt(2.0 / pi);
    }
    case Family::Stable:
      if (p[0] <= 1.0) throw UndefinedMomentError("stable mean undefined for alpha <= 1");
      return p[3] - p[1] * p[2] * std::tan(pi * p[0] / 2.0);
    case Family::DLN:
      return std::exp(p[0] + p[1] * p[1] / 2.0) - std::exp(p[2] + p[3] * p[3] / 2.0);
  }
  return 0.0;
}

namespace {

// Cumulants 2..4 of a log-normal from its raw moments exp(k mu + k^2 s^2 / 2).
std::array<double, 3> lognormal_cumulants(double mu, double s) {
  auto raw = [&](int k) { return std::exp(k * mu + k * k * s * s / 2.0); };
  const double m1 = raw(1), m2 = raw(2), m3 = raw(3), m4 = raw(4);
  const double k2 = m2 - m1 * m1;
  const double k3 = m3 - 3.0 * m2 * m1 + 2.0 * m1 * m1 * m1;
  const double c4 = m4 - 4.0 * m3 * m1 + 6.0 * m2 * m1 * m1 - 3.0 * m1 * m1 * m1 * m1;
  return {k2, k3, c4 - 3.0 * k2 * k2};
}

}  // namespace

Moments moments(const ParamVector& p) {
  Moments m;
  m.mean = mean(p);
  switch (p.family()) {
    case Family::Normal:
      m.sd = p[1];
      m.kurtosis = 3.0;
      break;
    case Family::Laplace:
      m.sd = p[1] * std::numbers::sqrt2;
      m.kurtosis = 6.0;
      break;
    case Family::SkewNormal: {
      const double delta = p[2] / std::sqrt(1.0 + p[2] * p[2]);
      const double bd = delta * std::sqrt(2.0 / pi);
      const double v = 1.0 - bd * bd;
      m.sd = p[1] * std::sqrt(v);
      m.skewness = (4.0 - pi) / 2.0 * bd * bd * bd / std::pow(v, 1.5);
      m.kurtosis = 3.0 + 2.0 * (pi - 3.0) * bd * bd * bd * bd / (v * v);
      break;
    }
    case Family::Stable:
      if (p[0] < 2.0) throw UndefinedMomentError("stable variance undefined for alpha < 2");
      m.sd = p[2] * std::numbers::sqrt2;
      m.kurtosis = 3.0;
      break;
    case Family::DLN: {
      // Cumulants add over independent terms; odd ones flip sign for -Yn.
      const auto kp = lognormal_cumulants(p[0], p[1]);
      const auto kn = lognormal_cumulants(p[2], p[3]);
      const double k2 = kp[0] + kn[0], k3 = kp[1] - kn[1], k4 = kp[2] + kn[2];
      m.sd = std::sqrt(k2);
      m.skewness = k3 / std::pow(k2, 1.5);
      m.kurtosis = 3.0 + k4 / (k2 * k2);
      break;
    }
  }
  return m;
}

namespace {

constexpr int kTableNodes = 600;

std::pair<double, double> finite_range(const VecRef& x) {
  if (x.size() == 0) return {0.0, 0.0};
  return {x.minCoeff(), x.maxCoeff()};
}

}  // namespace

VectorXd logpdf(const ParamVector& p, const VecRef& x) {
  VectorXd out(x.size());
  if (p.family() == Family::DLN && x.size() > 64) {
    const auto [lo, hi] = finite_range(x);
    const detail::dln::Table table(dln_params(p), lo, hi, kTableNodes, false);
    for (Index i = 0; i < x.size(); ++i) out(i) = table.logpdf(x(i));
    return out;
  }
  if (p.family() == Family::Stable) {
    const auto grid = detail::stable::grid_for(p[0], p[1]);
    const double log_c = std::log(p[2]);
    for (Index i = 0; i < x.size(); ++i) out(i) = grid->logpdf((x(i) - p[3]) / p[2]) - log_c;
    return out;
  }
  for (Index i = 0; i < x.size(); ++i) out(i) = logpdf(p, x(i));
  return out;
}

VectorXd cdf(const ParamVector& p, const VecRef& x) {
  VectorXd out(x.size());
  if (p.family() == Family::DLN && x.size() > 64) {
    const auto [lo, hi] = finite_range(x);
    const detail::dln::Table table(dln_params(p), lo, hi, kTableNodes, true);
    for (Index i = 0; i < x.size(); ++i) out(i) = table.cdf(x(i));
    return out;
  }
  if (p.family() == Family::Stable) {
    const auto grid = detail::stable::grid_for(p[0], p[1]);
    for (Index i = 0; i < x.size(); ++i) out(i) = grid->cdf((x(i) - p[3]) / p[2]);
    return out;
  }
  for (Index i = 0; i < x.size(); ++i) out(i) = cdf(p, x(i));
  return out;
}

double loglik(const ParamVector& p, const VecRef& x) { return logpdf(p, x).sum(); }

double unit_iqr(Family family) {
  switch (family) {
    case Family::Normal: return 2.0 * detail::ndtri(0.75);
    case Family::Laplace: return 2.0 * std::numbers::ln2;
    default: throw UnsupportedMethodError(std::string(family_name(family)) + ": no unit IQR convention");
  }
}

}  // namespace firmfacts

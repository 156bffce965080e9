#include <algorithm>
#include <cmath>
#include <numbers>

#include "families.hpp"
#include "special.hpp"
#include "../optim.hpp"

namespace firmfacts {
namespace {

using std::numbers::pi;

void check_sample(Family family, const VecRef& data, Index min_n) {
  if (data.size() < min_n)
    throw SampleSizeError(std::string(family_name(family)) + " fit needs at least " + std::to_string(min_n) +
                          " observations");
  if (!data.allFinite()) throw DomainError("fit: data contain non-finite values");
  if (data.minCoeff() == data.maxCoeff()) throw DegenerateSampleError("fit: all observations are equal");
}

FitResult closed_form(ParamVector p, const VecRef& data, FitMethod method) {
  FitResult r{std::move(p)};
  r.loglik = loglik(r.params, data);
  r.n = data.size();
  r.method = method;
  r.converged = std::isfinite(r.loglik);
  return r;
}

// --- skew-normal -------------------------------------------------------------

ParamVector skew_normal_moment_start(const VecRef& x) {
  const Moments m = sample_moments(x);
  const double b = std::sqrt(2.0 / pi);
  const double g = std::clamp(m.skewness, -0.99, 0.99);
  const double r = std::cbrt(2.0 * std::abs(g) / (4.0 - pi));
  double delta = std::copysign(r / (b * std::sqrt(1.0 + r * r)), g);
  delta = std::clamp(delta, -0.99, 0.99);
  const double alpha = delta / std::sqrt(1.0 - delta * delta);
  const double omega = m.sd / std::sqrt(1.0 - b * b * delta * delta);
  return ParamVector::skew_normal(m.mean - omega * b * delta, omega, alpha);
}

struct SnDerivs {
  double value = 0.0;
  Eigen::Vector3d grad = Eigen::Vector3d::Zero();
  Eigen::Matrix3d hess = Eigen::Matrix3d::Zero();
};

// Log-likelihood in (xi, eta = log omega, alpha) with analytic derivatives.
SnDerivs skew_normal_derivs(const VecRef& x, const Eigen::Vector3d& t) {
  const double xi = t(0), eta = t(1), alpha = t(2);
  const double inv_w = std::exp(-eta);
  SnDerivs d;
  double gz_sum = 0, gzz_sum = 0, gzz_z = 0, gz_z = 0, gzz_z2 = 0, ga = 0, gaa = 0, gza = 0, gza_z = 0;
  for (Index i = 0; i < x.size(); ++i) {
    const double z = (x(i) - xi) * inv_w;
    const double u = alpha * z;
    const double r = detail::inverse_mills(u);
    const double rp = -r * (u + r);
    d.value += detail::log_normal_pdf(z) + detail::log_ndtr(u);
    const double g_z = -z + alpha * r;
    const double g_zz = -1.0 + alpha * alpha * rp;
    const double g_a = z * r;
    const double g_aa = z * z * rp;
    const double g_za = r + u * rp;
    gz_sum += g_z;
    gzz_sum += g_zz;
    gzz_z += g_zz * z;
    gz_z += g_z * z;
    gzz_z2 += g_zz * z * z;
    ga += g_a;
    gaa += g_aa;
    gza += g_za;
    gza_z += g_za * z;
  }
  const double n = static_cast<double>(x.size());
  d.value += n * (std::numbers::ln2 - eta);
  d.grad << -inv_w * gz_sum, -n - gz_z, ga;
  d.hess(0, 0) = inv_w * inv_w * gzz_sum;
  d.hess(0, 1) = d.hess(1, 0) = inv_w * (gzz_z + gz_sum);
  d.hess(1, 1) = gzz_z2 + gz_z;
  d.hess(0, 2) = d.hess(2, 0) = -inv_w * gza;
  d.hess(1, 2) = d.hess(2, 1) = -gza_z;
  d.hess(2, 2) = gaa;
  return d;
}

FitResult fit_skew_normal(const VecRef& x, const std::optional<ParamVector>& start) {
  const ParamVector p0 = start ? *start : skew_normal_moment_start(x);
  Eigen::Vector3d t(p0[0], std::log(p0[1]), p0[2]);
  SnDerivs cur = skew_normal_derivs(x, t);
  const double n = static_cast<double>(x.size());
  double lambda = 1e-3;
  FitResult r{p0};
  r.method = FitMethod::MLE;
  r.n = x.size();
  int it = 0;
  for (; it < 200; ++it) {
    if (cur.grad.lpNorm<Eigen::Infinity>() < 1e-9 * n) {
      r.converged = true;
      break;
    }
    // Levenberg-damped Newton step on the negative log-likelihood.
    Eigen::Matrix3d a = -cur.hess;
    const Eigen::Vector3d diag = a.diagonal().cwiseAbs().cwiseMax(1e-8 * n);
    bool improved = false;
    for (int tries = 0; tries < 30 && !improved; ++tries) {
      Eigen::Matrix3d damped = a;
      damped.diagonal() += lambda * diag;
      const Eigen::Vector3d step = damped.ldlt().solve(cur.grad);
      const Eigen::Vector3d cand = t + step;
      if (!cand.allFinite() || std::abs(cand(2)) > 1e4) {
        lambda *= 10.0;
        continue;
      }
      const SnDerivs next = skew_normal_derivs(x, cand);
      if (std::isfinite(next.value) && next.value >= cur.value - 1e-12 * n) {
        const bool tiny = step.lpNorm<Eigen::Infinity>() < 1e-12;
        t = cand;
        cur = next;
        lambda = std::max(lambda / 10.0, 1e-12);
        improved = true;
        if (tiny) r.converged = true;
      } else {
        lambda *= 10.0;
      }
    }
    if (!improved || r.converged) {
      r.converged = r.converged || cur.grad.lpNorm<Eigen::Infinity>() < 1e-6 * n;
      break;
    }
  }
  r.iterations = it;
  r.params = ParamVector::skew_normal(t(0), std::exp(t(1)), t(2));
  r.loglik = cur.value;
  if (!r.converged) r.diagnostics = "Newton iterations stalled; gradient " + std::to_string(cur.grad.norm());
  return r;
}

// --- DLN ---------------------------------------------------------------------

ParamVector dln_default_start(const VecRef& x) {
  std::vector<double> lp, ln;
  for (Index i = 0; i < x.size(); ++i) {
    if (x(i) > 0.0) lp.push_back(std::log(x(i)));
    else if (x(i) < 0.0) ln.push_back(std::log(-x(i)));
  }
  auto fit_log = [](const std::vector<double>& v, double& mu, double& s) {
    const Eigen::Map<const VectorXd> m(v.data(), static_cast<Index>(v.size()));
    mu = m.mean();
    s = v.size() > 1 ? std::sqrt((m.array() - mu).square().sum() / (v.size() - 1)) : 1.0;
    if (!(s > 1e-3)) s = 1.0;
  };
  const double share_neg = static_cast<double>(ln.size()) / x.size();
  const double share_pos = static_cast<double>(lp.size()) / x.size();
  double mp = 0, sp = 1, mn = 0, sn = 1;
  if (share_neg < 0.01) {
    fit_log(lp, mp, sp);
    mn = mp - 3.0;
    sn = sp;
  } else if (share_pos < 0.01) {
    fit_log(ln, mn, sn);
    mp = mn - 3.0;
    sp = sn;
  } else {
    fit_log(lp, mp, sp);
    fit_log(ln, mn, sn);
  }
  return ParamVector::dln(mp, sp, mn, sn);
}

FitResult fit_dln(const VecRef& x, const std::optional<ParamVector>& start) {
  const ParamVector p0 = start ? *start : dln_default_start(x);
  const double lo = x.minCoeff(), hi = x.maxCoeff();
  const double n = static_cast<double>(x.size());
  auto objective = [&](const VectorXd& t) {
    const detail::dln::Params p{t(0), std::exp(t(1)), t(2), std::exp(t(3))};
    const detail::dln::Table table(p, lo, hi, 600, false);
    double s = 0.0;
    for (Index i = 0; i < x.size(); ++i) s += table.logpdf(x(i));
    return -s / n;
  };
  VectorXd t0(4);
  t0 << p0[0], std::log(p0[1]), p0[2], std::log(p0[3]);
  detail::BfgsOptions opt;
  opt.gradient_tol = 1e-8;
  auto res = detail::minimize_bfgs(objective, t0, opt);
  FitResult r{ParamVector::dln(res.x(0), std::exp(res.x(1)), res.x(2), std::exp(res.x(3)))};
  r.method = FitMethod::MLE;
  r.n = x.size();
  r.iterations = res.iterations;
  r.converged = res.converged && std::isfinite(res.value);
  r.loglik = -res.value * n;
  if (!r.converged) r.diagnostics = "DLN optimiser: " + res.message;
  return r;
}

// --- Stable ------------------------------------------------------------------

constexpr double kStableAlphaMin = 0.5;

double logistic(double a) { return 1.0 / (1.0 + std::exp(-a)); }
double logit(double p) { return std::log(p / (1.0 - p)); }

ParamVector stable_from_unconstrained(const VectorXd& t) {
  return ParamVector::stable(kStableAlphaMin + (2.0 - kStableAlphaMin) * logistic(t(0)), std::tanh(t(1)),
                             std::exp(t(2)), t(3));
}

VectorXd stable_to_unconstrained(const ParamVector& p) {
  const double a = std::clamp((p[0] - kStableAlphaMin) / (2.0 - kStableAlphaMin), 1e-6, 1.0 - 1e-6);
  VectorXd t(4);
  t << logit(a), std::atanh(std::clamp(p[1], -0.999999, 0.999999)), std::log(p[2]), p[3];
  return t;
}

// Quantile matching at five probability levels, normalised by the sample IQR.
ParamVector stable_quantile_start(const VecRef& x) {
  const VectorXd s = sorted_copy(x);
  constexpr double levels[] = {0.05, 0.25, 0.5, 0.75, 0.95};
  VectorXd target(5);
  for (int i = 0; i < 5; ++i) target(i) = quantile_sorted(s, levels[i]);
  const double spread = std::max(target(3) - target(1), 1e-12);
  auto objective = [&](const VectorXd& t) {
    const ParamVector p = stable_from_unconstrained(t);
    const auto grid = detail::stable::grid_for(p[0], p[1]);
    double err = 0.0;
    for (int i = 0; i < 5; ++i) {
      const double q = p[3] + p[2] * grid->quantile(levels[i]);
      err += std::pow((q - target(i)) / spread, 2);
    }
    return err;
  };
  const ParamVector guess = ParamVector::stable(1.5, 0.0, spread / 2.0, target(2));
  detail::NelderMeadOptions opt;
  opt.max_iterations = 400;
  opt.value_tol = 1e-8;
  opt.step = 0.5;
  const auto res = detail::minimize_nelder_mead(objective, stable_to_unconstrained(guess), opt);
  return stable_from_unconstrained(res.x);
}

FitResult fit_stable(const VecRef& x, const std::optional<ParamVector>& start) {
  const ParamVector p0 = start ? *start : stable_quantile_start(x);
  const double n = static_cast<double>(x.size());
  auto objective = [&](const VectorXd& t) { return -loglik(stable_from_unconstrained(t), x) / n; };
  detail::BfgsOptions opt;
  opt.gradient_tol = 1e-7;
  opt.max_iterations = 150;
  const auto res = detail::minimize_bfgs(objective, stable_to_unconstrained(p0), opt);
  FitResult r{stable_from_unconstrained(res.x)};
  r.method = FitMethod::MLE;
  r.n = x.size();
  r.iterations = res.iterations;
  r.converged = res.converged && std::isfinite(res.value);
  r.loglik = -res.value * n;
  if (!r.converged) r.diagnostics = "Stable optimiser: " + res.message;
  return r;
}

}  // namespace

FitResult fit_mle(Family family, const VecRef& data, const std::optional<ParamVector>& start) {
  check_sample(family, data, 5 * parameter_count(family));
  if (start && start->family() != family) throw ConfigError("fit_mle: start parameters of a different family");
  switch (family) {
    case Family::Normal: {
      const double mu = data.mean();
      const double sigma = std::sqrt((data.array() - mu).square().mean());
      return closed_form(ParamVector::normal(mu, sigma), data, FitMethod::MLE);
    }
    case Family::Laplace: {
      const double mu = median(data);
      const double b = (data.array() - mu).abs().mean();
      return closed_form(ParamVector::laplace(mu, b), data, FitMethod::MLE);
    }
    case Family::SkewNormal: return fit_skew_normal(data, start);
    case Family::Stable: return fit_stable(data, start);
    case Family::DLN: return fit_dln(data, start);
  }
  throw UnsupportedMethodError("fit_mle: unknown family");
}

FitResult fit_lad(Family family, const VecRef& data) {
  if (family != Family::Normal && family != Family::Laplace)
    throw UnsupportedMethodError(std::string(family_name(family)) + ": LAD fit supports Normal and Laplace only");
  // median and IQR need no more than a handful of points
  check_sample(family, data, 5);
  const VectorXd s = sorted_copy(data);
  const double loc = quantile_sorted(s, 0.5);
  const double spread = iqr_sorted(s);
  if (!(spread > 0.0)) throw DegenerateSampleError("fit_lad: sample IQR is zero");
  const double scale = spread / unit_iqr(family);
  ParamVector p = family == Family::Normal ? ParamVector::normal(loc, scale) : ParamVector::laplace(loc, scale);
  return closed_form(std::move(p), data, FitMethod::LAD);
}

}  // namespace firmfacts

#include "firmfacts/gof.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "firmfacts/errors.hpp"
#include "firmfacts/parallel.hpp"
#include "firmfacts/random.hpp"

namespace firmfacts {

double ks_from_sorted_pit(const VecRef& u) {
  const Index n = u.size();
  if (n == 0) throw SampleSizeError("ks_stat: empty sample");
  double d = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double upper = static_cast<double>(i + 1) / n - u(i);
    const double lower = u(i) - static_cast<double>(i) / n;
    d = std::max({d, upper, lower});
  }
  return d;
}

double chi2_from_pit(const VecRef& u, int bins) {
  if (bins < 2) throw ConfigError("chi2_binned: need at least 2 bins");
  const Index n = u.size();
  if (n < 5 * static_cast<Index>(bins))
    throw SampleSizeError("chi2_binned: need at least " + std::to_string(5 * bins) + " observations for " +
                          std::to_string(bins) + " bins");
  std::vector<Index> counts(bins, 0);
  for (Index i = 0; i < n; ++i) {
    const int k = static_cast<int>(std::floor(u(i) * bins));
    ++counts[std::clamp(k, 0, bins - 1)];
  }
  const double expected = static_cast<double>(n) / bins;
  double s = 0.0;
  for (Index c : counts) s += (c - expected) * (c - expected);
  return s / expected;
}

double ad_from_sorted_pit(const VecRef& u) {
  const Index n = u.size();
  if (n == 0) throw SampleSizeError("ad_stat: empty sample");
  constexpr double eps = 1e-12;
  double s = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double lo = std::clamp(u(i), eps, 1.0 - eps);
    const double hi = std::clamp(u(n - 1 - i), eps, 1.0 - eps);
    s += (2.0 * i + 1.0) * (std::log(lo) + std::log1p(-hi));
  }
  return -static_cast<double>(n) - s / n;
}

namespace {

VectorXd sorted_pit(const VecRef& data, const ParamVector& p) {
  if (!data.allFinite()) throw DomainError("goodness of fit: data contain non-finite values");
  VectorXd u = cdf(p, data);
  std::sort(u.data(), u.data() + u.size());
  return u;
}

}  // namespace

double ks_stat(const VecRef& data, const ParamVector& p) { return ks_from_sorted_pit(sorted_pit(data, p)); }

double chi2_binned(const VecRef& data, const ParamVector& p, int bins) {
  if (data.size() < 5 * static_cast<Index>(bins))
    throw SampleSizeError("chi2_binned: need at least " + std::to_string(5 * bins) + " observations");
  return chi2_from_pit(cdf(p, data), bins);
}

double ad_stat(const VecRef& data, const ParamVector& p) { return ad_from_sorted_pit(sorted_pit(data, p)); }

double GofStatistics::get(GofTest t) const {
  switch (t) {
    case GofTest::KS: return ks;
    case GofTest::ChiSquared: return chi2;
    case GofTest::AndersonDarling: return ad;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

GofStatistics gof_statistics(const VecRef& data, const ParamVector& p, int bins) {
  const VectorXd u = sorted_pit(data, p);
  return {ks_from_sorted_pit(u), chi2_from_pit(u, bins), ad_from_sorted_pit(u)};
}

BootstrapResult bootstrap(const VecRef& data, const ParamVector& fitted, const BootstrapOptions& opt) {
  if (opt.reps < 200) throw ConfigError("bootstrap: reps must be at least 200");
  BootstrapResult r;
  r.observed = gof_statistics(data, fitted, opt.bins);
  const Index n = data.size();
  std::vector<GofStatistics> reps(opt.reps);
  std::vector<char> ok(opt.reps, 0);
  parallel_for(static_cast<std::size_t>(opt.reps), [&](std::size_t i) {
    try {
      const VectorXd x = sample(fitted, n, stream_seed(opt.seed, i));
      const FitResult f = fit_mle(fitted.family(), x, fitted);
      if (!f.converged) return;
      reps[i] = gof_statistics(x, f.params, opt.bins);
      ok[i] = 1;
    } catch (const Error&) {
    }
  });
  Index exceed_ks = 0, exceed_chi2 = 0, exceed_ad = 0;
  for (int i = 0; i < opt.reps; ++i) {
    if (!ok[i]) {
      ++r.failed_refits;
      continue;
    }
    exceed_ks += reps[i].ks >= r.observed.ks;
    exceed_chi2 += reps[i].chi2 >= r.observed.chi2;
    exceed_ad += reps[i].ad >= r.observed.ad;
  }
  if (r.failed_refits * 10 > opt.reps)
    throw CalibrationError(std::to_string(r.failed_refits) + " of " + std::to_string(opt.reps) +
                           " bootstrap refits failed for " + std::string(family_name(fitted.family())));
  r.reps = opt.reps - r.failed_refits;
  const double denom = r.reps + 1.0;
  r.pvalue_ks = (1.0 + exceed_ks) / denom;
  r.pvalue_chi2 = (1.0 + exceed_chi2) / denom;
  r.pvalue_ad = (1.0 + exceed_ad) / denom;
  return r;
}

double bootstrap_pvalue(GofTest test, const VecRef& data, Family family, int reps, std::uint64_t seed) {
  if (reps < 200) throw ConfigError("bootstrap_pvalue: reps must be at least 200");
  const FitResult fit = fit_mle(family, data);
  const BootstrapResult b = bootstrap(data, fit.params, {reps, seed, 50});
  switch (test) {
    case GofTest::KS: return b.pvalue_ks;
    case GofTest::ChiSquared: return b.pvalue_chi2;
    case GofTest::AndersonDarling: return b.pvalue_ad;
  }
  return std::numeric_limits<double>::quiet_NaN();
}

GofReport gof_test(const VecRef& data, const FitResult& fit, const BootstrapOptions& opt) {
  if (opt.reps != 0 && opt.reps < 200) throw ConfigError("bootstrap reps must be 0 or at least 200");
  GofReport r;
  r.family = fit.params.family();
  r.fit = fit;
  r.n = data.size();
  if (opt.reps == 0) {
    const GofStatistics s = gof_statistics(data, fit.params, opt.bins);
    r.statistic_ks = s.ks;
    r.statistic_chi2 = s.chi2;
    r.statistic_ad = s.ad;
    return r;
  }
  const BootstrapResult b = bootstrap(data, fit.params, opt);
  r.statistic_ks = b.observed.ks;
  r.statistic_chi2 = b.observed.chi2;
  r.statistic_ad = b.observed.ad;
  r.pvalue_ks = b.pvalue_ks;
  r.pvalue_chi2 = b.pvalue_chi2;
  r.pvalue_ad = b.pvalue_ad;
  r.bootstrap_reps = b.reps;
  r.failed_refits = b.failed_refits;
  return r;
}

GofReport gof_test(const VecRef& data, Family family, const BootstrapOptions& opt) {
  return gof_test(data, fit_mle(family, data), opt);
}

std::vector<double> relative_likelihood(const std::vector<double>& ic) {
  if (ic.empty()) return {};
  const double best = *std::min_element(ic.begin(), ic.end());
  std::vector<double> rl(ic.size());
  for (std::size_t i = 0; i < ic.size(); ++i) rl[i] = std::exp((best - ic[i]) / 2.0);
  return rl;
}

const ModelComparison::Entry& ModelComparison::at(Family f) const {
  for (const auto& e : entries)
    if (e.family == f) return e;
  throw ConfigError("model comparison has no entry for " + std::string(family_name(f)));
}

ModelComparison compare_fits(const std::vector<FitResult>& fits) {
  ModelComparison mc;
  std::vector<double> aic, bic;
  for (const auto& f : fits) {
    const double k = static_cast<double>(f.params.size());
    ModelComparison::Entry e{f.params.family(), f};
    e.aic = 2.0 * k - 2.0 * f.loglik;
    e.bic = k * std::log(static_cast<double>(f.n)) - 2.0 * f.loglik;
    aic.push_back(e.aic);
    bic.push_back(e.bic);
    mc.entries.push_back(std::move(e));
  }
  const auto rl_a = relative_likelihood(aic), rl_b = relative_likelihood(bic);
  for (std::size_t i = 0; i < mc.entries.size(); ++i) {
    mc.entries[i].rl_aic = rl_a[i];
    mc.entries[i].rl_bic = rl_b[i];
  }
  return mc;
}

ModelComparison compare_models(const VecRef& data, const std::vector<Family>& families) {
  if (families.size() < 2) throw ConfigError("compare_models: need at least two families");
  std::vector<FitResult> fits;
  for (Family f : families) {
    try {
      FitResult r = fit_mle(f, data);
      if (!r.converged)
        throw FitError(std::string(family_name(f)) + " fit did not converge: " + r.diagnostics);
      fits.push_back(std::move(r));
    } catch (const FitError&) {
      throw;
    } catch (const Error& e) {
      throw FitError(std::string(family_name(f)) + " fit failed: " + e.what());
    }
  }
  return compare_fits(fits);
}

}  // namespace firmfacts

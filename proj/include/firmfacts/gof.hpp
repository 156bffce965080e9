#ifndef FIRMFACTS_GOF_HPP
#define FIRMFACTS_GOF_HPP

#include <algorithm>
#include <cstdint>
#include <optional>
#include <vector>

#include "firmfacts/dists.hpp"

namespace firmfacts {

enum class GofTest { KS, ChiSquared, AndersonDarling };

/// K-S distance from probability-integral values sorted ascending.
double ks_from_sorted_pit(const VecRef& u);
/// Equiprobable-bin chi-squared from probability-integral values.
double chi2_from_pit(const VecRef& u, int bins);
double ad_from_sorted_pit(const VecRef& u);

double ks_stat(const VecRef& data, const ParamVector& p);
double chi2_binned(const VecRef& data, const ParamVector& p, int bins = 50);
double ad_stat(const VecRef& data, const ParamVector& p);

/// K-S statistic against an arbitrary continuous CDF.
template <typename Cdf>
double ks_stat(const VecRef& data, Cdf&& cdf_fn) {
  VectorXd u = data.unaryExpr([&](double x) { return static_cast<double>(cdf_fn(x)); });
  std::sort(u.data(), u.data() + u.size());
  return ks_from_sorted_pit(u);
}

struct GofStatistics {
  double ks = 0.0;
  double chi2 = 0.0;
  double ad = 0.0;

  double get(GofTest t) const;
};

GofStatistics gof_statistics(const VecRef& data, const ParamVector& p, int bins = 50);

struct BootstrapOptions {
  int reps = 999;
  std::uint64_t seed = 0;
  int bins = 50;
};

struct BootstrapResult {
  GofStatistics observed;
  double pvalue_ks = 1.0;
  double pvalue_chi2 = 1.0;
  double pvalue_ad = 1.0;
  int reps = 0;
  int failed_refits = 0;
};

/// Parametric bootstrap around `fitted` (the MLE on `data`): each replicate
/// samples n points from the fitted law, refits, and recomputes all three
/// statistics. p = (1 + #{T* >= T}) / (reps + 1) over successful replicates.
BootstrapResult bootstrap(const VecRef& data, const ParamVector& fitted, const BootstrapOptions& opt);

double bootstrap_pvalue(GofTest test, const VecRef& data, Family family, int reps, std::uint64_t seed);

struct GofReport {
  Family family = Family::Normal;
  std::optional<FitResult> fit;
  double statistic_ks = 0.0;
  double statistic_chi2 = 0.0;
  double statistic_ad = 0.0;
  std::optional<double> pvalue_ks, pvalue_chi2, pvalue_ad;  // absent when reps == 0
  Index n = 0;
  int bootstrap_reps = 0;
  int failed_refits = 0;
};

/// Fits `family` by MLE and runs the test battery. reps == 0 skips the
/// bootstrap; otherwise reps must be at least 200.
GofReport gof_test(const VecRef& data, Family family, const BootstrapOptions& opt);
GofReport gof_test(const VecRef& data, const FitResult& fit, const BootstrapOptions& opt);

/// exp((min - ic_i) / 2) for each entry.
std::vector<double> relative_likelihood(const std::vector<double>& ic);

struct ModelComparison {
  struct Entry {
    Family family;
    FitResult fit;
    double aic = 0.0;
    double bic = 0.0;
    double rl_aic = 0.0;
    double rl_bic = 0.0;
  };
  std::vector<Entry> entries;

  const Entry& at(Family f) const;
};

ModelComparison compare_fits(const std::vector<FitResult>& fits);
/// Fits every family by MLE. Fit failures are rethrown as FitError naming
/// the family.
ModelComparison compare_models(const VecRef& data, const std::vector<Family>& families);

}  // namespace firmfacts

#endif  // FIRMFACTS_GOF_HPP

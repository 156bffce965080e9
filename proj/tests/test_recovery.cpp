#include <random>

#include "doctest.h"
#include "firmfacts/dists.hpp"

using namespace firmfacts;

namespace {

ParamVector draw_truth(Family f, std::mt19937_64& g) {
  auto u = [&](double a, double b) { return std::uniform_real_distribution<double>(a, b)(g); };
  switch (f) {
    case Family::Normal: return ParamVector::normal(u(-2, 2), u(0.5, 3));
    case Family::SkewNormal: {
      // shape kept away from 0, where its information vanishes
      const double a = u(1.5, 5) * (u(0, 1) < 0.5 ? -1 : 1);
      return ParamVector::skew_normal(u(-2, 2), u(0.5, 3), a);
    }
    case Family::Laplace: return ParamVector::laplace(u(-2, 2), u(0.5, 3));
    case Family::Stable: return ParamVector::stable(u(1.2, 1.8), u(-0.5, 0.5), u(0.5, 2), u(-1, 1));
    case Family::DLN: return ParamVector::dln(u(0, 2), u(0.3, 1.0), u(-1, 1), u(0.3, 1.0));
  }
  return ParamVector::normal(0, 1);
}

}  // namespace

TEST_CASE("sample then fit recovers parameters in at least 18 of 20 draws") {
  for (Family f : kAllFamilies) {
    CAPTURE(family_name(f));
    std::mt19937_64 g(1000 + static_cast<int>(f));
    int ok = 0;
    for (int k = 0; k < 20; ++k) {
      const ParamVector truth = draw_truth(f, g);
      const FitResult fit = fit_mle(f, sample(truth, 100'000, 7000 + k));
      bool good = fit.converged;
      for (Index i = 0; i < truth.size(); ++i) {
        const double tol = std::max(0.05, 0.05 * std::abs(truth[i]));
        good = good && std::abs(fit.params[i] - truth[i]) <= tol;
      }
      if (!good) MESSAGE("miss: " << truth.to_string() << " -> " << fit.params.to_string());
      ok += good;
    }
    CHECK(ok >= 18);
  }
}

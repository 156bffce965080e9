#include "firmfacts/stats.hpp"

namespace firmfacts {

Moments sample_moments(const VecRef& x) {
  const Index n = x.size();
  if (n < 2) throw SampleSizeError("moments need at least two observations");
  Moments m;
  m.mean = x.mean();
  const VectorXd d = x.array() - m.mean;
  const double m2 = d.squaredNorm() / n;
  const double m3 = d.array().cube().sum() / n;
  const double m4 = d.array().square().square().sum() / n;
  m.sd = std::sqrt(d.squaredNorm() / (n - 1));
  if (m2 > 0.0) {
    m.skewness = m3 / std::pow(m2, 1.5);
    m.kurtosis = m4 / (m2 * m2);
  }
  return m;
}

VectorXd finite_only(const VecRef& x) {
  VectorXd out(x.size());
  Index k = 0;
  for (Index i = 0; i < x.size(); ++i)
    if (std::isfinite(x(i))) out(k++) = x(i);
  out.conservativeResize(k);
  return out;
}

LineFit fit_line(const VecRef& x, const VecRef& y) {
  if (x.size() != y.size()) throw DomainError("fit_line: length mismatch");
  const Index n = x.size();
  if (n < 3) throw SampleSizeError("fit_line needs at least three points");
  const double mx = x.mean(), my = y.mean();
  const VectorXd dx = x.array() - mx;
  const VectorXd dy = y.array() - my;
  const double sxx = dx.squaredNorm();
  if (!(sxx > 0.0)) throw DegenerateSampleError("fit_line: regressor has zero variance");
  LineFit f;
  f.n = n;
  f.slope = dx.dot(dy) / sxx;
  f.intercept = my - f.slope * mx;
  const VectorXd resid = dy - f.slope * dx;
  const double sse = resid.squaredNorm();
  const double sst = dy.squaredNorm();
  f.r2 = sst > 0.0 ? 1.0 - sse / sst : 1.0;
  f.slope_se = std::sqrt(sse / (n - 2) / sxx);
  return f;
}

VectorXd least_squares(const Eigen::Ref<const Eigen::MatrixXd>& design, const VecRef& y) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < design.cols()) throw NumericalError("least squares: singular design matrix");
  return qr.solve(y);
}

double pearson(const VecRef& x, const VecRef& y) {
  if (x.size() != y.size() || x.size() < 2) throw SampleSizeError("pearson: need paired data");
  const VectorXd dx = x.array() - x.mean();
  const VectorXd dy = y.array() - y.mean();
  const double den = std::sqrt(dx.squaredNorm() * dy.squaredNorm());
  if (!(den > 0.0)) {
    // Both constant and equal series are perfectly correlated by convention.
    if (dx.squaredNorm() == 0.0 && dy.squaredNorm() == 0.0) return 1.0;
    throw DegenerateSampleError("pearson: zero variance");
  }
  return dx.dot(dy) / den;
}

}  // namespace firmfacts

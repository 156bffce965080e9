#include "optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace firmfacts::detail {
namespace {

using Eigen::VectorXd;

VectorXd fd_gradient(const Objective& f, const VectorXd& x, double rel_step) {
  VectorXd g(x.size());
  VectorXd xp = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = rel_step * std::max(1.0, std::abs(x(i)));
    xp(i) = x(i) + h;
    const double fp = f(xp);
    xp(i) = x(i) - h;
    const double fm = f(xp);
    xp(i) = x(i);
    g(i) = (fp - fm) / (2.0 * h);
  }
  return g;
}

double safe_eval(const Objective& f, const VectorXd& x) {
  try {
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  } catch (const std::exception&) {
    return std::numeric_limits<double>::infinity();
  }
}

}  // namespace

OptimResult minimize_bfgs(const Objective& f, VectorXd x0, const BfgsOptions& opt) {
  const Eigen::Index n = x0.size();
  OptimResult r;
  r.x = std::move(x0);
  r.value = safe_eval(f, r.x);
  if (!std::isfinite(r.value)) {
    r.message = "objective not finite at start";
    return r;
  }
  Eigen::MatrixXd inv_h = Eigen::MatrixXd::Identity(n, n);
  VectorXd g = fd_gradient(f, r.x, opt.fd_step);
  int small_steps = 0;
  for (r.iterations = 0; r.iterations < opt.max_iterations; ++r.iterations) {
    if (g.lpNorm<Eigen::Infinity>() < opt.gradient_tol) {
      r.converged = true;
      r.message = "gradient below tolerance";
      return r;
    }
    VectorXd dir = -inv_h * g;
    if (dir.dot(g) >= 0.0) {  // lost descent; restart from steepest descent
      inv_h.setIdentity();
      dir = -g;
    }
    double step = 1.0;
    const double slope = dir.dot(g);
    VectorXd x_new;
    double f_new = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      x_new = r.x + step * dir;
      f_new = safe_eval(f, x_new);
      if (f_new <= r.value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      r.converged = g.lpNorm<Eigen::Infinity>() < 100.0 * opt.gradient_tol;
      r.message = "line search failed";
      return r;
    }
    const VectorXd g_new = fd_gradient(f, x_new, opt.fd_step);
    const VectorXd s = x_new - r.x;
    const VectorXd y = g_new - g;
    const double sy = s.dot(y);
    if (sy > 1e-12 * s.norm() * y.norm()) {
      const double rho = 1.0 / sy;
      const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
      if (r.iterations == 0) inv_h *= sy / y.squaredNorm();
      inv_h = (eye - rho * s * y.transpose()) * inv_h * (eye - rho * y * s.transpose()) +
              rho * s * s.transpose();
    }
    const double change = std::abs(r.value - f_new) / std::max(1.0, std::abs(f_new));
    r.x = x_new;
    r.value = f_new;
    g = g_new;
    small_steps = change < opt.value_tol ? small_steps + 1 : 0;
    if (small_steps >= 2) {
      r.converged = true;
      r.message = "objective change below tolerance";
      return r;
    }
  }
  r.message = "iteration limit reached";
  return r;
}

OptimResult minimize_nelder_mead(const Objective& f, VectorXd x0, const NelderMeadOptions& opt) {
  const Eigen::Index n = x0.size();
  std::vector<VectorXd> pts(n + 1, x0);
  std::vector<double> vals(n + 1);
  for (Eigen::Index i = 0; i < n; ++i) pts[i + 1](i) += opt.step * std::max(1.0, std::abs(x0(i)));
  for (Eigen::Index i = 0; i <= n; ++i) vals[i] = safe_eval(f, pts[i]);

  OptimResult r;
  std::vector<Eigen::Index> order(n + 1);
  for (r.iterations = 0; r.iterations < opt.max_iterations; ++r.iterations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
    const auto best = order.front(), worst = order.back(), second = order[n - 1];
    if (std::abs(vals[worst] - vals[best]) <= opt.value_tol * (1.0 + std::abs(vals[best]))) {
      r.converged = true;
      break;
    }
    VectorXd centroid = VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) centroid += pts[order[i]];
    centroid /= static_cast<double>(n);

    const VectorXd reflected = centroid + (centroid - pts[worst]);
    const double fr = safe_eval(f, reflected);
    if (fr < vals[best]) {
      const VectorXd expanded = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = safe_eval(f, expanded);
      if (fe < fr) {
        pts[worst] = expanded;
        vals[worst] = fe;
      } else {
        pts[worst] = reflected;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = reflected;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    const VectorXd contracted =
        outside ? VectorXd(centroid + 0.5 * (reflected - centroid)) : VectorXd(centroid + 0.5 * (pts[worst] - centroid));
    const double fc = safe_eval(f, contracted);
    if (fc < std::min(fr, vals[worst])) {
      pts[worst] = contracted;
      vals[worst] = fc;
      continue;
    }
    for (Eigen::Index i = 1; i <= n; ++i) {
      const auto k = order[i];
      pts[k] = pts[best] + 0.5 * (pts[k] - pts[best]);
      vals[k] = safe_eval(f, pts[k]);
    }
  }
  const auto best = std::distance(vals.begin(), std::min_element(vals.begin(), vals.end()));
  r.x = pts[best];
  r.value = vals[best];
  r.message = r.converged ? "simplex collapsed" : "iteration limit reached";
  return r;
}

}  // namespace firmfacts::detail

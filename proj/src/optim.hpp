// Small unconstrained minimisers used by the likelihood fits.
#ifndef FIRMFACTS_SRC_OPTIM_HPP
#define FIRMFACTS_SRC_OPTIM_HPP

#include <Eigen/Dense>

#include <functional>
#include <string>

namespace firmfacts::detail {

using Objective = std::function<double(const Eigen::VectorXd&)>;

struct OptimResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  std::string message;
};

struct BfgsOptions {
  int max_iterations = 200;
  double gradient_tol = 1e-7;  // on the infinity norm
  double value_tol = 1e-14;    // relative change over two consecutive steps
  double fd_step = 1e-5;       // relative central-difference step
};

/// Quasi-Newton with central-difference gradients and backtracking line search.
OptimResult minimize_bfgs(const Objective& f, Eigen::VectorXd x0, const BfgsOptions& opt = {});

struct NelderMeadOptions {
  int max_iterations = 2000;
  double value_tol = 1e-10;
  double step = 0.1;
};

OptimResult minimize_nelder_mead(const Objective& f, Eigen::VectorXd x0, const NelderMeadOptions& opt = {});

}  // namespace firmfacts::detail

#endif  // FIRMFACTS_SRC_OPTIM_HPP

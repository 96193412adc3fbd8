#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace rabiflux::detail {

using ResidualFn = std::function<void(const Eigen::VectorXd& params, Eigen::VectorXd& residuals)>;

struct LsqResult {
  Eigen::VectorXd params;
  std::vector<double> residuals;
  double rms = 0.0;
  bool converged = false;
  int status = 0;
};

// Levenberg-Marquardt with a forward-difference Jacobian.
LsqResult levenberg_marquardt(const ResidualFn& fn, int residual_count, Eigen::VectorXd start,
                              int max_evaluations = 4000);

// Least-squares polynomial, coefficients in ascending powers.
std::vector<double> polyfit(const std::vector<double>& x, const std::vector<double>& y, int degree);

}  // namespace rabiflux::detail

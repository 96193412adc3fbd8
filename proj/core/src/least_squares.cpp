#include "least_squares.hpp"

#include <cmath>
#include <unsupported/Eigen/NonLinearOptimization>
#include <unsupported/Eigen/NumericalDiff>

#include "rabiflux/errors.hpp"

namespace rabiflux::detail {

namespace {

struct Functor {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  const ResidualFn* fn = nullptr;
  int n_inputs = 0;
  int n_values = 0;

  int inputs() const { return n_inputs; }
  int values() const { return n_values; }
  int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
    (*fn)(x, f);
    return 0;
  }
};

}  // namespace

LsqResult levenberg_marquardt(const ResidualFn& fn, int residual_count, Eigen::VectorXd start,
                              int max_evaluations) {
  if (residual_count < start.size())
    throw insufficient_data_error("fewer residuals than fit parameters");
  Functor f;
  f.fn = &fn;
  f.n_inputs = static_cast<int>(start.size());
  f.n_values = residual_count;
  Eigen::NumericalDiff<Functor> diff(f);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<Functor>> lm(diff);
  lm.parameters.maxfev = max_evaluations;
  lm.parameters.xtol = 1e-14;
  lm.parameters.ftol = 1e-14;
  const auto status = lm.minimize(start);

  LsqResult r;
  r.params = start;
  r.status = static_cast<int>(status);
  Eigen::VectorXd res(residual_count);
  fn(start, res);
  r.residuals.assign(res.data(), res.data() + res.size());
  r.rms = std::sqrt(res.squaredNorm() / residual_count);
  using namespace Eigen::LevenbergMarquardtSpace;
  r.converged = status == RelativeReductionTooSmall || status == RelativeErrorTooSmall ||
                status == RelativeErrorAndReductionTooSmall || status == CosinusTooSmall ||
                status == FtolTooSmall || status == XtolTooSmall || status == GtolTooSmall;
  if (!res.allFinite() || !start.allFinite()) r.converged = false;
  return r;
}

std::vector<double> polyfit(const std::vector<double>& x, const std::vector<double>& y, int degree) {
  if (x.size() != y.size()) throw input_error("polyfit: length mismatch");
  if (degree < 0 || static_cast<int>(x.size()) < degree + 1)
    throw insufficient_data_error("polyfit: not enough points for the degree");
  const auto n = static_cast<Eigen::Index>(x.size());
  // Center and scale the abscissa for conditioning, then expand back.
  double lo = x.front(), hi = x.front();
  for (double v : x) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  const double c = 0.5 * (lo + hi);
  const double s = hi > lo ? 0.5 * (hi - lo) : 1.0;
  Eigen::MatrixXd V(n, degree + 1);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double u = (x[static_cast<std::size_t>(i)] - c) / s;
    double p = 1.0;
    for (int d = 0; d <= degree; ++d) {
      V(i, d) = p;
      p *= u;
    }
    b(i) = y[static_cast<std::size_t>(i)];
  }
  const Eigen::VectorXd q = V.colPivHouseholderQr().solve(b);
  // sum_d q_d ((x - c)/s)^d -> ascending powers of x.
  std::vector<double> coef(static_cast<std::size_t>(degree + 1), 0.0);
  for (int d = 0; d <= degree; ++d) {
    double binom = 1.0;
    for (int j = 0; j <= d; ++j) {
      // C(d, j) x^j (-c)^(d-j) / s^d
      coef[static_cast<std::size_t>(j)] += q(d) * binom * std::pow(-c, d - j) / std::pow(s, d);
      binom = binom * (d - j) / (j + 1);
    }
  }
  return coef;
}

}  // namespace rabiflux::detail

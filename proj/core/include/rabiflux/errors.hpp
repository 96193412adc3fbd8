#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace rabiflux {

// Bad arguments, malformed input, violated preconditions. CLI exit code 1.
class input_error : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The computation itself failed (instability, no convergence, singularity). CLI exit code 2.
class numerical_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class domain_error : public input_error {
 public:
  using input_error::input_error;
};

class sampling_error : public input_error {
 public:
  using input_error::input_error;
};

class insufficient_data_error : public input_error {
 public:
  using input_error::input_error;
};

class shape_error : public input_error {
 public:
  using input_error::input_error;
};

class singularity_error : public numerical_error {
 public:
  using numerical_error::numerical_error;
};

class stability_error : public numerical_error {
 public:
  using numerical_error::numerical_error;
};

class no_kink_error : public numerical_error {
 public:
  using numerical_error::numerical_error;
};

class fit_error : public numerical_error {
 public:
  fit_error(const std::string& what, std::vector<double> residuals = {})
      : numerical_error(what), residuals_(std::move(residuals)) {}
  const std::vector<double>& residuals() const noexcept { return residuals_; }

 private:
  std::vector<double> residuals_;
};

}  // namespace rabiflux

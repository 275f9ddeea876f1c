#pragma once

#include <stdexcept>
#include <string>

namespace soblab {

/// Base class for all library errors.
class error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed or non-integrable potential specification.
class invalid_spec_error : public error {
public:
  using error::error;
};

/// Argument outside an operation's documented range.
class invalid_input_error : public error {
public:
  using error::error;
};

/// Second-derivative evaluation requested at a singular point.
class singularity_error : public error {
public:
  singularity_error(const std::string& what, double point)
      : error(what), point_(point) {}
  double point() const { return point_; }

private:
  double point_;
};

/// Input that makes the requested quantity undefined (all-zero function,
/// constant trial function in a Rayleigh quotient, ...).
class degenerate_input_error : public error {
public:
  using error::error;
};

/// Mixing grid functions bound to different measures, or importing values
/// whose nodes do not match the measure's grid.
class grid_mismatch_error : public error {
public:
  using error::error;
};

/// Tabulated data with too few points for the requested operation.
class insufficient_data_error : public error {
public:
  using error::error;
};

/// Density does not decay at the truncation boundary; e^{-V} cannot be
/// normalized on the requested domain.
class non_normalizable_error : public error {
public:
  using error::error;
};

/// Internal numerical failure (overflow, lost bracketing, inconsistent
/// discretization).
class numerical_error : public error {
public:
  using error::error;
};

/// No reference constant C_p(nu) is available for the requested reference
/// potential.
class reference_constant_error : public error {
public:
  using error::error;
};

}  // namespace soblab

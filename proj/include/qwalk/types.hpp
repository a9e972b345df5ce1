// types.hpp
// Shared numeric aliases and the error type used across the library.

#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qwalk {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;

inline constexpr Complex kI{0.0, 1.0};

// Categories map one-to-one onto CLI exit codes (see tools/).
enum class ErrorKind {
  invalid_input,   // violated precondition or malformed data
  singular,        // evaluation at or too close to a pole
  boundary_case,   // zero/pole on the unit circle, winding not certified
  convergence,     // iteration or quadrature did not converge
  ill_conditioned  // non-normal eigenbasis unusable
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Largest absolute entry; used for all matrix-identity tolerances.
inline double max_abs(const CMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

}  // namespace qwalk

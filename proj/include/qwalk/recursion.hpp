// recursion.hpp
// Weak-measurement amplitudes rebuilt from the projective series:
//   phi_{eta,n} / sqrt(eta) = sum_{m=1}^{n} q_{n,m} (1 - x)^{m-1},
// with q_{n,m} the coefficient of z^n in phi_hat(z)^m.

#pragma once

#include <cstddef>
#include <vector>

#include "qwalk/amplitudes.hpp"

namespace qwalk {

class ConvolutionTable {
 public:
  ConvolutionTable(const AmplitudeSeries& base, std::size_t n_max);

  std::size_t n_max() const { return n_max_; }
  // q_{n,m}; zero for m > n.
  Complex q(std::size_t n, std::size_t m) const;
  const AmplitudeSeries& base_series() const { return base_; }

 private:
  std::size_t n_max_;
  AmplitudeSeries base_;
  // rows_[m - 1][n - 1] = q_{n,m}
  std::vector<std::vector<Complex>> rows_;
};

// Throws Error(invalid_input) if n_max exceeds the base length or the base
// is not a projective return series.
ConvolutionTable build_convolution_table(const AmplitudeSeries& base, std::size_t n_max);

AmplitudeSeries reconstruct_weak_series(const ConvolutionTable& table, double eta);

// |sqrt(eta) sum_{m > m_cut} q_{n,m} (1 - x)^{m-1}| for n = 1..n_max.
std::vector<double> truncation_error_profile(const ConvolutionTable& table, double eta, std::size_t m_cut);

// sqrt(eta) sum_{m > m_cut} |q_{n,m}| (1 - x)^{m-1}; an upper bound on the profile.
std::vector<double> truncation_error_bound(const ConvolutionTable& table, double eta, std::size_t m_cut);

}  // namespace qwalk

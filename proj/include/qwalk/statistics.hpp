// statistics.hpp
// Return-time moments by three independent routes:
//   series       sum_n n^k |phi_{eta,n}|^2 over a truncated amplitude series
//   topological  <n> = n_w / eta
//   spectral     closed geometric sums over the eigenpairs of Q_eta U
// plus small-eta scaling coefficients and the nu_{jk} matrix.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "qwalk/amplitudes.hpp"
#include "qwalk/genfunc.hpp"
#include "qwalk/spectral.hpp"

namespace qwalk {

enum class StatsMethod { series, topological, spectral };
std::string stats_method_name(StatsMethod m);

struct ReturnStats {
  double total_probability = 0.0;
  double mean_n = 0.0;
  double second_moment_n = 0.0;
  double variance_n = 0.0;
  double mean_time = 0.0;      // tau * mean_n
  double variance_time = 0.0;  // tau^2 * variance_n
  StatsMethod method = StatsMethod::series;
  bool reliable = true;
  // Series route: estimated truncation error of mean_n / second_moment_n.
  double mean_error_estimate = 0.0;
  double second_moment_error_estimate = 0.0;
  // Spectral route: largest discarded imaginary part of the moment sums.
  double imaginary_residual = 0.0;
};

ReturnStats mean_return_series(const AmplitudeSeries& series, double tau = 1.0);

// n_w / eta.  Throws Error(boundary_case) unless the winding is certified.
double mean_return_topological(const WindingReport& winding, double eta);

inline constexpr double kMaxEigenbasisCondition = 1e8;

// phi_{eta,n} / sqrt(eta) = sum_j a_j lambda_j^{n-1}.
struct SpectralDecompositionQ {
  std::vector<Complex> lambdas;       // descending modulus, then descending phase
  std::vector<Complex> coefficients;  // a_j
  double condition_estimate = 1.0;
  std::vector<bool> bright_mask;      // |lambda_j| < 1

  // sqrt(eta) * sum_j a_j lambda_j^{n-1}, n >= 1.
  Complex reconstruct(std::size_t n, double eta) const;
};

// Throws Error(ill_conditioned) when the eigenbasis condition estimate
// reaches kMaxEigenbasisCondition.
SpectralDecompositionQ spectral_decompose(const MonitoredEvolution& evo);

ReturnStats moments_spectral(const SpectralDecompositionQ& dec, double eta, double tau = 1.0);

struct ScalingFit {
  double rho1 = 0.0;  // median of eta <n> below eta = 0.1
  double rho2 = 0.0;  // eta^2 <n^2> at the smallest eta on the grid
  double max_deviation_rho1 = 0.0;  // max |eta <n> - rho1| over the whole grid
  double max_deviation_rho2 = 0.0;  // max relative |eta^2 <n^2> - rho2| / rho2 below 0.1
  double max_decade_drift_rho2 = 0.0;
  int n_w = 0;
  bool rho1_matches_winding = false;
  bool plateau_detected = false;
  std::vector<double> etas;
  std::vector<double> scaled_mean;    // eta <n>
  std::vector<double> scaled_second;  // eta^2 <n^2>
  std::vector<StatsMethod> methods;
  std::string diagnostic;
};

// Requires at least one grid point <= 0.01.
ScalingFit small_eta_scaling(const SpectralSystem& system, double tau, std::span<const double> eta_grid);

// nu_{jk} = (1 + lambda_j conj(lambda_k)) / (1 - lambda_j conj(lambda_k))^3 over bright eigenvalues.
CMatrix nu_matrix(const SpectralDecompositionQ& dec);
CMatrix nu_matrix(std::span<const Complex> lambdas);

// Eigenvalue ordering used throughout: descending modulus, ties (1e-12) by descending phase.
void sort_eigenvalues(std::vector<Complex>& lambdas);
bool eigenvalue_precedes(Complex a, Complex b);

}  // namespace qwalk

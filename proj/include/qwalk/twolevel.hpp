// twolevel.hpp
// Closed forms for the monitored single qubit: H = J (|up><up| - |dn><dn|),
// detector psi = (|up> + |dn>)/sqrt(2), target psi' = (|up> - |dn>)/sqrt(2).

#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "qwalk/spectral.hpp"

namespace qwalk::twolevel {

struct Params {
  double J = 1.0;
  double tau = 1.0;
  double c = 1.0;  // cos(J tau)
  double s = 0.0;  // sin(J tau)
  double eta = 1.0;
  double x = 1.0;
};

Params make_params(double J, double tau, double eta = 1.0);
// J = 1, tau = acos(c), so s >= 0.
Params from_cos(double c, double eta = 1.0);
// Same, parameterized by the shear x (eta = x (2 - x)) so x is kept exact.
Params from_cos_shear(double c, double x);

SpectralSystem system(double J);

// eta = 1 amplitudes
Complex closed_phi_k(const Params& p, std::size_t k);
Complex closed_phi_prime_k(const Params& p, std::size_t k);

enum class Which { phi, phi_prime, phi_eta, phi_eta_prime };
Complex closed_gf(const Params& p, Complex z, Which which);

// Eigenvalues of Q_eta U, ordered by descending modulus then descending phase.
std::pair<Complex, Complex> closed_lambdas(const Params& p);

// phi_{eta,n} / sqrt(eta) = a_1 l_1^{n-1} + a_2 l_2^{n-1} (partial fractions
// of the closed generating function); requires l_1 != l_2.
std::pair<Complex, Complex> closed_coefficients(const Params& p);

// phi_{eta,n}, n = 1..n_max, from the linear recurrence of the closed
// generating function's denominator.
std::vector<Complex> closed_phi_eta_series(const Params& p, std::size_t n_max);

// sum_{n>=1} |phi_{eta,n}|^2 summed analytically from closed_coefficients.
double closed_total_probability(const Params& p);

struct Figure1Row {
  double cos_j_tau;
  double nu_pp, nu_mm, nu_pm, nu_mp;  // moduli
};
std::vector<Figure1Row> figure1_data(double x, std::span<const double> cos_grid);

struct Figure2Table {
  double c = 0.5;
  std::vector<double> etas;
  std::size_t n_max = 10;
  // probability[i][n-1] = |phi_{eta_i, n}|^2
  std::vector<std::vector<double>> probability;
};
Figure2Table figure2_data(double c, std::span<const double> eta_grid, std::size_t n_max = 10);

}  // namespace qwalk::twolevel

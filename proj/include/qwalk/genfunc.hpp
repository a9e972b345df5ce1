// genfunc.hpp
// Generating functions of the return/transition amplitudes, their rational
// (Blaschke) form, winding numbers and unit-circle contour integrals.
//
// Conventions: e_j = exp(-i E_j tau).
//   u_hat(z)      = sum_j p_j z e_j / (1 - z e_j)          (= sum_n z^n u_n)
//   phi_hat(z)    = u_hat / (1 + u_hat)                    (projective)
//   phi_eta_hat   = sqrt(eta) u_hat / (1 + x u_hat)
//                 = sqrt(eta) phi_hat / (1 - (1 - x) phi_hat)
//                 = z sqrt(eta) <psi|U (1 - z Q_eta U)^{-1}|psi>

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "qwalk/amplitudes.hpp"
#include "qwalk/polynomial.hpp"
#include "qwalk/spectral.hpp"

namespace qwalk {

inline constexpr double kCircleTol = 1e-8;
inline constexpr double kZeroDegeneracyTol = 1e-7;
inline constexpr std::size_t kContourStartNodes = 4096;
inline constexpr std::size_t kContourMaxNodes = std::size_t{1} << 20;

enum class GfRoute { via_u, via_phi, resolvent };

Complex eval_u_hat(const SpectralSystem& system, double tau, Complex z);
// u'_hat(z) = z <target|U (1 - zU)^{-1}|psi>
Complex eval_u_prime_hat(const SpectralSystem& system, double tau, const CVector& target, Complex z);
Complex eval_phi_hat(const SpectralSystem& system, double tau, Complex z);
Complex eval_phi_eta_hat(const SpectralSystem& system, double tau, double eta, Complex z,
                         GfRoute route = GfRoute::via_u);
Complex eval_phi_eta_hat(const MonitoredEvolution& evo, Complex z, GfRoute route = GfRoute::via_u);
Complex eval_phi_eta_prime_hat(const SpectralSystem& system, double tau, double eta,
                               const CVector& target, Complex z);

enum class RationalForm { u_hat, phi_hat };

// u_hat = z P_N / D_{N+1},  phi_hat = z P_N / (D_{N+1} + z P_N)
//       = -prefactor * z * prod_k (z - zbar_k) / (1 - z conj(zbar_k))
// with D_{N+1} = prod_k (exp(i E_k tau) - z) over the effective bright levels.
struct RationalGF {
  RationalForm form = RationalForm::phi_hat;
  std::vector<Complex> numerator_zeros;  // zbar_0 = 0 first, then zeros of P_N
  Complex phase_prefactor{1.0, 0.0};     // prod_k (-exp(-i E_k tau))
  std::vector<Complex> pole_list;
  poly::Coefficients p_coefficients;
  poly::Coefficients d_coefficients;
  // z P and D + z P with their derivatives, cached for quadrature.
  poly::Coefficients phi_numerator, phi_denominator, phi_numerator_d, phi_denominator_d;
  LevelStructure levels;

  // Product (Blaschke) form for phi_hat, z P/D for u_hat.
  Complex evaluate(Complex z) const;
  // z P / (D + z P) from the coefficients; analytic on the closed unit disk.
  Complex evaluate_phi_polynomial(Complex z) const;
  // d/dz log phi_hat from the coefficients, independent of the zeros.
  Complex log_derivative_phi(Complex z) const;
};

RationalGF build_rational_forms(const SpectralSystem& system, double tau,
                                RationalForm form = RationalForm::phi_hat);

enum class WindingMethod { roots, contour };

struct WindingReport {
  int n_w = 0;
  bool certified = false;
  bool boundary_case = false;
  WindingMethod method = WindingMethod::roots;
  std::vector<Complex> zeros_inside;
  std::vector<Complex> zeros_on_circle;
  std::vector<Complex> zeros_outside;
  // Index sets into all_zeros of zeros closer than kZeroDegeneracyTol.
  std::vector<std::vector<std::size_t>> degenerate_groups;
  std::vector<Complex> all_zeros;
  Complex contour_value{};
  double contour_residual = 0.0;
  double contour_radius = 1.0;
  std::size_t contour_nodes = 0;
  bool contour_evaluated = false;
  std::size_t bright_levels = 0;
  std::vector<std::vector<std::size_t>> merged_levels;
  std::vector<std::string> warnings;
};

WindingReport winding_number(const SpectralSystem& system, double tau,
                             WindingMethod method = WindingMethod::roots);

struct ContourResult {
  Complex value{};
  std::size_t nodes = 0;
  double radius = 1.0;
  bool converged = false;
};

// (1/2 pi i) closed integral of d log phi_hat on |z| = 1 (falls back to
// radius 1 - 1e-9 if a node is singular).
ContourResult winding_contour(const RationalGF& gf);

// (1/2 pi i) closed integral of |phi_eta_hat|^2 / z on the unit circle.
double return_probability_integral(const SpectralSystem& system, double tau, double eta);

std::string method_name(WindingMethod m);

}  // namespace qwalk

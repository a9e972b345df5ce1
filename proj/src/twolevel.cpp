#include "qwalk/twolevel.hpp"

#include <cmath>
#include <numbers>

#include "qwalk/statistics.hpp"

namespace qwalk::twolevel {

namespace {

void require_eta(double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw Error(ErrorKind::invalid_input, "eta must lie in (0, 1]");
}

Complex checked_ratio(Complex num, Complex den) {
  if (std::abs(den) < 1e-13) throw Error(ErrorKind::singular, "closed form evaluated at a pole");
  return num / den;
}

}  // namespace

Params make_params(double J, double tau, double eta) {
  require_eta(eta);
  if (!(tau > 0.0)) throw Error(ErrorKind::invalid_input, "tau must be positive");
  Params p;
  p.J = J;
  p.tau = tau;
  p.c = std::cos(J * tau);
  p.s = std::sin(J * tau);
  p.eta = eta;
  p.x = shear_from_strength(eta);
  return p;
}

Params from_cos(double c, double eta) {
  require_eta(eta);
  Params p = from_cos_shear(c, shear_from_strength(eta));
  p.eta = eta;
  return p;
}

Params from_cos_shear(double c, double x) {
  if (!(c >= -1.0 && c <= 1.0)) throw Error(ErrorKind::invalid_input, "cos(J tau) must lie in [-1, 1]");
  if (!(x > 0.0 && x <= 1.0)) throw Error(ErrorKind::invalid_input, "shear x must lie in (0, 1]");
  Params p;
  p.J = 1.0;
  p.tau = std::acos(c);
  p.c = c;
  p.s = std::sqrt(1.0 - c * c);
  p.x = x;
  p.eta = strength_from_shear(x);
  return p;
}

SpectralSystem system(double J) {
  RVector energies(2);
  energies << J, -J;
  const double h = 1.0 / std::numbers::sqrt2;
  CVector psi(2), target(2);
  psi << h, h;
  target << h, -h;
  return build_system(energies, CMatrix::Identity(2, 2), psi, target);
}

Complex closed_phi_k(const Params& p, std::size_t k) {
  if (k < 1) throw Error(ErrorKind::invalid_input, "k must be at least 1");
  if (k == 1) return p.c;
  return -p.s * p.s * std::pow(p.c, static_cast<double>(k - 2));
}

Complex closed_phi_prime_k(const Params& p, std::size_t k) {
  if (k < 1) throw Error(ErrorKind::invalid_input, "k must be at least 1");
  return -kI * std::pow(p.c, static_cast<double>(k - 1)) * p.s;
}

Complex closed_gf(const Params& p, Complex z, Which which) {
  const double shrink = 1.0 - p.x;  // sqrt(1 - eta)
  const Complex weak_den = 1.0 + shrink * z * z - z * (1.0 + shrink) * p.c;
  switch (which) {
    case Which::phi: return checked_ratio(z * (p.c - z), 1.0 - z * p.c);
    case Which::phi_prime: return checked_ratio(-kI * z * p.s, 1.0 - z * p.c);
    case Which::phi_eta: return checked_ratio(std::sqrt(p.eta) * z * (p.c - z), weak_den);
    case Which::phi_eta_prime: return checked_ratio(-kI * std::sqrt(p.eta) * z * p.s, weak_den);
  }
  throw Error(ErrorKind::invalid_input, "unknown generating function");
}

std::pair<Complex, Complex> closed_lambdas(const Params& p) {
  const double x = p.x;
  const Complex root = std::sqrt(Complex{x * x * p.c * p.c - 4.0 * (1.0 - x) * p.s * p.s, 0.0});
  Complex plus = 0.5 * ((2.0 - x) * p.c + root);
  Complex minus = 0.5 * ((2.0 - x) * p.c - root);
  if (eigenvalue_precedes(minus, plus)) std::swap(plus, minus);
  return {plus, minus};
}

std::pair<Complex, Complex> closed_coefficients(const Params& p) {
  const auto [l1, l2] = closed_lambdas(p);
  const Complex gap = l1 - l2;
  if (std::abs(gap) < 1e-12) throw Error(ErrorKind::ill_conditioned, "coincident eigenvalues (exceptional point)");
  return {(p.c * l1 - 1.0) / gap, (p.c * l2 - 1.0) / (-gap)};
}

std::vector<Complex> closed_phi_eta_series(const Params& p, std::size_t n_max) {
  // f * (1 - (2 - x) c z + (1 - x) z^2) = sqrt(eta) (c z - z^2)
  const double root_eta = std::sqrt(p.eta);
  const double a1 = (2.0 - p.x) * p.c;
  const double a2 = -(1.0 - p.x);
  std::vector<Complex> f(n_max);
  for (std::size_t n = 1; n <= n_max; ++n) {
    double v = n == 1 ? root_eta * p.c : (n == 2 ? -root_eta : 0.0);
    if (n >= 2) v += a1 * f[n - 2].real();
    if (n >= 3) v += a2 * f[n - 3].real();
    f[n - 1] = v;
  }
  return f;
}

double closed_total_probability(const Params& p) {
  const auto [l1, l2] = closed_lambdas(p);
  const auto [a1, a2] = closed_coefficients(p);
  const Complex l[2] = {l1, l2};
  const Complex a[2] = {a1, a2};
  Complex sum{};
  for (int j = 0; j < 2; ++j)
    for (int k = 0; k < 2; ++k) sum += a[j] * std::conj(a[k]) / (1.0 - l[j] * std::conj(l[k]));
  return p.eta * sum.real();
}

std::vector<Figure1Row> figure1_data(double x, std::span<const double> cos_grid) {
  std::vector<Figure1Row> rows;
  rows.reserve(cos_grid.size());
  for (double c : cos_grid) {
    const auto [l1, l2] = closed_lambdas(from_cos_shear(c, x));
    const Complex lambdas[2] = {l1, l2};
    const CMatrix nu = nu_matrix(lambdas);
    rows.push_back({c, std::abs(nu(0, 0)), std::abs(nu(1, 1)), std::abs(nu(0, 1)), std::abs(nu(1, 0))});
  }
  return rows;
}

Figure2Table figure2_data(double c, std::span<const double> eta_grid, std::size_t n_max) {
  Figure2Table t;
  t.c = c;
  t.n_max = n_max;
  for (double eta : eta_grid) {
    const auto series = closed_phi_eta_series(from_cos(c, eta), n_max);
    std::vector<double> column;
    column.reserve(n_max);
    for (const auto& v : series) column.push_back(std::norm(v));
    t.etas.push_back(eta);
    t.probability.push_back(std::move(column));
  }
  return t;
}

}  // namespace qwalk::twolevel

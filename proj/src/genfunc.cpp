#include "qwalk/genfunc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace qwalk {

namespace {

constexpr double kPoleTol = 1e-13;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Sum_j c_j z e_j / (1 - z e_j) over levels with nonzero weight.
Complex resolvent_sum(const SpectralSystem& system, double tau, const CVector& weights, Complex z) {
  Complex acc{};
  const auto& E = system.energies();
  for (Eigen::Index j = 0; j < E.size(); ++j) {
    if (std::abs(weights[j]) <= kBrightTol) continue;
    const Complex pole = std::exp(kI * E[j] * tau);
    if (std::abs(z - pole) < kPoleTol) {
      std::ostringstream os;
      os << "generating function evaluated at a pole z = " << pole;
      throw Error(ErrorKind::singular, os.str());
    }
    const Complex e = std::conj(pole);
    acc += weights[j] * z * e / (1.0 - z * e);
  }
  return acc;
}

// Mean of f over M equispaced angles, doubling M until two successive means
// agree to `tol`.
template <class F>
ContourResult periodic_mean(F&& f, double tol) {
  ContourResult out;
  std::size_t m = kContourStartNodes;
  Complex sum{};
  for (std::size_t k = 0; k < m; ++k) sum += f(kTwoPi * static_cast<double>(k) / static_cast<double>(m));
  Complex mean = sum / static_cast<double>(m);
  while (m < kContourMaxNodes) {
    Complex odd{};
    for (std::size_t k = 0; k < m; ++k)
      odd += f(kTwoPi * (static_cast<double>(k) + 0.5) / static_cast<double>(m));
    const Complex refined = 0.5 * (mean + odd / static_cast<double>(m));
    m *= 2;
    const bool settled = std::abs(refined - mean) < tol;
    mean = refined;
    if (!std::isfinite(mean.real()) || !std::isfinite(mean.imag())) break;
    if (settled) {
      out.converged = true;
      break;
    }
  }
  out.value = mean;
  out.nodes = m;
  return out;
}

}  // namespace

Complex eval_u_hat(const SpectralSystem& system, double tau, Complex z) {
  return resolvent_sum(system, tau, system.overlaps().cast<Complex>(), z);
}

Complex eval_u_prime_hat(const SpectralSystem& system, double tau, const CVector& target, Complex z) {
  if (target.size() != static_cast<Eigen::Index>(system.dim()))
    throw Error(ErrorKind::invalid_input, "target dimension mismatch");
  // c_j = <target|E_j><E_j|psi>
  const CVector target_components = system.eigenvectors().adjoint() * target;
  const CVector weights = target_components.conjugate().cwiseProduct(system.detector_components());
  return resolvent_sum(system, tau, weights, z);
}

Complex eval_phi_hat(const SpectralSystem& system, double tau, Complex z) {
  const Complex u = eval_u_hat(system, tau, z);
  const Complex denom = 1.0 + u;
  if (std::abs(denom) < 1e-14)
    throw Error(ErrorKind::singular, "1 + u_hat(z) vanishes; z is a pole of phi_hat");
  return u / denom;
}

Complex eval_phi_eta_hat(const MonitoredEvolution& evo, Complex z, GfRoute route) {
  const double root_eta = std::sqrt(evo.eta());
  const double x = evo.x();
  switch (route) {
    case GfRoute::via_u: {
      const Complex u = eval_u_hat(evo.system(), evo.tau(), z);
      const Complex denom = 1.0 + x * u;
      if (std::abs(denom) < 1e-14) throw Error(ErrorKind::singular, "1 + x u_hat(z) vanishes");
      return root_eta * u / denom;
    }
    case GfRoute::via_phi: {
      const Complex phi = eval_phi_hat(evo.system(), evo.tau(), z);
      const Complex denom = 1.0 - (1.0 - x) * phi;
      if (std::abs(denom) < 1e-14) throw Error(ErrorKind::singular, "1 - (1 - x) phi_hat(z) vanishes");
      return root_eta * phi / denom;
    }
    case GfRoute::resolvent: {
      const auto d = static_cast<Eigen::Index>(evo.system().dim());
      const CMatrix a = CMatrix::Identity(d, d) - z * evo.sheared() * evo.step_unitary();
      Eigen::PartialPivLU<CMatrix> lu(a);
      if (lu.rcond() < 1e-14) throw Error(ErrorKind::singular, "1 - z Q_eta U is singular");
      const CVector v = lu.solve(evo.detector());
      return z * root_eta * evo.detector().dot(evo.step_unitary() * v);
    }
  }
  throw Error(ErrorKind::invalid_input, "unknown route");
}

Complex eval_phi_eta_hat(const SpectralSystem& system, double tau, double eta, Complex z, GfRoute route) {
  if (route == GfRoute::resolvent) return eval_phi_eta_hat(build_evolution(system, tau, eta), z, route);
  if (!(eta > 0.0 && eta <= 1.0)) throw Error(ErrorKind::invalid_input, "eta must lie in (0, 1]");
  const double x = shear_from_strength(eta);
  if (route == GfRoute::via_u) {
    const Complex u = eval_u_hat(system, tau, z);
    const Complex denom = 1.0 + x * u;
    if (std::abs(denom) < 1e-14) throw Error(ErrorKind::singular, "1 + x u_hat(z) vanishes");
    return std::sqrt(eta) * u / denom;
  }
  const Complex phi = eval_phi_hat(system, tau, z);
  const Complex denom = 1.0 - (1.0 - x) * phi;
  if (std::abs(denom) < 1e-14) throw Error(ErrorKind::singular, "1 - (1 - x) phi_hat(z) vanishes");
  return std::sqrt(eta) * phi / denom;
}

Complex eval_phi_eta_prime_hat(const SpectralSystem& system, double tau, double eta,
                               const CVector& target, Complex z) {
  if (!(eta > 0.0 && eta <= 1.0)) throw Error(ErrorKind::invalid_input, "eta must lie in (0, 1]");
  const double x = shear_from_strength(eta);
  const Complex u = eval_u_hat(system, tau, z);
  const Complex denom = 1.0 + x * u;
  if (std::abs(denom) < 1e-14) throw Error(ErrorKind::singular, "1 + x u_hat(z) vanishes");
  return std::sqrt(eta) * eval_u_prime_hat(system, tau, target, z) / denom;
}

Complex RationalGF::evaluate(Complex z) const {
  if (form == RationalForm::u_hat) {
    const Complex d = poly::evaluate(d_coefficients, z);
    if (std::abs(d) < kPoleTol) throw Error(ErrorKind::singular, "u_hat evaluated at a pole");
    return z * poly::evaluate(p_coefficients, z) / d;
  }
  Complex acc = -phase_prefactor * z;
  for (std::size_t k = 1; k < numerator_zeros.size(); ++k) {
    const Complex zk = numerator_zeros[k];
    const Complex denom = 1.0 - z * std::conj(zk);
    if (std::abs(denom) < kPoleTol) throw Error(ErrorKind::singular, "phi_hat evaluated at a pole");
    acc *= (z - zk) / denom;
  }
  return acc;
}

Complex RationalGF::evaluate_phi_polynomial(Complex z) const {
  return poly::evaluate(phi_numerator, z) / poly::evaluate(phi_denominator, z);
}

Complex RationalGF::log_derivative_phi(Complex z) const {
  return poly::evaluate(phi_numerator_d, z) / poly::evaluate(phi_numerator, z) -
         poly::evaluate(phi_denominator_d, z) / poly::evaluate(phi_denominator, z);
}

RationalGF build_rational_forms(const SpectralSystem& system, double tau, RationalForm form) {
  RationalGF gf;
  gf.form = form;
  gf.levels = effective_levels(system, tau);
  const auto& levels = gf.levels.bright;
  if (levels.empty()) throw Error(ErrorKind::invalid_input, "no detector-visible levels");

  std::vector<Complex> w;
  for (const auto& l : levels) w.push_back(std::exp(kI * l.phase));

  gf.d_coefficients = {Complex{1.0, 0.0}};
  for (const auto& wk : w) {
    const Complex factor[2] = {wk, Complex{-1.0, 0.0}};
    gf.d_coefficients = poly::multiply(gf.d_coefficients, factor);
  }
  gf.p_coefficients = {Complex{}};
  for (std::size_t j = 0; j < w.size(); ++j) {
    poly::Coefficients term{Complex{levels[j].weight, 0.0}};
    for (std::size_t k = 0; k < w.size(); ++k) {
      if (k == j) continue;
      const Complex factor[2] = {w[k], Complex{-1.0, 0.0}};
      term = poly::multiply(term, factor);
    }
    gf.p_coefficients = poly::add(gf.p_coefficients, term);
  }

  gf.phi_numerator = poly::Coefficients{Complex{}};
  gf.phi_numerator.insert(gf.phi_numerator.end(), gf.p_coefficients.begin(), gf.p_coefficients.end());
  gf.phi_denominator = poly::add(gf.d_coefficients, gf.phi_numerator);
  // Leading terms of D and z P cancel (the weights sum to one); drop the remainder.
  gf.phi_denominator.pop_back();
  gf.phi_numerator_d = poly::derivative(gf.phi_numerator);
  gf.phi_denominator_d = poly::derivative(gf.phi_denominator);

  gf.numerator_zeros.push_back(Complex{});
  const auto zeros = poly::roots(gf.p_coefficients);
  gf.numerator_zeros.insert(gf.numerator_zeros.end(), zeros.begin(), zeros.end());

  gf.phase_prefactor = Complex{1.0, 0.0};
  for (const auto& l : levels) gf.phase_prefactor *= -std::exp(-kI * l.phase);

  if (form == RationalForm::u_hat) {
    gf.pole_list = w;
  } else {
    for (const auto& zk : zeros)
      if (std::abs(zk) > 1e-300) gf.pole_list.push_back(1.0 / std::conj(zk));
  }
  return gf;
}

ContourResult winding_contour(const RationalGF& gf) {
  for (double radius : {1.0, 1.0 - 1e-9}) {
    bool finite = true;
    auto integrand = [&](double omega) {
      const Complex z = radius * std::exp(kI * omega);
      const Complex v = gf.log_derivative_phi(z) * z;
      if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) finite = false;
      return v;
    };
    ContourResult r = periodic_mean(integrand, 1e-10);
    r.radius = radius;
    if (finite) return r;
  }
  ContourResult failed;
  failed.value = Complex{std::nan(""), std::nan("")};
  return failed;
}

std::string method_name(WindingMethod m) { return m == WindingMethod::roots ? "roots" : "contour"; }

WindingReport winding_number(const SpectralSystem& system, double tau, WindingMethod method) {
  const RationalGF gf = build_rational_forms(system, tau, RationalForm::phi_hat);
  WindingReport rep;
  rep.method = method;
  rep.all_zeros = gf.numerator_zeros;
  rep.bright_levels = gf.levels.bright.size();
  rep.merged_levels = gf.levels.merged_groups;

  for (const auto& z : rep.all_zeros) {
    const double r = std::abs(z);
    if (std::abs(r - 1.0) < kCircleTol)
      rep.zeros_on_circle.push_back(z);
    else if (r < 1.0)
      rep.zeros_inside.push_back(z);
    else
      rep.zeros_outside.push_back(z);
  }

  // Group near-coincident zeros (transitive closure).
  const std::size_t nz = rep.all_zeros.size();
  std::vector<std::size_t> parent(nz);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t i) {
    while (parent[i] != i) i = parent[i] = parent[parent[i]];
    return i;
  };
  for (std::size_t a = 0; a < nz; ++a)
    for (std::size_t b = a + 1; b < nz; ++b)
      if (std::abs(rep.all_zeros[a] - rep.all_zeros[b]) < kZeroDegeneracyTol) parent[find(b)] = find(a);
  for (std::size_t root = 0; root < nz; ++root) {
    std::vector<std::size_t> group;
    for (std::size_t i = 0; i < nz; ++i)
      if (find(i) == root) group.push_back(i);
    if (group.size() > 1) rep.degenerate_groups.push_back(std::move(group));
  }

  if (!gf.levels.merged_groups.empty())
    rep.warnings.push_back("degenerate levels merged into effective levels before counting");
  if (gf.levels.resonant) {
    rep.boundary_case = true;
    rep.warnings.push_back(
        "distinct energies coincide mod 2pi/tau; a zero of P_N sits on the unit circle");
  }
  if (!rep.zeros_on_circle.empty()) {
    rep.boundary_case = true;
    rep.warnings.push_back("zeros on the unit circle; winding number not certified");
  }
  if (!rep.zeros_outside.empty())
    rep.warnings.push_back("zeros of P_N found outside the unit disk");
  if (!rep.degenerate_groups.empty())
    rep.warnings.push_back(
        "degenerate zeros counted with multiplicity; degeneracy may reduce the physical winding number");

  const int root_count = static_cast<int>(rep.zeros_inside.size());
  if (!rep.boundary_case) {
    const ContourResult c = winding_contour(gf);
    rep.contour_evaluated = true;
    rep.contour_value = c.value;
    rep.contour_nodes = c.nodes;
    rep.contour_radius = c.radius;
    const double nearest = std::round(c.value.real());
    rep.contour_residual = std::abs(c.value - Complex{nearest, 0.0});
    if (!c.converged) rep.warnings.push_back("contour quadrature did not converge");
    const int contour_count = static_cast<int>(nearest);
    rep.n_w = method == WindingMethod::roots ? root_count : contour_count;
    rep.certified = c.converged && rep.contour_residual < 1e-6 && contour_count == root_count;
    if (c.converged && contour_count != root_count)
      rep.warnings.push_back("roots and contour methods disagree");
  } else {
    rep.n_w = root_count;
  }
  return rep;
}

double return_probability_integral(const SpectralSystem& system, double tau, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw Error(ErrorKind::invalid_input, "eta must lie in (0, 1]");
  const RationalGF gf = build_rational_forms(system, tau, RationalForm::phi_hat);
  if (gf.levels.resonant)
    throw Error(ErrorKind::boundary_case, "resonant levels: generating function has a pole on |z| = 1");
  for (const auto& z : gf.numerator_zeros)
    if (std::abs(std::abs(z) - 1.0) < kCircleTol)
      throw Error(ErrorKind::boundary_case, "zero of P_N on the unit circle");

  const double root_eta = std::sqrt(eta);
  const double shrink = 1.0 - shear_from_strength(eta);
  auto integrand = [&](double omega) {
    const Complex phi = gf.evaluate_phi_polynomial(std::exp(kI * omega));
    return Complex{std::norm(root_eta * phi / (1.0 - shrink * phi)), 0.0};
  };
  const ContourResult r = periodic_mean(integrand, 1e-13);
  if (!r.converged) throw Error(ErrorKind::convergence, "return-probability quadrature did not converge");
  return r.value.real();
}

}  // namespace qwalk

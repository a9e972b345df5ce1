#include "qwalk/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace qwalk {

std::string stats_method_name(StatsMethod m) {
  switch (m) {
    case StatsMethod::series: return "series";
    case StatsMethod::topological: return "topological";
    case StatsMethod::spectral: return "spectral";
  }
  return "unknown";
}

ReturnStats mean_return_series(const AmplitudeSeries& series, double tau) {
  ReturnStats st;
  st.method = StatsMethod::series;
  double total = 0.0, first = 0.0, second = 0.0;
  for (std::size_t i = 0; i < series.values.size(); ++i) {
    const double n = static_cast<double>(i + 1);
    const double w = std::norm(series.values[i]);
    total += w;
    first += n * w;
    second += n * n * w;
  }
  st.total_probability = total;
  st.mean_n = first;
  st.second_moment_n = second;
  st.variance_n = second - first * first;
  st.mean_time = tau * st.mean_n;
  st.variance_time = tau * tau * st.variance_n;

  // Geometric tail model: the missing mass S decays with per-step hazard h.
  const double tail = std::isnan(series.survival) ? std::max(0.0, 1.0 - total) : series.survival;
  if (tail > 0.0 && !series.values.empty()) {
    const double last = std::norm(series.values.back());
    const double hazard = std::clamp(last / (tail + last), 1e-300, 1.0);
    const double n = static_cast<double>(series.n_max());
    st.mean_error_estimate = tail * (n + 1.0 / hazard);
    st.second_moment_error_estimate = tail * (n * n + 2.0 * n / hazard + 2.0 / (hazard * hazard));
  }
  st.reliable = total > 1.0 - 1e-6 && !series.saturated;
  return st;
}

double mean_return_topological(const WindingReport& winding, double eta) {
  if (!(eta > 0.0 && eta <= 1.0)) throw Error(ErrorKind::invalid_input, "eta must lie in (0, 1]");
  if (winding.boundary_case || !winding.certified) {
    std::ostringstream os;
    os << "winding number is not certified";
    for (const auto& w : winding.warnings) os << "; " << w;
    throw Error(winding.boundary_case ? ErrorKind::boundary_case : ErrorKind::convergence, os.str());
  }
  return static_cast<double>(winding.n_w) / eta;
}

bool eigenvalue_precedes(Complex a, Complex b) {
  const double ma = std::abs(a), mb = std::abs(b);
  if (std::abs(ma - mb) > 1e-12) return ma > mb;
  return std::arg(a) > std::arg(b);
}

void sort_eigenvalues(std::vector<Complex>& lambdas) {
  std::stable_sort(lambdas.begin(), lambdas.end(), eigenvalue_precedes);
}

Complex SpectralDecompositionQ::reconstruct(std::size_t n, double eta) const {
  Complex acc{};
  for (std::size_t j = 0; j < lambdas.size(); ++j) {
    Complex power{1.0, 0.0};
    for (std::size_t k = 1; k < n; ++k) power *= lambdas[j];
    acc += coefficients[j] * power;
  }
  return std::sqrt(eta) * acc;
}

SpectralDecompositionQ spectral_decompose(const MonitoredEvolution& evo) {
  const CMatrix m = evo.sheared() * evo.step_unitary();
  Eigen::ComplexEigenSolver<CMatrix> solver(m);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::convergence, "eigensolver for Q_eta U did not converge");

  CMatrix right = solver.eigenvectors();
  for (Eigen::Index j = 0; j < right.cols(); ++j) right.col(j).normalize();
  Eigen::JacobiSVD<CMatrix> svd(right);
  const auto& sv = svd.singularValues();
  const double smallest = sv[sv.size() - 1];
  const double condition = smallest > 0.0 ? sv[0] / smallest : std::numeric_limits<double>::infinity();
  if (!(condition < kMaxEigenbasisCondition)) {
    std::ostringstream os;
    os << "eigenbasis of Q_eta U is ill-conditioned (condition ~ " << condition
       << "); use the series method";
    throw Error(ErrorKind::ill_conditioned, os.str());
  }

  // <psi|U M^{n-1}|psi> = sum_j (<psi|U r_j>) (l_j^dagger psi) lambda_j^{n-1}, L = R^{-1}.
  const CVector& psi = evo.detector();
  const CVector left_weights = right.partialPivLu().solve(psi);
  const CVector right_weights = right.adjoint() * (evo.step_unitary().adjoint() * psi);

  const auto d = static_cast<std::size_t>(m.rows());
  std::vector<std::size_t> order(d);
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto& ev = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return eigenvalue_precedes(ev[static_cast<Eigen::Index>(a)], ev[static_cast<Eigen::Index>(b)]);
  });

  SpectralDecompositionQ dec;
  dec.condition_estimate = condition;
  for (std::size_t j : order) {
    const auto k = static_cast<Eigen::Index>(j);
    dec.lambdas.push_back(ev[k]);
    dec.coefficients.push_back(std::conj(right_weights[k]) * left_weights[k]);
    dec.bright_mask.push_back(std::abs(ev[k]) < 1.0 - 1e-12);
  }
  return dec;
}

ReturnStats moments_spectral(const SpectralDecompositionQ& dec, double eta, double tau) {
  const std::size_t d = dec.lambdas.size();
  for (std::size_t j = 0; j < d; ++j) {
    if (!dec.bright_mask[j] && std::abs(dec.coefficients[j]) > 1e-9) {
      std::ostringstream os;
      os << "eigenvalue " << dec.lambdas[j]
         << " on the unit circle carries weight; moment sums have a near-singular denominator";
      throw Error(ErrorKind::singular, os.str());
    }
  }
  Complex total{}, first{}, second{};
  for (std::size_t j = 0; j < d; ++j) {
    if (!dec.bright_mask[j]) continue;
    for (std::size_t k = 0; k < d; ++k) {
      if (!dec.bright_mask[k]) continue;
      const Complex g = dec.lambdas[j] * std::conj(dec.lambdas[k]);
      if (std::abs(g) >= 1.0 - 1e-12) throw Error(ErrorKind::singular, "near-singular moment denominator");
      const Complex w = dec.coefficients[j] * std::conj(dec.coefficients[k]);
      const Complex one_minus = 1.0 - g;
      total += w / one_minus;
      first += w / (one_minus * one_minus);
      second += w * (1.0 + g) / (one_minus * one_minus * one_minus);
    }
  }
  total *= eta;
  first *= eta;
  second *= eta;

  ReturnStats st;
  st.method = StatsMethod::spectral;
  st.imaginary_residual = std::max({std::abs(total.imag()), std::abs(first.imag()), std::abs(second.imag())});
  // The double sums are real by j <-> k symmetry; tolerance is relative to the moment scale.
  const double scale = std::max({1.0, std::abs(first.real()), std::abs(second.real())});
  if (st.imaginary_residual > 1e-8 * scale) {
    std::ostringstream os;
    os << "moment sums have imaginary part " << st.imaginary_residual << "; decomposition failed";
    throw Error(ErrorKind::ill_conditioned, os.str());
  }
  st.total_probability = total.real();
  st.mean_n = first.real();
  st.second_moment_n = second.real();
  st.variance_n = st.second_moment_n - st.mean_n * st.mean_n;
  st.mean_time = tau * st.mean_n;
  st.variance_time = tau * tau * st.variance_n;
  return st;
}

ScalingFit small_eta_scaling(const SpectralSystem& system, double tau, std::span<const double> eta_grid) {
  if (eta_grid.empty() || *std::min_element(eta_grid.begin(), eta_grid.end()) > 0.01 + 1e-15)
    throw Error(ErrorKind::invalid_input, "eta grid must reach at least one decade below 0.1");

  ScalingFit fit;
  std::vector<double> etas(eta_grid.begin(), eta_grid.end());
  std::sort(etas.begin(), etas.end());
  for (double eta : etas) {
    const MonitoredEvolution evo = build_evolution(system, tau, eta);
    ReturnStats st;
    try {
      st = moments_spectral(spectral_decompose(evo), eta, tau);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ill_conditioned && e.kind() != ErrorKind::singular) throw;
      st = mean_return_series(monitored_series_to_tail(evo), tau);
    }
    fit.etas.push_back(eta);
    fit.scaled_mean.push_back(eta * st.mean_n);
    fit.scaled_second.push_back(eta * eta * st.second_moment_n);
    fit.methods.push_back(st.method);
  }

  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  std::vector<double> low_mean, low_second;
  for (std::size_t i = 0; i < fit.etas.size(); ++i) {
    if (fit.etas[i] > 0.1 + 1e-12) continue;
    low_mean.push_back(fit.scaled_mean[i]);
    low_second.push_back(fit.scaled_second[i]);
  }
  fit.rho1 = median(low_mean);
  // eta^2 <n^2> still approaches its limit linearly in eta; take the smallest eta.
  fit.rho2 = fit.scaled_second.front();
  for (double v : fit.scaled_mean) fit.max_deviation_rho1 = std::max(fit.max_deviation_rho1, std::abs(v - fit.rho1));
  for (double v : low_second)
    fit.max_deviation_rho2 = std::max(fit.max_deviation_rho2, std::abs(v - fit.rho2) / std::abs(fit.rho2));

  // Drift per decade: compare eta with eta/10 where both are on the grid.
  bool have_pair = false;
  for (std::size_t i = 0; i < fit.etas.size(); ++i) {
    if (fit.etas[i] > 0.1 + 1e-12) continue;
    for (std::size_t k = 0; k < fit.etas.size(); ++k) {
      if (std::abs(fit.etas[k] * 10.0 - fit.etas[i]) > 1e-9 * fit.etas[i]) continue;
      have_pair = true;
      fit.max_decade_drift_rho2 = std::max(
          fit.max_decade_drift_rho2, std::abs(fit.scaled_second[i] - fit.scaled_second[k]) / std::abs(fit.scaled_second[k]));
    }
  }
  if (!have_pair) {
    // No exact decade pairs: scale the largest relative change between neighbours to a decade.
    for (std::size_t i = 1; i < fit.etas.size(); ++i) {
      if (fit.etas[i] > 0.1 + 1e-12) continue;
      const double decades = std::log10(fit.etas[i] / fit.etas[i - 1]);
      if (decades <= 0.0) continue;
      const double rel = std::abs(fit.scaled_second[i] - fit.scaled_second[i - 1]) / std::abs(fit.scaled_second[i - 1]);
      fit.max_decade_drift_rho2 = std::max(fit.max_decade_drift_rho2, rel / decades);
    }
  }
  fit.plateau_detected = fit.max_decade_drift_rho2 < 0.05;

  const WindingReport w = winding_number(system, tau);
  std::ostringstream diag;
  if (w.certified) {
    fit.n_w = w.n_w;
    fit.rho1_matches_winding = std::abs(fit.rho1 - w.n_w) < 1e-3;
  } else {
    diag << "winding number not certified; ";
  }
  if (!fit.plateau_detected)
    diag << "no plateau: eta^2 <n^2> drifts " << fit.max_decade_drift_rho2 << " per decade; ";
  fit.diagnostic = diag.str();
  return fit;
}

CMatrix nu_matrix(std::span<const Complex> lambdas) {
  const auto d = static_cast<Eigen::Index>(lambdas.size());
  CMatrix nu(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index k = 0; k < d; ++k) {
      const Complex g = lambdas[static_cast<std::size_t>(j)] * std::conj(lambdas[static_cast<std::size_t>(k)]);
      if (std::abs(g) >= 1.0 - 1e-12) throw Error(ErrorKind::singular, "nu_jk has a singular denominator");
      const Complex one_minus = 1.0 - g;
      nu(j, k) = (1.0 + g) / (one_minus * one_minus * one_minus);
    }
  }
  return nu;
}

CMatrix nu_matrix(const SpectralDecompositionQ& dec) {
  std::vector<Complex> bright;
  for (std::size_t j = 0; j < dec.lambdas.size(); ++j)
    if (dec.bright_mask[j]) bright.push_back(dec.lambdas[j]);
  return nu_matrix(bright);
}

}  // namespace qwalk

#include "qwalk/amplitudes.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>

namespace qwalk {

std::string protocol_name(Protocol p) {
  switch (p) {
    case Protocol::unitary: return "unitary";
    case Protocol::weak: return "weak";
    case Protocol::projective: return "projective";
    case Protocol::random: return "random";
  }
  return "unknown";
}

namespace detail {

double iterate_amplitudes(const CMatrix& unitary, const CMatrix& miss_operator, const CVector& psi,
                          const CVector& bra, double prefactor, std::size_t n_max,
                          std::vector<Complex>& out) {
  const CMatrix step = unitary * miss_operator;
  CVector y = unitary * psi;
  CVector next(y.size());
  out.resize(n_max);
  for (std::size_t n = 0; n < n_max; ++n) {
    out[n] = prefactor * bra.dot(y);
    next.noalias() = step * y;
    y.swap(next);
  }
  return y.squaredNorm();
}

}  // namespace detail

namespace {

double captured(const std::vector<Complex>& values) {
  double sum = 0.0;
  for (const auto& v : values) sum += std::norm(v);
  return sum;
}

void require_length(std::size_t n_max) {
  if (n_max < 1) throw Error(ErrorKind::invalid_input, "n_max must be at least 1");
}

Protocol monitored_tag(const MonitoredEvolution& evo) {
  return evo.eta() == 1.0 ? Protocol::projective : Protocol::weak;
}

}  // namespace

AmplitudeSeries unitary_series(const MonitoredEvolution& evo, std::size_t n_max) {
  require_length(n_max);
  AmplitudeSeries s;
  const auto d = static_cast<Eigen::Index>(evo.system().dim());
  detail::iterate_amplitudes(evo.step_unitary(), CMatrix::Identity(d, d), evo.detector(),
                             evo.detector(), 1.0, n_max, s.values);
  s.captured_probability = captured(s.values);
  s.protocol = Protocol::unitary;
  s.parameter = 0.0;
  return s;
}

AmplitudeSeries monitored_series(const MonitoredEvolution& evo, std::size_t n_max) {
  require_length(n_max);
  AmplitudeSeries s;
  s.survival = detail::iterate_amplitudes(evo.step_unitary(), evo.sheared(), evo.detector(),
                                          evo.detector(), std::sqrt(evo.eta()), n_max, s.values);
  s.captured_probability = captured(s.values);
  s.protocol = monitored_tag(evo);
  s.parameter = evo.eta();
  return s;
}

AmplitudeSeries transition_series(const MonitoredEvolution& evo, const CVector& target,
                                  std::size_t n_max) {
  require_length(n_max);
  if (target.size() != evo.detector().size())
    throw Error(ErrorKind::invalid_input, "target dimension mismatch");
  if (std::abs(target.norm() - 1.0) > kUnitTol)
    throw Error(ErrorKind::invalid_input, "target vector is not normalized");
  AmplitudeSeries s;
  s.survival = detail::iterate_amplitudes(evo.step_unitary(), evo.sheared(), evo.detector(), target,
                                          std::sqrt(evo.eta()), n_max, s.values);
  s.captured_probability = captured(s.values);
  s.protocol = monitored_tag(evo);
  s.parameter = evo.eta();
  s.kind = SeriesKind::transition;
  return s;
}

double interior_spectral_radius(const MonitoredEvolution& evo) {
  const CMatrix m = evo.sheared() * evo.step_unitary();
  Eigen::ComplexEigenSolver<CMatrix> solver(m, /*computeEigenvectors=*/false);
  double best = 0.0;
  for (Eigen::Index j = 0; j < solver.eigenvalues().size(); ++j) {
    const double r = std::abs(solver.eigenvalues()[j]);
    if (r < 1.0 - 1e-12) best = std::max(best, r);
  }
  return best;
}

std::size_t adaptive_truncation(const MonitoredEvolution& evo, double tail_eps,
                                std::size_t hard_cap) {
  if (!(tail_eps > 0.0 && tail_eps < 1.0))
    throw Error(ErrorKind::invalid_input, "tail_eps must lie in (0, 1)");
  if (evo.eta() < 1e-5)
    std::cerr << "warning: eta = " << evo.eta()
              << " implies mean return ~ n_w/eta steps; truncation may approach the step cap\n";

  // Survival decays like |lambda_max|^(2n); use it to size the first block.
  std::size_t budget = 64;
  const double radius = interior_spectral_radius(evo);
  if (radius > 0.0) {
    const double predicted = std::log(tail_eps) / (2.0 * std::log(radius));
    if (predicted > static_cast<double>(hard_cap))
      throw Error(ErrorKind::convergence,
                  "predicted truncation length exceeds the hard step cap for this eta");
    budget = std::max<std::size_t>(budget, static_cast<std::size_t>(std::ceil(predicted)) + 1);
  }
  budget = std::min(budget, hard_cap);

  const CMatrix step = evo.step_unitary() * evo.sheared();
  CVector y = evo.step_unitary() * evo.detector();
  CVector next(y.size());
  std::size_t n = 0;
  for (;;) {
    const double survival_at_block_start = y.squaredNorm();
    while (n < budget) {
      ++n;
      next.noalias() = step * y;
      y.swap(next);
      const double survival = y.squaredNorm();
      if (survival < tail_eps) return n;
    }
    const double survival = y.squaredNorm();
    if (survival > survival_at_block_start * (1.0 - 1e-12))
      throw Error(ErrorKind::convergence,
                  "captured probability stalls below 1 - tail_eps (undetectable component)");
    if (budget >= hard_cap)
      throw Error(ErrorKind::convergence, "hard step cap reached before tail target");
    budget = std::min(budget * 2, hard_cap);
  }
}

AmplitudeSeries monitored_series_to_tail(const MonitoredEvolution& evo, double tail_eps) {
  try {
    return monitored_series(evo, adaptive_truncation(evo, tail_eps));
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::convergence) throw;
    // Keep what is computable and flag it; statistics downstream mark it unreliable.
    auto s = monitored_series(evo, std::min<std::size_t>(kHardStepCap, 1'000'000));
    s.saturated = true;
    return s;
  }
}

}  // namespace qwalk

#include "qwalk/randomtime.hpp"

#include <cmath>
#include <random>

#include "qwalk/parallel.hpp"

namespace qwalk {

RandomProtocol build_random_protocol(const MonitoredEvolution& base, double p) {
  if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorKind::invalid_input, "measurement probability p must lie in (0, 1]");
  if (base.eta() != 1.0) throw Error(ErrorKind::invalid_input, "random protocol needs the projective evolution (eta = 1)");
  RandomProtocol proto;
  proto.base_ = base;
  proto.p_ = p;
  proto.tau_ = base.tau();
  const auto d = static_cast<Eigen::Index>(base.system().dim());
  const CMatrix identity = CMatrix::Identity(d, d);
  const CMatrix& U = base.step_unitary();
  const CMatrix& P = base.projector();
  const double sp = std::sqrt(p), sq = std::sqrt(1.0 - p);
  proto.detect_ = sp * P * U;
  proto.miss_ = sp * (identity - P) * U;
  proto.skip_ = sq * U;
  proto.r_op_ = (sp + sq) * identity - sp * P;

  if (proto.completeness_defect() > kUnitTol)
    throw Error(ErrorKind::invalid_input, "Kraus operators are not complete");
  if (max_abs(proto.r_op_ * U - proto.miss_ - proto.skip_) > kUnitTol)
    throw Error(ErrorKind::invalid_input, "R_p U differs from K_miss + K_skip");
  return proto;
}

double RandomProtocol::completeness_defect() const {
  const auto d = detect_.rows();
  const CMatrix sum = detect_.adjoint() * detect_ + miss_.adjoint() * miss_ + skip_.adjoint() * skip_;
  return max_abs(sum - CMatrix::Identity(d, d));
}

double RandomProtocol::interval_probability(std::size_t n) const {
  if (n < 1) return 0.0;
  return std::pow(1.0 - p_, static_cast<double>(n - 1)) * p_;
}

AmplitudeSeries phi_p_series(const RandomProtocol& proto, std::size_t n_max) {
  if (n_max < 1) throw Error(ErrorKind::invalid_input, "n_max must be at least 1");
  AmplitudeSeries s;
  const auto& base = proto.base();
  detail::iterate_amplitudes(base.step_unitary(), proto.r_op(), base.detector(), base.detector(),
                             std::sqrt(proto.p()), n_max, s.values);
  for (const auto& v : s.values) s.captured_probability += std::norm(v);
  s.protocol = Protocol::random;
  s.parameter = proto.p();
  return s;
}

Complex eval_phi_p_hat(const RandomProtocol& proto, Complex z) {
  const auto& base = proto.base();
  const auto d = static_cast<Eigen::Index>(base.system().dim());
  const CMatrix a = CMatrix::Identity(d, d) - z * proto.r_op() * base.step_unitary();
  Eigen::PartialPivLU<CMatrix> lu(a);
  if (lu.rcond() < 1e-14) throw Error(ErrorKind::singular, "1 - z R_p U is singular");
  const CVector v = lu.solve(base.detector());
  return std::sqrt(proto.p()) * z * base.detector().dot(base.step_unitary() * v);
}

namespace {

// Advances the undetected branch by one step; returns the detection weight.
double channel_step(const RandomProtocol& proto, CMatrix& rho) {
  const auto& base = proto.base();
  const CMatrix& U = base.step_unitary();
  const CVector& psi = base.detector();
  const CMatrix evolved = U * rho * U.adjoint();
  const double p = proto.p();
  const double detected = p * std::real(psi.dot(evolved * psi));
  const CMatrix projected = evolved - base.projector() * evolved - evolved * base.projector() +
                            base.projector() * evolved * base.projector();
  rho = p * projected + (1.0 - p) * evolved;
  return detected;
}

}  // namespace

DetectionDistribution detection_time_distribution(const RandomProtocol& proto, std::size_t n_max) {
  DetectionDistribution out;
  const CVector& psi = proto.base().detector();
  CMatrix rho = psi * psi.adjoint();
  out.probabilities.reserve(n_max);
  for (std::size_t n = 0; n < n_max; ++n) out.probabilities.push_back(channel_step(proto, rho));
  out.survival = std::real(rho.trace());
  return out;
}

DetectionDistribution detection_time_distribution_to_tail(const RandomProtocol& proto, double tail_eps) {
  if (!(tail_eps > 0.0 && tail_eps < 1.0)) throw Error(ErrorKind::invalid_input, "tail_eps must lie in (0, 1)");
  DetectionDistribution out;
  const CVector& psi = proto.base().detector();
  CMatrix rho = psi * psi.adjoint();
  while (out.survival >= tail_eps) {
    if (out.probabilities.size() >= kHardStepCap)
      throw Error(ErrorKind::convergence, "hard step cap reached before tail target");
    out.probabilities.push_back(channel_step(proto, rho));
    out.survival = std::real(rho.trace());
  }
  return out;
}

double mean_time_random(const RandomProtocol& proto, const WindingReport& winding, RandomRoute route) {
  if (route == RandomRoute::topological) {
    if (winding.boundary_case || !winding.certified)
      throw Error(ErrorKind::boundary_case, "winding number is not certified");
    return proto.mean_interval() * static_cast<double>(winding.n_w);
  }
  const DetectionDistribution dist = detection_time_distribution_to_tail(proto);
  double mean = 0.0;
  for (std::size_t i = 0; i < dist.probabilities.size(); ++i)
    mean += static_cast<double>(i + 1) * dist.probabilities[i];
  return proto.tau() * mean;
}

MonteCarloResult monte_carlo_first_detection(const RandomProtocol& proto, std::size_t trials,
                                             std::uint64_t seed, std::size_t step_cap, unsigned threads) {
  if (trials < 1) throw Error(ErrorKind::invalid_input, "trials must be at least 1");
  const auto& base = proto.base();
  if (step_cap == 0) {
    const auto bright = static_cast<double>(base.system().bright_levels().size());
    step_cap = static_cast<std::size_t>(std::ceil(200.0 * bright / proto.p()));
  }
  const CMatrix& U = base.step_unitary();
  const CVector& psi = base.detector();
  const double p = proto.p();

  std::vector<std::size_t> detected_at(trials, 0);  // 0 = censored
  parallel_for(trials, threads, [&](std::size_t trial) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
    std::mt19937_64 rng(seq);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);
    CVector state = psi;
    CVector next(state.size());
    for (std::size_t n = 1; n <= step_cap; ++n) {
      next.noalias() = U * state;
      state.swap(next);
      if (uniform(rng) >= p) continue;
      const Complex overlap = psi.dot(state);
      if (uniform(rng) < std::norm(overlap)) {
        detected_at[trial] = n;
        return;
      }
      state -= overlap * psi;
      state.normalize();
    }
  });

  MonteCarloResult out;
  out.trials = trials;
  out.seed = seed;
  out.step_cap = step_cap;
  double sum = 0.0, sum_sq = 0.0;
  std::size_t k = 0;
  for (std::size_t n : detected_at) {
    if (n == 0) {
      ++out.censored;
      continue;
    }
    ++out.histogram[n];
    const double t = proto.tau() * static_cast<double>(n);
    sum += t;
    sum_sq += t * t;
    ++k;
  }
  if (k > 0) {
    out.mean_t = sum / static_cast<double>(k);
    const double var = k > 1 ? std::max(0.0, (sum_sq - sum * out.mean_t) / static_cast<double>(k - 1)) : 0.0;
    out.stderr_t = std::sqrt(var / static_cast<double>(k));
  }
  return out;
}

}  // namespace qwalk

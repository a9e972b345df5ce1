// randomtime.hpp
// Projective monitoring at random times: each step is followed by a
// measurement with probability p.  Kraus set
//   K_detect = sqrt(p) P U,  K_miss = sqrt(p) Q U,  K_skip = sqrt(1-p) U
// and the averaged-amplitude operator R_p = (sqrt(p) + sqrt(1-p)) 1 - sqrt(p) P.

#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "qwalk/amplitudes.hpp"
#include "qwalk/genfunc.hpp"

namespace qwalk {

class RandomProtocol {
 public:
  double p() const { return p_; }
  double tau() const { return tau_; }
  const MonitoredEvolution& base() const { return base_; }
  const CMatrix& kraus_detect() const { return detect_; }
  const CMatrix& kraus_miss() const { return miss_; }
  const CMatrix& kraus_skip() const { return skip_; }
  const CMatrix& r_op() const { return r_op_; }

  // max |sum_k K_k^dagger K_k - 1|
  double completeness_defect() const;
  // P(n tau) = (1 - p)^{n-1} p
  double interval_probability(std::size_t n) const;
  // tau / p
  double mean_interval() const { return tau_ / p_; }

 private:
  friend RandomProtocol build_random_protocol(const MonitoredEvolution&, double);
  MonitoredEvolution base_;
  double p_ = 1.0;
  double tau_ = 1.0;
  CMatrix detect_, miss_, skip_, r_op_;
};

// base must be the projective evolution (eta = 1).  Throws on p outside (0, 1].
RandomProtocol build_random_protocol(const MonitoredEvolution& base, double p);

// phi_{p,n} = sqrt(p) <psi|U (R_p U)^{n-1}|psi>.  R_p U is not a contraction
// for p < 1, so sum |phi_{p,n}|^2 need not be a probability.
AmplitudeSeries phi_p_series(const RandomProtocol& proto, std::size_t n_max);

// sqrt(p) z <psi|U (1 - z R_p U)^{-1}|psi> by linear solve.
Complex eval_phi_p_hat(const RandomProtocol& proto, Complex z);

// First-detection distribution F_n of the Kraus channel (probability that
// the first detection happens at step n), propagated on the density matrix
// of the undetected branch.
struct DetectionDistribution {
  std::vector<double> probabilities;  // F_n, n = 1..size
  double survival = 1.0;              // trace of the undetected branch afterwards
};

DetectionDistribution detection_time_distribution(const RandomProtocol& proto, std::size_t n_max);
DetectionDistribution detection_time_distribution_to_tail(const RandomProtocol& proto,
                                                          double tail_eps = kDefaultTailEps);

enum class RandomRoute { series, topological };

// topological: (tau / p) n_w.  series: tau sum_n n F_n of the channel.
double mean_time_random(const RandomProtocol& proto, const WindingReport& winding, RandomRoute route);

struct MonteCarloResult {
  double mean_t = 0.0;
  double stderr_t = 0.0;
  std::size_t trials = 0;
  std::size_t censored = 0;
  std::uint64_t seed = 0;
  std::size_t step_cap = 0;
  std::map<std::size_t, std::size_t> histogram;  // detection step n -> count
};

// Trajectory sampling with collapse at measured steps.  Per-trial streams
// are derived from (seed, trial index) so results do not depend on threading.
// step_cap = 0 selects ceil(200 * bright_levels / p).
MonteCarloResult monte_carlo_first_detection(const RandomProtocol& proto, std::size_t trials,
                                             std::uint64_t seed, std::size_t step_cap = 0,
                                             unsigned threads = 0);

}  // namespace qwalk

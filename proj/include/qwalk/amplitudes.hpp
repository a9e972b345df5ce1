// amplitudes.hpp
// Return and transition amplitude series obtained by direct iteration of the
// monitored one-step operator.

#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "qwalk/spectral.hpp"

namespace qwalk {

enum class Protocol { unitary, weak, projective, random };
enum class SeriesKind { return_amplitude, transition };

std::string protocol_name(Protocol p);

// values[0] is the n = 1 term.
struct AmplitudeSeries {
  std::vector<Complex> values;
  double captured_probability = 0.0;
  // Undetected norm^2 after the last step, computed from the surviving state
  // itself rather than as 1 - captured.  NaN where it has no meaning.
  double survival = std::numeric_limits<double>::quiet_NaN();
  Protocol protocol = Protocol::weak;
  double parameter = 1.0;  // eta or p
  SeriesKind kind = SeriesKind::return_amplitude;
  // Set when the survival stopped decreasing while still above the tail target.
  bool saturated = false;

  std::size_t n_max() const { return values.size(); }
  Complex at(std::size_t n) const { return values.at(n - 1); }
};

inline constexpr double kDefaultTailEps = 1e-10;
inline constexpr std::size_t kHardStepCap = 10'000'000;

// u_n = <psi|U^n|psi>
AmplitudeSeries unitary_series(const MonitoredEvolution& evo, std::size_t n_max);

// phi_{eta,n} = sqrt(eta) <psi|U (Q_eta U)^{n-1}|psi>
AmplitudeSeries monitored_series(const MonitoredEvolution& evo, std::size_t n_max);

// phi'_{eta,n} = sqrt(eta) <target|U (Q_eta U)^{n-1}|psi>
AmplitudeSeries transition_series(const MonitoredEvolution& evo, const CVector& target,
                                  std::size_t n_max);

// Smallest N with 1 - sum_{n<=N} |phi_{eta,n}|^2 < tail_eps.  Throws
// Error(convergence) if the hard cap is hit or the survival stalls.
std::size_t adaptive_truncation(const MonitoredEvolution& evo, double tail_eps = kDefaultTailEps,
                                std::size_t hard_cap = kHardStepCap);

// monitored_series at the adaptive truncation length.
AmplitudeSeries monitored_series_to_tail(const MonitoredEvolution& evo,
                                         double tail_eps = kDefaultTailEps);

// Largest-modulus eigenvalue of Q_eta U strictly inside the unit disk (0 if none).
double interior_spectral_radius(const MonitoredEvolution& evo);

namespace detail {

// y_1 = U psi, a_n = prefactor * <bra|y_n>, y_{n+1} = U S y_n.  One
// matrix-vector product per step.  Returns the final survival ||y_{N+1}||^2.
double iterate_amplitudes(const CMatrix& unitary, const CMatrix& miss_operator, const CVector& psi,
                          const CVector& bra, double prefactor, std::size_t n_max,
                          std::vector<Complex>& out);

}  // namespace detail

}  // namespace qwalk

// spectral.hpp
// System definition (spectral data + detector) and the monitored one-step
// operators U, P and the sheared no-detection operator Q_eta = 1 - x P.

#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "qwalk/types.hpp"

namespace qwalk {

inline constexpr double kUnitTol = 1e-12;
// Levels with overlap above this are detector-visible ("bright").
inline constexpr double kBrightTol = 1e-10;
// Phases E_j*tau closer than this (mod 2pi) are merged into one level.
inline constexpr double kDegeneracyTol = 1e-10;

// Immutable after construction.  dim = N + 1.
class SpectralSystem {
 public:
  std::size_t dim() const { return static_cast<std::size_t>(energies_.size()); }
  const RVector& energies() const { return energies_; }
  // Columns are the eigenvectors |E_j>.
  const CMatrix& eigenvectors() const { return eigenvectors_; }
  const CVector& detector() const { return detector_; }
  const std::optional<CVector>& target() const { return target_; }
  // p_j = |<E_j|psi>|^2
  const RVector& overlaps() const { return overlaps_; }
  // <E_j|psi>
  const CVector& detector_components() const { return components_; }

  bool is_bright(std::size_t j) const { return overlaps_[static_cast<Eigen::Index>(j)] > kBrightTol; }
  std::vector<std::size_t> bright_levels() const;
  std::vector<std::size_t> dark_levels() const;

 private:
  friend SpectralSystem build_system(const RVector&, const CMatrix&, const CVector&,
                                     const std::optional<CVector>&);
  RVector energies_;
  CMatrix eigenvectors_;
  CVector detector_;
  std::optional<CVector> target_;
  RVector overlaps_;
  CVector components_;
};

// Throws Error(invalid_input) on dimension mismatch, non-unitary basis or
// non-unit detector/target vectors.
SpectralSystem build_system(const RVector& energies, const CMatrix& eigenvectors,
                            const CVector& detector,
                            const std::optional<CVector>& target = std::nullopt);

// Dense Hermitian input, eigendecomposed internally.
SpectralSystem system_from_hamiltonian(const CMatrix& hamiltonian, const CVector& detector,
                                       const std::optional<CVector>& target = std::nullopt);

// One effective detector-visible level after merging degenerate phases.
struct EffectiveLevel {
  double phase = 0.0;   // E*tau reduced to [0, 2pi)
  double weight = 0.0;  // summed p_j
  std::vector<std::size_t> members;
};

struct LevelStructure {
  std::vector<EffectiveLevel> bright;
  std::vector<std::size_t> dark;
  // Groups of original indices that were merged (only groups of size > 1).
  std::vector<std::vector<std::size_t>> merged_groups;
  // True when a merge joined levels whose energies differ but whose phases
  // coincide mod 2pi (stroboscopic resonance, e.g. J*tau = 0 mod pi).
  bool resonant = false;
};

LevelStructure effective_levels(const SpectralSystem& system, double tau);

// x = 1 - sqrt(1 - eta), evaluated without cancellation for small eta.
double shear_from_strength(double eta);
// Inverse map eta = 1 - (1 - x)^2.
double strength_from_shear(double x);

class MonitoredEvolution {
 public:
  const SpectralSystem& system() const { return system_; }
  const CMatrix& step_unitary() const { return unitary_; }
  const CMatrix& projector() const { return projector_; }
  const CMatrix& sheared() const { return sheared_; }
  const CVector& detector() const { return system_.detector(); }
  double tau() const { return tau_; }
  double eta() const { return eta_; }
  double x() const { return x_; }

 private:
  friend MonitoredEvolution build_evolution(const SpectralSystem&, double, double);
  SpectralSystem system_;
  CMatrix unitary_;
  CMatrix projector_;
  CMatrix sheared_;
  double tau_ = 0.0;
  double eta_ = 1.0;
  double x_ = 1.0;
};

// Requires 0 < eta <= 1 and tau > 0.
MonitoredEvolution build_evolution(const SpectralSystem& system, double tau, double eta);

// V diag(exp(-i E_j tau)) V^dagger
CMatrix step_unitary(const SpectralSystem& system, double tau);

}  // namespace qwalk

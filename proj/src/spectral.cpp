#include "qwalk/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

namespace qwalk {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_unit(const CVector& v, const char* name) {
  const double n = v.norm();
  if (std::abs(n - 1.0) > kUnitTol) {
    std::ostringstream os;
    os << name << " vector is not normalized (norm = " << n << ")";
    throw Error(ErrorKind::invalid_input, os.str());
  }
}

double wrap_phase(double phase) {
  double w = std::fmod(phase, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w;
}

double circular_distance(double a, double b) {
  const double d = std::abs(a - b);
  return std::min(d, kTwoPi - d);
}

}  // namespace

std::vector<std::size_t> SpectralSystem::bright_levels() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < dim(); ++j)
    if (is_bright(j)) out.push_back(j);
  return out;
}

std::vector<std::size_t> SpectralSystem::dark_levels() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < dim(); ++j)
    if (!is_bright(j)) out.push_back(j);
  return out;
}

SpectralSystem build_system(const RVector& energies, const CMatrix& eigenvectors,
                            const CVector& detector, const std::optional<CVector>& target) {
  const auto d = energies.size();
  if (d == 0) throw Error(ErrorKind::invalid_input, "system has no levels");
  if (eigenvectors.rows() != d || eigenvectors.cols() != d || detector.size() != d ||
      (target && target->size() != d)) {
    throw Error(ErrorKind::invalid_input, "dimension mismatch between energies, basis and states");
  }
  if (!energies.allFinite() || !eigenvectors.allFinite() || !detector.allFinite())
    throw Error(ErrorKind::invalid_input, "non-finite entries in system definition");
  const double defect = max_abs(eigenvectors.adjoint() * eigenvectors - CMatrix::Identity(d, d));
  if (defect > kUnitTol) {
    std::ostringstream os;
    os << "eigenvector matrix is not unitary (max deviation " << defect << ")";
    throw Error(ErrorKind::invalid_input, os.str());
  }
  require_unit(detector, "detector");
  if (target) require_unit(*target, "target");

  SpectralSystem s;
  s.energies_ = energies;
  s.eigenvectors_ = eigenvectors;
  s.detector_ = detector;
  s.target_ = target;
  s.components_ = eigenvectors.adjoint() * detector;
  s.overlaps_ = s.components_.cwiseAbs2();
  return s;
}

SpectralSystem system_from_hamiltonian(const CMatrix& hamiltonian, const CVector& detector,
                                       const std::optional<CVector>& target) {
  if (hamiltonian.rows() != hamiltonian.cols())
    throw Error(ErrorKind::invalid_input, "hamiltonian is not square");
  const double scale = std::max(1.0, max_abs(hamiltonian));
  if (max_abs(hamiltonian - hamiltonian.adjoint()) > kUnitTol * scale)
    throw Error(ErrorKind::invalid_input, "hamiltonian is not Hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(hamiltonian);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::convergence, "Hermitian eigensolver failed");
  return build_system(solver.eigenvalues(), solver.eigenvectors(), detector, target);
}

LevelStructure effective_levels(const SpectralSystem& system, double tau) {
  LevelStructure out;
  std::vector<std::size_t> bright;
  for (std::size_t j = 0; j < system.dim(); ++j) {
    if (system.is_bright(j))
      bright.push_back(j);
    else
      out.dark.push_back(j);
  }
  const auto& E = system.energies();
  auto phase_of = [&](std::size_t j) { return wrap_phase(E[static_cast<Eigen::Index>(j)] * tau); };
  std::sort(bright.begin(), bright.end(),
            [&](std::size_t a, std::size_t b) { return phase_of(a) < phase_of(b); });

  // Chain neighbours on the sorted circle; the last group may wrap onto the first.
  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t j : bright) {
    if (!groups.empty() && circular_distance(phase_of(groups.back().back()), phase_of(j)) < kDegeneracyTol)
      groups.back().push_back(j);
    else
      groups.push_back({j});
  }
  if (groups.size() > 1 &&
      circular_distance(phase_of(groups.back().back()), phase_of(groups.front().front())) < kDegeneracyTol) {
    groups.front().insert(groups.front().begin(), groups.back().begin(), groups.back().end());
    groups.pop_back();
  }

  const auto& p = system.overlaps();
  for (auto& g : groups) {
    EffectiveLevel level;
    level.phase = phase_of(g.front());
    for (std::size_t j : g) level.weight += p[static_cast<Eigen::Index>(j)];
    std::sort(g.begin(), g.end());
    level.members = g;
    if (g.size() > 1) {
      out.merged_groups.push_back(g);
      for (std::size_t a = 0; a < g.size(); ++a)
        for (std::size_t b = a + 1; b < g.size(); ++b)
          if (std::abs(E[static_cast<Eigen::Index>(g[a])] - E[static_cast<Eigen::Index>(g[b])]) * tau >=
              kDegeneracyTol)
            out.resonant = true;
    }
    out.bright.push_back(std::move(level));
  }
  return out;
}

double shear_from_strength(double eta) { return eta / (1.0 + std::sqrt(1.0 - eta)); }

double strength_from_shear(double x) { return x * (2.0 - x); }

CMatrix step_unitary(const SpectralSystem& system, double tau) {
  const CVector phases = (-kI * tau * system.energies().cast<Complex>()).array().exp();
  const CMatrix& V = system.eigenvectors();
  return V * phases.asDiagonal() * V.adjoint();
}

MonitoredEvolution build_evolution(const SpectralSystem& system, double tau, double eta) {
  if (!(eta > 0.0 && eta <= 1.0))
    throw Error(ErrorKind::invalid_input, "measurement strength eta must lie in (0, 1]");
  if (!(tau > 0.0) || !std::isfinite(tau))
    throw Error(ErrorKind::invalid_input, "tau must be positive");

  MonitoredEvolution evo;
  evo.system_ = system;
  evo.tau_ = tau;
  evo.eta_ = eta;
  evo.x_ = shear_from_strength(eta);
  evo.unitary_ = step_unitary(system, tau);
  const CVector& psi = system.detector();
  evo.projector_ = psi * psi.adjoint();
  const auto d = static_cast<Eigen::Index>(system.dim());
  evo.sheared_ = CMatrix::Identity(d, d) - evo.x_ * evo.projector_;
  return evo;
}

}  // namespace qwalk

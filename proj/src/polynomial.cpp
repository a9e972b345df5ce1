#include "qwalk/polynomial.hpp"

#include <algorithm>

namespace qwalk::poly {

Coefficients multiply(std::span<const Complex> a, std::span<const Complex> b) {
  if (a.empty() || b.empty()) return {};
  Coefficients out(a.size() + b.size() - 1, Complex{});
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  return out;
}

Coefficients add(std::span<const Complex> a, std::span<const Complex> b) {
  Coefficients out(std::max(a.size(), b.size()), Complex{});
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return out;
}

Coefficients scale(std::span<const Complex> a, Complex factor) {
  Coefficients out(a.begin(), a.end());
  for (auto& c : out) c *= factor;
  return out;
}

Coefficients derivative(std::span<const Complex> a) {
  if (a.size() <= 1) return {Complex{}};
  Coefficients out(a.size() - 1);
  for (std::size_t i = 1; i < a.size(); ++i) out[i - 1] = static_cast<double>(i) * a[i];
  return out;
}

Coefficients from_roots(std::span<const Complex> roots) {
  Coefficients out{Complex{1.0, 0.0}};
  for (const auto& r : roots) {
    const Complex factor[2] = {-r, Complex{1.0, 0.0}};
    out = multiply(out, factor);
  }
  return out;
}

Complex evaluate(std::span<const Complex> a, Complex z) {
  Complex acc{};
  for (auto it = a.rbegin(); it != a.rend(); ++it) acc = acc * z + *it;
  return acc;
}

std::vector<Complex> roots(std::span<const Complex> a) {
  if (a.empty()) throw Error(ErrorKind::invalid_input, "empty polynomial");
  const std::size_t degree = a.size() - 1;
  if (degree == 0) return {};
  const Complex lead = a.back();
  if (lead == Complex{}) throw Error(ErrorKind::invalid_input, "leading coefficient is zero");

  const auto n = static_cast<Eigen::Index>(degree);
  CMatrix companion = CMatrix::Zero(n, n);
  for (Eigen::Index i = 1; i < n; ++i) companion(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < n; ++i) companion(i, n - 1) = -a[static_cast<std::size_t>(i)] / lead;

  Eigen::ComplexEigenSolver<CMatrix> solver(companion, /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorKind::convergence, "companion-matrix eigensolver did not converge");
  std::vector<Complex> out(solver.eigenvalues().begin(), solver.eigenvalues().end());

  // Newton polish against the original coefficients; keep a step only if it helps.
  const Coefficients da = derivative(a);
  for (auto& r : out) {
    for (int iter = 0; iter < 3; ++iter) {
      const Complex f = evaluate(a, r);
      const Complex df = evaluate(da, r);
      if (df == Complex{}) break;
      const Complex candidate = r - f / df;
      if (std::abs(evaluate(a, candidate)) >= std::abs(f)) break;
      r = candidate;
    }
  }
  return out;
}

}  // namespace qwalk::poly

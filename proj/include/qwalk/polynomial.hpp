// polynomial.hpp
// Dense complex polynomials, coefficients in ascending powers of z.

#pragma once

#include <span>
#include <vector>

#include "qwalk/types.hpp"

namespace qwalk::poly {

using Coefficients = std::vector<Complex>;

Coefficients multiply(std::span<const Complex> a, std::span<const Complex> b);
Coefficients add(std::span<const Complex> a, std::span<const Complex> b);
Coefficients scale(std::span<const Complex> a, Complex factor);
Coefficients derivative(std::span<const Complex> a);
// prod_k (z - r_k), monic.
Coefficients from_roots(std::span<const Complex> roots);

Complex evaluate(std::span<const Complex> a, Complex z);

// Eigenvalues of the companion matrix.  The leading coefficient must be
// nonzero; a constant polynomial has no roots.
std::vector<Complex> roots(std::span<const Complex> a);

}  // namespace qwalk::poly

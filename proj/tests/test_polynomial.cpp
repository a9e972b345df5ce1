#include <doctest.h>

#include <algorithm>

#include "qwalk/polynomial.hpp"
#include "test_support.hpp"

using namespace qwalk;

TEST_SUITE("polynomial") {

TEST_CASE("arithmetic on ascending coefficients") {
  const poly::Coefficients a{1.0, 2.0};        // 1 + 2z
  const poly::Coefficients b{-1.0, 0.0, 3.0};  // -1 + 3z^2
  const auto prod = poly::multiply(a, b);
  REQUIRE(prod.size() == 4);
  CHECK(std::abs(prod[0] - Complex{-1.0}) < 1e-15);
  CHECK(std::abs(prod[1] - Complex{-2.0}) < 1e-15);
  CHECK(std::abs(prod[2] - Complex{3.0}) < 1e-15);
  CHECK(std::abs(prod[3] - Complex{6.0}) < 1e-15);
  const auto sum = poly::add(a, b);
  CHECK(std::abs(poly::evaluate(sum, 2.0) - Complex{16.0}) < 1e-13);
  const auto der = poly::derivative(b);
  CHECK(std::abs(poly::evaluate(der, 2.0) - Complex{12.0}) < 1e-13);
  CHECK(std::abs(poly::evaluate(poly::scale(a, kI), 1.0) - Complex{0.0, 3.0}) < 1e-15);
}

TEST_CASE("roots recover the zeros they were built from") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t deg = 1 + static_cast<std::size_t>(trial % 8);
    std::vector<Complex> zeros;
    for (std::size_t k = 0; k < deg; ++k) zeros.push_back(testing::random_interior_point(rng, 1.5));
    const auto c = poly::from_roots(zeros);
    for (const auto& z : zeros) CHECK(std::abs(poly::evaluate(c, z)) < 1e-12);
    auto found = poly::roots(c);
    REQUIRE(found.size() == deg);
    // greedy matching
    for (const auto& z : zeros) {
      auto it = std::min_element(found.begin(), found.end(),
                                 [&](Complex a, Complex b) { return std::abs(a - z) < std::abs(b - z); });
      CHECK(std::abs(*it - z) < 1e-8);
      found.erase(it);
    }
  }
}

TEST_CASE("roots of a double root stay accurate to sqrt(eps)") {
  const auto c = poly::from_roots(std::vector<Complex>{Complex{0.3, 0.1}, Complex{0.3, 0.1}, Complex{-0.5}});
  const auto r = poly::roots(c);
  REQUIRE(r.size() == 3);
  int near = 0;
  for (const auto& z : r)
    if (std::abs(z - Complex{0.3, 0.1}) < 1e-6) ++near;
  CHECK(near == 2);
}

}

#include <doctest.h>

#include "qwalk/recursion.hpp"
#include "qwalk/twolevel.hpp"
#include "test_support.hpp"

using namespace qwalk;

TEST_SUITE("recursion") {

TEST_CASE("q_{n,m} equals the sum over compositions") {
  std::mt19937_64 rng(51);
  const auto sys = testing::make_system(testing::random_bright(4, 1.0, rng));
  const auto base = monitored_series(build_evolution(sys, 1.0, 1.0), 12);
  std::vector<Complex> phi(13);
  for (std::size_t n = 1; n <= 12; ++n) phi[n] = base.at(n);
  const auto table = build_convolution_table(base, 12);
  for (std::size_t n = 1; n <= 12; ++n)
    for (std::size_t m = 1; m <= n; ++m) CHECK(std::abs(table.q(n, m) - testing::composition_sum(phi, n, m)) < 1e-13);
  CHECK(std::abs(table.q(4, 2) - (2.0 * phi[1] * phi[3] + phi[2] * phi[2])) < 1e-14);
  CHECK(table.q(3, 5) == Complex{});
  for (std::size_t n = 1; n <= 12; ++n) {
    CHECK(std::abs(table.q(n, 1) - phi[n]) < 1e-15);
    CHECK(std::abs(table.q(n, n) - std::pow(phi[1], static_cast<double>(n))) < 1e-13);
  }
}

TEST_CASE("reconstructed weak series matches direct iteration") {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 4; ++trial) {
    const auto sys = testing::make_system(testing::random_bright(2 + trial, 1.0, rng));
    const auto base = monitored_series(build_evolution(sys, 1.0, 1.0), 50);
    const auto table = build_convolution_table(base, 50);
    for (double eta : {0.1, 0.5, 0.9}) {
      const auto rec = reconstruct_weak_series(table, eta);
      const auto direct = monitored_series(build_evolution(sys, 1.0, eta), 50);
      for (std::size_t n = 1; n <= 50; ++n) CHECK(std::abs(rec.at(n) - direct.at(n)) < 1e-10);
      CHECK(rec.protocol == Protocol::weak);
    }
    // eta = 1 reproduces the base
    const auto same = reconstruct_weak_series(table, 1.0);
    for (std::size_t n = 1; n <= 50; ++n) CHECK(std::abs(same.at(n) - base.at(n)) < 1e-14);
  }
}

TEST_CASE("truncation error bound dominates the profile") {
  const auto base = monitored_series(build_evolution(twolevel::system(1.0), 0.9, 1.0), 30);
  const auto table = build_convolution_table(base, 30);
  for (std::size_t cut : {1, 3, 10}) {
    const auto prof = truncation_error_profile(table, 0.3, cut);
    const auto bound = truncation_error_bound(table, 0.3, cut);
    REQUIRE(prof.size() == 30);
    for (std::size_t i = 0; i < prof.size(); ++i) CHECK(prof[i] <= bound[i] + 1e-15);
    for (std::size_t n = 1; n <= cut; ++n) CHECK(prof[n - 1] == 0.0);
  }
}

TEST_CASE("convolution table input checks") {
  const auto sys = twolevel::system(1.0);
  const auto weak = monitored_series(build_evolution(sys, 1.0, 0.5), 10);
  CHECK_THROWS_AS(build_convolution_table(weak, 10), Error);
  const auto proj = monitored_series(build_evolution(sys, 1.0, 1.0), 10);
  CHECK_THROWS_AS(build_convolution_table(proj, 11), Error);
}

}

#include <doctest.h>

#include "qwalk/randomtime.hpp"
#include "qwalk/twolevel.hpp"
#include "test_support.hpp"

using namespace qwalk;

namespace {

// First-detection probability at step n by enumerating every measurement
// schedule of steps 1..n-1 on pure states.
double enumerate_first_detection(const CMatrix& u, const CVector& psi, double p, std::size_t n) {
  const std::size_t patterns = std::size_t{1} << (n - 1);
  double total = 0.0;
  for (std::size_t mask = 0; mask < patterns; ++mask) {
    CVector state = psi;
    double weight = 1.0;
    for (std::size_t step = 1; step < n; ++step) {
      state = u * state;
      if (mask >> (step - 1) & 1u) {
        weight *= p;
        state -= psi.dot(state) * psi;  // unnormalized: carries the no-click probability
      } else {
        weight *= 1.0 - p;
      }
    }
    state = u * state;
    total += weight * p * std::norm(psi.dot(state));
  }
  return total;
}

}  // namespace

TEST_SUITE("randomtime") {

TEST_CASE("Kraus set is complete and R_p U splits into miss + skip") {
  std::mt19937_64 rng(61);
  const auto sys = testing::make_system(testing::random_bright(4, 1.0, rng));
  for (double p : {0.1, 0.25, 0.5, 0.9, 1.0}) {
    const auto proto = build_random_protocol(build_evolution(sys, 1.0, 1.0), p);
    CHECK(proto.completeness_defect() < 1e-12);
    CHECK(max_abs(proto.r_op() * proto.base().step_unitary() - proto.kraus_miss() - proto.kraus_skip()) < 1e-12);
    CHECK(proto.mean_interval() == doctest::Approx(1.0 / p));
    double sum = 0.0, mean = 0.0;
    for (std::size_t n = 1; n <= 4000; ++n) {
      sum += proto.interval_probability(n);
      mean += static_cast<double>(n) * proto.interval_probability(n);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mean == doctest::Approx(1.0 / p).epsilon(1e-9));
  }
  CHECK_THROWS_AS(build_random_protocol(build_evolution(sys, 1.0, 1.0), 0.0), Error);
  CHECK_THROWS_AS(build_random_protocol(build_evolution(sys, 1.0, 0.5), 0.5), Error);
}

TEST_CASE("p = 1 reduces to projective monitoring") {
  const auto sys = twolevel::system(1.0);
  const auto evo = build_evolution(sys, 0.9, 1.0);
  const auto proto = build_random_protocol(evo, 1.0);
  const auto rp = phi_p_series(proto, 30);
  const auto proj = monitored_series(evo, 30);
  const auto dist = detection_time_distribution(proto, 30);
  for (std::size_t n = 1; n <= 30; ++n) {
    CHECK(std::abs(rp.at(n) - proj.at(n)) < 1e-14);
    CHECK(dist.probabilities[n - 1] == doctest::Approx(std::norm(proj.at(n))).epsilon(1e-12));
  }
}

TEST_CASE("channel distribution matches schedule enumeration") {
  std::mt19937_64 rng(62);
  const auto draw = testing::random_bright(3, 1.0, rng);
  const auto sys = testing::make_system(draw);
  const CMatrix u = testing::exp_unitary(testing::hamiltonian(draw), 1.0);
  for (double p : {0.25, 0.6}) {
    const auto proto = build_random_protocol(build_evolution(sys, 1.0, 1.0), p);
    const auto dist = detection_time_distribution(proto, 10);
    for (std::size_t n = 1; n <= 10; ++n)
      CHECK(std::abs(dist.probabilities[n - 1] - enumerate_first_detection(u, draw.psi, p, n)) < 1e-13);
    double sum = 0.0;
    for (double f : dist.probabilities) sum += f;
    CHECK(sum + dist.survival == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("mean detection time is tau n_w / p") {
  std::mt19937_64 rng(63);
  for (std::size_t d : {2, 3, 5}) {
    const auto sys = testing::make_system(testing::random_bright(d, 0.8, rng));
    const auto w = winding_number(sys, 0.8);
    REQUIRE(w.certified);
    for (double p : {0.25, 0.5, 1.0}) {
      const auto proto = build_random_protocol(build_evolution(sys, 0.8, 1.0), p);
      const double series = mean_time_random(proto, w, RandomRoute::series);
      const double topo = mean_time_random(proto, w, RandomRoute::topological);
      CHECK(topo == doctest::Approx(0.8 * static_cast<double>(d) / p));
      CHECK(std::abs(series - topo) < 1e-6);
    }
  }
}

TEST_CASE("R_p generating function matches its series inside the convergence disk") {
  const auto sys = twolevel::system(1.0);
  const auto proto = build_random_protocol(build_evolution(sys, std::acos(0.5), 1.0), 0.5);
  const auto s = phi_p_series(proto, 400);
  const Complex z{0.25, 0.1};
  Complex acc{}, zn{1.0, 0.0};
  for (std::size_t n = 1; n <= 400; ++n) {
    zn *= z;
    acc += zn * s.at(n);
  }
  CHECK(std::abs(eval_phi_p_hat(proto, z) - acc) < 1e-12);
}

TEST_CASE("Monte Carlo is deterministic, thread independent and unbiased") {
  const auto sys = twolevel::system(1.0);
  const double tau = std::acos(0.5);
  const auto proto = build_random_protocol(build_evolution(sys, tau, 1.0), 0.5);
  const auto a = monte_carlo_first_detection(proto, 20000, 99, 0, 1);
  const auto b = monte_carlo_first_detection(proto, 20000, 99, 0, 3);
  CHECK(a.mean_t == b.mean_t);
  CHECK(a.histogram == b.histogram);
  const auto c = monte_carlo_first_detection(proto, 20000, 100, 0, 1);
  CHECK(a.mean_t != c.mean_t);
  const double expected = tau * 2.0 / 0.5;
  CHECK(std::abs(a.mean_t - expected) < 4.0 * a.stderr_t);
  CHECK(a.step_cap == 800);
  CHECK(a.censored == 0);
  std::size_t counted = 0;
  for (const auto& [n, k] : a.histogram) counted += k;
  CHECK(counted == a.trials);
}

}

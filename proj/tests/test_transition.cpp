#include <doctest.h>

#include <random>

#include "pwsopt/transition.hpp"
#include "test_support.hpp"

using namespace pwsopt;

TEST_SUITE("transition") {

TEST_CASE("quintic boundary and midpoint values") {
  const TransitionFunction phi = make_quintic_transition();
  CHECK(phi.eval(-1.0) == 0.0);
  CHECK(phi.eval(1.0) == 1.0);
  CHECK(phi.eval(-3.7) == 0.0);
  CHECK(phi.eval(42.0) == 1.0);
  CHECK(phi.eval(0.0) == 0.5);
  // Closed-form polynomial at a = 0.5: 1/2 + 15/32 - 5/64 + 3/512.
  CHECK(phi.eval(0.5) == doctest::Approx(0.896484375).epsilon(1e-15));
  CHECK(phi.deriv(0.0) == doctest::Approx(15.0 / 16.0).epsilon(1e-15));
}

TEST_CASE("contract holds on a dense sample of [-2, 2]") {
  const TransitionFunction phi = make_quintic_transition();
  auto rng = testing::make_rng(7);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);

  for (int i = 0; i < 400; ++i) {
    const double a = dist(rng);
    const double v = phi.eval(a);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    if (a <= -1.0) CHECK(v == 0.0);
    if (a >= 1.0) CHECK(v == 1.0);
    CHECK(phi.deriv(a) >= 0.0);

    // Finite-difference consistency of deriv and deriv2.
    const double h = 1e-6;
    const double fd1 = (phi.eval(a + h) - phi.eval(a - h)) / (2.0 * h);
    CHECK(phi.deriv(a) == doctest::Approx(fd1).epsilon(1e-6).scale(1.0));
    const double fd2 = (phi.deriv(a + h) - phi.deriv(a - h)) / (2.0 * h);
    CHECK(phi.deriv2(a) == doctest::Approx(fd2).epsilon(1e-5).scale(1.0));
  }

  // Strict monotonicity on (-1, 1).
  std::uniform_real_distribution<double> interior(-0.999, 0.999);
  for (int i = 0; i < 300; ++i) {
    double a = interior(rng), b = interior(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    CHECK(phi.eval(a) < phi.eval(b));
  }

  // Smooth patching at the boundary.
  CHECK(phi.deriv(-1.0) == 0.0);
  CHECK(phi.deriv(1.0) == 0.0);
  CHECK(phi.deriv2(-1.0) == 0.0);
  CHECK(phi.deriv2(1.0) == 0.0);
}

}  // TEST_SUITE

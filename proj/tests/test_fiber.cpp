#include <doctest.h>

#include <cmath>
#include <random>

#include "envlab/errors.hpp"
#include "envlab/fiber.hpp"
#include "envlab/gamma.hpp"
#include "envlab/quadrature.hpp"
#include "support/oracles.hpp"

using namespace envlab;

TEST_CASE("gamma function") {
  CHECK(envlab::gamma(1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(envlab::gamma(1.5) == doctest::Approx(std::sqrt(M_PI) / 2).epsilon(1e-14));
  CHECK(envlab::gamma(0.5) == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-14));
  double worst = 0.0;
  for (int i = 0; i <= 2500; ++i) {
    const double x = 0.5 + i * 0.001;
    worst = std::max(worst, std::abs(envlab::gamma(x) / std::tgamma(x) - 1.0));
    CHECK(envlab::gamma(x + 1.0) == doctest::Approx(x * envlab::gamma(x)).epsilon(1e-13));
  }
  CHECK(worst <= 1e-12);
  CHECK(envlab::gamma(0.1) == doctest::Approx(std::tgamma(0.1)).epsilon(1e-13));
  CHECK_THROWS_AS(envlab::gamma(0.0), DomainError);
  CHECK_THROWS_AS(envlab::gamma(-1.5), DomainError);
}

TEST_CASE("beta identity against an independent quadrature") {
  // B(x, y) = 2 ∫_0^{π/2} sin^{2x−1}θ cos^{2y−1}θ dθ
  auto beta_quad = [](double x, double y) {
    return 2.0 * oracle::gauss_legendre(
                     [&](double th) { return std::pow(std::sin(th), 2 * x - 1) * std::pow(std::cos(th), 2 * y - 1); },
                     0.0, M_PI / 2, 400);
  };
  CHECK(envlab::gamma(1.3) * envlab::gamma(1.7) / envlab::gamma(3.0) == doctest::Approx(beta_quad(1.3, 1.7)).epsilon(1e-9));
  CHECK(beta(1.5, 1.5) == doctest::Approx(M_PI / 8).epsilon(1e-13));
}

TEST_CASE("fiber measure validation") {
  CHECK_THROWS_AS(FiberMeasure(0.0, 1.0), InvalidParameterError);
  CHECK_THROWS_AS(FiberMeasure(1.0, -2.0), InvalidParameterError);
  FiberMeasure m = FiberMeasure::from_weights(std::log(2.0), std::log(3.0));
  CHECK(m.a == doctest::Approx(2.0));
  CHECK(m.b == doctest::Approx(3.0));
}

TEST_CASE("fiber volume") {
  CHECK(fiber_volume(FiberMeasure(1, 1)) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(fiber_mass_below(FiberMeasure(1, 1), 1.0) == doctest::Approx(0.5).epsilon(1e-13));
  // Antiderivative of ρ is −b/(r²a+b).
  FiberMeasure m(2.5, 0.4);
  CHECK(fiber_mass_below(m, 0.7) ==
        doctest::Approx(1.0 - m.b / (0.49 * m.a + m.b)).epsilon(1e-12));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  for (int i = 0; i < 100; ++i) {
    FiberMeasure r(u(rng), u(rng));
    CHECK(std::abs(fiber_volume(r) - 1.0) <= 1e-10);
  }
}

TEST_CASE("fiber moment closed forms") {
  FiberMeasure m(1, 1);
  CHECK(fiber_moment(m, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(bergman_fiber_integral(m, 0.0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(fiber_moment(m, 0.5) == doctest::Approx(M_PI / 8).epsilon(1e-12));
  CHECK(fiber_moment(m, 0.5) == doctest::Approx(beta(1.5, 1.5)).epsilon(1e-12));
  CHECK_THROWS_AS(fiber_moment(m, 1.5), InvalidParameterError);
  CHECK_THROWS_AS(fiber_moment(m, -0.1), InvalidParameterError);

  // Independent route: u = r² a/b turns I(t) into a^{−t} b^{t−1} ∫ u^t/(1+u)^3 du,
  // and u = tan²θ maps that onto [0, π/2).
  FiberMeasure q(3.0, 0.25);
  for (double t : {0.0, 0.125, 0.5, 0.875, 1.0}) {
    const double inner = oracle::gauss_legendre(
        [&](double th) {
          const double c = std::cos(th), s = std::sin(th);
          return 2.0 * std::pow(s / c, 2 * t) * s * std::pow(c, 3);
        },
        0.0, M_PI / 2, 200);
    const double expected = std::pow(q.a, -t) * std::pow(q.b, t - 1) * inner;
    CHECK(fiber_moment(q, t) == doctest::Approx(expected).epsilon(1e-10));
  }
}

TEST_CASE("fiber moment symmetry and scale invariance") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(0.1, 10.0);
  std::uniform_real_distribution<double> tt(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    const double a = u(rng), b = u(rng), t = tt(rng);
    const double base = std::pow(a, t) * std::pow(b, 1 - t) * fiber_moment(FiberMeasure(a, b), t);
    const double la = u(rng), mb = u(rng);
    const double scaled = std::pow(la * a, t) * std::pow(mb * b, 1 - t) *
                          fiber_moment(FiberMeasure(la * a, mb * b), t);
    CHECK(std::abs(scaled / base - 1.0) <= 1e-9);
    const double swapped = fiber_moment(FiberMeasure(b, a), 1.0 - t);
    CHECK(std::abs(swapped / fiber_moment(FiberMeasure(a, b), t) - 1.0) <= 1e-9);
  }
}

TEST_CASE("normalization constant of the Gamma profile") {
  CHECK(gamma_normalization_constant() == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(gamma_normalization_constant(true, FiberMeasure(0.3, 7.0)) == doctest::Approx(2.0).epsilon(1e-11));
  auto rep = check_gamma_profile(42, 20);
  CHECK(rep.passed);
  CHECK(rep.details["K_printed"].get<double>() == 4.0);
  CHECK_FALSE(rep.details["K_agrees"].get<bool>());
  CHECK(rep.details["max_relative_error_with_K_printed"].get<double>() == doctest::Approx(1.0));
}

TEST_CASE("quadrature tolerance and failure") {
  FiberMeasure m(1, 1);
  for (double tol : {1e-4, 1e-6, 1e-8, 1e-10, 1e-12}) {
    CHECK(std::abs(fiber_volume(m, tol) - 1.0) <= tol);
  }
  CHECK_THROWS_AS(integrate([](double x) { return std::sin(1.0 / (x + 1e-9)); }, 0.0, 1.0, 1e-14, 1),
                  PrecisionError);
}

TEST_CASE("holder fiber chain") {
  FiberMeasure m(1, 1);
  auto r1 = holder_fiber_chain(m, 0.0, 1);
  CHECK(r1.passed);
  CHECK(r1.details["lhs"].get<double>() == doctest::Approx(r1.details["rhs"].get<double>()).epsilon(1e-12));
  auto r2 = holder_fiber_chain(m, 0.5, 2);
  CHECK(r2.passed);
  CHECK(r2.details["lhs"].get<double>() > r2.details["rhs"].get<double>() * 1.01);
  auto rc = power_mean_check(FiberMeasure(2, 5), [](double) { return 0.7; }, 4);
  CHECK(rc.passed);
  CHECK(rc.details["lhs"].get<double>() == doctest::Approx(rc.details["rhs"].get<double>()).epsilon(1e-12));
  CHECK_THROWS_AS(holder_fiber_chain(m, 0.3, 2), InvalidParameterError);
  CHECK_THROWS_AS(holder_fiber_chain(m, 0.5, 0), InvalidParameterError);
  for (int n = 1; n <= 6; ++n)
    for (int l = 0; l <= n; ++l) CHECK(holder_fiber_chain(FiberMeasure(0.4, 2.2), double(l) / n, n).passed);
}

TEST_CASE("fiber volume suite") {
  auto rep = check_fiber_volume(7, 100);
  CHECK(rep.passed);
  CHECK(rep.max_violation <= 1e-10);
  CHECK(rep.anchor == "fiber-volume");
}

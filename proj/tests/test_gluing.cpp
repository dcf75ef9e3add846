#include <doctest.h>

#include <cmath>

#include "envlab/errors.hpp"
#include "envlab/family.hpp"
#include "envlab/gluing.hpp"
#include "envlab/models.hpp"
#include "envlab/sampled_weight.hpp"
#include "support/oracles.hpp"

using namespace envlab;

namespace {

double theta(double h) { return std::abs(h) < 1.0 ? std::exp(-1.0 / (1.0 - h * h)) : 0.0; }

/// ∫∫ max(x + h₁, y + h₂) θ(h₁)θ(h₂) / Z² with the inner integral split at the kink.
double oracle_max(double x, double y) {
  const double z = oracle::gauss_legendre(theta, -1.0, 1.0, 16);
  auto inner = [&](double h2) {
    const double kink = std::clamp(y + h2 - x, -1.0, 1.0);
    const double below = oracle::gauss_legendre([&](double h1) { return (y + h2) * theta(h1); }, -1.0, kink, 16);
    const double above = oracle::gauss_legendre([&](double h1) { return (x + h1) * theta(h1); }, kink, 1.0, 16);
    return (below + above) * theta(h2);
  };
  return oracle::gauss_legendre(inner, -1.0, 1.0, 16) / (z * z);
}

SampledWeight2D plane(const std::vector<double>& tau, const std::vector<double>& s, double a, double b, double c) {
  return SampledWeight2D::from_function(
      tau, s, [=](double t, double x) { return a * t + b * x + c; }, ConvexPolygon({{a, b}}));
}

}  // namespace

TEST_CASE("regularized max values") {
  const RegularizedMaxKernel k1{1.0};
  CHECK(regularized_max(k1, 5.0, 0.0) == 5.0);
  CHECK(regularized_max(k1, 0.0, 2.0) == 2.0);
  for (double x : {-3.0, 0.0, 1.7}) {
    const double m = regularized_max(k1, x, x);
    CHECK(m > x);
    CHECK(m <= x + 1.0);
  }
  CHECK(regularized_max(k1, 0.5, 0.0) == doctest::Approx(oracle_max(0.5, 0.0)).epsilon(1e-11));
  CHECK(regularized_max(k1, 0.0, 0.0) == doctest::Approx(oracle_max(0.0, 0.0)).epsilon(1e-11));
  CHECK(regularized_max(k1, -1.3, 0.0) == doctest::Approx(oracle_max(-1.3, 0.0)).epsilon(1e-11));

  // M_ε(x, y) = ε·M_1(x/ε, y/ε).
  const RegularizedMaxKernel k{0.3};
  CHECK(regularized_max(k, 0.12, -0.05) == doctest::Approx(0.3 * oracle_max(0.4, -0.05 / 0.3)).epsilon(1e-11));

  for (double eps : {1e-1, 1e-3, 1e-6}) {
    const double m = regularized_max({eps}, 0.25, 0.25 - eps / 4);
    CHECK(std::abs(m - 0.25) <= eps);
  }
  CHECK_THROWS_AS(RegularizedMaxKernel{0.0}.validate(), InvalidParameterError);
}

TEST_CASE("regularized max contract") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto rep = check_regularized_max(seed);
    CHECK(rep.passed);
    CHECK(rep.max_violation <= 1e-10);
  }
  CHECK(regularized_max_curvature_peak() > 0.6);
  CHECK(regularized_max_curvature_peak() < 0.7);
}

TEST_CASE("gluing weights") {
  const auto tau = linspace(-4, 4, 81);
  const auto s = linspace(-3, 3, 61);
  const RegularizedMaxKernel k{0.5};
  const GlueRegion region{1.0, 2.0};
  const auto outer = plane(tau, s, 2.0, 0.5, 0.0);

  SUBCASE("well separated inner is invisible") {
    const auto inner = plane(tau, s, 2.0, 0.5, -3.0 * k.epsilon);
    const auto g = glue_weights(outer, inner, region, k);
    CHECK(g.values() == outer.values());
  }
  SUBCASE("outer region untouched and blend below") {
    const auto inner = plane(tau, s, 0.0, 0.5, 0.5);
    const auto g = glue_weights(outer, inner, region, k);
    for (std::size_t i = 0; i < tau.size(); ++i)
      for (std::size_t j = 0; j < s.size(); ++j) {
        const double hi = std::max(outer.at(i, j), inner.at(i, j));
        if (tau[i] >= region.tau_inner) CHECK(g.at(i, j) == outer.at(i, j));
        CHECK(g.at(i, j) >= hi);
        CHECK(g.at(i, j) <= hi + k.epsilon);
      }
    CHECK(convexity_defect_2d(g) <= 1e-12);
    CHECK(g.slope_polytope().contains({0.0, 0.5}, 1e-12));
    CHECK(g.slope_polytope().contains({2.0, 0.5}, 1e-12));
  }
  SUBCASE("translation covariance") {
    const auto inner = plane(tau, s, 0.0, 0.5, 0.5);
    const auto g = glue_weights(outer, inner, region, k);
    auto shift = [](const SampledWeight2D& w, double c) {
      auto v = w.values();
      for (double& x : v) x += c;
      return w.with_values(v);
    };
    const auto g2 = glue_weights(shift(outer, 0.75), shift(inner, 0.75), region, k);
    for (std::size_t n = 0; n < g.values().size(); ++n)
      CHECK(g2.values()[n] - g.values()[n] == doctest::Approx(0.75).epsilon(1e-13));
  }
  SUBCASE("dominance failure") {
    const auto inner = plane(tau, s, 2.0, 0.5, -0.5);
    try {
      glue_weights(outer, inner, region, k);
      FAIL("expected a gluing failure");
    } catch (const GluingFailureError& e) {
      CHECK(e.margin() == doctest::Approx(-0.5));
      CHECK(tau[e.tau_index()] >= region.tau_inner);
      CHECK(tau[e.tau_index()] <= region.tau_outer);
    }
    auto fixed = inner;
    const double shift = normalize_for_gluing(outer, fixed, region, k);
    CHECK(shift == doctest::Approx(0.5).epsilon(1e-9));
    CHECK_NOTHROW(glue_weights(outer, fixed, region, k));
  }
  SUBCASE("invalid inputs") {
    const auto inner = plane(tau, s, 0.0, 0.5, 0.5);
    CHECK_THROWS_AS(glue_weights(outer, inner, {1.02, 1.08}, k), InvalidInputError);
    CHECK_THROWS_AS(glue_weights(outer, inner, {2.0, 1.0}, k), InvalidInputError);
    const auto other = plane(linspace(-4, 4, 41), s, 0.0, 0.5, 1.0);
    CHECK_THROWS_AS(glue_weights(outer, other, region, k), InvalidInputError);
  }
}

TEST_CASE("hirzebruch demo") {
  SUBCASE("default configuration passes") {
    auto res = hirzebruch_demo(HirzebruchConfig{});
    CHECK(res.report.passed);
    CHECK(res.report.details["failed_stage"].is_null());
    CHECK(res.report.details["convexity_defect"].get<double>() <= 1e-9);
    CHECK(res.report.details["outer_mismatches"].get<int>() == 0);
    CHECK(res.report.details["blended_samples"].get<int>() > 0);
  }
  SUBCASE("corrupted inner fails at convexity") {
    HirzebruchConfig c;
    c.corrupt_inner = true;
    auto res = hirzebruch_demo(c);
    CHECK_FALSE(res.report.passed);
    CHECK(res.report.details["failed_stage"] == "convexity");
  }
  SUBCASE("stage errors carry the stage") {
    HirzebruchConfig c;
    c.tau_inner = 5.0;
    c.tau_outer = 4.0;
    try {
      hirzebruch_demo(c);
      FAIL("expected a stage error");
    } catch (const StageError& e) {
      CHECK(e.stage() == "normalize");
    }
  }
  SUBCASE("config round trip") {
    HirzebruchConfig c;
    c.k = 5;
    c.epsilon = 0.25;
    auto back = HirzebruchConfig::from_json(c.to_json());
    CHECK(back.k == 5);
    CHECK(back.epsilon == 0.25);
    CHECK(back.to_json() == c.to_json());
    CHECK_THROWS_AS(HirzebruchConfig::from_json({{"k", 0}}), InvalidInputError);
  }
  SUBCASE("convex pair glues to a convex weight") {
    HirzebruchConfig c;
    c.d_L = 8;
    c.k = 9;
    auto res = hirzebruch_demo(c);
    CHECK(res.report.passed);
    CHECK(convexity_defect_2d(res.inner) <= 1e-9);
    CHECK(convexity_defect_2d(res.glued) <= 1e-9);
  }
}

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "envlab/envelope.hpp"
#include "envlab/errors.hpp"
#include "envlab/family.hpp"
#include "envlab/models.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace envlab;

namespace {

ModelBundlePair convex_pair(const std::vector<double>& grid) {
  auto a = SampledWeight::from_function(grid, [](double s) { return 2.0 * softplus(s); }, 0.0, 2.0);
  auto l = SampledWeight::from_function(grid, [](double s) { return softplus(s); }, 0.0, 1.0);
  return {a, 2, l, 1};
}

double sup_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("mixing weights") {
  const auto grid = linspace(-10, 10, 201);
  auto pair = bump_model_pair(grid);
  CHECK(mix_weights(pair, 0.0).values() == pair.phi_L.values());
  CHECK(mix_weights(pair, 1.0).values() == pair.phi_A.values());
  auto m = mix_weights(pair, 0.25);
  CHECK(m.slope_left() == 0.0);
  CHECK(m.slope_right() == doctest::Approx(1.25));
  CHECK_THROWS_AS(mix_weights(pair, 1.5), InvalidParameterError);
  CHECK_THROWS_AS(mix_weights(pair, -0.01), InvalidParameterError);

  auto a = SampledWeight::from_function(grid, [](double s) { return 2.0 * softplus(s); }, 0.0, 2.0);
  auto zero = SampledWeight::from_function(grid, [](double) { return 0.0; }, 0.0, 0.0);
  ModelBundlePair half{a, 2, zero, 0};
  auto h = mix_weights(half, 0.5);
  CHECK(h.slope_right() == 1.0);
  for (std::size_t i = 0; i < grid.size(); ++i) CHECK(h.values()[i] == doctest::Approx(softplus(grid[i])).epsilon(1e-15));
}

TEST_CASE("pair validation") {
  const auto grid = linspace(-5, 5, 51);
  auto pair = bump_model_pair(grid);
  pair.d_A = 0;
  CHECK_THROWS_AS(pair.validate(), InvalidInputError);
  pair = bump_model_pair(grid);
  pair.d_L = 3;
  CHECK_THROWS_AS(pair.validate(), InvalidInputError);
  pair = bump_model_pair(grid);
  pair.phi_L = SampledWeight::from_function(linspace(-5, 5, 52), softplus, 0.0, 1.0);
  CHECK_THROWS_AS(pair.validate(), InvalidInputError);
  CHECK_THROWS_AS(family_curve(bump_model_pair(grid), {0.0, 0.5, 0.4}), InvalidParameterError);
  CHECK_THROWS_AS(family_curve(bump_model_pair(grid), {0.0, 1.5}), InvalidParameterError);
}

TEST_CASE("lobatto t-grid") {
  auto t = lobatto_t_grid(8);
  CHECK(t.size() == 9);
  CHECK(t.front() == 0.0);
  CHECK(t.back() == 1.0);
  CHECK(t[4] == doctest::Approx(0.5).epsilon(1e-15));
  auto t2 = lobatto_t_grid(16);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(t2[2 * i] == t[i]);
}

TEST_CASE("family offsets") {
  const auto grid = linspace(-10, 10, 1025);
  SUBCASE("convex pair gives zero offsets") {
    auto fc = family_curve(convex_pair(grid), lobatto_t_grid(16));
    for (const auto& p : fc.psi)
      for (double v : p.values()) CHECK(std::abs(v) <= 1e-12);
    auto rep = check_monotone_family(fc);
    CHECK(rep.passed);
    CHECK(rep.max_violation <= 1e-12);
    CHECK(check_right_continuity(fc).passed);
  }
  SUBCASE("bump pair") {
    auto pair = bump_model_pair(grid);
    auto fc = family_curve(pair, lobatto_t_grid(32));
    for (const auto& p : fc.psi)
      for (double v : p.values()) CHECK(v <= 0.0);
    for (double v : fc.psi.back().values()) CHECK(std::abs(v) <= 1e-12);

    // t = 0: the bump of φ_L is cut off near its peak at s = 0.
    auto hull0 = oracle::hull_envelope_1d(grid, pair.phi_L.values(), 0.0, 1.0);
    double lowest = 0.0;
    std::size_t where = 0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      CHECK(fc.psi.front().values()[j] == doctest::Approx(hull0[j] - pair.phi_L.values()[j]).epsilon(1e-10));
      if (fc.psi.front().values()[j] < lowest) {
        lowest = fc.psi.front().values()[j];
        where = j;
      }
    }
    CHECK(lowest < -0.1);
    CHECK(std::abs(grid[where]) < 0.5);
  }
}

TEST_CASE("offset at t = 0.3 matches the hull oracle") {
  const auto grid = linspace(-10, 10, 4096);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 3; ++trial) {
    auto l = testing::random_piecewise_quadratic(rng, 1.0, grid);
    auto a = SampledWeight::from_function(grid, [](double s) { return 2.0 * softplus(s); }, 0.0, 2.0);
    ModelBundlePair pair{a, 2, l, 1};
    auto fc = family_curve(pair, {0.0, 0.3, 1.0});
    auto mix = mix_weights(pair, 0.3);
    auto hull = oracle::hull_envelope_1d(grid, mix.values(), 0.0, mix.slope_right());
    const auto j0 = static_cast<std::size_t>(std::lower_bound(grid.begin(), grid.end(), 0.0) - grid.begin());
    for (std::size_t j : {j0 - 1, j0}) CHECK(fc.psi[1].values()[j] == doctest::Approx(hull[j] - mix.values()[j]).epsilon(1e-10));
    CHECK(sup_abs_diff(fc.envelope_values(1), hull) <= 1e-8);
  }
}

TEST_CASE("monotone family") {
  const auto grid = linspace(-10, 10, 1025);
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 3; ++trial) {
    auto l = testing::random_piecewise_quadratic(rng, 1.0, grid);
    auto a = SampledWeight::from_function(grid, [](double s) { return 2.0 * softplus(s); }, 0.0, 2.0);
    ModelBundlePair pair{a, 2, l, 1};
    auto fc = family_curve(pair, linspace(0.0, 1.0, 101));
    auto rep = check_monotone_family(fc);
    CHECK(rep.passed);
    CHECK(rep.max_violation <= 1e-9);
    auto fine = family_curve(pair, linspace(0.0, 1.0, 201));
    CHECK(check_monotone_family(fine).passed);
    for (std::size_t i = 0; i < fc.t_grid.size(); ++i)
      CHECK(sup_abs_diff(fc.psi[i].values(), fine.psi[2 * i].values()) == 0.0);
  }

  auto fc = family_curve(bump_model_pair(grid), linspace(0.0, 1.0, 101));
  std::swap(fc.psi[10], fc.psi[60]);
  auto bad = check_monotone_family(fc);
  CHECK_FALSE(bad.passed);
  CHECK(bad.max_violation > 1e-3);
  CHECK(bad.status() == "fail");
}

TEST_CASE("right continuity and upper semicontinuity") {
  const auto grid = linspace(-10, 10, 1025);
  auto fc = family_curve(bump_model_pair(grid), lobatto_t_grid(64));
  auto rc = check_right_continuity(fc);
  CHECK(rc.passed);
  CHECK(rc.anchor == "psi-right-continuity");
  bool some_positive = false;
  for (const auto& entry : rc.details["per_t"]) {
    auto res = entry["residuals"].get<std::vector<double>>();
    REQUIRE(res.size() == 4);
    for (std::size_t k = 0; k + 1 < res.size(); ++k) CHECK(res[k + 1] <= res[k] + 1e-12);
    if (res.front() > 1e-6) {
      some_positive = true;
      CHECK(res.back() < res.front());
    }
  }
  CHECK(some_positive);

  auto usc = check_upper_semicontinuity(fc);
  CHECK(usc.passed);
  CHECK(usc.details["centres"].get<int>() == 81);

  // A single sample pushed down is a lower jump: every box around it keeps the same excess.
  const auto& centre = usc.details["samples"][40];
  const double tc = centre["t"].get<double>();
  const auto i = static_cast<std::size_t>(std::find(fc.t_grid.begin(), fc.t_grid.end(), tc) - fc.t_grid.begin());
  const auto j = static_cast<std::size_t>(
      std::lower_bound(grid.begin(), grid.end(), centre["s"].get<double>()) - grid.begin());
  auto vals = fc.psi[i].values();
  vals[j] -= 1.0;
  fc.psi[i] = fc.psi[i].with_values(vals);
  CHECK_FALSE(check_upper_semicontinuity(fc).passed);
}

TEST_CASE("continuity checks resolve a kink just right of a grid t") {
  // Here the mixture turns convex between t ≈ 0.7026 and t + 1/256.
  auto fc = family_curve(divisor_model_pair(linspace(-8, 8, 24), 1, 0), lobatto_t_grid(128));
  auto rc = check_right_continuity(fc);
  CHECK(rc.passed);
  bool extended = false;
  for (const auto& entry : rc.details["per_t"]) extended = extended || !entry["extra_residuals"].empty();
  CHECK(extended);
  CHECK(check_upper_semicontinuity(fc).passed);

  // A curve raised by 0.01 at one t is a jump from the right, at every δ.
  const double t = rc.details["per_t"][2]["t"].get<double>();
  const auto i = static_cast<std::size_t>(std::find(fc.t_grid.begin(), fc.t_grid.end(), t) - fc.t_grid.begin());
  auto vals = fc.psi[i].values();
  for (double& v : vals) v += 0.01;
  fc.psi[i] = fc.psi[i].with_values(vals);
  CHECK_FALSE(check_right_continuity(fc).passed);
}

TEST_CASE("fibered weight limits and oracle") {
  const auto grid = linspace(-10, 10, 4097);
  auto pair = bump_model_pair(grid);
  auto fc = family_curve(pair, lobatto_t_grid(256));
  auto fw = fibered_weight(pair, fc, {-200.0, 0.0, 200.0});
  auto env0 = fc.envelope_values(0);
  auto env1 = fc.envelope_values(fc.t_grid.size() - 1);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    CHECK(fw.at(0, j) == doctest::Approx(env0[j]).epsilon(1e-13));
    CHECK(fw.at(2, j) - 200.0 == doctest::Approx(env1[j]).epsilon(1e-13));
  }

  // Dense-t oracle at (τ, s) = (0, 0): 10⁴ uniformly spaced t, hull per t.
  const std::size_t j0 = 2048;
  REQUIRE(grid[j0] == 0.0);
  double dense = -1e300;
  for (int k = 0; k <= 10000; ++k) {
    const double t = k / 10000.0;
    auto mix = mix_weights(pair, t);
    auto hull = oracle::hull_envelope_1d(grid, mix.values(), 0.0, mix.slope_right());
    dense = std::max(dense, hull[j0]);
  }
  CHECK(fw.at(1, j0) == doctest::Approx(dense).epsilon(1e-7));

  CHECK_THROWS_AS(fibered_weight(pair, family_curve(pair, {0.1, 0.5, 1.0}), {0.0}), InvalidParameterError);
  CHECK_THROWS_AS(fibered_weight(pair, family_curve(pair, {0.0, 0.5, 0.9}), {0.0}), InvalidParameterError);
}

TEST_CASE("fibered weight convexity and t-refinement") {
  const auto grid = linspace(-10, 10, 513);
  const auto tau = linspace(-8, 8, 64);
  auto pair = bump_model_pair(grid);
  auto fc = family_curve(pair, lobatto_t_grid(256));
  auto fw = fibered_weight(pair, fc, tau);
  auto rep = check_fibered_weight(fc, fw);
  CHECK(rep.passed);
  CHECK(rep.details["tau_slope_excess"].get<double>() <= 1e-12);
  CHECK(rep.details["argmax_violation"].get<double>() <= 1e-9);

  std::vector<double> prev_diff;
  auto coarse = fibered_weight(pair, family_curve(pair, lobatto_t_grid(8)), tau);
  for (std::size_t n : {16u, 32u, 64u, 128u}) {
    auto fine = fibered_weight(pair, family_curve(pair, lobatto_t_grid(n)), tau);
    double diff = 0.0;
    for (std::size_t k = 0; k < fine.values().size(); ++k) {
      CHECK(fine.values()[k] >= coarse.values()[k]);
      diff = std::max(diff, fine.values()[k] - coarse.values()[k]);
    }
    prev_diff.push_back(diff);
    coarse = fine;
  }
  for (std::size_t k = 0; k + 1 < prev_diff.size(); ++k) CHECK(prev_diff[k + 1] < prev_diff[k]);

  // A swapped pair of rows breaks τ-monotonicity.
  auto vals = fw.values();
  for (std::size_t j = 0; j < fw.n_s(); ++j) std::swap(vals[10 * fw.n_s() + j], vals[40 * fw.n_s() + j]);
  CHECK_FALSE(check_fibered_weight(fc, fw.with_values(vals)).passed);
}

TEST_CASE("minimal singularity gap") {
  const auto grid = linspace(-6, 6, 97);
  const auto tau = linspace(-6, 6, 48);
  SUBCASE("convex pair") {
    auto pair = convex_pair(grid);
    auto fw = fibered_weight(pair, family_curve(pair, lobatto_t_grid(256)), tau);
    auto rep = minimal_singularity_gap(pair, fw);
    CHECK(rep.passed);
    CHECK(rep.details["observed_gap"].get<double>() <= rep.details["bound_C"].get<double>());
    CHECK(rep.details["min_phi_tilde_minus_reference"].get<double>() >= -std::log(2.0) - 1e-12);
    CHECK(rep.details["C2"].get<double>() >= std::log(4.0));
  }
  SUBCASE("equal weights") {
    auto a = SampledWeight::from_function(grid, [](double s) { return 2.0 * softplus(s); }, 0.0, 2.0);
    ModelBundlePair pair{a, 2, a, 2};
    auto fw = fibered_weight(pair, family_curve(pair, lobatto_t_grid(16)), tau);
    for (std::size_t i = 0; i < tau.size(); ++i)
      for (std::size_t j = 0; j < grid.size(); ++j)
        CHECK(fw.at(i, j) == doctest::Approx(std::max(0.0, tau[i]) + a.values()[j]).epsilon(1e-13));
    CHECK(minimal_singularity_gap(pair, fw).passed);
  }
  SUBCASE("bump pair") {
    auto pair = bump_model_pair(grid);
    auto fw = fibered_weight(pair, family_curve(pair, lobatto_t_grid(256)), tau);
    auto rep = minimal_singularity_gap(pair, fw);
    CHECK(rep.passed);
    CHECK(rep.details["observed_gap"].get<double>() > 0.0);
  }
  SUBCASE("mismatched grid") {
    auto pair = bump_model_pair(grid);
    auto other = bump_model_pair(linspace(-6, 6, 98));
    auto fw = fibered_weight(other, family_curve(other, lobatto_t_grid(8)), tau);
    CHECK_THROWS_AS(minimal_singularity_gap(pair, fw), InvalidInputError);
  }
}

TEST_CASE("gap constants") {
  const auto grid = linspace(-4, 4, 81);
  auto pair = convex_pair(grid);
  auto boxes = doubled(unit_cover(-4, 4));
  auto c = gap_constants(pair, boxes, BaseMeasure::fubini_study());
  // Fubini-Study: 1/ρ = (e^{s/2} + e^{−s/2})² is largest at the outer box ends s = ±5.
  CHECK(c.c2 == doctest::Approx(2.0 * std::log(std::exp(2.5) + std::exp(-2.5))).epsilon(1e-13));
  CHECK(c.total == doctest::Approx(c.c1 + c.c2 + std::log(2.0)));

  // C₁ on one box against golden-section search over t at the same samples.
  ChartBox box{-1.0, 1.0};
  double hi = -1e300, lo = 1e300;
  for (double s : box_samples(box, grid)) {
    const double a = pair.phi_A(s), l = pair.phi_L(s);
    hi = std::max(hi, oracle::golden_max(
                          [&](double t) {
                            return t * a + (1 - t) * l - std::log(std::tgamma(1 + t) * std::tgamma(2 - t));
                          },
                          0.0, 1.0));
    lo = std::min({lo, a, l});
  }
  CHECK(gap_constants(pair, {box}, BaseMeasure::fubini_study()).c1 == doctest::Approx(hi - lo).epsilon(1e-9));
}

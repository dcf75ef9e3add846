#include "envlab/gluing.hpp"

#include <algorithm>
#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <boost/geometry/geometries/multi_point.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <limits>
#include <random>

#include "envlab/envelope.hpp"
#include "envlab/errors.hpp"
#include "envlab/family.hpp"
#include "envlab/models.hpp"
#include "envlab/quadrature.hpp"

namespace envlab {

namespace {

double bump(double h) { return std::abs(h) < 1.0 ? std::exp(-1.0 / (1.0 - h * h)) : 0.0; }

/// S(x) = E[(x + D)^+] with D = H₁ − H₂, tabulated on [−2, 0] with S, S' and S''.
class MaxProfile {
 public:
  MaxProfile() {
    norm_ = 1.0 / integrate(bump, -1.0, 1.0, 1e-14).value;
    h_ = 2.0 / kIntervals;
    s_.resize(kIntervals + 1);
    ds_.resize(kIntervals + 1);
    d2s_.resize(kIntervals + 1);
    // A = ∫_{-2}^{x} p and B = ∫_{-2}^{x} y·p accumulated cell by cell; p is smooth, so a
    // 10-point Gauss rule per cell of width 0.002 is exact to rounding.
    using cell_rule = boost::math::quadrature::gauss<double, 10>;
    double a = 0.0, b = 0.0;
    for (int i = 0; i <= kIntervals; ++i) {
      const double x = i == kIntervals ? 0.0 : -2.0 + h_ * i;
      if (i > 0) {
        const double x0 = -2.0 + h_ * (i - 1);
        a += cell_rule::integrate([&](double t) { return density(t); }, x0, x);
        b += cell_rule::integrate([&](double t) { return t * density(t); }, x0, x);
      }
      ds_[i] = a;
      s_[i] = std::max(0.0, x * a - b);
      d2s_[i] = density(x);
    }
    peak_ = d2s_.back();
  }

  /// Density of D at x ≤ 0.
  double density(double x) const {
    if (x <= -2.0) return 0.0;
    return integrate([&](double h) { return norm_ * norm_ * bump(h) * bump(h - x); }, -1.0, 1.0 + x, 1e-14).value;
  }

  /// S(x) for x ≤ 0 by quintic Hermite interpolation.
  double operator()(double x) const {
    if (x <= -2.0) return 0.0;
    const double pos = (x + 2.0) / h_;
    const int i = std::min(kIntervals - 1, static_cast<int>(pos));
    const double t = pos - i;
    const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
    const double h0 = 1 - 10 * t3 + 15 * t4 - 6 * t5;
    const double h1 = t - 6 * t3 + 8 * t4 - 3 * t5;
    const double h2 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
    const double h3 = 0.5 * t3 - t4 + 0.5 * t5;
    const double h4 = -4 * t3 + 7 * t4 - 3 * t5;
    const double h5 = 10 * t3 - 15 * t4 + 6 * t5;
    const double v = h0 * s_[i] + h_ * h1 * ds_[i] + h_ * h_ * h2 * d2s_[i] + h_ * h_ * h3 * d2s_[i + 1] +
                     h_ * h4 * ds_[i + 1] + h5 * s_[i + 1];
    return std::max(0.0, v);
  }

  double peak() const { return peak_; }

 private:
  static constexpr int kIntervals = 1000;
  double norm_ = 1.0;
  double h_ = 0.0;
  double peak_ = 0.0;
  std::vector<double> s_, ds_, d2s_;
};

const MaxProfile& profile() {
  static const MaxProfile p;
  return p;
}

void require_same_grid(const SampledWeight2D& a, const SampledWeight2D& b) {
  if (a.grid_tau() != b.grid_tau() || a.grid_s() != b.grid_s())
    throw InvalidInputError("outer and inner weights use different grids");
}

ConvexPolygon hull_of(const ConvexPolygon& a, const ConvexPolygon& b) {
  namespace bg = boost::geometry;
  using pt = bg::model::d2::point_xy<double>;
  bg::model::multi_point<pt> cloud;
  for (const auto* poly : {&a, &b})
    for (const auto& v : poly->vertices()) cloud.push_back(pt(v.p, v.q));
  bg::model::polygon<pt> hull;
  bg::convex_hull(cloud, hull);
  std::vector<Point2> out;
  for (const auto& v : hull.outer()) out.push_back({bg::get<0>(v), bg::get<1>(v)});
  return ConvexPolygon(out);
}

/// Largest |Δ²v|/h² along every τ-line and s-line.
double max_second_difference(const SampledWeight2D& w) {
  const auto& tau = w.grid_tau();
  const auto& s = w.grid_s();
  double worst = 0.0;
  auto line = [&](const std::vector<double>& x, const std::vector<double>& v) {
    for (std::size_t i = 1; i + 1 < x.size(); ++i) {
      const double left = (v[i] - v[i - 1]) / (x[i] - x[i - 1]);
      const double right = (v[i + 1] - v[i]) / (x[i + 1] - x[i]);
      worst = std::max(worst, std::abs(2.0 * (right - left) / (x[i + 1] - x[i - 1])));
    }
  };
  for (std::size_t i = 0; i < tau.size(); ++i) line(s, w.row(i));
  for (std::size_t j = 0; j < s.size(); ++j) line(tau, w.column(j));
  return worst;
}

/// Largest divided difference of outer − inner along grid lines, restricted to τ < τ_outer.
double max_difference_slope(const SampledWeight2D& outer, const SampledWeight2D& inner, double tau_outer) {
  const auto& tau = outer.grid_tau();
  const auto& s = outer.grid_s();
  double worst = 0.0;
  auto diff = [&](std::size_t i, std::size_t j) { return outer.at(i, j) - inner.at(i, j); };
  for (std::size_t i = 0; i < tau.size() && tau[i] < tau_outer; ++i)
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (j + 1 < s.size()) worst = std::max(worst, std::abs(diff(i, j + 1) - diff(i, j)) / (s[j + 1] - s[j]));
      if (i + 1 < tau.size()) worst = std::max(worst, std::abs(diff(i + 1, j) - diff(i, j)) / (tau[i + 1] - tau[i]));
    }
  return worst;
}

}  // namespace

void RegularizedMaxKernel::validate() const {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw InvalidParameterError("kernel epsilon must be positive");
}

double regularized_max(const RegularizedMaxKernel& k, double x, double y) {
  const double hi = std::max(x, y);
  const double lo = std::min(x, y);
  const double d = (hi - lo) / k.epsilon;
  if (d >= 2.0) return hi;
  return hi + k.epsilon * profile()(-d);
}

double regularized_max_curvature_peak() { return profile().peak(); }

VerificationReport check_regularized_max(std::uint64_t seed, int cases, int convex_pairs, double tol) {
  Stopwatch clock;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> val(-5.0, 5.0);
  std::uniform_real_distribution<double> eps_dist(0.01, 3.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double peak = regularized_max_curvature_peak();
  constexpr double kEps = std::numeric_limits<double>::epsilon();

  double bounds = 0.0, symmetry = 0.0, translation = 0.0, monotone = 0.0, convexity = 0.0, exact = 0.0,
         smooth = 0.0;
  for (int c = 0; c < cases; ++c) {
    const RegularizedMaxKernel k{eps_dist(rng)};
    // Half the cases sit within 2ε of the diagonal, where the smoothing acts.
    const double x = val(rng);
    const double y = unit(rng) < 0.5 ? x + k.epsilon * (4.0 * unit(rng) - 2.0) : val(rng);
    const double m = regularized_max(k, x, y);
    const double mx = std::max(x, y);
    bounds = std::max({bounds, mx - m, m - mx - k.epsilon});
    symmetry = std::max(symmetry, std::abs(m - regularized_max(k, y, x)));

    const double shift = val(rng);
    translation = std::max(translation, std::abs(regularized_max(k, x + shift, y + shift) - m - shift));

    const double dx = k.epsilon * unit(rng);
    monotone = std::max({monotone, m - regularized_max(k, x + dx, y), m - regularized_max(k, x, y + dx)});
    const double x2 = x + k.epsilon * (4.0 * unit(rng) - 2.0), y2 = y + k.epsilon * (4.0 * unit(rng) - 2.0);
    const double mid = regularized_max(k, 0.5 * (x + x2), 0.5 * (y + y2));
    convexity = std::max(convexity, mid - 0.5 * (m + regularized_max(k, x2, y2)));

    const double far = k.epsilon * (2.0 + 3.0 * unit(rng));
    exact = std::max({exact, std::abs(regularized_max(k, x, x - far) - x),
                      std::abs(regularized_max(k, x - far, x) - x)});

    // ∂²M/∂x² ≤ peak/ε; the step keeps rounding well below that bound.
    const double h = 1e-3 * k.epsilon;
    const double second = (regularized_max(k, x + h, y) - 2.0 * m + regularized_max(k, x - h, y)) / (h * h);
    const double rounding = 8.0 * kEps * (std::abs(m) + 1.0) / (h * h);
    smooth = std::max(smooth, std::abs(second) - peak / k.epsilon * (1.0 + 1e-6) - rounding);
  }

  // Convexity preservation along a line.
  const auto grid = linspace(-5.0, 5.0, 201);
  double preservation = 0.0;
  for (int c = 0; c < convex_pairs; ++c) {
    const RegularizedMaxKernel k{eps_dist(rng)};
    const double a = 0.2 + 2.0 * unit(rng), b = 0.5 + 2.0 * unit(rng), c0 = val(rng), l = val(rng) / 5.0;
    const double q = unit(rng), q0 = val(rng), q1 = val(rng) / 5.0, q2 = val(rng);
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double s = grid[i];
      const double f = a * softplus(b * s + c0) + l * s;
      const double g = q * (s - q0) * (s - q0) + q1 * s + q2;
      v[i] = regularized_max(k, f, g);
    }
    preservation = std::max(preservation, convexity_defect(grid, v));
  }

  VerificationReport rep;
  rep.check = "regularized-max";
  rep.anchor = "regularized-max";
  rep.seed = seed;
  rep.tolerance = tol;
  rep.max_violation =
      std::max({bounds, symmetry, translation, monotone, convexity, exact, std::max(0.0, smooth), preservation, 0.0});
  rep.passed = rep.max_violation <= tol;
  rep.grid = {{"cases", cases}, {"convex_pairs", convex_pairs}, {"line_points", grid.size()}};
  rep.details = {{"bounds", bounds},
                 {"symmetry", symmetry},
                 {"translation", translation},
                 {"monotone", monotone},
                 {"convexity", convexity},
                 {"exact_far_from_diagonal", exact},
                 {"second_difference_excess", smooth},
                 {"convexity_preservation_defect", preservation},
                 {"curvature_peak", peak}};
  rep.wall_time_s = clock.seconds();
  return rep;
}

void GlueRegion::validate() const {
  if (!(tau_inner < tau_outer)) throw InvalidInputError("glue annulus needs tau_inner < tau_outer");
}

SampledWeight2D glue_weights(const SampledWeight2D& outer, const SampledWeight2D& inner, const GlueRegion& region,
                             const RegularizedMaxKernel& k) {
  region.validate();
  k.validate();
  require_same_grid(outer, inner);
  const auto& tau = outer.grid_tau();
  const std::size_t ns = outer.n_s();

  bool any = false;
  double worst = std::numeric_limits<double>::infinity();
  std::size_t wi = 0, wj = 0;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    if (tau[i] < region.tau_inner || tau[i] > region.tau_outer) continue;
    any = true;
    for (std::size_t j = 0; j < ns; ++j) {
      const double margin = outer.at(i, j) - inner.at(i, j) - 2.0 * k.epsilon;
      if (margin < worst) {
        worst = margin;
        wi = i;
        wj = j;
      }
    }
  }
  if (!any) throw InvalidInputError("glue annulus contains no grid rows");
  if (worst < 0.0)
    throw GluingFailureError("outer does not dominate inner + 2ε on the annulus", wi, wj, worst);

  std::vector<double> values = outer.values();
  for (std::size_t i = 0; i < tau.size() && tau[i] < region.tau_outer; ++i)
    for (std::size_t j = 0; j < ns; ++j)
      values[i * ns + j] = regularized_max(k, outer.at(i, j), inner.at(i, j));
  return SampledWeight2D(tau, outer.grid_s(), std::move(values),
                         hull_of(outer.slope_polytope(), inner.slope_polytope()));
}

double normalize_for_gluing(const SampledWeight2D& outer, SampledWeight2D& inner, const GlueRegion& region,
                            const RegularizedMaxKernel& k) {
  region.validate();
  k.validate();
  require_same_grid(outer, inner);
  const auto& tau = outer.grid_tau();
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < tau.size(); ++i) {
    if (tau[i] < region.tau_inner || tau[i] > region.tau_outer) continue;
    for (std::size_t j = 0; j < outer.n_s(); ++j) margin = std::min(margin, outer.at(i, j) - inner.at(i, j));
  }
  if (!std::isfinite(margin)) throw InvalidInputError("glue annulus contains no grid rows");
  const double need = 2.0 * k.epsilon - margin;
  if (need <= 0.0) return 0.0;
  // A little extra so rounding in the subtraction cannot undo the margin.
  const double shift = need + 1e-12 * (1.0 + std::abs(margin) + 2.0 * k.epsilon);
  std::vector<double> v = inner.values();
  for (double& x : v) x -= shift;
  inner = inner.with_values(std::move(v));
  return shift;
}

HirzebruchConfig HirzebruchConfig::from_json(const nlohmann::json& j) {
  HirzebruchConfig c;
  c.k = j.value("k", c.k);
  c.d_A = j.value("d_A", c.d_A);
  c.d_L = j.value("d_L", c.d_L);
  c.grid = j.value("grid", c.grid);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.tau_min = j.value("tau_min", c.tau_min);
  c.tau_max = j.value("tau_max", c.tau_max);
  c.s_min = j.value("s_min", c.s_min);
  c.s_max = j.value("s_max", c.s_max);
  c.tau_inner = j.value("tau_inner", c.tau_inner);
  c.tau_outer = j.value("tau_outer", c.tau_outer);
  c.t_points = j.value("t_points", c.t_points);
  c.corrupt_inner = j.value("corrupt_inner", c.corrupt_inner);
  if (c.k < 1) throw InvalidInputError("k must be at least 1");
  if (c.grid < 3) throw InvalidInputError("grid must have at least 3 points per axis");
  if (!(c.epsilon > 0.0)) throw InvalidInputError("epsilon must be positive");
  return c;
}

nlohmann::json HirzebruchConfig::to_json() const {
  return {{"k", k},           {"d_A", d_A},         {"d_L", d_L},
          {"grid", grid},     {"epsilon", epsilon}, {"tau_min", tau_min},
          {"tau_max", tau_max}, {"s_min", s_min},   {"s_max", s_max},
          {"tau_inner", tau_inner}, {"tau_outer", tau_outer}, {"t_points", t_points},
          {"corrupt_inner", corrupt_inner}};
}

namespace {

template <typename F>
auto stage(const char* name, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

}  // namespace

HirzebruchResult hirzebruch_demo(const HirzebruchConfig& config) {
  Stopwatch clock;
  const auto tau = linspace(config.tau_min, config.tau_max, static_cast<std::size_t>(config.grid));
  const auto s = linspace(config.s_min, config.s_max, static_cast<std::size_t>(config.grid));
  const RegularizedMaxKernel kernel{config.epsilon};
  const GlueRegion region{config.tau_inner, config.tau_outer};

  const ModelBundlePair pair = stage("pair", [&] { return divisor_model_pair(s, config.d_A, config.d_L); });
  SampledWeight2D inner = stage("family", [&] {
    const FamilyCurve fc = family_curve(pair, lobatto_t_grid(config.t_points));
    return fibered_weight(pair, fc, tau);
  });
  if (config.corrupt_inner) {
    // A bump after the envelope, where the inner weight is the larger one.
    std::vector<double> v = inner.values();
    const double tc = config.tau_min + 0.25 * (config.tau_max - config.tau_min);
    for (std::size_t i = 0; i < tau.size(); ++i)
      for (std::size_t j = 0; j < s.size(); ++j)
        v[i * s.size() + j] += 1.5 * std::exp(-((tau[i] - tc) * (tau[i] - tc) + s[j] * s[j]));
    inner = inner.with_values(std::move(v));
  }
  const SampledWeight2D outer = stage("outer", [&] {
    return SampledWeight2D::from_function(
        tau, s, [&](double t, double x) { return pair.phi_A(x) + config.k * t; },
        ConvexPolygon({{static_cast<double>(config.k), 0.0}, {static_cast<double>(config.k), double(config.d_A)}}));
  });
  const double shift = stage("normalize", [&] { return normalize_for_gluing(outer, inner, region, kernel); });
  const SampledWeight2D glued = stage("glue", [&] { return glue_weights(outer, inner, region, kernel); });

  // Convexity along every grid line.
  const double defect = convexity_defect_2d(glued);
  const bool convex = defect <= 1e-9;

  // Outer region and annulus agree with outer exactly.
  std::size_t mismatched = 0, outer_rows = 0, annulus_rows = 0;
  for (std::size_t i = 0; i < tau.size(); ++i) {
    if (tau[i] < config.tau_inner) continue;
    (tau[i] >= config.tau_outer ? outer_rows : annulus_rows)++;
    for (std::size_t j = 0; j < s.size(); ++j)
      if (glued.at(i, j) != outer.at(i, j)) ++mismatched;
  }

  // Smoothness: second differences of the glued weight against the chain-rule bound
  // max(|outer''|, |inner''|) + (peak/ε)·|∇(outer − inner)|², with a factor 2 for the grid.
  const double second = max_second_difference(glued);
  const double slope = max_difference_slope(outer, inner, config.tau_outer);
  const double bound = 2.0 * (std::max(max_second_difference(outer), max_second_difference(inner)) +
                              regularized_max_curvature_peak() / config.epsilon * slope * slope);
  const bool smooth = second <= bound;

  // Rows where the regularized max actually blends the two weights.
  std::size_t blended = 0;
  for (std::size_t k = 0; k < glued.values().size(); ++k) {
    const double mx = std::max(outer.values()[k], inner.values()[k]);
    if (glued.values()[k] != mx) ++blended;
  }

  std::string failed_stage;
  if (!convex) failed_stage = "convexity";
  else if (mismatched > 0) failed_stage = "outer-region";
  else if (!smooth) failed_stage = "smoothness";

  VerificationReport rep;
  rep.check = "hirzebruch-demo";
  rep.anchor = "hirzebruch-demo";
  rep.tolerance = 1e-9;
  rep.max_violation = std::max(0.0, defect);
  rep.passed = failed_stage.empty();
  rep.grid = {{"n_tau", tau.size()}, {"n_s", s.size()}, {"tau_range", {config.tau_min, config.tau_max}},
              {"s_range", {config.s_min, config.s_max}}};
  rep.details = {{"config", config.to_json()},
                 {"stages", {"pair", "family", "outer", "normalize", "glue", "convexity", "outer-region", "smoothness"}},
                 {"failed_stage", failed_stage.empty() ? nlohmann::json() : nlohmann::json(failed_stage)},
                 {"inner_shift", shift},
                 {"convexity_defect", defect},
                 {"outer_rows", outer_rows},
                 {"annulus_rows", annulus_rows},
                 {"outer_mismatches", mismatched},
                 {"max_second_difference", second},
                 {"second_difference_bound", bound},
                 {"blended_samples", blended}};
  rep.wall_time_s = clock.seconds();
  return {rep, inner, outer, glued};
}

}  // namespace envlab

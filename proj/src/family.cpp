#include "envlab/family.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>
#include <map>

#include "envlab/envelope.hpp"
#include "envlab/errors.hpp"
#include "envlab/gamma.hpp"

namespace envlab {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr double kUscShrink = 0.75;
// Further halvings of the t-offset when the first four cannot resolve the decay.
constexpr std::size_t kExtraHalvings = 26;

double log_add_exp(double x, double y) {
  const double m = std::max(x, y);
  return m + std::log1p(std::exp(-std::abs(x - y)));
}

double max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

/// Rounding floor of a second divided difference on this grid.
double second_difference_floor(const std::vector<double>& grid, double scale) {
  double h = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < grid.size(); ++i) h = std::min(h, grid[i] - grid[i - 1]);
  return 64.0 * kEps * (1.0 + scale) / (h * h);
}

std::vector<std::size_t> spread_indices(std::size_t lo, std::size_t hi, std::size_t count) {
  std::vector<std::size_t> out;
  if (hi < lo) return out;
  const std::size_t span = hi - lo;
  count = std::min(count, span + 1);
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t idx = count == 1 ? lo : lo + (span * k) / (count - 1);
    if (out.empty() || out.back() != idx) out.push_back(idx);
  }
  return out;
}

}  // namespace

void ModelBundlePair::validate() const {
  if (d_A < 1) throw InvalidInputError("d_A must be at least 1");
  if (d_L < 0) throw InvalidInputError("d_L must be non-negative");
  if (phi_A.grid() != phi_L.grid()) throw InvalidInputError("phi_A and phi_L use different grids");
  if (phi_A.slope_left() != 0.0 || phi_A.slope_right() != d_A)
    throw InvalidInputError("phi_A slopes must be [0, d_A]");
  if (phi_L.slope_left() != 0.0 || phi_L.slope_right() != d_L)
    throw InvalidInputError("phi_L slopes must be [0, d_L]");
}

SampledWeight mix_weights(const ModelBundlePair& pair, double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw InvalidParameterError("mixing parameter t must lie in [0, 1]");
  if (t == 0.0) return pair.phi_L;
  if (t == 1.0) return pair.phi_A;
  const auto& a = pair.phi_A.values();
  const auto& l = pair.phi_L.values();
  std::vector<double> v(a.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = t * a[i] + (1.0 - t) * l[i];
  return SampledWeight(pair.grid(), std::move(v), 0.0, t * pair.d_A + (1.0 - t) * pair.d_L);
}

std::vector<double> FamilyCurve::envelope_values(std::size_t i) const {
  SampledWeight mix = mix_weights(pair, t_grid[i]);
  std::vector<double> out = mix.values();
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += psi[i].values()[j];
  return out;
}

std::vector<double> lobatto_t_grid(std::size_t n) {
  if (n < 1) throw InvalidParameterError("t-grid needs at least one interval");
  std::vector<double> t(n + 1);
  for (std::size_t i = 0; i <= n; ++i)
    t[i] = 0.5 * (1.0 - std::cos(M_PI * (static_cast<double>(i) / static_cast<double>(n))));
  t.front() = 0.0;
  t.back() = 1.0;
  return t;
}

FamilyCurve family_curve(const ModelBundlePair& pair, const std::vector<double>& t_grid) {
  pair.validate();
  if (t_grid.empty()) throw InvalidParameterError("t-grid is empty");
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    if (!(t_grid[i] >= 0.0 && t_grid[i] <= 1.0)) throw InvalidParameterError("t-grid leaves [0, 1]");
    if (i > 0 && !(t_grid[i] > t_grid[i - 1])) throw InvalidParameterError("t-grid not increasing");
  }
  FamilyCurve fc{pair, t_grid, {}};
  fc.psi.reserve(t_grid.size());
  for (double t : t_grid) {
    SampledWeight mix = mix_weights(pair, t);
    fc.psi.push_back(envelope_offset(mix, {0.0, mix.slope_right()}));
  }
  return fc;
}

VerificationReport check_monotone_family(const FamilyCurve& fc, double tol) {
  Stopwatch clock;
  const auto& s = fc.pair.grid();
  std::vector<std::size_t> used;
  for (std::size_t i = 0; i < fc.t_grid.size(); ++i)
    if (fc.t_grid[i] <= kMonotoneTCap) used.push_back(i);

  double worst = 0.0;
  double worst_t = 0.0;
  double worst_s = 0.0;
  for (std::size_t k = 0; k + 1 < used.size(); ++k) {
    const std::size_t i = used[k];
    const std::size_t j = used[k + 1];
    const double wi = 1.0 / (1.0 - fc.t_grid[i]);
    const double wj = 1.0 / (1.0 - fc.t_grid[j]);
    for (std::size_t m = 0; m < s.size(); ++m) {
      const double drop = fc.psi[i].values()[m] * wi - fc.psi[j].values()[m] * wj;
      if (drop > worst) {
        worst = drop;
        worst_t = fc.t_grid[i];
        worst_s = s[m];
      }
    }
  }
  VerificationReport rep;
  rep.check = "psi-monotonicity";
  rep.anchor = "psi-monotonicity";
  rep.tolerance = tol;
  rep.max_violation = worst;
  rep.passed = worst <= tol;
  rep.grid = {{"n_t", used.size()}, {"n_s", s.size()}, {"t_cap", kMonotoneTCap}};
  rep.details = {{"worst_t", worst_t}, {"worst_s", worst_s}};
  rep.wall_time_s = clock.seconds();
  return rep;
}

VerificationReport check_right_continuity(const FamilyCurve& fc, double tol) {
  Stopwatch clock;
  const std::vector<double> deltas = {1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256};
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < fc.t_grid.size(); ++i) {
    const double t = fc.t_grid[i];
    if (t > 0.0 && t + deltas.front() <= kMonotoneTCap) candidates.push_back(i);
  }
  std::vector<std::size_t> picks;
  if (!candidates.empty())
    for (std::size_t k : spread_indices(0, candidates.size() - 1, 8)) picks.push_back(candidates[k]);

  auto offset_ratio = [&](double t) {
    SampledWeight mix = mix_weights(fc.pair, t);
    std::vector<double> h = envelope_offset(mix, {0.0, mix.slope_right()}).values();
    for (double& v : h) v /= (1.0 - t);
    return h;
  };

  double worst = 0.0;
  bool decayed = true;
  nlohmann::json per_t = nlohmann::json::array();
  for (std::size_t i : picks) {
    const double t = fc.t_grid[i];
    std::vector<double> base = fc.psi[i].values();
    for (double& v : base) v /= (1.0 - t);
    std::vector<double> res;
    for (double d : deltas) {
      std::vector<double> h = offset_ratio(t + d);
      double r = 0.0;
      for (std::size_t m = 0; m < h.size(); ++m) r = std::max(r, std::abs(h[m] - base[m]));
      res.push_back(r);
    }
    // A plateau can be a kink of the family between t and t + 1/256; keep halving to tell
    // it from a jump.
    std::vector<double> extra;
    double d = deltas.back();
    while (res.back() > tol && !(res.back() < res.front()) && extra.size() < kExtraHalvings) {
      d *= 0.5;
      std::vector<double> h = offset_ratio(t + d);
      double r = 0.0;
      for (std::size_t m = 0; m < h.size(); ++m) r = std::max(r, std::abs(h[m] - base[m]));
      extra.push_back(r);
      if (r <= tol || r < kUscShrink * res.front()) break;
    }
    for (std::size_t k = 0; k + 1 < res.size(); ++k) worst = std::max(worst, res[k + 1] - res[k]);
    const double last = extra.empty() ? res.back() : extra.back();
    if (last > tol && !(last < (extra.empty() ? res.front() : kUscShrink * res.front()))) decayed = false;
    double rate = 0.0;
    int n_rate = 0;
    for (std::size_t k = 0; k + 1 < res.size(); ++k) {
      if (res[k] > tol && res[k + 1] > tol) {
        rate += std::log2(res[k] / res[k + 1]);
        ++n_rate;
      }
    }
    per_t.push_back({{"t", t},
                     {"residuals", res},
                     {"extra_residuals", extra},
                     {"fitted_decay_per_halving", n_rate ? nlohmann::json(rate / n_rate) : nlohmann::json()}});
  }
  VerificationReport rep;
  rep.check = "psi-right-continuity";
  rep.anchor = "psi-right-continuity";
  rep.tolerance = tol;
  rep.max_violation = std::max(0.0, worst);
  rep.passed = rep.max_violation <= tol && decayed;
  rep.grid = {{"deltas", deltas}, {"n_t_checked", picks.size()}, {"n_s", fc.pair.grid().size()}};
  rep.details = {{"per_t", per_t}, {"residuals_decay", decayed}};
  rep.wall_time_s = clock.seconds();
  return rep;
}

VerificationReport check_upper_semicontinuity(const FamilyCurve& fc, double tol) {
  Stopwatch clock;
  const auto& s = fc.pair.grid();
  std::size_t nt = 0;
  while (nt < fc.t_grid.size() && fc.t_grid[nt] <= kMonotoneTCap) ++nt;

  // H off the t-grid comes from the pair; the centre value comes from the curve itself.
  std::map<double, std::vector<double>> cache;
  auto H_at = [&](double t) -> const std::vector<double>& {
    auto it = cache.find(t);
    if (it != cache.end()) return it->second;
    SampledWeight mix = mix_weights(fc.pair, t);
    std::vector<double> h = envelope_offset(mix, {0.0, mix.slope_right()}).values();
    for (double& v : h) v /= (1.0 - t);
    return cache.emplace(t, std::move(h)).first->second;
  };

  double worst = 0.0;
  std::size_t max_level = 0;
  nlohmann::json samples = nlohmann::json::array();
  if (nt >= 3 && s.size() >= 3) {
    for (std::size_t ci : spread_indices(1, nt - 2, 9)) {
      const double tc = fc.t_grid[ci];
      for (std::size_t cm : spread_indices(1, s.size() - 2, 9)) {
        const double centre = fc.psi[ci].values()[cm] / (1.0 - tc);
        // Level L: t within 2^{-5-L} (five recomputed t values), s within max(0, 3 − L) samples.
        auto box_excess = [&](std::size_t level) {
          const double w = std::ldexp(1.0, -5 - static_cast<int>(level));
          const std::size_t reach = level < 3 ? 3 - level : 0;
          double box_max = centre;
          for (double f : {-1.0, -0.5, 0.5, 1.0}) {
            const double t = std::clamp(tc + f * w, 0.0, kMonotoneTCap);
            const auto& h = H_at(t);
            for (std::size_t m = cm - std::min(cm, reach); m <= std::min(s.size() - 1, cm + reach); ++m)
              box_max = std::max(box_max, h[m]);
          }
          for (std::size_t m = cm - std::min(cm, reach); m <= std::min(s.size() - 1, cm + reach); ++m)
            box_max = std::max(box_max, fc.psi[ci].values()[m] / (1.0 - tc));
          return box_max - centre;
        };
        std::vector<double> excess;
        for (std::size_t level = 0; level < 4; ++level) excess.push_back(box_excess(level));
        // Past level 3 only t shrinks; a lower jump at the centre keeps the excess flat forever.
        std::size_t level = 4;
        while (excess.back() > std::max(tol, kUscShrink * excess.front()) && level < 4 + kExtraHalvings)
          excess.push_back(box_excess(level++));
        max_level = std::max(max_level, excess.size() - 1);
        worst = std::max(worst, excess.back() - std::max(tol, kUscShrink * excess.front()));
        samples.push_back({{"t", tc}, {"s", s[cm]}, {"excess", excess}});
      }
    }
  }
  VerificationReport rep;
  rep.check = "psi-upper-semicontinuity";
  rep.anchor = "psi-upper-semicontinuity";
  rep.tolerance = tol;
  rep.max_violation = std::max(0.0, worst);
  rep.passed = rep.max_violation <= tol;
  rep.grid = {{"n_t", nt}, {"n_s", s.size()}, {"levels", 4}, {"deepest_level", max_level}};
  rep.details = {{"centres", samples.size()}, {"samples", samples}};
  rep.wall_time_s = clock.seconds();
  return rep;
}

ConvexPolygon fibered_slope_polygon(int d_A, int d_L) {
  return ConvexPolygon({{0.0, 0.0}, {1.0, 0.0}, {1.0, static_cast<double>(d_A)}, {0.0, static_cast<double>(d_L)}});
}

FiberedWeight fibered_weight(const ModelBundlePair& pair, const FamilyCurve& fc,
                             const std::vector<double>& tau_grid) {
  pair.validate();
  if (fc.t_grid.empty() || fc.t_grid.front() != 0.0 || fc.t_grid.back() != 1.0)
    throw InvalidParameterError("t-grid must contain both endpoints 0 and 1");
  if (fc.pair.grid() != pair.grid()) throw InvalidInputError("family curve built on another grid");
  const auto& s = pair.grid();
  std::vector<std::vector<double>> env(fc.t_grid.size());
  for (std::size_t m = 0; m < fc.t_grid.size(); ++m) {
    SampledWeight mix = mix_weights(pair, fc.t_grid[m]);
    env[m] = mix.values();
    for (std::size_t j = 0; j < s.size(); ++j) env[m][j] += fc.psi[m].values()[j];
  }
  const std::size_t nt = tau_grid.size();
  std::vector<double> values(nt * s.size());
  std::vector<double> intercept(fc.t_grid.size());
  for (std::size_t j = 0; j < s.size(); ++j) {
    for (std::size_t m = 0; m < fc.t_grid.size(); ++m) intercept[m] = env[m][j];
    std::vector<double> col = max_of_lines(fc.t_grid, intercept, tau_grid);
    for (std::size_t i = 0; i < nt; ++i) values[i * s.size() + j] = col[i];
  }
  return FiberedWeight(tau_grid, s, std::move(values), fibered_slope_polygon(pair.d_A, pair.d_L));
}

VerificationReport check_fibered_weight(const FamilyCurve& fc, const FiberedWeight& fw, double tol) {
  Stopwatch clock;
  const auto& tau = fw.grid_tau();
  const auto& s = fw.grid_s();
  const double scale = max_abs(fw.values());

  const double conv_tol = std::max({tol, second_difference_floor(tau, scale), second_difference_floor(s, scale)});
  const double convexity = convexity_defect_2d(fw);

  double monotone = 0.0;
  double slope_excess = 0.0;
  for (std::size_t i = 0; i + 1 < tau.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j) {
      const double diff = fw.at(i + 1, j) - fw.at(i, j);
      monotone = std::max(monotone, -diff);
      const double slope = diff / (tau[i + 1] - tau[i]);
      slope_excess = std::max({slope_excess, -slope, slope - 1.0});
    }

  // Concavity of t ↦ (mix_t)_e(s): each value lies above the chord of its neighbours.
  std::vector<std::vector<double>> env(fc.t_grid.size());
  for (std::size_t m = 0; m < env.size(); ++m) env[m] = fc.envelope_values(m);
  double concavity = 0.0;
  for (std::size_t m = 1; m + 1 < env.size(); ++m) {
    const double t0 = fc.t_grid[m - 1], t1 = fc.t_grid[m], t2 = fc.t_grid[m + 1];
    const double w = (t1 - t0) / (t2 - t0);
    for (std::size_t j = 0; j < s.size(); ++j) {
      const double chord = (1.0 - w) * env[m - 1][j] + w * env[m + 1][j];
      concavity = std::max(concavity, chord - env[m][j]);
    }
  }

  // Largest maximizing t, as τ increases, never moves down by more than a tie.
  double argmax_violation = 0.0;
  for (std::size_t j = 0; j < s.size(); ++j) {
    std::size_t prev = 0;
    for (std::size_t i = 0; i < tau.size(); ++i) {
      std::size_t best = 0;
      double best_v = -std::numeric_limits<double>::infinity();
      for (std::size_t m = 0; m < env.size(); ++m) {
        const double v = fc.t_grid[m] * tau[i] + env[m][j];
        if (v >= best_v) {
          best_v = v;
          best = m;
        }
      }
      if (i > 0 && best < prev) {
        const double old_v = fc.t_grid[prev] * tau[i] + env[prev][j];
        argmax_violation = std::max(argmax_violation, best_v - old_v);
      }
      prev = best;
    }
  }

  const double value_tol = tol * (1.0 + scale);
  VerificationReport rep;
  rep.check = "fibered-weight-convexity";
  rep.anchor = "fibered-weight-convexity";
  rep.tolerance = tol;
  rep.max_violation = std::max({convexity > conv_tol ? convexity : 0.0, monotone > value_tol ? monotone : 0.0,
                                slope_excess > tol ? slope_excess : 0.0,
                                concavity > value_tol ? concavity : 0.0,
                                argmax_violation > value_tol ? argmax_violation : 0.0});
  rep.passed = rep.max_violation == 0.0;
  rep.grid = {{"n_tau", tau.size()}, {"n_s", s.size()}, {"n_t", fc.t_grid.size()}};
  rep.details = {{"convexity_defect", convexity},
                 {"convexity_tolerance", conv_tol},
                 {"tau_monotonicity_violation", monotone},
                 {"tau_slope_excess", slope_excess},
                 {"t_concavity_violation", concavity},
                 {"argmax_violation", argmax_violation}};
  rep.wall_time_s = clock.seconds();
  return rep;
}

SampledWeight2D reference_fibered_weight(const ModelBundlePair& pair, const std::vector<double>& tau_grid) {
  pair.validate();
  const auto& s = pair.grid();
  std::vector<double> values(tau_grid.size() * s.size());
  for (std::size_t i = 0; i < tau_grid.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j)
      values[i * s.size() + j] =
          log_add_exp(tau_grid[i] + pair.phi_A.values()[j], pair.phi_L.values()[j]);
  return SampledWeight2D(tau_grid, s, std::move(values), fibered_slope_polygon(pair.d_A, pair.d_L));
}

GapConstants gap_constants(const ModelBundlePair& pair, const std::vector<ChartBox>& boxes,
                           const BaseMeasure& mu) {
  pair.validate();
  const auto& grid = pair.grid();
  auto peak = [&](double s) {
    const double a = pair.phi_A(s);
    const double l = pair.phi_L(s);
    auto neg = [&](double t) { return -(t * a + (1.0 - t) * l - std::log(gamma_product(t))); };
    auto [t_best, v_best] = boost::math::tools::brent_find_minima(neg, 0.0, 1.0, 50);
    (void)t_best;
    return std::max({-v_best, a, l});
  };
  double c1 = 0.0;
  for (const auto& box : boxes) {
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    for (double s : box_samples(box, grid)) {
      hi = std::max(hi, peak(s));
      lo = std::min({lo, pair.phi_A(s), pair.phi_L(s)});
    }
    c1 = std::max(c1, hi - lo);
  }
  GapConstants c;
  c.c1 = c1;
  c.c2 = log_max_density_ratio(mu, boxes, grid);
  c.total = c.c1 + c.c2 + std::log(2.0);
  return c;
}

VerificationReport minimal_singularity_gap(const ModelBundlePair& pair, const FiberedWeight& fw,
                                           const GapOptions& options) {
  Stopwatch clock;
  pair.validate();
  if (fw.grid_s() != pair.grid()) throw InvalidInputError("fibered weight and pair use different base grids");
  SampledWeight2D reference = reference_fibered_weight(pair, fw.grid_tau());
  SampledWeight2D env = equilibrium_envelope_2d(reference, options.envelope);

  double gap = -std::numeric_limits<double>::infinity();
  double lower = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < env.values().size(); ++k) {
    gap = std::max(gap, env.values()[k] - fw.values()[k]);
    lower = std::min(lower, fw.values()[k] - reference.values()[k]);
  }
  const auto& grid = pair.grid();
  const std::vector<ChartBox> boxes = doubled(unit_cover(grid.front(), grid.back()));
  const GapConstants c = gap_constants(pair, boxes, options.measure);

  VerificationReport rep;
  rep.check = "minimal-singularity-gap";
  rep.anchor = "minimal-singularity-gap";
  rep.tolerance = 1e-9;
  rep.max_violation = std::max(0.0, gap - c.total);
  rep.passed = rep.max_violation <= rep.tolerance;
  rep.grid = {{"n_tau", fw.n_tau()},
              {"n_s", fw.n_s()},
              {"tau_range", {fw.grid_tau().front(), fw.grid_tau().back()}},
              {"s_range", {grid.front(), grid.back()}},
              {"boxes", boxes.size()}};
  rep.details = {{"observed_gap", gap},
                 {"bound_C", c.total},
                 {"C1", c.c1},
                 {"C2", c.c2},
                 {"log2", std::log(2.0)},
                 {"min_phi_tilde_minus_reference", lower},
                 {"measure", options.measure.name},
                 {"d_A", pair.d_A},
                 {"d_L", pair.d_L}};
  rep.wall_time_s = clock.seconds();
  return rep;
}

}  // namespace envlab

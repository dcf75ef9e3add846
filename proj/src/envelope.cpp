#include "envlab/envelope.hpp"

#include <algorithm>
#include <cmath>

#include "envlab/errors.hpp"

namespace envlab {

double ConjugateWeight::operator()(double s) const {
  if (s < sigma.front() || s > sigma.back())
    throw UnboundedTransformError("slope outside the conjugate's domain");
  if (sigma.size() == 1) return values.front();
  auto it = std::upper_bound(sigma.begin(), sigma.end(), s);
  std::size_t k = static_cast<std::size_t>(it - sigma.begin());
  if (k == 0) k = 1;
  if (k >= sigma.size()) k = sigma.size() - 1;
  double w = (s - sigma[k - 1]) / (sigma[k] - sigma[k - 1]);
  return values[k - 1] + w * (values[k] - values[k - 1]);
}

namespace {

struct Piece {
  std::size_t line;
  double start;
};

}  // namespace

ConjugateWeight legendre_transform(const SampledWeight& w, SlopeInterval I) {
  if (!I.valid()) throw InvalidInputError("slope interval has sigma_min > sigma_max");
  if (I.sigma_min < w.slope_left() || I.sigma_max > w.slope_right())
    throw UnboundedTransformError("slope interval leaves [slope_left, slope_right]");
  const auto& x = w.grid();
  const auto& y = w.values();
  const double a = I.sigma_min;
  const double b = I.sigma_max;

  ConjugateWeight out;
  if (a == b) {
    std::size_t best = 0;
    double best_v = x[0] * a - y[0];
    for (std::size_t i = 1; i < x.size(); ++i) {
      double v = x[i] * a - y[i];
      if (v > best_v) {
        best_v = v;
        best = i;
      }
    }
    out.sigma = {a};
    out.values = {best_v};
    out.support = {best};
    return out;
  }

  // Upper envelope of the lines σ ↦ x_i σ − y_i, slopes increasing with i.
  std::vector<Piece> stack;
  stack.reserve(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double start = a;
    while (!stack.empty()) {
      const std::size_t t = stack.back().line;
      double cross = (y[i] - y[t]) / (x[i] - x[t]);
      if (cross <= stack.back().start) {
        stack.pop_back();
        continue;
      }
      start = cross;
      break;
    }
    if (start >= b) continue;
    stack.push_back({i, start});
  }

  out.sigma.reserve(stack.size() + 1);
  for (const auto& p : stack) {
    out.sigma.push_back(p.start);
    out.support.push_back(p.line);
    out.values.push_back(x[p.line] * p.start - y[p.line]);
  }
  const std::size_t last = stack.back().line;
  out.sigma.push_back(b);
  out.values.push_back(x[last] * b - y[last]);
  return out;
}

SampledWeight equilibrium_envelope(const SampledWeight& w, SlopeInterval I) {
  if (!I.valid()) throw NoEnvelopeError("slope interval is empty");
  SlopeInterval J{std::max(I.sigma_min, w.slope_left()), std::min(I.sigma_max, w.slope_right())};
  if (!J.valid()) throw NoEnvelopeError("no admissible slope remains after intersection");
  const ConjugateWeight conj = legendre_transform(w, J);
  const auto& x = w.grid();
  const auto& y = w.values();

  // Second transform: lines of slope σ_v through a contact sample at each breakpoint.
  const std::size_t nv = conj.sigma.size();
  std::vector<double> slope(nv);
  std::vector<std::size_t> contact(nv);
  for (std::size_t v = 0; v < nv; ++v) {
    slope[v] = conj.sigma[v];
    contact[v] = conj.support[std::min(v, conj.support.size() - 1)];
  }
  auto line = [&](std::size_t v, double s) {
    return y[contact[v]] + slope[v] * (s - x[contact[v]]);
  };

  std::vector<double> out(x.size());
  std::size_t v = 0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    while (v + 1 < nv && line(v + 1, x[k]) >= line(v, x[k])) ++v;
    out[k] = std::min(line(v, x[k]), y[k]);
  }
  return SampledWeight(x, std::move(out), J.sigma_min, J.sigma_max);
}

SampledWeight envelope_by_hull(const SampledWeight& w, SlopeInterval I) {
  if (!I.valid()) throw NoEnvelopeError("slope interval is empty");
  const SlopeInterval J{std::max(I.sigma_min, w.slope_left()), std::min(I.sigma_max, w.slope_right())};
  if (!J.valid()) throw NoEnvelopeError("no admissible slope remains after intersection");
  const auto& x = w.grid();
  const auto& y = w.values();

  std::vector<std::size_t> hull;
  for (std::size_t k = 0; k < x.size(); ++k) {
    while (hull.size() >= 2) {
      const std::size_t a = hull[hull.size() - 2], b = hull.back();
      if ((y[b] - y[a]) * (x[k] - x[a]) < (y[k] - y[a]) * (x[b] - x[a])) break;
      hull.pop_back();
    }
    hull.push_back(k);
  }
  auto edge = [&](std::size_t i) { return (y[hull[i + 1]] - y[hull[i]]) / (x[hull[i + 1]] - x[hull[i]]); };
  std::size_t lo = hull.size() - 1, hi = 0;
  for (std::size_t i = 0; i + 1 < hull.size(); ++i)
    if (edge(i) >= J.sigma_min) {
      lo = i;
      break;
    }
  for (std::size_t i = hull.size() - 1; i > 0; --i)
    if (edge(i - 1) <= J.sigma_max) {
      hi = i;
      break;
    }
  hi = std::max(hi, lo);

  std::vector<double> out(x.size());
  std::size_t e = lo;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const std::size_t l = hull[lo], r = hull[hi];
    if (k <= l) {
      out[k] = y[l] + J.sigma_min * (x[k] - x[l]);
    } else if (k >= r) {
      out[k] = y[r] + J.sigma_max * (x[k] - x[r]);
    } else {
      while (hull[e + 1] < k) ++e;
      const std::size_t a = hull[e], b = hull[e + 1];
      out[k] = y[a] + (y[b] - y[a]) * (x[k] - x[a]) / (x[b] - x[a]);
    }
  }
  return SampledWeight(x, std::move(out), J.sigma_min, J.sigma_max);
}

VerificationReport check_envelope(const SampledWeight& w, SlopeInterval I, double tol) {
  Stopwatch clock;
  const SampledWeight e = equilibrium_envelope(w, I);
  const SampledWeight h = envelope_by_hull(w, I);
  double routes = 0.0, above = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    routes = std::max(routes, std::abs(e.values()[k] - h.values()[k]));
    above = std::max(above, e.values()[k] - w.values()[k]);
  }
  VerificationReport rep;
  rep.check = "equilibrium-envelope";
  rep.anchor = "equilibrium-envelope";
  rep.tolerance = tol;
  rep.max_violation = std::max(routes, above);
  rep.passed = rep.max_violation <= tol;
  rep.grid = {{"n_s", w.size()}, {"s_range", {w.grid().front(), w.grid().back()}}};
  rep.details = {{"route_difference", routes},
                 {"envelope_above_weight", above},
                 {"slope_interval", {e.slope_left(), e.slope_right()}},
                 {"convexity_defect", w.size() >= 3 ? convexity_defect(e) : 0.0}};
  rep.wall_time_s = clock.seconds();
  return rep;
}

SampledWeight envelope_offset(const SampledWeight& w, SlopeInterval I) {
  SampledWeight e = equilibrium_envelope(w, I);
  std::vector<double> psi(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) psi[i] = e.values()[i] - w.values()[i];
  return SampledWeight(w.grid(), std::move(psi), 0.0, 0.0);
}

double convexity_defect(const std::vector<double>& grid, const std::vector<double>& values) {
  if (grid.size() < 3) throw InvalidInputError("convexity defect needs at least 3 samples");
  double worst = 0.0;
  for (std::size_t i = 1; i + 1 < grid.size(); ++i) {
    double left = (values[i] - values[i - 1]) / (grid[i] - grid[i - 1]);
    double right = (values[i + 1] - values[i]) / (grid[i + 1] - grid[i]);
    double dd = 2.0 * (right - left) / (grid[i + 1] - grid[i - 1]);
    worst = std::max(worst, -dd);
  }
  return worst;
}

double convexity_defect(const SampledWeight& w) { return convexity_defect(w.grid(), w.values()); }

}  // namespace envlab

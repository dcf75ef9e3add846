#include "envlab/envelope2d.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <limits>
#include <map>
#include <string>

#include "envlab/envelope.hpp"
#include "envlab/errors.hpp"
#include "envlab/sampled_weight.hpp"

namespace envlab {

namespace {

void check_grid(const std::vector<double>& g, const char* name) {
  if (g.size() < 2) throw InvalidInputError(std::string(name) + " grid needs at least 2 points");
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (!std::isfinite(g[i])) throw InvalidInputError(std::string(name) + " grid not finite");
    if (i > 0 && !(g[i] > g[i - 1]))
      throw InvalidInputError(std::string(name) + " grid not strictly increasing");
  }
}

}  // namespace

SampledWeight2D::SampledWeight2D(std::vector<double> grid_tau, std::vector<double> grid_s,
                                 std::vector<double> values, ConvexPolygon slope_polytope)
    : grid_tau_(std::move(grid_tau)),
      grid_s_(std::move(grid_s)),
      values_(std::move(values)),
      polytope_(std::move(slope_polytope)) {
  check_grid(grid_tau_, "tau");
  check_grid(grid_s_, "s");
  if (values_.size() != grid_tau_.size() * grid_s_.size())
    throw InvalidInputError("value matrix does not match the grids");
  for (double v : values_)
    if (!std::isfinite(v)) throw InvalidInputError("non-finite sample in 2D weight");
  if (polytope_.vertices().empty()) throw InvalidInputError("slope polytope is empty");
}

SampledWeight2D SampledWeight2D::from_function(const std::vector<double>& grid_tau,
                                               const std::vector<double>& grid_s,
                                               const std::function<double(double, double)>& f,
                                               ConvexPolygon slope_polytope) {
  std::vector<double> values;
  values.reserve(grid_tau.size() * grid_s.size());
  for (double t : grid_tau)
    for (double s : grid_s) values.push_back(f(t, s));
  return SampledWeight2D(grid_tau, grid_s, std::move(values), std::move(slope_polytope));
}

std::vector<double> SampledWeight2D::row(std::size_t i) const {
  auto first = values_.begin() + static_cast<std::ptrdiff_t>(i * n_s());
  return std::vector<double>(first, first + static_cast<std::ptrdiff_t>(n_s()));
}

std::vector<double> SampledWeight2D::column(std::size_t j) const {
  std::vector<double> out(n_tau());
  for (std::size_t i = 0; i < n_tau(); ++i) out[i] = at(i, j);
  return out;
}

SampledWeight2D SampledWeight2D::with_values(std::vector<double> values) const {
  return SampledWeight2D(grid_tau_, grid_s_, std::move(values), polytope_);
}

std::vector<double> max_of_lines(const std::vector<double>& slope,
                                 const std::vector<double>& intercept,
                                 const std::vector<double>& xs) {
  struct Piece {
    std::size_t line;
    double start;
  };
  std::vector<Piece> hull;
  const double neg_inf = -std::numeric_limits<double>::infinity();
  for (std::size_t v = 0; v < slope.size(); ++v) {
    if (!hull.empty() && slope[hull.back().line] == slope[v]) {
      if (intercept[v] <= intercept[hull.back().line]) continue;
      hull.pop_back();
    }
    double start = neg_inf;
    while (!hull.empty()) {
      const std::size_t t = hull.back().line;
      double cross = (intercept[t] - intercept[v]) / (slope[v] - slope[t]);
      if (cross <= hull.back().start) {
        hull.pop_back();
        continue;
      }
      start = cross;
      break;
    }
    hull.push_back({v, start});
  }
  std::vector<double> out(xs.size());
  std::size_t h = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    while (h + 1 < hull.size() && hull[h + 1].start <= xs[k]) ++h;
    const std::size_t v = hull[h].line;
    out[k] = slope[v] * xs[k] + intercept[v];
  }
  return out;
}

SampledWeight2D equilibrium_envelope_2d(const SampledWeight2D& w, const Envelope2DOptions& options) {
  const auto& tau = w.grid_tau();
  const auto& s = w.grid_s();
  const std::size_t nt = w.n_tau();
  const std::size_t ns = w.n_s();
  const ConvexPolygon& poly = w.slope_polytope();
  const double q_lo = poly.q_min();
  const double q_hi = poly.q_max();

  double scale = 1.0;
  for (double v : w.values()) scale = std::max(scale, 1.0 + std::abs(v));
  const double tol = options.tolerance * scale;

  // Conjugate of each τ-row in the s variable, over the q-range of the polytope.
  std::vector<ConjugateWeight> rows;
  rows.reserve(nt);
  for (std::size_t i = 0; i < nt; ++i) {
    SampledWeight r(s, w.row(i), q_lo, q_hi);
    rows.push_back(legendre_transform(r, {q_lo, q_hi}));
  }

  // E_k(q): the p-constrained envelope at τ_k of the data −g_i(q). Concave in q.
  std::vector<double> h(nt);
  auto slice = [&](double q) {
    q = std::clamp(q, q_lo, q_hi);
    auto range = poly.slice_at(q);
    if (!range) throw InvalidInputError("slope polytope has an empty slice inside its range");
    for (std::size_t i = 0; i < nt; ++i) h[i] = -rows[i](q);
    SampledWeight data(tau, h, range->first, range->second);
    return equilibrium_envelope(data, {range->first, range->second}).values();
  };

  std::map<double, std::vector<double>> nodes;
  auto add_node = [&](double q) {
    if (!nodes.count(q)) nodes.emplace(q, slice(q));
  };
  add_node(q_lo);
  add_node(q_hi);
  if (q_hi > q_lo) {
    const int initial = 16;
    for (int k = 1; k < initial; ++k) add_node(q_lo + (q_hi - q_lo) * k / initial);
    for (const auto& v : poly.vertices()) add_node(v.q);
  }

  using It = std::map<double, std::vector<double>>::iterator;
  std::vector<double> pending;
  for (auto it = nodes.begin(); std::next(it) != nodes.end(); ++it) pending.push_back(it->first);

  double residual = 0.0;
  while (!pending.empty()) {
    const double left_key = pending.back();
    pending.pop_back();
    It i1 = nodes.find(left_key);
    It i2 = std::next(i1);
    const double q1 = i1->first;
    const double q2 = i2->first;
    const bool has_left = i1 != nodes.begin();
    const bool has_right = std::next(i2) != nodes.end();
    It i0 = has_left ? std::prev(i1) : i1;
    It i3 = has_right ? std::next(i2) : i2;
    const double width = q2 - q1;

    double worst = 0.0;
    double candidate = 0.5 * (q1 + q2);
    for (std::size_t k = 0; k < nt; ++k) {
      const double f1 = i1->second[k];
      const double f2 = i2->second[k];
      double gap;
      double c = 0.5 * (q1 + q2);
      if (has_left && has_right) {
        const double mL = (f1 - i0->second[k]) / (q1 - i0->first);
        const double mR = (i3->second[k] - f2) / (i3->first - q2);
        const double chord = (f2 - f1) / width;
        if (mL > mR) {
          c = std::clamp((f2 - f1 + mL * q1 - mR * q2) / (mL - mR), q1, q2);
          gap = std::min(f1 + mL * (c - q1), f2 + mR * (c - q2)) - (f1 + chord * (c - q1));
        } else {
          gap = 0.0;
        }
      } else if (has_left) {
        const double mL = (f1 - i0->second[k]) / (q1 - i0->first);
        gap = f1 + mL * width - f2;
      } else if (has_right) {
        const double mR = (i3->second[k] - f2) / (i3->first - q2);
        gap = f2 - mR * width - f1;
      } else {
        gap = std::numeric_limits<double>::infinity();
      }
      if (gap > worst) {
        worst = gap;
        candidate = c;
      }
    }
    if (worst <= tol) continue;
    if (width <= 1e-13 * (1.0 + std::abs(q1) + std::abs(q2))) {
      residual = std::max(residual, worst);
      continue;
    }
    if (!(candidate > q1 && candidate < q2)) candidate = 0.5 * (q1 + q2);
    if (nodes.size() >= options.max_slices)
      throw ConvergenceError("2D envelope exceeded its slice budget", worst);
    nodes.emplace(candidate, slice(candidate));
    pending.push_back(q1);
    pending.push_back(candidate);
  }
  if (residual > 1e3 * tol)
    throw ConvergenceError("2D envelope could not resolve the conjugate slices", residual);

  std::vector<double> slopes;
  slopes.reserve(nodes.size());
  for (const auto& n : nodes) slopes.push_back(n.first);
  std::vector<double> out(nt * ns);
  std::vector<double> intercept(nodes.size());
  for (std::size_t k = 0; k < nt; ++k) {
    std::size_t m = 0;
    for (const auto& n : nodes) intercept[m++] = n.second[k];
    std::vector<double> line = max_of_lines(slopes, intercept, s);
    for (std::size_t j = 0; j < ns; ++j) out[k * ns + j] = std::min(line[j], w.at(k, j));
  }
  return w.with_values(std::move(out));
}

double convexity_defect_2d(const SampledWeight2D& w) {
  double worst = 0.0;
  if (w.n_s() >= 3)
    for (std::size_t i = 0; i < w.n_tau(); ++i)
      worst = std::max(worst, convexity_defect(w.grid_s(), w.row(i)));
  if (w.n_tau() >= 3)
    for (std::size_t j = 0; j < w.n_s(); ++j)
      worst = std::max(worst, convexity_defect(w.grid_tau(), w.column(j)));
  return worst;
}

}  // namespace envlab

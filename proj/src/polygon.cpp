#include "envlab/polygon.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "envlab/errors.hpp"

namespace envlab {

namespace {

double cross(const Point2& o, const Point2& a, const Point2& b) {
  return (a.p - o.p) * (b.q - o.q) - (a.q - o.q) * (b.p - o.p);
}

bool same(const Point2& a, const Point2& b) { return a.p == b.p && a.q == b.q; }

}  // namespace

ConvexPolygon::ConvexPolygon(std::vector<Point2> vertices) {
  for (const auto& v : vertices) {
    if (!std::isfinite(v.p) || !std::isfinite(v.q))
      throw InvalidInputError("polygon vertex is not finite");
    if (vertices_.empty() || !same(vertices_.back(), v)) vertices_.push_back(v);
  }
  while (vertices_.size() > 1 && same(vertices_.front(), vertices_.back())) vertices_.pop_back();
  if (vertices_.empty()) throw InvalidInputError("slope polygon is empty");
  const std::size_t n = vertices_.size();
  if (n < 3) return;

  double area = 0.0;
  for (std::size_t i = 0; i < n; ++i) area += cross(vertices_[0], vertices_[i], vertices_[(i + 1) % n]);
  if (area < 0.0) std::reverse(vertices_.begin(), vertices_.end());
  if (area == 0.0) {
    // Collinear input: keep the two extreme points.
    auto cmp = [](const Point2& a, const Point2& b) { return a.p < b.p || (a.p == b.p && a.q < b.q); };
    auto [lo, hi] = std::minmax_element(vertices_.begin(), vertices_.end(), cmp);
    vertices_ = {*lo, *hi};
    return;
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (cross(vertices_[i], vertices_[(i + 1) % n], vertices_[(i + 2) % n]) < 0.0)
      throw InvalidInputError("slope polygon is not convex");
  }
}

ConvexPolygon ConvexPolygon::box(double p_min, double p_max, double q_min, double q_max) {
  if (p_min > p_max || q_min > q_max) throw InvalidInputError("box bounds out of order");
  return ConvexPolygon({{p_min, q_min}, {p_max, q_min}, {p_max, q_max}, {p_min, q_max}});
}

double ConvexPolygon::q_min() const {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& v : vertices_) r = std::min(r, v.q);
  return r;
}

double ConvexPolygon::q_max() const {
  double r = -std::numeric_limits<double>::infinity();
  for (const auto& v : vertices_) r = std::max(r, v.q);
  return r;
}

double ConvexPolygon::p_min() const {
  double r = std::numeric_limits<double>::infinity();
  for (const auto& v : vertices_) r = std::min(r, v.p);
  return r;
}

double ConvexPolygon::p_max() const {
  double r = -std::numeric_limits<double>::infinity();
  for (const auto& v : vertices_) r = std::max(r, v.p);
  return r;
}

std::optional<std::pair<double, double>> ConvexPolygon::slice_at(double q) const {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  const std::size_t n = vertices_.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point2& a = vertices_[i];
    if (a.q == q) {
      lo = std::min(lo, a.p);
      hi = std::max(hi, a.p);
    }
    if (n == 1) break;
    const Point2& b = vertices_[(i + 1) % n];
    if (a.q == b.q) continue;
    if ((q - a.q) * (q - b.q) <= 0.0) {
      double w = (q - a.q) / (b.q - a.q);
      double p = a.p + w * (b.p - a.p);
      lo = std::min(lo, p);
      hi = std::max(hi, p);
    }
  }
  if (lo > hi) return std::nullopt;
  return std::make_pair(lo, hi);
}

bool ConvexPolygon::contains(const Point2& x, double tol) const {
  auto slice = slice_at(std::clamp(x.q, q_min(), q_max()));
  if (x.q < q_min() - tol || x.q > q_max() + tol || !slice) return false;
  return x.p >= slice->first - tol && x.p <= slice->second + tol;
}

}  // namespace envlab

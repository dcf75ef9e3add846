#pragma once

#include <optional>
#include <utility>
#include <vector>

namespace envlab {

struct Point2 {
  double p = 0.0;
  double q = 0.0;
};

/// Convex set of gradient pairs (p, q) = (∂τ, ∂s). A single vertex is a point,
/// two vertices a segment; three or more are stored counter-clockwise.
class ConvexPolygon {
 public:
  ConvexPolygon() = default;
  explicit ConvexPolygon(std::vector<Point2> vertices);

  static ConvexPolygon box(double p_min, double p_max, double q_min, double q_max);

  const std::vector<Point2>& vertices() const { return vertices_; }
  double q_min() const;
  double q_max() const;
  double p_min() const;
  double p_max() const;

  /// Range of p over the polygon at fixed q; empty when q is outside [q_min, q_max].
  std::optional<std::pair<double, double>> slice_at(double q) const;

  bool contains(const Point2& x, double tol = 0.0) const;

 private:
  std::vector<Point2> vertices_;
};

}  // namespace envlab

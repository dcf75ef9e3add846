#pragma once

#include <functional>

namespace envlab {

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
};

/// Adaptive Gauss–Kronrod (61-point) integration over a finite [a, b].
/// Throws PrecisionError when the error estimate exceeds tol·max(1, ∫|f|).
QuadratureResult integrate(const std::function<double(double)>& f, double a, double b,
                           double tol = 1e-12, unsigned max_depth = 25);

/// ∫_0^∞ f(r) dr through r = scale·tan(θπ/2), θ ∈ (0, 1). The θ-range is split
/// at `split` so an endpoint singularity near r = 0 gets its own panel.
QuadratureResult integrate_half_line(const std::function<double(double)>& f, double scale = 1.0,
                                     double tol = 1e-12, double split = 0.05);

}  // namespace envlab

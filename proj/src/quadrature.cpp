#include "envlab/quadrature.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>

#include "envlab/errors.hpp"

namespace envlab {

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b, double tol,
                           unsigned max_depth) {
  using rule = boost::math::quadrature::gauss_kronrod<double, 61>;
  double error = 0.0;
  double l1 = 0.0;
  // boost stops on a relative error; a one-panel pass turns tol·max(1, ∫|f|) into one.
  double value = rule::integrate(f, a, b, 0, 0.0, &error, &l1);
  if (std::isfinite(value) && error > tol * std::max(1.0, l1)) {
    const double relative = l1 > 0.0 ? tol * std::max(1.0, l1) / l1 : tol;
    value = rule::integrate(f, a, b, max_depth, relative, &error, &l1);
  }
  if (!std::isfinite(value) || error > tol * std::max(1.0, l1))
    throw PrecisionError("quadrature did not reach the requested tolerance", value, error);
  return {value, error};
}

QuadratureResult integrate_half_line(const std::function<double(double)>& f, double scale,
                                     double tol, double split) {
  const double half_pi = M_PI / 2.0;
  auto g = [&](double theta) {
    if (theta >= 1.0) return 0.0;
    const double c = std::cos(theta * half_pi);
    const double r = scale * std::tan(theta * half_pi);
    return f(r) * scale * half_pi / (c * c);
  };
  QuadratureResult lo = integrate(g, 0.0, split, tol);
  QuadratureResult hi = integrate(g, split, 1.0, tol);
  return {lo.value + hi.value, lo.error_estimate + hi.error_estimate};
}

}  // namespace envlab

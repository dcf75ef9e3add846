#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace envlab {

/// Closed interval of admissible slopes.
struct SlopeInterval {
  double sigma_min = 0.0;
  double sigma_max = 0.0;

  bool valid() const { return sigma_min <= sigma_max; }
  bool contains(double x) const { return sigma_min <= x && x <= sigma_max; }
};

/// Circle-invariant weight u(s), s = log|z|^2, sampled on a grid and extended
/// affinely beyond it.
class SampledWeight {
 public:
  SampledWeight() = default;
  SampledWeight(std::vector<double> grid, std::vector<double> values, double slope_left,
                double slope_right);

  static SampledWeight from_function(const std::vector<double>& grid,
                                     const std::function<double(double)>& f, double slope_left,
                                     double slope_right);

  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  double slope_left() const { return slope_left_; }
  double slope_right() const { return slope_right_; }
  std::size_t size() const { return grid_.size(); }

  /// Piecewise-linear interpolation, affine extrapolation with the asymptotic slopes.
  double operator()(double s) const;

  SampledWeight with_values(std::vector<double> values) const;

 private:
  std::vector<double> grid_;
  std::vector<double> values_;
  double slope_left_ = 0.0;
  double slope_right_ = 0.0;
};

/// n_points equispaced points from a to b; endpoints exact.
std::vector<double> linspace(double a, double b, std::size_t n_points);

/// Default working grid for weights: 4096 points on [-20, 20].
std::vector<double> default_grid();

double sup_distance(const SampledWeight& u, const SampledWeight& v);

}  // namespace envlab

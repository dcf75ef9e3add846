#include "envlab/sampled_weight.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "envlab/errors.hpp"

namespace envlab {

SampledWeight::SampledWeight(std::vector<double> grid, std::vector<double> values,
                             double slope_left, double slope_right)
    : grid_(std::move(grid)),
      values_(std::move(values)),
      slope_left_(slope_left),
      slope_right_(slope_right) {
  if (grid_.size() < 2) throw InvalidInputError("weight grid needs at least 2 points");
  if (grid_.size() != values_.size())
    throw InvalidInputError("grid and values differ in length");
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    if (!std::isfinite(grid_[i]) || !std::isfinite(values_[i]))
      throw InvalidInputError("non-finite sample at index " + std::to_string(i));
    if (i > 0 && !(grid_[i] > grid_[i - 1]))
      throw InvalidInputError("grid not strictly increasing at index " + std::to_string(i));
  }
  if (!std::isfinite(slope_left_) || !std::isfinite(slope_right_))
    throw InvalidInputError("asymptotic slopes must be finite");
  if (slope_left_ > slope_right_)
    throw InvalidInputError("slope_left exceeds slope_right");
}

SampledWeight SampledWeight::from_function(const std::vector<double>& grid,
                                           const std::function<double(double)>& f,
                                           double slope_left, double slope_right) {
  std::vector<double> values(grid.size());
  std::transform(grid.begin(), grid.end(), values.begin(), f);
  return SampledWeight(grid, std::move(values), slope_left, slope_right);
}

double SampledWeight::operator()(double s) const {
  if (s <= grid_.front()) return values_.front() + slope_left_ * (s - grid_.front());
  if (s >= grid_.back()) return values_.back() + slope_right_ * (s - grid_.back());
  auto it = std::upper_bound(grid_.begin(), grid_.end(), s);
  std::size_t j = static_cast<std::size_t>(it - grid_.begin());
  std::size_t i = j - 1;
  double h = grid_[j] - grid_[i];
  double w = (s - grid_[i]) / h;
  return values_[i] + w * (values_[j] - values_[i]);
}

SampledWeight SampledWeight::with_values(std::vector<double> values) const {
  return SampledWeight(grid_, std::move(values), slope_left_, slope_right_);
}

std::vector<double> linspace(double a, double b, std::size_t n_points) {
  if (n_points < 2) throw InvalidParameterError("linspace needs at least 2 points");
  std::vector<double> out(n_points);
  const double n = static_cast<double>(n_points - 1);
  for (std::size_t i = 0; i < n_points; ++i) out[i] = a + (b - a) * (static_cast<double>(i) / n);
  out.back() = b;
  return out;
}

std::vector<double> default_grid() { return linspace(-20.0, 20.0, 4096); }

double sup_distance(const SampledWeight& u, const SampledWeight& v) {
  if (u.grid() != v.grid()) throw InvalidInputError("weights live on different grids");
  double d = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i)
    d = std::max(d, std::abs(u.values()[i] - v.values()[i]));
  return d;
}

}  // namespace envlab

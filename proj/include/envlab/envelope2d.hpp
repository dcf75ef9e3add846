#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "envlab/polygon.hpp"

namespace envlab {

/// Weight u(τ, s) sampled on a tensor grid, values stored row-major with τ as
/// the slow index.
class SampledWeight2D {
 public:
  SampledWeight2D() = default;
  SampledWeight2D(std::vector<double> grid_tau, std::vector<double> grid_s,
                  std::vector<double> values, ConvexPolygon slope_polytope);

  static SampledWeight2D from_function(const std::vector<double>& grid_tau,
                                       const std::vector<double>& grid_s,
                                       const std::function<double(double, double)>& f,
                                       ConvexPolygon slope_polytope);

  const std::vector<double>& grid_tau() const { return grid_tau_; }
  const std::vector<double>& grid_s() const { return grid_s_; }
  const std::vector<double>& values() const { return values_; }
  const ConvexPolygon& slope_polytope() const { return polytope_; }
  std::size_t n_tau() const { return grid_tau_.size(); }
  std::size_t n_s() const { return grid_s_.size(); }

  double at(std::size_t i, std::size_t j) const { return values_[i * grid_s_.size() + j]; }
  std::vector<double> row(std::size_t i) const;
  std::vector<double> column(std::size_t j) const;

  SampledWeight2D with_values(std::vector<double> values) const;

 private:
  std::vector<double> grid_tau_;
  std::vector<double> grid_s_;
  std::vector<double> values_;
  ConvexPolygon polytope_;
};

using FiberedWeight = SampledWeight2D;

struct Envelope2DOptions {
  /// Resolution of the conjugate slices, relative to 1 + max|u|.
  double tolerance = 1e-11;
  std::size_t max_slices = 1u << 20;
};

/// Largest convex function below the samples whose gradient lies in the slope
/// polytope, evaluated on the grid.
SampledWeight2D equilibrium_envelope_2d(const SampledWeight2D& w,
                                        const Envelope2DOptions& options = {});

/// Worst convexity defect over all τ-lines and s-lines of the grid.
double convexity_defect_2d(const SampledWeight2D& w);

/// Upper envelope of the lines y = slope[v]·x + intercept[v] evaluated at sorted xs.
std::vector<double> max_of_lines(const std::vector<double>& slope,
                                 const std::vector<double>& intercept,
                                 const std::vector<double>& xs);

}  // namespace envlab

#include "envlab/models.hpp"

#include <cmath>

namespace envlab {

double softplus(double s) { return s > 0 ? s + std::log1p(std::exp(-s)) : std::log1p(std::exp(s)); }

ModelBundlePair bump_model_pair(const std::vector<double>& grid) {
  return divisor_model_pair(grid, 2, 1);
}

ModelBundlePair divisor_model_pair(const std::vector<double>& grid, int d_A, int d_L) {
  ModelBundlePair p{
      SampledWeight::from_function(grid, [d_A](double s) { return d_A * softplus(s); }, 0.0, d_A),
      d_A,
      SampledWeight::from_function(
          grid, [d_L](double s) { return d_L * softplus(s) + 0.5 * std::exp(-s * s); }, 0.0, d_L),
      d_L};
  p.validate();
  return p;
}

}  // namespace envlab

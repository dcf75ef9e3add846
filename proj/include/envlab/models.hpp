#pragma once

#include <vector>

#include "envlab/family.hpp"

namespace envlab {

/// log(1 + e^s) without overflow.
double softplus(double s);

/// d_A = 2, φ_A = 2 log(1+e^s); d_L = 1, φ_L = log(1+e^s) + ½e^{−s²}.
ModelBundlePair bump_model_pair(const std::vector<double>& grid);

/// φ_A = d_A·log(1+e^s) and φ_L = d_L·log(1+e^s) + ½e^{−s²} (a non-convex bump).
ModelBundlePair divisor_model_pair(const std::vector<double>& grid, int d_A, int d_L);

}  // namespace envlab

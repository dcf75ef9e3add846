#pragma once

#include <cstdint>

#include <json.hpp>

#include "envlab/envelope2d.hpp"
#include "envlab/report.hpp"

namespace envlab {

/// Smoothing scale of the regularized max.
struct RegularizedMaxKernel {
  double epsilon = 1.0;
  void validate() const;
};

/// M_ε(x, y) = ∫∫ max(x + εh₁, y + εh₂) θ(h₁)θ(h₂) dh₁dh₂ with θ ∝ exp(−1/(1−h²)) on [−1, 1].
/// Equal to max(x, y) exactly once |x − y| ≥ 2ε.
double regularized_max(const RegularizedMaxKernel& k, double x, double y);

/// Largest value of the difference density ∫θ(h)θ(h−x)dh, i.e. the peak of ε·∂²M/∂x².
double regularized_max_curvature_peak();

/// Randomized contract check (bounds, symmetry, translation, monotone convexity, exact
/// max far from the diagonal, bounded second differences), plus convexity preservation
/// on random convex pairs.
VerificationReport check_regularized_max(std::uint64_t seed, int cases = 1000, int convex_pairs = 100,
                                         double tol = 1e-10);

/// Annulus τ_inner ≤ τ ≤ τ_outer in the fiber log-coordinate.
struct GlueRegion {
  double tau_inner = 0.0;
  double tau_outer = 1.0;
  void validate() const;
};

/// Regularized max of outer and inner for τ < τ_outer, outer itself for τ ≥ τ_outer.
/// Throws GluingFailureError unless outer ≥ inner + 2ε on every annulus sample.
SampledWeight2D glue_weights(const SampledWeight2D& outer, const SampledWeight2D& inner,
                             const GlueRegion& region, const RegularizedMaxKernel& k);

/// Lowers inner by the least constant that gives outer ≥ inner + 2ε on the annulus.
/// Returns the shift applied (0 when the margin already holds).
double normalize_for_gluing(const SampledWeight2D& outer, SampledWeight2D& inner, const GlueRegion& region,
                            const RegularizedMaxKernel& k);

struct HirzebruchConfig {
  int k = 3;
  int d_A = 1;
  int d_L = 0;
  int grid = 128;
  double epsilon = 0.5;
  double tau_min = -10.0;
  double tau_max = 10.0;
  double s_min = -8.0;
  double s_max = 8.0;
  double tau_inner = 2.0;
  double tau_outer = 4.0;
  std::size_t t_points = 256;
  /// Adds a bump to the inner weight after the envelope, for negative tests.
  bool corrupt_inner = false;

  static HirzebruchConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
};

struct HirzebruchResult {
  VerificationReport report;
  SampledWeight2D inner;
  SampledWeight2D outer;
  SampledWeight2D glued;
};

/// Divisor-model pipeline: pair, family, fibered weight (inner), outer = φ_A(s) + k·τ,
/// normalization, gluing, convexity and smoothness checks. Stage failures are rethrown
/// as StageError.
HirzebruchResult hirzebruch_demo(const HirzebruchConfig& config);

}  // namespace envlab

#pragma once

#include <cstddef>
#include <vector>

#include "envlab/report.hpp"
#include "envlab/sampled_weight.hpp"

namespace envlab {

/// Convex piecewise-linear conjugate w*(σ) on a closed slope interval.
///
/// sigma holds the breakpoints including both interval ends; support[k] is the
/// index of the grid sample attaining the supremum on [sigma[k], sigma[k+1]].
/// A degenerate interval is stored as a single breakpoint with one support.
struct ConjugateWeight {
  std::vector<double> sigma;
  std::vector<double> values;
  std::vector<std::size_t> support;

  double lo() const { return sigma.front(); }
  double hi() const { return sigma.back(); }
  double operator()(double s) const;
};

/// w*(σ) = sup_s (σ s − u(s)) for σ in I.
ConjugateWeight legendre_transform(const SampledWeight& w, SlopeInterval I);

/// Largest convex minorant of w with all slopes in I ∩ [slope_left, slope_right].
SampledWeight equilibrium_envelope(const SampledWeight& w, SlopeInterval I);

/// Same envelope by a second route: lower hull of the samples, slopes clamped to I.
SampledWeight envelope_by_hull(const SampledWeight& w, SlopeInterval I);

/// Legendre route against the hull route, plus u_e ≤ u.
VerificationReport check_envelope(const SampledWeight& w, SlopeInterval I, double tol = 1e-8);

/// Envelope offset u_e − u, always ≤ 0. Extrapolated flat; the true tails are
/// flat only when I covers [slope_left, slope_right].
SampledWeight envelope_offset(const SampledWeight& w, SlopeInterval I);

/// Largest negative part of the second divided differences over interior samples.
double convexity_defect(const SampledWeight& w);
double convexity_defect(const std::vector<double>& grid, const std::vector<double>& values);

}  // namespace envlab

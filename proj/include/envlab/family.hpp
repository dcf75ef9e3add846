#pragma once

#include <cstddef>
#include <vector>

#include "envlab/charts.hpp"
#include "envlab/envelope2d.hpp"
#include "envlab/report.hpp"
#include "envlab/sampled_weight.hpp"

namespace envlab {

/// Weights of the two model bundles on the base, with degrees. φ_A has slopes
/// [0, d_A] and φ_L has slopes [0, d_L]; both share one grid.
struct ModelBundlePair {
  SampledWeight phi_A;
  int d_A = 1;
  SampledWeight phi_L;
  int d_L = 0;

  void validate() const;
  const std::vector<double>& grid() const { return phi_A.grid(); }
};

/// tφ_A + (1−t)φ_L with slopes [0, t·d_A + (1−t)·d_L].
SampledWeight mix_weights(const ModelBundlePair& pair, double t);

/// Envelope offsets ψ_t = (mix_t)_e − mix_t on a grid of t values.
struct FamilyCurve {
  ModelBundlePair pair;
  std::vector<double> t_grid;
  std::vector<SampledWeight> psi;

  /// (mix_t)_e at the i-th t value.
  std::vector<double> envelope_values(std::size_t i) const;
};

/// t_i = (1 − cos(πi/n))/2, i = 0..n. Contains 0 and 1 exactly; nested under doubling n.
std::vector<double> lobatto_t_grid(std::size_t n = 256);

FamilyCurve family_curve(const ModelBundlePair& pair, const std::vector<double>& t_grid);

/// Largest t used where ψ_t/(1−t) is formed.
inline constexpr double kMonotoneTCap = 1.0 - 1.0 / 1024.0;

/// ψ_t/(1−t) nondecreasing in t at every base sample (t ≤ kMonotoneTCap).
VerificationReport check_monotone_family(const FamilyCurve& fc, double tol = 1e-9);

/// |ψ_{t+δ}/(1−t−δ) − ψ_t/(1−t)| for δ = 1/32 … 1/256, recomputed from the pair,
/// must not grow as δ halves.
VerificationReport check_right_continuity(const FamilyCurve& fc, double tol = 1e-9);

/// Box maxima of H = ψ_t/(1−t) over four shrinking (s, t) boxes stay above H at the
/// centre, and the last excess is at most max(tol, ¾ of the first).
VerificationReport check_upper_semicontinuity(const FamilyCurve& fc, double tol = 1e-9);

/// Gradient polygon of the fibered weight: 0 ≤ p ≤ 1, 0 ≤ q ≤ p·d_A + (1−p)·d_L.
ConvexPolygon fibered_slope_polygon(int d_A, int d_L);

/// φ̃(τ, s) = max over the t-grid of t·τ + (mix_t)_e(s). The t-grid must contain 0 and 1.
FiberedWeight fibered_weight(const ModelBundlePair& pair, const FamilyCurve& fc,
                             const std::vector<double>& tau_grid);

/// Convexity along grid lines, τ-monotonicity and τ-slopes in [0, 1], concavity of
/// the maximand in t, and monotone argmax in τ.
VerificationReport check_fibered_weight(const FamilyCurve& fc, const FiberedWeight& fw,
                                        double tol = 1e-9);

/// log(e^{τ+φ_A(s)} + e^{φ_L(s)}) on the grid of fw.
SampledWeight2D reference_fibered_weight(const ModelBundlePair& pair, const std::vector<double>& tau_grid);

struct GapConstants {
  double c1 = 0.0;
  double c2 = 0.0;
  double total = 0.0;  // c1 + c2 + log 2
};

/// C₁: largest joint oscillation over (s, t) ∈ box × [0, 1] of
/// tφ_A + (1−t)φ_L − log Γ(1+t)Γ(2−t); C₂: log max of 1/ρ over the boxes.
GapConstants gap_constants(const ModelBundlePair& pair, const std::vector<ChartBox>& boxes,
                           const BaseMeasure& mu);

struct GapOptions {
  BaseMeasure measure = BaseMeasure::fubini_study();
  Envelope2DOptions envelope;
};

/// sup((φ̃_∞)_e − φ̃) against C = C₁ + C₂ + log 2 on doubled unit boxes over the s-grid.
VerificationReport minimal_singularity_gap(const ModelBundlePair& pair, const FiberedWeight& fw,
                                           const GapOptions& options = {});

}  // namespace envlab

#pragma once

#include <complex>
#include <cstdint>
#include <map>
#include <random>
#include <vector>

#include "envlab/charts.hpp"
#include "envlab/family.hpp"
#include "envlab/report.hpp"
#include "envlab/sampled_weight.hpp"

namespace envlab {

/// Section of the degree-m·d model bundle over the base: Σ_k c_k x^k.
struct ToricSection {
  int m = 1;
  std::map<int, std::complex<double>> coefficients;

  void validate(int d) const;
  /// (1/m) log|f|² at x = e^{s/2 + iθ}, without the metric.
  double log_modulus(double s, double theta) const;
};

/// ψ₁ = max_k ((k/m)s − u*(k/m)) over k = 0..m·d: monomials normalized in sup norm.
SampledWeight psi1_approximant(const SampledWeight& w, int d, int m);

/// ψ₂ = max_k ((k/m)s − (1/m) log ∫ e^{ks − m·u(s)} dμ(s)): monomials normalized in L²(μ).
SampledWeight psi2_approximant(const SampledWeight& w, int d, int m,
                               const BaseMeasure& mu = BaseMeasure::fubini_study());

/// (1/m) log ∫ e^{ks − m·u(s)} dμ(s) for one monomial, computed relative to its peak.
double log_monomial_norm(const SampledWeight& w, int k, int m, const BaseMeasure& mu);

struct ComparisonConstants {
  double c1 = 0.0;  // largest oscillation of u over a box
  double c2 = 0.0;  // log max of 1/ρ over the boxes
  double total = 0.0;
};

/// Throws InvalidCoverError unless the boxes cover the grid of w.
ComparisonConstants comparison_constants(const SampledWeight& w, const std::vector<ChartBox>& boxes,
                                         const BaseMeasure& mu = BaseMeasure::fubini_study());

/// ψ₂ − C′ ≤ ψ₁ ≤ u_e on the grid; for d ≥ 1 also records sup(u_e − ψ₂) and sup|u_e − ψ₂|.
VerificationReport check_sandwich(const SampledWeight& w, int d, int m, const ComparisonConstants& cc,
                                  const BaseMeasure& mu = BaseMeasure::fubini_study(), double tol = 1e-9);

/// check_sandwich for each m on doubled unit boxes; for d ≥ 1 the gap sup|u_e − ψ₂|
/// must strictly decrease along ms.
VerificationReport sandwich_suite(const SampledWeight& w, int d, const std::vector<int>& ms,
                                  const BaseMeasure& mu = BaseMeasure::fubini_study(), double tol = 1e-9);

struct SectionTerm {
  int l = 0;  // fiber exponent
  int k = 0;  // base exponent
  std::complex<double> c;
};

/// F(z, x) = Σ c z^l x^k on the total space, a section of the m-th power.
struct TotalSpaceSection {
  int m = 1;
  std::vector<SectionTerm> terms;

  /// 0 ≤ l ≤ m, 0 ≤ k ≤ l·d_A + (m−l)·d_L, at least one nonzero coefficient.
  void validate(const ModelBundlePair& pair) const;
};

/// Radial moments J(n_r, n_s) = ∫∫ r^{n_r} e^{n_s s/2} e^{−m φ̃_∞} dV over the total
/// space, on a fixed tensor rule in (r, s); r is scaled per s by √(b/a).
class TotalSpaceQuadrature {
 public:
  TotalSpaceQuadrature(const ModelBundlePair& pair, int m,
                       const BaseMeasure& mu = BaseMeasure::fubini_study());

  int m() const { return m_; }
  double moment(int n_r, int n_s);
  const ModelBundlePair& pair() const { return pair_; }
  const BaseMeasure& measure() const { return mu_; }

 private:
  ModelBundlePair pair_;
  int m_;
  BaseMeasure mu_;
  std::vector<double> log_r_;       // per node: log r
  std::vector<double> s_;           // per node: s
  std::vector<double> log_weight_;  // per node: log of (quadrature weight · e^{−mφ̃_∞} · density)
  std::map<std::pair<int, int>, double> cache_;
};

/// Each ∫|z^l f_l|² e^{−mφ̃_∞} dV is at most ∫|F|² e^{−mφ̃_∞} dV, and the terms sum to
/// the total. The angular averages use discrete rules, and both sides use the same radial moments.
VerificationReport coefficient_inequality(const TotalSpaceSection& F, TotalSpaceQuadrature& quad,
                                          double tol = 1e-8);
VerificationReport coefficient_inequality(const TotalSpaceSection& F, const ModelBundlePair& pair, int m,
                                          double tol = 1e-8);

/// Random section with 1..max_terms terms, coefficients with standard normal parts.
TotalSpaceSection random_total_space_section(std::mt19937_64& rng, const ModelBundlePair& pair, int m,
                                             int max_terms = 6);

}  // namespace envlab

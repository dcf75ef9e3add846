#include "envlab/gamma.hpp"

#include <array>
#include <cmath>

#include "envlab/errors.hpp"

namespace envlab {

namespace {

constexpr double kG = 7.0;
constexpr std::array<double, 9> kCoef = {
    0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
    771.32342877765313,   -176.61502916214059,   12.507343278686905,
    -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};

double lanczos(double x) {
  // Γ(x) for x ≥ 1/2.
  x -= 1.0;
  double a = kCoef[0];
  const double t = x + kG + 0.5;
  for (std::size_t i = 1; i < kCoef.size(); ++i) a += kCoef[i] / (x + static_cast<double>(i));
  return std::sqrt(2.0 * M_PI) * std::pow(t, x + 0.5) * std::exp(-t) * a;
}

}  // namespace

double gamma(double x) {
  if (!(x > 0.0)) throw DomainError("gamma is only defined here for positive arguments");
  if (x < 0.5) return M_PI / (std::sin(M_PI * x) * lanczos(1.0 - x));
  return lanczos(x);
}

double gamma_product(double t) { return gamma(1.0 + t) * gamma(2.0 - t); }

double beta(double x, double y) { return gamma(x) * gamma(y) / gamma(x + y); }

}  // namespace envlab

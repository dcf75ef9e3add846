#include "envlab/charts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "envlab/errors.hpp"

namespace envlab {

BaseMeasure BaseMeasure::fubini_study() {
  return {"fubini-study", [](double s) {
            const double c = std::exp(0.5 * s) + std::exp(-0.5 * s);
            return 1.0 / (c * c);
          }};
}

BaseMeasure BaseMeasure::gaussian(double sigma) {
  if (!(sigma > 0.0)) throw InvalidParameterError("gaussian width must be positive");
  return {"gaussian", [sigma](double s) {
            return std::exp(-0.5 * s * s / (sigma * sigma)) / (sigma * std::sqrt(2.0 * M_PI));
          }};
}

std::vector<ChartBox> unit_cover(double lo, double hi) {
  if (!(lo <= hi)) throw InvalidParameterError("cover bounds out of order");
  std::vector<ChartBox> out;
  const auto n = static_cast<long>(std::ceil((hi - lo) / 0.5));
  for (long i = 0; i <= n; ++i) {
    const double c = lo + 0.5 * static_cast<double>(i);
    out.push_back({c - 0.5, c + 0.5});
  }
  return out;
}

std::vector<ChartBox> doubled(const std::vector<ChartBox>& boxes) {
  std::vector<ChartBox> out;
  out.reserve(boxes.size());
  for (const auto& b : boxes) {
    const double c = 0.5 * (b.lo + b.hi);
    const double r = b.hi - b.lo;
    out.push_back({c - r, c + r});
  }
  return out;
}

void require_cover(const std::vector<ChartBox>& boxes, double lo, double hi) {
  std::vector<ChartBox> sorted = boxes;
  std::sort(sorted.begin(), sorted.end(), [](const ChartBox& a, const ChartBox& b) { return a.lo < b.lo; });
  double reach = lo;
  for (const auto& b : sorted) {
    if (b.lo > b.hi) throw InvalidCoverError("chart box with lo > hi");
    if (b.lo > reach) break;
    reach = std::max(reach, b.hi);
  }
  if (reach < hi) throw InvalidCoverError("chart boxes leave part of the grid uncovered");
}

std::vector<double> box_samples(const ChartBox& box, const std::vector<double>& grid) {
  std::vector<double> out{box.lo};
  auto first = std::upper_bound(grid.begin(), grid.end(), box.lo);
  for (auto it = first; it != grid.end() && *it < box.hi; ++it) out.push_back(*it);
  out.push_back(box.hi);
  return out;
}

double log_max_density_ratio(const BaseMeasure& mu, const std::vector<ChartBox>& boxes,
                             const std::vector<double>& grid) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& b : boxes)
    for (double s : box_samples(b, grid)) worst = std::max(worst, -std::log(mu.density(s)));
  return worst;
}

}  // namespace envlab

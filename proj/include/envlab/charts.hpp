#pragma once

#include <functional>
#include <string>
#include <vector>

namespace envlab {

/// Probability density on the s-line, the circle-average of a base volume form.
struct BaseMeasure {
  std::string name;
  std::function<double(double)> density;

  /// ρ(s) = e^s/(1+e^s)² = (e^{s/2}+e^{−s/2})^{−2}.
  static BaseMeasure fubini_study();
  static BaseMeasure gaussian(double sigma = 1.0);
};

/// Closed interval [lo, hi] of the s-line used as a coordinate chart.
struct ChartBox {
  double lo = 0.0;
  double hi = 0.0;
};

/// Unit boxes [c − 1/2, c + 1/2] with centres every 1/2 from lo to hi.
std::vector<ChartBox> unit_cover(double lo, double hi);

/// Each box doubled about its centre.
std::vector<ChartBox> doubled(const std::vector<ChartBox>& boxes);

/// Throws InvalidCoverError unless the union of the boxes contains [lo, hi].
void require_cover(const std::vector<ChartBox>& boxes, double lo, double hi);

/// Sample points of a box: its endpoints and every grid point inside.
std::vector<double> box_samples(const ChartBox& box, const std::vector<double>& grid);

/// log of the largest ratio between the flat density 1 and the measure's density over the boxes.
double log_max_density_ratio(const BaseMeasure& mu, const std::vector<ChartBox>& boxes,
                             const std::vector<double>& grid);

}  // namespace envlab

#pragma once

// Convergence orders across grid refinements.

#include <optional>
#include <string>
#include <vector>

namespace dbarlab {

/// Least-squares slope of log y against log x over the pairs with x, y > 0.
/// NaN when fewer than two such pairs remain.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

struct MetricSeries {
  std::string name;
  std::vector<double> values;  // one per level
};

struct MetricSlope {
  std::string name;
  std::optional<double> slope;  // empty when exact or when too few positive values
  bool exact = false;           // zero at every level
};

struct RefinementStudy {
  std::vector<double> h;
  std::vector<MetricSlope> slopes;
};

/// Needs at least 3 levels with h strictly decreasing (ConfigError otherwise).
RefinementStudy refinement_study(const std::vector<double>& h, const std::vector<MetricSeries>& metrics);

}  // namespace dbarlab

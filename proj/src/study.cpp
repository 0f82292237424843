#include "dbarlab/study.hpp"

#include <cmath>
#include <limits>

#include "dbarlab/error.hpp"

namespace dbarlab {

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < std::min(x.size(), y.size()); ++k)
    if (x[k] > 0.0 && y[k] > 0.0 && std::isfinite(x[k]) && std::isfinite(y[k])) {
      lx.push_back(std::log(x[k]));
      ly.push_back(std::log(y[k]));
    }
  if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  const double n = static_cast<double>(lx.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    mx += lx[k];
    my += ly[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxy += (lx[k] - mx) * (ly[k] - my);
    sxx += (lx[k] - mx) * (lx[k] - mx);
  }
  if (sxx == 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sxy / sxx;
}

RefinementStudy refinement_study(const std::vector<double>& h, const std::vector<MetricSeries>& metrics) {
  if (h.size() < 3) throw ConfigError("a refinement study needs at least 3 levels, got " + std::to_string(h.size()));
  for (std::size_t k = 0; k < h.size(); ++k) {
    if (!(h[k] > 0.0)) throw ConfigError("grid spacings must be positive");
    if (k > 0 && !(h[k] < h[k - 1])) throw ConfigError("grid spacings must be strictly decreasing");
  }
  RefinementStudy out;
  out.h = h;
  for (const auto& m : metrics) {
    if (m.values.size() != h.size())
      throw ConfigError("metric '" + m.name + "' has " + std::to_string(m.values.size()) + " values for " +
                        std::to_string(h.size()) + " levels");
    MetricSlope s;
    s.name = m.name;
    bool all_zero = true;
    for (double v : m.values) all_zero = all_zero && v == 0.0;
    if (all_zero) {
      s.exact = true;
    } else {
      const double slope = loglog_slope(h, m.values);
      if (std::isfinite(slope)) s.slope = slope;
    }
    out.slopes.push_back(s);
  }
  return out;
}

}  // namespace dbarlab

#pragma once

// Interior path lengths near boundary points, boundary Taylor remainders,
// and the disk-chain difference quotients.

#include <optional>
#include <string>
#include <vector>

#include "dbarlab/expr.hpp"
#include "dbarlab/field.hpp"

namespace dbarlab {

struct PathResult {
  cplx z, z0;
  std::vector<std::size_t> nodes;  // Interior nodes from z's node to the landing node
  double length = 0.0;             // |z - first| + graph length + |last - z0|
  double ratio = 0.0;              // length / |z - z0|
};

/// Shortest path on the 8-connected Interior graph with Euclidean edge
/// weights; ties broken by node index. z must map to an Interior node. z0
/// may be Interior or a boundary point, in which case the path lands on the
/// nearest Interior node within 3 cells and hops to z0. Throws
/// NumericalError "disconnected at this resolution" when no path exists.
PathResult interior_shortest_path(const RegionMask& mask, cplx z, cplx z0);

enum class LVerdict { Bounded, Growing, Inconclusive };
const char* to_string(LVerdict v);

struct LScale {
  double r = 0.0;
  std::size_t samples = 0;   // circle points whose node is Interior
  double max_ratio = 0.0;    // NaN when the scale was skipped
  std::string note;
};

struct LProbeReport {
  cplx z0;
  double h = 0.0;
  double landing = 0.5;
  std::vector<LScale> scales;
  LVerdict verdict = LVerdict::Inconclusive;
};

/// For each scale r, samples z on K° with |z - z0| = r and bounds the length
/// of any interior path from z to z0 from below by
///   (graph distance from z to the landing ball B(z0, landing*r)) + landing*r.
/// Bounded: max/min ratio <= 1.2 over scales. Growing: ratio rises by >= 1.5x
/// at every step to a smaller scale. Throws NumericalError when the landing
/// ball is unreachable from a sample (no interior path to z0).
LProbeReport l_probe(const CompactDomain& domain, cplx z0, std::vector<double> scales, int samples_per_scale,
                     double h, double landing = 0.5);
LProbeReport l_probe(const MaskPtr& mask, cplx z0, std::vector<double> scales, int samples_per_scale,
                     double landing = 0.5);

struct TaylorRemainder {
  int j = 0;
  std::vector<double> radii;
  std::vector<double> max_abs;  // max |R_m^(j)| over the arc of each radius
  double slope = 0.0;
  bool exact = false;  // remainder vanishes to rounding at every radius
  bool pass = false;   // exact or slope >= (m - j) - 0.2
};

struct TaylorReport {
  cplx z0;
  int m = 0;
  std::vector<cplx> derivatives;  // extensions of f^(k) at z0, k = 0..m
  std::vector<TaylorRemainder> remainders;
  std::optional<double> quotient_slope;  // |f'(z0) - (f(z) - f(z0))/(z - z0)| decay, m >= 1
  bool pass = false;
};

/// R_m^(j)(z) = f^(j)(z) - sum_{k=j}^m f^(k)(z0) (z - z0)^(k-j)/(k-j)! sampled on
/// arcs z0 + r e^{i theta} inside K, r = rho 2^-k for k < levels. Values of
/// f^(k) at z0 are evaluated when defined and otherwise taken as the limit
/// along an inward ray; a divergent limit raises PreconditionError.
TaylorReport taylor_remainder_fit(const Expr& f, cplx z0, int m, const CompactDomain& domain, double rho = 0.2,
                                  int levels = 8, int angles = 64);

struct ChainQuotient {
  int n = 0;
  double quotient = 0.0;       // (f(1/n) - f(0)) / (1/n - 0)
  double sqrt_n = 0.0;
  double interior_derivative = 0.0;  // |f'| on D_n (symbolic, locally constant)
};

/// f = 1/sqrt(n) on D_n and 0 on the big disk; rows n = 3..count+2.
/// Throws ConfigError for count < 3.
std::vector<ChainQuotient> disk_chain_quotient_demo(int count);

}  // namespace dbarlab

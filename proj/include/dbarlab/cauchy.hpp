#pragma once

// Pompeiu transform u(z) = -(1/pi) \iint_K f(w)/(w - z) dA(w) on a grid and
// the discrete dbar operator.

#include <vector>

#include "dbarlab/field.hpp"

namespace dbarlab {

struct QuadratureConfig {
  enum class CellRule { Midpoint, ExactKernel };
  /// Cells whose center lies within near_radius_cells * h of the target use
  /// the cell rule below; the rest use the midpoint rule.
  int near_radius_cells = 3;
  CellRule cell_rule = CellRule::ExactKernel;
  /// Verification keeps Interior nodes at least max(3 cells, shrink_distance)
  /// away from the Boundary nodes.
  double shrink_distance = 1.0 / 16.0;

  void validate() const;
};

/// \iint over the square of side h centered at c of dA(w) / (w - z).
/// Finite for every z, including z inside the square.
cplx cell_kernel_integral(cplx c, double h, cplx z);

/// Direct quadrature at arbitrary targets; O(#targets * #Inside).
std::vector<cplx> pompeiu(const SampledField& f, const std::vector<cplx>& targets,
                          const QuadratureConfig& cfg = {});

/// The same discrete operator evaluated at every Inside node of f's mask.
/// The sum over sources is a correlation with a translation-invariant
/// weight table and is computed by zero-padded FFT.
SampledField pompeiu_grid(const SampledField& f, const QuadratureConfig& cfg = {});

/// Central-difference dbar at the Interior nodes; the result lives on the
/// mask whose Inside set is f's Interior set.
SampledField dbar_fd(const SampledField& f);

/// Interior nodes at chessboard distance >= max(3, ceil(shrink_distance/h))
/// from every Boundary node.
std::vector<bool> shrunk_interior(const RegionMask& mask, double shrink_distance);

struct DbarCheck {
  double h = 0.0;
  double max_deviation = 0.0;  // max |dbar_fd(u) - f| on shrunk nodes
  std::size_t nodes = 0;
};

/// u = pompeiu_grid(f), then compares dbar_fd(u) with f on the shrunk set.
DbarCheck verify_dbar_solution(const SampledField& f, const QuadratureConfig& cfg = {});

}  // namespace dbarlab

#pragma once

// Koszul correction u = w x - f H with dbar H = w F, F antisymmetric.

#include <optional>
#include <vector>

#include "dbarlab/bezout.hpp"
#include "dbarlab/cauchy.hpp"

namespace dbarlab {

/// n x n antisymmetric matrix of fields; only j < k is stored.
struct AntisymMatrixField {
  std::size_t n = 0;
  MaskPtr mask;
  std::vector<SampledField> upper;  // row-major over j < k

  static AntisymMatrixField zeros(std::size_t n, const MaskPtr& mask);
  std::size_t slot(std::size_t j, std::size_t k) const;  // requires j < k
  SampledField& entry(std::size_t j, std::size_t k) { return upper[slot(j, k)]; }
  const SampledField& entry(std::size_t j, std::size_t k) const { return upper[slot(j, k)]; }
  /// H_jk at a node, with H_kj = -H_jk and H_jj = 0.
  cplx at(std::size_t j, std::size_t k, std::size_t node) const;
};

/// F_jk = (dbar x_k conj f_j - dbar x_j conj f_k) / |f|^2 as expressions (j < k,
/// row-major like AntisymMatrixField::upper).
std::vector<Expr> koszul_F_expr(const std::vector<Expr>& x, const std::vector<Expr>& f);

/// Samples w F on the Inside nodes. Without a weight, |f| = 0 at a node is a
/// PreconditionError. With a weight, nodes where sum |f_j| <= 1e-8 max take
/// the value 0 (the weighted entries are bounded and tend to 0 there).
AntisymMatrixField koszul_F(const std::vector<Expr>& x, const std::vector<Expr>& f,
                            const MaskPtr& mask, const std::optional<Expr>& weight = std::nullopt);

/// Field-only x: dbar x from dbar_fd, so F lives on the Interior nodes and is
/// zero on the Boundary ones.
AntisymMatrixField koszul_F(const std::vector<SampledField>& x,
                            const std::vector<SampledField>& f);

struct MatrixSolve {
  AntisymMatrixField H;
  std::vector<DbarCheck> checks;  // per stored entry: |dbar_fd(H_jk) - F_jk|
};

MatrixSolve solve_dbar_matrix(const AntisymMatrixField& F, const QuadratureConfig& cfg = {});

struct CoronaSolution {
  std::vector<SampledField> u;
  double residual_sup = 0.0;    // max Inside |sum u_j f_j - target|
  double dbar_sup = 0.0;        // max shrunk-interior |dbar_fd(u_j)|
  double dbar_sup_start = 0.0;  // same for the uncorrected w x_j
  double h = 0.0;
  std::vector<DbarCheck> entry_checks;
};

/// Target 1; x from the polynomial Bezout route.
CoronaSolution corona_solve(const BezoutProblem& problem, const QuadratureConfig& cfg = {},
                            int max_degree = 16);

/// sum x_j f_j = g. Target g^5, or g^6 (v = g u zero-extended on the small
/// set of sum |f_j|) when the zeros of f are not known to be isolated.
CoronaSolution g_power_solve(const Expr& g, const std::vector<Expr>& f, const std::vector<Expr>& x,
                             bool isolated_zeros, const MaskPtr& mask, const QuadratureConfig& cfg = {});

/// Requires |sum h_j f_j| >= sum |f_j|^2 and |g| <= sum |f_j| on the nodes.
/// k = g^8 / sum h_j f_j, x_j = k h_j, then the g^4-weighted correction.
/// Target g^12.
CoronaSolution g12_solve(const Expr& g, const std::vector<Expr>& f, const std::vector<Expr>& h_list,
                         const MaskPtr& mask, const QuadratureConfig& cfg = {});

}  // namespace dbarlab

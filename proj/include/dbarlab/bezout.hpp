#pragma once

// Smooth solutions of sum_j x_j f_j = 1 on a compact set: the polynomial
// route (fit p_j to q_j = conj(f_j)/|f|^2) and the partition-of-unity route.

#include <string>
#include <utility>
#include <vector>

#include "dbarlab/field.hpp"

namespace dbarlab {

struct BezoutProblem {
  CompactDomain domain;
  MaskPtr mask;
  std::vector<Expr> f;
  std::vector<SampledField> f_samples;
  double delta = 0.0;  // min over Inside nodes of sum_j |f_j|

  static BezoutProblem make(const CompactDomain& domain, std::vector<Expr> f, double h);
  static BezoutProblem make(const CompactDomain& domain, const MaskPtr& mask, std::vector<Expr> f);
  std::size_t n() const { return f.size(); }
  /// sum_j ||f_j||_inf over the Inside nodes.
  double sup_norm_sum() const;
};

/// q_j = conj(f_j) / sum_k |f_k|^2. Throws PreconditionError listing nodes
/// where sum_k |f_k| = 0.
std::vector<SampledField> q_fields(const BezoutProblem& problem);

/// Polynomial in z and conj(z) in the scaled variable w = (z - center)/scale:
/// p(z) = sum c_{a,b} w^a conj(w)^b over a + b <= degree.
struct PolyZZbar {
  int degree = 0;
  cplx center;
  double scale = 1.0;
  std::vector<std::pair<int, int>> monomials;
  std::vector<cplx> coeffs;

  cplx eval(cplx z) const;
  Expr to_expr() const;
};

struct FitResult {
  PolyZZbar poly;
  double sup_error = 0.0;  // max over Inside nodes of |p - q|
  bool met = false;        // sup_error <= target
  std::size_t fit_rows = 0;
};

/// Least-squares fit over the monomials w^a conj(w)^b, a + b <= d. Rows are
/// the Inside nodes, thinned to a regular sub-lattice of at most `max_rows`
/// nodes; the sup error is measured on every Inside node.
FitResult weierstrass_fit(const SampledField& q, int degree, double target_sup,
                          std::size_t max_rows = 5000);

struct PolyBezout {
  std::vector<Expr> x;        // x_j = p_j / sum_k p_k f_k
  std::vector<FitResult> fits;
  double tolerance = 0.0;     // (2 sum ||f_j||)^-1
  double min_denominator = 0.0;  // min over nodes of |sum_k p_k f_k|
  double residual = 0.0;         // max over nodes of |sum x_j f_j - 1|
};

/// Raises the degree per j until the fit meets the tolerance.
PolyBezout bezout_poly(const BezoutProblem& problem, int max_degree = 16);

/// C^2 quintic smoothstep: 0 on (-inf, 1/3], 1 on [2/3, inf).
double smoothstep(double t);

/// alpha_j = beta_j / sum_k beta_k with beta_j = eta(|f_j|/epsilon).
/// epsilon <= 0 selects delta/(2n).
std::vector<SampledField> partition_of_unity(const BezoutProblem& problem, double epsilon = 0.0);

struct PouBezout {
  std::vector<SampledField> alpha;
  std::vector<SampledField> x;  // alpha_j / f_j, zero off supp alpha_j
  double epsilon = 0.0;
  double residual = 0.0;
};

PouBezout bezout_pou(const BezoutProblem& problem, double epsilon = 0.0);

struct GeneralizedDivision {
  std::vector<SampledField> g;
  double residual = 0.0;        // max |sum g_j f_j - f|
  std::size_t small_nodes = 0;  // nodes with sum |f_j| <= epsilon
};

/// g_j = f alpha_j / f_j off the uncovered set {sum beta = 0}, 0 on it.
/// Requires |f| <= 1e-12 on every node within vanish_radius of the small set
/// {sum |f_j| <= epsilon}.
GeneralizedDivision generalized_division(const Expr& f, const BezoutProblem& problem,
                                         double vanish_radius, double epsilon);

/// Up to `limit` node coordinates "(x, y)" for an error message.
std::string describe_nodes(const GridSpec& g, const std::vector<std::size_t>& nodes,
                           std::size_t limit = 5);

}  // namespace dbarlab

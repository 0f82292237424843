#pragma once

// Higher-order chain rule over ordered multi-indices, with a truncated
// Taylor arithmetic used as an independent check.

#include <cstdint>
#include <vector>

#include "dbarlab/expr.hpp"

namespace dbarlab {

/// Non-increasing tuple of positive integers (an integer partition).
using MultiIndex = std::vector<int>;

/// All partitions of n, each non-increasing, in descending lexicographic order.
std::vector<MultiIndex> enumerate_partitions(int n);

constexpr int kMaxFaaOrder = 20;  // n! must fit in 64 bits

/// n! / (k_1! ... k_j! * prod_i n(k, i)!), n(k, i) = multiplicity of i in k.
std::uint64_t faa_coefficient(int n, const MultiIndex& k);

struct CoefficientRow {
  MultiIndex k;
  std::uint64_t coefficient = 0;
};
std::vector<CoefficientRow> coefficient_table(int n);

/// (f o g)^(n)(x) from f_derivs[j-1] = f^(j)(g(x)) and g_derivs[i-1] = g^(i)(x).
cplx compose_derivative(const std::vector<cplx>& f_derivs, const std::vector<cplx>& g_derivs, int n);

/// Same sum with |.| on every factor; the scale for relative comparisons.
double compose_magnitude(const std::vector<cplx>& f_derivs, const std::vector<cplx>& g_derivs, int n);

/// Truncated power series c_0 + c_1 t + ... + c_n t^n.
using Jet = std::vector<cplx>;

/// Taylor coefficients of e(w(t)) given the jet of w. Holomorphic operations
/// only: zbar and conj raise PreconditionError, poles raise PoleError.
Jet expr_jet(const Expr& e, const Jet& w);

/// e^(1..n)(x) read off the jet at x.
std::vector<cplx> jet_derivatives(const Expr& e, cplx x, int n);

/// (f o g)^(n)(x) by composing truncated series; n = 0 gives f(g(x)).
cplx taylor_oracle(const Expr& f, const Expr& g, cplx x, int n);

struct FaaVerifyReport {
  int max_order = 0;
  int samples = 0;
  double worst_relative = 0.0;  // |formula - oracle| / compose_magnitude
  int worst_order = 0;
};

/// Random (f, g, x, n) from a family with singularities far from the
/// evaluation points; derivative lists come from closed forms per family.
FaaVerifyReport faa_verify(int max_order, int samples, unsigned seed);

}  // namespace dbarlab

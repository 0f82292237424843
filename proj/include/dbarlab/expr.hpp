#pragma once

// Expression trees over z and conj(z) with exact Wirtinger derivatives.

#include <array>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dbarlab/error.hpp"

namespace dbarlab {

class Expr {
 public:
  enum class Op {
    Const,
    Z,
    ZBar,
    Add,
    Mul,
    Div,
    Neg,
    Pow,     // integer exponent
    Exp,
    Log,     // principal branch, cut along (-inf, 0]
    Conj,
    Mobius,  // (a w + b) / (c w + d)
    AtomicInner,       // S(w) = exp(-(1+w)/(1-w))
    SectorCornerConj,  // conj(C_n) on the sector S_n of sector_chain; locally constant
  };

  Expr();  // constant 0
  Expr(cplx c);
  Expr(double c) : Expr(cplx(c, 0.0)) {}
  Expr(int c) : Expr(cplx(c, 0.0)) {}

  static Expr z();
  static Expr zbar();
  static Expr mobius(cplx a, cplx b, cplx c, cplx d, const Expr& w);
  static Expr atomic_inner(const Expr& w);
  static Expr atomic_inner() { return atomic_inner(z()); }
  static Expr sector_corner_conj();

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr pow(const Expr& a, int n);
  friend Expr exp(const Expr& a);
  friend Expr log(const Expr& a);
  friend Expr conj(const Expr& a);

  Op op() const;
  bool is_const() const { return op() == Op::Const; }
  cplx const_value() const;  // valid for Const
  int power() const;         // valid for Pow
  const std::array<cplx, 4>& mobius_coeffs() const;
  std::size_t arity() const;
  const Expr& arg(std::size_t k) const;

  /// Recursive evaluation; throws PoleError on a declared pole.
  cplx eval(cplx z) const;
  Expr d() const;
  Expr dbar() const;
  /// Number of distinct nodes in the DAG.
  std::size_t node_count() const;
  /// True if the tree contains no conj(z) and no Conj node (syntactically holomorphic).
  bool holomorphic() const;
  /// Prefix text accepted by parse_expr.
  std::string str() const;

  const void* id() const { return node_.get(); }

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  static Expr make(Op op, std::vector<Expr> args, cplx c = {}, int n = 0,
                   std::array<cplx, 4> m = {});
  std::shared_ptr<const Node> node_;
  friend class CompiledExpr;
};

inline Expr sqrt(const Expr& a) { return exp(Expr(0.5) * log(a)); }
inline Expr abs2(const Expr& a) { return a * conj(a); }

/// Flattened DAG for fast repeated evaluation at many points.
class CompiledExpr {
 public:
  explicit CompiledExpr(const Expr& e);
  cplx operator()(cplx z) const;
  /// Like operator() but returns nullopt instead of throwing on a pole.
  std::optional<cplx> try_eval(cplx z) const;

 private:
  struct Instr {
    Expr::Op op;
    int a = -1, b = -1;
    int n = 0;
    cplx c;
    std::array<cplx, 4> m{};
    const Expr* src = nullptr;
  };
  bool run(cplx z, cplx& out, std::size_t& fault) const;
  std::vector<Expr> keep_;
  std::vector<Instr> tape_;
  mutable std::vector<cplx> scratch_;
};

/// Prefix syntax: add(a,b,...), sub(a,b), mul(a,b,...), div(a,b), neg(a),
/// pow(a,n), exp(a), log(a), sqrt(a), conj(a), abs2(a), S or S(a),
/// mobius(a,b,c,d,w), corner_conj, c(re,im), z, zbar, i, pi, numbers.
Expr parse_expr(const std::string& text);
/// Semicolon-separated list of expressions.
std::vector<Expr> parse_expr_list(const std::string& text);

struct DirectionalProbe {
  std::vector<cplx> directions;
  std::vector<double> radii;
  /// samples[k][r]; nullopt where the probe point is a pole or undefined.
  std::vector<std::vector<std::optional<cplx>>> samples;
  std::vector<std::optional<cplx>> tails;
  std::vector<double> tail_spread;  // internal spread of each direction's tail
  std::vector<std::string> notes;
  bool limits_disagree = false;
};

/// Samples expr at z0 + r*d for each direction d and radius r. The tail of
/// a direction is its value at the smallest defined radius; its spread is
/// the max deviation from it over the last three defined radii.
DirectionalProbe directional_limit_probe(const Expr& expr, cplx z0,
                                         const std::vector<cplx>& directions,
                                         const std::vector<double>& radii,
                                         double tolerance = 0.1);

}  // namespace dbarlab

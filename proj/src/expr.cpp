#include "dbarlab/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <unordered_map>
#include <unordered_set>

#include "dbarlab/domain.hpp"

namespace dbarlab {

struct Expr::Node {
  Op op;
  std::vector<Expr> args;
  cplx c;
  int n = 0;
  std::array<cplx, 4> m{};
  bool holo = true;
};

namespace {

// Textbook product; std::complex's operator* goes through the Annex G
// inf/nan recovery path, which dominates tape evaluation time.
inline cplx mul(cplx a, cplx b) {
  return {a.real() * b.real() - a.imag() * b.imag(), a.real() * b.imag() + a.imag() * b.real()};
}

cplx ipow(cplx base, int n) {
  if (n < 0) return cplx(1.0, 0.0) / ipow(base, -n);
  cplx result(1.0, 0.0);
  while (n) {
    if (n & 1) result = mul(result, base);
    base = mul(base, base);
    n >>= 1;
  }
  return result;
}

std::string fmt_real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt_cplx(cplx c) {
  if (c.imag() == 0.0) return fmt_real(c.real());
  return "c(" + fmt_real(c.real()) + "," + fmt_real(c.imag()) + ")";
}

// Value of one node from its children's values; returns false on a pole.
bool apply(Expr::Op op, const cplx* v, cplx c, int n, const std::array<cplx, 4>& m, cplx z,
           cplx& out) {
  using Op = Expr::Op;
  switch (op) {
    case Op::Const: out = c; return true;
    case Op::Z: out = z; return true;
    case Op::ZBar: out = std::conj(z); return true;
    case Op::Add: out = v[0] + v[1]; return true;
    case Op::Mul: out = mul(v[0], v[1]); return true;
    case Op::Div:
      if (v[1] == cplx(0.0, 0.0)) return false;
      out = v[0] / v[1];
      return true;
    case Op::Neg: out = -v[0]; return true;
    case Op::Pow:
      if (n < 0 && v[0] == cplx(0.0, 0.0)) return false;
      out = ipow(v[0], n);
      return true;
    case Op::Exp: out = std::exp(v[0]); return true;
    case Op::Log:
      if (v[0] == cplx(0.0, 0.0)) return false;
      out = std::log(v[0]);
      return true;
    case Op::Conj: out = std::conj(v[0]); return true;
    case Op::Mobius: {
      const cplx den = m[2] * v[0] + m[3];
      if (den == cplx(0.0, 0.0)) return false;
      out = (m[0] * v[0] + m[1]) / den;
      return true;
    }
    case Op::AtomicInner:
      if (v[0] == cplx(1.0, 0.0)) return false;
      out = std::exp(-(1.0 + v[0]) / (1.0 - v[0]));
      return true;
    case Op::SectorCornerConj: {
      const auto k = sector_chain_index(z);
      if (!k) return false;
      out = std::conj(sector_chain_corner(*k));
      return true;
    }
  }
  return false;
}

}  // namespace

Expr Expr::make(Op op, std::vector<Expr> args, cplx c, int n, std::array<cplx, 4> m) {
  auto node = std::make_shared<Node>();
  node->op = op;
  node->c = c;
  node->n = n;
  node->m = m;
  node->holo = op != Op::ZBar && op != Op::Conj;
  for (const auto& a : args) node->holo = node->holo && a.node_->holo;
  bool all_const = op != Op::Const && op != Op::Z && op != Op::ZBar && op != Op::SectorCornerConj;
  for (const auto& a : args) all_const = all_const && a.is_const();
  if (all_const) {
    cplx v[2];
    for (std::size_t k = 0; k < args.size(); ++k) v[k] = args[k].const_value();
    cplx out;
    if (apply(op, v, c, n, m, cplx(), out) && std::isfinite(out.real()) &&
        std::isfinite(out.imag()))
      return Expr(out);
  }
  node->args = std::move(args);
  return Expr(std::shared_ptr<const Node>(std::move(node)));
}

Expr::Expr() : Expr(cplx(0.0, 0.0)) {}

Expr::Expr(cplx c) {
  auto node = std::make_shared<Node>();
  node->op = Op::Const;
  node->c = c;
  node_ = std::move(node);
}

Expr Expr::z() { return make(Op::Z, {}); }
Expr Expr::zbar() { return make(Op::ZBar, {}); }
Expr Expr::sector_corner_conj() { return make(Op::SectorCornerConj, {}); }

Expr Expr::mobius(cplx a, cplx b, cplx c, cplx d, const Expr& w) {
  if (a * d - b * c == cplx(0.0, 0.0)) throw ConfigError("degenerate Mobius map (ad - bc = 0)");
  return make(Op::Mobius, {w}, {}, 0, {a, b, c, d});
}

Expr Expr::atomic_inner(const Expr& w) { return make(Op::AtomicInner, {w}); }

Expr::Op Expr::op() const { return node_->op; }
cplx Expr::const_value() const { return node_->c; }
int Expr::power() const { return node_->n; }
const std::array<cplx, 4>& Expr::mobius_coeffs() const { return node_->m; }
std::size_t Expr::arity() const { return node_->args.size(); }
const Expr& Expr::arg(std::size_t k) const { return node_->args.at(k); }
bool Expr::holomorphic() const { return node_->holo; }

Expr operator+(const Expr& a, const Expr& b) {
  if (a.is_const() && a.const_value() == cplx(0.0, 0.0)) return b;
  if (b.is_const() && b.const_value() == cplx(0.0, 0.0)) return a;
  return Expr::make(Expr::Op::Add, {a, b});
}

Expr operator-(const Expr& a) {
  if (a.op() == Expr::Op::Neg) return a.arg(0);
  return Expr::make(Expr::Op::Neg, {a});
}

Expr operator-(const Expr& a, const Expr& b) { return a + (-b); }

Expr operator*(const Expr& a, const Expr& b) {
  for (const auto* p : {&a, &b}) {
    const Expr& other = p == &a ? b : a;
    if (!p->is_const()) continue;
    const cplx v = p->const_value();
    if (v == cplx(0.0, 0.0)) return Expr();
    if (v == cplx(1.0, 0.0)) return other;
    if (v == cplx(-1.0, 0.0)) return -other;
  }
  return Expr::make(Expr::Op::Mul, {a, b});
}

Expr operator/(const Expr& a, const Expr& b) {
  if (b.is_const() && b.const_value() == cplx(1.0, 0.0)) return a;
  if (a.is_const() && a.const_value() == cplx(0.0, 0.0) &&
      !(b.is_const() && b.const_value() == cplx(0.0, 0.0)))
    return Expr();
  return Expr::make(Expr::Op::Div, {a, b});
}

Expr pow(const Expr& a, int n) {
  if (n == 0) return Expr(1.0);
  if (n == 1) return a;
  if (a.op() == Expr::Op::Pow) return pow(a.arg(0), a.power() * n);
  return Expr::make(Expr::Op::Pow, {a}, {}, n);
}

Expr exp(const Expr& a) { return Expr::make(Expr::Op::Exp, {a}); }
Expr log(const Expr& a) { return Expr::make(Expr::Op::Log, {a}); }

Expr conj(const Expr& a) {
  switch (a.op()) {
    case Expr::Op::Const: return Expr(std::conj(a.const_value()));
    case Expr::Op::Z: return Expr::zbar();
    case Expr::Op::ZBar: return Expr::z();
    case Expr::Op::Conj: return a.arg(0);
    default: return Expr::make(Expr::Op::Conj, {a});
  }
}

cplx Expr::eval(cplx z) const {
  cplx v[2];
  for (std::size_t k = 0; k < node_->args.size(); ++k) v[k] = node_->args[k].eval(z);
  cplx out;
  if (!apply(node_->op, v, node_->c, node_->n, node_->m, z, out)) throw PoleError(str(), z);
  return out;
}

namespace {

Expr deriv(const Expr& e, bool bar, std::unordered_map<const void*, Expr>& memo) {
  if (auto it = memo.find(e.id()); it != memo.end()) return it->second;
  using Op = Expr::Op;
  auto D = [&](const Expr& x) { return deriv(x, bar, memo); };
  Expr r;
  switch (e.op()) {
    case Op::Const:
    case Op::SectorCornerConj: r = Expr(); break;
    case Op::Z: r = bar ? Expr() : Expr(1.0); break;
    case Op::ZBar: r = bar ? Expr(1.0) : Expr(); break;
    case Op::Add: r = D(e.arg(0)) + D(e.arg(1)); break;
    case Op::Mul: r = D(e.arg(0)) * e.arg(1) + e.arg(0) * D(e.arg(1)); break;
    case Op::Div: {
      const Expr& f = e.arg(0);
      const Expr& g = e.arg(1);
      r = (D(f) * g - f * D(g)) / pow(g, 2);
      break;
    }
    case Op::Neg: r = -D(e.arg(0)); break;
    case Op::Pow: r = Expr(e.power()) * pow(e.arg(0), e.power() - 1) * D(e.arg(0)); break;
    case Op::Exp: r = e * D(e.arg(0)); break;
    case Op::Log: r = D(e.arg(0)) / e.arg(0); break;
    case Op::Conj: {
      // d(conj f) = conj(dbar f), dbar(conj f) = conj(d f)
      std::unordered_map<const void*, Expr> other;
      r = conj(deriv(e.arg(0), !bar, other));
      break;
    }
    case Op::Mobius: {
      const auto& m = e.mobius_coeffs();
      const cplx det = m[0] * m[3] - m[1] * m[2];
      r = Expr(det) / pow(Expr(m[2]) * e.arg(0) + Expr(m[3]), 2) * D(e.arg(0));
      break;
    }
    case Op::AtomicInner: {
      // S'(w) = S(w) * (-2 / (1 - w)^2)
      r = e * (Expr(-2.0) / pow(Expr(1.0) - e.arg(0), 2)) * D(e.arg(0));
      break;
    }
  }
  memo.emplace(e.id(), r);
  return r;
}

}  // namespace

Expr Expr::d() const {
  std::unordered_map<const void*, Expr> memo;
  return deriv(*this, false, memo);
}

Expr Expr::dbar() const {
  std::unordered_map<const void*, Expr> memo;
  return deriv(*this, true, memo);
}

std::size_t Expr::node_count() const {
  std::unordered_set<const void*> seen;
  std::function<void(const Expr&)> walk = [&](const Expr& e) {
    if (!seen.insert(e.id()).second) return;
    for (std::size_t k = 0; k < e.arity(); ++k) walk(e.arg(k));
  };
  walk(*this);
  return seen.size();
}

std::string Expr::str() const {
  const auto& a = node_->args;
  switch (node_->op) {
    case Op::Const: return fmt_cplx(node_->c);
    case Op::Z: return "z";
    case Op::ZBar: return "zbar";
    case Op::Add: return "add(" + a[0].str() + "," + a[1].str() + ")";
    case Op::Mul: return "mul(" + a[0].str() + "," + a[1].str() + ")";
    case Op::Div: return "div(" + a[0].str() + "," + a[1].str() + ")";
    case Op::Neg: return "neg(" + a[0].str() + ")";
    case Op::Pow: return "pow(" + a[0].str() + "," + std::to_string(node_->n) + ")";
    case Op::Exp: return "exp(" + a[0].str() + ")";
    case Op::Log: return "log(" + a[0].str() + ")";
    case Op::Conj: return "conj(" + a[0].str() + ")";
    case Op::Mobius: {
      const auto& m = node_->m;
      return "mobius(" + fmt_cplx(m[0]) + "," + fmt_cplx(m[1]) + "," + fmt_cplx(m[2]) + "," +
             fmt_cplx(m[3]) + "," + a[0].str() + ")";
    }
    case Op::AtomicInner: return a[0].op() == Op::Z ? "S" : "S(" + a[0].str() + ")";
    case Op::SectorCornerConj: return "corner_conj";
  }
  return "?";
}

CompiledExpr::CompiledExpr(const Expr& e) {
  std::unordered_map<const void*, int> slot;
  std::function<int(const Expr&)> emit = [&](const Expr& x) -> int {
    if (auto it = slot.find(x.id()); it != slot.end()) return it->second;
    Instr ins;
    ins.op = x.op();
    if (x.arity() > 0) ins.a = emit(x.arg(0));
    if (x.arity() > 1) ins.b = emit(x.arg(1));
    if (x.op() == Expr::Op::Const) ins.c = x.const_value();
    if (x.op() == Expr::Op::Pow) ins.n = x.power();
    if (x.op() == Expr::Op::Mobius) ins.m = x.mobius_coeffs();
    const int idx = static_cast<int>(tape_.size());
    tape_.push_back(ins);
    keep_.push_back(x);
    slot.emplace(x.id(), idx);
    return idx;
  };
  emit(e);
  scratch_.resize(tape_.size());
}

bool CompiledExpr::run(cplx z, cplx& out, std::size_t& fault) const {
  for (std::size_t k = 0; k < tape_.size(); ++k) {
    const Instr& ins = tape_[k];
    cplx v[2];
    if (ins.a >= 0) v[0] = scratch_[static_cast<std::size_t>(ins.a)];
    if (ins.b >= 0) v[1] = scratch_[static_cast<std::size_t>(ins.b)];
    if (!apply(ins.op, v, ins.c, ins.n, ins.m, z, scratch_[k])) {
      fault = k;
      return false;
    }
  }
  out = scratch_.back();
  return true;
}

cplx CompiledExpr::operator()(cplx z) const {
  cplx out;
  std::size_t fault = 0;
  if (!run(z, out, fault)) throw PoleError(keep_[fault].str(), z);
  return out;
}

std::optional<cplx> CompiledExpr::try_eval(cplx z) const {
  cplx out;
  std::size_t fault = 0;
  if (!run(z, out, fault)) return std::nullopt;
  return out;
}

namespace {

class Parser {
 public:
  explicit Parser(const std::string& s) : s_(s) {}

  Expr parse_all() {
    Expr e = parse();
    skip_ws();
    if (pos_ != s_.size()) throw ParseError("unexpected trailing input", pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < s_.size() && s_[pos_] == c;
  }

  void expect(char c) {
    if (!peek(c)) throw ParseError(std::string("expected '") + c + "'", pos_);
    ++pos_;
  }

  std::vector<Expr> args(const std::string& name, std::size_t start, std::size_t lo,
                         std::size_t hi) {
    expect('(');
    std::vector<Expr> out;
    out.push_back(parse());
    while (peek(',')) {
      ++pos_;
      out.push_back(parse());
    }
    expect(')');
    if (out.size() < lo || out.size() > hi)
      throw ParseError(name + " takes " + std::to_string(lo) +
                           (hi == lo ? "" : hi > 64 ? "+" : ".." + std::to_string(hi)) +
                           " arguments, got " + std::to_string(out.size()),
                       start);
    return out;
  }

  cplx constant(const Expr& e, const std::string& name, std::size_t at) {
    if (!e.is_const()) throw ParseError(name + " needs a constant argument", at);
    return e.const_value();
  }

  Expr parse() {
    skip_ws();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
    const std::size_t start = pos_;
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.' || c == '-' || c == '+')
      return Expr(number());
    if (!std::isalpha(static_cast<unsigned char>(c)) && c != '_')
      throw ParseError(std::string("unexpected character '") + c + "'", pos_);
    std::string name;
    while (pos_ < s_.size() &&
           (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      name += s_[pos_++];
    constexpr std::size_t many = 1000;
    if (name == "z") return Expr::z();
    if (name == "zbar") return Expr::zbar();
    if (name == "i") return Expr(cplx(0.0, 1.0));
    if (name == "pi") return Expr(std::numbers::pi);
    if (name == "corner_conj") return Expr::sector_corner_conj();
    if (name == "S") {
      if (peek('(')) return Expr::atomic_inner(args(name, start, 1, 1)[0]);
      return Expr::atomic_inner();
    }
    if (name == "add") {
      auto a = args(name, start, 2, many);
      Expr r = a[0];
      for (std::size_t k = 1; k < a.size(); ++k) r = r + a[k];
      return r;
    }
    if (name == "mul") {
      auto a = args(name, start, 2, many);
      Expr r = a[0];
      for (std::size_t k = 1; k < a.size(); ++k) r = r * a[k];
      return r;
    }
    if (name == "sub") {
      auto a = args(name, start, 2, 2);
      return a[0] - a[1];
    }
    if (name == "div") {
      auto a = args(name, start, 2, 2);
      return a[0] / a[1];
    }
    if (name == "neg") return -args(name, start, 1, 1)[0];
    if (name == "exp") return exp(args(name, start, 1, 1)[0]);
    if (name == "log") return log(args(name, start, 1, 1)[0]);
    if (name == "sqrt") return sqrt(args(name, start, 1, 1)[0]);
    if (name == "conj") return conj(args(name, start, 1, 1)[0]);
    if (name == "abs2") return abs2(args(name, start, 1, 1)[0]);
    if (name == "pow") {
      const std::size_t at = pos_;
      auto a = args(name, start, 2, 2);
      const cplx n = constant(a[1], name, at);
      if (n.imag() != 0.0 || n.real() != std::round(n.real()) || std::abs(n.real()) > 1e6)
        throw ParseError("pow exponent must be an integer", at);
      return pow(a[0], static_cast<int>(n.real()));
    }
    if (name == "c") {
      const std::size_t at = pos_;
      auto a = args(name, start, 2, 2);
      const cplx re = constant(a[0], name, at);
      const cplx im = constant(a[1], name, at);
      return Expr(re + cplx(0.0, 1.0) * im);
    }
    if (name == "mobius") {
      const std::size_t at = pos_;
      auto a = args(name, start, 5, 5);
      return Expr::mobius(constant(a[0], name, at), constant(a[1], name, at),
                          constant(a[2], name, at), constant(a[3], name, at), a[4]);
    }
    throw ParseError("unknown function '" + name + "'", start);
  }

  double number() {
    const std::size_t start = pos_;
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    const double v = std::strtod(begin, &end);
    if (end == begin) throw ParseError("malformed number", start);
    pos_ += static_cast<std::size_t>(end - begin);
    return v;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

}  // namespace

Expr parse_expr(const std::string& text) { return Parser(text).parse_all(); }

std::vector<Expr> parse_expr_list(const std::string& text) {
  std::vector<Expr> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t semi = text.find(';', start);
    const std::string piece =
        text.substr(start, semi == std::string::npos ? std::string::npos : semi - start);
    if (piece.find_first_not_of(" \t") != std::string::npos) {
      try {
        out.push_back(parse_expr(piece));
      } catch (const ParseError& e) {
        std::string msg = e.what();
        msg = msg.substr(0, msg.rfind(" at position "));
        throw ParseError(msg + " in list item " + std::to_string(out.size() + 1), start + e.position());
      }
    }
    if (semi == std::string::npos) break;
    start = semi + 1;
  }
  if (out.empty()) throw ParseError("empty expression list", 0);
  return out;
}

DirectionalProbe directional_limit_probe(const Expr& expr, cplx z0,
                                         const std::vector<cplx>& directions,
                                         const std::vector<double>& radii, double tolerance) {
  DirectionalProbe p;
  p.directions = directions;
  p.radii = radii;
  const CompiledExpr f(expr);
  bool all_tight = true;
  for (std::size_t k = 0; k < directions.size(); ++k) {
    std::vector<std::optional<cplx>> row;
    for (double r : radii) {
      const cplx z = z0 + r * directions[k];
      auto v = f.try_eval(z);
      if (v && !(std::isfinite(v->real()) && std::isfinite(v->imag()))) v.reset();
      if (!v)
        p.notes.push_back("skipped pole/undefined point at direction " + std::to_string(k) +
                          ", r = " + fmt_real(r));
      row.push_back(v);
    }
    std::vector<cplx> defined;
    for (const auto& v : row)
      if (v) defined.push_back(*v);
    if (defined.empty()) {
      p.tails.push_back(std::nullopt);
      p.tail_spread.push_back(0.0);
      all_tight = false;
    } else {
      const cplx tail = defined.back();
      double spread = 0.0;
      const std::size_t first = defined.size() > 3 ? defined.size() - 3 : 0;
      for (std::size_t m = first; m < defined.size(); ++m)
        spread = std::max(spread, std::abs(defined[m] - tail));
      p.tails.push_back(tail);
      p.tail_spread.push_back(spread);
      all_tight = all_tight && spread < tolerance;
    }
    p.samples.push_back(std::move(row));
  }
  double gap = 0.0;
  for (std::size_t a = 0; a < p.tails.size(); ++a)
    for (std::size_t b = a + 1; b < p.tails.size(); ++b)
      if (p.tails[a] && p.tails[b]) gap = std::max(gap, std::abs(*p.tails[a] - *p.tails[b]));
  p.limits_disagree = all_tight && gap > tolerance;
  return p;
}

}  // namespace dbarlab

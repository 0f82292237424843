#include "dbarlab/faa.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <unordered_map>

namespace dbarlab {

namespace {

void check_order(int n) {
  if (n < 1) throw ConfigError("order must be >= 1, got " + std::to_string(n));
}

void partitions(int remaining, int max_part, MultiIndex& prefix, std::vector<MultiIndex>& out) {
  if (remaining == 0) {
    out.push_back(prefix);
    return;
  }
  for (int part = std::min(remaining, max_part); part >= 1; --part) {
    prefix.push_back(part);
    partitions(remaining - part, part, prefix, out);
    prefix.pop_back();
  }
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r;
  if (__builtin_mul_overflow(a, b, &r)) throw NumericalError("64-bit overflow in a Faa di Bruno coefficient");
  return r;
}

std::uint64_t factorial(int n) {
  std::uint64_t r = 1;
  for (int k = 2; k <= n; ++k) r = checked_mul(r, static_cast<std::uint64_t>(k));
  return r;
}

double factorial_d(int n) {
  double r = 1.0;
  for (int k = 2; k <= n; ++k) r *= k;
  return r;
}

Jet constant(cplx c, std::size_t len) {
  Jet j(len, cplx(0.0));
  j[0] = c;
  return j;
}

Jet add(const Jet& a, const Jet& b) {
  Jet r(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) r[k] = a[k] + b[k];
  return r;
}

Jet mul(const Jet& a, const Jet& b) {
  Jet r(a.size(), cplx(0.0));
  for (std::size_t k = 0; k < a.size(); ++k)
    for (std::size_t i = 0; i <= k; ++i) r[k] += a[i] * b[k - i];
  return r;
}

Jet div(const Jet& a, const Jet& b, const Expr& where) {
  if (b[0] == cplx(0.0)) throw PoleError(where.str(), b[0]);
  Jet r(a.size());
  for (std::size_t k = 0; k < a.size(); ++k) {
    cplx s = a[k];
    for (std::size_t i = 1; i <= k; ++i) s -= b[i] * r[k - i];
    r[k] = s / b[0];
  }
  return r;
}

Jet jexp(const Jet& a) {
  Jet r(a.size(), cplx(0.0));
  r[0] = std::exp(a[0]);
  for (std::size_t k = 1; k < a.size(); ++k) {
    cplx s = 0.0;
    for (std::size_t i = 1; i <= k; ++i) s += static_cast<double>(i) * a[i] * r[k - i];
    r[k] = s / static_cast<double>(k);
  }
  return r;
}

Jet jlog(const Jet& a, const Expr& where) {
  if (a[0] == cplx(0.0)) throw PoleError(where.str(), a[0]);
  if (a[0].imag() == 0.0 && a[0].real() < 0.0)
    throw PreconditionError("log evaluated on its branch cut in '" + where.str() + "'");
  Jet r(a.size(), cplx(0.0));
  r[0] = std::log(a[0]);
  for (std::size_t k = 1; k < a.size(); ++k) {
    cplx s = a[k];
    for (std::size_t i = 1; i < k; ++i) s -= static_cast<double>(i) / static_cast<double>(k) * r[i] * a[k - i];
    r[k] = s / a[0];
  }
  return r;
}

Jet jpow(const Jet& a, int n, const Expr& where) {
  Jet r = constant(1.0, a.size()), base = a;
  for (unsigned m = static_cast<unsigned>(std::abs(n)); m; m >>= 1) {
    if (m & 1u) r = mul(r, base);
    base = mul(base, base);
  }
  return n < 0 ? div(constant(1.0, a.size()), r, where) : r;
}

class JetEvaluator {
 public:
  explicit JetEvaluator(const Jet& w) : w_(w) {}

  const Jet& operator()(const Expr& e) {
    if (auto it = memo_.find(e.id()); it != memo_.end()) return it->second;
    return memo_.emplace(e.id(), compute(e)).first->second;
  }

 private:
  Jet compute(const Expr& e) {
    using Op = Expr::Op;
    const std::size_t len = w_.size();
    switch (e.op()) {
      case Op::Const: return constant(e.const_value(), len);
      case Op::Z: return w_;
      case Op::ZBar:
      case Op::Conj: throw PreconditionError("Taylor arithmetic needs a holomorphic expression, got '" + e.str() + "'");
      case Op::Add: return add((*this)(e.arg(0)), (*this)(e.arg(1)));
      case Op::Mul: return mul((*this)(e.arg(0)), (*this)(e.arg(1)));
      case Op::Div: return div((*this)(e.arg(0)), (*this)(e.arg(1)), e);
      case Op::Neg: {
        Jet r = (*this)(e.arg(0));
        for (auto& c : r) c = -c;
        return r;
      }
      case Op::Pow: return jpow((*this)(e.arg(0)), e.power(), e);
      case Op::Exp: return jexp((*this)(e.arg(0)));
      case Op::Log: return jlog((*this)(e.arg(0)), e);
      case Op::Mobius: {
        const auto& m = e.mobius_coeffs();
        const Jet& a = (*this)(e.arg(0));
        Jet num(len), den(len);
        for (std::size_t k = 0; k < len; ++k) {
          num[k] = m[0] * a[k];
          den[k] = m[2] * a[k];
        }
        num[0] += m[1];
        den[0] += m[3];
        return div(num, den, e);
      }
      case Op::AtomicInner: {
        // exp(-(1 + w)/(1 - w))
        const Jet& a = (*this)(e.arg(0));
        Jet num(len), den(len);
        for (std::size_t k = 0; k < len; ++k) {
          num[k] = -a[k];
          den[k] = -a[k];
        }
        num[0] -= 1.0;
        den[0] += 1.0;
        return jexp(div(num, den, e));
      }
      case Op::SectorCornerConj: return constant(e.eval(w_[0]), len);
    }
    throw Error("unhandled expression node");
  }

  const Jet& w_;
  std::unordered_map<const void*, Jet> memo_;
};

template <typename T, typename Mul>
T faa_sum(const std::vector<T>& f, const std::vector<T>& g, int n, Mul&& mulf) {
  if (static_cast<int>(f.size()) < n || static_cast<int>(g.size()) < n)
    throw PreconditionError("derivative lists need at least " + std::to_string(n) + " entries");
  std::vector<T> inner(static_cast<std::size_t>(n), T(0.0));  // indexed by j - 1
  for (const auto& k : enumerate_partitions(n)) {
    T prod = static_cast<T>(static_cast<double>(faa_coefficient(n, k)));
    for (int part : k) prod = mulf(prod, g[static_cast<std::size_t>(part - 1)]);
    inner[k.size() - 1] += prod;
  }
  T total(0.0);
  for (int j = 1; j <= n; ++j) total += mulf(f[static_cast<std::size_t>(j - 1)], inner[static_cast<std::size_t>(j - 1)]);
  return total;
}

}  // namespace

std::vector<MultiIndex> enumerate_partitions(int n) {
  check_order(n);
  std::vector<MultiIndex> out;
  MultiIndex prefix;
  partitions(n, n, prefix, out);
  return out;
}

std::uint64_t faa_coefficient(int n, const MultiIndex& k) {
  check_order(n);
  if (n > kMaxFaaOrder) throw ConfigError("order " + std::to_string(n) + " exceeds the 64-bit limit of 20");
  int total = 0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (k[i] < 1) throw ConfigError("multi-index entries must be >= 1");
    if (i > 0 && k[i] > k[i - 1]) throw ConfigError("multi-index must be non-increasing");
    total += k[i];
  }
  if (total != n) throw ConfigError("multi-index sums to " + std::to_string(total) + ", expected " + std::to_string(n));
  std::uint64_t denom = 1;
  for (std::size_t i = 0; i < k.size();) {
    std::size_t run = i;
    while (run < k.size() && k[run] == k[i]) ++run;
    const int reps = static_cast<int>(run - i);
    for (int r = 0; r < reps; ++r) denom = checked_mul(denom, factorial(k[i]));
    denom = checked_mul(denom, factorial(reps));
    i = run;
  }
  return factorial(n) / denom;
}

std::vector<CoefficientRow> coefficient_table(int n) {
  std::vector<CoefficientRow> rows;
  for (auto& k : enumerate_partitions(n)) {
    const auto c = faa_coefficient(n, k);
    rows.push_back({std::move(k), c});
  }
  return rows;
}

cplx compose_derivative(const std::vector<cplx>& f_derivs, const std::vector<cplx>& g_derivs, int n) {
  check_order(n);
  return faa_sum(f_derivs, g_derivs, n, [](cplx a, cplx b) { return a * b; });
}

double compose_magnitude(const std::vector<cplx>& f_derivs, const std::vector<cplx>& g_derivs, int n) {
  check_order(n);
  std::vector<double> fa, ga;
  for (cplx v : f_derivs) fa.push_back(std::abs(v));
  for (cplx v : g_derivs) ga.push_back(std::abs(v));
  return faa_sum(fa, ga, n, [](double a, double b) { return a * b; });
}

Jet expr_jet(const Expr& e, const Jet& w) {
  if (w.empty()) throw ConfigError("empty jet");
  JetEvaluator ev(w);
  return ev(e);
}

std::vector<cplx> jet_derivatives(const Expr& e, cplx x, int n) {
  check_order(n);
  Jet var(static_cast<std::size_t>(n) + 1, cplx(0.0));
  var[0] = x;
  var[1] = 1.0;
  const Jet j = expr_jet(e, var);
  std::vector<cplx> out;
  for (int k = 1; k <= n; ++k) out.push_back(j[static_cast<std::size_t>(k)] * factorial_d(k));
  return out;
}

cplx taylor_oracle(const Expr& f, const Expr& g, cplx x, int n) {
  if (n < 0) throw ConfigError("order must be >= 0");
  Jet var(static_cast<std::size_t>(n) + 1, cplx(0.0));
  var[0] = x;
  if (n >= 1) var[1] = 1.0;
  const Jet gj = expr_jet(g, var);
  const Jet fg = expr_jet(f, gj);
  return fg[static_cast<std::size_t>(n)] * factorial_d(n);
}

FaaVerifyReport faa_verify(int max_order, int samples, unsigned seed) {
  check_order(max_order);
  if (max_order > kMaxFaaOrder) throw ConfigError("verification order exceeds 20");
  if (samples < 1) throw ConfigError("need at least one sample");
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> U(-1.0, 1.0);
  auto rc = [&](double s) { return cplx(s * U(rng), s * U(rng)); };
  const Expr Z = Expr::z();

  // Each member carries closed-form derivatives k >= 1, so the derivative
  // lists come from neither the formula nor the series arithmetic.
  struct Member {
    Expr e;
    std::function<cplx(cplx, int)> d;
  };
  auto falling = [](double p, int k) {
    double r = 1.0;
    for (int i = 0; i < k; ++i) r *= p - i;
    return r;
  };

  FaaVerifyReport rep;
  rep.max_order = max_order;
  rep.samples = samples;
  for (int s = 0; s < samples; ++s) {
    // Inner functions stay in |g| < 2; outer singularities sit at |w| >= 3.
    Member g;
    switch (s % 3) {
      case 0: {
        const cplx c0 = rc(0.3), c1 = rc(0.5), c2 = rc(0.3), c3 = rc(0.2);
        g.e = Expr(c0) + Expr(c1) * Z + Expr(c2) * pow(Z, 2) + Expr(c3) * pow(Z, 3);
        g.d = [=](cplx w, int k) -> cplx {
          switch (k) {
            case 1: return c1 + 2.0 * c2 * w + 3.0 * c3 * w * w;
            case 2: return 2.0 * c2 + 6.0 * c3 * w;
            case 3: return 6.0 * c3;
            default: return 0.0;
          }
        };
        break;
      }
      case 1: {
        const cplx a = rc(0.5);
        g.e = exp(Expr(a) * Z) - Expr(1.0);
        g.d = [=](cplx w, int k) { return std::pow(a, k) * std::exp(a * w); };
        break;
      }
      default: {
        const cplx a = rc(0.5), b = rc(0.3), c = rc(0.1), d = 1.0;
        g.e = Expr::mobius(a, b, c, d, Z);
        g.d = [=](cplx w, int k) {
          const double sign = k % 2 ? 1.0 : -1.0;
          return sign * factorial_d(k) * std::pow(c, k - 1) * (a * d - b * c) / std::pow(c * w + d, k + 1);
        };
        break;
      }
    }
    Member f;
    const cplx c = std::polar(3.0 + 2.0 * (U(rng) + 1.0), 3.14159 * U(rng));
    switch ((s / 3) % 4) {
      case 0: {
        const cplx a = rc(1.0);
        f.e = exp(Expr(a) * Z);
        f.d = [=](cplx w, int k) { return std::pow(a, k) * std::exp(a * w); };
        break;
      }
      case 1:
        f.e = Expr(1.0) / (Z - Expr(c));
        f.d = [=](cplx w, int k) { return (k % 2 ? -1.0 : 1.0) * factorial_d(k) / std::pow(w - c, k + 1); };
        break;
      case 2: {
        const double r = std::abs(c);
        f.e = log(Z + Expr(r));
        f.d = [=](cplx w, int k) { return (k % 2 ? 1.0 : -1.0) * factorial_d(k - 1) / std::pow(w + r, k); };
        break;
      }
      default: {
        const int p = 1 + s % 5;
        f.e = pow(Z - Expr(c), p) * exp(Z * Expr(0.5));
        // Leibniz: sum_i C(k, i) (p)_i (w - c)^(p - i) (1/2)^(k - i) e^(w/2).
        f.d = [=](cplx w, int k) {
          cplx sum = 0.0;
          double binom = 1.0;
          for (int i = 0; i <= k; ++i) {
            if (i <= p) sum += binom * falling(p, i) * std::pow(w - c, p - i) * std::pow(0.5, k - i);
            binom = binom * (k - i) / (i + 1);
          }
          return sum * std::exp(0.5 * w);
        };
        break;
      }
    }
    const cplx x = rc(0.5);
    const int n = 1 + s % max_order;
    const cplx gx = g.e.eval(x);
    std::vector<cplx> fd, gd;
    for (int k = 1; k <= n; ++k) {
      fd.push_back(f.d(gx, k));
      gd.push_back(g.d(x, k));
    }
    const cplx formula = compose_derivative(fd, gd, n);
    const cplx oracle = taylor_oracle(f.e, g.e, x, n);
    const double scale = std::max(compose_magnitude(fd, gd, n), 1e-300);
    const double rel = std::abs(formula - oracle) / scale;
    if (rel > rep.worst_relative) {
      rep.worst_relative = rel;
      rep.worst_order = n;
    }
  }
  return rep;
}

}  // namespace dbarlab

#include "dbarlab/bezout.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace dbarlab {

namespace {

std::vector<std::pair<int, int>> monomial_list(int degree) {
  std::vector<std::pair<int, int>> out;
  for (int total = 0; total <= degree; ++total)
    for (int a = total; a >= 0; --a) out.emplace_back(a, total - a);
  return out;
}

// Powers w^0..w^d and conj(w)^0..conj(w)^d, combined per monomial.
void monomial_row(cplx w, int degree, const std::vector<std::pair<int, int>>& mono,
                  std::vector<cplx>& pw, std::vector<cplx>& pwb, cplx* out) {
  pw.assign(static_cast<std::size_t>(degree) + 1, 1.0);
  pwb.assign(static_cast<std::size_t>(degree) + 1, 1.0);
  for (int k = 1; k <= degree; ++k) {
    pw[k] = pw[k - 1] * w;
    pwb[k] = pwb[k - 1] * std::conj(w);
  }
  for (std::size_t m = 0; m < mono.size(); ++m) out[m] = pw[mono[m].first] * pwb[mono[m].second];
}

}  // namespace

std::string describe_nodes(const GridSpec& g, const std::vector<std::size_t>& nodes,
                           std::size_t limit) {
  std::ostringstream os;
  for (std::size_t k = 0; k < nodes.size() && k < limit; ++k) {
    const cplx z = g.node(nodes[k]);
    os << (k ? ", " : "") << '(' << z.real() << ", " << z.imag() << ')';
  }
  if (nodes.size() > limit) os << ", ... (" << nodes.size() << " nodes)";
  return os.str();
}

BezoutProblem BezoutProblem::make(const CompactDomain& domain, std::vector<Expr> f, double h) {
  return make(domain, share(build_mask(domain, GridSpec::covering(domain.bounding_box(), h))),
              std::move(f));
}

BezoutProblem BezoutProblem::make(const CompactDomain& domain, const MaskPtr& mask,
                                  std::vector<Expr> f) {
  if (f.empty()) throw ConfigError("Bezout problem needs at least one function");
  BezoutProblem p{domain, mask, std::move(f), {}, 0.0};
  for (const auto& fj : p.f) p.f_samples.push_back(sample(fj, mask));
  double delta = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < mask->size(); ++k) {
    if (!mask->inside(k)) continue;
    double s = 0.0;
    for (const auto& fj : p.f_samples) s += std::abs(fj[k]);
    delta = std::min(delta, s);
  }
  p.delta = delta;
  return p;
}

double BezoutProblem::sup_norm_sum() const {
  double s = 0.0;
  for (const auto& fj : f_samples) s += max_abs(fj);
  return s;
}

std::vector<SampledField> q_fields(const BezoutProblem& problem) {
  const auto& mask = *problem.mask;
  std::vector<std::size_t> zeros;
  std::vector<SampledField> q(problem.n(), SampledField(problem.mask));
  for (std::size_t k = 0; k < mask.size(); ++k) {
    if (!mask.inside(k)) continue;
    double norm2 = 0.0;
    for (const auto& fj : problem.f_samples) norm2 += std::norm(fj[k]);
    if (norm2 == 0.0) {
      zeros.push_back(k);
      continue;
    }
    for (std::size_t j = 0; j < problem.n(); ++j) q[j][k] = std::conj(problem.f_samples[j][k]) / norm2;
  }
  if (!zeros.empty())
    throw PreconditionError("common zero of f on K at " + describe_nodes(mask.grid(), zeros));
  return q;
}

cplx PolyZZbar::eval(cplx z) const {
  std::vector<cplx> pw, pwb, row(monomials.size());
  monomial_row((z - center) / scale, degree, monomials, pw, pwb, row.data());
  cplx s;
  for (std::size_t m = 0; m < row.size(); ++m) s += coeffs[m] * row[m];
  return s;
}

Expr PolyZZbar::to_expr() const {
  // Horner in w inside each conj(w)^b slice, then Horner in conj(w).
  const Expr w = (Expr::z() - Expr(center)) * Expr(1.0 / scale);
  const Expr wb = conj(w);
  std::vector<std::vector<cplx>> slice(static_cast<std::size_t>(degree) + 1);
  for (auto& s : slice) s.assign(static_cast<std::size_t>(degree) + 1, 0.0);
  for (std::size_t m = 0; m < monomials.size(); ++m)
    slice[monomials[m].second][monomials[m].first] = coeffs[m];
  Expr outer;
  for (int b = degree; b >= 0; --b) {
    Expr inner;
    for (int a = degree - b; a >= 0; --a) inner = inner * w + Expr(slice[b][a]);
    outer = outer * wb + inner;
  }
  return outer;
}

namespace {

// With `prune`, a fit whose fitted rows already miss the target returns that
// lower bound without the full sweep; the degree search only needs met/unmet.
FitResult fit_impl(const SampledField& q, int degree, double target_sup, std::size_t max_rows,
                   bool prune) {
  if (degree < 0) throw ConfigError("fit degree must be >= 0");
  const auto& mask = *q.mask;
  const auto& g = mask.grid();
  const auto mono = monomial_list(degree);
  const std::size_t cols = mono.size();
  // Nodes carrying a finite sample; NaN marks "undefined".
  std::vector<std::size_t> defined;
  for (std::size_t k = 0; k < mask.size(); ++k)
    if (mask.inside(k) && std::isfinite(q[k].real()) && std::isfinite(q[k].imag())) defined.push_back(k);
  if (defined.size() < cols)
    throw PreconditionError("weierstrass_fit: " + std::to_string(defined.size()) +
                            " defined nodes cannot determine " + std::to_string(cols) + " coefficients");

  PolyZZbar p;
  p.degree = degree;
  p.monomials = mono;
  {
    const auto& nodes = defined;
    cplx lo = g.node(nodes.front()), hi = lo;
    for (std::size_t k : nodes) {
      const cplx z = g.node(k);
      lo = {std::min(lo.real(), z.real()), std::min(lo.imag(), z.imag())};
      hi = {std::max(hi.real(), z.real()), std::max(hi.imag(), z.imag())};
    }
    p.center = 0.5 * (lo + hi);
    double r = 0.0;
    for (std::size_t k : nodes) r = std::max(r, std::abs(g.node(k) - p.center));
    p.scale = r > 0.0 ? r : 1.0;
  }

  // Thin to a regular sub-lattice so the design matrix stays small.
  int stride = 1;
  while (defined.size() / (static_cast<std::size_t>(stride) * stride) > max_rows) ++stride;
  std::vector<std::size_t> rows;
  for (std::size_t k : defined)
    if (g.col(k) % stride == 0 && g.row(k) % stride == 0) rows.push_back(k);
  if (rows.size() < cols) rows = defined;

  Eigen::MatrixXcd A(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols));
  Eigen::VectorXcd b(static_cast<Eigen::Index>(rows.size()));
  std::vector<cplx> pw, pwb, row(cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    monomial_row((g.node(rows[r]) - p.center) / p.scale, degree, mono, pw, pwb, row.data());
    for (std::size_t c = 0; c < cols; ++c) A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
    b(static_cast<Eigen::Index>(r)) = q[rows[r]];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(A);
  qr.setThreshold(1e-13);
  if (qr.rank() < static_cast<Eigen::Index>(cols))
    throw NumericalError("weierstrass_fit: design matrix has rank " + std::to_string(qr.rank()) +
                         " < " + std::to_string(cols) + " at degree " + std::to_string(degree) +
                         "; lower the degree");
  const Eigen::VectorXcd c = qr.solve(b);
  p.coeffs.assign(c.data(), c.data() + c.size());

  FitResult fit;
  fit.fit_rows = rows.size();
  for (std::size_t k : rows) {
    monomial_row((g.node(k) - p.center) / p.scale, degree, mono, pw, pwb, row.data());
    cplx s;
    for (std::size_t m = 0; m < cols; ++m) s += p.coeffs[m] * row[m];
    fit.sup_error = std::max(fit.sup_error, std::abs(s - q[k]));
  }
  if (prune && fit.sup_error > target_sup) {
    fit.poly = std::move(p);
    return fit;
  }
  for (std::size_t k : defined) {
    monomial_row((g.node(k) - p.center) / p.scale, degree, mono, pw, pwb, row.data());
    cplx s;
    for (std::size_t m = 0; m < cols; ++m) s += p.coeffs[m] * row[m];
    fit.sup_error = std::max(fit.sup_error, std::abs(s - q[k]));
  }
  fit.met = fit.sup_error <= target_sup;
  fit.poly = std::move(p);
  return fit;
}

}  // namespace

FitResult weierstrass_fit(const SampledField& q, int degree, double target_sup,
                          std::size_t max_rows) {
  return fit_impl(q, degree, target_sup, max_rows, false);
}

PolyBezout bezout_poly(const BezoutProblem& problem, int max_degree) {
  const auto q = q_fields(problem);
  PolyBezout out;
  out.tolerance = 1.0 / (2.0 * problem.sup_norm_sum());
  for (std::size_t j = 0; j < problem.n(); ++j) {
    // Galloping search on the degree, then bisection between the last miss
    // and the first hit. The LS error is not strictly monotone in d, so the
    // degree found is small but not guaranteed minimal.
    auto fit_at = [&](int d) { return fit_impl(q[j], d, out.tolerance, 5000, true); };
    FitResult best = fit_at(0);
    int lo = 0, hi = -1;
    for (int d = 1; !best.met && lo < max_degree; d *= 2) {
      const int at = std::min(d, max_degree);
      auto r = fit_at(at);
      if (r.met) {
        hi = at;
        best = std::move(r);
      } else {
        lo = at;
        if (at == max_degree) best = std::move(r);
      }
    }
    const bool found = best.met;
    if (!found)
      throw NumericalError("bezout_poly: fit " + std::to_string(j) + " misses the tolerance " +
                           std::to_string(out.tolerance) + " at degree " + std::to_string(max_degree) +
                           " (sup error " + std::to_string(best.sup_error) + "); increase degree");
    while (found && hi - lo > 1) {
      const int mid = (lo + hi) / 2;
      auto r = fit_at(mid);
      if (r.met) {
        hi = mid;
        best = std::move(r);
      } else {
        lo = mid;
      }
    }
    out.fits.push_back(std::move(best));
  }

  std::vector<Expr> p;
  for (const auto& fit : out.fits) p.push_back(fit.poly.to_expr());
  Expr denom;
  for (std::size_t j = 0; j < problem.n(); ++j) denom = denom + p[j] * problem.f[j];
  for (std::size_t j = 0; j < problem.n(); ++j) out.x.push_back(p[j] / denom);

  const auto& mask = *problem.mask;
  const CompiledExpr den(denom);
  std::vector<CompiledExpr> xs;
  for (const auto& x : out.x) xs.emplace_back(x);
  out.min_denominator = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < mask.size(); ++k) {
    if (!mask.inside(k)) continue;
    const cplx z = mask.grid().node(k);
    out.min_denominator = std::min(out.min_denominator, std::abs(den(z)));
    cplx s;
    for (std::size_t j = 0; j < problem.n(); ++j) s += xs[j](z) * problem.f_samples[j][k];
    out.residual = std::max(out.residual, std::abs(s - 1.0));
  }
  if (out.min_denominator < 0.5)
    throw NumericalError("bezout_poly: min |sum p_k f_k| = " + std::to_string(out.min_denominator) +
                         " < 1/2 although every fit met the tolerance");
  return out;
}

double smoothstep(double t) {
  if (t <= 1.0 / 3.0) return 0.0;
  if (t >= 2.0 / 3.0) return 1.0;
  const double s = 3.0 * (t - 1.0 / 3.0);
  return s * s * s * (s * (6.0 * s - 15.0) + 10.0);
}

namespace {

// beta_j at every Inside node; also returns the nodes where sum beta = 0.
std::vector<std::vector<double>> bump_weights(const BezoutProblem& problem, double epsilon,
                                              std::vector<std::size_t>& uncovered) {
  const auto& mask = *problem.mask;
  std::vector<std::vector<double>> beta(problem.n(), std::vector<double>(mask.size(), 0.0));
  for (std::size_t k = 0; k < mask.size(); ++k) {
    if (!mask.inside(k)) continue;
    double s = 0.0;
    for (std::size_t j = 0; j < problem.n(); ++j) {
      beta[j][k] = smoothstep(std::abs(problem.f_samples[j][k]) / epsilon);
      s += beta[j][k];
    }
    if (s == 0.0) uncovered.push_back(k);
  }
  return beta;
}

double default_epsilon(const BezoutProblem& problem, double epsilon) {
  if (epsilon > 0.0) return epsilon;
  if (!(problem.delta > 0.0))
    throw PreconditionError("partition of unity: delta = 0, f has a common zero on K");
  return problem.delta / (2.0 * static_cast<double>(problem.n()));
}

}  // namespace

std::vector<SampledField> partition_of_unity(const BezoutProblem& problem, double epsilon) {
  epsilon = default_epsilon(problem, epsilon);
  std::vector<std::size_t> uncovered;
  const auto beta = bump_weights(problem, epsilon, uncovered);
  if (!uncovered.empty())
    throw PreconditionError("partition of unity: sum of bumps vanishes at " +
                            describe_nodes(problem.mask->grid(), uncovered) +
                            "; epsilon = " + std::to_string(epsilon) + " is too large for delta = " +
                            std::to_string(problem.delta));
  std::vector<SampledField> alpha(problem.n(), SampledField(problem.mask));
  const auto& mask = *problem.mask;
  for (std::size_t k = 0; k < mask.size(); ++k) {
    if (!mask.inside(k)) continue;
    double s = 0.0;
    for (std::size_t j = 0; j < problem.n(); ++j) s += beta[j][k];
    for (std::size_t j = 0; j < problem.n(); ++j) alpha[j][k] = beta[j][k] / s;
  }
  return alpha;
}

PouBezout bezout_pou(const BezoutProblem& problem, double epsilon) {
  PouBezout out;
  out.epsilon = default_epsilon(problem, epsilon);
  out.alpha = partition_of_unity(problem, out.epsilon);
  const auto& mask = *problem.mask;
  for (std::size_t j = 0; j < problem.n(); ++j) {
    SampledField x(problem.mask);
    for (std::size_t k = 0; k < mask.size(); ++k)
      if (mask.inside(k) && out.alpha[j][k] != cplx(0.0, 0.0))
        x[k] = out.alpha[j][k] / problem.f_samples[j][k];
    out.x.push_back(std::move(x));
  }
  for (std::size_t k = 0; k < mask.size(); ++k) {
    if (!mask.inside(k)) continue;
    cplx s;
    for (std::size_t j = 0; j < problem.n(); ++j) s += out.x[j][k] * problem.f_samples[j][k];
    out.residual = std::max(out.residual, std::abs(s - 1.0));
  }
  return out;
}

GeneralizedDivision generalized_division(const Expr& f, const BezoutProblem& problem,
                                         double vanish_radius, double epsilon) {
  if (!(epsilon > 0.0)) throw ConfigError("generalized_division: epsilon must be positive");
  if (!(vanish_radius >= 0.0)) throw ConfigError("generalized_division: vanish_radius must be >= 0");
  const auto& mask = *problem.mask;
  const auto& g = mask.grid();
  const SampledField fs = sample(f, problem.mask);

  GeneralizedDivision out;
  std::vector<std::size_t> small;
  for (std::size_t k = 0; k < mask.size(); ++k) {
    if (!mask.inside(k)) continue;
    double s = 0.0;
    for (const auto& fj : problem.f_samples) s += std::abs(fj[k]);
    if (s <= epsilon) small.push_back(k);
  }
  out.small_nodes = small.size();

  const int reach = static_cast<int>(std::ceil(vanish_radius / g.h));
  std::vector<std::size_t> violations;
  std::vector<bool> seen(mask.size(), false);
  for (std::size_t k : small) {
    const int i = g.col(k), j = g.row(k);
    for (int dj = -reach; dj <= reach; ++dj)
      for (int di = -reach; di <= reach; ++di) {
        const int a = i + di, b = j + dj;
        if (a < 0 || b < 0 || a >= g.nx || b >= g.ny) continue;
        const std::size_t m = g.index(a, b);
        if (seen[m] || !mask.inside(m)) continue;
        if (std::abs(g.node(m) - g.node(k)) > vanish_radius + 1e-12 * g.h) continue;
        seen[m] = true;
        if (std::abs(fs[m]) > 1e-12) violations.push_back(m);
      }
  }
  if (!violations.empty())
    throw PreconditionError("generalized_division: f does not vanish near the common small set at " +
                            describe_nodes(g, violations));

  std::vector<std::size_t> uncovered;
  const auto beta = bump_weights(problem, epsilon, uncovered);
  for (std::size_t k : uncovered)
    if (std::abs(fs[k]) > 1e-12)
      throw PreconditionError("generalized_division: f does not vanish where no f_j is bounded "
                              "below, at " + describe_nodes(g, {k}));
  out.g.assign(problem.n(), SampledField(problem.mask));
  for (std::size_t k = 0; k < mask.size(); ++k) {
    if (!mask.inside(k)) continue;
    double s = 0.0;
    for (std::size_t j = 0; j < problem.n(); ++j) s += beta[j][k];
    if (s == 0.0) continue;
    for (std::size_t j = 0; j < problem.n(); ++j)
      if (beta[j][k] > 0.0) out.g[j][k] = fs[k] * (beta[j][k] / s) / problem.f_samples[j][k];
  }
  for (std::size_t k = 0; k < mask.size(); ++k) {
    if (!mask.inside(k)) continue;
    cplx s;
    for (std::size_t j = 0; j < problem.n(); ++j) s += out.g[j][k] * problem.f_samples[j][k];
    out.residual = std::max(out.residual, std::abs(s - fs[k]));
  }
  return out;
}

}  // namespace dbarlab

#include "dbarlab/corona.hpp"

#include <algorithm>
#include <cmath>

namespace dbarlab {

AntisymMatrixField AntisymMatrixField::zeros(std::size_t n, const MaskPtr& mask) {
  if (n == 0) throw ConfigError("antisymmetric matrix needs n >= 1");
  AntisymMatrixField m;
  m.n = n;
  m.mask = mask;
  m.upper.assign(n * (n - 1) / 2, SampledField(mask));
  return m;
}

std::size_t AntisymMatrixField::slot(std::size_t j, std::size_t k) const {
  // Rows 0..j-1 hold (n-1) + (n-2) + ... + (n-j) entries.
  return j * (2 * n - j - 1) / 2 + (k - j - 1);
}

cplx AntisymMatrixField::at(std::size_t j, std::size_t k, std::size_t node) const {
  if (j == k) return 0.0;
  return j < k ? upper[slot(j, k)][node] : -upper[slot(k, j)][node];
}

std::vector<Expr> koszul_F_expr(const std::vector<Expr>& x, const std::vector<Expr>& f) {
  if (x.size() != f.size()) throw ConfigError("koszul_F: x and f differ in length");
  Expr norm2;
  for (const auto& fj : f) norm2 = norm2 + fj * conj(fj);
  std::vector<Expr> out;
  for (std::size_t j = 0; j < f.size(); ++j)
    for (std::size_t k = j + 1; k < f.size(); ++k)
      out.push_back((x[k].dbar() * conj(f[j]) - x[j].dbar() * conj(f[k])) / norm2);
  return out;
}

namespace {

// Nodes where sum |f_j| <= 1e-8 max; the zero-extension set.
std::vector<bool> small_set(const std::vector<SampledField>& fs) {
  const auto& mask = *fs.front().mask;
  std::vector<double> sum(mask.size(), 0.0);
  double peak = 0.0;
  for (std::size_t k = 0; k < mask.size(); ++k) {
    if (!mask.inside(k)) continue;
    for (const auto& fj : fs) sum[k] += std::abs(fj[k]);
    peak = std::max(peak, sum[k]);
  }
  std::vector<bool> small(mask.size(), false);
  for (std::size_t k = 0; k < mask.size(); ++k) small[k] = mask.inside(k) && sum[k] <= 1e-8 * peak;
  return small;
}

// Evaluates e off `zero` (throwing on poles there) and writes 0 on it.
SampledField sample_guarded(const Expr& e, const MaskPtr& mask, const std::vector<bool>& zero) {
  return sample_zero_extended(e, mask, [&](std::size_t k) { return zero[k]; });
}

std::vector<SampledField> sample_all(const std::vector<Expr>& es, const MaskPtr& mask) {
  std::vector<SampledField> out;
  for (const auto& e : es) out.push_back(sample(e, mask));
  return out;
}

double dbar_sup(const SampledField& u, const std::vector<bool>& keep) {
  const SampledField d = dbar_fd(u);
  double m = 0.0;
  for (std::size_t k = 0; k < keep.size(); ++k)
    if (keep[k]) m = std::max(m, std::abs(d[k]));
  return m;
}

struct Pipeline {
  std::vector<Expr> f, x;
  std::optional<Expr> weight;     // g^4 in the g-power variants
  std::optional<Expr> post;       // g for the g^6 branch
  Expr target;
};

CoronaSolution run(const Pipeline& p, const MaskPtr& mask, const QuadratureConfig& cfg) {
  cfg.validate();
  const std::size_t n = p.f.size();
  const auto fs = sample_all(p.f, mask);
  const bool weighted = p.weight || p.post;
  const auto small = weighted ? small_set(fs) : std::vector<bool>(mask->size(), false);

  CoronaSolution out;
  out.h = mask->grid().h;
  std::vector<SampledField> start;
  for (const auto& xj : p.x) start.push_back(sample_guarded(p.weight ? *p.weight * xj : xj, mask, small));
  out.u = start;
  if (n > 1) {
    const auto F = koszul_F(p.x, p.f, mask, p.weight);
    auto solved = solve_dbar_matrix(F, cfg);
    out.entry_checks = std::move(solved.checks);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t node = 0; node < mask->size(); ++node) {
        if (!mask->inside(node)) continue;
        cplx s;
        for (std::size_t j = 0; j < n; ++j) s += fs[j][node] * solved.H.at(j, k, node);
        out.u[k][node] -= s;
      }
  }
  if (p.post) {
    const auto g = sample_guarded(*p.post, mask, small);
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t node = 0; node < mask->size(); ++node) {
        out.u[k][node] *= g[node];
        start[k][node] *= g[node];
      }
  }

  const auto target = sample(p.target, mask);
  for (std::size_t node = 0; node < mask->size(); ++node) {
    if (!mask->inside(node)) continue;
    cplx s;
    for (std::size_t j = 0; j < n; ++j) s += out.u[j][node] * fs[j][node];
    out.residual_sup = std::max(out.residual_sup, std::abs(s - target[node]));
  }
  const auto keep = shrunk_interior(*mask, cfg.shrink_distance);
  if (std::none_of(keep.begin(), keep.end(), [](bool b) { return b; }))
    throw NumericalError("corona: no nodes left after shrinking; refine the grid");
  for (std::size_t k = 0; k < n; ++k) {
    out.dbar_sup = std::max(out.dbar_sup, dbar_sup(out.u[k], keep));
    out.dbar_sup_start = std::max(out.dbar_sup_start, dbar_sup(start[k], keep));
  }
  return out;
}

void check_g_bound(const Expr& g, const std::vector<SampledField>& fs, const MaskPtr& mask) {
  const auto gs = sample(g, mask);
  std::vector<std::size_t> bad;
  for (std::size_t k = 0; k < mask->size(); ++k) {
    if (!mask->inside(k)) continue;
    double s = 0.0;
    for (const auto& fj : fs) s += std::abs(fj[k]);
    if (std::abs(gs[k]) > s * (1.0 + 1e-12) + 1e-300) bad.push_back(k);
  }
  if (!bad.empty())
    throw PreconditionError("|g| > sum |f_j| at " + describe_nodes(mask->grid(), bad));
}

}  // namespace

AntisymMatrixField koszul_F(const std::vector<Expr>& x, const std::vector<Expr>& f,
                            const MaskPtr& mask, const std::optional<Expr>& weight) {
  const auto entries = koszul_F_expr(x, f);
  auto F = AntisymMatrixField::zeros(f.size(), mask);
  if (entries.empty()) return F;
  const auto fs = sample_all(f, mask);
  std::vector<bool> zero(mask->size(), false);
  if (weight) {
    zero = small_set(fs);
  } else {
    std::vector<std::size_t> bad;
    for (std::size_t k = 0; k < mask->size(); ++k) {
      if (!mask->inside(k)) continue;
      double s = 0.0;
      for (const auto& fj : fs) s += std::norm(fj[k]);
      if (s == 0.0) bad.push_back(k);
    }
    if (!bad.empty())
      throw PreconditionError("koszul_F: |f| = 0 at " + describe_nodes(mask->grid(), bad));
  }
  for (std::size_t s = 0; s < entries.size(); ++s)
    F.upper[s] = sample_guarded(weight ? *weight * entries[s] : entries[s], mask, zero);
  return F;
}

AntisymMatrixField koszul_F(const std::vector<SampledField>& x,
                            const std::vector<SampledField>& f) {
  if (x.size() != f.size() || f.empty()) throw ConfigError("koszul_F: x and f differ in length");
  const MaskPtr mask = f.front().mask;
  auto F = AntisymMatrixField::zeros(f.size(), mask);
  std::vector<SampledField> dx;
  for (const auto& xj : x) dx.push_back(dbar_fd(xj));
  const auto& interior = *dx.front().mask;
  for (std::size_t k = 0; k < mask->size(); ++k) {
    if (!interior.inside(k)) continue;
    double norm2 = 0.0;
    for (const auto& fj : f) norm2 += std::norm(fj[k]);
    if (norm2 == 0.0)
      throw PreconditionError("koszul_F: |f| = 0 at " + describe_nodes(mask->grid(), {k}));
    for (std::size_t a = 0; a < f.size(); ++a)
      for (std::size_t b = a + 1; b < f.size(); ++b)
        F.entry(a, b)[k] = (dx[b][k] * std::conj(f[a][k]) - dx[a][k] * std::conj(f[b][k])) / norm2;
  }
  return F;
}

MatrixSolve solve_dbar_matrix(const AntisymMatrixField& F, const QuadratureConfig& cfg) {
  MatrixSolve out{AntisymMatrixField::zeros(F.n, F.mask), {}};
  const auto keep = shrunk_interior(*F.mask, cfg.shrink_distance);
  for (std::size_t s = 0; s < F.upper.size(); ++s) {
    F.upper[s].check_finite("koszul entry");
    out.H.upper[s] = pompeiu_grid(F.upper[s], cfg);
    const SampledField d = dbar_fd(out.H.upper[s]);
    DbarCheck c;
    c.h = F.mask->grid().h;
    for (std::size_t k = 0; k < keep.size(); ++k) {
      if (!keep[k]) continue;
      ++c.nodes;
      c.max_deviation = std::max(c.max_deviation, std::abs(d[k] - F.upper[s][k]));
    }
    out.checks.push_back(c);
  }
  return out;
}

CoronaSolution corona_solve(const BezoutProblem& problem, const QuadratureConfig& cfg,
                            int max_degree) {
  if (!(problem.delta > 0.0))
    throw PreconditionError("corona_solve: sum |f_j| vanishes on K (delta = 0)");
  const auto bez = bezout_poly(problem, max_degree);
  return run(Pipeline{problem.f, bez.x, std::nullopt, std::nullopt, Expr(1.0)}, problem.mask, cfg);
}

CoronaSolution g_power_solve(const Expr& g, const std::vector<Expr>& f, const std::vector<Expr>& x,
                             bool isolated_zeros, const MaskPtr& mask, const QuadratureConfig& cfg) {
  if (f.empty() || x.size() != f.size()) throw ConfigError("g_power_solve: x and f differ in length");
  const auto fs = sample_all(f, mask);
  check_g_bound(g, fs, mask);
  // sum x_j f_j = g, checked away from the zero-extension set.
  const auto small = small_set(fs);
  Expr sum;
  for (std::size_t j = 0; j < f.size(); ++j) sum = sum + x[j] * f[j];
  const auto lhs = sample_guarded(sum - g, mask, small);
  const double miss = max_abs(lhs);
  if (miss > 1e-10)
    throw PreconditionError("g_power_solve: max |sum x_j f_j - g| = " + std::to_string(miss));
  const Expr g4 = pow(g, 4);
  if (isolated_zeros) return run(Pipeline{f, x, g4, std::nullopt, pow(g, 5)}, mask, cfg);
  return run(Pipeline{f, x, g4, g, pow(g, 6)}, mask, cfg);
}

CoronaSolution g12_solve(const Expr& g, const std::vector<Expr>& f, const std::vector<Expr>& h_list,
                         const MaskPtr& mask, const QuadratureConfig& cfg) {
  if (f.empty() || h_list.size() != f.size()) throw ConfigError("g12_solve: h and f differ in length");
  const auto fs = sample_all(f, mask);
  check_g_bound(g, fs, mask);
  Expr hsum;
  for (std::size_t j = 0; j < f.size(); ++j) hsum = hsum + h_list[j] * f[j];
  const auto hs = sample(hsum, mask);
  std::vector<std::size_t> bad;
  double peak = 0.0;
  for (std::size_t k = 0; k < mask->size(); ++k) {
    if (!mask->inside(k)) continue;
    double s = 0.0;
    for (const auto& fj : fs) s += std::norm(fj[k]);
    peak = std::max(peak, s);
  }
  for (std::size_t k = 0; k < mask->size(); ++k) {
    if (!mask->inside(k)) continue;
    double s = 0.0;
    for (const auto& fj : fs) s += std::norm(fj[k]);
    if (std::abs(hs[k]) < s - 1e-12 * peak) bad.push_back(k);
  }
  if (!bad.empty())
    throw PreconditionError("g12_solve: |sum h_j f_j| < sum |f_j|^2 at " +
                            describe_nodes(mask->grid(), bad));
  // g^8 = k h with |k| <= n |g|^6; k is only evaluated off the small set.
  const Expr k = pow(g, 8) / hsum;
  std::vector<Expr> x;
  for (const auto& hj : h_list) x.push_back(k * hj);
  return run(Pipeline{f, x, pow(g, 4), std::nullopt, pow(g, 12)}, mask, cfg);
}

}  // namespace dbarlab

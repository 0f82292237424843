#include "dbarlab/division.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include "dbarlab/bezout.hpp"
#include "dbarlab/cauchy.hpp"
#include "dbarlab/study.hpp"

namespace dbarlab {

const char* to_string(SmoothClass c) {
  switch (c) {
    case SmoothClass::C0: return "C0";
    case SmoothClass::A0: return "A0";
    case SmoothClass::C1: return "C1";
    case SmoothClass::A1: return "A1";
    case SmoothClass::Dbar1: return "Dbar1";
  }
  return "?";
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "PASS";
    case Verdict::Fail: return "FAIL";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

SmoothClass parse_smooth_class(const std::string& s) {
  for (SmoothClass c : {SmoothClass::C0, SmoothClass::A0, SmoothClass::C1, SmoothClass::A1, SmoothClass::Dbar1})
    if (s == to_string(c)) return c;
  throw ConfigError("unknown smoothness class '" + s + "' (expected C0, A0, C1, A1 or Dbar1)");
}

Verdict combine(Verdict a, Verdict b) {
  if (a == Verdict::Fail || b == Verdict::Fail) return Verdict::Fail;
  if (a == Verdict::Inconclusive || b == Verdict::Inconclusive) return Verdict::Inconclusive;
  return Verdict::Pass;
}

namespace {

using Quantity = std::function<std::optional<cplx>(cplx z, double r)>;

bool finite(cplx v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

std::optional<cplx> checked(const CompiledExpr& e, cplx z) {
  auto v = e.try_eval(z);
  if (v && !finite(*v)) v.reset();
  return v;
}

// Central-difference partials with step r/16.
Quantity partial_x(const CompiledExpr& e) {
  return [&e](cplx z, double r) -> std::optional<cplx> {
    const double s = r / 16.0;
    const auto a = checked(e, z + s), b = checked(e, z - s);
    if (!a || !b) return std::nullopt;
    return (*a - *b) / (2.0 * s);
  };
}

Quantity partial_y(const CompiledExpr& e) {
  return [&e](cplx z, double r) -> std::optional<cplx> {
    const double s = r / 16.0;
    const auto a = checked(e, z + cplx(0, s)), b = checked(e, z - cplx(0, s));
    if (!a || !b) return std::nullopt;
    return (*a - *b) / (2.0 * s);
  };
}

Quantity value_of(const CompiledExpr& e) {
  return [&e](cplx z, double) { return checked(e, z); };
}

// Arc points z0 + r e^{i theta} inside K, plus the inside-side boundary
// crossings located by bisection in theta.
std::vector<cplx> arc_points(const CompactDomain& K, cplx z0, double r, int angles) {
  std::vector<cplx> out;
  const double step = 2.0 * std::numbers::pi / angles;
  auto at = [&](double t) { return z0 + std::polar(r, t); };
  for (int m = 0; m < angles; ++m) {
    const double t0 = m * step, t1 = (m + 1) * step;
    const bool in0 = K.contains(at(t0)), in1 = K.contains(at(t1));
    if (in0) out.push_back(at(t0));
    if (in0 != in1) {
      double a = t0, b = t1;  // a keeps the side equal to in0
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (a + b);
        (K.contains(at(mid)) == in0 ? a : b) = mid;
      }
      out.push_back(at(in0 ? a : b));
    }
  }
  return out;
}

double width(const std::vector<cplx>& vs) {
  if (vs.empty()) return 0.0;
  double re0 = vs[0].real(), re1 = re0, im0 = vs[0].imag(), im1 = im0;
  for (cplx v : vs) {
    re0 = std::min(re0, v.real());
    re1 = std::max(re1, v.real());
    im0 = std::min(im0, v.imag());
    im1 = std::max(im1, v.imag());
  }
  return std::max(re1 - re0, im1 - im0);
}

ProbeEvidence arc_probe(const std::string& name, const Quantity& q, cplx z0, const CompactDomain& K,
                        const std::function<bool(cplx)>& excluded, const ProbeConfig& cfg) {
  ProbeEvidence ev;
  ev.quantity = name;
  ev.point = z0;
  double worst = 0.0;
  bool undecided = false;
  std::vector<double> ratios;
  for (double rho : {cfg.rho, cfg.rho / 2}) {
    std::vector<std::vector<cplx>> per_level(static_cast<std::size_t>(cfg.levels));
    double scale = 0.0;
    for (int k = 0; k < cfg.levels; ++k) {
      const double r = rho * std::ldexp(1.0, -k);
      for (cplx z : arc_points(K, z0, r, cfg.angles)) {
        if (excluded(z)) continue;
        const auto v = q(z, r);
        if (!v) continue;
        per_level[k].push_back(*v);
        scale = std::max(scale, std::abs(*v));
        ++ev.samples;
      }
    }
    std::vector<cplx> tail;
    for (int k = cfg.levels - 1; k >= 0; --k) {
      tail.insert(tail.end(), per_level[k].begin(), per_level[k].end());
      ev.radii.push_back(rho * std::ldexp(1.0, -k));
      ev.spreads.push_back(width(tail));
    }
    ev.scale = std::max(ev.scale, scale);
    std::vector<cplx> last;
    for (int k = std::max(0, cfg.levels - 3); k < cfg.levels; ++k)
      last.insert(last.end(), per_level[k].begin(), per_level[k].end());
    if (last.size() < 2) {
      undecided = true;
      ev.note = "fewer than two samples on the innermost arcs";
      continue;
    }
    const double ratio = scale > 0.0 ? width(last) / scale : 0.0;
    ratios.push_back(ratio);
    worst = std::max(worst, ratio);
  }
  ev.ratio = worst;
  if (undecided) {
    ev.verdict = Verdict::Inconclusive;
  } else if (std::all_of(ratios.begin(), ratios.end(), [&](double r) { return r <= cfg.pass; })) {
    ev.verdict = Verdict::Pass;
  } else if (std::all_of(ratios.begin(), ratios.end(), [&](double r) { return r >= cfg.fail; })) {
    ev.verdict = Verdict::Fail;
  } else {
    ev.verdict = Verdict::Inconclusive;
  }
  return ev;
}

struct Cluster {
  cplx point;
  std::size_t size = 0;
};

// Greedy grouping: each point joins the first representative within `radius`.
// A cluster's size counts every point within `radius` of its representative.
std::vector<Cluster> cluster_points(const std::vector<cplx>& pts, double radius) {
  std::vector<Cluster> out;
  for (cplx p : pts) {
    bool merged = false;
    for (auto& c : out)
      if (std::abs(c.point - p) <= radius) {
        merged = true;
        break;
      }
    if (!merged) out.push_back({p, 0});
  }
  for (auto& c : out)
    for (cplx p : pts)
      if (std::abs(c.point - p) <= radius) ++c.size;
  return out;
}

// An isolated zero thresholded at 1e-12 of the peak covers at most a few nodes.
constexpr std::size_t max_isolated_cluster = 4;

std::vector<cplx> zero_nodes(const std::vector<bool>& zero, const GridSpec& g) {
  std::vector<cplx> out;
  for (std::size_t k = 0; k < zero.size(); ++k)
    if (zero[k]) out.push_back(g.node(k));
  return out;
}

MaskPtr mask_for(const CompactDomain& d, double h) {
  return share(build_mask(d, GridSpec::covering(d.bounding_box(), h)));
}

Expr dx(const Expr& e) { return e.d() + e.dbar(); }
Expr dy(const Expr& e) { return Expr(cplx(0, 1)) * (e.d() - e.dbar()); }

Expr norm2_expr(const std::vector<Expr>& f) {
  Expr s;
  for (const auto& fj : f) s = s + fj * conj(fj);
  return s;
}

// Nodes where sum |f_j| <= 1e-12 max.
std::vector<bool> common_zeros(const std::vector<SampledField>& fs) {
  const auto& mask = *fs.front().mask;
  std::vector<double> s(mask.size(), 0.0);
  double peak = 0.0;
  for (std::size_t k = 0; k < mask.size(); ++k) {
    if (!mask.inside(k)) continue;
    for (const auto& fj : fs) s[k] += std::abs(fj[k]);
    peak = std::max(peak, s[k]);
  }
  std::vector<bool> z(mask.size(), false);
  for (std::size_t k = 0; k < mask.size(); ++k) z[k] = mask.inside(k) && s[k] <= 1e-12 * peak;
  return z;
}

}  // namespace

std::vector<bool> zero_set(const Expr& g, const MaskPtr& mask) {
  const CompiledExpr ge(g);
  const auto& grid = mask->grid();
  std::vector<double> mod(mask->size(), 0.0);
  std::vector<bool> undefined(mask->size(), false);
  double peak = 0.0;
  for (std::size_t k = 0; k < mask->size(); ++k) {
    if (!mask->inside(k)) continue;
    const auto v = checked(ge, grid.node(k));
    if (!v) {
      undefined[k] = true;
      continue;
    }
    mod[k] = std::abs(*v);
    peak = std::max(peak, mod[k]);
  }
  std::vector<bool> zero(mask->size(), false);
  for (std::size_t k = 0; k < mask->size(); ++k)
    zero[k] = mask->inside(k) && (undefined[k] || mod[k] <= 1e-12 * peak);
  return zero;
}

Expr quotient_expr(const Expr& f, const Expr& g, int power) {
  if (power < 1) throw ConfigError("division power must be >= 1");
  return pow(f, power) / g;
}

SampledField divide(const Expr& f, const Expr& g, int power, const MaskPtr& mask) {
  const Expr q = quotient_expr(f, g, power);
  const auto zero = zero_set(g, mask);
  const CompiledExpr fe(f), ge(g), qe(q);
  const auto& grid = mask->grid();
  SampledField h(mask);
  double worst = 0.0;
  std::size_t worst_node = 0;
  for (std::size_t k = 0; k < mask->size(); ++k) {
    if (!mask->inside(k) || zero[k]) continue;
    const cplx z = grid.node(k);
    const auto fv = checked(fe, z);
    if (!fv) throw PreconditionError("divide: f is undefined at " + describe_nodes(grid, {k}));
    const double excess = std::abs(*fv) - std::abs(ge(z)) * (1.0 + 1e-12);
    if (excess > worst) {
      worst = excess;
      worst_node = k;
    }
    const auto v = checked(qe, z);
    if (!v) throw NumericalError("divide: quotient is not finite at " + describe_nodes(grid, {k}));
    h[k] = *v;
  }
  if (worst > 1e-14) {
    std::ostringstream os;
    os << "divide: |f| <= |g| fails; worst excess " << worst << " at " << describe_nodes(grid, {worst_node});
    throw PreconditionError(os.str());
  }
  return h;
}

double decay_exponent(const SampledField& h, cplx z0) {
  const auto& g = h.grid();
  std::vector<double> radii, peaks;
  for (double mult : {8.0, 16.0, 32.0}) {
    const double r = mult * g.h;
    double m = 0.0;
    for (std::size_t k = 0; k < h.values.size(); ++k) {
      if (!h.mask->inside(k)) continue;
      const double d = std::abs(g.node(k) - z0);
      if (d > r / 2 && d <= r) m = std::max(m, std::abs(h[k]));
    }
    radii.push_back(r);
    peaks.push_back(m);
  }
  return loglog_slope(radii, peaks);
}

DivisionCertificate certify_class(const DivisionSpec& spec, SmoothClass claimed, double h,
                                  const ProbeConfig& cfg, std::vector<cplx> extra_points) {
  DivisionCertificate cert;
  cert.power = spec.power;
  cert.claimed = claimed;
  cert.h = h;
  const MaskPtr mask = mask_for(spec.domain, h);
  divide(spec.f, spec.g, spec.power, mask);  // precondition check

  const auto zero = zero_set(spec.g, mask);
  auto pts = zero_nodes(zero, mask->grid());
  for (cplx t : spec.domain.tagged_points()) pts.push_back(t);
  for (cplx t : extra_points) pts.push_back(t);
  const auto clusters = cluster_points(pts, 4.0 * h);

  const Expr q = quotient_expr(spec.f, spec.g, spec.power);
  const CompiledExpr ge(spec.g);
  double gmax = 0.0;
  for (std::size_t k = 0; k < mask->size(); ++k)
    if (mask->inside(k)) gmax = std::max(gmax, std::abs(ge.try_eval(mask->grid().node(k)).value_or(0.0)));
  const auto excluded = [&](cplx z) {
    const auto v = checked(ge, z);
    return !v || std::abs(*v) <= 1e-12 * gmax;
  };

  // Quantities per class; CompiledExpr objects must outlive the lambdas.
  std::vector<std::pair<std::string, Expr>> exprs = {{"h", q}};
  bool fd = false;
  switch (claimed) {
    case SmoothClass::C0:
    case SmoothClass::A0: break;
    case SmoothClass::C1: fd = true; break;
    case SmoothClass::A1: exprs.push_back({"h'", q.d()}); break;
    case SmoothClass::Dbar1:
      exprs.push_back({"dbar h", q.dbar()});
      exprs.push_back({"d dbar h", q.dbar().d()});
      exprs.push_back({"dbar dbar h", q.dbar().dbar()});
      break;
  }
  std::vector<CompiledExpr> compiled;
  compiled.reserve(exprs.size());
  for (const auto& e : exprs) compiled.emplace_back(e.second);
  std::vector<std::pair<std::string, Quantity>> quantities;
  for (std::size_t k = 0; k < exprs.size(); ++k) quantities.push_back({exprs[k].first, value_of(compiled[k])});
  if (fd) {
    quantities.push_back({"d/dx h", partial_x(compiled[0])});
    quantities.push_back({"d/dy h", partial_y(compiled[0])});
  }

  Verdict overall = Verdict::Pass;
  if (claimed == SmoothClass::A0 || claimed == SmoothClass::A1) {
    // Holomorphy off Z(g), measured with the symbolic dbar on Interior nodes.
    const CompiledExpr db(q.dbar());
    double worst = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < mask->size(); ++k) {
      if (!mask->interior(k) || zero[k]) continue;
      const cplx z = mask->grid().node(k);
      if (auto v = checked(db, z)) worst = std::max(worst, std::abs(*v));
      if (auto v = checked(compiled[0], z)) scale = std::max(scale, std::abs(*v));
    }
    ProbeEvidence ev;
    ev.quantity = "max |dbar h| off Z(g)";
    ev.scale = scale;
    ev.ratio = scale > 0.0 ? worst / scale : worst;
    ev.verdict = ev.ratio <= 1e-9 ? Verdict::Pass : Verdict::Fail;
    overall = combine(overall, ev.verdict);
    cert.evidence.push_back(ev);
  }

  if (clusters.empty()) cert.notes.push_back("g has no zeros on the grid; nothing to extend");
  const std::size_t max_points = 16;
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    if (c == max_points) {
      cert.notes.push_back("probed the first " + std::to_string(max_points) + " of " +
                           std::to_string(clusters.size()) + " zero clusters");
      overall = combine(overall, Verdict::Inconclusive);
      break;
    }
    cert.points.push_back(clusters[c].point);
    if (clusters[c].size > max_isolated_cluster) {
      // Z(g) with interior points: differentiability on its edge is not decided here.
      ProbeEvidence ev;
      ev.quantity = "zero set";
      ev.point = clusters[c].point;
      ev.note = "non-discrete zero set (" + std::to_string(clusters[c].size) + " nodes)";
      ev.verdict = Verdict::Inconclusive;
      overall = combine(overall, ev.verdict);
      cert.evidence.push_back(ev);
      continue;
    }
    for (const auto& [name, qf] : quantities) {
      auto ev = arc_probe(name, qf, clusters[c].point, spec.domain, excluded, cfg);
      overall = combine(overall, ev.verdict);
      cert.evidence.push_back(std::move(ev));
    }
  }
  cert.verdict = overall;
  return cert;
}

DerivativeBoundScan derivative_bound_scan(const Expr& f, const Expr& g, int m, int n,
                                          const CompactDomain& domain, std::vector<double> levels,
                                          DerivativeKind kind) {
  if (m < 0 || n < 0 || n > m) throw ConfigError("derivative_bound_scan needs 0 <= n <= m");
  if (levels.size() < 2) throw ConfigError("derivative_bound_scan needs at least two grid levels");
  if (kind == DerivativeKind::Holomorphic && !(f.holomorphic() && g.holomorphic()))
    throw PreconditionError("derivative_bound_scan: symbolic complex derivative needs holomorphic f and g");
  DerivativeBoundScan out;
  {
    // ||g|| <= 1 by rescaling both functions, which keeps |f| <= |g|.
    const auto coarse = mask_for(domain, levels.front());
    const double gmax = max_abs(sample_zero_extended(g, coarse, [&](std::size_t) { return false; }));
    out.rescale = std::max(1.0, gmax);
  }
  const Expr fs = f * Expr(1.0 / out.rescale), gs = g * Expr(1.0 / out.rescale);
  const Expr q = pow(fs, m + 2) / gs;
  std::vector<Expr> derivs;
  if (kind == DerivativeKind::Holomorphic) {
    Expr d = q;
    for (int k = 0; k < n; ++k) d = d.d();
    derivs.push_back(d);
  } else {
    for (int j1 = 0; j1 <= n; ++j1) {
      Expr d = q;
      for (int k = 0; k < j1; ++k) d = dx(d);
      for (int k = 0; k < n - j1; ++k) d = dy(d);
      derivs.push_back(d);
    }
  }
  std::vector<CompiledExpr> ds(derivs.begin(), derivs.end());
  const CompiledExpr ge(gs);
  const int expo = m + 1 - n;
  for (double h : levels) {
    const auto mask = mask_for(domain, h);
    divide(fs, gs, 1, mask);  // |f| <= |g| check
    const auto zero = zero_set(gs, mask);
    const auto keep = shrunk_interior(*mask, 1.0 / 16);
    double C = 0.0;
    std::size_t nodes = 0;
    for (std::size_t k = 0; k < keep.size(); ++k) {
      if (!keep[k] || zero[k]) continue;
      const cplx z = mask->grid().node(k);
      const double gv = std::abs(ge(z));
      for (const auto& d : ds) {
        const auto v = checked(d, z);
        if (!v) continue;
        C = std::max(C, std::abs(*v) / std::pow(gv, expo));
      }
      ++nodes;
    }
    out.h.push_back(h);
    out.C.push_back(C);
    out.nodes.push_back(nodes);
  }
  const double a = out.C[out.C.size() - 2], b = out.C.back();
  out.ratio = a > 0.0 ? b / a : (b == 0.0 ? 1.0 : std::numeric_limits<double>::infinity());
  out.stable = std::isfinite(b) && out.ratio >= 0.5 && out.ratio <= 2.0;
  return out;
}

MultiDivision multi_division_continuous(const Expr& h, const std::vector<Expr>& f, const MaskPtr& mask) {
  if (f.empty()) throw ConfigError("multi_division_continuous needs at least one generator");
  std::vector<SampledField> fs;
  for (const auto& fj : f) fs.push_back(sample(fj, mask));
  const auto hs = sample(h, mask);
  const auto& grid = mask->grid();
  std::vector<std::size_t> bad;
  for (std::size_t k = 0; k < mask->size(); ++k) {
    if (!mask->inside(k)) continue;
    double s = 0.0;
    for (const auto& fj : fs) s += std::abs(fj[k]);
    if (std::abs(hs[k]) > s * (1.0 + 1e-12) + 1e-300) bad.push_back(k);
  }
  if (!bad.empty()) throw PreconditionError("|h| > sum |f_j| at " + describe_nodes(grid, bad));

  MultiDivision out;
  const auto zero = common_zeros(fs);
  const Expr n2 = norm2_expr(f);
  for (const auto& fj : f) out.q.push_back(h * conj(fj) / n2);
  for (std::size_t j = 0; j < f.size(); ++j) {
    const auto qj = sample_zero_extended(out.q[j], mask, [&](std::size_t k) { return zero[k]; });
    out.max_q = std::max(out.max_q, max_abs(qj));
    SampledField gj(mask);
    for (std::size_t k = 0; k < mask->size(); ++k)
      if (mask->inside(k)) gj[k] = hs[k] * qj[k];
    out.g.push_back(std::move(gj));
  }
  for (std::size_t k = 0; k < mask->size(); ++k) {
    if (!mask->inside(k)) continue;
    if (zero[k]) {
      ++out.zero_nodes;
      continue;
    }
    cplx s;
    for (std::size_t j = 0; j < f.size(); ++j) s += out.g[j][k] * fs[j][k];
    out.residual = std::max(out.residual, std::abs(s - hs[k] * hs[k]));
  }
  return out;
}

C1Evidence multi_division_c1(const Expr& h, const std::vector<Expr>& f, const CompactDomain& domain,
                             std::vector<double> levels, int power, const ProbeConfig& cfg) {
  if (f.empty()) throw ConfigError("multi_division_c1 needs at least one generator");
  if (levels.empty()) throw ConfigError("multi_division_c1 needs at least one grid level");
  if (power < 1) throw ConfigError("multi_division_c1 power must be >= 1");
  C1Evidence out;
  const Expr n2 = norm2_expr(f);
  std::vector<Expr> q;
  for (const auto& fj : f) q.push_back(conj(fj) * pow(h, power) / n2);
  std::vector<CompiledExpr> qc(q.begin(), q.end());
  const CompiledExpr hc(h);

  std::vector<Cluster> clusters;
  for (std::size_t lv = 0; lv < levels.size(); ++lv) {
    const auto mask = mask_for(domain, levels[lv]);
    const auto& grid = mask->grid();
    std::vector<SampledField> fs;
    for (const auto& fj : f) fs.push_back(sample(fj, mask));
    const auto hs = sample(h, mask);
    std::vector<std::size_t> bad;
    for (std::size_t k = 0; k < mask->size(); ++k) {
      if (!mask->inside(k)) continue;
      double s = 0.0;
      for (const auto& fj : fs) s += std::abs(fj[k]);
      if (std::abs(hs[k]) > s * (1.0 + 1e-12) + 1e-300) bad.push_back(k);
    }
    if (!bad.empty()) throw PreconditionError("|h| > sum |f_j| at " + describe_nodes(grid, bad));
    const auto zero = common_zeros(fs);
    clusters = cluster_points(zero_nodes(zero, grid), 4.0 * levels[lv]);
    for (const auto& c : clusters)
      if (c.size > max_isolated_cluster)
        throw PreconditionError("multi_division_c1: common zero set is not discrete near (" +
                                std::to_string(c.point.real()) + ", " + std::to_string(c.point.imag()) + ")");

    std::vector<SampledField> qs;
    for (const auto& qj : q) qs.push_back(sample_zero_extended(qj, mask, [&](std::size_t k) { return zero[k]; }));
    if (lv + 1 == levels.size()) {
      MultiDivision md;
      md.q = q;
      md.zero_nodes = static_cast<std::size_t>(std::count(zero.begin(), zero.end(), true));
      for (std::size_t k = 0; k < mask->size(); ++k) {
        if (!mask->inside(k) || zero[k]) continue;
        cplx s;
        for (std::size_t j = 0; j < f.size(); ++j) s += qs[j][k] * fs[j][k];
        md.residual = std::max(md.residual, std::abs(s - std::pow(hs[k], power)));
      }
      md.g = qs;
      for (const auto& qj : qs) md.max_q = std::max(md.max_q, max_abs(qj));
      out.division = std::move(md);
    }
    // Gradient bound |D q_j| <= C |f| with central differences on Interior nodes.
    double C = 0.0;
    for (std::size_t k = 0; k < mask->size(); ++k) {
      if (!mask->interior(k) || zero[k]) continue;
      const int i = grid.col(k), r = grid.row(k);
      double nf = 0.0;
      for (const auto& fj : fs) nf += std::norm(fj[k]);
      nf = std::sqrt(nf);
      for (const auto& qj : qs) {
        const cplx ddx = (qj[grid.index(i + 1, r)] - qj[grid.index(i - 1, r)]) / (2.0 * grid.h);
        const cplx ddy = (qj[grid.index(i, r + 1)] - qj[grid.index(i, r - 1)]) / (2.0 * grid.h);
        C = std::max(C, std::max(std::abs(ddx), std::abs(ddy)) / nf);
      }
    }
    out.h.push_back(levels[lv]);
    out.C.push_back(C);
  }
  out.slope = out.h.size() >= 2 ? loglog_slope(out.h, out.C) : 0.0;

  Verdict v = Verdict::Pass;
  if (out.h.size() >= 2) {
    if (out.slope <= -0.75) v = Verdict::Fail;
    else if (out.slope < -0.25) v = Verdict::Inconclusive;
  }
  const CompiledExpr n2c(n2);
  const auto excluded = [&](cplx z) {
    const auto s = checked(n2c, z);
    return !s || s->real() == 0.0;
  };
  for (const auto& c : clusters)
    for (std::size_t j = 0; j < qc.size(); ++j) {
      const std::string tag = "q_" + std::to_string(j + 1);
      for (auto&& [name, quantity] : {std::pair<std::string, Quantity>{"d/dx " + tag, partial_x(qc[j])},
                                      std::pair<std::string, Quantity>{"d/dy " + tag, partial_y(qc[j])}}) {
        auto ev = arc_probe(name, quantity, c.point, domain, excluded, cfg);
        v = combine(v, ev.verdict);
        out.probes.push_back(std::move(ev));
      }
    }
  out.verdict = v;
  return out;
}

QuotientLemma quotient_extension_lemma(const Expr& g, const std::vector<Expr>& f, int power,
                                       const MaskPtr& mask, const ProbeConfig& cfg, bool check_hypothesis) {
  if (f.empty()) throw ConfigError("quotient_extension_lemma needs at least one generator");
  if (power < 1) throw ConfigError("quotient_extension_lemma power must be >= 1");
  if (check_hypothesis && power != 4 && power != 7)
    throw ConfigError("quotient_extension_lemma checks hypotheses for powers 4 and 7 only");
  const auto& grid = mask->grid();
  const Expr n2 = norm2_expr(f);
  const auto n2s = sample(n2, mask);
  const auto gs = sample(g, mask);
  if (check_hypothesis) {
    std::vector<std::size_t> bad;
    for (std::size_t k = 0; k < mask->size(); ++k) {
      if (!mask->inside(k)) continue;
      const double nf = std::sqrt(n2s[k].real());
      const double lhs = power == 4 ? std::abs(gs[k]) : std::norm(gs[k]);
      if (lhs > nf * (1.0 + 1e-12) + 1e-300) bad.push_back(k);
    }
    if (!bad.empty())
      throw PreconditionError(std::string(power == 4 ? "|g| <= |f|" : "|g|^2 <= |f|") + " fails at " +
                              describe_nodes(grid, bad));
  }
  QuotientLemma out;
  double peak = 0.0;
  for (std::size_t k = 0; k < mask->size(); ++k)
    if (mask->inside(k)) peak = std::max(peak, n2s[k].real());
  std::vector<bool> zero(mask->size(), false);
  for (std::size_t k = 0; k < mask->size(); ++k)
    zero[k] = mask->inside(k) && n2s[k].real() <= 1e-24 * peak;
  const Expr qe = pow(g, power) / n2;
  out.q = sample_zero_extended(qe, mask, [&](std::size_t k) { return zero[k]; });
  if (max_abs(gs) == 0.0) {
    out.verdict = Verdict::Pass;
    out.slope = std::numeric_limits<double>::infinity();
    return out;
  }
  const auto clusters = cluster_points(zero_nodes(zero, grid), 4.0 * grid.h);
  if (clusters.empty()) {
    out.verdict = Verdict::Pass;
    return out;
  }
  const CompiledExpr qc(qe);
  const auto dxq = partial_x(qc), dyq = partial_y(qc);
  // Slope of the max gradient against the arc radius, worst over the zeros.
  Verdict v = Verdict::Pass;
  double worst_slope = std::numeric_limits<double>::infinity();
  for (const auto& c : clusters) {
    if (c.size > max_isolated_cluster) {
      v = combine(v, Verdict::Inconclusive);
      continue;
    }
    out.points.push_back(c.point);
    std::vector<double> radii, peaks;
    for (int k = 0; k < cfg.levels; ++k) {
      const double r = cfg.rho * std::ldexp(1.0, -k);
      double m = 0.0;
      for (cplx z : arc_points(CompactDomain::disk(c.point, 1e300), c.point, r, cfg.angles)) {
        for (const auto& d : {dxq(z, r), dyq(z, r)})
          if (d) m = std::max(m, std::abs(*d));
      }
      radii.push_back(r);
      peaks.push_back(m);
    }
    const double s = loglog_slope(radii, peaks);
    if (s < worst_slope) {
      worst_slope = s;
      out.radii = radii;
      out.max_gradient = peaks;
    }
  }
  out.slope = worst_slope;
  if (std::isnan(worst_slope)) v = combine(v, Verdict::Inconclusive);
  else if (worst_slope < 0.2) v = combine(v, Verdict::Fail);
  else if (worst_slope < 0.8) v = combine(v, Verdict::Inconclusive);
  out.verdict = v;
  return out;
}

std::optional<int> smallest_passing_power(const std::vector<Expr>& f, int lo, int hi, const MaskPtr& mask,
                                          const ProbeConfig& cfg) {
  quotient_extension_lemma(Expr::z(), f, 7, mask, cfg, true);  // |g|^2 <= |f|
  for (int p = lo; p <= hi; ++p)
    if (quotient_extension_lemma(Expr::z(), f, p, mask, cfg, false).verdict == Verdict::Pass) return p;
  return std::nullopt;
}

std::vector<SharpnessRow> sharpness_battery(double h, const ProbeConfig& cfg) {
  const Expr Z = Expr::z(), ZB = Expr::zbar(), S = Expr::atomic_inner(), one(1.0);
  const auto disk = CompactDomain::disk({0, 0}, 1.0);
  std::vector<SharpnessRow> rows;

  auto division_row = [&](const std::string& item, SmoothClass cls, const Expr& f, const Expr& g, int N,
                          const CompactDomain& K) {
    SharpnessRow row;
    row.item = item;
    row.claim = to_string(cls);
    row.power = N;
    const auto at = certify_class({f, g, N, K}, cls, h, cfg);
    const auto below = certify_class({f, g, N - 1, K}, cls, h, cfg);
    row.at_power = at.verdict;
    row.below = below.verdict;
    std::ostringstream os;
    double worst_below = 0.0, worst_at = 0.0;
    for (const auto& e : at.evidence) worst_at = std::max(worst_at, e.ratio);
    for (const auto& e : below.evidence) worst_below = std::max(worst_below, e.ratio);
    os << "max spread ratio " << worst_at << " at N, " << worst_below << " at N-1";
    row.detail = os.str();
    row.ok = row.at_power == Verdict::Pass && row.below == Verdict::Fail;
    rows.push_back(row);
  };

  const Expr fa = (one - Z) * S, ga = one - Z;
  division_row("a", SmoothClass::C0, fa, ga, 2, disk);
  division_row("b", SmoothClass::C1, Z, ZB, 3, disk);
  division_row("c", SmoothClass::A0, fa, ga, 2, disk);
  {
    division_row("d", SmoothClass::A1, Z, Expr::sector_corner_conj(), 3, CompactDomain::sector_chain(8));
    // Directional tails of Delta = (z^2/g)' at the corners C_n and conj(C_n).
    std::vector<double> radii;
    for (int n = 1; n <= 8; ++n) radii.push_back(std::pow(4.0, -n));
    const auto delta = quotient_expr(Z, Expr::sector_corner_conj(), 2).d();
    const auto p = directional_limit_probe(
        delta, 0.0, {std::polar(1.0, std::numbers::pi / 4), std::polar(1.0, -std::numbers::pi / 4)}, radii);
    std::ostringstream os;
    const auto tidy = [](const std::optional<cplx>& v) {
      const auto c = [](double x) { return std::abs(x) < 1e-9 ? 0.0 : x; };
      std::ostringstream t;
      if (v) t << "(" << c(v->real()) << "," << c(v->imag()) << ")";
      else t << "undefined";
      return t.str();
    };
    os << rows.back().detail << "; Delta tails " << tidy(p.tails[0]) << " vs " << tidy(p.tails[1]);
    rows.back().detail = os.str();
    rows.back().ok = rows.back().ok && p.limits_disagree;
  }
  division_row("e", SmoothClass::A1, pow(one - Z, 3) * S, pow(one - Z, 3), 2, disk);
  division_row("f", SmoothClass::Dbar1, Z, ZB, 4, disk);

  {
    SharpnessRow row;
    row.item = "power-4 lemma";
    row.claim = "C1 extension of g^N/|f|^2";
    row.power = 4;
    const auto mask = mask_for(disk, h);
    const auto at = quotient_extension_lemma(Z, {ZB}, 4, mask, cfg);
    const auto below = quotient_extension_lemma(Z, {ZB}, 3, mask, cfg, false);
    row.at_power = at.verdict;
    row.below = below.verdict;
    std::ostringstream os;
    os << "gradient decay slope " << at.slope << " at N, " << below.slope << " at N-1";
    row.detail = os.str();
    row.ok = row.at_power == Verdict::Pass && row.below == Verdict::Fail;
    rows.push_back(row);
  }
  {
    SharpnessRow row;
    row.item = "h^3 in C^1";
    row.claim = "C1 multi-division";
    row.power = 3;
    const std::vector<double> levels = {h, h / 2, h / 4};
    const auto at = multi_division_c1(Z, {ZB}, disk, levels, 3, cfg);
    const auto below = multi_division_c1(Z, {ZB}, disk, levels, 2, cfg);
    row.at_power = at.verdict;
    row.below = below.verdict;
    std::ostringstream os;
    os << "gradient-bound slope " << at.slope << " at N, " << below.slope << " at N-1";
    row.detail = os.str();
    row.ok = row.at_power == Verdict::Pass && row.below == Verdict::Fail;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace dbarlab

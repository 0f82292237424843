#include "dbarlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <queue>
#include <sstream>

#include "dbarlab/study.hpp"

namespace dbarlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

std::string point_str(cplx z) {
  std::ostringstream os;
  os << "(" << z.real() << ", " << z.imag() << ")";
  return os.str();
}

// Multi-source Dijkstra over Interior nodes, stopping once every target is settled.
struct Search {
  std::vector<double> dist;
  std::vector<std::uint32_t> pred;
};

Search dijkstra(const RegionMask& mask, const std::vector<std::size_t>& sources,
                const std::vector<std::size_t>& targets) {
  const auto& g = mask.grid();
  Search s{std::vector<double>(mask.size(), kInf), std::vector<std::uint32_t>(mask.size(), kNone)};
  using Item = std::pair<double, std::size_t>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
  for (auto k : sources) {
    s.dist[k] = 0.0;
    queue.push({0.0, k});
  }
  std::vector<bool> is_target(mask.size(), false);
  std::size_t remaining = 0;
  for (auto k : targets)
    if (!is_target[k]) {
      is_target[k] = true;
      ++remaining;
    }
  const double diag = g.h * std::numbers::sqrt2;
  while (!queue.empty() && remaining > 0) {
    const auto [d, k] = queue.top();
    queue.pop();
    if (d > s.dist[k]) continue;
    if (is_target[k]) {
      is_target[k] = false;
      --remaining;
    }
    const int i = g.col(k), j = g.row(k);
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        if (di == 0 && dj == 0) continue;
        const int a = i + di, b = j + dj;
        if (a < 0 || b < 0 || a >= g.nx || b >= g.ny) continue;
        const std::size_t n = g.index(a, b);
        if (!mask.interior(n)) continue;
        const double nd = d + (di != 0 && dj != 0 ? diag : g.h);
        if (nd < s.dist[n]) {
          s.dist[n] = nd;
          s.pred[n] = static_cast<std::uint32_t>(k);
          queue.push({nd, n});
        }
      }
  }
  return s;
}

// Interior node nearest to z within `cells` cells (ties by index).
std::optional<std::size_t> nearest_interior(const RegionMask& mask, cplx z, int cells) {
  const auto& g = mask.grid();
  const auto c = g.nearest(z);
  const int ci = c ? g.col(*c) : static_cast<int>(std::lround((z.real() - g.origin.real()) / g.h));
  const int cj = c ? g.row(*c) : static_cast<int>(std::lround((z.imag() - g.origin.imag()) / g.h));
  std::optional<std::size_t> best;
  double best_d = kInf;
  for (int j = cj - cells; j <= cj + cells; ++j)
    for (int i = ci - cells; i <= ci + cells; ++i) {
      if (i < 0 || j < 0 || i >= g.nx || j >= g.ny) continue;
      const std::size_t k = g.index(i, j);
      if (!mask.interior(k)) continue;
      const double d = std::abs(g.node(k) - z);
      if (d > cells * g.h) continue;
      if (d < best_d || (d == best_d && k < *best)) {
        best_d = d;
        best = k;
      }
    }
  return best;
}

}  // namespace

PathResult interior_shortest_path(const RegionMask& mask, cplx z, cplx z0) {
  const auto& g = mask.grid();
  const auto start = g.nearest(z);
  if (!start || !mask.interior(*start))
    throw PreconditionError("path start " + point_str(z) + " is not on an Interior node");
  std::size_t goal;
  if (auto n = g.nearest(z0); n && mask.interior(*n)) {
    goal = *n;
  } else if (auto m = nearest_interior(mask, z0, 3)) {
    goal = *m;
  } else {
    throw PreconditionError("no Interior node within 3 cells of " + point_str(z0));
  }
  const auto s = dijkstra(mask, {*start}, {goal});
  if (!std::isfinite(s.dist[goal]))
    throw NumericalError("disconnected at this resolution: no interior path from " + point_str(z) + " to " +
                         point_str(z0));
  PathResult r;
  r.z = z;
  r.z0 = z0;
  for (std::size_t k = goal;; k = s.pred[k]) {
    r.nodes.push_back(k);
    if (k == *start) break;
  }
  std::reverse(r.nodes.begin(), r.nodes.end());
  r.length = std::abs(z - g.node(*start)) + s.dist[goal] + std::abs(g.node(goal) - z0);
  const double straight = std::abs(z - z0);
  r.ratio = straight > 0.0 ? r.length / straight : 1.0;
  return r;
}

const char* to_string(LVerdict v) {
  switch (v) {
    case LVerdict::Bounded: return "bounded";
    case LVerdict::Growing: return "growing";
    case LVerdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

LProbeReport l_probe(const CompactDomain& domain, cplx z0, std::vector<double> scales, int samples_per_scale,
                     double h, double landing) {
  if (!(h > 0.0)) throw ConfigError("grid spacing must be positive");
  const auto mask = share(build_mask(domain, GridSpec::covering(domain.bounding_box(), h)));
  return l_probe(mask, z0, std::move(scales), samples_per_scale, landing);
}

LProbeReport l_probe(const MaskPtr& mask, cplx z0, std::vector<double> scales, int samples_per_scale,
                     double landing) {
  if (scales.empty()) throw ConfigError("l_probe needs at least one scale");
  if (samples_per_scale < 1) throw ConfigError("l_probe needs at least one sample per scale");
  if (!(landing > 0.0 && landing < 1.0)) throw ConfigError("landing fraction must lie in (0, 1)");
  std::sort(scales.begin(), scales.end(), std::greater<>());
  const auto& g = mask->grid();
  LProbeReport rep;
  rep.z0 = z0;
  rep.h = g.h;
  rep.landing = landing;

  for (double r : scales) {
    if (!(r > 0.0)) throw ConfigError("scales must be positive");
    LScale sc;
    sc.r = r;
    sc.max_ratio = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::pair<cplx, std::size_t>> samples;
    for (int m = 0; m < samples_per_scale; ++m) {
      const cplx z = z0 + std::polar(r, 2.0 * std::numbers::pi * m / samples_per_scale);
      const auto n = g.nearest(z);
      if (n && mask->interior(*n)) samples.push_back({z, *n});
    }
    sc.samples = samples.size();
    if (samples.empty()) {
      sc.note = "no interior samples on this circle";
      rep.scales.push_back(sc);
      continue;
    }
    const double ball = landing * r;
    std::vector<std::size_t> sources;
    const int reach = static_cast<int>(std::ceil(ball / g.h)) + 1;
    const int ci = static_cast<int>(std::lround((z0.real() - g.origin.real()) / g.h));
    const int cj = static_cast<int>(std::lround((z0.imag() - g.origin.imag()) / g.h));
    for (int j = std::max(0, cj - reach); j <= std::min(g.ny - 1, cj + reach); ++j)
      for (int i = std::max(0, ci - reach); i <= std::min(g.nx - 1, ci + reach); ++i) {
        const std::size_t k = g.index(i, j);
        if (mask->interior(k) && std::abs(g.node(k) - z0) <= ball) sources.push_back(k);
      }
    if (sources.empty())
      throw NumericalError("disconnected at this resolution: no Interior node within " + std::to_string(ball) +
                           " of " + point_str(z0));
    std::vector<std::size_t> targets;
    for (const auto& s : samples) targets.push_back(s.second);
    const auto search = dijkstra(*mask, sources, targets);
    double worst = 0.0;
    for (const auto& [z, k] : samples) {
      if (!std::isfinite(search.dist[k]))
        throw NumericalError("disconnected at this resolution: no interior path from " + point_str(z) + " toward " +
                             point_str(z0));
      worst = std::max(worst, (std::abs(z - g.node(k)) + search.dist[k] + ball) / r);
    }
    sc.max_ratio = worst;
    rep.scales.push_back(sc);
  }

  std::vector<double> ratios;
  for (const auto& sc : rep.scales)
    if (std::isfinite(sc.max_ratio)) ratios.push_back(sc.max_ratio);
  if (ratios.size() >= 2) {
    const auto [lo, hi] = std::minmax_element(ratios.begin(), ratios.end());
    bool growing = true;
    for (std::size_t k = 1; k < ratios.size(); ++k) growing = growing && ratios[k] >= 1.5 * ratios[k - 1];
    if (growing) rep.verdict = LVerdict::Growing;
    else if (*hi <= 1.2 * *lo) rep.verdict = LVerdict::Bounded;
  }
  return rep;
}

namespace {

double factorial(int n) {
  double r = 1.0;
  for (int k = 2; k <= n; ++k) r *= k;
  return r;
}

// Direction into K from z0: center of the longest run of angles whose rays
// stay in K down to 1e-8.
cplx inward_direction(const CompactDomain& K, cplx z0) {
  const int n = 64;
  std::vector<bool> ok(n);
  for (int m = 0; m < n; ++m) {
    const cplx d = std::polar(1.0, 2.0 * std::numbers::pi * m / n);
    ok[m] = true;
    for (double t : {1e-2, 1e-4, 1e-6, 1e-8}) ok[m] = ok[m] && K.contains(z0 + t * d);
  }
  int best_start = -1, best_len = 0;
  for (int s = 0; s < n; ++s) {
    if (!ok[s] || ok[(s + n - 1) % n]) continue;
    int len = 0;
    while (len < n && ok[(s + len) % n]) ++len;
    if (len > best_len) {
      best_len = len;
      best_start = s;
    }
  }
  if (best_start < 0 && ok[0]) return 1.0;  // every direction works
  if (best_start < 0) throw PreconditionError("no ray from " + point_str(z0) + " stays inside the domain");
  return std::polar(1.0, 2.0 * std::numbers::pi * (best_start + 0.5 * (best_len - 1)) / n);
}

cplx extension_at(const CompiledExpr& e, const Expr& source, cplx z0, cplx dir) {
  if (auto v = e.try_eval(z0); v && std::isfinite(v->real()) && std::isfinite(v->imag())) return *v;
  std::vector<cplx> vals;
  for (int k = 2; k <= 12; ++k) {
    auto v = e.try_eval(z0 + std::pow(10.0, -k) * dir);
    if (!v || !std::isfinite(v->real()) || !std::isfinite(v->imag()))
      throw PreconditionError("'" + source.str() + "' is undefined next to " + point_str(z0));
    vals.push_back(*v);
  }
  // Successive differences must shrink geometrically for a limit to exist.
  for (std::size_t k = vals.size() - 5; k + 2 < vals.size(); ++k)
    if (std::abs(vals[k + 2] - vals[k + 1]) > 0.9 * std::abs(vals[k + 1] - vals[k]))
      throw PreconditionError("'" + source.str() + "' has no limit at " + point_str(z0));
  return vals.back();
}

}  // namespace

TaylorReport taylor_remainder_fit(const Expr& f, cplx z0, int m, const CompactDomain& domain, double rho, int levels,
                                  int angles) {
  if (m < 0) throw ConfigError("Taylor order must be >= 0");
  if (!(rho > 0.0) || levels < 2 || angles < 4) throw ConfigError("bad Taylor sampling parameters");
  if (!f.holomorphic()) throw PreconditionError("Taylor remainder needs a holomorphic expression");
  TaylorReport rep;
  rep.z0 = z0;
  rep.m = m;
  std::vector<Expr> d = {f};
  for (int k = 1; k <= m; ++k) d.push_back(d.back().d());
  std::vector<CompiledExpr> dc(d.begin(), d.end());
  const cplx dir = inward_direction(domain, z0);
  for (int k = 0; k <= m; ++k) rep.derivatives.push_back(extension_at(dc[k], d[k], z0, dir));

  std::vector<double> radii;
  std::vector<std::vector<cplx>> arcs;
  for (int k = 0; k < levels; ++k) {
    const double r = rho * std::ldexp(1.0, -k);
    std::vector<cplx> pts;
    for (int a = 0; a < angles; ++a) {
      const cplx z = z0 + std::polar(r, 2.0 * std::numbers::pi * a / angles);
      if (domain.contains(z)) pts.push_back(z);
    }
    radii.push_back(r);
    arcs.push_back(std::move(pts));
  }

  rep.pass = true;
  for (int j = 0; j <= m; ++j) {
    TaylorRemainder tr;
    tr.j = j;
    tr.radii = radii;
    double scale = 1.0;
    for (std::size_t k = 0; k < radii.size(); ++k) {
      double worst = 0.0;
      for (cplx z : arcs[k]) {
        const auto v = dc[j].try_eval(z);
        if (!v) continue;
        cplx p = 0.0;
        for (int i = j; i <= m; ++i) p += rep.derivatives[i] * std::pow(z - z0, i - j) / factorial(i - j);
        worst = std::max(worst, std::abs(*v - p));
        scale = std::max(scale, std::abs(*v));
      }
      tr.max_abs.push_back(worst);
    }
    tr.exact = std::all_of(tr.max_abs.begin(), tr.max_abs.end(), [&](double v) { return v <= 1e-12 * scale; });
    tr.slope = tr.exact ? kInf : loglog_slope(tr.radii, tr.max_abs);
    tr.pass = tr.exact || (std::isfinite(tr.slope) && tr.slope >= (m - j) - 0.2);
    rep.pass = rep.pass && tr.pass;
    rep.remainders.push_back(std::move(tr));
  }

  if (m >= 1) {
    std::vector<double> dev;
    for (const auto& pts : arcs) {
      double worst = 0.0;
      for (cplx z : pts)
        if (auto v = dc[0].try_eval(z)) worst = std::max(worst, std::abs(rep.derivatives[1] - (*v - rep.derivatives[0]) / (z - z0)));
      dev.push_back(worst);
    }
    const double s = loglog_slope(radii, dev);
    if (std::isfinite(s)) rep.quotient_slope = s;
  }
  return rep;
}

std::vector<ChainQuotient> disk_chain_quotient_demo(int count) {
  if (count < 3) throw ConfigError("disk_chain_quotient_demo needs count >= 3");
  // f is locally constant: 1/sqrt(n) on D_n and 0 on the big disk.
  auto f = [count](cplx z) -> double {
    const auto n = disk_chain_index(z, count);
    if (!n) throw PreconditionError("point " + point_str(z) + " is outside the disk chain");
    return *n == 0 ? 0.0 : 1.0 / std::sqrt(static_cast<double>(*n));
  };
  std::vector<ChainQuotient> rows;
  for (int n = 3; n <= count + 2; ++n) {
    ChainQuotient row;
    row.n = n;
    const double x = 1.0 / n;
    row.quotient = (f(x) - f(0.0)) / (x - 0.0);
    row.sqrt_n = std::sqrt(static_cast<double>(n));
    row.interior_derivative = std::abs(Expr(f(x)).d().eval(x));
    rows.push_back(row);
  }
  return rows;
}

}  // namespace dbarlab

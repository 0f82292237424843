#include "dbarlab/domain.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <istream>
#include <ostream>
#include <sstream>
#include <variant>

namespace dbarlab {

namespace {

constexpr double kPi = std::numbers::pi;

struct DiskShape {
  cplx center;
  double radius;
};
struct UnionShape {
  std::vector<CompactDomain> parts;
};
struct AnnulusSectorShape {
  double r_in, r_out, half_angle;
};
struct SectorChainShape {
  int count;
};
struct DiskChainShape {
  int count;
};
struct CombShape {
  CompactDomain::CombParams p;
};
struct SpiralShape {
  double theta_max;
};
struct PolygonShape {
  std::vector<cplx> vertices;
};

bool in_rect(cplx z, double x0, double x1, double y0, double y1) {
  return z.real() >= x0 && z.real() <= x1 && z.imag() >= y0 && z.imag() <= y1;
}

double comb_width(const CompactDomain::CombParams& p, int n) {
  return p.width_factor * (1.0 / n - 1.0 / (n + 1));
}

bool on_segment(cplx p, cplx a, cplx b) {
  const cplx ab = b - a;
  const cplx ap = p - a;
  const double cross = ab.real() * ap.imag() - ab.imag() * ap.real();
  const double scale = std::abs(ab) * std::abs(ap);
  if (std::abs(cross) > 1e-14 * std::max(scale, 1e-300)) return false;
  const double dot = ab.real() * ap.real() + ab.imag() * ap.imag();
  return dot >= 0.0 && dot <= std::norm(ab);
}

}  // namespace

struct CompactDomain::Shape {
  std::variant<DiskShape, UnionShape, AnnulusSectorShape, SectorChainShape, DiskChainShape,
               CombShape, SpiralShape, PolygonShape>
      v;
};

CompactDomain::CompactDomain(std::shared_ptr<const Shape> shape) : shape_(std::move(shape)) {}

CompactDomain CompactDomain::disk(cplx center, double radius) {
  if (!(radius > 0.0)) throw ConfigError("disk radius must be positive");
  return CompactDomain(std::make_shared<Shape>(Shape{DiskShape{center, radius}}));
}

CompactDomain CompactDomain::union_of(std::vector<CompactDomain> parts) {
  if (parts.empty()) throw ConfigError("union needs at least one part");
  return CompactDomain(std::make_shared<Shape>(Shape{UnionShape{std::move(parts)}}));
}

CompactDomain CompactDomain::annulus_sector(double r_in, double r_out, double half_angle) {
  if (!(r_in >= 0.0 && r_out > r_in && half_angle > 0.0 && half_angle <= kPi))
    throw ConfigError("annulus_sector needs 0 <= r_in < r_out and 0 < half_angle <= pi");
  return CompactDomain(
      std::make_shared<Shape>(Shape{AnnulusSectorShape{r_in, r_out, half_angle}}));
}

CompactDomain CompactDomain::sector_chain(int count) {
  if (count < 1) throw ConfigError("sector_chain count must be >= 1");
  return CompactDomain(std::make_shared<Shape>(Shape{SectorChainShape{count}}));
}

CompactDomain CompactDomain::disk_chain(int count) {
  if (count < 1) throw ConfigError("disk_chain count must be >= 1");
  return CompactDomain(std::make_shared<Shape>(Shape{DiskChainShape{count}}));
}

CompactDomain CompactDomain::comb(CombParams params) {
  if (params.count < 1 || !(params.height > 0.0) || !(params.base > 0.0) ||
      !(params.width_factor > 0.0 && params.width_factor < 1.0))
    throw ConfigError("comb needs count >= 1, positive height/base, width_factor in (0,1)");
  return CompactDomain(std::make_shared<Shape>(Shape{CombShape{params}}));
}

CompactDomain CompactDomain::inner_spiral(double theta_max) {
  if (!(theta_max > kPi)) throw ConfigError("inner_spiral theta_max must exceed pi");
  return CompactDomain(std::make_shared<Shape>(Shape{SpiralShape{theta_max}}));
}

CompactDomain CompactDomain::polygon(std::vector<cplx> vertices) {
  if (vertices.size() < 3) throw ConfigError("polygon needs at least 3 vertices");
  return CompactDomain(std::make_shared<Shape>(Shape{PolygonShape{std::move(vertices)}}));
}

CompactDomain::Kind CompactDomain::kind() const {
  return static_cast<Kind>(shape_->v.index());
}

int CompactDomain::count() const {
  if (auto* s = std::get_if<SectorChainShape>(&shape_->v)) return s->count;
  if (auto* s = std::get_if<DiskChainShape>(&shape_->v)) return s->count;
  if (auto* s = std::get_if<CombShape>(&shape_->v)) return s->p.count;
  return 0;
}

double CompactDomain::theta_max() const {
  if (auto* s = std::get_if<SpiralShape>(&shape_->v)) return s->theta_max;
  return 0.0;
}

bool CompactDomain::contains(cplx z) const {
  struct Visitor {
    cplx z;
    bool operator()(const DiskShape& s) const { return std::abs(z - s.center) <= s.radius; }
    bool operator()(const UnionShape& s) const {
      return std::any_of(s.parts.begin(), s.parts.end(),
                         [this](const CompactDomain& d) { return d.contains(z); });
    }
    bool operator()(const AnnulusSectorShape& s) const {
      const double r = std::abs(z);
      if (r < s.r_in || r > s.r_out) return false;
      if (r == 0.0) return true;
      return std::abs(std::arg(z)) <= s.half_angle;
    }
    bool operator()(const SectorChainShape& s) const {
      if (z == cplx(0.0, 0.0)) return true;
      auto n = sector_chain_index(z);
      return n && *n <= s.count;
    }
    bool operator()(const DiskChainShape& s) const {
      return disk_chain_index(z, s.count).has_value();
    }
    bool operator()(const CombShape& s) const {
      const auto& p = s.p;
      const double x_end = 1.0 + 0.5 * comb_width(p, 1);
      if (in_rect(z, 0.0, x_end, -p.base, 0.0)) return true;
      if (z.real() == 0.0 && z.imag() >= 0.0 && z.imag() <= p.height) return true;
      if (z.imag() < 0.0 || z.imag() > p.height || z.real() <= 0.0) return false;
      // Teeth are disjoint; only the tooth nearest to x can contain z.
      const int n_guess = static_cast<int>(std::lround(1.0 / z.real()));
      for (int n = std::max(1, n_guess - 1); n <= std::min(p.count, n_guess + 1); ++n) {
        const double w = comb_width(p, n);
        if (std::abs(z.real() - 1.0 / n) <= 0.5 * w) return true;
      }
      return false;
    }
    bool operator()(const SpiralShape& s) const {
      const double r = std::abs(z);
      if (r == 0.0) return false;
      const double phi = std::arg(z);
      // theta = phi + 2 pi k must satisfy 1/r - 1 <= theta <= 1/r.
      const double lo = std::max(1.0 / r - 1.0, kPi);
      const double hi = std::min(1.0 / r, s.theta_max);
      if (lo > hi) return false;
      const double k0 = std::ceil((lo - phi) / (2.0 * kPi));
      for (double k = k0;; k += 1.0) {
        const double theta = phi + 2.0 * kPi * k;
        if (theta > hi) break;
        if (1.0 / (theta + 1.0) <= r && r <= 1.0 / theta) return true;
      }
      return false;
    }
    bool operator()(const PolygonShape& s) const {
      const auto& v = s.vertices;
      bool in = false;
      for (std::size_t a = 0, b = v.size() - 1; a < v.size(); b = a++) {
        if (on_segment(z, v[b], v[a])) return true;
        const bool crosses = (v[a].imag() > z.imag()) != (v[b].imag() > z.imag());
        if (crosses) {
          const double x = v[a].real() + (z.imag() - v[a].imag()) * (v[b].real() - v[a].real()) /
                                             (v[b].imag() - v[a].imag());
          if (z.real() < x) in = !in;
        }
      }
      return in;
    }
  };
  return std::visit(Visitor{z}, shape_->v);
}

BoundingBox CompactDomain::bounding_box() const {
  struct Visitor {
    BoundingBox operator()(const DiskShape& s) const {
      return {s.center - cplx(s.radius, s.radius), s.center + cplx(s.radius, s.radius)};
    }
    BoundingBox operator()(const UnionShape& s) const {
      BoundingBox box = s.parts.front().bounding_box();
      for (const auto& d : s.parts) {
        const auto b = d.bounding_box();
        box.lo = {std::min(box.lo.real(), b.lo.real()), std::min(box.lo.imag(), b.lo.imag())};
        box.hi = {std::max(box.hi.real(), b.hi.real()), std::max(box.hi.imag(), b.hi.imag())};
      }
      return box;
    }
    BoundingBox operator()(const AnnulusSectorShape& s) const {
      const double y = s.half_angle >= kPi / 2 ? s.r_out : s.r_out * std::sin(s.half_angle);
      const double x_lo = s.half_angle >= kPi / 2 ? s.r_out * std::cos(s.half_angle)
                                                  : s.r_in * std::cos(s.half_angle);
      return {cplx(x_lo, -y), cplx(s.r_out, y)};
    }
    BoundingBox operator()(const SectorChainShape&) const {
      const double r = 0.25;
      return {cplx(0.0, -r * std::sin(kPi / 4)), cplx(r, r * std::sin(kPi / 4))};
    }
    BoundingBox operator()(const DiskChainShape&) const {
      const double x_hi = 1.0 / 3.0 + 1.0 / 27.0;
      return {cplx(-2.0, -1.0), cplx(x_hi, 1.0)};
    }
    BoundingBox operator()(const CombShape& s) const {
      return {cplx(0.0, -s.p.base), cplx(1.0 + 0.5 * comb_width(s.p, 1), s.p.height)};
    }
    BoundingBox operator()(const SpiralShape&) const {
      const double r = 1.0 / kPi;
      return {cplx(-r, -r), cplx(r, r)};
    }
    BoundingBox operator()(const PolygonShape& s) const {
      BoundingBox box{s.vertices.front(), s.vertices.front()};
      for (cplx v : s.vertices) {
        box.lo = {std::min(box.lo.real(), v.real()), std::min(box.lo.imag(), v.imag())};
        box.hi = {std::max(box.hi.real(), v.real()), std::max(box.hi.imag(), v.imag())};
      }
      return box;
    }
  };
  return std::visit(Visitor{}, shape_->v);
}

std::vector<cplx> CompactDomain::tagged_points() const {
  struct Visitor {
    std::vector<cplx> operator()(const UnionShape& s) const {
      std::vector<cplx> out;
      for (const auto& d : s.parts) {
        auto t = d.tagged_points();
        out.insert(out.end(), t.begin(), t.end());
      }
      return out;
    }
    std::vector<cplx> operator()(const SectorChainShape&) const { return {cplx(0.0, 0.0)}; }
    std::vector<cplx> operator()(const DiskChainShape&) const { return {cplx(0.0, 0.0)}; }
    std::vector<cplx> operator()(const SpiralShape&) const { return {cplx(0.0, 0.0)}; }
    std::vector<cplx> operator()(const CombShape& s) const {
      return {cplx(0.0, 0.5 * s.p.height)};
    }
    std::vector<cplx> operator()(const DiskShape&) const { return {}; }
    std::vector<cplx> operator()(const AnnulusSectorShape&) const { return {}; }
    std::vector<cplx> operator()(const PolygonShape&) const { return {}; }
  };
  return std::visit(Visitor{}, shape_->v);
}

std::string CompactDomain::describe() const {
  std::ostringstream os;
  struct Visitor {
    std::ostringstream& os;
    void operator()(const DiskShape& s) const {
      os << "disk:" << s.center.real() << ',' << s.center.imag() << ',' << s.radius;
    }
    void operator()(const UnionShape& s) const {
      os << "union:";
      for (std::size_t k = 0; k < s.parts.size(); ++k) os << (k ? "|" : "") << s.parts[k].describe();
    }
    void operator()(const AnnulusSectorShape& s) const {
      os << "annulus_sector:" << s.r_in << ',' << s.r_out << ',' << s.half_angle;
    }
    void operator()(const SectorChainShape& s) const { os << "sector_chain:" << s.count; }
    void operator()(const DiskChainShape& s) const { os << "disk_chain:" << s.count; }
    void operator()(const CombShape& s) const {
      os << "comb:" << s.p.count << ',' << s.p.height << ',' << s.p.base << ',' << s.p.width_factor;
    }
    void operator()(const SpiralShape& s) const { os << "inner_spiral:" << s.theta_max; }
    void operator()(const PolygonShape& s) const {
      os << "polygon:";
      for (std::size_t k = 0; k < s.vertices.size(); ++k)
        os << (k ? "," : "") << s.vertices[k].real() << ',' << s.vertices[k].imag();
    }
  };
  std::visit(Visitor{os}, shape_->v);
  return os.str();
}

std::optional<int> sector_chain_index(cplx z) {
  const double r = std::abs(z);
  if (r == 0.0 || r > 0.25) return std::nullopt;
  if (std::abs(std::arg(z)) > kPi / 4) return std::nullopt;
  // 4^-n / 2 <= r <= 4^-n  <=>  n <= -log4(r) <= n + 1/2
  const double t = -std::log(r) / std::log(4.0);
  const int n = static_cast<int>(std::floor(t));
  for (int m = std::max(1, n - 1); m <= n + 1; ++m) {
    const double outer = std::ldexp(1.0, -2 * m);
    if (r <= outer && r >= 0.5 * outer) return m;
  }
  return std::nullopt;
}

cplx sector_chain_corner(int n) {
  return std::polar(std::ldexp(1.0, -2 * n), kPi / 4);
}

std::optional<int> disk_chain_index(cplx z, int count) {
  if (std::abs(z + 1.0) <= 1.0) return 0;
  if (z.real() <= 0.0) return std::nullopt;
  const int n_guess = static_cast<int>(std::lround(1.0 / z.real()));
  for (int n = std::max(3, n_guess - 1); n <= std::min(count + 2, n_guess + 1); ++n) {
    const double rn = 1.0 / (static_cast<double>(n) * n * n);
    if (std::abs(z - 1.0 / n) <= rn) return n;
  }
  return std::nullopt;
}

GridSpec GridSpec::covering(const BoundingBox& box, double h, int margin) {
  if (!(h > 0.0)) throw ConfigError("grid spacing h must be positive");
  if (margin < 1) margin = 1;
  const double i0 = std::floor(box.lo.real() / h) - margin;
  const double j0 = std::floor(box.lo.imag() / h) - margin;
  const double i1 = std::ceil(box.hi.real() / h) + margin;
  const double j1 = std::ceil(box.hi.imag() / h) + margin;
  GridSpec g;
  g.origin = cplx(i0 * h, j0 * h);
  g.h = h;
  g.nx = static_cast<int>(i1 - i0) + 1;
  g.ny = static_cast<int>(j1 - j0) + 1;
  return g;
}

bool GridSpec::covers(const BoundingBox& box) const {
  const cplx far = node(nx - 1, ny - 1);
  return origin.real() <= box.lo.real() && origin.imag() <= box.lo.imag() &&
         far.real() >= box.hi.real() && far.imag() >= box.hi.imag();
}

std::optional<std::size_t> GridSpec::nearest(cplx z) const {
  const double fi = std::round((z.real() - origin.real()) / h);
  const double fj = std::round((z.imag() - origin.imag()) / h);
  if (fi < 0 || fj < 0 || fi >= nx || fj >= ny) return std::nullopt;
  return index(static_cast<int>(fi), static_cast<int>(fj));
}

RegionMask::RegionMask(GridSpec grid, const std::vector<bool>& inside)
    : grid_(grid), classes_(grid.size(), NodeClass::Exterior) {
  if (inside.size() != grid_.size()) throw Error("mask size does not match grid");
  const int nx = grid_.nx, ny = grid_.ny;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const std::size_t k = grid_.index(i, j);
      if (!inside[k]) continue;
      ++inside_count_;
      bool all = i > 0 && j > 0 && i < nx - 1 && j < ny - 1;
      for (int dj = -1; all && dj <= 1; ++dj)
        for (int di = -1; all && di <= 1; ++di)
          if (!inside[grid_.index(i + di, j + dj)]) all = false;
      classes_[k] = all ? NodeClass::Interior : NodeClass::Boundary;
      if (all) ++interior_count_;
    }
  }
}

std::vector<std::size_t> RegionMask::inside_nodes() const {
  std::vector<std::size_t> out;
  out.reserve(inside_count_);
  for (std::size_t k = 0; k < classes_.size(); ++k)
    if (inside(k)) out.push_back(k);
  return out;
}

std::vector<std::size_t> RegionMask::interior_nodes() const {
  std::vector<std::size_t> out;
  out.reserve(interior_count_);
  for (std::size_t k = 0; k < classes_.size(); ++k)
    if (interior(k)) out.push_back(k);
  return out;
}

RegionMask RegionMask::interior_mask() const {
  std::vector<bool> in(classes_.size());
  for (std::size_t k = 0; k < classes_.size(); ++k) in[k] = interior(k);
  return RegionMask(grid_, in);
}

std::vector<int> RegionMask::boundary_distance() const {
  std::vector<int> dist(classes_.size(), -1);
  std::deque<std::size_t> queue;
  for (std::size_t k = 0; k < classes_.size(); ++k) {
    if (boundary(k)) {
      dist[k] = 0;
      queue.push_back(k);
    }
  }
  while (!queue.empty()) {
    const std::size_t k = queue.front();
    queue.pop_front();
    const int i = grid_.col(k), j = grid_.row(k);
    for (int dj = -1; dj <= 1; ++dj) {
      for (int di = -1; di <= 1; ++di) {
        const int a = i + di, b = j + dj;
        if (a < 0 || b < 0 || a >= grid_.nx || b >= grid_.ny) continue;
        const std::size_t m = grid_.index(a, b);
        if (dist[m] >= 0) continue;
        dist[m] = dist[k] + 1;
        queue.push_back(m);
      }
    }
  }
  return dist;
}

RegionMask build_mask(const CompactDomain& domain, const GridSpec& grid) {
  if (!(grid.h > 0.0) || grid.nx < 3 || grid.ny < 3) throw ConfigError("degenerate grid");
  if (!grid.covers(domain.bounding_box()))
    throw PreconditionError("grid does not cover the bounding box of " + domain.describe());
  std::vector<bool> in(grid.size());
  for (int j = 0; j < grid.ny; ++j)
    for (int i = 0; i < grid.nx; ++i) in[grid.index(i, j)] = domain.contains(grid.node(i, j));
  // An isolated tagged point is addressed exactly by callers, not as a grid class.
  for (cplx t : domain.tagged_points()) {
    const auto k = grid.nearest(t);
    if (!k || std::abs(grid.node(*k) - t) > 1e-9 * grid.h || !in[*k]) continue;
    const int i = grid.col(*k), j = grid.row(*k);
    bool lonely = true;
    for (int dj = -1; dj <= 1; ++dj)
      for (int di = -1; di <= 1; ++di) {
        const int a = i + di, b = j + dj;
        if ((di || dj) && a >= 0 && b >= 0 && a < grid.nx && b < grid.ny && in[grid.index(a, b)])
          lonely = false;
      }
    if (lonely) in[*k] = false;
  }
  RegionMask mask(grid, in);
  if (mask.interior_count() == 0)
    throw NumericalError("grid too coarse: no Interior nodes for " + domain.describe() +
                         " at h = " + std::to_string(grid.h));
  return mask;
}

Components connected_components(const RegionMask& mask) {
  const auto& g = mask.grid();
  Components c;
  c.label.assign(mask.size(), -1);
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < mask.size(); ++start) {
    if (!mask.inside(start) || c.label[start] >= 0) continue;
    const int id = c.count++;
    c.label[start] = id;
    stack.push_back(start);
    while (!stack.empty()) {
      const std::size_t k = stack.back();
      stack.pop_back();
      const int i = g.col(k), j = g.row(k);
      const int nb[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
      for (const auto& d : nb) {
        const int a = i + d[0], b = j + d[1];
        if (a < 0 || b < 0 || a >= g.nx || b >= g.ny) continue;
        const std::size_t m = g.index(a, b);
        if (!mask.inside(m) || c.label[m] >= 0) continue;
        c.label[m] = id;
        stack.push_back(m);
      }
    }
  }
  return c;
}

void write_mask(std::ostream& os, const RegionMask& mask) {
  const auto& g = mask.grid();
  os.precision(17);
  os << g.nx << ' ' << g.ny << ' ' << g.h << ' ' << g.origin.real() << ' ' << g.origin.imag()
     << '\n';
  std::string row(static_cast<std::size_t>(g.nx), 'E');
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      switch (mask.at(g.index(i, j))) {
        case NodeClass::Exterior: row[i] = 'E'; break;
        case NodeClass::Inside: row[i] = 'I'; break;
        case NodeClass::Interior: row[i] = 'N'; break;
        case NodeClass::Boundary: row[i] = 'B'; break;
      }
    }
    os << row << '\n';
  }
}

RegionMask read_mask(std::istream& is) {
  GridSpec g;
  double ore = 0, oim = 0;
  if (!(is >> g.nx >> g.ny >> g.h >> ore >> oim) || g.nx < 1 || g.ny < 1 || !(g.h > 0))
    throw ConfigError("bad mask header");
  g.origin = cplx(ore, oim);
  std::vector<bool> in(g.size());
  std::string row;
  for (int j = 0; j < g.ny; ++j) {
    if (!(is >> row) || row.size() != static_cast<std::size_t>(g.nx))
      throw ConfigError("bad mask row " + std::to_string(j));
    for (int i = 0; i < g.nx; ++i) {
      const char c = row[static_cast<std::size_t>(i)];
      if (c != 'E' && c != 'I' && c != 'N' && c != 'B')
        throw ConfigError(std::string("bad mask character '") + c + "'");
      in[g.index(i, j)] = c != 'E';
    }
  }
  return RegionMask(g, in);
}

namespace {

std::vector<double> parse_numbers(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      throw ConfigError("bad number '" + tok + "' in domain spec");
    }
    while (used < tok.size() && std::isspace(static_cast<unsigned char>(tok[used]))) ++used;
    if (used != tok.size()) throw ConfigError("bad number '" + tok + "' in domain spec");
    out.push_back(v);
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

}  // namespace

CompactDomain parse_domain(const std::string& spec_in) {
  const std::string spec = trim(spec_in);
  const auto colon = spec.find(':');
  const std::string kind = trim(spec.substr(0, colon));
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  auto need = [&](const std::vector<double>& v, std::size_t lo, std::size_t hi) {
    if (v.size() < lo || v.size() > hi)
      throw ConfigError("domain '" + kind + "' expects " + std::to_string(lo) + ".." +
                        std::to_string(hi) + " numbers, got " + std::to_string(v.size()));
  };
  if (kind == "union") {
    std::vector<CompactDomain> parts;
    std::stringstream ss(rest);
    std::string part;
    while (std::getline(ss, part, '|')) parts.push_back(parse_domain(part));
    return CompactDomain::union_of(std::move(parts));
  }
  const auto v = parse_numbers(rest);
  if (kind == "disk") {
    need(v, 3, 3);
    return CompactDomain::disk({v[0], v[1]}, v[2]);
  }
  if (kind == "annulus_sector") {
    need(v, 3, 3);
    return CompactDomain::annulus_sector(v[0], v[1], v[2]);
  }
  if (kind == "sector_chain") {
    need(v, 1, 1);
    return CompactDomain::sector_chain(static_cast<int>(v[0]));
  }
  if (kind == "disk_chain") {
    need(v, 1, 1);
    return CompactDomain::disk_chain(static_cast<int>(v[0]));
  }
  if (kind == "comb") {
    need(v, 0, 4);
    CompactDomain::CombParams p;
    if (v.size() > 0) p.count = static_cast<int>(v[0]);
    if (v.size() > 1) p.height = v[1];
    if (v.size() > 2) p.base = v[2];
    if (v.size() > 3) p.width_factor = v[3];
    return CompactDomain::comb(p);
  }
  if (kind == "inner_spiral") {
    need(v, 0, 1);
    return v.empty() ? CompactDomain::inner_spiral() : CompactDomain::inner_spiral(v[0]);
  }
  if (kind == "polygon") {
    if (v.size() % 2 != 0) throw ConfigError("polygon needs coordinate pairs");
    std::vector<cplx> verts;
    for (std::size_t k = 0; k < v.size(); k += 2) verts.emplace_back(v[k], v[k + 1]);
    return CompactDomain::polygon(std::move(verts));
  }
  throw ConfigError("unknown domain kind '" + kind + "'");
}

}  // namespace dbarlab

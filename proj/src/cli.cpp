#include "dbarlab/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>

#include "dbarlab/bezout.hpp"
#include "dbarlab/cauchy.hpp"
#include "dbarlab/corona.hpp"
#include "dbarlab/division.hpp"
#include "dbarlab/domain.hpp"
#include "dbarlab/error.hpp"
#include "dbarlab/expr.hpp"
#include "dbarlab/faa.hpp"
#include "dbarlab/field.hpp"
#include "dbarlab/geometry.hpp"

namespace dbarlab {

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return kExitConfig;
  if (dynamic_cast<const PreconditionError*>(&e) || dynamic_cast<const PoleError*>(&e))
    return kExitPrecondition;
  return kExitNumerical;
}

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = {"domains", "cauchy", "bezout", "corona", "divide",
                                                 "sharpness", "faa", "lconn", "taylor"};
  return names;
}

const std::vector<double>& default_ladder() {
  static const std::vector<double> h = {1.0 / 64, 1.0 / 128, 1.0 / 256};
  return h;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string brief(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string brief(cplx z) { return "(" + brief(z.real()) + ", " + brief(z.imag()) + ")"; }

class Csv {
 public:
  explicit Csv(std::vector<std::string> header) : width_(header.size()) { line(header); }

  void row(const std::vector<std::string>& cells) {
    if (cells.size() != width_) throw Error("csv row width mismatch");
    line(cells);
  }
  std::string text() const { return out_.str(); }

 private:
  void line(const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) out_ << (k ? "," : "") << cells[k];
    out_ << '\n';
  }
  std::size_t width_;
  std::ostringstream out_;
};

cplx parse_complex(const std::string& text) {
  const auto parts = parse_number_list(text);
  if (parts.size() == 1) return parts[0];
  if (parts.size() == 2) return {parts[0], parts[1]};
  throw ConfigError("expected 're' or 're,im', got '" + text + "'");
}

class Context {
 public:
  Context(const Config& cfg, const RunOptions& opts, RunReport& report)
      : cfg_(cfg), opts_(opts), report_(report) {}

  const Config& cfg() const { return cfg_; }
  RunReport& report() { return report_; }

  void say(const std::string& line) { report_.summary.push_back(line); }

  void write(const std::string& name, const std::string& body) {
    if (opts_.out_dir.empty()) return;
    std::filesystem::create_directories(opts_.out_dir);
    const auto path = std::filesystem::path(opts_.out_dir) / name;
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write '" + path.string() + "'");
    os << body;
    report_.files.push_back(path.string());
  }

  /// "<section>.h" if present, else "grid.h", else the default ladder; then
  /// truncated to the requested number of levels.
  std::vector<double> ladder(const std::string& section) {
    auto h = cfg_.numbers(section + ".h");
    if (h.empty()) h = cfg_.numbers("grid.h");
    if (h.empty()) h = default_ladder();
    if (opts_.levels) {
      if (*opts_.levels < 1 || *opts_.levels > static_cast<int>(h.size()))
        throw ConfigError("--levels must lie in [1, " + std::to_string(h.size()) + "]");
      h.resize(static_cast<std::size_t>(*opts_.levels));
    }
    validate_ladder(h);
    report_.h = h;
    return h;
  }

  CompactDomain domain(const std::string& section) {
    const std::string spec = cfg_.find(section + ".domain").value_or(cfg_.get("domain.spec", "disk:0,0,1"));
    auto d = parse_domain(spec);
    say("domain: " + d.describe());
    return d;
  }

  Expr expr(const std::string& key) { return parse_with_context(key, [](const std::string& t) {
      return std::vector<Expr>{parse_expr(t)};
    }).front(); }

  std::vector<Expr> expr_list(const std::string& key) { return parse_with_context(key, parse_expr_list); }

  std::optional<Expr> optional_expr(const std::string& key) {
    if (!cfg_.find(key)) return std::nullopt;
    return expr(key);
  }

  cplx point(const std::string& key, cplx fallback) {
    const auto v = cfg_.find(key);
    if (!v) return fallback;
    try {
      return parse_complex(*v);
    } catch (const ConfigError& e) {
      throw ConfigError("key '" + key + "': " + e.what());
    }
  }

  std::vector<cplx> points(const std::string& key) {
    std::vector<cplx> out;
    const auto v = cfg_.find(key);
    if (!v) return out;
    std::stringstream ss(*v);
    std::string item;
    while (std::getline(ss, item, ';')) {
      try {
        out.push_back(parse_complex(item));
      } catch (const ConfigError& e) {
        throw ConfigError("key '" + key + "': " + e.what());
      }
    }
    return out;
  }

  QuadratureConfig quadrature() {
    QuadratureConfig q;
    q.near_radius_cells = cfg_.integer("quadrature.near_radius_cells", q.near_radius_cells);
    q.shrink_distance = cfg_.number("quadrature.shrink_distance", q.shrink_distance);
    const std::string rule = cfg_.get("quadrature.cell_rule", "exact");
    if (rule == "exact")
      q.cell_rule = QuadratureConfig::CellRule::ExactKernel;
    else if (rule == "midpoint")
      q.cell_rule = QuadratureConfig::CellRule::Midpoint;
    else
      throw ConfigError("quadrature.cell_rule must be 'exact' or 'midpoint'");
    q.validate();
    return q;
  }

  ProbeConfig probe() {
    ProbeConfig p;
    p.rho = cfg_.number("probe.rho", p.rho);
    p.levels = cfg_.integer("probe.levels", p.levels);
    p.angles = cfg_.integer("probe.angles", p.angles);
    p.pass = cfg_.number("probe.pass", p.pass);
    p.fail = cfg_.number("probe.fail", p.fail);
    if (!(p.rho > 0) || p.levels < 3 || p.angles < 8 || !(p.pass > 0) || !(p.fail > p.pass))
      throw ConfigError("probe: need rho > 0, levels >= 3, angles >= 8, 0 < pass < fail");
    return p;
  }

  MaskPtr mask(const CompactDomain& d, double h) {
    return share(build_mask(d, GridSpec::covering(d.bounding_box(), h)));
  }

 private:
  std::vector<Expr> parse_with_context(const std::string& key,
                                       const std::function<std::vector<Expr>(const std::string&)>& parse) {
    const std::string text = cfg_.require(key);
    try {
      return parse(text);
    } catch (const ParseError& e) {
      throw ConfigError("key '" + key + "': " + e.what() + "\n  " + text + "\n  " +
                        std::string(std::min(e.position(), text.size()), ' ') + "^");
    }
  }

  const Config& cfg_;
  const RunOptions& opts_;
  RunReport& report_;
};

void attach_slopes(RunReport& r, const std::vector<MetricSeries>& series) {
  if (r.h.size() < 2) return;
  if (r.h.size() >= 3) {
    r.slopes = refinement_study(r.h, series).slopes;
  } else {
    for (const auto& s : series) {
      MetricSlope m{s.name, std::nullopt, std::all_of(s.values.begin(), s.values.end(),
                                                      [](double v) { return v == 0.0; })};
      if (!m.exact) {
        const double k = loglog_slope(r.h, s.values);
        if (!std::isnan(k)) m.slope = k;
      }
      r.slopes.push_back(m);
    }
  }
  for (const auto& s : r.slopes) {
    if (s.exact) {
      r.metrics[s.name + "_slope"] = kInf;
      r.labels[s.name + "_slope"] = "exact";
    } else if (s.slope) {
      r.metrics[s.name + "_slope"] = *s.slope;
    }
  }
}

std::string level_tag(std::size_t k, double h) {
  return "level " + std::to_string(k + 1) + ": h = " + brief(h);
}

// ---------------------------------------------------------------- domains

void run_domains(Context& c) {
  auto& r = c.report();
  const auto d = c.domain("domains");
  const auto h = c.ladder("domains");
  for (cplx p : d.tagged_points()) c.say("tagged point: " + brief(p));
  Csv csv({"h", "nx", "ny", "inside", "interior", "boundary", "components", "area"});
  std::optional<RegionMask> finest;
  for (std::size_t k = 0; k < h.size(); ++k) {
    auto m = build_mask(d, GridSpec::covering(d.bounding_box(), h[k]));
    const auto comps = connected_components(m);
    const double area = static_cast<double>(m.inside_count()) * h[k] * h[k];
    csv.row({num(h[k]), std::to_string(m.grid().nx), std::to_string(m.grid().ny), std::to_string(m.inside_count()),
             std::to_string(m.interior_count()), std::to_string(m.boundary_count()), std::to_string(comps.count),
             num(area)});
    c.say(level_tag(k, h[k]) + ", grid " + std::to_string(m.grid().nx) + "x" + std::to_string(m.grid().ny) +
          ", inside " + std::to_string(m.inside_count()) + ", interior " + std::to_string(m.interior_count()) +
          ", components " + std::to_string(comps.count) + ", area " + brief(area));
    r.metrics["area"] = area;
    r.metrics["components"] = comps.count;
    r.metrics["interior"] = static_cast<double>(m.interior_count());
    finest = std::move(m);
  }
  c.write("domains_levels.csv", csv.text());
  if (c.cfg().flag("domains.dump_mask", false)) {
    std::ostringstream os;
    write_mask(os, *finest);
    c.write("domains_mask.txt", os.str());
  }
}

// ----------------------------------------------------------------- cauchy

void run_cauchy(Context& c) {
  auto& r = c.report();
  const auto f = c.expr("cauchy.f");
  const auto exact = c.optional_expr("cauchy.exact");
  const std::string targets = c.cfg().get("cauchy.targets", "grid");
  if (targets != "grid" && targets != "circle" && targets != "file")
    throw ConfigError("cauchy.targets must be grid, circle or file");
  const auto d = c.domain("cauchy");
  const auto q = c.quadrature();
  const auto h = c.ladder("cauchy");
  c.say("f = " + f.str());

  std::vector<std::string> header = {"h", "nodes", "dbar_deviation"};
  if (exact) header.push_back("exact_error");
  Csv csv(header);
  std::vector<double> dev, err;
  SampledField fs, u;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const auto m = c.mask(d, h[k]);
    fs = sample(f, m);
    u = pompeiu_grid(fs, q);
    const auto dbar = dbar_fd(u);
    const auto keep = shrunk_interior(*m, q.shrink_distance);
    double worst = 0.0;
    std::size_t nodes = 0;
    for (std::size_t i = 0; i < keep.size(); ++i) {
      if (!keep[i]) continue;
      ++nodes;
      worst = std::max(worst, std::abs(dbar[i] - fs[i]));
    }
    if (nodes == 0) throw NumericalError("cauchy: no nodes left after shrinking; refine the grid");
    dev.push_back(worst);
    std::vector<std::string> row = {num(h[k]), std::to_string(nodes), num(worst)};
    std::string line = level_tag(k, h[k]) + ", shrunk nodes " + std::to_string(nodes) +
                       ", max |dbar u - f| = " + brief(worst);
    if (exact) {
      const CompiledExpr ex(*exact);
      double e = 0.0;
      for (std::size_t i = 0; i < u.values.size(); ++i)
        if (m->inside(i)) e = std::max(e, std::abs(u[i] - ex(m->grid().node(i))));
      err.push_back(e);
      row.push_back(num(e));
      line += ", max |u - exact| = " + brief(e) + " (" + brief(e / h[k]) + " h)";
      r.metrics["exact_error_over_h"] = std::max(r.metrics["exact_error_over_h"], e / h[k]);
    }
    csv.row(row);
    c.say(line);
  }
  r.metrics["dbar_deviation"] = dev.back();
  std::vector<MetricSeries> series = {{"dbar_deviation", dev}};
  if (exact) {
    r.metrics["exact_error"] = err.back();
    series.push_back({"exact_error", err});
  }
  attach_slopes(r, series);
  c.write("cauchy_levels.csv", csv.text());

  Csv out({"target_re", "target_im", "u_re", "u_im"});
  if (targets == "grid") {
    for (std::size_t i = 0; i < u.values.size(); ++i) {
      if (!fs.mask->inside(i)) continue;
      const cplx z = fs.grid().node(i);
      out.row({num(z.real()), num(z.imag()), num(u[i].real()), num(u[i].imag())});
    }
  } else {
    std::vector<cplx> pts;
    if (targets == "circle") {
      const cplx center = c.point("cauchy.circle_center", 0.0);
      const double radius = c.cfg().number("cauchy.circle_radius", 2.0);
      const int count = c.cfg().integer("cauchy.circle_points", 64);
      if (!(radius > 0) || count < 1) throw ConfigError("cauchy: circle_radius > 0 and circle_points >= 1");
      for (int j = 0; j < count; ++j)
        pts.push_back(center + std::polar(radius, 2.0 * std::numbers::pi * j / count));
    } else {
      const std::string path = c.cfg().require("cauchy.target_file");
      std::ifstream in(path);
      if (!in) throw ConfigError("cannot open target file '" + path + "'");
      std::string line;
      while (std::getline(in, line)) {
        const auto a = line.find_first_not_of(" \t\r");
        if (a == std::string::npos || line[a] == '#') continue;
        pts.push_back(parse_complex(line));
      }
    }
    const auto vals = pompeiu(fs, pts, q);
    for (std::size_t i = 0; i < pts.size(); ++i)
      out.row({num(pts[i].real()), num(pts[i].imag()), num(vals[i].real()), num(vals[i].imag())});
    c.say("evaluated at " + std::to_string(pts.size()) + " " + targets + " targets");
  }
  c.write("cauchy_u.csv", out.text());
}

// ----------------------------------------------------------------- bezout

void dump_fields(Context& c, const std::string& name, const MaskPtr& mask,
                 const std::vector<std::function<cplx(std::size_t)>>& fields) {
  std::vector<std::string> header = {"z_re", "z_im"};
  for (std::size_t j = 0; j < fields.size(); ++j) {
    header.push_back("x" + std::to_string(j + 1) + "_re");
    header.push_back("x" + std::to_string(j + 1) + "_im");
  }
  Csv csv(header);
  for (std::size_t i = 0; i < mask->size(); ++i) {
    if (!mask->inside(i)) continue;
    const cplx z = mask->grid().node(i);
    std::vector<std::string> row = {num(z.real()), num(z.imag())};
    for (const auto& fld : fields) {
      const cplx v = fld(i);
      row.push_back(num(v.real()));
      row.push_back(num(v.imag()));
    }
    csv.row(row);
  }
  c.write(name, csv.text());
}

void run_bezout(Context& c) {
  auto& r = c.report();
  const auto f = c.expr_list("bezout.f");
  const std::string method = c.cfg().get("bezout.method", "poly");
  if (method != "poly" && method != "pou") throw ConfigError("bezout.method must be poly or pou");
  const int degree = c.cfg().integer("bezout.degree", 16);
  const double epsilon = c.cfg().number("bezout.epsilon", 0.0);
  if (degree < 0 || epsilon < 0) throw ConfigError("bezout: degree and epsilon must be non-negative");
  const auto d = c.domain("bezout");
  const auto h = c.ladder("bezout");
  c.say("method: " + method);

  Csv csv(method == "poly" ? std::vector<std::string>{"h", "delta", "residual", "tolerance", "min_denominator",
                                                      "max_fit_degree"}
                           : std::vector<std::string>{"h", "delta", "residual", "epsilon"});
  r.metrics["residual"] = 0.0;
  r.metrics["min_denominator"] = kInf;
  const bool dump = c.cfg().flag("bezout.dump", false);
  for (std::size_t k = 0; k < h.size(); ++k) {
    const auto m = c.mask(d, h[k]);
    const auto p = BezoutProblem::make(d, m, f);
    r.metrics["delta"] = p.delta;
    std::vector<std::function<cplx(std::size_t)>> fields;
    if (method == "poly") {
      const auto s = bezout_poly(p, degree);
      int max_deg = 0;
      for (const auto& fit : s.fits) max_deg = std::max(max_deg, fit.poly.degree);
      csv.row({num(h[k]), num(p.delta), num(s.residual), num(s.tolerance), num(s.min_denominator),
               std::to_string(max_deg)});
      c.say(level_tag(k, h[k]) + ", residual " + brief(s.residual) + ", tolerance " + brief(s.tolerance) +
            ", min |sum p f| " + brief(s.min_denominator) + ", fit degree " + std::to_string(max_deg));
      r.metrics["residual"] = std::max(r.metrics["residual"], s.residual);
      r.metrics["min_denominator"] = std::min(r.metrics["min_denominator"], s.min_denominator);
      r.metrics["max_fit_degree"] = max_deg;
      if (dump && k + 1 == h.size())
        for (const auto& x : s.x) {
          const auto xs = sample(x, m);
          fields.push_back([xs](std::size_t i) { return xs[i]; });
        }
    } else {
      const auto s = bezout_pou(p, epsilon);
      csv.row({num(h[k]), num(p.delta), num(s.residual), num(s.epsilon)});
      c.say(level_tag(k, h[k]) + ", residual " + brief(s.residual) + ", epsilon " + brief(s.epsilon));
      r.metrics["residual"] = std::max(r.metrics["residual"], s.residual);
      if (dump && k + 1 == h.size())
        for (const auto& x : s.x) fields.push_back([x](std::size_t i) { return x[i]; });
    }
    if (!fields.empty()) dump_fields(c, "bezout_fields.csv", m, fields);
  }
  if (method == "pou") r.metrics.erase("min_denominator");
  c.write("bezout_levels.csv", csv.text());
}

// ----------------------------------------------------------------- corona

void run_corona(Context& c) {
  auto& r = c.report();
  const auto f = c.expr_list("corona.f");
  const std::string target = c.cfg().get("corona.target", "one");
  const int degree = c.cfg().integer("corona.degree", 16);
  std::optional<Expr> g;
  std::vector<Expr> aux;
  if (target == "g5" || target == "g6") {
    g = c.expr("corona.g");
    aux = c.expr_list("corona.x");
  } else if (target == "g12") {
    g = c.expr("corona.g");
    aux = c.expr_list("corona.h_list");
  } else if (target != "one") {
    throw ConfigError("corona.target must be one, g5, g6 or g12");
  }
  const auto d = c.domain("corona");
  const auto q = c.quadrature();
  const auto h = c.ladder("corona");
  c.say("target: " + target + (g ? " with g = " + g->str() : ""));

  Csv csv({"h", "residual_sup", "dbar_sup", "dbar_sup_start", "max_entry_deviation"});
  std::vector<double> res, dsup;
  CoronaSolution last;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const auto m = c.mask(d, h[k]);
    if (target == "one")
      last = corona_solve(BezoutProblem::make(d, m, f), q, degree);
    else if (target == "g12")
      last = g12_solve(*g, f, aux, m, q);
    else
      last = g_power_solve(*g, f, aux, target == "g5", m, q);
    double entry = 0.0;
    for (const auto& e : last.entry_checks) entry = std::max(entry, e.max_deviation);
    res.push_back(last.residual_sup);
    dsup.push_back(last.dbar_sup);
    csv.row({num(h[k]), num(last.residual_sup), num(last.dbar_sup), num(last.dbar_sup_start), num(entry)});
    c.say(level_tag(k, h[k]) + ", residual_sup = " + brief(last.residual_sup) + ", dbar_sup = " +
          brief(last.dbar_sup) + " (uncorrected " + brief(last.dbar_sup_start) + ")");
  }
  r.metrics["residual_sup"] = res.back();
  r.metrics["dbar_sup"] = dsup.back();
  r.metrics["dbar_sup_start"] = last.dbar_sup_start;
  attach_slopes(r, {{"residual_sup", res}, {"dbar_sup", dsup}});
  c.write("corona_levels.csv", csv.text());
  if (c.cfg().flag("corona.dump", false)) {
    std::vector<std::function<cplx(std::size_t)>> fields;
    for (const auto& u : last.u) fields.push_back([u](std::size_t i) { return u[i]; });
    dump_fields(c, "corona_fields.csv", last.u.front().mask, fields);
  }
}

// ----------------------------------------------------------------- divide

void run_divide(Context& c) {
  auto& r = c.report();
  const auto f = c.expr("divide.f");
  const auto g = c.expr("divide.g");
  const int power = c.cfg().integer("divide.power", 2);
  const SmoothClass cls = parse_smooth_class(c.cfg().get("divide.class", "C0"));
  const double h = c.cfg().number("divide.probe_h", 1.0 / 64);
  if (!(h > 0)) throw ConfigError("divide.probe_h must be positive");
  const DivisionSpec spec{f, g, power, c.domain("divide")};
  const auto extra = c.points("divide.points");
  const auto probe = c.probe();
  c.say("f = " + spec.f.str() + ", g = " + spec.g.str() + ", power " + std::to_string(spec.power) +
        ", class " + to_string(cls));

  // Surfaces |f| > |g| as a precondition failure before any probing.
  divide(spec.f, spec.g, spec.power, c.mask(spec.domain, h));

  const auto cert = certify_class(spec, cls, h, probe, extra);
  Csv csv({"quantity", "point_re", "point_im", "radius", "spread", "scale", "verdict"});
  for (const auto& e : cert.evidence) {
    for (std::size_t k = 0; k < e.radii.size(); ++k)
      csv.row({e.quantity, num(e.point.real()), num(e.point.imag()), num(e.radii[k]), num(e.spreads[k]),
               num(e.scale), to_string(e.verdict)});
    c.say("probe " + e.quantity + " at " + brief(e.point) + ": ratio " + brief(e.ratio) + ", " +
          to_string(e.verdict) + (e.note.empty() ? "" : " (" + e.note + ")"));
  }
  for (const auto& n : cert.notes) c.say("note: " + n);
  c.say("certificate: " + std::string(to_string(cls)) + " at power " + std::to_string(spec.power) + ": " +
        to_string(cert.verdict));
  r.labels["verdict"] = to_string(cert.verdict);
  r.metrics["probed_points"] = static_cast<double>(cert.points.size());
  c.write("divide_probes.csv", csv.text());

  if (c.cfg().find("divide.bound_m")) {
    const int bm = c.cfg().integer("divide.bound_m", 0);
    const int bn = c.cfg().integer("divide.bound_n", 0);
    const std::string kind = c.cfg().get("divide.bound_kind", "holomorphic");
    if (kind != "holomorphic" && kind != "mixed") throw ConfigError("divide.bound_kind must be holomorphic or mixed");
    const auto levels = c.ladder("divide");
    const auto scan = derivative_bound_scan(spec.f, spec.g, bm, bn, spec.domain, levels,
                                            kind == "mixed" ? DerivativeKind::Mixed : DerivativeKind::Holomorphic);
    Csv b({"h", "C", "nodes"});
    for (std::size_t k = 0; k < scan.h.size(); ++k) {
      b.row({num(scan.h[k]), num(scan.C[k]), std::to_string(scan.nodes[k])});
      c.say("derivative bound m = " + std::to_string(bm) + ", n = " + std::to_string(bn) + ", " +
            level_tag(k, scan.h[k]) + ": C = " + brief(scan.C[k]));
    }
    c.say("derivative bound ratio " + brief(scan.ratio) + (scan.stable ? " (stable)" : " (unstable)"));
    r.metrics["bound_C"] = scan.C.back();
    r.metrics["bound_ratio"] = scan.ratio;
    r.labels["bound_stable"] = scan.stable ? "yes" : "no";
    c.write("divide_bounds.csv", b.text());
  }
}

// -------------------------------------------------------------- sharpness

void run_sharpness(Context& c) {
  auto& r = c.report();
  const double h = c.cfg().number("sharpness.probe_h", 1.0 / 64);
  if (!(h > 0)) throw ConfigError("sharpness.probe_h must be positive");
  const auto rows = sharpness_battery(h, c.probe());
  Csv csv({"item", "claim", "power", "at_power", "below", "ok", "detail"});
  int failures = 0;
  for (const auto& row : rows) {
    std::string detail = row.detail;
    std::replace(detail.begin(), detail.end(), ',', ';');
    csv.row({row.item, row.claim, std::to_string(row.power), to_string(row.at_power), to_string(row.below),
             row.ok ? "yes" : "no", detail});
    char line[256];
    std::snprintf(line, sizeof line, "%-14s %-34s power %d: %-12s power %d: %-12s %s", row.item.c_str(),
                  row.claim.c_str(), row.power, to_string(row.at_power), row.power - 1, to_string(row.below),
                  row.ok ? "ok" : "MISMATCH");
    c.say(line);
    if (!row.ok) ++failures;
  }
  r.metrics["rows"] = static_cast<double>(rows.size());
  r.metrics["failures"] = failures;
  r.labels["all_ok"] = failures == 0 ? "yes" : "no";
  c.write("sharpness.csv", csv.text());
}

// -------------------------------------------------------------------- faa

void run_faa(Context& c) {
  auto& r = c.report();
  const int n = c.cfg().integer("faa.n", 4);
  const auto table = coefficient_table(n);
  Csv csv({"k", "coefficient"});
  std::uint64_t total = 0;
  for (const auto& row : table) {
    std::string k;
    for (std::size_t i = 0; i < row.k.size(); ++i) k += (i ? " " : "") + std::to_string(row.k[i]);
    csv.row({k, std::to_string(row.coefficient)});
    total += row.coefficient;
  }
  c.say("n = " + std::to_string(n) + ": " + std::to_string(table.size()) + " multi-indices, coefficient sum " +
        std::to_string(total));
  r.metrics["partitions"] = static_cast<double>(table.size());
  r.metrics["coefficient_sum"] = static_cast<double>(total);
  c.write("faa_table.csv", csv.text());

  if (c.cfg().flag("faa.verify", false)) {
    const int order = c.cfg().integer("faa.max_order", 12);
    const int samples = c.cfg().integer("faa.samples", 200);
    const int seed = c.cfg().integer("faa.seed", 20240611);
    if (samples < 1 || seed < 0) throw ConfigError("faa: samples >= 1 and seed >= 0");
    const auto v = faa_verify(order, samples, static_cast<unsigned>(seed));
    c.say("oracle battery: " + std::to_string(v.samples) + " samples up to order " + std::to_string(v.max_order) +
          ", worst relative error " + brief(v.worst_relative) + " at order " + std::to_string(v.worst_order));
    r.metrics["worst_relative"] = v.worst_relative;
    Csv b({"max_order", "samples", "seed", "worst_relative", "worst_order"});
    b.row({std::to_string(v.max_order), std::to_string(v.samples), std::to_string(seed), num(v.worst_relative),
           std::to_string(v.worst_order)});
    c.write("faa_verify.csv", b.text());
  }
}

// ------------------------------------------------------------------ lconn

void run_lconn(Context& c) {
  auto& r = c.report();
  const auto d = c.domain("lconn");
  const cplx z0 = c.point("lconn.z0", 0.0);
  auto scales = c.cfg().numbers("lconn.scales");
  if (scales.empty()) scales = {0.2, 0.1, 0.05};
  const int samples = c.cfg().integer("lconn.samples", 256);
  const double landing = c.cfg().number("lconn.landing", 0.5);
  if (samples < 1 || !(landing > 0 && landing < 1)) throw ConfigError("lconn: samples >= 1, 0 < landing < 1");
  const auto h = c.ladder("lconn");
  c.say("z0 = " + brief(z0));
  Csv csv({"h", "scale", "samples", "max_ratio", "verdict"});
  std::string common;
  for (std::size_t k = 0; k < h.size(); ++k) {
    const auto p = l_probe(d, z0, scales, samples, h[k], landing);
    for (const auto& s : p.scales)
      csv.row({num(h[k]), num(s.r), std::to_string(s.samples), num(s.max_ratio), to_string(p.verdict)});
    std::string line = level_tag(k, h[k]) + ": " + to_string(p.verdict) + ", ratios";
    for (const auto& s : p.scales) line += " " + brief(s.max_ratio);
    c.say(line);
    r.labels["verdict_" + std::to_string(k + 1)] = to_string(p.verdict);
    common = k == 0 ? to_string(p.verdict) : (common == to_string(p.verdict) ? common : "mixed");
  }
  r.labels["verdict"] = common;
  c.say("verdict: " + common);
  c.write("lconn.csv", csv.text());
}

// ----------------------------------------------------------------- taylor

void run_taylor(Context& c) {
  auto& r = c.report();
  const auto f = c.expr("taylor.f");
  const cplx z0 = c.point("taylor.z0", 1.0);
  const int m = c.cfg().integer("taylor.m", 2);
  const double rho = c.cfg().number("taylor.rho", 0.2);
  const int levels = c.cfg().integer("taylor.levels", 8);
  const int angles = c.cfg().integer("taylor.angles", 64);
  const auto d = c.domain("taylor");
  const auto t = taylor_remainder_fit(f, z0, m, d, rho, levels, angles);
  c.say("f = " + f.str() + ", z0 = " + brief(z0) + ", m = " + std::to_string(m));
  Csv csv({"j", "slope", "threshold", "exact", "pass"});
  Csv radii({"j", "radius", "max_abs"});
  for (const auto& rem : t.remainders) {
    csv.row({std::to_string(rem.j), num(rem.slope), std::to_string(m - rem.j), rem.exact ? "yes" : "no",
             rem.pass ? "yes" : "no"});
    for (std::size_t k = 0; k < rem.radii.size(); ++k)
      radii.row({std::to_string(rem.j), num(rem.radii[k]), num(rem.max_abs[k])});
    c.say("j = " + std::to_string(rem.j) + ": slope " + (rem.exact ? std::string("exact") : brief(rem.slope)) +
          " vs " + std::to_string(m - rem.j) + (rem.pass ? " pass" : " FAIL"));
  }
  if (t.quotient_slope) {
    r.metrics["quotient_slope"] = *t.quotient_slope;
    c.say("difference-quotient slope " + brief(*t.quotient_slope));
  }
  r.labels["taylor"] = t.pass ? "pass" : "fail";
  c.write("taylor.csv", csv.text());
  c.write("taylor_radii.csv", radii.text());

  if (const auto count = c.cfg().integer("taylor.chain", 0); count > 0) {
    const auto rows = disk_chain_quotient_demo(count);
    Csv chain({"n", "quotient", "sqrt_n", "interior_derivative"});
    double worst = 0.0;
    for (const auto& q : rows) {
      chain.row({std::to_string(q.n), num(q.quotient), num(q.sqrt_n), num(q.interior_derivative)});
      worst = std::max(worst, std::abs(q.quotient - q.sqrt_n));
    }
    c.say("disk chain: " + std::to_string(rows.size()) + " quotients, max |quotient - sqrt n| = " + brief(worst));
    r.metrics["chain_deviation"] = worst;
    c.write("taylor_chain.csv", chain.text());
  }
}

// ----------------------------------------------------------------- checks

struct CheckSpec {
  std::string key, value;
  enum { Max, Min, Expect } kind;
  std::string name;
  double limit = 0.0;
};

std::vector<CheckSpec> parse_checks(const Config& cfg) {
  std::vector<CheckSpec> out;
  for (const auto& [key, value] : cfg.section("checks")) {
    CheckSpec s{key, value, CheckSpec::Expect, "", 0.0};
    if (key.rfind("max_", 0) == 0 || key.rfind("min_", 0) == 0) {
      s.kind = key[1] == 'a' ? CheckSpec::Max : CheckSpec::Min;
      s.name = key.substr(4);
      try {
        s.limit = parse_number(value);
      } catch (const ConfigError& e) {
        throw ConfigError("check '" + key + "': " + e.what());
      }
      if (s.kind == CheckSpec::Max && !(s.limit > 0)) throw ConfigError("check '" + key + "': tolerance must be positive");
    } else if (key.rfind("expect_", 0) == 0) {
      s.name = key.substr(7);
    } else {
      throw ConfigError("check '" + key + "': keys start with max_, min_ or expect_");
    }
    out.push_back(s);
  }
  return out;
}

void evaluate_checks(const std::vector<CheckSpec>& specs, RunReport& r) {
  for (const auto& s : specs) {
    CheckResult c{s.key, s.value, "", false};
    if (s.kind == CheckSpec::Expect) {
      const auto it = r.labels.find(s.name);
      if (it == r.labels.end()) throw ConfigError("check '" + s.key + "': " + r.command + " reports no '" + s.name + "'");
      c.actual = it->second;
      c.pass = it->second == s.value;
    } else {
      const auto it = r.metrics.find(s.name);
      if (it == r.metrics.end()) throw ConfigError("check '" + s.key + "': " + r.command + " reports no '" + s.name + "'");
      c.actual = brief(it->second);
      c.pass = s.kind == CheckSpec::Max ? it->second <= s.limit : it->second >= s.limit;
    }
    r.checks.push_back(c);
  }
  const bool ok = std::all_of(r.checks.begin(), r.checks.end(), [](const CheckResult& c) { return c.pass; });
  r.exit_status = ok ? kExitOk : kExitAcceptance;
}

}  // namespace

RunReport run(const Config& config, const RunOptions& options) {
  RunReport report;
  report.command = config.require("run.command");
  const auto& names = command_names();
  if (std::find(names.begin(), names.end(), report.command) == names.end())
    throw ConfigError("unknown command '" + report.command + "'");
  if (options.threads < 1) throw ConfigError("--threads must be at least 1");
  const auto checks = parse_checks(config);

  Context ctx(config, options, report);
  const std::string& cmd = report.command;
  if (cmd == "domains") run_domains(ctx);
  else if (cmd == "cauchy") run_cauchy(ctx);
  else if (cmd == "bezout") run_bezout(ctx);
  else if (cmd == "corona") run_corona(ctx);
  else if (cmd == "divide") run_divide(ctx);
  else if (cmd == "sharpness") run_sharpness(ctx);
  else if (cmd == "faa") run_faa(ctx);
  else if (cmd == "lconn") run_lconn(ctx);
  else run_taylor(ctx);

  evaluate_checks(checks, report);
  ctx.write(cmd + "_report.txt", render(report));
  return report;
}

std::string render(const RunReport& r) {
  std::ostringstream os;
  os << "command: " << r.command << '\n';
  if (!r.h.empty()) {
    os << "h:";
    for (double h : r.h) os << ' ' << brief(h);
    os << '\n';
  }
  for (const auto& line : r.summary) os << line << '\n';
  if (!r.slopes.empty()) {
    os << "slopes (log-log, least squares):\n";
    for (const auto& s : r.slopes)
      os << "  " << s.name << ": " << (s.exact ? "exact" : s.slope ? brief(*s.slope) : "undefined") << '\n';
  }
  if (!r.checks.empty()) {
    os << "checks:\n";
    for (const auto& c : r.checks)
      os << "  " << (c.pass ? "PASS " : "FAIL ") << c.key << " = " << c.expected << " (actual " << c.actual << ")\n";
  }
  os << "status: " << r.exit_status << '\n';
  return os.str();
}

}  // namespace dbarlab

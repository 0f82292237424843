#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "dbarlab/cauchy.hpp"
#include "dbarlab/division.hpp"

using namespace dbarlab;

namespace {

const Expr Z = Expr::z();
const Expr ZB = Expr::zbar();
const Expr S = Expr::atomic_inner();
const Expr one(1.0);
const CompactDomain unit_disk = CompactDomain::disk({0, 0}, 1.0);

MaskPtr disk_mask(double h) {
  return share(build_mask(unit_disk, GridSpec::covering(unit_disk.bounding_box(), h)));
}

double worst_ratio(const DivisionCertificate& c, const std::string& quantity) {
  double r = 0.0;
  for (const auto& e : c.evidence)
    if (e.quantity == quantity) r = std::max(r, e.ratio);
  return r;
}

}  // namespace

TEST_CASE("class and verdict names") {
  for (auto c : {SmoothClass::C0, SmoothClass::A0, SmoothClass::C1, SmoothClass::A1, SmoothClass::Dbar1})
    CHECK(parse_smooth_class(to_string(c)) == c);
  CHECK_THROWS_AS(parse_smooth_class("C2"), ConfigError);
  CHECK(combine(Verdict::Pass, Verdict::Inconclusive) == Verdict::Inconclusive);
  CHECK(combine(Verdict::Inconclusive, Verdict::Fail) == Verdict::Fail);
  CHECK(combine(Verdict::Pass, Verdict::Pass) == Verdict::Pass);
}

TEST_CASE("divide: zero extension and the modulus bound") {
  const auto mask = disk_mask(1.0 / 32);
  const auto& grid = mask->grid();
  const std::size_t origin = *grid.nearest(0.0);

  SUBCASE("f = g gives f^(N-1)") {
    const Expr f = Z * (one - Z);
    const auto h = divide(f, f, 3, mask);
    const auto f2 = sample(pow(f, 2), mask);
    for (std::size_t k = 0; k < mask->size(); ++k)
      if (mask->inside(k)) CHECK(std::abs(h[k] - f2[k]) <= 1e-14);
    CHECK(h[origin] == cplx(0, 0));
  }

  SUBCASE("|f| > |g| names the worst node") {
    try {
      divide(Expr(2.0) * Z, Z, 2, mask);
      FAIL("expected PreconditionError");
    } catch (const PreconditionError& e) {
      CHECK(std::string(e.what()).find("worst excess") != std::string::npos);
    }
    CHECK_THROWS_AS(divide(Z, Z, 0, mask), ConfigError);
  }

  SUBCASE("random products f = g u with |u| <= 1") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int trial = 0; trial < 6; ++trial) {
      const cplx a(U(rng) * 0.8, U(rng) * 0.8), c(U(rng), U(rng));
      const Expr g = (Z - Expr(a)) * (Z - Expr(0.0));
      const Expr u = Expr(c / (std::abs(c) * 2.0)) * ZB;
      const Expr f = g * u;
      const int N = 2 + trial % 3;
      const auto h = divide(f, g, N, mask);
      const auto fs = sample(f, mask);
      const auto zero = zero_set(g, mask);
      CHECK(zero[origin]);
      for (std::size_t k = 0; k < mask->size(); ++k) {
        if (!mask->inside(k)) continue;
        if (zero[k]) CHECK(h[k] == cplx(0, 0));
        CHECK(std::abs(h[k]) <= std::pow(std::abs(fs[k]), N - 1) * (1 + 1e-12) + 1e-300);
      }
    }
  }
}

TEST_CASE("decay exponent at the zero set is at least N-1") {
  const auto mask = disk_mask(1.0 / 128);
  for (int N : {2, 3, 4}) {
    const auto h = divide(Z, ZB, N, mask);  // |h| = |z|^(N-1)
    const double e = decay_exponent(h, 0.0);
    INFO("N = " << N << " exponent " << e);
    CHECK(e >= (N - 1) - 0.05);
    CHECK(e <= (N - 1) + 0.05);
  }
}

TEST_CASE("certificates from the division examples") {
  SUBCASE("S has no continuous extension at 1") {
    const auto below = certify_class({(one - Z) * S, one - Z, 1, unit_disk}, SmoothClass::C0);
    CHECK(below.verdict == Verdict::Fail);
    CHECK(worst_ratio(below, "h") >= 0.9);
    const auto at = certify_class({(one - Z) * S, one - Z, 2, unit_disk}, SmoothClass::C0);
    CHECK(at.verdict == Verdict::Pass);
    bool saw_one = false;
    for (cplx p : at.points) saw_one = saw_one || std::abs(p - 1.0) < 1e-9;
    CHECK(saw_one);
  }

  SUBCASE("((1-z)^3 S, (1-z)^3) in A1") {
    const Expr f = pow(one - Z, 3) * S, g = pow(one - Z, 3);
    CHECK(certify_class({f, g, 1, unit_disk}, SmoothClass::A1).verdict == Verdict::Fail);
    CHECK(certify_class({f, g, 2, unit_disk}, SmoothClass::A1).verdict == Verdict::Pass);
  }

  SUBCASE("(z, conj z) in Dbar1") {
    const auto c3 = certify_class({Z, ZB, 3, unit_disk}, SmoothClass::Dbar1);
    CHECK(c3.verdict == Verdict::Fail);
    CHECK(worst_ratio(c3, "d dbar h") >= 0.5);
    CHECK(worst_ratio(c3, "dbar h") <= 0.05);
    CHECK(certify_class({Z, ZB, 4, unit_disk}, SmoothClass::Dbar1).verdict == Verdict::Pass);
  }

  SUBCASE("dbar(z^2/conj z) = -z^2/conj(z)^2 has direction-dependent limits") {
    const Expr db = quotient_expr(Z, ZB, 2).dbar();
    const auto p = directional_limit_probe(db, 0.0, {1.0, std::polar(1.0, std::numbers::pi / 4)},
                                           {1e-1, 1e-2, 1e-3, 1e-4});
    REQUIRE(p.tails[0]);
    REQUIRE(p.tails[1]);
    CHECK(std::abs(*p.tails[0] - cplx(-1, 0)) < 1e-12);
    CHECK(std::abs(*p.tails[1] - cplx(1, 0)) < 1e-12);
    CHECK(p.limits_disagree);
  }

  SUBCASE("no zeros means nothing to probe") {
    const auto c = certify_class({Z * Expr(0.5), Z + Expr(2.0), 2, unit_disk}, SmoothClass::C1);
    CHECK(c.verdict == Verdict::Pass);
    CHECK(c.points.empty());
  }

  SUBCASE("A claims fail for non-holomorphic quotients") {
    CHECK(certify_class({Z, ZB, 3, unit_disk}, SmoothClass::A1).verdict == Verdict::Fail);
  }
}

TEST_CASE("sharpness battery") {
  const auto rows = sharpness_battery();
  REQUIRE(rows.size() == 8);
  for (const auto& r : rows) {
    INFO(r.item << " " << r.claim << " N=" << r.power << ": " << to_string(r.at_power) << " / "
                << to_string(r.below) << "  " << r.detail);
    CHECK(r.at_power == Verdict::Pass);
    CHECK(r.below == Verdict::Fail);
    CHECK(r.ok);
  }
  CHECK(rows[3].detail.find("(0,2) vs (2,0)") != std::string::npos);
}

TEST_CASE("derivative bound scan") {
  const std::vector<double> levels = {1.0 / 32, 1.0 / 64, 1.0 / 128};

  SUBCASE("f = g = z, m = n = 0") {
    const auto s = derivative_bound_scan(Z, Z, 0, 0, unit_disk, levels);
    for (double c : s.C) CHECK(c == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.stable);
  }

  SUBCASE("f = z^2, g = z, m = n = 1: quotient z^5") {
    const auto s = derivative_bound_scan(pow(Z, 2), Z, 1, 1, unit_disk, levels);
    // Oracle: 5|z|^4 / |z| on the same node set.
    for (std::size_t l = 0; l < levels.size(); ++l) {
      const auto mask = disk_mask(levels[l]);
      const auto keep = shrunk_interior(*mask, 1.0 / 16);
      double expect = 0.0;
      for (std::size_t k = 0; k < keep.size(); ++k)
        if (keep[k]) expect = std::max(expect, 5.0 * std::pow(std::abs(mask->grid().node(k)), 3));
      CHECK(s.C[l] == doctest::Approx(expect).epsilon(1e-9));
    }
    CHECK(s.stable);
    CHECK(s.C.back() < 5.0);
  }

  SUBCASE("f = (1-z)S, g = 1-z, m = n = 0: C = max |S|^2") {
    const auto s = derivative_bound_scan((one - Z) * S, one - Z, 0, 0, unit_disk, levels);
    CHECK(s.rescale > 1.9);
    for (std::size_t l = 0; l < levels.size(); ++l) {
      const auto mask = disk_mask(levels[l]);
      const auto keep = shrunk_interior(*mask, 1.0 / 16);
      const CompiledExpr sc(S);
      double expect = 0.0;
      for (std::size_t k = 0; k < keep.size(); ++k)
        if (keep[k]) expect = std::max(expect, std::norm(sc(mask->grid().node(k))));
      CHECK(s.C[l] == doctest::Approx(expect).epsilon(1e-9));
    }
    CHECK(s.stable);
  }

  SUBCASE("mixed partials of z^2 conj z over z") {
    // f = |z|^2/2 stays below |g| = |z|; the quotient f^3/g is z^2 conj(z)^3 / 8.
    const auto s = derivative_bound_scan(Z * ZB * Expr(0.5), Z, 1, 1, unit_disk, levels, DerivativeKind::Mixed);
    CHECK(s.stable);
    CHECK_THROWS_AS(derivative_bound_scan(Z * ZB * Expr(0.5), Z, 1, 1, unit_disk, levels), PreconditionError);
  }

  SUBCASE("bad arguments") {
    CHECK_THROWS_AS(derivative_bound_scan(Z, Z, 0, 1, unit_disk, levels), ConfigError);
    CHECK_THROWS_AS(derivative_bound_scan(Z, Z, 0, 0, unit_disk, {0.1}), ConfigError);
    CHECK_THROWS_AS(derivative_bound_scan(Expr(2.0) * Z, Z, 0, 0, unit_disk, levels), PreconditionError);
  }
}

TEST_CASE("continuous multi-division h^2") {
  const auto mask = disk_mask(1.0 / 64);

  SUBCASE("single generator") {
    const Expr f1 = Z * (one - Z);
    const auto d = multi_division_continuous(f1, {f1}, mask);
    CHECK(d.residual <= 1e-10);
    CHECK(d.max_q <= 1.0 + 1e-6);
    CHECK(d.zero_nodes >= 1);
  }

  SUBCASE("h = z, f = (z, 1-z)") {
    const auto d = multi_division_continuous(Z, {Z, one - Z}, mask);
    CHECK(d.residual <= 1e-10);
    CHECK(d.max_q <= 2.0 + 1e-6);
    CHECK(d.zero_nodes == 0);
    // Cauchy-Schwarz node-wise, recomputed from the symbolic q_j.
    const CompiledExpr q0(d.q[0]), q1(d.q[1]);
    for (std::size_t k = 0; k < mask->size(); ++k)
      if (mask->inside(k)) {
        const cplx z = mask->grid().node(k);
        CHECK(std::abs(q0(z)) <= 2.0 + 1e-6);
        CHECK(std::abs(q1(z)) <= 2.0 + 1e-6);
      }
  }

  SUBCASE("|h| > sum |f_j|") {
    CHECK_THROWS_AS(multi_division_continuous(Expr(3.0) * Z, {Z, Z}, mask), PreconditionError);
  }
}

TEST_CASE("C1 multi-division h^3") {
  const std::vector<double> levels = {1.0 / 32, 1.0 / 64, 1.0 / 128};

  SUBCASE("h = z, f = (z): q = z^2") {
    const auto e = multi_division_c1(Z, {Z}, unit_disk, levels);
    CHECK(e.division.residual <= 1e-10);
    const auto mask = e.division.g[0].mask;
    const auto z2 = sample(pow(Z, 2), mask);
    for (std::size_t k = 0; k < mask->size(); ++k)
      if (mask->inside(k)) CHECK(std::abs(e.division.g[0][k] - z2[k]) <= 1e-14);
    CHECK(e.verdict == Verdict::Pass);
  }

  SUBCASE("h = z, f = (z, 1-z)") {
    const auto e = multi_division_c1(Z, {Z, one - Z}, unit_disk, levels);
    CHECK(e.division.residual <= 1e-10);
    CHECK(std::abs(e.slope) <= 0.25);
    CHECK(e.verdict == Verdict::Pass);
  }

  SUBCASE("h = z, f = (conj z): power 3 passes, power 2 fails") {
    const auto at = multi_division_c1(Z, {ZB}, unit_disk, levels, 3);
    const auto below = multi_division_c1(Z, {ZB}, unit_disk, levels, 2);
    CHECK(at.verdict == Verdict::Pass);
    CHECK(below.verdict == Verdict::Fail);
    CHECK(below.slope <= -0.75);
  }

  SUBCASE("errors") {
    CHECK_THROWS_AS(multi_division_c1(Expr(2.0) * Z, {Z}, unit_disk, levels), PreconditionError);
    // Common zero set is the whole disk.
    const Expr flat = Z * ZB * Expr(0.0);
    CHECK_THROWS_AS(multi_division_c1(Expr(0.0), {flat}, unit_disk, levels), PreconditionError);
  }
}

TEST_CASE("quotient extension lemma") {
  const auto mask = disk_mask(1.0 / 64);

  SUBCASE("power 4 passes and power 3 fails for g = z, f = (conj z)") {
    const auto at = quotient_extension_lemma(Z, {ZB}, 4, mask);
    CHECK(at.verdict == Verdict::Pass);
    CHECK(at.slope == doctest::Approx(1.0).epsilon(0.05));
    const auto below = quotient_extension_lemma(Z, {ZB}, 3, mask, {}, false);
    CHECK(below.verdict == Verdict::Fail);
    CHECK(std::abs(below.slope) < 0.05);
  }

  SUBCASE("g = 0 gives the zero field") {
    const auto q = quotient_extension_lemma(Expr(0.0), {Z}, 4, mask);
    CHECK(max_abs(q.q) == 0.0);
    CHECK(q.verdict == Verdict::Pass);
  }

  SUBCASE("power 7 at the boundary case |g|^2 = |f|") {
    const auto q = quotient_extension_lemma(Z, {pow(Z, 2)}, 7, mask);
    CHECK(q.verdict == Verdict::Pass);
    CHECK(q.slope == doctest::Approx(2.0).epsilon(0.05));  // |D(z^5/conj(z)^2)| ~ r^2
    // Evidence for this family only: power 6 already has a decaying gradient.
    CHECK(smallest_passing_power({pow(Z, 2)}, 1, 7, mask) == 6);
  }

  SUBCASE("hypotheses") {
    CHECK_THROWS_AS(quotient_extension_lemma(Expr(2.0) * Z, {Z}, 4, mask), PreconditionError);
    CHECK_THROWS_AS(quotient_extension_lemma(Z, {pow(Z, 3)}, 7, mask), PreconditionError);
    CHECK_THROWS_AS(quotient_extension_lemma(Z, {Z}, 5, mask), ConfigError);
  }
}

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "dbarlab/geometry.hpp"

using namespace dbarlab;

namespace {

MaskPtr mask_of(const CompactDomain& d, double h) {
  return share(build_mask(d, GridSpec::covering(d.bounding_box(), h)));
}

const CompactDomain unit_disk = CompactDomain::disk({0, 0}, 1.0);

}  // namespace

TEST_CASE("interior shortest paths on the disk") {
  const auto coarse = mask_of(unit_disk, 1.0 / 64);
  const auto fine = mask_of(unit_disk, 1.0 / 128);

  SUBCASE("diameters") {
    const auto axis = interior_shortest_path(*coarse, -0.8, 0.8);
    CHECK(axis.ratio == doctest::Approx(1.0).epsilon(1e-12));
    const cplx d = std::polar(0.8, 0.3);
    const auto slanted = interior_shortest_path(*coarse, -d, d);
    CHECK(slanted.ratio >= 1.0);
    CHECK(slanted.ratio <= 1.09);
  }

  SUBCASE("random lattice pairs: octile distortion and refinement") {
    // Endpoints on the 1/64 lattice are nodes of both grids.
    std::mt19937 rng(3);
    std::uniform_int_distribution<int> U(-41, 41);
    for (int t = 0; t < 20; ++t) {
      const cplx a(U(rng) / 64.0, U(rng) / 64.0), b(U(rng) / 64.0, U(rng) / 64.0);
      if (std::abs(a) > 0.9 || std::abs(b) > 0.9 || a == b) continue;
      const auto pc = interior_shortest_path(*coarse, a, b);
      const auto pf = interior_shortest_path(*fine, a, b);
      CHECK(pc.ratio >= 1.0);
      CHECK(pf.ratio >= 1.0);
      CHECK(pc.ratio <= std::sqrt(4.0 - 2.0 * std::numbers::sqrt2) + 1e-12);
      CHECK(pf.length <= pc.length * 1.01);
      for (auto k : pc.nodes) CHECK(coarse->interior(k));
    }
  }

  SUBCASE("boundary endpoint and bad start") {
    const auto p = interior_shortest_path(*coarse, 0.5, 1.0);
    CHECK(p.ratio >= 1.0);
    CHECK(p.ratio <= 1.09);
    CHECK_THROWS_AS(interior_shortest_path(*coarse, 1.0, 0.0), PreconditionError);
  }
}

TEST_CASE("comb teeth force long detours") {
  const auto comb = CompactDomain::comb();
  const auto mask = mask_of(comb, 1.0 / 512);
  double previous = 0.0;
  for (int n = 1; n <= 3; ++n) {
    const cplx a(1.0 / n, 0.9), b(1.0 / (n + 1), 0.9);
    const auto p = interior_shortest_path(*mask, a, b);
    // Oracle: the path touches y = 0 between the teeth; reflecting b across
    // that line bounds its length below by hypot(dx, 1.8).
    const double dx = std::abs(a.real() - b.real());
    const double lower = std::hypot(dx, 2 * 0.9) / std::abs(a - b);
    INFO("teeth " << n << "," << n + 1 << " ratio " << p.ratio << " bound " << lower);
    CHECK(p.ratio >= lower);
    CHECK(p.ratio <= lower * 1.1 + 0.5);
    CHECK(p.ratio > previous);
    previous = p.ratio;
  }
  CHECK(previous > 20.0);
}

TEST_CASE("disk chain components are disconnected") {
  const auto mask = mask_of(CompactDomain::disk_chain(3), 1e-3);
  CHECK_THROWS_AS(interior_shortest_path(*mask, -1.0, 1.0 / 3), NumericalError);
  try {
    interior_shortest_path(*mask, -1.0, 1.0 / 3);
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("disconnected at this resolution") != std::string::npos);
  }
}

TEST_CASE("L-probe verdicts") {
  SUBCASE("disk at z0 = 1 is bounded at two resolutions") {
    for (double h : {1.0 / 128, 1.0 / 256}) {
      const auto rep = l_probe(unit_disk, 1.0, {0.2, 0.1, 0.05}, 64, h);
      for (const auto& s : rep.scales) {
        CHECK(s.samples > 0);
        CHECK(s.max_ratio <= 2.0);
        CHECK(s.max_ratio >= 1.0);
      }
      CHECK(rep.verdict == LVerdict::Bounded);
    }
  }

  SUBCASE("inner spiral at 0 is growing at two resolutions") {
    const auto spiral = CompactDomain::inner_spiral();
    for (double h : {2e-4, 1.5e-4}) {
      const auto rep = l_probe(spiral, 0.0, {0.24, 0.12, 0.06}, 256, h);
      REQUIRE(rep.scales.size() == 3);
      for (const auto& s : rep.scales) {
        // Oracle: any path from radius r to radius r/2 winds through
        // theta in [1/r, 2/r - 1] with |z| >= 1/(theta + 1).
        const double bound = (std::log(1.0 / (0.5 * (1.0 + s.r))) + 0.5 * s.r) / s.r;
        INFO("h " << h << " r " << s.r << " ratio " << s.max_ratio << " bound " << bound);
        CHECK(s.max_ratio >= 0.95 * bound);
      }
      CHECK(rep.verdict == LVerdict::Growing);
    }
  }

  SUBCASE("sector chain at 0 has no interior path") {
    CHECK_THROWS_AS(l_probe(CompactDomain::sector_chain(4), 0.0, {0.2}, 64, 1.0 / 512), NumericalError);
  }

  SUBCASE("empty circles are skipped") {
    const auto rep = l_probe(unit_disk, 1.0, {5.0, 0.2, 0.1}, 32, 1.0 / 64);
    CHECK(rep.scales[0].samples == 0);
    CHECK(std::isnan(rep.scales[0].max_ratio));
    CHECK(!rep.scales[0].note.empty());
  }
}

TEST_CASE("boundary Taylor remainders") {
  const Expr Z = Expr::z();

  SUBCASE("polynomials are exact") {
    const auto rep = taylor_remainder_fit(pow(Z, 2) + Expr(1.0), 1.0, 2, unit_disk);
    CHECK(rep.pass);
    for (const auto& r : rep.remainders) CHECK(r.exact);
  }

  SUBCASE("exp at 1 on disk(0, 1.5)") {
    const auto rep = taylor_remainder_fit(exp(Z), 1.0, 2, CompactDomain::disk({0, 0}, 1.5));
    REQUIRE(rep.remainders.size() == 3);
    CHECK(rep.remainders[0].slope >= 2.8);
    for (const auto& r : rep.remainders) {
      INFO("j " << r.j << " slope " << r.slope);
      CHECK(r.slope == doctest::Approx(3 - r.j).epsilon(0.1));
      CHECK(r.pass);
    }
    REQUIRE(rep.quotient_slope);
    CHECK(*rep.quotient_slope >= 0.8);
    CHECK(rep.pass);
  }

  SUBCASE("sqrt(1 - z) at 1") {
    const Expr f = sqrt(Expr(1.0) - Z);
    const auto rep = taylor_remainder_fit(f, 1.0, 0, unit_disk);
    CHECK(std::abs(rep.derivatives[0]) < 1e-5);
    // Closed form |R_0| = |1 - z|^(1/2): the arc maximum is sqrt(r).
    for (std::size_t k = 0; k < rep.remainders[0].radii.size(); ++k)
      CHECK(rep.remainders[0].max_abs[k] == doctest::Approx(std::sqrt(rep.remainders[0].radii[k])).epsilon(1e-3));
    CHECK(rep.remainders[0].slope == doctest::Approx(0.5).epsilon(0.02));
    CHECK(rep.pass);
    CHECK(rep.remainders[0].slope < 1.0);  // too slow for a first-order expansion
    CHECK_THROWS_AS(taylor_remainder_fit(f, 1.0, 1, unit_disk), PreconditionError);
  }

  SUBCASE("non-holomorphic input") {
    CHECK_THROWS_AS(taylor_remainder_fit(Expr::zbar(), 0.0, 1, unit_disk), PreconditionError);
  }
}

TEST_CASE("disk chain difference quotients") {
  const auto rows = disk_chain_quotient_demo(8);
  REQUIRE(rows.size() == 8);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    CHECK(rows[k].n == static_cast<int>(k) + 3);
    CHECK(rows[k].quotient == doctest::Approx(rows[k].sqrt_n).epsilon(1e-15));
    CHECK(rows[k].interior_derivative == 0.0);
    if (k > 0) CHECK(rows[k].quotient > rows[k - 1].quotient);
  }
  CHECK(rows[1].quotient == 2.0);
  CHECK(rows[6].quotient == 3.0);
  CHECK(rows[0].quotient == doctest::Approx(1.7320508).epsilon(1e-8));
  CHECK_THROWS_AS(disk_chain_quotient_demo(2), ConfigError);
}

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "dbarlab/domain.hpp"
#include "dbarlab/expr.hpp"

using namespace dbarlab;

namespace {

const Expr Z = Expr::z();
const Expr ZB = Expr::zbar();

struct Wirtinger {
  cplx d, dbar;
};

Wirtinger finite_difference(const Expr& e, cplx z, double step = 1e-5) {
  const cplx fx = (e.eval(z + step) - e.eval(z - step)) / (2 * step);
  const cplx fy = (e.eval(z + cplx(0, step)) - e.eval(z - cplx(0, step))) / (2 * step);
  const cplx i(0, 1);
  return {0.5 * (fx - i * fy), 0.5 * (fx + i * fy)};
}

// Random trees that stay bounded and pole-free on |z| <= 0.5.
Expr random_expr(std::mt19937& rng, int depth, bool holo) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 2 : 10);
  std::uniform_real_distribution<double> u(-1, 1);
  switch (pick(rng)) {
    case 0: return Expr(cplx(u(rng), u(rng)));
    case 1: return Z;
    case 2: return holo ? Z * Expr(cplx(u(rng), u(rng))) : ZB;
    case 3: return random_expr(rng, depth - 1, holo) + random_expr(rng, depth - 1, holo);
    case 4: return random_expr(rng, depth - 1, holo) * random_expr(rng, depth - 1, holo);
    case 5: {
      // exp never vanishes, so the quotient is pole-free.
      return random_expr(rng, depth - 1, holo) / exp(Expr(0.2) * random_expr(rng, depth - 1, holo));
    }
    case 6: return exp(Expr(0.3) * random_expr(rng, depth - 1, holo));
    case 7: return pow(random_expr(rng, depth - 1, holo), 2 + static_cast<int>(rng() % 2));
    case 8:
      return holo ? -random_expr(rng, depth - 1, holo) : conj(random_expr(rng, depth - 1, holo));
    case 9: return Expr::mobius(1.0, 0.5, 0.2, 3.0, Expr(0.2) * random_expr(rng, depth - 1, holo));
    default: return Expr::atomic_inner(Expr(0.1) * random_expr(rng, depth - 1, holo));
  }
}

cplx random_point(std::mt19937& rng) {
  std::uniform_real_distribution<double> r(0, 0.5), t(-std::numbers::pi, std::numbers::pi);
  return std::polar(r(rng), t(rng));
}

}  // namespace

TEST_CASE("evaluation") {
  CHECK(std::abs((Z * ZB).eval({3, 4}) - 25.0) < 1e-12);
  CHECK(std::abs(Expr::atomic_inner().eval(0) - std::exp(-1.0)) < 1e-15);
  double last = 1.0;
  for (double r : {0.5, 0.8, 0.9, 0.95, 0.99, 0.999}) {
    const double v = std::abs(Expr::atomic_inner().eval(r));
    CHECK(v < last);
    last = v;
  }
  CHECK(last < 1e-100);
  CHECK_THROWS_AS(Expr::atomic_inner().eval(1.0), PoleError);
  try {
    (Expr(1.0) + Expr(1.0) / Z).eval(0.0);
    FAIL("expected a pole");
  } catch (const PoleError& e) {
    CHECK(e.subtree() == "div(1,z)");
  }
}

TEST_CASE("constant folding") {
  CHECK((Expr(2.0) * Expr(3.0)).is_const());
  CHECK((Expr(0.0) * Z).is_const());
  CHECK((Z + Expr(0.0)).op() == Expr::Op::Z);
  CHECK(pow(pow(Z, 2), 3).power() == 6);
  CHECK(conj(conj(Z * ZB)).str() == (Z * ZB).str());
  CHECK(Z.d().is_const());
  CHECK(pow(Z, 5).dbar().is_const());
}

TEST_CASE("Wirtinger derivatives of the named examples") {
  CHECK(ZB.dbar().const_value() == cplx(1, 0));
  const Expr q = pow(Z, 2) / ZB;
  const Expr expected = -pow(Z, 2) / pow(ZB, 2);
  const Expr q3 = pow(Z, 3) / ZB;
  const Expr expected3 = Expr(-3.0) * pow(Z, 2) / pow(ZB, 2);
  std::mt19937 rng(7);
  for (int k = 0; k < 50; ++k) {
    const cplx z = random_point(rng) + 0.01;
    CHECK(std::abs(q.dbar().eval(z) - expected.eval(z)) < 1e-9 * std::abs(expected.eval(z)));
    CHECK(std::abs(q3.dbar().d().eval(z) - expected3.eval(z)) < 1e-9 * std::abs(expected3.eval(z)));
  }
  // S'(z) = S(z) * (-2/(1-z)^2), compared against the exp/Mobius composition.
  const Expr s = Expr::atomic_inner();
  const Expr composed = exp(-Expr::mobius(1, 1, -1, 1, Z));
  for (int k = 0; k < 20; ++k) {
    const cplx z = random_point(rng);
    CHECK(std::abs(s.d().eval(z) - composed.d().eval(z)) < 1e-12);
    CHECK(std::abs(s.eval(z) - composed.eval(z)) < 1e-14);
  }
}

TEST_CASE("symbolic derivatives match finite differences") {
  std::mt19937 rng(20240917);
  int checked = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const Expr e = random_expr(rng, 5, false);
    const Expr d = e.d(), db = e.dbar();
    for (int k = 0; k < 3; ++k) {
      const cplx z = random_point(rng);
      const auto fd = finite_difference(e, z);
      const cplx sd = d.eval(z), sdb = db.eval(z);
      INFO(e.str());
      CHECK(std::abs(sd - fd.d) <= 1e-6 * std::max(1.0, std::abs(sd)));
      CHECK(std::abs(sdb - fd.dbar) <= 1e-6 * std::max(1.0, std::abs(sdb)));
      ++checked;
    }
  }
  CHECK(checked == 900);
}

TEST_CASE("conj-free trees have vanishing dbar") {
  std::mt19937 rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    const Expr e = random_expr(rng, 5, true);
    REQUIRE(e.holomorphic());
    const Expr db = e.dbar();
    CHECK(std::abs(db.eval(random_point(rng))) <= 1e-12);
  }
}

TEST_CASE("dbar(conj f) = conj(d f)") {
  std::mt19937 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const Expr f = random_expr(rng, 4, false);
    const cplx z = random_point(rng);
    const cplx lhs = conj(f).dbar().eval(z);
    const cplx rhs = std::conj(f.d().eval(z));
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
  }
}

TEST_CASE("compiled evaluation agrees with the recursive one") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Expr f = random_expr(rng, 5, false).d();
    const CompiledExpr c(f);
    const cplx z = random_point(rng);
    CHECK(std::abs(c(z) - f.eval(z)) <= 1e-13 * std::max(1.0, std::abs(f.eval(z))));
  }
  const CompiledExpr inv(Expr(1.0) / Z);
  CHECK_FALSE(inv.try_eval(0.0));
  CHECK_THROWS_AS(inv(0.0), PoleError);
}

TEST_CASE("parser") {
  const Expr e = parse_expr("mul(sub(1,z), S)");
  CHECK(std::abs(e.eval(0.3) - 0.7 * std::exp(-1.3 / 0.7)) < 1e-15);
  CHECK(std::abs(parse_expr("div(1, add(1, abs2(z)))").eval({0.5, 0.5}) - 1.0 / 1.5) < 1e-15);
  CHECK(std::abs(parse_expr("pow(zbar, 3)").eval({0, 1}) - cplx(0, 1)) < 1e-15);
  CHECK(std::abs(parse_expr("c(1, -2)").eval(0) - cplx(1, -2)) < 1e-15);
  CHECK(std::abs(parse_expr("sqrt(sub(1,z))").eval(-3.0) - 2.0) < 1e-14);
  CHECK(std::abs(parse_expr("mobius(1, 0, 0, 2, mul(i, z))").eval(2.0) - cplx(0, 1)) < 1e-15);
  CHECK(std::abs(parse_expr("neg(pi)").eval(0) + std::numbers::pi) < 1e-15);
  CHECK(parse_expr("S(mul(2,z))").str() == "S(mul(2,z))");

  std::mt19937 rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const Expr f = random_expr(rng, 4, false);
    const Expr g = parse_expr(f.str());
    const cplx z = random_point(rng);
    CHECK(std::abs(f.eval(z) - g.eval(z)) <= 1e-13 * std::max(1.0, std::abs(f.eval(z))));
  }

  auto position_of = [](const std::string& s) -> std::size_t {
    try {
      parse_expr(s);
    } catch (const ParseError& e) {
      return e.position();
    }
    return std::string::npos;
  };
  CHECK(position_of("mul(z, foo(1))") == 7);
  CHECK(position_of("add(z 1)") == 6);
  CHECK(position_of("pow(z, 1.5)") == 3);
  CHECK(position_of("exp(z") == 5);
  CHECK(position_of("z)") == 1);
  CHECK(position_of("") == 0);
  CHECK(parse_expr_list("z; sub(1,z)").size() == 2);
  CHECK_THROWS_AS(parse_expr_list(" ; "), ParseError);
}

TEST_CASE("directional limit probe") {
  const std::vector<double> radii = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
  SUBCASE("-z^2/conj(z)^2 has direction-dependent limits") {
    const Expr e = -pow(Z, 2) / pow(ZB, 2);
    const auto p = directional_limit_probe(e, 0, {1.0, std::polar(1.0, std::numbers::pi / 4)}, radii);
    CHECK(p.limits_disagree);
    CHECK(std::abs(*p.tails[0] - cplx(-1, 0)) < 1e-12);
    CHECK(std::abs(*p.tails[1] - cplx(1, 0)) < 1e-12);
  }
  SUBCASE("z^2 tends to 0 along every direction") {
    const auto p = directional_limit_probe(pow(Z, 2), 0, {1.0, cplx(0, 1), std::polar(1.0, 2.0)}, radii);
    CHECK_FALSE(p.limits_disagree);
    for (const auto& t : p.tails) CHECK(std::abs(*t) < 1e-9);
  }
  SUBCASE("Delta = 2z/g on the sector chain") {
    // g = conj(C_n) on the n-th sector; sampling at the corners 4^-n e^{+-i pi/4}.
    const Expr delta = Expr(2.0) * Z / Expr::sector_corner_conj();
    std::vector<double> corners;
    for (int n = 1; n <= 8; ++n) corners.push_back(std::pow(4.0, -n));
    const auto p = directional_limit_probe(
        delta, 0, {std::polar(1.0, std::numbers::pi / 4), std::polar(1.0, -std::numbers::pi / 4)}, corners);
    CHECK(p.limits_disagree);
    CHECK(std::abs(*p.tails[0] - cplx(0, 2)) < 1e-12);
    CHECK(std::abs(*p.tails[1] - cplx(2, 0)) < 1e-12);
  }
  SUBCASE("poles are skipped with a note") {
    const auto p = directional_limit_probe(Expr(1.0) / (Z - Expr(0.01)), 0, {1.0}, {0.1, 0.01, 0.001});
    CHECK(p.notes.size() == 1);
    CHECK_FALSE(p.samples[0][1]);
  }
}

#include <cmath>
#include <random>

#include "doctest.h"
#include "dbarlab/corona.hpp"

using namespace dbarlab;

namespace {

const Expr Z = Expr::z();
const Expr ZB = Expr::zbar();
const CompactDomain unit_disk = CompactDomain::disk({0, 0}, 1.0);

MaskPtr disk_mask(double h) {
  return share(build_mask(unit_disk, GridSpec::covering(unit_disk.bounding_box(), h)));
}

double slope(double h0, double e0, double h1, double e1) { return std::log(e0 / e1) / std::log(h0 / h1); }

// x = (1/(1+|z|^2), conj(z)/(1+|z|^2)) with x . (z^2, z^3) = z^2.
const std::vector<Expr> x_quad = {Expr(1.0) / (Expr(1.0) + Z * ZB), ZB / (Expr(1.0) + Z * ZB)};
const std::vector<Expr> f_quad = {pow(Z, 2), pow(Z, 3)};

}  // namespace

TEST_CASE("antisymmetric storage") {
  const auto mask = disk_mask(1.0 / 16);
  auto H = AntisymMatrixField::zeros(4, mask);
  CHECK(H.upper.size() == 6);
  std::size_t expect = 0;
  for (std::size_t j = 0; j < 4; ++j)
    for (std::size_t k = j + 1; k < 4; ++k) CHECK(H.slot(j, k) == expect++);
  const std::size_t node = *mask->grid().nearest(0.0);
  H.entry(1, 3)[node] = {2, 1};
  CHECK(H.at(3, 1, node) == cplx(-2, -1));
  CHECK(H.at(2, 2, node) == cplx(0, 0));
  CHECK_THROWS_AS(AntisymMatrixField::zeros(0, mask), ConfigError);

  // f H f^t = 0 for random antisymmetric H.
  std::mt19937 rng(1);
  std::normal_distribution<double> nd;
  for (auto& e : H.upper)
    for (std::size_t k = 0; k < mask->size(); ++k)
      if (mask->inside(k)) e[k] = {nd(rng), nd(rng)};
  const std::vector<Expr> f = {Z, Expr(1.0) - Z, exp(Z), pow(Z, 3)};
  std::vector<SampledField> fs;
  for (const auto& fj : f) fs.push_back(sample(fj, mask));
  double worst = 0.0;
  for (std::size_t k = 0; k < mask->size(); ++k) {
    if (!mask->inside(k)) continue;
    cplx s;
    for (std::size_t a = 0; a < 4; ++a)
      for (std::size_t b = 0; b < 4; ++b) s += fs[a][k] * H.at(a, b, k) * fs[b][k];
    worst = std::max(worst, std::abs(s));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("koszul F") {
  const auto mask = disk_mask(1.0 / 32);
  SUBCASE("holomorphic x gives F = 0") {
    const auto F = koszul_F({Expr(1.0), Z}, {Z, Expr(1.0) - Z}, mask, Expr(1.0));
    CHECK(max_abs(F.entry(0, 1)) == 0.0);
  }
  SUBCASE("n = 1") { CHECK(koszul_F({Expr(1.0)}, {Expr(2.0)}, mask).upper.empty()); }
  SUBCASE("hand evaluation at z = 1/2") {
    // dbar x1 = -z/(1+|z|^2)^2, dbar x2 = 1/(1+|z|^2)^2 (z conj z cancels):
    // at z = 1/2, (1+1/4)^2 = 25/16 so dbar x1 = -8/25, dbar x2 = 16/25.
    // conj f1 = 1/4, conj f2 = 1/8, |f|^2 = 1/16 + 1/64 = 5/64.
    // F12 = (16/25 * 1/4 - (-8/25) * 1/8) / (5/64) = (4/25 + 1/25) * 64/5 = 64/25.
    const auto F = koszul_F_expr(x_quad, f_quad);
    REQUIRE(F.size() == 1);
    CHECK(std::abs(F[0].eval(0.5) - 64.0 / 25.0) < 1e-13);
    const auto Fs = koszul_F(x_quad, f_quad, mask, Expr(1.0));
    const std::size_t node = *mask->grid().nearest(0.5);
    CHECK(std::abs(Fs.entry(0, 1)[node] - 64.0 / 25.0) < 1e-13);
  }
  SUBCASE("unweighted F needs |f| > 0") {
    CHECK_THROWS_AS(koszul_F(x_quad, f_quad, mask), PreconditionError);
  }
  SUBCASE("field route agrees with the symbolic one away from the boundary") {
    const std::vector<Expr> f = {Expr(1.0) - Z, Z};
    // (1 + zbar z)(1 - z) + (1 + zbar (z - 1)) z = 1.
    const std::vector<Expr> x = {Expr(1.0) + ZB * Z, Expr(1.0) + ZB * (Z - Expr(1.0))};
    const auto fine = disk_mask(1.0 / 128);
    std::vector<SampledField> xs, fs;
    for (std::size_t j = 0; j < 2; ++j) {
      xs.push_back(sample(x[j], fine));
      fs.push_back(sample(f[j], fine));
    }
    const auto a = koszul_F(xs, fs);
    const auto b = koszul_F(x, f, fine);
    const auto keep = shrunk_interior(*fine, 1.0 / 16);
    double worst = 0.0;
    for (std::size_t k = 0; k < keep.size(); ++k)
      if (keep[k]) worst = std::max(worst, std::abs(a.entry(0, 1)[k] - b.entry(0, 1)[k]));
    CHECK(worst < 1e-3);
  }
}

TEST_CASE("algebraic cancellation in dbar(x - f H)") {
  // dbar x_k - sum_j f_j F_jk = (sum_j f_j dbar x_j) conj(f_k) / |f|^2,
  // which is 0 whenever sum x_j f_j is holomorphic.
  const std::vector<Expr> f = {Z, Expr(1.0) - Z, exp(Z)};
  const std::vector<Expr> x = {ZB * Z, Expr(0.5) * ZB, exp(ZB - Z)};
  const auto F = koszul_F_expr(x, f);
  const AntisymMatrixField shape = AntisymMatrixField::zeros(3, disk_mask(0.5));
  std::mt19937 rng(4);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  Expr norm2;
  for (const auto& fj : f) norm2 = norm2 + fj * conj(fj);
  Expr fdx;
  for (std::size_t j = 0; j < 3; ++j) fdx = fdx + f[j] * x[j].dbar();
  for (int trial = 0; trial < 100; ++trial) {
    const cplx z(u(rng), u(rng));
    for (std::size_t k = 0; k < 3; ++k) {
      cplx row;
      for (std::size_t j = 0; j < 3; ++j) {
        if (j == k) continue;
        const cplx Fjk = j < k ? F[shape.slot(j, k)].eval(z) : -F[shape.slot(k, j)].eval(z);
        row += f[j].eval(z) * Fjk;
      }
      const cplx lhs = x[k].dbar().eval(z) - row;
      const cplx rhs = fdx.eval(z) * std::conj(f[k].eval(z)) / norm2.eval(z);
      CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST_CASE("dbar matrix solve") {
  const auto mask = disk_mask(1.0 / 64);
  auto F = AntisymMatrixField::zeros(2, mask);
  const auto zero = solve_dbar_matrix(F);
  CHECK(max_abs(zero.H.entry(0, 1)) == 0.0);
  for (std::size_t k = 0; k < mask->size(); ++k)
    if (mask->inside(k)) F.entry(0, 1)[k] = 1.0;
  const auto one = solve_dbar_matrix(F);
  double worst = 0.0;
  for (std::size_t k = 0; k < mask->size(); ++k)
    if (mask->interior(k))
      worst = std::max(worst, std::abs(one.H.entry(0, 1)[k] - std::conj(mask->grid().node(k))));
  CHECK(worst < 5.0 / 64);
  // Quadrature error of the discrete transform, measured 5.5e-4 at h = 1/64.
  CHECK(one.checks[0].max_deviation < 1e-3);
}

TEST_CASE("corona solve") {
  std::vector<double> dsup;
  for (double h : {1.0 / 64, 1.0 / 128, 1.0 / 256}) {
    const auto p = BezoutProblem::make(unit_disk, {Expr(1.0) - Z, Z}, h);
    const auto s = corona_solve(p);
    INFO("h = " << h << " residual " << s.residual_sup << " dbar " << s.dbar_sup << " start "
                   << s.dbar_sup_start);
    CHECK(s.residual_sup <= 1e-6);
    CHECK(s.dbar_sup <= s.dbar_sup_start);
    dsup.push_back(s.dbar_sup);
  }
  CHECK(dsup[2] <= 1e-3);
  CHECK(slope(1.0 / 64, dsup[0], 1.0 / 256, dsup[2]) >= 0.9);

  const auto p2 = BezoutProblem::make(unit_disk, {pow(Z, 2), pow(Expr(1.0) - Z, 2)}, 1.0 / 256);
  const auto s2 = corona_solve(p2);
  INFO("z^2,(1-z)^2 residual " << s2.residual_sup << " dbar " << s2.dbar_sup << " start "
                                  << s2.dbar_sup_start);
  CHECK(s2.residual_sup <= 1e-6);
  CHECK(s2.dbar_sup <= s2.dbar_sup_start);

  const auto bad = BezoutProblem::make(unit_disk, {Z}, 1.0 / 32);
  CHECK_THROWS_AS(corona_solve(bad), PreconditionError);
}

TEST_CASE("g power solve") {
  SUBCASE("isolated zeros: target g^5") {
    std::vector<double> dsup;
    for (double h : {1.0 / 64, 1.0 / 128, 1.0 / 256}) {
      const auto s = g_power_solve(pow(Z, 2), f_quad, x_quad, true, disk_mask(h));
      INFO("g5 h = " << h << " residual " << s.residual_sup << " dbar " << s.dbar_sup << " start "
                        << s.dbar_sup_start);
      CHECK(s.residual_sup <= 1e-5);
      dsup.push_back(s.dbar_sup);
    }
    CHECK(slope(1.0 / 64, dsup[0], 1.0 / 256, dsup[2]) >= 0.9);
  }
  SUBCASE("general: target g^6") {
    const auto s = g_power_solve(pow(Z, 2), f_quad, x_quad, false, disk_mask(1.0 / 128));
    INFO("g6 residual " << s.residual_sup << " dbar " << s.dbar_sup);
    CHECK(s.residual_sup <= 1e-5);
  }
  SUBCASE("holomorphic x needs no correction") {
    const auto mask = disk_mask(1.0 / 64);
    const auto s = g_power_solve(pow(Z, 2), f_quad, {Expr(1.0), Expr(0.0)}, true, mask);
    CHECK(s.residual_sup <= 1e-12);
    double worst = 0.0;
    for (std::size_t k = 0; k < mask->size(); ++k)
      if (mask->inside(k)) {
        const cplx z = mask->grid().node(k);
        worst = std::max({worst, std::abs(s.u[0][k] - std::pow(z, 8)), std::abs(s.u[1][k])});
      }
    CHECK(worst <= 1e-12);
  }
  SUBCASE("|g| above sum |f_j|") {
    CHECK_THROWS_AS(g_power_solve(Z, f_quad, x_quad, true, disk_mask(1.0 / 32)), PreconditionError);
  }
}

TEST_CASE("g12 solve") {
  SUBCASE("n = 1 reduces to division") {
    const auto mask = disk_mask(1.0 / 64);
    const auto s = g12_solve(Z, {Z}, {ZB}, mask);
    CHECK(s.residual_sup <= 1e-12);
    double worst = 0.0;
    for (std::size_t k = 0; k < mask->size(); ++k)
      if (mask->inside(k)) worst = std::max(worst, std::abs(s.u[0][k] - std::pow(mask->grid().node(k), 11)));
    CHECK(worst <= 1e-12);
  }
  SUBCASE("f = (z^2, z^3), g = z^2") {
    const auto s = g12_solve(pow(Z, 2), f_quad, {pow(ZB, 2), pow(ZB, 3)}, disk_mask(1.0 / 256));
    INFO("g12 residual " << s.residual_sup << " dbar " << s.dbar_sup << " start " << s.dbar_sup_start);
    CHECK(s.residual_sup <= 1e-5);
    CHECK(s.dbar_sup <= s.dbar_sup_start);
  }
  SUBCASE("hypothesis fails") {
    CHECK_THROWS_AS(g12_solve(pow(Z, 2), f_quad, {Expr(0.0), Expr(0.0)}, disk_mask(1.0 / 32)),
                    PreconditionError);
  }
}

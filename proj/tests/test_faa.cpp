#include <cmath>
#include <map>

#include "doctest.h"
#include "dbarlab/faa.hpp"

using namespace dbarlab;

namespace {

// Independent oracles: partition count by dynamic programming, Bell numbers
// by the Aitken triangle, Stirling numbers of the second kind by recurrence.
std::uint64_t partition_count(int n) {
  std::vector<std::uint64_t> p(static_cast<std::size_t>(n) + 1, 0);
  p[0] = 1;
  for (int part = 1; part <= n; ++part)
    for (int m = part; m <= n; ++m) p[static_cast<std::size_t>(m)] += p[static_cast<std::size_t>(m - part)];
  return p[static_cast<std::size_t>(n)];
}

std::uint64_t bell(int n) {
  std::vector<std::uint64_t> row = {1};
  for (int k = 1; k <= n; ++k) {
    std::vector<std::uint64_t> next = {row.back()};
    for (auto v : row) next.push_back(next.back() + v);
    row = next;
  }
  return row.front();
}

std::uint64_t stirling2(int n, int j) {
  std::vector<std::vector<std::uint64_t>> s(static_cast<std::size_t>(n) + 1,
                                            std::vector<std::uint64_t>(static_cast<std::size_t>(n) + 1, 0));
  s[0][0] = 1;
  for (int a = 1; a <= n; ++a)
    for (int b = 1; b <= a; ++b)
      s[a][b] = static_cast<std::uint64_t>(b) * s[a - 1][b] + s[a - 1][b - 1];
  return s[static_cast<std::size_t>(n)][static_cast<std::size_t>(j)];
}

}  // namespace

TEST_CASE("partitions") {
  CHECK(enumerate_partitions(1) == std::vector<MultiIndex>{{1}});
  CHECK(enumerate_partitions(4) == std::vector<MultiIndex>{{4}, {3, 1}, {2, 2}, {2, 1, 1}, {1, 1, 1, 1}});
  CHECK(enumerate_partitions(10).size() == 42);
  for (int n = 1; n <= 25; ++n) {
    const auto ps = enumerate_partitions(n);
    CHECK(ps.size() == partition_count(n));
    for (std::size_t i = 0; i < ps.size(); ++i) {
      CHECK(std::is_sorted(ps[i].rbegin(), ps[i].rend()));
      int total = 0;
      for (int k : ps[i]) total += k;
      CHECK(total == n);
      if (i > 0) CHECK(ps[i - 1] > ps[i]);  // strictly descending, so no duplicates
    }
  }
  CHECK_THROWS_AS(enumerate_partitions(0), ConfigError);
}

TEST_CASE("coefficients") {
  CHECK(faa_coefficient(1, {1}) == 1);
  CHECK(faa_coefficient(3, {3}) == 1);
  CHECK(faa_coefficient(3, {2, 1}) == 3);
  CHECK(faa_coefficient(3, {1, 1, 1}) == 1);
  CHECK(faa_coefficient(4, {2, 1, 1}) == 6);
  CHECK(faa_coefficient(4, {2, 2}) == 3);
  CHECK_THROWS_AS(faa_coefficient(4, {2, 1}), ConfigError);
  CHECK_THROWS_AS(faa_coefficient(3, {1, 2}), ConfigError);
  CHECK_THROWS_AS(faa_coefficient(21, MultiIndex(21, 1)), ConfigError);
  CHECK(faa_coefficient(20, MultiIndex(20, 1)) == 1);
  CHECK(faa_coefficient(20, {20}) == 1);

  for (int n = 1; n <= 20; ++n) {
    std::uint64_t sum = 0;
    std::map<std::size_t, std::uint64_t> by_length;
    for (const auto& row : coefficient_table(n)) {
      CHECK(row.coefficient >= 1);
      sum += row.coefficient;
      by_length[row.k.size()] += row.coefficient;
    }
    CHECK(sum == bell(n));
    for (const auto& [j, c] : by_length) CHECK(c == stirling2(n, static_cast<int>(j)));
  }
  CHECK(bell(4) == 15);
  CHECK(bell(5) == 52);
}

TEST_CASE("composite derivatives") {
  const Expr Z = Expr::z();

  SUBCASE("first order is the chain rule") {
    CHECK(compose_derivative({2.0}, {3.0}, 1) == cplx(6.0));
    CHECK_THROWS_AS(compose_derivative({1.0}, {1.0, 2.0}, 2), PreconditionError);
  }

  SUBCASE("exp(x^2) at 1") {
    // d^n/dx^n exp(x^2) = H_n-type polynomials; at x = 1: 2e, 6e, 20e, 76e.
    const std::vector<double> expect = {2, 6, 20, 76};
    const double e = std::exp(1.0);
    for (int n = 1; n <= 4; ++n) {
      const std::vector<cplx> fd(static_cast<std::size_t>(n), e);
      std::vector<cplx> gd = {2.0, 2.0, 0.0, 0.0};
      gd.resize(static_cast<std::size_t>(n));
      const cplx formula = compose_derivative(fd, gd, n);
      const cplx oracle = taylor_oracle(exp(Z), pow(Z, 2), 1.0, n);
      CHECK(std::abs(formula - expect[n - 1] * e) <= 1e-12 * expect[n - 1] * e);
      CHECK(std::abs(oracle - formula) <= 1e-12 * std::abs(formula));
    }
  }

  SUBCASE("linear inner function keeps only (1,...,1)") {
    for (int n = 1; n <= 12; ++n) {
      std::vector<cplx> fd, gd(static_cast<std::size_t>(n), 0.0);
      for (int j = 1; j <= n; ++j) fd.push_back(cplx(j, 1.0 / j));
      gd[0] = cplx(0.5, -1.5);
      CHECK(std::abs(compose_derivative(fd, gd, n) - fd.back() * std::pow(gd[0], n)) <=
            1e-12 * std::abs(fd.back() * std::pow(gd[0], n)));
    }
  }

  SUBCASE("oracle edge cases") {
    const Expr g = Expr(0.5) * Z + pow(Z, 3);
    for (int n = 0; n <= 5; ++n) {
      const auto d = n == 0 ? g.eval(0.3) : jet_derivatives(g, 0.3, n).back();
      CHECK(std::abs(taylor_oracle(Z, g, 0.3, n) - d) <= 1e-14);
    }
    CHECK(std::abs(taylor_oracle(exp(Z), g, 0.3, 0) - std::exp(g.eval(0.3))) <= 1e-14);
    CHECK_THROWS_AS(taylor_oracle(Z, Expr(1.0) / Z, 0.0, 2), PoleError);
    CHECK_THROWS_AS(taylor_oracle(Z, Expr::zbar(), 0.5, 2), PreconditionError);
  }

  SUBCASE("jets agree with symbolic differentiation at low order") {
    const Expr g = Expr::mobius(0.3, 0.1, 0.2, 1.0, Z) * exp(Expr(cplx(0.2, 0.4)) * Z);
    Expr d = g;
    const auto jets = jet_derivatives(g, cplx(0.2, -0.1), 6);
    for (int k = 0; k < 6; ++k) {
      d = d.d();
      const cplx v = CompiledExpr(d)(cplx(0.2, -0.1));
      CHECK(std::abs(jets[static_cast<std::size_t>(k)] - v) <= 1e-12 * std::abs(v));
    }
  }

  SUBCASE("random battery against the Taylor oracle") {
    const auto rep = faa_verify(12, 200, 20240611u);
    INFO("worst relative " << rep.worst_relative << " at order " << rep.worst_order);
    CHECK(rep.worst_relative <= 1e-10);
  }
}

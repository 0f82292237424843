#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "dbarlab/cli.hpp"
#include "dbarlab/config.hpp"
#include "dbarlab/error.hpp"

using namespace dbarlab;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("config grammar") {
  const auto c = Config::parse(
      "# comment\n"
      "[grid]\n"
      "h = 1/64, 1/128 ,0.00390625\n"
      "; another comment\n"
      "[corona]\n"
      "f = sub(1, z); z\n"
      "dump = yes\n"
      "degree = 12\n");
  const auto h = c.numbers("grid.h");
  REQUIRE(h.size() == 3);
  CHECK(h[0] == 1.0 / 64);
  CHECK(h[1] == 1.0 / 128);
  CHECK(h[2] == 1.0 / 256);
  CHECK(c.require("corona.f") == "sub(1, z); z");
  CHECK(c.flag("corona.dump", false));
  CHECK(c.integer("corona.degree", 0) == 12);
  CHECK(c.integer("corona.missing", 7) == 7);
  CHECK(c.section("corona").size() == 3);
  CHECK(c.section("nothing").empty());
  CHECK_THROWS_AS(c.require("corona.g"), ConfigError);
  CHECK_THROWS_AS(c.integer("corona.f", 0), ConfigError);
  CHECK_THROWS_AS(c.flag("corona.f", false), ConfigError);
  CHECK_THROWS_WITH_AS(Config::parse("[a]\nno equals sign\n"), doctest::Contains("line 2"), ConfigError);
  CHECK_THROWS_AS(Config::load("/nonexistent/x.cfg"), ConfigError);
}

TEST_CASE("numbers and ladders") {
  CHECK(parse_number(" 1/8 ") == 0.125);
  CHECK(parse_number("-2.5e-1") == -0.25);
  CHECK_THROWS_AS(parse_number("1/0"), ConfigError);
  CHECK_THROWS_AS(parse_number("abc"), ConfigError);
  CHECK_THROWS_AS(parse_number("1.5x"), ConfigError);
  CHECK_THROWS_AS(parse_number(""), ConfigError);
  CHECK_NOTHROW(validate_ladder({0.1, 0.05}));
  CHECK_THROWS_AS(validate_ladder({}), ConfigError);
  CHECK_THROWS_AS(validate_ladder({0.1, 0.1}), ConfigError);
  CHECK_THROWS_AS(validate_ladder({0.1, -0.05}), ConfigError);
}

TEST_CASE("run: faa and checks") {
  auto c = Config::parse("[run]\ncommand = faa\n[faa]\nn = 5\n");
  auto r = run(c);
  CHECK(r.metrics.at("coefficient_sum") == 52);
  CHECK(r.metrics.at("partitions") == 7);
  CHECK(r.exit_status == kExitOk);

  c.set("checks.max_coefficient_sum", "52");
  c.set("checks.min_partitions", "7");
  r = run(c);
  CHECK(r.exit_status == kExitOk);
  REQUIRE(r.checks.size() == 2);
  CHECK(r.checks[0].pass);

  c.set("checks.min_coefficient_sum", "53");
  r = run(c);
  CHECK(r.exit_status == kExitAcceptance);
  CHECK(render(r).find("FAIL min_coefficient_sum") != std::string::npos);

  auto bad = Config::parse("[run]\ncommand = faa\n[checks]\nmax_no_such_metric = 1\n");
  CHECK_THROWS_AS(run(bad), ConfigError);
  bad = Config::parse("[run]\ncommand = faa\n[checks]\nmax_partitions = 0\n");
  CHECK_THROWS_WITH_AS(run(bad), doctest::Contains("positive"), ConfigError);
  bad = Config::parse("[run]\ncommand = faa\n[checks]\nabout_partitions = 1\n");
  CHECK_THROWS_AS(run(bad), ConfigError);
  bad = Config::parse("[run]\ncommand = nope\n");
  CHECK_THROWS_AS(run(bad), ConfigError);
  CHECK_THROWS_AS(run(Config()), ConfigError);
}

TEST_CASE("run: levels and slopes") {
  auto c = Config::parse("[run]\ncommand = domains\n[domain]\nspec = disk:0,0,1\n");
  RunOptions o;
  o.levels = 2;
  CHECK(run(c, o).h.size() == 2);
  o.levels = 4;
  CHECK_THROWS_AS(run(c, o), ConfigError);
  o.levels = 0;
  CHECK_THROWS_AS(run(c, o), ConfigError);
  o = {};
  o.threads = 0;
  CHECK_THROWS_AS(run(c, o), ConfigError);

  // Two levels still yield a slope; one level yields none.
  auto cauchy = Config::parse("[run]\ncommand = cauchy\n[cauchy]\nf = 1\nh = 1/16, 1/32, 1/64\n");
  o = {};
  o.levels = 2;
  auto r = run(cauchy, o);
  REQUIRE(r.slopes.size() == 1);
  CHECK(r.metrics.count("dbar_deviation_slope") == 1);
  o.levels = 1;
  r = run(cauchy, o);
  CHECK(r.slopes.empty());
  CHECK(r.metrics.count("dbar_deviation_slope") == 0);
}

TEST_CASE("run: error classes map to exit codes") {
  const auto malformed = Config::parse("[run]\ncommand = corona\n[corona]\nf = sub(1, z)); z\n");
  try {
    run(malformed);
    FAIL("expected a ConfigError");
  } catch (const std::exception& e) {
    CHECK(exit_code_for(e) == kExitConfig);
    CHECK(std::string(e.what()).find("position 9") != std::string::npos);
  }
  const auto violation = Config::parse("[run]\ncommand = divide\n[divide]\nf = z\ng = mul(0.5, z)\n");
  try {
    run(violation);
    FAIL("expected a PreconditionError");
  } catch (const std::exception& e) {
    CHECK(exit_code_for(e) == kExitPrecondition);
  }
  CHECK(exit_code_for(PoleError("div(1,z)", 0.0)) == kExitPrecondition);
  CHECK(exit_code_for(NumericalError("x")) == kExitNumerical);
  CHECK(exit_code_for(ParseError("x", 3)) == kExitConfig);
}

TEST_CASE("run: output files are deterministic") {
  const auto dir = std::filesystem::temp_directory_path() / "dbarlab_test_cli";
  std::filesystem::remove_all(dir);
  const auto c = Config::parse("[run]\ncommand = divide\n[divide]\nf = z\ng = zbar\npower = 4\nclass = Dbar1\n");
  RunOptions o;
  o.out_dir = (dir / "a").string();
  const auto a = run(c, o);
  o.out_dir = (dir / "b").string();
  run(c, o);
  REQUIRE(a.files.size() == 2);
  for (const auto& f : a.files) {
    const auto name = std::filesystem::path(f).filename();
    CHECK(slurp(dir / "a" / name) == slurp(dir / "b" / name));
  }
  CHECK(slurp(dir / "a" / "divide_probes.csv").rfind("quantity,point_re,point_im,radius,spread,scale,verdict\n", 0) == 0);
  std::filesystem::remove_all(dir);
}

#include <doctest.h>

#include <string>

#include "qhl/config.hpp"
#include "qhl/error.hpp"
#include "qhl/experiments.hpp"

using namespace qhl;

namespace {

std::string message_of(const std::string& toml) {
  try {
    parse_toml(toml);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("TOML subset") {
  const auto doc = parse_toml(R"(# experiment file
title = "a \"quoted\" name"   # trailing comment

[experiment]
kgrid = [8, 12,
         16, 1_024]
flag = true
nested = [[1, 0, 1.0, 0.0], [0, 1, 0.0, -2.5e-1]]

["tolerances"]
b0 = 1e-3
neg = -4
)");
  CHECK(doc.at("").at("title").s == "a \"quoted\" name");
  const auto& e = doc.at("experiment");
  REQUIRE(e.at("kgrid").array.size() == 4);
  CHECK(e.at("kgrid").array[3].i == 1024);
  CHECK(e.at("flag").b);
  CHECK(e.at("nested").array[1].array[3].number() == doctest::Approx(-0.25));
  CHECK(doc.at("tolerances").at("b0").kind == TomlValue::Kind::Float);
  CHECK(doc.at("tolerances").at("neg").number() == -4.0);
}

TEST_CASE("TOML errors carry the line number") {
  CHECK(message_of("a = 1\na = 2\n").find("line 2") != std::string::npos);
  CHECK(message_of("[t]\n[t]\n").find("defined twice") != std::string::npos);
  CHECK(message_of("s = \"open\n").find("unterminated") != std::string::npos);
  CHECK(message_of("x = {a = 1}\n").find("line 1") != std::string::npos);
  CHECK(message_of("x = 12abc\n").find("bad") != std::string::npos);
  CHECK(message_of("x = 1 y = 2\n").find("end of line") != std::string::npos);
}

TEST_CASE("config overrides and validation") {
  const ExperimentConfig base = default_config("bergman-expansion");
  const auto c = apply_toml(base, parse_toml(R"(
[experiment]
seed = 7
kgrid = [8, 16, 24, 32]
backends = ["TorusFlat"]
[surface]
epsilon = 0.02
resolution = 48
perturbation = [[1, 0, 1.0, 0.0], [0, 1, 0.0, 0.5]]
[tolerances]
b0 = 2e-3
[params]
points = 5
[output]
dir = "elsewhere"
)"));
  CHECK(c.seed == 7);
  CHECK(c.kgrid == std::vector<int>{8, 16, 24, 32});
  CHECK(c.surface.backend == Backend::TorusFlat);
  CHECK(c.surface.epsilon == 0.02);
  CHECK(c.surface.resolution == 48);
  REQUIRE(c.surface.perturbation.size() == 2);
  CHECK(c.surface.perturbation[1].sin_coeff == 0.5);
  CHECK(c.tolerance("b0") == 2e-3);
  CHECK(c.tolerance("b1_relative") == base.tolerance("b1_relative"));
  CHECK(c.param("points") == 5);
  CHECK(c.out_dir == "elsewhere");
  // unperturbed backends drop the perturbation
  CHECK(c.surface_for(Backend::TorusFlat).epsilon == 0.0);

  CHECK_THROWS_AS(apply_toml(base, parse_toml("[experiment]\ncolour = 1\n")), Error);
  CHECK_THROWS_AS(apply_toml(base, parse_toml("[plot]\nx = 1\n")), Error);
  CHECK_THROWS_AS(apply_toml(base, parse_toml("[surface]\nbackend = \"Klein\"\n")), Error);
  CHECK_THROWS_AS(apply_toml(base, parse_toml("[experiment]\nkgrid = [8.5]\n")), Error);
  CHECK_THROWS_AS(c.tolerance("missing"), Error);
}

TEST_CASE("config hash covers results, not paths") {
  ExperimentConfig a = default_config("mu-bar-rate");
  ExperimentConfig b = a;
  b.out_dir = "/somewhere/else";
  b.jobs = 4;
  b.cache_dir = "cache";
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 64);
  b.seed = 2;
  CHECK(a.hash() != b.hash());
  b = a;
  b.tolerances["slope_band"] = 0.3;
  CHECK(a.hash() != b.hash());
}

TEST_CASE("every experiment has a default config") {
  REQUIRE(experiment_names().size() == 12);
  for (const auto& n : experiment_names()) {
    const auto c = default_config(n);
    CHECK(c.name == n);
    CHECK(!c.backends.empty());
    CHECK(!c.kgrid.empty());
    CHECK(!c.tolerances.empty());
  }
  CHECK_THROWS_AS(default_config("thm3"), Error);
}

#include <doctest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qhl/error.hpp"
#include "qhl/experiments.hpp"

using namespace qhl;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("qhl-test-" + name);
  std::filesystem::remove_all(p);
  return p;
}

}  // namespace

TEST_CASE("CSV cells keep 17 significant digits") {
  CHECK(num(0.1) == "0.10000000000000001");
  CHECK(num(-2.5) == "-2.5");
  Table t{{"k", "v"}, {}};
  t.add({"8", num(1.0 / 3.0)});
  CHECK(t.csv() == "k,v\n8,0.33333333333333331\n");
}

TEST_CASE("parallel_for covers every index and rethrows") {
  std::vector<int> hit(50, 0);
  parallel_for(3, 50, [&](int i) { hit[i] += 1; });
  for (int h : hit) CHECK(h == 1);
  std::atomic<int> count{0};
  CHECK_THROWS_AS(parallel_for(2, 10,
                               [&](int i) {
                                 ++count;
                                 if (i == 4) throw Error(ErrorCode::InvalidArgument, "boom");
                               }),
                  Error);
  CHECK(count == 10);
}

TEST_CASE("pointwise identity experiment is reproducible byte for byte") {
  ExperimentConfig c = default_config("xi-pairing-identity");
  c.params["trials"] = 10;
  const auto a = run_experiment(c);
  CHECK(a.passed());
  CHECK(a.criterion == 4);
  CHECK(a.checks.size() == 2);

  const auto d1 = scratch("a"), d2 = scratch("b");
  write_report(a, d1.string());
  c.jobs = 3;  // threads do not change results
  write_report(run_experiment(c), d2.string());
  for (const char* f : {"xi-pairing-identity.json", "xi-pairing-identity.csv"}) {
    REQUIRE(std::filesystem::exists(d1 / f));
    CHECK(slurp(d1 / f) == slurp(d2 / f));
  }
  CHECK(slurp(d1 / "xi-pairing-identity.json").find(c.hash()) != std::string::npos);
  std::filesystem::remove_all(d1);
  std::filesystem::remove_all(d2);
}

TEST_CASE("Bergman baseline on a short grid, threaded") {
  ExperimentConfig c = default_config("bergman-baseline");
  c.kgrid = {16, 32};
  c.jobs = 2;
  const auto r = run_experiment(c);
  CHECK(r.passed());
  CHECK(r.tables.at("").rows.size() == 4);
}

TEST_CASE("module errors name the experiment") {
  ExperimentConfig c = default_config("mu-bar-rate");
  c.kgrid = {0, 8};
  try {
    run_experiment(c);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("mu-bar-rate") != std::string::npos);
  }
  c = default_config("balanced-pipeline");
  c.backends = {Backend::SpherePerturbed};
  CHECK_THROWS_AS(run_experiment(c), Error);
  c.kgrid.clear();
  CHECK_THROWS_AS(run_experiment(c), Error);
}

#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <random>

#include "qhl/error.hpp"
#include "qhl/sections.hpp"

using namespace qhl;

namespace {

KahlerSurface surface(Backend b, double eps = 0.0, int m = 0) {
  SurfaceConfig c;
  c.backend = b;
  c.epsilon = eps;
  c.resolution = m;
  return KahlerSurface(c);
}

double factorial(int n) { return std::tgamma(n + 1.0); }

Eigen::MatrixXcd random_hermitian_pd(int d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> N;
  Eigen::MatrixXcd A(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = {N(rng), N(rng)};
  return A * A.adjoint() + 0.1 * Eigen::MatrixXcd::Identity(d, d);
}

}  // namespace

TEST_CASE("monomial basis") {
  const auto b1 = SectionBasis::monomial(1);
  CHECK(b1.dimension() == 2);
  Eigen::VectorXcd f, df;
  SectionBasis::monomial(3).evaluate_raw({1.0, 0.0}, f, &df);
  CHECK(std::abs(f[2] - 1.0) < 1e-15);
  CHECK(std::abs(df[2] - 2.0) < 1e-15);

  KahlerSurface S = surface(Backend::SphereRound);
  CHECK(std::abs(SectionBasis::monomial(5).pairing(S, {0.0, 0.0}, 0, 0) - 1.0) < 1e-15);

  // weighted values agree with raw values times (1 + |z|^2)^{-k/2}
  const auto b = SectionBasis::monomial(7);
  const ChartPoint p{0.8, -1.9};
  Eigen::VectorXcd v, dv;
  b.evaluate_weighted(p, v, &dv);
  b.evaluate_raw(p.z(), f, &df);
  const double w = std::pow(1.0 + std::norm(p.z()), -3.5);
  CHECK((v - w * f).norm() < 1e-12 * v.norm());
  CHECK((dv - w * df).norm() < 1e-12 * dv.norm());
}

TEST_CASE("round sphere Gram matches the Beta integrals") {
  KahlerSurface S = surface(Backend::SphereRound);
  for (int k : {1, 4, 9}) {
    const auto G = hilb(S, SectionBasis::monomial(k));
    for (int a = 0; a <= k; ++a)
      for (int b = 0; b <= k; ++b) {
        const double expect = a == b ? factorial(a) * factorial(k - a) / factorial(k + 1) : 0.0;
        REQUIRE(std::abs(G.gram(a, b) - expect) < 1e-12);
      }
  }
}

TEST_CASE("theta basis pairing is lattice invariant") {
  for (std::complex<double> tau : {std::complex<double>(0.0, 1.0), std::complex<double>(0.27, 1.3)}) {
    const auto b = SectionBasis::theta(5, tau);
    CHECK(b.dimension() == 5);
    for (ChartPoint p : {ChartPoint{0.1, 0.3}, ChartPoint{0.6, 0.05}, ChartPoint{-0.2, 0.9}}) {
      Eigen::VectorXcd v0, v1, v2;
      b.evaluate_weighted(p, v0, nullptr);
      b.evaluate_weighted({p.x + 1.0, p.y}, v1, nullptr);
      b.evaluate_weighted({p.x + tau.real(), p.y + tau.imag()}, v2, nullptr);
      const Eigen::MatrixXcd P0 = v0 * v0.adjoint();
      CHECK((v1 * v1.adjoint() - P0).cwiseAbs().maxCoeff() < 1e-10);
      CHECK((v2 * v2.adjoint() - P0).cwiseAbs().maxCoeff() < 1e-10);
    }
  }
}

TEST_CASE("theta derivatives match finite differences") {
  const auto b = SectionBasis::theta(6, {0.1, 1.1});
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (int t = 0; t < 5; ++t) {
    const ChartPoint p{U(rng), U(rng)};
    Eigen::VectorXcd v, dv, vp, vm;
    b.evaluate_weighted(p, v, &dv);
    // the flat weight depends on y only, and f' = df/dx for holomorphic f
    const double h = 1e-5;
    b.evaluate_weighted({p.x + h, p.y}, vp, nullptr);
    b.evaluate_weighted({p.x - h, p.y}, vm, nullptr);
    const Eigen::VectorXcd fd = (vp - vm) / (2 * h);
    CHECK((fd - dv).norm() < 1e-7 * dv.norm());
  }
}

TEST_CASE("theta truncation and flat torus Gram") {
  CHECK_THROWS_AS(SectionBasis::theta(4, {0.0, 1.0}, 5.0), Error);
  try {
    SectionBasis::theta(4, {0.0, 1.0}, 5.0);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TruncationTooSmall);
  }
  KahlerSurface T = surface(Backend::TorusFlat);
  const auto G1 = hilb(T, SectionBasis::theta(1, {0.0, 1.0}));
  CHECK(G1.dimension() == 1);
  CHECK(G1.gram(0, 0).real() > 0.0);

  const auto G4 = hilb(T, SectionBasis::theta(4, {0.0, 1.0}));
  KahlerSurface T2 = surface(Backend::TorusFlat, 0.0, 128);
  const auto G4d = hilb(T2, SectionBasis::theta(4, {0.0, 1.0}));
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      if (a != b) CHECK(std::abs(G4.gram(a, b)) < 1e-10);
      CHECK(std::abs(G4.gram(a, b) - G4d.gram(a, b)) < 1e-10);
    }
  CHECK((G4.gram - G4.gram.adjoint()).norm() == 0.0);
}

TEST_CASE("orthonormalize") {
  CHECK((orthonormalize(Eigen::MatrixXcd::Identity(3, 3)) - Eigen::MatrixXcd::Identity(3, 3)).norm() < 1e-15);
  Eigen::MatrixXcd D = Eigen::MatrixXcd::Zero(3, 3);
  D.diagonal() << 4.0, 0.25, 9.0;
  const Eigen::MatrixXcd C = orthonormalize(D);
  CHECK(std::abs(C(0, 0) - 0.5) < 1e-15);
  CHECK(std::abs(C(1, 1) - 2.0) < 1e-15);
  CHECK(std::abs(C(2, 2) - 1.0 / 3.0) < 1e-15);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Eigen::MatrixXcd G = random_hermitian_pd(9, seed);
    const Eigen::MatrixXcd Cg = orthonormalize(G);
    CHECK((Cg.adjoint() * G * Cg - Eigen::MatrixXcd::Identity(9, 9)).norm() < 1e-12);
  }
  Eigen::MatrixXcd bad = Eigen::MatrixXcd::Identity(2, 2);
  bad(1, 1) = -1.0;
  CHECK_THROWS_AS(orthonormalize(bad), Error);
}

TEST_CASE("orthonormal frame of a real Gram") {
  KahlerSurface T = surface(Backend::TorusPerturbed, 0.05);
  const auto B = SectionBasis::theta(6, T.tau());
  const auto table = tabulate(T, B);
  const auto G = hilb(T, table);
  const Eigen::MatrixXcd C = orthonormalize(G.gram);
  const Eigen::MatrixXcd Von = table.values * C.conjugate();
  CHECK((weighted_gram(Von, T.omega_weights()) - Eigen::MatrixXcd::Identity(6, 6)).norm() < 1e-12);
}

TEST_CASE("Gram cache round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "qhl_cache_test";
  std::filesystem::remove_all(dir);
  unsetenv("QHL_CACHE");
  GramCache cache(dir.string());
  KahlerSurface T = surface(Backend::TorusPerturbed, 0.05);
  const auto B = SectionBasis::theta(5, T.tau());
  const auto G = cache.hilb(T, B);
  const auto key = GramCache::key(T, B);
  CHECK(key.size() == 64);
  const auto hit = cache.load(key);
  REQUIRE(hit.has_value());
  CHECK((hit->gram - G.gram).norm() == 0.0);
  std::filesystem::remove_all(dir);
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

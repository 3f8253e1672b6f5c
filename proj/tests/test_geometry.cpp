#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "qhl/error.hpp"
#include "qhl/geometry.hpp"

using namespace qhl;

namespace {

SurfaceConfig torus_perturbed(double eps, int m = 0) {
  SurfaceConfig c;
  c.backend = Backend::TorusPerturbed;
  c.epsilon = eps;
  c.resolution = m;
  return c;
}

SurfaceConfig simple(Backend b, double eps = 0.0, int m = 0) {
  SurfaceConfig c;
  c.backend = b;
  c.epsilon = eps;
  c.resolution = m;
  return c;
}

double max_abs(const Eigen::VectorXd& v) { return v.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("round sphere has unit area and S = 8 pi") {
  KahlerSurface K(simple(Backend::SphereRound));
  CHECK(std::abs(integrate(K, fields::constant(1.0)) - 1.0) < 1e-12);
  for (const auto& n : K.nodes()) REQUIRE(std::abs(n.scalar_curvature - 8.0 * kPi) < 1e-9);
  CHECK(std::abs(scalar_curvature(K, {0.3, -1.7}) - 8.0 * kPi) < 1e-9);
}

TEST_CASE("flat torus is flat with unit area") {
  KahlerSurface K(simple(Backend::TorusFlat));
  CHECK(std::abs(integrate(K, fields::constant(1.0)) - 1.0) < 1e-12);
  for (const auto& n : K.nodes()) REQUIRE(std::abs(n.scalar_curvature) < 1e-12);

  SurfaceConfig skew = simple(Backend::TorusFlat);
  skew.tau = {0.3, 1.4};
  KahlerSurface K2(skew);
  CHECK(std::abs(integrate(K2, fields::constant(1.0)) - 1.0) < 1e-12);
}

TEST_CASE("Gauss-Bonnet on perturbed backends") {
  KahlerSurface T(torus_perturbed(0.05));
  Eigen::VectorXd s(T.node_count());
  for (int i = 0; i < T.node_count(); ++i) s[i] = T.nodes()[i].scalar_curvature;
  CHECK(std::abs(integrate(T, s)) < 1e-10);
  CHECK(std::abs(integrate(T, fields::constant(1.0)) - 1.0) < 1e-12);

  KahlerSurface S(simple(Backend::SpherePerturbed, 0.05));
  Eigen::VectorXd s2(S.node_count());
  for (int i = 0; i < S.node_count(); ++i) s2[i] = S.nodes()[i].scalar_curvature;
  CHECK(std::abs(integrate(S, s2) - 8.0 * kPi) < 1e-9);
  CHECK(std::abs(integrate(S, fields::constant(1.0)) - 1.0) < 1e-12);
}

TEST_CASE("doubling quadrature leaves the area unchanged") {
  for (Backend b : {Backend::TorusPerturbed, Backend::SpherePerturbed}) {
    KahlerSurface A(simple(b, 0.05));
    KahlerSurface B(simple(b, 0.05, 2 * A.quadrature().resolution));
    CHECK(std::abs(integrate(A, fields::constant(1.0)) - integrate(B, fields::constant(1.0))) < 1e-10);
  }
}

TEST_CASE("scalar curvature matches finite differences of the density") {
  KahlerSurface K(torus_perturbed(0.05));
  const double h = 1e-3;
  for (ChartPoint p : {ChartPoint{0.13, 0.71}, ChartPoint{0.5, 0.2}, ChartPoint{0.91, 0.44}}) {
    auto lg = [&](double dx, double dy) { return std::log(K.local({p.x + dx, p.y + dy}).density); };
    // fourth-order central stencil for the Euclidean Laplacian of log g
    auto d2 = [&](double ex, double ey) {
      return (-lg(2 * h * ex, 2 * h * ey) + 16 * lg(h * ex, h * ey) - 30 * lg(0, 0) + 16 * lg(-h * ex, -h * ey) -
              lg(-2 * h * ex, -2 * h * ey)) /
             (12 * h * h);
    };
    const double oracle = -(d2(1, 0) + d2(0, 1)) / K.local(p).density;
    CHECK(std::abs(scalar_curvature(K, p) - oracle) < 1e-6);
  }
}

TEST_CASE("metric positivity and lattice checks") {
  CHECK_THROWS_AS(KahlerSurface(torus_perturbed(1.0)), Error);
  try {
    KahlerSurface K(torus_perturbed(1.0));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonPositiveMetric);
  }
  SurfaceConfig bad = simple(Backend::TorusFlat);
  bad.tau = {0.0, -1.0};
  try {
    KahlerSurface K(bad);
    FAIL("expected BadLattice");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadLattice);
  }
}

TEST_CASE("Laplacian eigenvalues") {
  KahlerSurface T(simple(Backend::TorusFlat));
  const auto c = fields::by_name("cos2pix");
  for (ChartPoint p : {ChartPoint{0.1, 0.2}, ChartPoint{0.77, 0.4}}) {
    const double f = c(T.local(p).coords).value();
    CHECK(std::abs(laplacian(T, c, p) - 4 * kPi * kPi * f) < 1e-9);
    CHECK(std::abs(laplacian(T, fields::constant(1.0), p)) < 1e-14);
    CHECK(std::abs(linearized_scalar_D(T, c, p) - std::pow(4 * kPi * kPi, 2) * f) < 1e-7);
    CHECK(std::abs(mabuchi_apply(T, c, p) - 8 * std::pow(kPi, 4) * f) < 1e-7);
  }

  KahlerSurface S(simple(Backend::SphereRound));
  for (int m = -1; m <= 1; ++m) {
    const auto y = fields::sphere_harmonic(1, m);
    for (ChartPoint p : {ChartPoint{0.1, 0.2}, ChartPoint{-1.3, 0.4}}) {
      const double f = y(S.local(p).coords).value();
      CHECK(std::abs(laplacian(S, y, p) - 8 * kPi * f) < 1e-9);
      CHECK(std::abs(linearized_scalar_D(S, y, p)) < 1e-8);
      CHECK(std::abs(mabuchi_apply(S, y, p)) < 1e-8);
    }
  }
  for (int m = -2; m <= 2; ++m) {
    const auto y = fields::sphere_harmonic(2, m);
    const ChartPoint p{0.4, -0.6};
    const double f = y(S.local(p).coords).value();
    CHECK(std::abs(mabuchi_apply(S, y, p) - 192 * kPi * kPi * f) < 1e-8 * 192 * kPi * kPi);
  }
}

TEST_CASE("Dirichlet pairing and divergence identities") {
  KahlerSurface T(simple(Backend::TorusFlat));
  const auto c = fields::by_name("cos2pix");
  CHECK(std::abs(dirichlet_pair(T, c, c) - 2 * kPi * kPi) < 1e-10);

  for (Backend b : {Backend::TorusPerturbed, Backend::SpherePerturbed}) {
    KahlerSurface K(simple(b, 0.05));
    const auto f = b == Backend::TorusPerturbed ? fields::by_name("cos2pix_cos2piy") : fields::by_name("Y2_1");
    const auto g = b == Backend::TorusPerturbed ? fields::by_name("sin2piy") : fields::by_name("Y1_0");
    CHECK(std::abs(integrate(K, sample_laplacian(K, f))) < 1e-10);
    const Eigen::VectorXd fdg = sample(K, f).cwiseProduct(sample_laplacian(K, g));
    CHECK(std::abs(integrate(K, fdg) - dirichlet_pair(K, f, g)) < 1e-8);
    CHECK(max_abs(sample_mabuchi(K, fields::constant(1.0))) < 1e-8);
    // chart derivatives near the sphere's pole at infinity lose a few digits, so
    // the bound is taken relative to the size of the integrand
    const Eigen::VectorXd df = sample_mabuchi(K, f);
    CHECK(std::abs(integrate(K, df)) < 1e-8 * std::max(1.0, max_abs(df)));
  }
}

TEST_CASE("dictionary lookup") {
  CHECK(fields::by_name("cos4pix").name() == "cos4pix");
  CHECK(fields::by_name("Y2_-1").name() == "Y2_-1");
  CHECK_THROWS_AS(fields::by_name("nonsense"), Error);
  CHECK(to_string(backend_from_string("TorusPerturbed")) == "TorusPerturbed");
}

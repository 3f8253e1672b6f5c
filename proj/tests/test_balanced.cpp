#include <doctest.h>

#include <cmath>

#include "qhl/balanced.hpp"
#include "qhl/error.hpp"

using namespace qhl;

namespace {

KahlerSurface surface(Backend b, double eps = 0.0) {
  SurfaceConfig c;
  c.backend = b;
  c.epsilon = eps;
  return KahlerSurface(c);
}

double max_diff(const InnerProduct& a, const InnerProduct& b) { return (a.gram - b.gram).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("symmetric metrics are fixed by one step") {
  // SU(2) on the round sphere, the finite Heisenberg group on the flat torus
  for (Backend b : {Backend::SphereRound, Backend::TorusFlat}) {
    KahlerSurface K = surface(b);
    for (int k : {6, 9}) {
      const TIteration T(K, SectionBasis::for_surface(K, k));
      const InnerProduct G = T.hilb();
      CHECK(max_diff(T.step(G), G) < 1e-10);
      CHECK(T.defect(G) < 1e-12);
      const auto r = balance(K, T.basis(), 1e-10, 200);
      CHECK(r.iterations <= 2);
    }
  }
}

TEST_CASE("t_step normalization and scale equivariance") {
  KahlerSurface K = surface(Backend::TorusPerturbed, 0.05);
  const TIteration T(K, SectionBasis::for_surface(K, 8));
  const InnerProduct G = T.hilb();
  const InnerProduct G1 = T.step(G);
  CHECK(std::abs(G1.gram.trace() - 8.0) < 1e-13);
  CHECK(max_diff(T.step({3.7 * G.gram}), G1) < 1e-12);
  CHECK(max_diff(t_step(K, T.basis(), G), G1) < 1e-14);
  CHECK(std::abs(normalize_trace({5.0 * G.gram}).gram.trace() - 8.0) < 1e-13);
  CHECK((G1.gram - G1.gram.adjoint()).norm() == 0.0);
}

TEST_CASE("plain iteration on the perturbed torus") {
  KahlerSurface K = surface(Backend::TorusPerturbed, 0.05);
  const TIteration T(K, SectionBasis::for_surface(K, 16));
  BalanceOptions opt;
  opt.method = BalanceMethod::Plain;
  opt.max_iter = 20;
  try {
    balance(T, opt);
    FAIL("expected NoConvergence");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoConvergence);
  }
  opt.max_iter = 3000;
  const auto r = balance(T, opt);
  CHECK(r.defect < 1e-10);
  REQUIRE(r.history.size() > 10);
  for (std::size_t i = r.history.size() - 10; i < r.history.size(); ++i) CHECK(r.history[i] < r.history[i - 1]);

  // the accelerated run reaches the same fixed point
  const auto a = balance(T, BalanceOptions{});
  CHECK(a.iterations <= 200);
  CHECK(max_diff(a.gram, r.gram) < 1e-7);
}

TEST_CASE("balanced point: uniqueness and constant density") {
  for (Backend b : {Backend::TorusPerturbed, Backend::SpherePerturbed}) {
    KahlerSurface K = surface(b, 0.05);
    const int k = 10;
    const TIteration T(K, SectionBasis::for_surface(K, k));
    BalanceOptions opt;
    opt.tol = 1e-12;
    const auto r1 = balance(T, opt);
    const auto f = sample(K, b == Backend::TorusPerturbed ? fields::by_name("cos2pix_cos2piy") : fields::by_name("Y2_1"));
    const auto r2 = balance(T, opt, T.hilb(f, 0.1));
    CHECK(max_diff(T.hilb(f, 0.1), T.hilb()) > 1e-2);
    CHECK(max_diff(r1.gram, r2.gram) < 1e-8);
    CHECK(r1.iterations <= 200);

    // mu_bar is a multiple of the identity
    const HermitianOperator m = T.mu_bar(r1.gram);
    const double c = m.trace().real() / m.rows();
    CHECK((m - c * HermitianOperator::Identity(m.rows(), m.cols())).norm() < 1e-11);
    CHECK(std::abs(c - k / (4 * kPi * T.basis().dimension())) < 1e-10);

    // Bergman density of FS(b_k) in the frame of b_k is constant
    const auto st = QuantizedState::at_fs(QuantizedState::at_inner_product(K, T.basis(), r1.gram));
    const double mean = st.rho().mean();
    CHECK((st.rho().array() - mean).abs().maxCoeff() < 1e-9 * mean);
    CHECK(std::abs(r1.omega_k.dot(K.area_weights()) - k) < 1e-9);
    CHECK(r1.to_json().find("\"history\"") != std::string::npos);
  }
}

TEST_CASE("balanced metric on the torus is intrinsic") {
  // b_k depends on (X, L) only, so from a perturbed h it is still the flat
  // one, under which theta functions are orthogonal with equal norms
  KahlerSurface K = surface(Backend::TorusPerturbed, 0.05);
  const TIteration T(K, SectionBasis::for_surface(K, 12));
  BalanceOptions opt;
  opt.tol = 1e-12;
  const auto r = balance(T, opt);
  CHECK((r.gram.gram - Eigen::MatrixXcd::Identity(12, 12)).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(max_diff(T.hilb(), r.gram) > 1e-3);
}

#include <doctest.h>

#include <cmath>
#include <random>

#include "qhl/error.hpp"
#include "qhl/quantization.hpp"

using namespace qhl;

namespace {

KahlerSurface surface(Backend b, double eps = 0.0) {
  SurfaceConfig c;
  c.backend = b;
  c.epsilon = eps;
  return KahlerSurface(c);
}

Eigen::MatrixXcd random_hermitian(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  Eigen::MatrixXcd A(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = {N(rng), N(rng)};
  return 0.5 * (A + A.adjoint());
}

Eigen::MatrixXcd random_unitary(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  Eigen::MatrixXcd A(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) A(i, j) = {N(rng), N(rng)};
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(A);
  return qr.householderQ() * Eigen::MatrixXcd::Identity(d, d);
}

double integrate_weights(const Eigen::VectorXd& w, const Eigen::VectorXd& f) {
  const Eigen::VectorXd p = w.cwiseProduct(f);
  return pairwise_sum(p.data(), static_cast<std::size_t>(p.size()));
}

}  // namespace

TEST_CASE("Bergman density baselines") {
  KahlerSurface S = surface(Backend::SphereRound);
  for (int k : {4, 8, 16}) {
    const auto st = QuantizedState::at_hilb(S, k);
    CHECK((st.rho().array() - (k + 1.0)).abs().maxCoeff() < 1e-10);
    CHECK(std::abs(bergman_density(st, {0.3, -2.2}) - (k + 1.0)) < 1e-10);
    // omega_k = k omega exactly when rho is constant
    for (int i = 0; i < st.node_count(); i += 97)
      REQUIRE(std::abs(st.omega_k()[i] - k * S.nodes()[i].density) < 1e-10 * k * S.nodes()[i].density);
  }
  // Only translations by (Z + tau Z)/k preserve L^k, so rho_k on the square
  // torus carries aliasing from the four shortest lattice vectors:
  // max |rho_k - k| = 4k e^{-pi k / 2} up to exponentially smaller terms.
  KahlerSurface T = surface(Backend::TorusFlat);
  for (int k : {6, 8, 12, 16}) {
    const auto st = QuantizedState::at_hilb(T, k);
    const double dev = (st.rho().array() - k).abs().maxCoeff();
    CHECK(std::abs(dev / (4.0 * k * std::exp(-kPi * k / 2.0)) - 1.0) < 1e-3);
    CHECK(std::abs(integrate(T, st.rho()) - k) < 1e-10);
    if (k >= 12) CHECK(dev < 1e-6);
  }
}

TEST_CASE("trace identities of the state") {
  for (Backend b : {Backend::TorusPerturbed, Backend::SpherePerturbed}) {
    KahlerSurface K = surface(b, 0.05);
    const int k = 7;
    const auto st = QuantizedState::at_hilb(K, k);
    CHECK(std::abs(integrate(K, st.rho()) - st.dimension()) < 1e-8);
    CHECK(std::abs(st.fs_weights().sum() - k) < 1e-8);
    CHECK(st.omega_k().minCoeff() >= 0.0);
    const auto fp = fs_pullback(st, {0.2, 0.4});
    CHECK(std::abs(fp.hk_factor * bergman_density(st, {0.2, 0.4}) - 1.0) < 1e-12);
  }
}

TEST_CASE("Toeplitz operators") {
  KahlerSurface K = surface(Backend::TorusPerturbed, 0.05);
  const int k = 6;
  const auto st = QuantizedState::at_hilb(K, k);
  const int d = st.dimension();
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(d, d);
  const auto one = fields::constant(1.0);
  const auto f = fields::by_name("cos2pix_cos2piy");
  const auto g = fields::by_name("sin2piy");

  const auto T1 = toeplitz(st, one);
  CHECK((T1 - I).norm() < 1e-10);
  const auto Tf = toeplitz(st, f);
  CHECK((Tf * T1 - Tf).norm() < 1e-10);
  CHECK((Tf - Tf.adjoint()).norm() == 0.0);
  CHECK(std::abs(Tf.trace().real() - integrate(K, sample(K, f).cwiseProduct(st.rho()))) < 1e-8);

  const auto pos = fields::linear_combination(1.0, one, 1.0, f);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(toeplitz(st, pos));
  CHECK(es.eigenvalues().minCoeff() > -1e-12);

  CHECK((q_matrix(st, one) - 4.0 * kPi * k * I).norm() < 1e-9);
  CHECK((q_matrix(st, fields::scaled(-1.0, f)) + q_matrix(st, f)).norm() < 1e-9);

  const ChartPoint p{0.37, 0.81};
  CHECK(std::abs(kernel_diagonal(st, one, p) - bergman_density(st, p)) < 1e-10);

  const Eigen::VectorXd Kfg = quadratic_form_nodes(st, Tf * toeplitz(st, g));
  const Eigen::VectorXd Kg = quadratic_form_nodes(st, toeplitz(st, g));
  CHECK(std::abs(integrate(K, Kfg) - integrate(K, sample(K, f).cwiseProduct(Kg))) < 1e-8);
  CHECK(std::abs(kernel_diagonal_composed(st, f, g, K.nodes()[123].point) - Kfg[123]) < 1e-10);
}

TEST_CASE("frame invariance under a unitary change of orthonormal frame") {
  KahlerSurface K = surface(Backend::TorusPerturbed, 0.05);
  const auto st = QuantizedState::at_hilb(K, 5);
  std::mt19937_64 rng(11);
  const Eigen::MatrixXcd U = random_unitary(5, rng);
  const Eigen::MatrixXcd V2 = st.values() * U;
  const Eigen::VectorXd rho2 = V2.rowwise().squaredNorm();
  CHECK((rho2 - st.rho()).cwiseAbs().maxCoeff() < 1e-10);
  const Eigen::VectorXd fvals = sample(K, fields::by_name("cos2pix"));
  const Eigen::MatrixXcd T1 = toeplitz(st, fvals);
  const Eigen::MatrixXcd T2 = weighted_gram(V2, K.omega_weights().cwiseProduct(fvals));
  const Eigen::VectorXd k1 = quadratic_form_nodes(st, T1);
  const Eigen::VectorXd k2 = (V2.conjugate() * T2).cwiseProduct(V2).rowwise().sum().real();
  CHECK((k1 - k2).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(std::abs((T1 * T1).trace() - (T2 * T2).trace()) < 1e-10);
}

TEST_CASE("moment map and Hamiltonians") {
  for (Backend b : {Backend::TorusPerturbed, Backend::SphereRound}) {
    KahlerSurface K = surface(b, 0.05);
    const auto st = QuantizedState::at_hilb(K, 8);
    const int d = st.dimension();
    const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(d, d);
    const ChartPoint p{0.3, 0.6};
    CHECK(std::abs(mu_restricted(st, p).trace().real() - 1.0 / (4 * kPi)) < 1e-14);
    const auto mb = mu_bar(st);
    CHECK(std::abs(mb.trace().real() - st.fs_weights().sum() / (4 * kPi)) < 1e-12);
    CHECK(std::abs(hamiltonian_H(st, I, p) - 1.0 / (4 * kPi)) < 1e-14);
    CHECK((hamiltonian_nodes(st, I).array() - 1.0 / (4 * kPi)).abs().maxCoeff() < 1e-14);
    CHECK(dH(st, I, p).norm() < 1e-12);

    std::mt19937_64 rng(5);
    const auto A = random_hermitian(d, rng), B = random_hermitian(d, rng);
    CHECK(std::abs(hamiltonian_H(st, 2.0 * A - 3.0 * B, p) -
                   (2.0 * hamiltonian_H(st, A, p) - 3.0 * hamiltonian_H(st, B, p))) < 1e-12);
    CHECK(std::abs(hamiltonian_H(st, A, p) - (A * mu_restricted(st, p)).trace().real()) < 1e-12);

    // dH against central differences of H
    const double h = 1e-5;
    const Eigen::Vector2d g = dH(st, A, p);
    const double fx = (hamiltonian_H(st, A, {p.x + h, p.y}) - hamiltonian_H(st, A, {p.x - h, p.y})) / (2 * h);
    const double fy = (hamiltonian_H(st, A, {p.x, p.y + h}) - hamiltonian_H(st, A, {p.x, p.y - h})) / (2 * h);
    CHECK(std::abs(g[0] - fx) < 1e-6 * std::max(1.0, std::abs(fx)));
    CHECK(std::abs(g[1] - fy) < 1e-6 * std::max(1.0, std::abs(fy)));
    const Eigen::MatrixX2d gn = dH_nodes(st, A);
    const auto& node = K.nodes()[77].point;
    CHECK((gn.row(77).transpose() - dH(st, A, node)).norm() < 1e-10);
  }
}

TEST_CASE("xi pairing closes the pointwise identity") {
  KahlerSurface K = surface(Backend::TorusPerturbed, 0.05);
  const auto st = QuantizedState::at_hilb(K, 8);
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(8, 8);
  const ChartPoint p{0.1, 0.2};
  CHECK(std::abs(xi_pairing(st, I, I, p)) < 1e-15);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 10; ++t) {
    const auto A = random_hermitian(8, rng), B = random_hermitian(8, rng);
    const double lhs =
        4 * kPi * hamiltonian_H(st, A, p) * hamiltonian_H(st, B, p) + xi_pairing(st, A, B, p).real();
    CHECK(std::abs(lhs - (A * B * mu_restricted(st, p)).trace().real()) < 1e-10);
    // Re of the pairing is symmetric
    CHECK(std::abs(xi_pairing(st, A, B, p).real() - xi_pairing(st, B, A, p).real()) < 1e-12);
  }
}

TEST_CASE("state at the Fubini-Study metric") {
  KahlerSurface K = surface(Backend::TorusPerturbed, 0.05);
  const auto st = QuantizedState::at_hilb(K, 6);
  const auto fs = QuantizedState::at_fs(st);
  CHECK(std::abs(fs.reference_weights().sum() - 1.0) < 1e-8);
  CHECK(std::abs(integrate_weights(fs.reference_weights(), fs.rho()) - fs.dimension()) < 1e-8);
  const ChartPoint p = K.nodes()[200].point;
  CHECK(std::abs(bergman_density(fs, p) - fs.rho()[200]) < 1e-10);
  CHECK((toeplitz(fs, fields::constant(1.0)) - Eigen::MatrixXcd::Identity(6, 6)).norm() < 1e-10);
}

TEST_CASE("xi pairing normalization from a tangent vector field") {
  // Rotations of the round sphere act on z^a with weight a; the induced field is
  // tangent to the embedded curve, so its normal part vanishes and the pairing
  // equals the Dirichlet density of H in the omega_k metric at every point.
  KahlerSurface S = surface(Backend::SphereRound);
  const int k = 5;
  const auto st = QuantizedState::at_hilb(S, k);
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(k + 1, k + 1);
  for (int a = 0; a <= k; ++a) A(a, a) = a;
  for (ChartPoint p : {ChartPoint{0.2, 0.1}, ChartPoint{-0.9, 1.4}, ChartPoint{2.5, -0.3}}) {
    const auto fp = st.at(p);
    const double tangent = dH(st, A, p).squaredNorm() / omega_k_density(fp.v, fp.dv);
    CHECK(std::abs(xi_pairing(st, A, A, p).real() - tangent) < 1e-12 * std::max(1.0, tangent));
  }
}

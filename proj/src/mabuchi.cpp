#include "qhl/mabuchi.hpp"

#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <json.hpp>

#include "qhl/error.hpp"
#include "qhl/harmonics.hpp"

namespace qhl {

GalerkinBasis GalerkinBasis::torus(int n) {
  GalerkinBasis b;
  b.sphere_ = false;
  b.n_ = n;
  for (int m = 0; m <= n; ++m)
    for (int k = -n; k <= n; ++k) {
      if (m == 0 && k <= 0) continue;
      for (bool sine : {false, true}) {
        b.modes_.push_back({m, k, sine});
        b.names_.push_back(fmt::format("{}2pi({}x+{}y)", sine ? "sin" : "cos", m, k));
      }
    }
  return b;
}

GalerkinBasis GalerkinBasis::sphere(int n) {
  GalerkinBasis b;
  b.sphere_ = true;
  b.n_ = n;
  for (int l = 1; l <= n; ++l)
    for (int m = -l; m <= l; ++m) {
      b.modes_.push_back({l, m, false});
      b.names_.push_back(fmt::format("Y{}_{}", l, m));
    }
  return b;
}

GalerkinBasis GalerkinBasis::for_surface(const KahlerSurface& K, int n) {
  if (K.sphere()) return sphere(n > 0 ? n : 16);
  return torus(n > 0 ? n : 12);
}

void GalerkinBasis::evaluate(const SurfaceCoords<4>& c, std::vector<FieldJet>& out) const {
  out.resize(modes_.size());
  if (sphere_) {
    const auto ylm = real_harmonics<4>(n_, c.u, c.v, c.w);
    for (std::size_t i = 0; i < modes_.size(); ++i) out[i] = ylm[harmonic_index(modes_[i].a, modes_[i].b)];
    return;
  }
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    const auto& m = modes_[i];
    const FieldJet phase = (c.u * static_cast<double>(m.a) + c.v * static_cast<double>(m.b)) * (2.0 * kPi);
    out[i] = m.sine ? sin(phase) : cos(phase);
  }
}

ScalarField GalerkinBasis::field(int i) const {
  const Mode m = modes_.at(static_cast<std::size_t>(i));
  if (sphere_) return fields::sphere_harmonic(m.a, m.b);
  return m.sine ? fields::torus_sin(m.a, m.b) : fields::torus_cos(m.a, m.b);
}

MabuchiSystem assemble_mabuchi(const KahlerSurface& K, const GalerkinBasis& basis, MabuchiOperator op) {
  const int n = K.node_count(), nb = basis.size();
  Eigen::MatrixXd B(n, nb), DB(n, nb);
  std::vector<FieldJet> jets;
  for (int p = 0; p < n; ++p) {
    const auto& g = K.nodes()[p];
    basis.evaluate(g.coords, jets);
    for (int i = 0; i < nb; ++i) {
      const FieldDerivatives d = field_derivatives(jets[i]);
      B(p, i) = d.value;
      DB(p, i) = op == MabuchiOperator::Full ? mabuchi_apply(g, d) : 0.5 * linearized_scalar_D(g, d);
    }
  }
  const Eigen::VectorXd& w = K.omega_weights();

  MabuchiSystem sys;
  sys.means = B.transpose() * w;
  B.rowwise() -= sys.means.transpose();
  const Eigen::MatrixXd WB = w.asDiagonal() * B;
  // D*D annihilates constants and integrates to zero, so centering leaves the
  // stiffness unchanged
  Eigen::MatrixXd S = WB.transpose() * DB;
  const double sn = S.norm();
  sys.symmetry_defect = sn > 0.0 ? (S - S.transpose()).norm() / sn : 0.0;
  sys.stiffness = 0.5 * (S + S.transpose());
  sys.mass = WB.transpose() * B;
  sys.mass = 0.5 * (sys.mass + sys.mass.transpose()).eval();
  sys.samples = std::move(B);

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sys.mass, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  sys.mass_condition = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(sys.mass_condition <= 1e12))
    throw Error(ErrorCode::IllConditioned, fmt::format("mass matrix condition number {:.3e}", sys.mass_condition));
  sys.backend = std::string(to_string(K.backend()));
  sys.epsilon = K.epsilon();
  sys.order = basis.order();
  return sys;
}

MabuchiSpectrum mabuchi_spectrum(const MabuchiSystem& system, int count) {
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(system.stiffness, system.mass);
  const int nb = static_cast<int>(system.stiffness.rows());
  const int m = std::min(count, nb + 1);
  MabuchiSpectrum s;
  s.backend = system.backend;
  s.epsilon = system.epsilon;
  s.order = system.order;
  s.eigenvalues.resize(m);
  s.coefficients = Eigen::MatrixXd::Zero(nb, m);
  s.values.resize(system.samples.rows(), m);
  s.eigenvalues[0] = 0.0;
  s.values.col(0).setOnes();
  for (int j = 1; j < m; ++j) {
    s.eigenvalues[j] = es.eigenvalues()[j - 1];
    s.coefficients.col(j) = es.eigenvectors().col(j - 1);
    s.values.col(j) = system.samples * s.coefficients.col(j);
  }
  const double top = s.eigenvalues.cwiseAbs().maxCoeff();
  s.clusters = cluster_values(s.eigenvalues, 1e-6, 1e-8 * std::max(top, 1e-300));
  return s;
}

std::vector<int> MabuchiSpectrum::multiplicities() const {
  std::vector<int> out;
  for (const auto& c : clusters) out.push_back(c.size());
  return out;
}

std::string MabuchiSpectrum::to_json() const {
  nlohmann::ordered_json j;
  j["backend"] = backend;
  j["epsilon"] = epsilon;
  j["lambda"] = std::vector<double>(eigenvalues.data(), eigenvalues.data() + eigenvalues.size());
  j["multiplicities"] = multiplicities();
  j["basis_N"] = order;
  return j.dump(2);
}

Projection project_onto_eigenspace(const MabuchiSpectrum& spectrum, const KahlerSurface& K,
                                   const Eigen::VectorXd& f_nodes, const Cluster& cluster) {
  if (cluster.begin < 0 || cluster.end > spectrum.values.cols() || cluster.size() <= 0)
    throw Error(ErrorCode::InvalidArgument, "cluster out of range");
  const Eigen::MatrixXd E = spectrum.values.middleCols(cluster.begin, cluster.size());
  Projection p;
  p.eigen_coefficients = E.transpose() * K.omega_weights().cwiseProduct(f_nodes);
  p.values = E * p.eigen_coefficients;
  return p;
}

}  // namespace qhl

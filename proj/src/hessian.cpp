#include "qhl/hessian.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <json.hpp>

#include "qhl/error.hpp"

namespace qhl {

namespace {

const double kInvSqrt2 = 1.0 / std::sqrt(2.0);

}  // namespace

HermitianFrame::HermitianFrame(int d) : d_(d) {
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) pairs_.emplace_back(a, b);
}

std::vector<HermitianFrame::Entry> HermitianFrame::entries(int i) const {
  if (i < d_) return {{i, i, 1.0}};
  const int P = static_cast<int>(pairs_.size());
  if (i < d_ + P) {
    const auto [a, b] = pairs_[i - d_];
    return {{a, b, kInvSqrt2}, {b, a, kInvSqrt2}};
  }
  const auto [a, b] = pairs_[i - d_ - P];
  return {{a, b, {0.0, kInvSqrt2}}, {b, a, {0.0, -kInvSqrt2}}};
}

HermitianOperator HermitianFrame::element(int i) const {
  HermitianOperator E = HermitianOperator::Zero(d_, d_);
  for (const auto& e : entries(i)) E(e.row, e.col) = e.value;
  return E;
}

Eigen::VectorXd HermitianFrame::coordinates(const HermitianOperator& A) const {
  Eigen::VectorXd x(size());
  for (int i = 0; i < size(); ++i) {
    std::complex<double> t = 0.0;
    // tr(A E) = sum_(r,c) A_cr E_rc
    for (const auto& e : entries(i)) t += A(e.col, e.row) * e.value;
    x[i] = t.real();
  }
  return x;
}

HermitianOperator HermitianFrame::from_coordinates(const Eigen::VectorXd& x) const {
  HermitianOperator A = HermitianOperator::Zero(d_, d_);
  for (int i = 0; i < size(); ++i)
    for (const auto& e : entries(i)) A(e.row, e.col) += x[i] * e.value;
  return A;
}

Eigen::VectorXd HermitianFrame::identity() const {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(size());
  x.head(d_).setOnes();
  return x;
}

double pp_pair(const QuantizedState& s, const HermitianOperator& A, const HermitianOperator& B) {
  const double t1 = (A * B * mu_bar(s)).trace().real();
  const Eigen::VectorXd ha = hamiltonian_nodes(s, A), hb = hamiltonian_nodes(s, B);
  const Eigen::MatrixX2d ga = dH_nodes(s, A), gb = dH_nodes(s, B);
  const Eigen::VectorXd t2 = 4.0 * kPi * s.fs_weights().cwiseProduct(ha).cwiseProduct(hb);
  const Eigen::VectorXd t3 = s.surface().area_weights().cwiseProduct(ga.cwiseProduct(gb).rowwise().sum());
  return t1 - pairwise_sum(t2.data(), static_cast<std::size_t>(t2.size())) -
         pairwise_sum(t3.data(), static_cast<std::size_t>(t3.size()));
}

HessianForm assemble_form(const QuantizedState& s, int dense_cap) {
  const int d = s.dimension();
  const int n = d * d;
  if (n > dense_cap)
    throw Error(ErrorCode::OutOfBudget, fmt::format("form size {} exceeds the dense cap {}", n, dense_cap));
  const HermitianFrame frame(d);
  std::vector<std::vector<HermitianFrame::Entry>> ent(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) ent[i] = frame.entries(i);

  // Re tr(E_i E_j mu_bar)
  const HermitianOperator mb = mu_bar(s);
  Eigen::MatrixXd T1(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      std::complex<double> t = 0.0;
      for (const auto& x : ent[i])
        for (const auto& y : ent[j])
          if (x.col == y.row) t += x.value * y.value * mb(y.col, x.row);
      T1(i, j) = t.real();
    }

  // 4 pi int H_i H_j omega_k + int grad H_i . grad H_j dx dy, as X^T X
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
  const int nodes = s.node_count();
  const int block = 128;
  const auto& V = s.values();
  const auto& Vd = s.derivatives();
  const auto& area = s.surface().area_weights();
  Eigen::MatrixXd Xt(n, 3 * block);
  Eigen::MatrixXcd prod(d, d), dprod(d, d);
  for (int start = 0; start < nodes; start += block) {
    const int nb = std::min(block, nodes - start);
    Xt.setZero();
    for (int b = 0; b < nb; ++b) {
      const int p = start + b;
      const Eigen::VectorXcd v = V.row(p).transpose();
      const Eigen::VectorXcd dv = Vd.row(p).transpose();
      const double rho = s.rho()[p];
      const std::complex<double> c = v.dot(dv);
      prod = v.conjugate() * v.transpose();    // conj(v_r) v_c
      dprod = v.conjugate() * dv.transpose();  // conj(v_r) v'_c
      const double sh = std::sqrt(4.0 * kPi * s.fs_weights()[p]) / (4.0 * kPi * rho);
      const double sa = std::sqrt(area[p]);
      for (int i = 0; i < n; ++i) {
        std::complex<double> q = 0.0, a = 0.0;
        for (const auto& e : ent[i]) {
          q += prod(e.row, e.col) * e.value;
          a += dprod(e.row, e.col) * e.value;
        }
        const std::complex<double> dz = (a * rho - q.real() * c) / (4.0 * kPi * rho * rho);
        Xt(i, 3 * b) = sh * q.real();
        Xt(i, 3 * b + 1) = sa * 2.0 * dz.real();
        Xt(i, 3 * b + 2) = -sa * 2.0 * dz.imag();
      }
    }
    G.selfadjointView<Eigen::Lower>().rankUpdate(Xt.leftCols(3 * nb));
  }
  G.triangularView<Eigen::StrictlyUpper>() = G.transpose();

  HessianForm form;
  form.k = s.k();
  form.dimension = d;
  form.matrix = T1 - G;
  const double norm = form.matrix.norm();
  form.symmetry_defect = norm > 0.0 ? (form.matrix - form.matrix.transpose()).norm() / norm : 0.0;
  form.matrix = 0.5 * (form.matrix + form.matrix.transpose()).eval();
  return form;
}

std::vector<Cluster> cluster_values(const Eigen::VectorXd& values, double rel_gap, double abs_floor) {
  std::vector<Cluster> out;
  const int n = static_cast<int>(values.size());
  int begin = 0;
  for (int i = 1; i <= n; ++i) {
    bool split = i == n;
    if (!split) {
      const double a = values[i - 1], b = values[i];
      const bool both_zero = std::abs(a) <= abs_floor && std::abs(b) <= abs_floor;
      const double scale = std::max(std::abs(a), std::abs(b));
      split = !both_zero && std::abs(b - a) > rel_gap * scale;
    }
    if (split) {
      out.push_back({begin, i});
      begin = i;
    }
  }
  return out;
}

HermitianOperator SpectralReport::eigenmatrix(int j) const {
  return HermitianFrame(dimension).from_coordinates(eigenvectors.col(j));
}

std::string SpectralReport::to_json() const {
  nlohmann::ordered_json j;
  j["k"] = k;
  j["eigenvalues"] = std::vector<double>(eigenvalues.data(), eigenvalues.data() + eigenvalues.size());
  j["scaled"] = std::vector<double>(scaled.data(), scaled.data() + scaled.size());
  std::vector<int> bounds;
  for (const auto& c : clusters) bounds.push_back(c.begin);
  bounds.push_back(static_cast<int>(eigenvalues.size()));
  j["cluster_boundaries"] = bounds;
  return j.dump(2);
}

SpectralReport pp_spectrum(const HessianForm& form) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(form.matrix);
  SpectralReport r;
  r.k = form.k;
  r.dimension = form.dimension;
  r.eigenvalues = es.eigenvalues();
  r.eigenvectors = es.eigenvectors();
  r.scaled = 64.0 * std::pow(kPi, 3) * form.k * form.k * r.eigenvalues;
  const double top = r.eigenvalues.cwiseAbs().maxCoeff();
  r.clusters = cluster_values(r.eigenvalues, kClusterGap, 1e-9 * std::max(top, 1e-300));
  return r;
}

std::vector<EigenFunction> eigenvector_functions(const QuantizedState& s, const SpectralReport& report, int r) {
  std::vector<EigenFunction> out;
  const double norm = std::sqrt(16.0 * kPi * kPi * s.k());
  for (int j = 0; j <= r && j < report.eigenvalues.size(); ++j) {
    EigenFunction e;
    e.nu = report.eigenvalues[j];
    e.A = report.eigenmatrix(j) * norm;
    e.values = hamiltonian_nodes(s, e.A);
    out.push_back(std::move(e));
  }
  return out;
}

double lambda_k_lower_bound(const SpectralReport& report) {
  if (report.eigenvalues.size() < 2) throw Error(ErrorCode::InvalidArgument, "spectrum has no trace-free part");
  return 1.0 / report.eigenvalues[1];
}

Eigen::VectorXd principal_angles(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, const Eigen::VectorXd& w) {
  const Eigen::VectorXd sw = w.cwiseSqrt();
  auto orth = [&](const Eigen::MatrixXd& M) {
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(sw.asDiagonal() * M);
    return Eigen::MatrixXd(qr.householderQ() * Eigen::MatrixXd::Identity(M.rows(), M.cols()));
  };
  const Eigen::MatrixXd Qx = orth(X), Qy = orth(Y);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(Qx.transpose() * Qy);
  const Eigen::VectorXd sv = svd.singularValues();
  Eigen::VectorXd angles(sv.size());
  for (int i = 0; i < sv.size(); ++i) angles[i] = std::acos(std::clamp(sv[i], -1.0, 1.0));
  return angles;
}

NearestPoint nearest_in_span(const QuantizedState& s, const SpectralReport& report, const Cluster& span,
                             const Eigen::VectorXd& phi, const Eigen::VectorXd& w) {
  const int m = span.size();
  std::vector<HermitianOperator> mats;
  Eigen::MatrixXd H(phi.size(), m);
  for (int j = 0; j < m; ++j) {
    mats.push_back(report.eigenmatrix(span.begin + j));
    H.col(j) = hamiltonian_nodes(s, mats.back());
  }
  const Eigen::VectorXd sw = w.cwiseSqrt();
  const Eigen::VectorXd c = (sw.asDiagonal() * H).colPivHouseholderQr().solve(sw.cwiseProduct(phi));
  NearestPoint out;
  out.A = HermitianOperator::Zero(s.dimension(), s.dimension());
  for (int j = 0; j < m; ++j) out.A += c[j] * mats[j];
  out.values = H * c;
  const Eigen::VectorXd r2 = w.cwiseProduct((out.values - phi).cwiseAbs2());
  out.distance_squared = pairwise_sum(r2.data(), static_cast<std::size_t>(r2.size()));
  return out;
}

}  // namespace qhl

#include "qhl/quantization.hpp"

#include <cmath>

#include <fmt/format.h>

#include "qhl/error.hpp"

namespace qhl {

namespace {

constexpr double kBaseFloor = 1e-300;

}  // namespace

double omega_k_density(const Eigen::VectorXcd& v, const Eigen::VectorXcd& dv) {
  const double n2 = v.squaredNorm();
  const double d2 = dv.squaredNorm();
  const std::complex<double> c = v.dot(dv);  // v* dv
  return (n2 * d2 - std::norm(c)) / (kPi * n2 * n2);
}

QuantizedState QuantizedState::at_hilb(const KahlerSurface& K, int k, const GramCache* cache) {
  QuantizedState s;
  s.K_ = &K;
  s.basis_ = SectionBasis::for_surface(K, k);
  SectionTable t = tabulate(K, s.basis_);
  s.ref_values_ = std::move(t.values);
  s.ref_derivs_ = std::move(t.derivatives);
  s.ref_weights_ = K.omega_weights();
  s.ref_density_.resize(K.node_count());
  for (int i = 0; i < K.node_count(); ++i) s.ref_density_[i] = K.nodes()[i].density;
  if (cache) {
    s.gram_ = cache->hilb(K, s.basis_).gram;
  } else {
    s.gram_ = weighted_gram(s.ref_values_, s.ref_weights_);
  }
  s.finish();
  return s;
}

QuantizedState QuantizedState::at_inner_product(const KahlerSurface& K, const SectionBasis& B,
                                                const InnerProduct& G) {
  if (G.dimension() != B.dimension())
    throw Error(ErrorCode::InvalidArgument, "inner product dimension does not match the basis");
  QuantizedState s;
  s.K_ = &K;
  s.basis_ = B;
  SectionTable t = tabulate(K, B);
  s.ref_values_ = std::move(t.values);
  s.ref_derivs_ = std::move(t.derivatives);
  s.ref_weights_ = K.omega_weights();
  s.ref_density_.resize(K.node_count());
  for (int i = 0; i < K.node_count(); ++i) s.ref_density_[i] = K.nodes()[i].density;
  s.gram_ = G.gram;
  s.finish();
  return s;
}

QuantizedState QuantizedState::at_fs(const QuantizedState& b) {
  QuantizedState s;
  s.K_ = b.K_;
  s.basis_ = b.basis_;
  s.fs_parent_ = std::make_shared<const QuantizedState>(b);
  const int d = b.dimension();
  // sections of b's orthonormal frame measured in h_FS: |sigma|^2 = d v v* / |v|^2
  const Eigen::VectorXd scale = (static_cast<double>(d) / b.rho_.array()).sqrt();
  s.ref_values_ = scale.asDiagonal() * b.values_;
  s.ref_derivs_ = scale.asDiagonal() * b.derivs_;
  s.ref_density_ = b.omega_k_ / static_cast<double>(b.k());
  s.ref_weights_ = b.K_->area_weights().cwiseProduct(s.ref_density_);
  s.gram_ = weighted_gram(s.ref_values_, s.ref_weights_);
  s.finish();
  return s;
}

QuantizedState QuantizedState::change_reference(const QuantizedState& s, const Eigen::MatrixXcd& M) {
  QuantizedState out = s;
  out.ref_values_ = s.ref_values_ * M;
  out.ref_derivs_ = s.ref_derivs_ * M;
  out.gram_ = M.transpose() * s.gram_ * M.conjugate();
  out.ref_change_ = s.ref_change_.size() == 0 ? M : Eigen::MatrixXcd(s.ref_change_ * M);
  out.finish();
  return out;
}

void QuantizedState::finish() {
  frame_ = orthonormalize(gram_);
  values_ = ref_values_ * frame_.conjugate();
  derivs_ = ref_derivs_ * frame_.conjugate();
  rho_ = values_.rowwise().squaredNorm();
  const int n = static_cast<int>(rho_.size());
  omega_k_.resize(n);
  for (int i = 0; i < n; ++i) {
    if (!(rho_[i] > kBaseFloor))
      throw Error(ErrorCode::BasePoint, fmt::format("rho_k vanishes at node {} (k = {})", i, k()));
    omega_k_[i] = omega_k_density(values_.row(i).transpose(), derivs_.row(i).transpose());
  }
  fs_weights_ = K_->area_weights().cwiseProduct(omega_k_);
}

FramePoint QuantizedState::at(ChartPoint p) const {
  FramePoint out;
  Eigen::VectorXcd v, dv;
  if (fs_parent_) {
    const FramePoint q = fs_parent_->at(p);
    const double scale = std::sqrt(static_cast<double>(dimension()) / q.v.squaredNorm());
    v = q.v * scale;
    dv = q.dv * scale;
    out.reference_density = omega_k_density(q.v, q.dv) / k();
  } else {
    basis_.evaluate(*K_, p, v, &dv);
    out.reference_density = K_->local(p).density;
  }
  if (ref_change_.size() != 0) {
    v = ref_change_.transpose() * v;
    dv = ref_change_.transpose() * dv;
  }
  out.v = frame_.adjoint() * v;
  out.dv = frame_.adjoint() * dv;
  if (!(out.v.squaredNorm() > kBaseFloor))
    throw Error(ErrorCode::BasePoint, fmt::format("rho_k vanishes at ({}, {})", p.x, p.y));
  return out;
}

Eigen::VectorXd QuantizedState::laplacian_nodes(const ScalarField& f) const {
  Eigen::VectorXd out(node_count());
  for (int i = 0; i < node_count(); ++i) {
    const FieldDerivatives d = field_derivatives(f(K_->nodes()[i].coords));
    out[i] = -d.lap / ref_density_[i];
  }
  return out;
}

double bergman_density(const QuantizedState& s, ChartPoint p) { return s.at(p).v.squaredNorm(); }

FsPullback fs_pullback(const QuantizedState& s, ChartPoint p) {
  const FramePoint f = s.at(p);
  return {1.0 / f.v.squaredNorm(), omega_k_density(f.v, f.dv)};
}

HermitianOperator toeplitz(const QuantizedState& s, const Eigen::VectorXd& f_nodes) {
  return weighted_gram(s.values(), s.reference_weights().cwiseProduct(f_nodes));
}

HermitianOperator toeplitz(const QuantizedState& s, const ScalarField& f) {
  return toeplitz(s, sample(s.surface(), f));
}

HermitianOperator q_matrix(const QuantizedState& s, const ScalarField& f) {
  const Eigen::VectorXd vals = 4.0 * kPi * s.k() * sample(s.surface(), f) + s.laplacian_nodes(f);
  return toeplitz(s, vals);
}

double kernel_diagonal(const QuantizedState& s, const ScalarField& f, ChartPoint p) {
  const FramePoint fp = s.at(p);
  return fp.v.dot(toeplitz(s, f) * fp.v).real();
}

double kernel_diagonal_composed(const QuantizedState& s, const ScalarField& f, const ScalarField& g,
                                ChartPoint p) {
  const FramePoint fp = s.at(p);
  return fp.v.dot(toeplitz(s, f) * (toeplitz(s, g) * fp.v)).real();
}

Eigen::VectorXd quadratic_form_nodes(const QuantizedState& s, const Eigen::MatrixXcd& M) {
  return (s.values().conjugate() * M).cwiseProduct(s.values()).rowwise().sum().real();
}

HermitianOperator mu_restricted(const QuantizedState& s, ChartPoint p) {
  const FramePoint fp = s.at(p);
  return fp.v * fp.v.adjoint() / (4.0 * kPi * fp.v.squaredNorm());
}

HermitianOperator mu_bar(const QuantizedState& s) {
  const Eigen::VectorXd w = s.fs_weights().cwiseQuotient(s.rho()) / (4.0 * kPi);
  return weighted_gram(s.values(), w);
}

double hamiltonian_H(const QuantizedState& s, const HermitianOperator& A, ChartPoint p) {
  const FramePoint fp = s.at(p);
  return fp.v.dot(A * fp.v).real() / (4.0 * kPi * fp.v.squaredNorm());
}

namespace {

Eigen::Vector2d grad_H(const Eigen::VectorXcd& v, const Eigen::VectorXcd& dv, const HermitianOperator& A) {
  const double n2 = v.squaredNorm();
  const std::complex<double> a = v.dot(A * dv);
  const std::complex<double> q = v.dot(A * v);
  const std::complex<double> c = v.dot(dv);
  const std::complex<double> dz = (a * n2 - q * c) / (4.0 * kPi * n2 * n2);
  return {2.0 * dz.real(), -2.0 * dz.imag()};
}

}  // namespace

Eigen::Vector2d dH(const QuantizedState& s, const HermitianOperator& A, ChartPoint p) {
  const FramePoint fp = s.at(p);
  return grad_H(fp.v, fp.dv, A);
}

Eigen::VectorXd hamiltonian_nodes(const QuantizedState& s, const HermitianOperator& A) {
  return quadratic_form_nodes(s, A).cwiseQuotient(s.rho()) / (4.0 * kPi);
}

Eigen::MatrixX2d dH_nodes(const QuantizedState& s, const HermitianOperator& A) {
  const Eigen::MatrixXcd VA = s.values().conjugate() * A;
  const Eigen::VectorXcd a = VA.cwiseProduct(s.derivatives()).rowwise().sum();
  const Eigen::VectorXcd q = VA.cwiseProduct(s.values()).rowwise().sum();
  const Eigen::VectorXcd c = s.values().conjugate().cwiseProduct(s.derivatives()).rowwise().sum();
  Eigen::MatrixX2d out(s.node_count(), 2);
  for (int i = 0; i < s.node_count(); ++i) {
    const double n2 = s.rho()[i];
    const std::complex<double> dz = (a[i] * n2 - q[i] * c[i]) / (4.0 * kPi * n2 * n2);
    out(i, 0) = 2.0 * dz.real();
    out(i, 1) = -2.0 * dz.imag();
  }
  return out;
}

std::complex<double> xi_pairing(const Eigen::VectorXcd& v, const HermitianOperator& A, const HermitianOperator& B) {
  const double n2 = v.squaredNorm();
  if (!(n2 > kBaseFloor)) throw Error(ErrorCode::BasePoint, "section vector vanishes");
  const Eigen::VectorXcd Av = A * v, Bv = B * v;
  const std::complex<double> ab = Av.dot(Bv);  // <Bv, Av> = (Av)* Bv
  const std::complex<double> bv = v.dot(Bv);   // <Bv, v>
  const std::complex<double> va = Av.dot(v);   // <v, Av>
  return (ab * n2 - bv * va) / (4.0 * kPi * n2 * n2);
}

std::complex<double> xi_pairing(const QuantizedState& s, const HermitianOperator& A, const HermitianOperator& B,
                                ChartPoint p) {
  return xi_pairing(s.at(p).v, A, B);
}

}  // namespace qhl

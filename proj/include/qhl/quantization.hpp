// Quantisation objects at an inner product b on H^0(L^k): Bergman density,
// Fubini-Study pullback, Toeplitz operators and their kernel diagonals, the
// moment map mu and the Hamiltonians H(A) = tr(A mu).
//
// Everything is evaluated in the orthonormal frame of b. With v~ the vector of
// orthonormal section values at a point (weighted by the reference metric),
//
//     rho = |v~|^2,   mu = v~ v~* / (4 pi |v~|^2),   H(A) = v~* A v~ / (4 pi |v~|^2),
//
// and omega_k = (i / 2 pi) d dbar log |v~|^2 is the projective pullback.
#pragma once

#include <complex>
#include <memory>

#include <Eigen/Dense>

#include "qhl/geometry.hpp"
#include "qhl/sections.hpp"

namespace qhl {

using HermitianOperator = Eigen::MatrixXcd;

/// Data of a point in the orthonormal frame.
struct FramePoint {
  Eigen::VectorXcd v;   // orthonormal section values
  Eigen::VectorXcd dv;  // holomorphic chart derivatives, same weight
  double reference_density = 0.0;
};

class QuantizedState {
 public:
  /// b = Hilb_k(h), reference metric (h, omega) of the surface.
  static QuantizedState at_hilb(const KahlerSurface& K, int k, const GramCache* cache = nullptr);

  /// Arbitrary b given by its Gram matrix over the reference basis; the
  /// reference metric stays (h, omega).
  static QuantizedState at_inner_product(const KahlerSurface& K, const SectionBasis& B, const InnerProduct& G);

  /// Re-based at the Fubini-Study metric of b: reference metric h_FS with
  /// volume omega_k / k, inner product Hilb(h_FS). Objects "computed with
  /// respect to b" use this state.
  static QuantizedState at_fs(const QuantizedState& b);

  /// Same inner product over the reference sections s'_b = sum_a M_ab s_a.
  /// The orthonormal frame changes by a unitary; frame invariants do not.
  static QuantizedState change_reference(const QuantizedState& s, const Eigen::MatrixXcd& M);

  const KahlerSurface& surface() const { return *K_; }
  const SectionBasis& basis() const { return basis_; }
  int k() const { return basis_.k(); }
  int dimension() const { return basis_.dimension(); }
  int node_count() const { return static_cast<int>(rho_.size()); }
  bool fs_reference() const { return fs_parent_ != nullptr; }

  /// Gram matrix of b over the reference sections of this state.
  const Eigen::MatrixXcd& gram() const { return gram_; }
  /// C with C* G C = I.
  const Eigen::MatrixXcd& frame() const { return frame_; }

  /// Reference sections at nodes (rows), their derivatives, and the
  /// orthonormal versions.
  const Eigen::MatrixXcd& reference_values() const { return ref_values_; }
  const Eigen::MatrixXcd& reference_derivatives() const { return ref_derivs_; }
  const Eigen::MatrixXcd& values() const { return values_; }
  const Eigen::MatrixXcd& derivatives() const { return derivs_; }

  /// Reference volume density w.r.t. dx dy and quadrature weights for it.
  const Eigen::VectorXd& reference_density() const { return ref_density_; }
  const Eigen::VectorXd& reference_weights() const { return ref_weights_; }

  const Eigen::VectorXd& rho() const { return rho_; }
  /// omega_k density w.r.t. dx dy, and quadrature weights for omega_k.
  const Eigen::VectorXd& omega_k() const { return omega_k_; }
  const Eigen::VectorXd& fs_weights() const { return fs_weights_; }

  /// Orthonormal values at an arbitrary chart point. Throws BasePoint.
  FramePoint at(ChartPoint p) const;

  /// Euclidean Laplacian of f at nodes divided by the reference density,
  /// with the positive sign convention.
  Eigen::VectorXd laplacian_nodes(const ScalarField& f) const;

 private:
  QuantizedState() = default;
  void finish();

  const KahlerSurface* K_ = nullptr;
  SectionBasis basis_;
  std::shared_ptr<const QuantizedState> fs_parent_;
  Eigen::MatrixXcd ref_change_;  // empty unless change_reference was applied
  Eigen::MatrixXcd gram_, frame_;
  Eigen::MatrixXcd ref_values_, ref_derivs_, values_, derivs_;
  Eigen::VectorXd ref_density_, ref_weights_, rho_, omega_k_, fs_weights_;
};

/// rho_k(p).
double bergman_density(const QuantizedState& s, ChartPoint p);

struct FsPullback {
  double hk_factor = 0.0;       // h_k / h^k = 1 / rho_k
  double omega_k_density = 0.0;  // w.r.t. dx dy
};
/// Throws BasePoint if rho_k(p) <= 0.
FsPullback fs_pullback(const QuantizedState& s, ChartPoint p);
/// omega_k density from orthonormal values and derivatives.
double omega_k_density(const Eigen::VectorXcd& v, const Eigen::VectorXcd& dv);

/// T_f with entries int f (s~_a, s~_b) against the reference volume.
HermitianOperator toeplitz(const QuantizedState& s, const Eigen::VectorXd& f_nodes);
HermitianOperator toeplitz(const QuantizedState& s, const ScalarField& f);
/// Q_f = T_{4 pi k f + Delta f}.
HermitianOperator q_matrix(const QuantizedState& s, const ScalarField& f);

/// K_f(p) = v~* T_f v~.
double kernel_diagonal(const QuantizedState& s, const ScalarField& f, ChartPoint p);
/// K_{f,g}(p) = v~* T_f T_g v~.
double kernel_diagonal_composed(const QuantizedState& s, const ScalarField& f, const ScalarField& g, ChartPoint p);
/// v~_p* M v~_p at every node.
Eigen::VectorXd quadratic_form_nodes(const QuantizedState& s, const Eigen::MatrixXcd& M);

HermitianOperator mu_restricted(const QuantizedState& s, ChartPoint p);
/// int mu omega_k.
HermitianOperator mu_bar(const QuantizedState& s);

double hamiltonian_H(const QuantizedState& s, const HermitianOperator& A, ChartPoint p);
/// Chart gradient (d_x H, d_y H).
Eigen::Vector2d dH(const QuantizedState& s, const HermitianOperator& A, ChartPoint p);
Eigen::VectorXd hamiltonian_nodes(const QuantizedState& s, const HermitianOperator& A);
/// Columns d_x H, d_y H at nodes.
Eigen::MatrixX2d dH_nodes(const QuantizedState& s, const HermitianOperator& A);

/// (<Bv, Av>|v|^2 - <Bv, v><v, Av>) / (4 pi |v|^4) with <x, y> = y* x.
std::complex<double> xi_pairing(const Eigen::VectorXcd& v, const HermitianOperator& A, const HermitianOperator& B);
std::complex<double> xi_pairing(const QuantizedState& s, const HermitianOperator& A, const HermitianOperator& B,
                                ChartPoint p);

}  // namespace qhl

// Hessian of the balancing energy, P*P, as a symmetric form on Hermitian
// matrices:
//
//     B(A, B) = Re tr(A B mu_bar) - 4 pi int H(A) H(B) omega_k - int (dH(A), dH(B)) omega_k,
//
// the last integral reduced to the Euclidean Dirichlet pairing in the chart.
#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qhl/quantization.hpp"

namespace qhl {

/// Orthonormal real basis of the Hermitian d x d matrices under tr(AB):
/// diagonal units E_aa, then (E_ab + E_ba)/sqrt2 for a < b, then
/// i(E_ab - E_ba)/sqrt2 for a < b.
class HermitianFrame {
 public:
  explicit HermitianFrame(int d);

  int dimension() const { return d_; }
  int size() const { return d_ * d_; }

  struct Entry {
    int row;
    int col;
    std::complex<double> value;
  };
  /// Nonzero entries of the i-th basis element (one or two).
  std::vector<Entry> entries(int i) const;
  HermitianOperator element(int i) const;

  /// Coordinates tr(A E_i).
  Eigen::VectorXd coordinates(const HermitianOperator& A) const;
  HermitianOperator from_coordinates(const Eigen::VectorXd& x) const;
  /// Coordinates of the identity.
  Eigen::VectorXd identity() const;

 private:
  int d_;
  std::vector<std::pair<int, int>> pairs_;
};

double pp_pair(const QuantizedState& s, const HermitianOperator& A, const HermitianOperator& B);

struct HessianForm {
  int k = 0;
  int dimension = 0;
  Eigen::MatrixXd matrix;
  /// ||M - M^T||_F / ||M||_F before symmetrizing.
  double symmetry_defect = 0.0;
};

inline constexpr int kDefaultDenseCap = 4096;

/// Throws OutOfBudget if d^2 exceeds the cap.
HessianForm assemble_form(const QuantizedState& s, int dense_cap = kDefaultDenseCap);

struct Cluster {
  int begin = 0;
  int end = 0;  // one past the last index
  int size() const { return end - begin; }
};

/// Groups ascending values whose relative gap is below rel_gap; values below
/// abs_floor count as equal.
std::vector<Cluster> cluster_values(const Eigen::VectorXd& values, double rel_gap, double abs_floor);

struct SpectralReport {
  int k = 0;
  int dimension = 0;
  Eigen::VectorXd eigenvalues;
  /// Columns are frame coordinates of tr-orthonormal eigenvectors.
  Eigen::MatrixXd eigenvectors;
  /// 64 pi^3 k^2 nu.
  Eigen::VectorXd scaled;
  std::vector<Cluster> clusters;

  HermitianOperator eigenmatrix(int j) const;
  std::string to_json() const;
};

inline constexpr double kClusterGap = 1e-3;

SpectralReport pp_spectrum(const HessianForm& form);

struct EigenFunction {
  double nu = 0.0;
  HermitianOperator A;     // tr(A^2) = 16 pi^2 k
  Eigen::VectorXd values;  // H(A) at nodes
};

/// First r + 1 eigenvectors mapped to functions by H.
std::vector<EigenFunction> eigenvector_functions(const QuantizedState& s, const SpectralReport& report, int r);

/// 1 / nu_1, a lower bound for the condition number Lambda_k up to constants.
double lambda_k_lower_bound(const SpectralReport& report);

/// Principal angles (ascending) between the column spans of X and Y in the
/// weighted L^2 inner product sum_p w_p x_p y_p.
Eigen::VectorXd principal_angles(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, const Eigen::VectorXd& w);

struct NearestPoint {
  HermitianOperator A;
  Eigen::VectorXd values;  // H(A) at nodes
  double distance_squared = 0.0;
};

/// A in the span of the given eigenvectors minimizing ||H(A) - phi||^2_{L^2(w)}.
NearestPoint nearest_in_span(const QuantizedState& s, const SpectralReport& report, const Cluster& span,
                             const Eigen::VectorXd& phi, const Eigen::VectorXd& w);

}  // namespace qhl

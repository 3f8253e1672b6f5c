// Galerkin spectrum of D*D, the Hessian of Mabuchi energy.
#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qhl/geometry.hpp"
#include "qhl/hessian.hpp"

namespace qhl {

/// Real dictionary without the constant function. Torus: cos and sin of
/// 2 pi (m x + n y) for |m|, |n| <= N, one representative per +-(m, n).
/// Sphere: real harmonics of degree 1..N.
class GalerkinBasis {
 public:
  static GalerkinBasis torus(int n);
  static GalerkinBasis sphere(int n);
  /// Default order 12 on the torus and 16 on the sphere when n <= 0.
  static GalerkinBasis for_surface(const KahlerSurface& K, int n = 0);

  bool sphere() const { return sphere_; }
  int order() const { return n_; }
  int size() const { return static_cast<int>(names_.size()); }
  const std::vector<std::string>& names() const { return names_; }

  /// Jets of every basis function at one point.
  void evaluate(const SurfaceCoords<4>& c, std::vector<FieldJet>& out) const;
  ScalarField field(int i) const;

 private:
  struct Mode {
    int a;
    int b;
    bool sine;
  };
  bool sphere_ = false;
  int n_ = 0;
  std::vector<Mode> modes_;
  std::vector<std::string> names_;
};

enum class MabuchiOperator {
  Full,      // D*D f = (D f + (dS, df)) / 2
  HalfLinD,  // D f / 2, equal to D*D on constant scalar curvature metrics
};

struct MabuchiSystem {
  Eigen::MatrixXd stiffness;  // <B_i, D*D B_j>, symmetrized
  Eigen::MatrixXd mass;       // <B_i - mean, B_j - mean>
  /// Mean-free basis samples at nodes, one column per function.
  Eigen::MatrixXd samples;
  Eigen::VectorXd means;
  double symmetry_defect = 0.0;
  double mass_condition = 0.0;
  std::string backend;
  double epsilon = 0.0;
  int order = 0;
};

/// Throws IllConditioned if cond(mass) > 1e12.
MabuchiSystem assemble_mabuchi(const KahlerSurface& K, const GalerkinBasis& basis,
                               MabuchiOperator op = MabuchiOperator::Full);

struct MabuchiSpectrum {
  /// lambda_0 = 0 for the constants, then the Galerkin eigenvalues.
  Eigen::VectorXd eigenvalues;
  /// Coefficients over the mean-free basis; column 0 is zero (constant mode).
  Eigen::MatrixXd coefficients;
  /// Eigenfunctions at nodes, L^2(omega)-orthonormal; column 0 is 1.
  Eigen::MatrixXd values;
  std::vector<Cluster> clusters;
  std::string backend;
  double epsilon = 0.0;
  int order = 0;

  std::vector<int> multiplicities() const;
  std::string to_json() const;
};

/// Lowest `count` eigenpairs including lambda_0.
MabuchiSpectrum mabuchi_spectrum(const MabuchiSystem& system, int count);

struct Projection {
  Eigen::VectorXd eigen_coefficients;  // over the cluster's eigenfunctions
  Eigen::VectorXd values;              // projection at nodes
};

Projection project_onto_eigenspace(const MabuchiSpectrum& spectrum, const KahlerSurface& K,
                                   const Eigen::VectorXd& f_nodes, const Cluster& cluster);

}  // namespace qhl

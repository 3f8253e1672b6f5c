// Polarized curves (X, L, h) with omega = (i / 2 pi) F_h, their curvature and
// differential operators, and quadrature.
//
// Every backend is a complex curve described in a single holomorphic chart
// z = x + i y. The Kahler form is omega = g dx dy with
//
//     g = (1 / pi) d_z d_zbar phi = Laplacian_E(phi) / (4 pi),
//
// where phi is the potential of h (|s|^2_h = |f|^2 e^{-phi}). Curvature and
// operators follow the positive-Laplacian convention:
//
//     Delta f = -Laplacian_E(f) / g,       S = -Laplacian_E(log g) / g,
//     D(f) = Delta^2 f - S Delta f,        D*D f = (D(f) + (dS, df)) / 2.
#pragma once

#include <complex>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "qhl/taylor.hpp"

namespace qhl {

inline constexpr double kPi = 3.14159265358979323846;

enum class Backend { SphereRound, SpherePerturbed, TorusFlat, TorusPerturbed };

std::string_view to_string(Backend backend);
Backend backend_from_string(std::string_view name);
constexpr bool is_sphere(Backend b) { return b == Backend::SphereRound || b == Backend::SpherePerturbed; }
constexpr bool is_perturbed(Backend b) {
  return b == Backend::SpherePerturbed || b == Backend::TorusPerturbed;
}

struct ChartPoint {
  double x = 0.0;
  double y = 0.0;
  std::complex<double> z() const { return {x, y}; }
};

/// One mode of the perturbing potential psi.
///
/// Torus: psi += cos_coeff * cos 2pi(a x + b y) + sin_coeff * sin 2pi(a x + b y)
///        in lattice coordinates (z = x + tau y).
/// Sphere: psi += cos_coeff * Y_{a,b}, the real harmonic of degree a and order b.
struct PerturbationMode {
  int a = 0;
  int b = 0;
  double cos_coeff = 0.0;
  double sin_coeff = 0.0;
};

struct SurfaceConfig {
  Backend backend = Backend::TorusFlat;
  std::complex<double> tau{0.0, 1.0};
  std::vector<PerturbationMode> perturbation;
  double epsilon = 0.0;
  /// Torus: M x M grid. Sphere: M Gauss-Legendre nodes times 2M azimuths.
  /// Zero selects the default (64 torus, 96 sphere).
  int resolution = 0;
};

/// Jets of the natural coordinates at a chart point: lattice (x, y) on the
/// torus, ambient (X, Y, Z) on the unit sphere. Derivatives are Euclidean
/// chart derivatives.
template <int N>
struct SurfaceCoords {
  Taylor<N> u;
  Taylor<N> v;
  Taylor<N> w;
};

using FieldJet = Taylor<4>;

/// A real function on the surface with analytic chart derivatives to order 4.
class ScalarField {
 public:
  using Fn = std::function<FieldJet(const SurfaceCoords<4>&)>;

  ScalarField(std::string name, Fn fn) : name_(std::move(name)), fn_(std::move(fn)) {}

  FieldJet operator()(const SurfaceCoords<4>& c) const { return fn_(c); }
  const std::string& name() const { return name_; }

 private:
  std::string name_;
  Fn fn_;
};

namespace fields {
ScalarField constant(double c);
/// cos 2 pi (m x + n y) in torus lattice coordinates.
ScalarField torus_cos(int m, int n);
/// sin 2 pi (m x + n y) in torus lattice coordinates.
ScalarField torus_sin(int m, int n);
/// Real spherical harmonic normalized on the unit sphere.
ScalarField sphere_harmonic(int l, int m);
ScalarField product(const ScalarField& f, const ScalarField& g);
ScalarField linear_combination(double a, const ScalarField& f, double b, const ScalarField& g);
ScalarField scaled(double a, const ScalarField& f);
/// Looks up the versioned dictionary by name ("1", "cos2pix", "sin2piy",
/// "cos2pix_cos2piy", "cos4pix", "Y10", "Y20", ...).
ScalarField by_name(std::string_view name);
}  // namespace fields

struct QuadratureRule {
  std::vector<ChartPoint> nodes;
  /// Euclidean chart-area weights; integrals of omega use weights * density.
  std::vector<double> weights;
  int resolution = 0;
};

QuadratureRule torus_rule(std::complex<double> tau, int m);
QuadratureRule sphere_rule(int m);

/// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights);

/// Metric data at one point. Inverse density u = 1/g carries the derivatives
/// needed by Delta^2; S carries its gradient for (dS, df).
struct LocalGeometry {
  ChartPoint point;
  double perturbation_potential = 0.0;  // 2 eps psi
  double density = 0.0;
  double inv_density = 0.0;
  double inv_density_dx = 0.0;
  double inv_density_dy = 0.0;
  double inv_density_lap = 0.0;
  double scalar_curvature = 0.0;
  double scalar_curvature_dx = 0.0;
  double scalar_curvature_dy = 0.0;
  SurfaceCoords<4> coords;
};

class KahlerSurface {
 public:
  /// Throws NonPositiveMetric or BadLattice.
  explicit KahlerSurface(SurfaceConfig config);

  const SurfaceConfig& config() const { return config_; }
  Backend backend() const { return config_.backend; }
  bool sphere() const { return is_sphere(config_.backend); }
  std::complex<double> tau() const { return config_.tau; }
  double epsilon() const { return effective_epsilon_; }

  const QuadratureRule& quadrature() const { return rule_; }
  const std::vector<LocalGeometry>& nodes() const { return nodes_; }
  int node_count() const { return static_cast<int>(nodes_.size()); }

  /// Quadrature weights for integrals against omega.
  const Eigen::VectorXd& omega_weights() const { return omega_weights_; }
  /// Euclidean chart-area weights.
  const Eigen::VectorXd& area_weights() const { return area_weights_; }

  LocalGeometry local(ChartPoint p) const;

  ChartPoint from_lattice(double x, double y) const;
  ChartPoint from_sphere(double cos_theta, double azimuth) const;

  /// 2 eps psi at p, the part of the potential added to the base potential.
  double perturbation_potential(ChartPoint p) const;

  /// Stable textual description (backend, tau, modes, eps, resolution).
  std::string fingerprint() const;

 private:
  SurfaceConfig config_;
  double effective_epsilon_ = 0.0;
  QuadratureRule rule_;
  std::vector<LocalGeometry> nodes_;
  Eigen::VectorXd omega_weights_;
  Eigen::VectorXd area_weights_;
};

KahlerSurface build_surface(const SurfaceConfig& config);

/// Euclidean chart derivatives of a field that the operators need.
struct FieldDerivatives {
  double value = 0.0;
  double dx = 0.0;
  double dy = 0.0;
  double lap = 0.0;
  double lap_dx = 0.0;
  double lap_dy = 0.0;
  double bilap = 0.0;
};

FieldDerivatives field_derivatives(const FieldJet& jet);

double scalar_curvature(const KahlerSurface& K, ChartPoint p);

double laplacian(const LocalGeometry& g, const FieldDerivatives& f);
double linearized_scalar_D(const LocalGeometry& g, const FieldDerivatives& f);
double mabuchi_apply(const LocalGeometry& g, const FieldDerivatives& f);
/// Riemannian pairing (dS, df).
double curvature_gradient_pairing(const LocalGeometry& g, const FieldDerivatives& f);

double laplacian(const KahlerSurface& K, const ScalarField& f, ChartPoint p);
double linearized_scalar_D(const KahlerSurface& K, const ScalarField& f, ChartPoint p);
double mabuchi_apply(const KahlerSurface& K, const ScalarField& f, ChartPoint p);

/// Values of f at the quadrature nodes.
Eigen::VectorXd sample(const KahlerSurface& K, const ScalarField& f);
Eigen::VectorXd sample_laplacian(const KahlerSurface& K, const ScalarField& f);
Eigen::VectorXd sample_mabuchi(const KahlerSurface& K, const ScalarField& f);

/// Quadrature of f omega.
double integrate(const KahlerSurface& K, const ScalarField& f);
double integrate(const KahlerSurface& K, const Eigen::VectorXd& node_values);
/// Quadrature of (df, dg) omega; in real dimension two this is the Euclidean
/// Dirichlet pairing in the chart.
double dirichlet_pair(const KahlerSurface& K, const ScalarField& f, const ScalarField& g);

/// Fixed-order sum; used for every quadrature so results are reproducible.
double pairwise_sum(const double* data, std::size_t n);

}  // namespace qhl

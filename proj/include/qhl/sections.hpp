// Holomorphic sections of L^k, their pointwise pairings under h^k, and L^2
// Gram matrices.
//
// Sections are evaluated already multiplied by the weight e^{-k phi / 2}, so
// that (s_a, s_b)(p) = v_a(p) conj(v_b(p)). Derivatives are returned as
// f_a'(z) e^{-k phi / 2}: the holomorphic chart derivative times the same
// weight. Every quantity built from them downstream is homogeneous of degree
// zero in that weight.
#pragma once

#include <complex>
#include <optional>
#include <string>

#include <Eigen/Dense>

#include "qhl/geometry.hpp"

namespace qhl {

enum class SectionFamily { Monomial, Theta };

class SectionBasis {
 public:
  /// z^a, a = 0..k, on the sphere.
  static SectionBasis monomial(int k);
  /// Level-k theta functions with characteristics j/k on C / (Z + tau Z).
  /// Lattice terms are kept while the Gaussian exponent exceeds
  /// -truncation_digits * ln 10. Throws TruncationTooSmall if the dropped tail
  /// can exceed 1e-14.
  static SectionBasis theta(int k, std::complex<double> tau, double truncation_digits = 40.0);
  /// The natural basis for the surface's backend.
  static SectionBasis for_surface(const KahlerSurface& K, int k);

  SectionFamily family() const { return family_; }
  int k() const { return k_; }
  int dimension() const { return family_ == SectionFamily::Monomial ? k_ + 1 : k_; }
  std::complex<double> tau() const { return tau_; }
  double truncation_digits() const { return truncation_digits_; }

  /// Raw values f_a(z) and holomorphic derivatives f_a'(z). Monomials only;
  /// theta values overflow without the weight and are never needed raw.
  void evaluate_raw(std::complex<double> z, Eigen::VectorXcd& f, Eigen::VectorXcd* df) const;

  /// Values and derivatives times e^{-k phi_base / 2}.
  void evaluate_weighted(ChartPoint p, Eigen::VectorXcd& v, Eigen::VectorXcd* dv) const;

  /// Including the perturbation of the surface potential.
  void evaluate(const KahlerSurface& K, ChartPoint p, Eigen::VectorXcd& v, Eigen::VectorXcd* dv) const;

  /// (s_a, s_b)(p).
  std::complex<double> pairing(const KahlerSurface& K, ChartPoint p, int a, int b) const;

  std::string fingerprint() const;

 private:
  SectionFamily family_ = SectionFamily::Monomial;
  int k_ = 1;
  std::complex<double> tau_{0.0, 1.0};
  double truncation_digits_ = 40.0;
};

/// Weighted section values and derivatives at every quadrature node (rows).
struct SectionTable {
  Eigen::MatrixXcd values;
  Eigen::MatrixXcd derivatives;
};

SectionTable tabulate(const KahlerSurface& K, const SectionBasis& B);

/// Hermitian positive-definite matrix over the reference basis.
struct InnerProduct {
  Eigen::MatrixXcd gram;
  int dimension() const { return static_cast<int>(gram.rows()); }
};

/// G_ab = sum_p weights_p v_pa conj(v_pb).
Eigen::MatrixXcd weighted_gram(const Eigen::MatrixXcd& values, const Eigen::VectorXd& weights);

/// L^2 inner product against omega. Throws SingularGram.
InnerProduct hilb(const KahlerSurface& K, const SectionBasis& B);
InnerProduct hilb(const KahlerSurface& K, const SectionTable& table);

/// C with C* G C = I, from the Cholesky factor G = L L* (C = L^{-*}).
/// Orthonormal sections are s~_b = sum_a conj(C_ab) s_a, i.e. V C.conjugate()
/// row-wise. Throws SingularGram.
Eigen::MatrixXcd orthonormalize(const Eigen::MatrixXcd& gram);

/// Directory of JSON Gram matrices keyed by a SHA-256 of the inputs. The
/// environment variable QHL_CACHE overrides the directory given here.
class GramCache {
 public:
  explicit GramCache(std::string directory);

  const std::string& directory() const { return dir_; }
  static std::string key(const KahlerSurface& K, const SectionBasis& B);

  std::optional<InnerProduct> load(const std::string& key) const;
  void store(const std::string& key, const InnerProduct& G) const;

  /// Loads or computes and stores.
  InnerProduct hilb(const KahlerSurface& K, const SectionBasis& B) const;

 private:
  std::string dir_;
};

std::string sha256_hex(const std::string& text);

}  // namespace qhl

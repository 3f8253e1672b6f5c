// Balanced inner products as fixed points of Hilb_k o FS_k.
//
// For an inner product G over the reference sections, with orthonormal values
// v~ and rho = |v~|^2, one step returns
//
//     T(G)_ab = int s_a conj(s_b) / rho  omega_k / k,
//
// rescaled to trace n_k + 1. In the frame of G this is 4 pi mu_bar / k, so G
// is a fixed point up to scale exactly when mu_bar is a multiple of the
// identity.
#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qhl/quantization.hpp"
#include "qhl/sections.hpp"

namespace qhl {

/// Section tables are built once and reused by every step.
class TIteration {
 public:
  TIteration(const KahlerSurface& K, const SectionBasis& B);

  const KahlerSurface& surface() const { return *K_; }
  const SectionBasis& basis() const { return basis_; }
  const SectionTable& table() const { return table_; }

  /// Throws SingularGram.
  InnerProduct step(const InnerProduct& G) const;
  HermitianOperator mu_bar(const InnerProduct& G) const;
  /// ||mu_bar - (tr mu_bar / (n_k + 1)) id||_op.
  double defect(const InnerProduct& G) const;
  /// L^2 Gram for h e^{-c f}, the starting point of a run.
  InnerProduct hilb(const Eigen::VectorXd& f_nodes = {}, double c = 0.0) const;

 private:
  const KahlerSurface* K_;
  SectionBasis basis_;
  SectionTable table_;
};

/// Scales G to trace n_k + 1.
InnerProduct normalize_trace(const InnerProduct& G);

InnerProduct t_step(const KahlerSurface& K, const SectionBasis& B, const InnerProduct& G);

struct BalancedResult {
  InnerProduct gram;  // trace n_k + 1
  int iterations = 0;
  double defect = 0.0;
  /// Defect of the starting point, then after every step.
  std::vector<double> history;
  /// omega_k density at nodes for the balanced embedding.
  Eigen::VectorXd omega_k;

  std::string to_json() const;
};

enum class BalanceMethod {
  Plain,     // G <- T(G)
  Anderson,  // Anderson mixing of T on log-coordinates, safeguarded
};

/// Plain iteration contracts by about 1 - 4/k^2 per step, so at k >= 12 it
/// needs thousands of steps for tol 1e-10. Anderson mixing converges to the
/// same fixed point of T in tens of steps. A mixed step is kept only if it
/// lowers the defect; otherwise the plain step is taken and the history reset.
struct BalanceOptions {
  double tol = 1e-10;
  int max_iter = 200;
  BalanceMethod method = BalanceMethod::Anderson;
  int memory = 8;
};

/// Iterates from `start` (Hilb_k(h) when empty) until the defect drops below
/// tol. Throws NoConvergence after max_iter steps.
BalancedResult balance(const TIteration& T, const BalanceOptions& opt, const InnerProduct& start = {});
BalancedResult balance(const KahlerSurface& K, const SectionBasis& B, double tol, int max_iter);

}  // namespace qhl

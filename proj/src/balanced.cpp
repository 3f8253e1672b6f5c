#include "qhl/balanced.hpp"

#include <cmath>
#include <deque>

#include <fmt/format.h>
#include <json.hpp>

#include "qhl/error.hpp"
#include "qhl/hessian.hpp"

namespace qhl {

namespace {

struct FrameData {
  Eigen::MatrixXcd C;
  Eigen::MatrixXcd values;  // orthonormal
  Eigen::VectorXd rho;
  Eigen::VectorXd omega_k;  // density w.r.t. dx dy
};

FrameData frame_data(const SectionTable& t, const InnerProduct& G) {
  FrameData f;
  f.C = orthonormalize(G.gram);
  f.values = t.values * f.C.conjugate();
  const Eigen::MatrixXcd dv = t.derivatives * f.C.conjugate();
  f.rho = f.values.rowwise().squaredNorm();
  const Eigen::VectorXd d2 = dv.rowwise().squaredNorm();
  const Eigen::VectorXcd c = f.values.conjugate().cwiseProduct(dv).rowwise().sum();
  const Eigen::Index n = f.rho.size();
  f.omega_k.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double n2 = f.rho[i];
    if (!(n2 > 1e-300)) throw Error(ErrorCode::BasePoint, fmt::format("rho_k vanishes at node {}", i));
    f.omega_k[i] = (n2 * d2[i] - std::norm(c[i])) / (kPi * n2 * n2);
  }
  return f;
}

// G = C0^{-*} exp(X) C0^{-1} with X Hermitian and trace-free, C0 the frame of
// the starting point. Scale-free and well conditioned on every backend.
class LogCoordinates {
 public:
  explicit LogCoordinates(const InnerProduct& G0)
      : C0_(orthonormalize(G0.gram)), C0inv_(C0_.inverse()), F_(G0.dimension()) {}

  Eigen::VectorXd to(const InnerProduct& G) const {
    Eigen::MatrixXcd M = C0_.adjoint() * G.gram * C0_;
    M = 0.5 * (M + M.adjoint()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(M);
    if (!(es.eigenvalues().minCoeff() > 0.0)) throw Error(ErrorCode::SingularGram, "iterate lost positivity");
    Eigen::VectorXd l = es.eigenvalues().array().log();
    l.array() -= l.mean();
    return F_.coordinates(es.eigenvectors() * l.asDiagonal() * es.eigenvectors().adjoint());
  }

  InnerProduct from(const Eigen::VectorXd& x) const {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(F_.from_coordinates(x));
    const Eigen::VectorXd e = es.eigenvalues().array().exp();
    const Eigen::MatrixXcd M = es.eigenvectors() * e.asDiagonal() * es.eigenvectors().adjoint();
    InnerProduct G{C0inv_.adjoint() * M * C0inv_};
    G.gram = 0.5 * (G.gram + G.gram.adjoint()).eval();
    return normalize_trace(G);
  }

 private:
  Eigen::MatrixXcd C0_, C0inv_;
  HermitianFrame F_;
};

void run_plain(const TIteration& T, const BalanceOptions& opt, BalancedResult& r) {
  while (r.defect >= opt.tol && r.iterations < opt.max_iter) {
    r.gram = T.step(r.gram);
    ++r.iterations;
    r.defect = T.defect(r.gram);
    r.history.push_back(r.defect);
  }
}

// Type-II Anderson mixing on x -> log-coordinates of T(G(x)).
void run_anderson(const TIteration& T, const BalanceOptions& opt, BalancedResult& r) {
  const LogCoordinates L(r.gram);
  Eigen::VectorXd x = L.to(r.gram), f_prev, g_prev;
  std::deque<Eigen::VectorXd> dF, dG;
  while (r.defect >= opt.tol && r.iterations < opt.max_iter) {
    const InnerProduct plain = T.step(L.from(x));
    const Eigen::VectorXd g = L.to(plain);
    const Eigen::VectorXd f = g - x;
    if (f_prev.size() != 0) {
      dF.push_back(f - f_prev);
      dG.push_back(g - g_prev);
      if (static_cast<int>(dF.size()) > opt.memory) {
        dF.pop_front();
        dG.pop_front();
      }
    }
    f_prev = f;
    g_prev = g;

    Eigen::VectorXd next = g;
    InnerProduct G = plain;
    double d = T.defect(plain);
    if (!dF.empty()) {
      Eigen::MatrixXd A(f.size(), static_cast<Eigen::Index>(dF.size())), B(A.rows(), A.cols());
      for (std::size_t i = 0; i < dF.size(); ++i) {
        A.col(static_cast<Eigen::Index>(i)) = dF[i];
        B.col(static_cast<Eigen::Index>(i)) = dG[i];
      }
      const Eigen::VectorXd gamma = A.completeOrthogonalDecomposition().solve(f);
      const Eigen::VectorXd mixed = g - B * gamma;
      const InnerProduct Gm = L.from(mixed);
      const double dm = T.defect(Gm);
      if (dm < r.defect && std::isfinite(dm)) {
        next = mixed;
        G = Gm;
        d = dm;
      } else {
        dF.clear();
        dG.clear();
      }
    }
    x = next;
    r.gram = G;
    ++r.iterations;
    r.defect = d;
    r.history.push_back(d);
  }
}

}  // namespace

TIteration::TIteration(const KahlerSurface& K, const SectionBasis& B)
    : K_(&K), basis_(B), table_(tabulate(K, B)) {}

InnerProduct TIteration::step(const InnerProduct& G) const {
  const FrameData f = frame_data(table_, G);
  const Eigen::VectorXd w = K_->area_weights().cwiseProduct(f.omega_k).cwiseQuotient(f.rho) / basis_.k();
  return normalize_trace({weighted_gram(table_.values, w)});
}

HermitianOperator TIteration::mu_bar(const InnerProduct& G) const {
  const FrameData f = frame_data(table_, G);
  const Eigen::VectorXd w = K_->area_weights().cwiseProduct(f.omega_k).cwiseQuotient(f.rho) / (4.0 * kPi);
  return weighted_gram(f.values, w);
}

double TIteration::defect(const InnerProduct& G) const {
  const HermitianOperator m = mu_bar(G);
  const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(m, Eigen::EigenvaluesOnly).eigenvalues();
  const double mean = m.trace().real() / static_cast<double>(m.rows());
  return std::max(ev.maxCoeff() - mean, mean - ev.minCoeff());
}

InnerProduct TIteration::hilb(const Eigen::VectorXd& f_nodes, double c) const {
  Eigen::VectorXd w = K_->omega_weights();
  if (f_nodes.size() != 0) w = w.cwiseProduct((-c * basis_.k() * f_nodes).array().exp().matrix());
  return normalize_trace({weighted_gram(table_.values, w)});
}

InnerProduct normalize_trace(const InnerProduct& G) {
  const double tr = G.gram.trace().real();
  if (!(tr > 0.0) || !std::isfinite(tr)) throw Error(ErrorCode::SingularGram, "Gram matrix has nonpositive trace");
  return {G.gram * (static_cast<double>(G.dimension()) / tr)};
}

InnerProduct t_step(const KahlerSurface& K, const SectionBasis& B, const InnerProduct& G) {
  return TIteration(K, B).step(G);
}

BalancedResult balance(const TIteration& T, const BalanceOptions& opt, const InnerProduct& start) {
  BalancedResult r;
  r.gram = start.dimension() == 0 ? T.hilb() : normalize_trace(start);
  r.defect = T.defect(r.gram);
  r.history.push_back(r.defect);
  if (opt.method == BalanceMethod::Plain)
    run_plain(T, opt, r);
  else
    run_anderson(T, opt, r);
  if (!(r.defect < opt.tol))
    throw Error(ErrorCode::NoConvergence, fmt::format("k = {}: defect {:.3e} after {} iterations (tol {:.1e})",
                                                      T.basis().k(), r.defect, r.iterations, opt.tol));
  r.omega_k = frame_data(T.table(), r.gram).omega_k;
  return r;
}

BalancedResult balance(const KahlerSurface& K, const SectionBasis& B, double tol, int max_iter) {
  BalanceOptions opt;
  opt.tol = tol;
  opt.max_iter = max_iter;
  return balance(TIteration(K, B), opt);
}

std::string BalancedResult::to_json() const {
  nlohmann::ordered_json j;
  j["dimension"] = gram.dimension();
  j["iterations"] = iterations;
  j["defect"] = defect;
  j["history"] = history;
  std::vector<std::vector<double>> re(gram.dimension()), im(gram.dimension());
  for (int a = 0; a < gram.dimension(); ++a)
    for (int b = 0; b < gram.dimension(); ++b) {
      re[a].push_back(gram.gram(a, b).real());
      im[a].push_back(gram.gram(a, b).imag());
    }
  j["gram_re"] = re;
  j["gram_im"] = im;
  return j.dump(2);
}

}  // namespace qhl

#include "qhl/sections.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "qhl/error.hpp"

namespace qhl {

namespace {

constexpr double kLn10 = 2.302585092994045684;

// Bound on the theta tail dropped beyond exponent -T; terms are Gaussian in
// the lattice index with spacing Im tau.
double theta_tail_bound(int k, double im_tau, double T) {
  const double a = kPi * k / im_tau;
  const double ratio = std::exp(-2.0 * std::sqrt(a * T) * im_tau);
  return 2.0 * std::exp(-T) / (1.0 - ratio);
}

}  // namespace

SectionBasis SectionBasis::monomial(int k) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be positive");
  SectionBasis b;
  b.family_ = SectionFamily::Monomial;
  b.k_ = k;
  return b;
}

SectionBasis SectionBasis::theta(int k, std::complex<double> tau, double truncation_digits) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be positive");
  if (!(tau.imag() > 0.0)) throw Error(ErrorCode::BadLattice, "Im tau must be positive");
  const double tail = theta_tail_bound(k, tau.imag(), truncation_digits * kLn10);
  if (!(tail <= 1e-14))
    throw Error(ErrorCode::TruncationTooSmall, fmt::format("theta tail bound {:.3e} exceeds 1e-14", tail));
  SectionBasis b;
  b.family_ = SectionFamily::Theta;
  b.k_ = k;
  b.tau_ = tau;
  b.truncation_digits_ = truncation_digits;
  return b;
}

SectionBasis SectionBasis::for_surface(const KahlerSurface& K, int k) {
  return K.sphere() ? monomial(k) : theta(k, K.tau());
}

void SectionBasis::evaluate_raw(std::complex<double> z, Eigen::VectorXcd& f, Eigen::VectorXcd* df) const {
  if (family_ != SectionFamily::Monomial)
    throw Error(ErrorCode::InvalidArgument, "raw evaluation is only available for monomials");
  const int d = dimension();
  f.resize(d);
  if (df) df->resize(d);
  std::complex<double> p(1.0, 0.0);
  for (int a = 0; a < d; ++a) {
    f[a] = p;
    if (df) (*df)[a] = a == 0 ? std::complex<double>(0.0) : static_cast<double>(a) * f[a - 1];
    p *= z;
  }
}

void SectionBasis::evaluate_weighted(ChartPoint p, Eigen::VectorXcd& v, Eigen::VectorXcd* dv) const {
  const int d = dimension();
  v.setZero(d);
  if (dv) dv->setZero(d);

  if (family_ == SectionFamily::Monomial) {
    // z^a (1 + |z|^2)^{-k/2} = (z/s)^a s^{-(k-a)}, s = sqrt(1 + |z|^2)
    const double s = std::sqrt(1.0 + p.x * p.x + p.y * p.y);
    const std::complex<double> zs = p.z() / s;
    std::complex<double> zpow(1.0, 0.0);  // (z/s)^a
    for (int a = 0; a <= k_; ++a) {
      v[a] = zpow * std::pow(s, -(k_ - a));
      if (dv && a > 0) {
        // a z^{a-1} s^{-k} = a (z/s)^{a-1} s^{-(k-a+1)}
        const std::complex<double> prev = a == 1 ? std::complex<double>(1.0) : std::pow(zs, a - 1);
        (*dv)[a] = static_cast<double>(a) * prev * std::pow(s, -(k_ - a + 1));
      }
      zpow *= zs;
    }
    return;
  }

  // Theta: each lattice term times the flat weight is
  //   exp(-(pi k / Im tau)(Im tau c + y)^2) exp(i(pi k Re tau c^2 + 2 pi k c x)),  c = n + j/k.
  const double im = tau_.imag(), re = tau_.real();
  const double a = kPi * k_ / im;
  const double T = truncation_digits_ * kLn10;
  const double radius = std::sqrt(T / a) / im;  // in units of c
  const double centre = -p.y / im;
  for (int j = 0; j < k_; ++j) {
    const double shift = static_cast<double>(j) / k_;
    const long n_lo = static_cast<long>(std::ceil(centre - radius - shift));
    const long n_hi = static_cast<long>(std::floor(centre + radius - shift));
    std::complex<double> sum(0.0), dsum(0.0);
    for (long n = n_lo; n <= n_hi; ++n) {
      const double c = static_cast<double>(n) + shift;
      const double t = im * c + p.y;
      const double mag = std::exp(-a * t * t);
      const double phase = kPi * k_ * re * c * c + 2.0 * kPi * k_ * c * p.x;
      const std::complex<double> term = std::polar(mag, phase);
      sum += term;
      if (dv) dsum += term * std::complex<double>(0.0, 2.0 * kPi * k_ * c);
    }
    v[j] = sum;
    if (dv) (*dv)[j] = dsum;
  }
}

void SectionBasis::evaluate(const KahlerSurface& K, ChartPoint p, Eigen::VectorXcd& v,
                            Eigen::VectorXcd* dv) const {
  evaluate_weighted(p, v, dv);
  const double pert = K.perturbation_potential(p);
  if (pert != 0.0) {
    const double w = std::exp(-0.5 * k_ * pert);
    v *= w;
    if (dv) *dv *= w;
  }
}

std::complex<double> SectionBasis::pairing(const KahlerSurface& K, ChartPoint p, int a, int b) const {
  Eigen::VectorXcd v;
  evaluate(K, p, v, nullptr);
  return v[a] * std::conj(v[b]);
}

std::string SectionBasis::fingerprint() const {
  if (family_ == SectionFamily::Monomial) return fmt::format("monomial;k={}", k_);
  return fmt::format("theta;k={};tau={:.17g},{:.17g};digits={:.17g}", k_, tau_.real(), tau_.imag(),
                     truncation_digits_);
}

SectionTable tabulate(const KahlerSurface& K, const SectionBasis& B) {
  const int n = K.node_count(), d = B.dimension();
  SectionTable t;
  t.values.resize(n, d);
  t.derivatives.resize(n, d);
  Eigen::VectorXcd v, dv;
  for (int i = 0; i < n; ++i) {
    const auto& node = K.nodes()[i];
    B.evaluate_weighted(node.point, v, &dv);
    if (node.perturbation_potential != 0.0) {
      const double w = std::exp(-0.5 * B.k() * node.perturbation_potential);
      v *= w;
      dv *= w;
    }
    t.values.row(i) = v.transpose();
    t.derivatives.row(i) = dv.transpose();
  }
  return t;
}

Eigen::MatrixXcd weighted_gram(const Eigen::MatrixXcd& values, const Eigen::VectorXd& weights) {
  Eigen::MatrixXcd g = values.transpose() * (weights.asDiagonal() * values.conjugate());
  // exact Hermitian symmetry
  Eigen::MatrixXcd h = 0.5 * (g + g.adjoint());
  return h;
}

InnerProduct hilb(const KahlerSurface& K, const SectionTable& table) {
  InnerProduct G{weighted_gram(table.values, K.omega_weights())};
  Eigen::LLT<Eigen::MatrixXcd> llt(G.gram);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularGram, "Gram matrix is not positive definite");
  return G;
}

InnerProduct hilb(const KahlerSurface& K, const SectionBasis& B) { return hilb(K, tabulate(K, B)); }

Eigen::MatrixXcd orthonormalize(const Eigen::MatrixXcd& gram) {
  Eigen::LLT<Eigen::MatrixXcd> llt(gram);
  if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularGram, "Cholesky factorization failed");
  const Eigen::MatrixXcd L = llt.matrixL();
  const double dmin = L.diagonal().real().minCoeff(), dmax = L.diagonal().real().maxCoeff();
  if (!(dmin > 1e-14 * dmax)) throw Error(ErrorCode::SingularGram, "Gram matrix is numerically singular");
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(gram.rows(), gram.cols());
  // C = L^{-*} solves L* C = I
  return L.adjoint().triangularView<Eigen::Upper>().solve(I);
}

// ---------------------------------------------------------------------------
// Cache

std::string sha256_hex(const std::string& text) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr);
  std::string out;
  for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
  return out;
}

GramCache::GramCache(std::string directory) : dir_(std::move(directory)) {
  if (const char* env = std::getenv("QHL_CACHE"); env && *env) dir_ = env;
}

std::string GramCache::key(const KahlerSurface& K, const SectionBasis& B) {
  return sha256_hex("gram;" + K.fingerprint() + ";" + B.fingerprint());
}

std::optional<InnerProduct> GramCache::load(const std::string& key) const {
  if (dir_.empty()) return std::nullopt;
  std::ifstream in(std::filesystem::path(dir_) / (key + ".json"));
  if (!in) return std::nullopt;
  try {
    const auto j = nlohmann::json::parse(in);
    const int d = j.at("dimension").get<int>();
    const auto& re = j.at("re");
    const auto& im = j.at("im");
    if (static_cast<int>(re.size()) != d * d || static_cast<int>(im.size()) != d * d) return std::nullopt;
    InnerProduct G{Eigen::MatrixXcd(d, d)};
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) G.gram(a, b) = {re[a * d + b].get<double>(), im[a * d + b].get<double>()};
    return G;
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
}

void GramCache::store(const std::string& key, const InnerProduct& G) const {
  if (dir_.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  const int d = G.dimension();
  nlohmann::json j;
  j["dimension"] = d;
  std::vector<double> re, im;
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      re.push_back(G.gram(a, b).real());
      im.push_back(G.gram(a, b).imag());
    }
  j["re"] = re;
  j["im"] = im;
  // write then rename so concurrent readers never see a partial entry
  const auto path = std::filesystem::path(dir_) / (key + ".json");
  const auto tmp = std::filesystem::path(dir_) / (key + ".json.tmp");
  {
    std::ofstream out(tmp);
    if (!out) throw Error(ErrorCode::Io, fmt::format("cannot write cache entry {}", tmp.string()));
    out << j.dump();
  }
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::Io, fmt::format("cannot publish cache entry {}", path.string()));
}

InnerProduct GramCache::hilb(const KahlerSurface& K, const SectionBasis& B) const {
  const std::string k = key(K, B);
  if (auto hit = load(k)) return *hit;
  InnerProduct G = qhl::hilb(K, B);
  store(k, G);
  return G;
}

}  // namespace qhl

#include "qhl/geometry.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "qhl/error.hpp"
#include "qhl/harmonics.hpp"

namespace qhl {

namespace {

template <int N>
SurfaceCoords<N> coords_at(const SurfaceConfig& cfg, ChartPoint p) {
  const Taylor<N> X = Taylor<N>::x(p.x);
  const Taylor<N> Y = Taylor<N>::y(p.y);
  SurfaceCoords<N> c;
  if (is_sphere(cfg.backend)) {
    const Taylor<N> r2 = X * X + Y * Y;
    const Taylor<N> inv = reciprocal(r2 + 1.0);
    c.u = X * inv * 2.0;
    c.v = Y * inv * 2.0;
    c.w = (1.0 - r2) * inv;
  } else {
    const double re = cfg.tau.real(), im = cfg.tau.imag();
    c.u = X - Y * (re / im);
    c.v = Y * (1.0 / im);
    c.w = Taylor<N>(0.0);
  }
  return c;
}

template <int N>
Taylor<N> psi_at(const SurfaceConfig& cfg, const SurfaceCoords<N>& c) {
  Taylor<N> psi(0.0);
  if (is_sphere(cfg.backend)) {
    int lmax = 0;
    for (const auto& m : cfg.perturbation) lmax = std::max(lmax, m.a);
    const auto ylm = real_harmonics<N>(lmax, c.u, c.v, c.w);
    for (const auto& m : cfg.perturbation) psi += ylm[harmonic_index(m.a, m.b)] * m.cos_coeff;
  } else {
    for (const auto& m : cfg.perturbation) {
      const Taylor<N> phase = (c.u * static_cast<double>(m.a) + c.v * static_cast<double>(m.b)) * (2.0 * kPi);
      if (m.cos_coeff != 0.0) psi += cos(phase) * m.cos_coeff;
      if (m.sin_coeff != 0.0) psi += sin(phase) * m.sin_coeff;
    }
  }
  return psi;
}

template <int N>
Taylor<N> base_density(const SurfaceConfig& cfg, ChartPoint p) {
  if (is_sphere(cfg.backend)) {
    const Taylor<N> X = Taylor<N>::x(p.x);
    const Taylor<N> Y = Taylor<N>::y(p.y);
    const Taylor<N> s = X * X + Y * Y + 1.0;
    return reciprocal(s * s) * (1.0 / kPi);
  }
  return Taylor<N>(1.0 / cfg.tau.imag());
}

LocalGeometry make_local(const SurfaceConfig& cfg, double eps, ChartPoint p) {
  LocalGeometry out;
  out.point = p;
  out.coords = coords_at<4>(cfg, p);

  Taylor<5> g = base_density<5>(cfg, p);
  if (eps != 0.0) {
    const auto c7 = coords_at<7>(cfg, p);
    const Taylor<7> psi = psi_at<7>(cfg, c7);
    out.perturbation_potential = 2.0 * eps * psi.value();
    // omega = omega_base + (i / 2pi) d dbar (2 eps psi)
    g += psi.laplacian() * (eps / (2.0 * kPi));
  }
  out.density = g.value();
  if (!(out.density > 0.0)) return out;

  const Taylor<5> u = reciprocal(g);
  out.inv_density = u.value();
  out.inv_density_dx = u.partial(1, 0);
  out.inv_density_dy = u.partial(0, 1);
  out.inv_density_lap = u.laplacian().value();

  const Taylor<3> s = -(log(g).laplacian() * u.truncate<3>());
  out.scalar_curvature = s.value();
  out.scalar_curvature_dx = s.partial(1, 0);
  out.scalar_curvature_dy = s.partial(0, 1);
  return out;
}

}  // namespace

std::string_view to_string(Backend backend) {
  switch (backend) {
    case Backend::SphereRound: return "SphereRound";
    case Backend::SpherePerturbed: return "SpherePerturbed";
    case Backend::TorusFlat: return "TorusFlat";
    case Backend::TorusPerturbed: return "TorusPerturbed";
  }
  return "?";
}

Backend backend_from_string(std::string_view name) {
  for (Backend b : {Backend::SphereRound, Backend::SpherePerturbed, Backend::TorusFlat, Backend::TorusPerturbed})
    if (to_string(b) == name) return b;
  throw Error(ErrorCode::Config, fmt::format("unknown backend '{}'", name));
}

// ---------------------------------------------------------------------------
// Fields

namespace fields {

ScalarField constant(double c) {
  return ScalarField(fmt::format("{}", c), [c](const SurfaceCoords<4>&) { return FieldJet(c); });
}

ScalarField torus_cos(int m, int n) {
  return ScalarField(fmt::format("cos2pi({}x+{}y)", m, n), [m, n](const SurfaceCoords<4>& c) {
    return cos((c.u * static_cast<double>(m) + c.v * static_cast<double>(n)) * (2.0 * kPi));
  });
}

ScalarField torus_sin(int m, int n) {
  return ScalarField(fmt::format("sin2pi({}x+{}y)", m, n), [m, n](const SurfaceCoords<4>& c) {
    return sin((c.u * static_cast<double>(m) + c.v * static_cast<double>(n)) * (2.0 * kPi));
  });
}

ScalarField sphere_harmonic(int l, int m) {
  if (l < 0 || m < -l || m > l) throw Error(ErrorCode::InvalidArgument, "bad harmonic degree/order");
  return ScalarField(fmt::format("Y{}_{}", l, m), [l, m](const SurfaceCoords<4>& c) {
    return real_harmonics<4>(l, c.u, c.v, c.w)[harmonic_index(l, m)];
  });
}

ScalarField product(const ScalarField& f, const ScalarField& g) {
  return ScalarField(f.name() + "*" + g.name(),
                     [f, g](const SurfaceCoords<4>& c) { return f(c) * g(c); });
}

ScalarField linear_combination(double a, const ScalarField& f, double b, const ScalarField& g) {
  return ScalarField(fmt::format("{}*{}+{}*{}", a, f.name(), b, g.name()),
                     [a, b, f, g](const SurfaceCoords<4>& c) { return f(c) * a + g(c) * b; });
}

ScalarField scaled(double a, const ScalarField& f) {
  return ScalarField(fmt::format("{}*{}", a, f.name()), [a, f](const SurfaceCoords<4>& c) { return f(c) * a; });
}

ScalarField by_name(std::string_view name) {
  auto named = [&](ScalarField f) { return ScalarField(std::string(name), [f](const SurfaceCoords<4>& c) { return f(c); }); };
  if (name == "1") return named(constant(1.0));
  if (name == "cos2pix") return named(torus_cos(1, 0));
  if (name == "sin2pix") return named(torus_sin(1, 0));
  if (name == "cos2piy") return named(torus_cos(0, 1));
  if (name == "sin2piy") return named(torus_sin(0, 1));
  if (name == "cos2pix_cos2piy") return named(product(torus_cos(1, 0), torus_cos(0, 1)));
  if (name == "cos4pix") return named(torus_cos(2, 0));
  if (name.size() >= 4 && name[0] == 'Y') {
    const auto sep = name.find('_');
    int l = 0, m = 0;
    if (sep != std::string_view::npos) {
      const auto r1 = std::from_chars(name.data() + 1, name.data() + sep, l);
      const auto r2 = std::from_chars(name.data() + sep + 1, name.data() + name.size(), m);
      if (r1.ec == std::errc() && r2.ec == std::errc()) return named(sphere_harmonic(l, m));
    }
  }
  throw Error(ErrorCode::Config, fmt::format("unknown dictionary function '{}'", name));
}

}  // namespace fields

// ---------------------------------------------------------------------------
// Quadrature

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
  nodes.assign(static_cast<std::size_t>(n), 0.0);
  weights.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int l = 2; l <= n; ++l) {
        const double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    {
      double p0 = 1.0, p1 = x;
      for (int l = 2; l <= n; ++l) {
        const double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = w;
    weights[n - 1 - i] = w;
  }
}

QuadratureRule torus_rule(std::complex<double> tau, int m) {
  QuadratureRule rule;
  rule.resolution = m;
  rule.nodes.reserve(static_cast<std::size_t>(m) * m);
  const double w = tau.imag() / (static_cast<double>(m) * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      const double x = static_cast<double>(i) / m, y = static_cast<double>(j) / m;
      rule.nodes.push_back({x + tau.real() * y, tau.imag() * y});
      rule.weights.push_back(w);
    }
  return rule;
}

QuadratureRule sphere_rule(int m) {
  QuadratureRule rule;
  rule.resolution = m;
  std::vector<double> u, wu;
  gauss_legendre(m, u, wu);
  const int naz = 2 * m;
  for (int i = 0; i < m; ++i) {
    const double r = std::sqrt((1.0 - u[i]) / (1.0 + u[i]));
    // dx dy = r dr dphi and r dr = du / (1 + u)^2
    const double w = wu[i] / ((1.0 + u[i]) * (1.0 + u[i])) * (2.0 * kPi / naz);
    for (int j = 0; j < naz; ++j) {
      const double phi = 2.0 * kPi * j / naz;
      rule.nodes.push_back({r * std::cos(phi), r * std::sin(phi)});
      rule.weights.push_back(w);
    }
  }
  return rule;
}

double pairwise_sum(const double* data, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += data[i];
    return s;
  }
  const std::size_t h = n / 2;
  return pairwise_sum(data, h) + pairwise_sum(data + h, n - h);
}

// ---------------------------------------------------------------------------
// Surface

KahlerSurface::KahlerSurface(SurfaceConfig config) : config_(std::move(config)) {
  if (!is_sphere(config_.backend) && !(config_.tau.imag() > 0.0))
    throw Error(ErrorCode::BadLattice, fmt::format("Im tau = {} must be positive", config_.tau.imag()));
  if (is_sphere(config_.backend)) config_.tau = {0.0, 1.0};

  if (is_perturbed(config_.backend)) {
    if (config_.perturbation.empty()) {
      config_.perturbation.push_back(is_sphere(config_.backend) ? PerturbationMode{2, 0, 1.0, 0.0}
                                                                : PerturbationMode{1, 0, 1.0, 0.0});
    }
    for (const auto& m : config_.perturbation)
      if (is_sphere(config_.backend) && (m.a < 0 || std::abs(m.b) > m.a))
        throw Error(ErrorCode::Config, "sphere perturbation mode needs |order| <= degree");
    effective_epsilon_ = config_.epsilon;
  } else {
    config_.perturbation.clear();
    config_.epsilon = 0.0;
    effective_epsilon_ = 0.0;
  }

  if (config_.resolution <= 0) config_.resolution = is_sphere(config_.backend) ? 96 : 64;
  rule_ = is_sphere(config_.backend) ? sphere_rule(config_.resolution)
                                     : torus_rule(config_.tau, config_.resolution);

  const auto n = rule_.nodes.size();
  nodes_.reserve(n);
  omega_weights_.resize(static_cast<Eigen::Index>(n));
  area_weights_.resize(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    nodes_.push_back(make_local(config_, effective_epsilon_, rule_.nodes[i]));
    if (!(nodes_.back().density > 0.0))
      throw Error(ErrorCode::NonPositiveMetric,
                  fmt::format("density {} at node ({}, {})", nodes_.back().density, rule_.nodes[i].x,
                              rule_.nodes[i].y));
    area_weights_[static_cast<Eigen::Index>(i)] = rule_.weights[i];
    omega_weights_[static_cast<Eigen::Index>(i)] = rule_.weights[i] * nodes_.back().density;
  }
}

LocalGeometry KahlerSurface::local(ChartPoint p) const {
  LocalGeometry g = make_local(config_, effective_epsilon_, p);
  if (!(g.density > 0.0))
    throw Error(ErrorCode::NonPositiveMetric, fmt::format("density {} at ({}, {})", g.density, p.x, p.y));
  return g;
}

ChartPoint KahlerSurface::from_lattice(double x, double y) const {
  return {x + config_.tau.real() * y, config_.tau.imag() * y};
}

ChartPoint KahlerSurface::from_sphere(double cos_theta, double azimuth) const {
  const double r = std::sqrt((1.0 - cos_theta) / (1.0 + cos_theta));
  return {r * std::cos(azimuth), r * std::sin(azimuth)};
}

double KahlerSurface::perturbation_potential(ChartPoint p) const {
  if (effective_epsilon_ == 0.0) return 0.0;
  const auto c = coords_at<0>(config_, p);
  return 2.0 * effective_epsilon_ * psi_at<0>(config_, c).value();
}

std::string KahlerSurface::fingerprint() const {
  std::string s = fmt::format("backend={};tau={:.17g},{:.17g};eps={:.17g};M={};modes=", to_string(config_.backend),
                              config_.tau.real(), config_.tau.imag(), effective_epsilon_, config_.resolution);
  for (const auto& m : config_.perturbation)
    s += fmt::format("[{},{},{:.17g},{:.17g}]", m.a, m.b, m.cos_coeff, m.sin_coeff);
  return s;
}

KahlerSurface build_surface(const SurfaceConfig& config) { return KahlerSurface(config); }

// ---------------------------------------------------------------------------
// Operators

FieldDerivatives field_derivatives(const FieldJet& f) {
  FieldDerivatives d;
  d.value = f.value();
  d.dx = f.partial(1, 0);
  d.dy = f.partial(0, 1);
  d.lap = f.partial(2, 0) + f.partial(0, 2);
  d.lap_dx = f.partial(3, 0) + f.partial(1, 2);
  d.lap_dy = f.partial(2, 1) + f.partial(0, 3);
  d.bilap = f.partial(4, 0) + 2.0 * f.partial(2, 2) + f.partial(0, 4);
  return d;
}

double scalar_curvature(const KahlerSurface& K, ChartPoint p) { return K.local(p).scalar_curvature; }

double laplacian(const LocalGeometry& g, const FieldDerivatives& f) { return -g.inv_density * f.lap; }

double linearized_scalar_D(const LocalGeometry& g, const FieldDerivatives& f) {
  // Delta^2 f = u Lap(u Lap f) with u = 1/g
  const double u = g.inv_density;
  const double bilap = u * (u * f.bilap + 2.0 * (g.inv_density_dx * f.lap_dx + g.inv_density_dy * f.lap_dy) +
                            g.inv_density_lap * f.lap);
  return bilap - g.scalar_curvature * laplacian(g, f);
}

double curvature_gradient_pairing(const LocalGeometry& g, const FieldDerivatives& f) {
  return g.inv_density * (g.scalar_curvature_dx * f.dx + g.scalar_curvature_dy * f.dy);
}

double mabuchi_apply(const LocalGeometry& g, const FieldDerivatives& f) {
  return 0.5 * (linearized_scalar_D(g, f) + curvature_gradient_pairing(g, f));
}

double laplacian(const KahlerSurface& K, const ScalarField& f, ChartPoint p) {
  const auto g = K.local(p);
  return laplacian(g, field_derivatives(f(g.coords)));
}

double linearized_scalar_D(const KahlerSurface& K, const ScalarField& f, ChartPoint p) {
  const auto g = K.local(p);
  return linearized_scalar_D(g, field_derivatives(f(g.coords)));
}

double mabuchi_apply(const KahlerSurface& K, const ScalarField& f, ChartPoint p) {
  const auto g = K.local(p);
  return mabuchi_apply(g, field_derivatives(f(g.coords)));
}

Eigen::VectorXd sample(const KahlerSurface& K, const ScalarField& f) {
  Eigen::VectorXd out(K.node_count());
  for (int i = 0; i < K.node_count(); ++i) out[i] = f(K.nodes()[i].coords).value();
  return out;
}

Eigen::VectorXd sample_laplacian(const KahlerSurface& K, const ScalarField& f) {
  Eigen::VectorXd out(K.node_count());
  for (int i = 0; i < K.node_count(); ++i) {
    const auto& g = K.nodes()[i];
    out[i] = laplacian(g, field_derivatives(f(g.coords)));
  }
  return out;
}

Eigen::VectorXd sample_mabuchi(const KahlerSurface& K, const ScalarField& f) {
  Eigen::VectorXd out(K.node_count());
  for (int i = 0; i < K.node_count(); ++i) {
    const auto& g = K.nodes()[i];
    out[i] = mabuchi_apply(g, field_derivatives(f(g.coords)));
  }
  return out;
}

double integrate(const KahlerSurface& K, const Eigen::VectorXd& node_values) {
  const Eigen::VectorXd prod = node_values.cwiseProduct(K.omega_weights());
  return pairwise_sum(prod.data(), static_cast<std::size_t>(prod.size()));
}

double integrate(const KahlerSurface& K, const ScalarField& f) { return integrate(K, sample(K, f)); }

double dirichlet_pair(const KahlerSurface& K, const ScalarField& f, const ScalarField& g) {
  Eigen::VectorXd terms(K.node_count());
  for (int i = 0; i < K.node_count(); ++i) {
    const auto& c = K.nodes()[i].coords;
    const auto df = field_derivatives(f(c));
    const auto dg = field_derivatives(g(c));
    terms[i] = K.area_weights()[i] * (df.dx * dg.dx + df.dy * dg.dy);
  }
  return pairwise_sum(terms.data(), static_cast<std::size_t>(terms.size()));
}

}  // namespace qhl

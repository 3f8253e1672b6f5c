#include <doctest.h>

#include <cmath>

#include "qhl/error.hpp"
#include "qhl/fit.hpp"
#include "qhl/quantization.hpp"

using namespace qhl;

namespace {

std::vector<double> grid(std::initializer_list<double> ks) { return ks; }

int code_of(auto fn) {
  try {
    fn();
  } catch (const Error& e) {
    return static_cast<int>(e.code());
  }
  return -1;
}

}  // namespace

TEST_CASE("exact polynomial 3k + 5") {
  const auto ks = grid({8, 12, 16, 20, 24, 28, 32});
  std::vector<double> y;
  for (double k : ks) y.push_back(3 * k + 5);
  const auto f = fit_expansion(ks, y, 1.0, 2);
  CHECK(f.coefficients[0] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(f.coefficients[1] == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(std::abs(f.next_coefficient) < 1e-9);
  CHECK(f.misfit < 1e-12);
  for (double r : f.residuals) CHECK(std::abs(r) < 1e-11);
  CHECK(f.evaluate(10.0) == doctest::Approx(35.0).epsilon(1e-12));
}

TEST_CASE("fit refuses narrow grids and extrapolation") {
  const auto ks = grid({8, 16, 24, 32});
  const std::vector<double> y = {1, 2, 3, 4};
  CHECK(code_of([&] { fit_expansion(grid({8, 16, 24}), {1, 2, 3}, 1.0, 1); }) ==
        static_cast<int>(ErrorCode::InvalidArgument));
  // repeated k do not count as distinct
  CHECK(code_of([&] { fit_expansion(grid({8, 8, 16, 24}), y, 1.0, 1); }) ==
        static_cast<int>(ErrorCode::InvalidArgument));
  CHECK(code_of([&] { fit_expansion(ks, y, 1.0, 3); }) == static_cast<int>(ErrorCode::InvalidArgument));
  const auto f = fit_expansion(ks, y, 1.0, 1);
  CHECK(code_of([&] { (void)f.evaluate(40.0); }) == static_cast<int>(ErrorCode::InvalidArgument));
  CHECK(code_of([&] { (void)f.evaluate(4.0); }) == static_cast<int>(ErrorCode::InvalidArgument));
}

TEST_CASE("nearly coincident k make the fit ill-conditioned") {
  const auto ks = grid({100.0, 100.001, 100.002, 100.003, 100.004});
  std::vector<double> y;
  for (double k : ks) y.push_back(k);
  CHECK(code_of([&] { fit_expansion(ks, y, 1.0, 3); }) == static_cast<int>(ErrorCode::IllConditionedFit));
}

TEST_CASE("log-log slope") {
  const auto ks = grid({8, 12, 16, 24, 32});
  std::vector<double> y;
  for (double k : ks) y.push_back(-7.0 * std::pow(k, -1.5));
  const auto s = loglog_slope(ks, y);
  CHECK(s.slope == doctest::Approx(-1.5).epsilon(1e-12));
  CHECK(s.intercept == doctest::Approx(std::log(7.0)).epsilon(1e-12));
  CHECK(s.stderr_slope < 1e-12);
  CHECK_THROWS_AS(loglog_slope(ks, {1, 2, 0, 4, 5}), Error);
  CHECK_THROWS_AS(loglog_slope(grid({8}), {1}), Error);
}

TEST_CASE("Bergman density at a torus point: b0 = 1, b1 = S/8pi") {
  SurfaceConfig c;
  c.backend = Backend::TorusPerturbed;
  c.epsilon = 0.05;
  const KahlerSurface K(c);
  const ChartPoint p = K.from_lattice(0.3, 0.7);
  const auto ks = grid({8, 12, 16, 20, 24, 28, 32});
  std::vector<double> rho;
  for (double k : ks) rho.push_back(bergman_density(QuantizedState::at_hilb(K, static_cast<int>(k)), p));
  // b2, b3 are large on this surface; two terms leave b1 off by 0.016
  const auto f = fit_expansion(ks, rho, 1.0, 5);
  CHECK(f.condition < 1e6);
  CHECK(std::abs(f.coefficients[0] - 1.0) < 1e-3);
  CHECK(std::abs(f.coefficients[1] - scalar_curvature(K, p) / (8 * kPi)) < 1e-2);

  std::vector<double> residual;
  for (std::size_t i = 0; i < ks.size(); ++i) residual.push_back(rho[i] - ks[i] - scalar_curvature(K, p) / (8 * kPi));
  CHECK(std::abs(loglog_slope(ks, residual).slope + 1.0) < 0.2);
}

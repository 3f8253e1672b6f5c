#include "qhl/fit.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "qhl/error.hpp"

namespace qhl {

SlopeFit loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw Error(ErrorCode::InvalidArgument, "slope fit needs two or more matching points");
  double mx = 0.0, my = 0.0;
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(x[i] > 0.0) || !(std::abs(y[i]) > 0.0) || !std::isfinite(y[i]))
      throw Error(ErrorCode::InvalidArgument, fmt::format("log-log fit at x = {}, y = {}", x[i], y[i]));
    lx[i] = std::log(x[i]);
    ly[i] = std::log(std::abs(y[i]));
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0.0)) throw Error(ErrorCode::InvalidArgument, "slope fit needs distinct x");
  SlopeFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (n > 2) {
    double sse = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = ly[i] - f.intercept - f.slope * lx[i];
      sse += r * r;
    }
    f.stderr_slope = std::sqrt(sse / static_cast<double>(n - 2) / sxx);
  }
  return f;
}

double ExpansionFit::evaluate(double k) const {
  const auto [lo, hi] = std::minmax_element(kgrid.begin(), kgrid.end());
  if (k < *lo || k > *hi)
    throw Error(ErrorCode::InvalidArgument, fmt::format("k = {} lies outside the fitted range [{}, {}]", k, *lo, *hi));
  double s = 0.0;
  for (int j = 0; j < terms; ++j) s += coefficients[j] * std::pow(k, leading_power - j);
  return s;
}

ExpansionFit fit_expansion(const std::vector<double>& kgrid, const std::vector<double>& values, double leading_power,
                           int terms) {
  if (terms < 1) throw Error(ErrorCode::InvalidArgument, "at least one term");
  if (values.size() != kgrid.size()) throw Error(ErrorCode::InvalidArgument, "k-grid and values differ in length");
  const std::set<double> distinct(kgrid.begin(), kgrid.end());
  const std::size_t need = std::max<std::size_t>(4, static_cast<std::size_t>(terms) + 2);
  if (distinct.size() < need)
    throw Error(ErrorCode::InvalidArgument, fmt::format("{} distinct k given, {} needed", distinct.size(), need));

  const int n = static_cast<int>(kgrid.size()), m = terms + 1;
  Eigen::MatrixXd X(n, m);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < m; ++j) X(i, j) = std::pow(kgrid[i], leading_power - j);
    y[i] = values[i];
  }
  const Eigen::VectorXd scale = X.colwise().norm().cwiseInverse();
  const Eigen::MatrixXd Xs = X * scale.asDiagonal();
  const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(Xs).singularValues();
  ExpansionFit f;
  f.condition = sv[0] / sv[sv.size() - 1];
  if (!(f.condition <= 1e10))
    throw Error(ErrorCode::IllConditionedFit, fmt::format("design condition number {:.3e}", f.condition));
  const Eigen::VectorXd c = scale.asDiagonal() * Xs.colPivHouseholderQr().solve(y);

  f.kgrid = kgrid;
  f.values = values;
  f.leading_power = leading_power;
  f.terms = terms;
  f.coefficients = c.head(terms);
  f.next_coefficient = c[terms];
  f.misfit = (X * c - y).cwiseAbs().maxCoeff();
  f.residuals.resize(n);
  bool all_nonzero = true;
  for (int i = 0; i < n; ++i) {
    f.residuals[i] = y[i] - X.row(i).head(terms).dot(f.coefficients);
    all_nonzero = all_nonzero && f.residuals[i] != 0.0;
  }
  if (all_nonzero) f.residual_slope = loglog_slope(kgrid, f.residuals);
  return f;
}

}  // namespace qhl

// Least-squares fits of large-k expansions and log-log rate estimates.
#pragma once

#include <vector>

#include <Eigen/Dense>

namespace qhl {

struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;  // zero for two points
};

/// OLS of log|y| against log x. Throws InvalidArgument on fewer than two
/// points or a zero y.
SlopeFit loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// y_k ~ sum_{j < terms} c_j k^{p - j}.
///
/// The least-squares system carries one extra power, k^{p - terms}, so the
/// reported coefficients are not biased by the first neglected term; its
/// estimate is kept in next_coefficient. The residual is
/// y_k - sum_{j < terms} c_j k^{p - j}, whose log-log slope estimates the
/// order of the remainder.
struct ExpansionFit {
  std::vector<double> kgrid;
  std::vector<double> values;
  double leading_power = 0.0;
  int terms = 0;
  Eigen::VectorXd coefficients;
  double next_coefficient = 0.0;
  std::vector<double> residuals;
  /// Largest least-squares misfit of the terms + 1 model.
  double misfit = 0.0;
  /// Of the column-scaled design matrix.
  double condition = 0.0;
  SlopeFit residual_slope;

  /// Truncated expansion at k. Throws InvalidArgument outside the k-grid.
  double evaluate(double k) const;
};

/// Needs at least max(4, terms + 2) distinct k. Throws InvalidArgument, or
/// IllConditionedFit when the design condition number exceeds 1e10.
ExpansionFit fit_expansion(const std::vector<double>& kgrid, const std::vector<double>& values, double leading_power,
                           int terms);

}  // namespace qhl

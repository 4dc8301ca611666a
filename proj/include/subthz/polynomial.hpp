// SPDX-License-Identifier: Apache-2.0
//
// Monomial polynomials: Horner evaluation and (weighted) least-squares fits.

#ifndef SUBTHZ_POLYNOMIAL_HPP
#define SUBTHZ_POLYNOMIAL_HPP

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "subthz/errors.hpp"

namespace subthz {

/// Evaluates sum_k c[k] x^k, c[0] being the constant term.
inline double horner(std::span<const double> coeffs, double x) {
  double acc = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * x + coeffs[k];
  return acc;
}

struct PolyFit {
  std::vector<double> coeffs;  // ascending powers
  double rms_residual = 0.0;   // weighted RMS when weights are supplied
};

/// Least-squares fit of an order-`order` monomial polynomial.
///
/// Solves min sum_i w_i (y_i - p(x_i))^2 with a column-pivoted Householder QR
/// on the column-equilibrated Vandermonde matrix; normal equations are never
/// formed. The abscissae are used as given (no centering), so the returned
/// coefficients are directly comparable to tabulated monomial models.
/// Throws NumericalError when the design matrix is numerically rank deficient
/// (e.g. fewer distinct abscissae than coefficients).
inline PolyFit fit_least_squares(std::span<const double> x, std::span<const double> y, int order,
                                 std::span<const double> weights = {}) {
  if (order < 0) throw ConfigError("polynomial order must be >= 0");
  if (x.size() != y.size()) throw DataError("abscissa/ordinate length mismatch");
  if (!weights.empty() && weights.size() != x.size())
    throw DataError("weight vector length mismatch");
  const auto n = static_cast<Eigen::Index>(x.size());
  const Eigen::Index m = order + 1;
  if (n < m)
    throw NumericalError("need more than " + std::to_string(order) +
                         " points for an order-" + std::to_string(order) + " fit");

  Eigen::MatrixXd v(n, m);
  Eigen::VectorXd rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sw = weights.empty() ? 1.0 : std::sqrt(weights[static_cast<std::size_t>(i)]);
    double pk = sw;
    for (Eigen::Index k = 0; k < m; ++k) {
      v(i, k) = pk;
      pk *= x[static_cast<std::size_t>(i)];
    }
    rhs(i) = sw * y[static_cast<std::size_t>(i)];
  }
  Eigen::VectorXd col_scale = v.colwise().norm().transpose();
  for (Eigen::Index k = 0; k < m; ++k) {
    if (col_scale(k) == 0.0 || !std::isfinite(col_scale(k)))
      throw NumericalError("degenerate Vandermonde column " + std::to_string(k));
    v.col(k) /= col_scale(k);
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(v);
  if (qr.rank() < m)
    throw NumericalError("rank-deficient least-squares system (rank " + std::to_string(qr.rank()) +
                         " < " + std::to_string(m) + "); reduce the order or check for duplicate abscissae");
  Eigen::VectorXd sol = qr.solve(rhs);
  Eigen::VectorXd resid = rhs - v * sol;

  PolyFit out;
  out.coeffs.resize(static_cast<std::size_t>(m));
  for (Eigen::Index k = 0; k < m; ++k) out.coeffs[static_cast<std::size_t>(k)] = sol(k) / col_scale(k);
  double wsum = 0.0;
  if (weights.empty()) {
    wsum = static_cast<double>(n);
  } else {
    for (double w : weights) wsum += w;
  }
  out.rms_residual = std::sqrt(resid.squaredNorm() / wsum);
  return out;
}

}  // namespace subthz

#endif  // SUBTHZ_POLYNOMIAL_HPP

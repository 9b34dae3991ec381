#pragma once

#include <string>
#include <vector>

#include "pcares/matrix.hpp"

namespace pcares {

/// Design matrix with per-column labels.
struct DesignMatrix {
  Matrix values;                     ///< n x p
  std::vector<std::string> columns;  ///< one label per column, "(intercept)" for the constant
  bool intercept = false;

  Eigen::Index n() const { return values.rows(); }
  Eigen::Index p() const { return values.cols(); }

  /// Unlabelled design; columns are named x1..xp.
  static DesignMatrix from_matrix(Matrix values, bool intercept = false);
};

/// Everything downstream stages need from an OLS fit.
struct FitResult {
  Vector beta_hat;
  Vector fitted;
  Vector resid;
  Vector leverage;   ///< h_i, diagonal of the hat matrix
  double sigma2_hat = 0.0;
  Eigen::Index n = 0;
  Eigen::Index p = 0;
  Matrix basis;      ///< n x p orthonormal basis of col(X); H = basis basis^T

  Eigen::Index residual_df() const { return n - p; }
};

/// Ordinary least squares. Throws TooFewRows if n <= p and RankDeficient
/// when X is not of full column rank.
FitResult fit_ols(const DesignMatrix& x, const Vector& y);

/// Leverages h_i = x_i^T (X^T X)^{-1} x_i, from the row norms of the
/// orthonormal factor.
Vector hat_diagonals(const DesignMatrix& x);

}  // namespace pcares

#pragma once

#include <Eigen/Dense>

namespace pcares {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Thin orthogonal factorization A = Q R of a full-column-rank matrix.
struct OrthogonalFactor {
  Matrix q;  ///< n x p, orthonormal columns spanning col(A)
  Matrix r;  ///< p x p, upper triangular
};

/// Householder QR with a rank check on the diagonal of R.
///
/// Throws RankDeficient when some |R_jj| < n * eps * max_j ||A_j||, and
/// TooFewRows when A has fewer rows than columns.
OrthogonalFactor orthogonal_factor(const Matrix& a);

/// Minimizer of ||A x - b||_2 via the orthogonal factorization.
Vector least_squares(const Matrix& a, const Vector& b);

/// Symmetric eigendecomposition S = Q diag(values) Q^T.
///
/// Output is canonical: eigenvalues descend; every group of numerically equal
/// eigenvalues (|l_i - l_j| <= 1e-9 (1 + |l_1|)) gets a basis that depends only
/// on the eigenspace, built by pivoted Gram-Schmidt on the columns of its
/// projector; each eigenvector has its largest-magnitude entry positive (ties
/// go to the lowest index); vectors inside a group are in descending
/// lexicographic order.
struct SymEigen {
  Matrix vectors;  ///< eigenvectors as columns
  Vector values;   ///< non-increasing
};

SymEigen sym_eigen(const Matrix& s);

/// Relative tolerance used to group numerically equal eigenvalues.
inline constexpr double kEigenGroupTol = 1e-9;

/// True when every entry is finite.
bool all_finite(const Matrix& m);

double max_abs(const Matrix& m);

}  // namespace pcares

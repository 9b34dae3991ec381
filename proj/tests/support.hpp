#pragma once

// Test-only oracles. These deliberately avoid the library's own kernels.

#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace testing_support {

using Eigen::MatrixXd;
using Eigen::VectorXd;

inline MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = nd(gen);
  return m;
}

inline VectorXd random_vector(Eigen::Index n, std::uint64_t seed) {
  return random_matrix(n, 1, seed).col(0);
}

// Design with a leading column of ones.
inline MatrixXd random_design(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  MatrixXd x = random_matrix(n, p, seed);
  x.col(0).setOnes();
  return x;
}

inline MatrixXd normal_equations_inverse(const MatrixXd& x) {
  return (x.transpose() * x).inverse();
}

inline VectorXd normal_equations_solve(const MatrixXd& x, const VectorXd& y) {
  return normal_equations_inverse(x) * x.transpose() * y;
}

inline MatrixXd dense_hat(const MatrixXd& x) {
  return x * normal_equations_inverse(x) * x.transpose();
}

inline MatrixXd dense_sandwich(const MatrixXd& x, const VectorXd& omega) {
  const MatrixXd inv = normal_equations_inverse(x);
  return inv * x.transpose() * omega.asDiagonal() * x * inv;
}

inline double max_abs(const MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

}  // namespace testing_support

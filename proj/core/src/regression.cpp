#include "pcares/regression.hpp"

#include <cmath>
#include <string>

#include "pcares/error.hpp"

namespace pcares {

DesignMatrix DesignMatrix::from_matrix(Matrix values, bool intercept) {
  DesignMatrix d;
  d.intercept = intercept;
  for (Eigen::Index j = 0; j < values.cols(); ++j) {
    d.columns.push_back(intercept && j == 0 ? "(intercept)" : "x" + std::to_string(j + 1));
  }
  d.values = std::move(values);
  return d;
}

namespace {

constexpr double kLeverageClamp = 1e-12;

Vector leverages_from_basis(const Matrix& basis) {
  Vector h = basis.rowwise().squaredNorm();
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    if (h(i) < 0.0) {
      if (h(i) < -kLeverageClamp) fail(ErrorCode::InternalConsistency, "negative leverage");
      h(i) = 0.0;
    } else if (h(i) > 1.0) {
      if (h(i) > 1.0 + kLeverageClamp) {
        fail(ErrorCode::InternalConsistency, "leverage above one at row " + std::to_string(i));
      }
      h(i) = 1.0;
    }
  }
  return h;
}

}  // namespace

FitResult fit_ols(const DesignMatrix& x, const Vector& y) {
  const Eigen::Index n = x.n();
  const Eigen::Index p = x.p();
  if (y.size() != n) {
    fail(ErrorCode::InvalidArgument, "response has " + std::to_string(y.size()) +
                                         " entries, design has " + std::to_string(n) + " rows");
  }
  if (n <= p) {
    fail(ErrorCode::TooFewRows,
         "need n > p, got n = " + std::to_string(n) + ", p = " + std::to_string(p));
  }
  if (!y.allFinite()) fail(ErrorCode::InvalidArgument, "response has non-finite entries");

  OrthogonalFactor f = orthogonal_factor(x.values);

  FitResult fit;
  fit.n = n;
  fit.p = p;
  const Vector qty = f.q.transpose() * y;
  fit.beta_hat = f.r.triangularView<Eigen::Upper>().solve(qty);
  fit.fitted = f.q * qty;
  fit.resid = y - fit.fitted;
  fit.leverage = leverages_from_basis(f.q);
  fit.sigma2_hat = fit.resid.squaredNorm() / static_cast<double>(n - p);
  fit.basis = std::move(f.q);
  return fit;
}

Vector hat_diagonals(const DesignMatrix& x) {
  return leverages_from_basis(orthogonal_factor(x.values).q);
}

}  // namespace pcares

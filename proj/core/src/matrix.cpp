#include "pcares/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include "pcares/error.hpp"

namespace pcares {

bool all_finite(const Matrix& m) { return m.allFinite(); }

double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

OrthogonalFactor orthogonal_factor(const Matrix& a) {
  const Eigen::Index n = a.rows();
  const Eigen::Index p = a.cols();
  if (n < 1 || p < 1) fail(ErrorCode::Empty, "matrix has no rows or columns");
  if (n < p) {
    fail(ErrorCode::TooFewRows, "need at least as many rows as columns, got " + std::to_string(n) +
                                    "x" + std::to_string(p));
  }
  if (!a.allFinite()) fail(ErrorCode::InvalidArgument, "matrix has non-finite entries");

  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix r = qr.matrixQR().topRows(p).triangularView<Eigen::Upper>();

  const double scale = a.colwise().norm().maxCoeff();
  const double tol = static_cast<double>(n) * std::numeric_limits<double>::epsilon() * scale;
  for (Eigen::Index j = 0; j < p; ++j) {
    if (!(std::abs(r(j, j)) >= tol) || scale == 0.0) {
      fail(ErrorCode::RankDeficient, "column " + std::to_string(j) +
                                         " is linearly dependent on the preceding columns");
    }
  }
  Matrix q = qr.householderQ() * Matrix::Identity(n, p);
  return {std::move(q), std::move(r)};
}

Vector least_squares(const Matrix& a, const Vector& b) {
  if (b.size() != a.rows()) fail(ErrorCode::InvalidArgument, "rhs length does not match rows");
  const OrthogonalFactor f = orthogonal_factor(a);
  Vector qtb = f.q.transpose() * b;
  return f.r.triangularView<Eigen::Upper>().solve(qtb);
}

namespace {

// Sign rule: largest-magnitude entry positive; near-ties resolved by the
// lowest index.
void normalize_sign(Eigen::Ref<Vector> v) {
  const double peak = v.cwiseAbs().maxCoeff();
  if (peak == 0.0) return;
  const double cut = peak * (1.0 - 1e-12);
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) >= cut) {
      if (v(i) < 0.0) v = -v;
      return;
    }
  }
}

bool lex_greater(const Vector& a, const Vector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i) != b(i)) return a(i) > b(i);
  }
  return false;
}

// Orthonormal basis of span(v) that depends only on the subspace: greedy
// pivoted Gram-Schmidt over the columns of the projector V V^T.
Matrix canonical_basis(const Matrix& v) {
  const Eigen::Index n = v.rows();
  const Eigen::Index k = v.cols();
  Matrix basis(n, k);
  // residual[j] = || (P - B B^T) e_j ||^2 = P_jj - sum_b b_j^2
  Vector residual = v.rowwise().squaredNorm();
  for (Eigen::Index step = 0; step < k; ++step) {
    const double best = residual.maxCoeff();
    const double cut = best * (1.0 - 1e-9);
    Eigen::Index pivot = 0;
    while (residual(pivot) < cut) ++pivot;

    Vector col = v * v.row(pivot).transpose();
    auto done = basis.leftCols(step);
    for (int pass = 0; pass < 2; ++pass) {
      col -= done * (done.transpose() * col);
    }
    col /= col.norm();
    basis.col(step) = col;
    residual -= col.cwiseAbs2();
    residual(pivot) = -std::numeric_limits<double>::infinity();
  }
  return basis;
}

}  // namespace

SymEigen sym_eigen(const Matrix& s) {
  if (s.rows() != s.cols()) fail(ErrorCode::NotSymmetric, "matrix is not square");
  if (s.rows() < 1) fail(ErrorCode::Empty, "empty matrix");
  if (!s.allFinite()) fail(ErrorCode::InvalidArgument, "matrix has non-finite entries");
  const double scale = max_abs(s);
  const double asym = max_abs(s - s.transpose());
  if (asym > 1e-9 * (1.0 + scale)) {
    fail(ErrorCode::NotSymmetric, "max |S - S^T| = " + std::to_string(asym));
  }

  const Eigen::Index n = s.rows();
  Matrix sym = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> solver(sym, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success) {
    fail(ErrorCode::NoConvergence, "symmetric eigensolver did not converge");
  }

  // Solver returns ascending order.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  const Vector& raw_values = solver.eigenvalues();
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return raw_values(a) > raw_values(b); });

  SymEigen out{Matrix(n, n), Vector(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = raw_values(order[static_cast<std::size_t>(i)]);
    out.vectors.col(i) = solver.eigenvectors().col(order[static_cast<std::size_t>(i)]);
  }

  const double group_tol = kEigenGroupTol * (1.0 + std::abs(out.values(0)));
  Eigen::Index begin = 0;
  while (begin < n) {
    Eigen::Index end = begin + 1;
    while (end < n && out.values(end - 1) - out.values(end) <= group_tol) ++end;
    const Eigen::Index size = end - begin;
    if (size > 1) {
      out.vectors.middleCols(begin, size) = canonical_basis(out.vectors.middleCols(begin, size));
    }
    for (Eigen::Index j = begin; j < end; ++j) normalize_sign(out.vectors.col(j));
    if (size > 1) {
      std::vector<Vector> cols;
      cols.reserve(static_cast<std::size_t>(size));
      for (Eigen::Index j = begin; j < end; ++j) cols.emplace_back(out.vectors.col(j));
      std::stable_sort(cols.begin(), cols.end(), lex_greater);
      for (Eigen::Index j = begin; j < end; ++j) {
        out.vectors.col(j) = cols[static_cast<std::size_t>(j - begin)];
      }
    }
    begin = end;
  }
  return out;
}

}  // namespace pcares

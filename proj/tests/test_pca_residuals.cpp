#include <doctest.h>

#include <cmath>

#include "pcares/error.hpp"
#include "pcares/pca_residuals.hpp"
#include "pcares/regression.hpp"
#include "pcares/rng.hpp"
#include "pcares/simulation.hpp"
#include "support.hpp"

using namespace pcares;
namespace ts = testing_support;

namespace {

FitResult seeded_fit(Eigen::Index n, Eigen::Index p, std::uint64_t seed) {
  return fit_ols(DesignMatrix::from_matrix(ts::random_design(n, p, seed), true),
                 ts::random_vector(n, seed + 99));
}

PcaResiduals homo_residuals(std::initializer_list<double> values, Eigen::Index p) {
  PcaResiduals r;
  r.kind = CovKind::Homo;
  r.raw = Vector(static_cast<Eigen::Index>(values.size()) + p);
  r.raw.setZero();
  Eigen::Index i = 0;
  for (double v : values) r.raw(i++) = v;
  r.n = r.raw.size();
  r.p = p;
  return r;
}

Matrix dense_residual_cov(const Matrix& x, const Vector& omega) {
  const Eigen::Index n = x.rows();
  const Matrix m = Matrix::Identity(n, n) - ts::dense_hat(x);
  return m * omega.asDiagonal() * m;
}

}  // namespace

TEST_CASE("residual_cov: homoskedastic collapse") {
  const Matrix x = ts::random_design(7, 2, 3);
  const Matrix s = residual_cov(DesignMatrix::from_matrix(x, true),
                                OmegaEstimate::from_variances(Vector::Constant(7, 1.7), CovKind::Homo));
  const Matrix expected = 1.7 * (Matrix::Identity(7, 7) - ts::dense_hat(x));
  CHECK(ts::max_abs(s - expected) <= 1e-12);
}

TEST_CASE("residual_cov: mean model n = 2") {
  const Matrix s = residual_cov(DesignMatrix::from_matrix(Matrix::Ones(2, 1), true),
                                OmegaEstimate::from_variances(Vector::Ones(2)));
  CHECK(s(0, 0) == doctest::Approx(0.5));
  CHECK(s(1, 1) == doctest::Approx(0.5));
  CHECK(s(0, 1) == doctest::Approx(-0.5));
  CHECK(s(1, 0) == doctest::Approx(-0.5));
}

TEST_CASE("residual_cov: dense oracle, symmetric PSD of rank n - p") {
  const Matrix x = ts::random_design(6, 2, 6);
  const DesignMatrix d = DesignMatrix::from_matrix(x, true);
  const FitResult f = fit_ols(d, ts::random_vector(6, 60));
  const OmegaEstimate o = omega_hat(f, CovKind::HC0);
  const Matrix s = residual_cov(d, o);
  CHECK(ts::max_abs(s - dense_residual_cov(x, o.diag)) <= 1e-12);
  CHECK(ts::max_abs(residual_cov(f, o) - s) <= 1e-12);
  CHECK((s - s.transpose()).cwiseAbs().maxCoeff() == 0.0);

  const Vector w = Vector::LinSpaced(6, 1.0, 3.0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(residual_cov(d, OmegaEstimate::from_variances(w)));
  CHECK(es.eigenvalues().minCoeff() >= -1e-12);
  CHECK((es.eigenvalues().array() > 1e-8).count() == 4);
}

TEST_CASE("pca_transform: Loynes mean-only model") {
  for (Eigen::Index n : {2, 5, 50}) {
    CAPTURE(n);
    const Vector y = ts::random_vector(n, static_cast<std::uint64_t>(n));
    const FitResult f = fit_ols(DesignMatrix::from_matrix(Matrix::Ones(n, 1), true), y);
    const PcaTransform t = pca_transform(f, omega_hat(f, CovKind::Homo));
    const Vector zero_vec = t.model.q.col(n - 1);
    const Vector expected = Vector::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
    CHECK(ts::max_abs(zero_vec - expected) <= 1e-10);
    CHECK(t.model.lambda(n - 1) == 0.0);
    // The zero residual is (1/sqrt n) sum e_i, which vanishes.
    CHECK(std::abs(t.residuals.raw(n - 1)) <= 1e-12);
    CHECK(std::abs(zero_vec.dot(f.resid)) <= 1e-12);
  }
}

TEST_CASE("pca_transform: noiseless response gives zero residuals") {
  const Matrix x = ts::random_design(9, 3, 5);
  const FitResult f = fit_ols(DesignMatrix::from_matrix(x, true), x * Vector::Ones(3));
  const PcaTransform t = pca_transform(f, omega_hat(f, CovKind::Homo));
  CHECK(t.residuals.raw.cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("pca_transform: norm preservation and structural zeros") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const Eigen::Index n = 4 + static_cast<Eigen::Index>(seed * 2);
    const Eigen::Index p = 1 + static_cast<Eigen::Index>(seed % 3);
    const FitResult f = seeded_fit(n, p, seed);
    for (CovKind kind : kAllKinds) {
      CAPTURE(seed);
      CAPTURE(to_string(kind));
      const PcaTransform t = pca_transform(f, omega_hat(f, kind));
      const double e = f.resid.norm();
      CHECK(std::abs(t.residuals.raw.norm() - e) <= 1e-10 * e);
      CHECK(t.residuals.raw.tail(p).cwiseAbs().maxCoeff() <= 1e-8 * (1.0 + e));
      CHECK(ts::max_abs(t.model.q.transpose() * t.model.q - Matrix::Identity(n, n)) <= 1e-10);
      CHECK((t.model.lambda.tail(p).array() == 0.0).all());
      CHECK(t.model.lambda.minCoeff() >= 0.0);
      for (Eigen::Index i = 1; i < n; ++i) CHECK(t.model.lambda(i - 1) >= t.model.lambda(i));
      CHECK(t.model.rank == n - p);
    }
  }
}

TEST_CASE("pca_transform: homoskedastic sum of squares identity") {
  const Matrix x = ts::random_design(8, 2, 8);
  const Vector y = ts::random_vector(8, 107);
  const FitResult f = fit_ols(DesignMatrix::from_matrix(x, true), y);
  const PcaTransform t = pca_transform(f, omega_hat(f, CovKind::Homo));
  const double lhs = t.residuals.nonzero().squaredNorm();
  CHECK(std::abs(lhs - f.resid.squaredNorm()) <= 1e-10 * f.resid.squaredNorm());
  const double pearson = (y - x * ts::normal_equations_solve(x, y)).squaredNorm() / 6.0;
  CHECK(std::abs(sigma2_from_pca(t.residuals, 8, 2) - pearson) <= 1e-12 * pearson);
  CHECK(std::abs(sigma2_from_pca(t.residuals, 8, 2) - f.sigma2_hat) <= 1e-12 * f.sigma2_hat);
}

TEST_CASE("pca_transform: homo basis does not depend on the scale of I - H") {
  const FitResult f = seeded_fit(12, 3, 12);
  const Matrix ih = Matrix::Identity(12, 12) - f.basis * f.basis.transpose();
  const SpectralModel scaled = spectral_model(f.sigma2_hat * ih, 3, CovKind::Homo);
  const SpectralModel unit = spectral_model(ih, 3, CovKind::Homo);
  const PcaResiduals a = project_residuals(scaled, f.resid, 3);
  const PcaResiduals b = project_residuals(unit, f.resid, 3);
  const PcaResiduals c = pca_transform(f, omega_hat(f, CovKind::Homo)).residuals;
  CHECK(ts::max_abs(a.raw.cwiseAbs() - b.raw.cwiseAbs()) <= 1e-10);
  CHECK(ts::max_abs(c.raw.cwiseAbs() - b.raw.cwiseAbs()) <= 1e-10);
}

TEST_CASE("sigma2_from_pca") {
  CHECK(sigma2_from_pca(homo_residuals({0.0, 0.0, 0.0}, 1), 4, 1) == 0.0);
  CHECK(sigma2_from_pca(homo_residuals({3.0, 4.0}, 1), 3, 1) == 12.5);
  PcaResiduals hc = homo_residuals({1.0, 2.0}, 1);
  hc.kind = CovKind::HC0;
  try {
    sigma2_from_pca(hc, 3, 1);
    FAIL("expected WrongKind");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::WrongKind);
  }
}

TEST_CASE("standardize_homo: closed forms") {
  const PcaResiduals a = standardize_homo(homo_residuals({2.5, 2.5}, 1), 3, 1);
  CHECK(*a.standardized[0] == 1.0);
  CHECK(*a.standardized[1] == 1.0);
  const PcaResiduals b = standardize_homo(homo_residuals({-1.5, -1.5}, 1), 3, 1);
  CHECK(*b.standardized[0] == -1.0);

  const PcaResiduals c = standardize_homo(homo_residuals({0.0, 1.0, 2.0}, 1), 4, 1);
  CHECK(*c.standardized[0] == 0.0);
  // sigma_2^2 = (0 + 4) / 2
  CHECK(*c.standardized[1] == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(*c.standardized[2] == doctest::Approx(2.0 / std::sqrt(0.5)));
}

TEST_CASE("standardize_homo: errors") {
  try {
    standardize_homo(homo_residuals({0.0, 3.0}, 1), 3, 1);
    FAIL("expected DegenerateVariance");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateVariance);
  }
  try {
    standardize_homo(homo_residuals({1.0}, 1), 2, 1);
    FAIL("expected TooSmall");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooSmall);
  }
}

TEST_CASE("standardize_hetero: closed forms and instability") {
  SpectralModel model;
  model.lambda = (Vector(4) << 4.0, 1.0, 1e-12, 0.0).finished();
  model.source_kind = CovKind::HC2;
  PcaResiduals r;
  r.kind = CovKind::HC2;
  r.raw = (Vector(4) << 2.0, -3.0, 5.0, 0.0).finished();
  r.n = 4;
  r.p = 1;
  const PcaResiduals s = standardize_hetero(r, model);
  CHECK(*s.standardized[0] == 1.0);
  CHECK(*s.standardized[1] == -3.0);
  CHECK_FALSE(s.standardized[2].has_value());
  CHECK(s.unstable[2]);
  CHECK_FALSE(s.unstable[0]);
  CHECK(s.present_standardized().size() == 2);

  r.kind = CovKind::Homo;
  CHECK_THROWS_AS(standardize_hetero(r, model), Error);
}

TEST_CASE("standardize_hetero: HC3 standardized variance is near one (Monte Carlo)") {
  SimScenario s;
  s.n = 100;
  s.p = 2;
  s.seed = 31;
  s.variance = VariancePattern::exp_linear({1.0});
  const std::size_t reps = 1000;
  const Matrix r = mc_pca_residuals(s, reps, CovKind::HC3, true);
  double mean_variance = 0.0;
  for (Eigen::Index k = 0; k < r.rows(); ++k) {
    double sum = 0.0;
    double sq = 0.0;
    double count = 0.0;
    for (Eigen::Index j = 0; j < r.cols(); ++j) {
      if (!std::isfinite(r(k, j))) continue;
      sum += r(k, j);
      sq += r(k, j) * r(k, j);
      count += 1.0;
    }
    mean_variance += (sq - sum * sum / count) / (count - 1.0);
  }
  mean_variance /= static_cast<double>(reps);
  MESSAGE("mean per-replication variance of HC3 R*: " << mean_variance);
  CHECK(std::abs(mean_variance - 1.0) <= 3.0 / std::sqrt(static_cast<double>(reps)));
}

TEST_CASE("Monte Carlo: pairwise correlations of homo PCA residuals within 3/sqrt(M)") {
  SimScenario s;
  s.n = 8;
  s.p = 2;
  s.seed = 8;
  const std::size_t reps = 5000;
  const Matrix r = mc_pca_residuals(s, reps, CovKind::Homo, false);
  const Matrix centered = r.rowwise() - r.colwise().mean();
  const Matrix cov = centered.transpose() * centered;
  const double bound = 3.0 / std::sqrt(static_cast<double>(reps));
  for (Eigen::Index i = 0; i < cov.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < cov.cols(); ++j) {
      const double corr = cov(i, j) / std::sqrt(cov(i, i) * cov(j, j));
      CAPTURE(i);
      CAPTURE(j);
      CHECK(std::abs(corr) <= bound);
    }
  }
}

TEST_CASE("Monte Carlo: sample variance of R_i tracks lambda_i from the true Omega") {
  SimScenario s;
  s.n = 20;
  s.p = 2;
  s.seed = 20;
  s.variance = VariancePattern::step(1.0, 4.0, 0.5);
  const DesignMatrix x = gen_design(s);
  const Vector omega = true_variances(s, x);
  const SpectralModel truth = spectral_model(residual_cov(x, OmegaEstimate::from_variances(omega)), 2, CovKind::HC0);
  const std::size_t reps = 4000;
  Vector sum_sq = Vector::Zero(18);
  for (std::size_t k = 0; k < reps; ++k) {
    const FitResult f = fit_ols(x, gen_response(s, x, omega, k));
    sum_sq += (truth.q.transpose() * f.resid).head(18).cwiseAbs2();
  }
  for (Eigen::Index i = 0; i < 18; ++i) {
    const double variance = sum_sq(i) / static_cast<double>(reps);  // mean is known to be zero
    const double se = truth.lambda(i) * std::sqrt(2.0 / static_cast<double>(reps));
    CAPTURE(i);
    CHECK(std::abs(variance - truth.lambda(i)) <= 5.0 * se);
  }
}

#include "pcares/pca_residuals.hpp"

#include <cmath>
#include <string>

#include "pcares/error.hpp"

namespace pcares {

std::vector<double> PcaResiduals::present_standardized() const {
  std::vector<double> out;
  out.reserve(standardized.size());
  for (const auto& v : standardized) {
    if (v) out.push_back(*v);
  }
  return out;
}

namespace {

Matrix annihilator(const Matrix& basis) {
  Matrix m = -basis * basis.transpose();
  m.diagonal().array() += 1.0;
  return m;
}

Matrix sandwich(const Matrix& a, const Vector& omega) {
  Matrix s = a * omega.asDiagonal() * a;
  return 0.5 * (s + s.transpose());
}

void check_omega(const OmegaEstimate& omega, Eigen::Index n) {
  if (omega.diag.size() != n) {
    fail(ErrorCode::InvalidArgument, "omega has " + std::to_string(omega.diag.size()) +
                                         " entries, expected " + std::to_string(n));
  }
  if (!omega.diag.allFinite() || (omega.diag.array() < 0.0).any()) {
    fail(ErrorCode::InvalidArgument, "omega entries must be finite and non-negative");
  }
}

}  // namespace

Matrix residual_cov(const DesignMatrix& x, const OmegaEstimate& omega) {
  check_omega(omega, x.n());
  return sandwich(annihilator(orthogonal_factor(x.values).q), omega.diag);
}

Matrix residual_cov(const FitResult& fit, const OmegaEstimate& omega) {
  check_omega(omega, fit.n);
  return sandwich(annihilator(fit.basis), omega.diag);
}

SpectralModel spectral_model(const Matrix& s, Eigen::Index p, CovKind kind) {
  const Eigen::Index n = s.rows();
  if (p < 0 || p >= n) fail(ErrorCode::InvalidArgument, "rank deficit p must satisfy 0 <= p < n");
  SymEigen e = sym_eigen(s);
  SpectralModel m;
  m.q = std::move(e.vectors);
  m.lambda = std::move(e.values);
  m.rank = n - p;
  m.source_kind = kind;
  m.lambda.tail(p).setZero();
  m.lambda = m.lambda.cwiseMax(0.0);
  return m;
}

SpectralModel spectral_model(const FitResult& fit, const OmegaEstimate& omega) {
  if (omega.kind == CovKind::Homo) {
    // Omega = sigma^2 I leaves the eigenvectors of I - H unchanged.
    SpectralModel m = spectral_model(annihilator(fit.basis), fit.p, CovKind::Homo);
    m.lambda *= fit.sigma2_hat;
    return m;
  }
  return spectral_model(residual_cov(fit, omega), fit.p, omega.kind);
}

PcaResiduals project_residuals(const SpectralModel& model, const Vector& resid, Eigen::Index p) {
  if (resid.size() != model.q.rows()) {
    fail(ErrorCode::InvalidArgument, "residual length does not match the spectral model");
  }
  PcaResiduals r;
  r.n = resid.size();
  r.p = p;
  r.kind = model.source_kind;
  r.raw = model.q.transpose() * resid;
  r.lambda = model.lambda.head(r.n - p);
  return r;
}

PcaTransform pca_transform(const FitResult& fit, const OmegaEstimate& omega) {
  SpectralModel model = spectral_model(fit, omega);
  PcaResiduals r = project_residuals(model, fit.resid, fit.p);
  return {std::move(model), std::move(r)};
}

double sigma2_from_pca(const PcaResiduals& r, Eigen::Index n, Eigen::Index p) {
  if (r.kind != CovKind::Homo) {
    fail(ErrorCode::WrongKind, "sigma^2 from PCA residuals needs the homo kind");
  }
  if (n <= p || r.raw.size() < n - p) fail(ErrorCode::InvalidArgument, "need n > p residuals");
  return r.raw.head(n - p).squaredNorm() / static_cast<double>(n - p);
}

PcaResiduals standardize_homo(const PcaResiduals& r, Eigen::Index n, Eigen::Index p) {
  if (r.kind != CovKind::Homo) fail(ErrorCode::WrongKind, "homoskedastic standardization needs the homo kind");
  const Eigen::Index m = n - p;
  if (m < 2) fail(ErrorCode::TooSmall, "need n - p >= 2 for leave-one-out scales");
  if (r.raw.size() < m) fail(ErrorCode::InvalidArgument, "too few residuals");

  // Leave-one-out sums from prefix and suffix sums (no cancellation).
  std::vector<double> suffix(static_cast<std::size_t>(m) + 1, 0.0);
  for (Eigen::Index i = m - 1; i >= 0; --i) {
    suffix[static_cast<std::size_t>(i)] = suffix[static_cast<std::size_t>(i) + 1] + r.raw(i) * r.raw(i);
  }
  PcaResiduals out = r;
  out.standardized.assign(static_cast<std::size_t>(m), std::nullopt);
  out.unstable.assign(static_cast<std::size_t>(m), false);
  double prefix = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double loo = (prefix + suffix[static_cast<std::size_t>(i) + 1]) / static_cast<double>(m - 1);
    if (loo <= kDegenerateVariance) {
      fail(ErrorCode::DegenerateVariance,
           "leave-one-out variance for residual " + std::to_string(i + 1) + " is zero");
    }
    out.standardized[static_cast<std::size_t>(i)] = r.raw(i) / std::sqrt(loo);
    prefix += r.raw(i) * r.raw(i);
  }
  return out;
}

PcaResiduals standardize_hetero(const PcaResiduals& r, const SpectralModel& model) {
  if (r.kind == CovKind::Homo) {
    fail(ErrorCode::WrongKind, "heteroskedastic standardization needs an HC kind");
  }
  const Eigen::Index m = r.n - r.p;
  PcaResiduals out = r;
  out.standardized.assign(static_cast<std::size_t>(m), std::nullopt);
  out.unstable.assign(static_cast<std::size_t>(m), true);
  const double threshold = kHeteroStabilityTol * model.lambda(0);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double lambda = model.lambda(i);
    if (lambda > threshold && lambda > 0.0) {
      out.standardized[static_cast<std::size_t>(i)] = r.raw(i) / std::sqrt(lambda);
      out.unstable[static_cast<std::size_t>(i)] = false;
    }
  }
  return out;
}

}  // namespace pcares

#pragma once

#include <optional>
#include <vector>

#include "pcares/matrix.hpp"
#include "pcares/regression.hpp"
#include "pcares/robust_cov.hpp"

namespace pcares {

/// Spectral decomposition of the residual covariance.
///
/// lambda is non-increasing with the trailing p entries set to exactly zero;
/// q holds the matching eigenvectors as columns.
struct SpectralModel {
  Matrix q;
  Vector lambda;
  Eigen::Index rank = 0;  ///< n - p
  CovKind source_kind = CovKind::Homo;
};

/// PCA residuals R = Q^T e and their standardized versions.
///
/// raw has all n entries (the last p are zero up to rounding); standardized,
/// lambda and unstable cover the leading n - p. A standardized entry is empty
/// where its variance estimate was too small to divide by.
struct PcaResiduals {
  Vector raw;
  Vector lambda;
  std::vector<std::optional<double>> standardized;
  std::vector<bool> unstable;
  CovKind kind = CovKind::Homo;
  Eigen::Index n = 0;
  Eigen::Index p = 0;

  Eigen::Index nonzero_count() const { return n - p; }
  /// First n - p raw residuals.
  Vector nonzero() const { return raw.head(n - p); }
  /// Standardized values that exist, in index order.
  std::vector<double> present_standardized() const;
};

struct PcaTransform {
  SpectralModel model;
  PcaResiduals residuals;
};

/// S = (I - H) diag(omega) (I - H), symmetric PSD with rank n - p when all
/// omega entries are positive.
Matrix residual_cov(const DesignMatrix& x, const OmegaEstimate& omega);
Matrix residual_cov(const FitResult& fit, const OmegaEstimate& omega);

/// Decomposes a residual covariance of known rank n - p; the p smallest
/// eigenvalues are zeroed and tiny negative ones clamped to zero.
SpectralModel spectral_model(const Matrix& s, Eigen::Index p, CovKind kind);

/// Spectral model for the fit under the given Omega estimate. Homo
/// decomposes I - H and scales its eigenvalues by sigma2_hat.
SpectralModel spectral_model(const FitResult& fit, const OmegaEstimate& omega);

/// R = Q^T e for a model built from the same design.
PcaResiduals project_residuals(const SpectralModel& model, const Vector& resid, Eigen::Index p);

/// Full pipeline: spectral model plus raw (unstandardized) PCA residuals.
PcaTransform pca_transform(const FitResult& fit, const OmegaEstimate& omega);

/// sigma^2 estimate (1/(n-p)) sum_{i<=n-p} R_i^2. Homo only.
double sigma2_from_pca(const PcaResiduals& r, Eigen::Index n, Eigen::Index p);

/// R_i* = R_i / sigma_i with the leave-one-out scale
/// sigma_i^2 = (1/(n-p-1)) sum_{j != i, j <= n-p} R_j^2; exactly t(n-p-1)
/// under a homoskedastic normal model.
PcaResiduals standardize_homo(const PcaResiduals& r, Eigen::Index n, Eigen::Index p);

/// R_i* = R_i / sqrt(lambda_i); entries with lambda_i <= 1e-10 lambda_1 are
/// flagged unstable and left empty.
PcaResiduals standardize_hetero(const PcaResiduals& r, const SpectralModel& model);

inline constexpr double kHeteroStabilityTol = 1e-10;
inline constexpr double kDegenerateVariance = 1e-300;

}  // namespace pcares

#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pcares/matrix.hpp"
#include "pcares/regression.hpp"

namespace pcares {

/// Estimator of the error covariance Omega. Homo uses sigma2_hat * I; the
/// HC kinds use diag(adjust_i * e_i^2).
enum class CovKind { Homo, HC0, HC1, HC2, HC3, HC4 };

inline constexpr CovKind kAllKinds[] = {CovKind::Homo, CovKind::HC0, CovKind::HC1,
                                        CovKind::HC2,  CovKind::HC3, CovKind::HC4};

std::string_view to_string(CovKind kind);
std::optional<CovKind> parse_kind(std::string_view text);

/// Parses "homo,hc0..hc4"-style lists: comma separated names, with "a..b"
/// ranges over the HC indices. Duplicates are dropped; order is canonical.
std::vector<CovKind> parse_kind_list(std::string_view text);

/// Diagonal Omega estimate: diag_i = adjust_i * base_i where base is e_i^2
/// (or sigma2_hat everywhere for Homo).
struct OmegaEstimate {
  CovKind kind = CovKind::HC0;
  Vector diag;
  Vector adjust;
  Vector base;

  /// Estimate from arbitrary positive variances, with unit adjustment.
  static OmegaEstimate from_variances(const Vector& variances, CovKind kind = CovKind::HC0);

  /// True when all adjust entries are identical (Homo, HC0, HC1).
  bool uniform_adjust() const;
};

/// Heteroskedasticity-consistent estimate of Cov(beta_hat).
struct HcCovariance {
  CovKind kind = CovKind::HC0;
  Matrix matrix;  ///< p x p
};

/// Leverages closer to one than this make HC2-HC4 undefined.
inline constexpr double kLeverageOneTol = 1e-10;

/// HC4 exponent delta_i = min(4, n h_i / p).
double hc4_delta(double leverage, Eigen::Index n, Eigen::Index p);

OmegaEstimate omega_hat(const FitResult& fit, CovKind kind);

/// (X^T X)^{-1} X^T Omega X (X^T X)^{-1}.
HcCovariance hc_cov(const DesignMatrix& x, const OmegaEstimate& omega);

}  // namespace pcares

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "pcares/matrix.hpp"
#include "pcares/regression.hpp"
#include "pcares/robust_cov.hpp"

namespace pcares {

/// Error-variance pattern of a simulated regression.
struct VariancePattern {
  enum class Kind { Const, ExpLinear, Step };
  Kind kind = Kind::Const;
  double sigma2 = 1.0;         ///< Const
  std::vector<double> gamma;   ///< ExpLinear: sigma_i^2 = exp(gamma . z_i), z_i = non-intercept covariates
  double sigma2_a = 1.0;       ///< Step: rows before the split
  double sigma2_b = 1.0;       ///< Step: rows from the split on
  double split = 0.5;          ///< Step: fraction of rows in the first block

  static VariancePattern constant(double sigma2);
  static VariancePattern exp_linear(std::vector<double> gamma);
  static VariancePattern step(double sigma2_a, double sigma2_b, double split);
};

/// How covariates are drawn. The first column is always the intercept.
struct DesignKind {
  enum class Kind { IidNormal, WithLeverage };
  Kind kind = Kind::IidNormal;
  std::size_t outliers = 0;  ///< WithLeverage: leading rows whose covariates are +-magnitude
  double magnitude = 0.0;

  static DesignKind iid_normal() { return {}; }
  static DesignKind with_leverage(std::size_t k, double c) { return {Kind::WithLeverage, k, c}; }
};

struct SimScenario {
  std::size_t n = 0;
  std::size_t p = 1;
  Vector beta;  ///< length p; empty means zero
  VariancePattern variance;
  DesignKind design;
  std::uint64_t seed = 0;

  /// Throws InvalidArgument when the scenario is inconsistent.
  void validate() const;
};

struct SimDataset {
  DesignMatrix x;
  Vector y;
  Vector omega;  ///< true error variances
};

/// Fixed design of a scenario (independent of the replication).
DesignMatrix gen_design(const SimScenario& s);
Vector true_variances(const SimScenario& s, const DesignMatrix& x);

/// Response for one replication on a given design; replication 0 is the
/// dataset returned by gen_dataset.
Vector gen_response(const SimScenario& s, const DesignMatrix& x, const Vector& omega,
                    std::uint64_t replication);

SimDataset gen_dataset(const SimScenario& s);

/// Runs body(r) for r in [0, count) on up to `threads` workers; results must
/// be written to slot r so merging is index-ordered.
void parallel_replications(std::size_t count, const std::function<void(std::size_t)>& body,
                           unsigned threads = 0);

/// M x (n - p) matrix of PCA residuals over replications of a fixed design.
/// With standardized set, Homo rows hold R_i* (leave-one-out) and HC rows
/// hold R_i / sqrt(lambda_hat_i), NaN where unstable.
Matrix mc_pca_residuals(const SimScenario& s, std::size_t replications, CovKind kind,
                        bool standardized, unsigned threads = 0);

/// Monte Carlo covariance of the residual EDF process on a grid.
struct EdfCovarianceMc {
  std::vector<double> grid;
  double sigma = 1.0;
  std::size_t n = 0;
  std::size_t p = 0;
  std::size_t replications = 0;
  /// sqrt(n-p) (F_hat(sigma_hat z_t) - t), z_t = Phi^{-1}(t), with sigma_hat
  /// estimated from the same residuals.
  Matrix estimated_cov;
  Matrix estimated_se;
  /// sqrt(n-p) (F_hat(sigma z_t) - t) with sigma known (Brownian bridge control).
  Matrix control_cov;
  Matrix control_se;
};

inline constexpr std::size_t kMcBatches = 20;

/// Requires a Const variance pattern, M >= 1000 and grid points in (0, 1).
EdfCovarianceMc mc_edf_covariance(const SimScenario& s, const std::vector<double>& grid,
                                  std::size_t replications, unsigned threads = 0);

}  // namespace pcares

namespace pcares {

/// One grid cell of the Monte Carlo check of theorem1_cov.
struct Theorem1Cell {
  double t1 = 0.0;
  double t2 = 0.0;
  double printed = 0.0;      ///< theorem1_cov(t1, t2, sigma)
  double mc = 0.0;           ///< estimated-variance Monte Carlo covariance
  double mc_se = 0.0;
  double z = 0.0;            ///< (mc - printed) / mc_se
  double control = 0.0;      ///< known-variance Monte Carlo covariance
  double control_se = 0.0;
  double bridge = 0.0;       ///< min(t1,t2) - t1 t2
  /// min(t1,t2) - t1 t2 - z1 z2 phi(z1) phi(z2) / 2, the limit for an EDF
  /// whose normal variance is estimated by the mean of squares.
  double estimated_variance_limit = 0.0;
};

struct Theorem1Comparison {
  std::vector<Theorem1Cell> cells;
  double tolerance_se = 3.0;
  bool agrees = true;          ///< every |z| <= tolerance_se
  bool control_agrees = true;  ///< control within tolerance_se of the bridge
};

Theorem1Comparison compare_with_theorem1(const EdfCovarianceMc& mc, double tolerance_se = 3.0);

/// Markdown report of a comparison, listing every cell.
std::string theorem1_discrepancy_markdown(const EdfCovarianceMc& mc, const Theorem1Comparison& cmp);

}  // namespace pcares

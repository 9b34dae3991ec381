#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "pcares/pca_residuals.hpp"

namespace pcares {

/// Right-continuous empirical distribution function.
class EdfCurve {
 public:
  explicit EdfCurve(std::vector<double> values);

  /// (1/m) #{i : R_i <= t}
  double operator()(double t) const;
  const std::vector<double>& sorted_values() const { return sorted_; }
  std::size_t size() const { return sorted_.size(); }

 private:
  std::vector<double> sorted_;
};

/// EDF of the non-zero (first n - p) PCA residuals.
EdfCurve edf(const PcaResiduals& r);

/// Limiting covariance of the residual EDF process, evaluated as
///   min(t1,t2) - t1 t2 - 2 s a1 a2 + 2 s^2 a1 a2,
///   a_k = q_k phi_s(q_k),  q_k = Phi_s^{-1}(t_k),
/// where Phi_s, phi_s are the N(0, s^2) cdf and density.
double theorem1_cov(double t1, double t2, double sigma);

enum class TestMethod { KsKnown, Lilliefors, AD };

std::string_view to_string(TestMethod m);

struct TestResult {
  double statistic = 0.0;
  double p_value = 1.0;
  TestMethod method = TestMethod::KsKnown;
  std::size_t n_effective = 0;
};

/// One-sample two-sided Kolmogorov-Smirnov test against a fully specified
/// cdf. p-value from the limiting Kolmogorov distribution at
/// (sqrt(m) + 0.12 + 0.11/sqrt(m)) D.
TestResult ks_test(std::span<const double> sample, const std::function<double(double)>& cdf);

/// KS distance to N(mean, sd^2) with both estimated from the sample (sd with
/// divisor m - 1). p-value from a Monte Carlo null table of 10,000 draws per
/// sample size, built once per (size, seed) and cached.
inline constexpr std::uint64_t kLillieforsSeed = 0x5EED;
inline constexpr std::size_t kLillieforsReplications = 10000;

TestResult lilliefors_test(std::span<const double> sample, std::uint64_t seed = kLillieforsSeed);

struct QqReference {
  enum class Kind { StudentT, StdNormal };
  Kind kind = Kind::StdNormal;
  double df = 0.0;

  static QqReference student_t(double df) { return {Kind::StudentT, df}; }
  static QqReference std_normal() { return {Kind::StdNormal, 0.0}; }
  double quantile(double p) const;
};

struct QqPoint {
  double theoretical = 0.0;
  double sample = 0.0;
};

struct QqData {
  std::vector<QqPoint> points;
  QqReference reference;
};

/// Plotting position for order statistic i (1-based) of m.
inline double plotting_position(std::size_t i, std::size_t m) {
  return (static_cast<double>(i) - 0.5) / static_cast<double>(m);
}

QqData qq_data(std::span<const double> standardized, QqReference reference);

struct IndexPoint {
  std::size_t index = 0;  ///< 1-based position in descending-lambda order
  double value = 0.0;
};

/// (i, R_i*) for every present standardized residual; unstable ones are
/// skipped without renumbering.
std::vector<IndexPoint> index_plot_data(const PcaResiduals& r);

}  // namespace pcares

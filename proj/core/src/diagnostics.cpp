#include "pcares/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "pcares/distributions.hpp"
#include "pcares/error.hpp"
#include "pcares/rng.hpp"

namespace pcares {

EdfCurve::EdfCurve(std::vector<double> values) : sorted_(std::move(values)) {
  if (sorted_.empty()) fail(ErrorCode::Empty, "EDF of an empty sample");
  std::sort(sorted_.begin(), sorted_.end());
}

double EdfCurve::operator()(double t) const {
  const auto it = std::upper_bound(sorted_.begin(), sorted_.end(), t);
  return static_cast<double>(it - sorted_.begin()) / static_cast<double>(sorted_.size());
}

EdfCurve edf(const PcaResiduals& r) {
  const Eigen::Index m = r.n - r.p;
  if (m < 1) fail(ErrorCode::Empty, "no non-zero PCA residuals (n - p = 0)");
  const Vector head = r.raw.head(m);
  return EdfCurve(std::vector<double>(head.begin(), head.end()));
}

double theorem1_cov(double t1, double t2, double sigma) {
  if (!(t1 > 0.0 && t1 < 1.0) || !(t2 > 0.0 && t2 < 1.0)) {
    fail(ErrorCode::DomainError, "covariance arguments must lie strictly inside (0, 1)");
  }
  if (!(sigma > 0.0) || !std::isfinite(sigma)) fail(ErrorCode::DomainError, "sigma must be positive");
  auto weighted_quantile = [sigma](double t) {
    const double q = sigma * dist::normal_quantile(t);  // Phi_s^{-1}(t)
    const double z = q / sigma;
    const double density = dist::normal_pdf(z) / sigma;  // phi_s(q)
    return q * density;
  };
  const double a = weighted_quantile(t1) * weighted_quantile(t2);
  return std::min(t1, t2) - t1 * t2 - 2.0 * sigma * a + 2.0 * sigma * sigma * a;
}

std::string_view to_string(TestMethod m) {
  switch (m) {
    case TestMethod::KsKnown: return "ks_known";
    case TestMethod::Lilliefors: return "lilliefors";
    case TestMethod::AD: return "anderson_darling";
  }
  return "unknown";
}

namespace {

double ks_statistic_sorted(std::span<const double> sorted, const std::function<double(double)>& cdf) {
  const double m = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    const double above = static_cast<double>(i + 1) / m - f;
    const double below = f - static_cast<double>(i) / m;
    d = std::max({d, above, below});
  }
  return d;
}

double ks_p_value(double d, std::size_t m) {
  const double root = std::sqrt(static_cast<double>(m));
  return dist::kolmogorov_sf((root + 0.12 + 0.11 / root) * d);
}

struct MeanSd {
  double mean;
  double sd;
};

MeanSd mean_sd(std::span<const double> x) {
  const double m = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= m;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / (m - 1.0))};
}

double lilliefors_statistic(std::vector<double> sample) {
  std::sort(sample.begin(), sample.end());
  const MeanSd ms = mean_sd(sample);
  if (!(ms.sd > 0.0)) return 1.0;  // constant sample: maximal distance
  return ks_statistic_sorted(sample, [&](double x) { return dist::normal_cdf((x - ms.mean) / ms.sd); });
}

// Null distribution of the Lilliefors statistic for one sample size.
class LillieforsTable {
 public:
  LillieforsTable(std::size_t size, std::uint64_t seed) {
    Rng rng(seed, size);
    std::vector<double> draw(size);
    stats_.reserve(kLillieforsReplications);
    for (std::size_t r = 0; r < kLillieforsReplications; ++r) {
      for (double& v : draw) v = rng.normal();
      stats_.push_back(lilliefors_statistic(draw));
    }
    std::sort(stats_.begin(), stats_.end());
  }

  double p_value(double statistic) const {
    const auto first_ge = std::lower_bound(stats_.begin(), stats_.end(), statistic);
    return static_cast<double>(stats_.end() - first_ge) / static_cast<double>(stats_.size());
  }

 private:
  std::vector<double> stats_;
};

struct TableSlot {
  std::once_flag once;
  std::unique_ptr<LillieforsTable> table;
};

const LillieforsTable& lilliefors_table(std::size_t size, std::uint64_t seed) {
  static std::mutex registry_mutex;
  static std::map<std::pair<std::size_t, std::uint64_t>, std::unique_ptr<TableSlot>> registry;
  TableSlot* slot;
  {
    std::lock_guard lock(registry_mutex);
    auto& entry = registry[{size, seed}];
    if (!entry) entry = std::make_unique<TableSlot>();
    slot = entry.get();
  }
  std::call_once(slot->once, [&] { slot->table = std::make_unique<LillieforsTable>(size, seed); });
  return *slot->table;
}

}  // namespace

TestResult ks_test(std::span<const double> sample, const std::function<double(double)>& cdf) {
  if (sample.empty()) fail(ErrorCode::Empty, "KS test on an empty sample");
  std::vector<double> sorted(sample.begin(), sample.end());
  std::sort(sorted.begin(), sorted.end());
  TestResult out;
  out.method = TestMethod::KsKnown;
  out.n_effective = sorted.size();
  out.statistic = ks_statistic_sorted(sorted, cdf);
  out.p_value = ks_p_value(out.statistic, sorted.size());
  return out;
}

TestResult lilliefors_test(std::span<const double> sample, std::uint64_t seed) {
  if (sample.size() < 5) {
    fail(ErrorCode::TooSmall, "Lilliefors test needs at least 5 observations, got " +
                                  std::to_string(sample.size()));
  }
  const MeanSd ms = mean_sd(sample);
  TestResult out;
  out.method = TestMethod::Lilliefors;
  out.n_effective = sample.size();
  if (!(ms.sd > 0.0)) {
    out.statistic = 1.0;
    out.p_value = 0.0;
    return out;
  }
  out.statistic =
      ks_test(sample, [&](double x) { return dist::normal_cdf((x - ms.mean) / ms.sd); }).statistic;
  out.p_value = lilliefors_table(sample.size(), seed).p_value(out.statistic);
  return out;
}

double QqReference::quantile(double p) const {
  if (kind == Kind::StdNormal) return dist::normal_quantile(p);
  return dist::student_t_quantile(p, df);
}

QqData qq_data(std::span<const double> standardized, QqReference reference) {
  if (standardized.empty()) fail(ErrorCode::Empty, "Q-Q data for an empty sample");
  if (reference.kind == QqReference::Kind::StudentT && !(reference.df >= 1.0)) {
    fail(ErrorCode::BadDf, "Student t reference needs df >= 1");
  }
  std::vector<double> sorted(standardized.begin(), standardized.end());
  std::sort(sorted.begin(), sorted.end());
  QqData out;
  out.reference = reference;
  out.points.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    out.points.push_back({reference.quantile(plotting_position(i + 1, sorted.size())), sorted[i]});
  }
  return out;
}

std::vector<IndexPoint> index_plot_data(const PcaResiduals& r) {
  if (r.standardized.empty()) fail(ErrorCode::Empty, "no standardized residuals to plot");
  std::vector<IndexPoint> out;
  for (std::size_t i = 0; i < r.standardized.size(); ++i) {
    if (r.standardized[i]) out.push_back({i + 1, *r.standardized[i]});
  }
  return out;
}

}  // namespace pcares

#include "pcares/report.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "json_writer.hpp"
#include "pcares/distributions.hpp"
#include "pcares/error.hpp"
#include "pcares/rng.hpp"

namespace pcares {

namespace {

// Residual norm below this fraction of ||y|| counts as an exact fit.
constexpr double kNoiselessTol = 1e-10;

template <typename F>
auto staged(const std::string& stage, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (!e.stage().empty()) throw;
    throw e.with_stage(stage);
  }
}

NamedTest run_test(std::string name, const std::function<TestResult()>& body) {
  NamedTest t;
  t.name = std::move(name);
  try {
    t.result = body();
  } catch (const Error& e) {
    if (e.code() != ErrorCode::TooSmall && e.code() != ErrorCode::Empty) throw;
    t.skipped = e.message();
  }
  return t;
}

EstimatorBlock build_block(const FitResult& fit, CovKind kind, bool degenerate,
                           const ReportOptions& options) {
  const std::string stage(to_string(kind));
  const Eigen::Index n = fit.n;
  const Eigen::Index p = fit.p;
  const Eigen::Index m = n - p;

  EstimatorBlock block;
  block.kind = kind;
  const OmegaEstimate omega = staged("omega:" + stage, [&] { return omega_hat(fit, kind); });
  PcaTransform t = staged("spectral:" + stage, [&] { return pca_transform(fit, omega); });
  block.eigenvalues = t.model.lambda.head(m);
  block.residuals = std::move(t.residuals);

  if (degenerate) {
    block.degenerate = "degenerate";
    for (const char* name : {"ks", "lilliefors"}) block.tests.push_back({name, std::nullopt, "degenerate"});
    return block;
  }

  staged("standardize:" + stage, [&] {
    if (kind == CovKind::Homo) {
      block.residuals = standardize_homo(block.residuals, n, p);
    } else {
      block.residuals = standardize_hetero(block.residuals, t.model);
    }
    return 0;
  });

  staged("diagnostics:" + stage, [&] {
    const std::vector<double> standardized = block.residuals.present_standardized();
    const QqReference reference = kind == CovKind::Homo
                                      ? QqReference::student_t(static_cast<double>(m - 1))
                                      : QqReference::std_normal();
    if (!standardized.empty()) {
      block.qq = qq_data(standardized, reference);
      block.index_plot = index_plot_data(block.residuals);
    }
    if (kind == CovKind::Homo) {
      const double df = static_cast<double>(m - 1);
      block.tests.push_back(run_test("ks_student_t", [&] {
        return ks_test(standardized, [df](double x) { return dist::student_t_cdf(x, df); });
      }));
      const Vector raw = block.residuals.nonzero();
      block.tests.push_back(run_test("lilliefors", [&] {
        return lilliefors_test(std::vector<double>(raw.begin(), raw.end()), options.seed);
      }));
    } else {
      block.tests.push_back(run_test("ks_std_normal", [&] {
        return ks_test(standardized, [](double x) { return dist::normal_cdf(x); });
      }));
      block.tests.push_back(
          run_test("lilliefors", [&] { return lilliefors_test(standardized, options.seed); }));
    }
    if (m >= 2) block.mean = mean_interval(block.residuals.nonzero());
    return 0;
  });
  return block;
}

}  // namespace

MeanInterval mean_interval(const Vector& values, double level) {
  const Eigen::Index m = values.size();
  if (m < 2) fail(ErrorCode::TooSmall, "confidence interval needs at least 2 values");
  MeanInterval out;
  out.count = m;
  out.mean = values.mean();
  out.sd = std::sqrt((values.array() - out.mean).square().sum() / static_cast<double>(m - 1));
  out.critical = dist::student_t_quantile(0.5 + 0.5 * level, static_cast<double>(m - 1));
  const double half = out.critical * out.sd / std::sqrt(static_cast<double>(m));
  out.lower = out.mean - half;
  out.upper = out.mean + half;
  out.contains_zero = out.lower <= 0.0 && 0.0 <= out.upper;
  return out;
}

DiagnosticsReport run_report(const DesignMatrix& x, const Vector& y, const ModelConfig& config,
                             const ReportOptions& options) {
  staged("config", [&] {
    config.validate();
    return 0;
  });
  const FitResult fit = staged("fit", [&] { return fit_ols(x, y); });

  DiagnosticsReport report;
  report.fit.columns = x.columns;
  report.fit.beta_hat = fit.beta_hat;
  report.fit.sigma2_hat = fit.sigma2_hat;
  report.fit.n = fit.n;
  report.fit.p = fit.p;
  report.fit.df = fit.n - fit.p - 1;
  report.provenance.config_hash = config.hash();
  report.provenance.seed = options.seed;
  report.provenance.rng = std::string(Rng::kAlgorithm);

  const double y_norm = y.norm();
  const bool degenerate = !(fit.resid.norm() > kNoiselessTol * y_norm);
  for (CovKind kind : config.estimators) {
    report.blocks.push_back(build_block(fit, kind, degenerate, options));
  }
  return report;
}

DiagnosticsReport run_report(const Table& table, const ModelConfig& config,
                             const ReportOptions& options) {
  auto [x, y] = staged("design", [&] { return build_design(table, config); });
  return run_report(x, y, config, options);
}

namespace {

void write_test(detail::JsonWriter& w, const NamedTest& t) {
  w.begin_object();
  w.key("name").value(t.name);
  if (t.result) {
    w.key("method").value(to_string(t.result->method));
    w.key("statistic").value(t.result->statistic);
    w.key("p_value").value(t.result->p_value);
    w.key("n_effective").value(static_cast<unsigned long long>(t.result->n_effective));
  } else {
    w.key("skipped").value(t.skipped);
  }
  w.end_object();
}

void write_block(detail::JsonWriter& w, const EstimatorBlock& b) {
  w.begin_object();
  w.key("estimator").value(to_string(b.kind));
  w.key("residual_count").value(static_cast<long long>(b.residuals.nonzero_count()));
  if (!b.degenerate.empty()) w.key("degenerate").value(b.degenerate);
  w.key("eigenvalues").number_array(std::vector<double>(b.eigenvalues.begin(), b.eigenvalues.end()));
  w.key("raw_residuals").number_array(std::vector<double>(b.residuals.raw.begin(), b.residuals.raw.end()));
  std::vector<double> standardized;
  std::vector<double> unstable;
  for (std::size_t i = 0; i < b.residuals.standardized.size(); ++i) {
    const auto& v = b.residuals.standardized[i];
    standardized.push_back(v ? *v : std::nan(""));
    if (!v) unstable.push_back(static_cast<double>(i + 1));
  }
  w.key("standardized").number_array(standardized);
  w.key("unstable_indices").number_array(unstable);

  w.key("qq");
  if (b.qq) {
    w.begin_object();
    const bool t = b.qq->reference.kind == QqReference::Kind::StudentT;
    w.key("reference").value(t ? "student_t" : "std_normal");
    if (t) w.key("df").value(b.qq->reference.df);
    std::vector<double> theo;
    std::vector<double> samp;
    for (const auto& pt : b.qq->points) {
      theo.push_back(pt.theoretical);
      samp.push_back(pt.sample);
    }
    w.key("theoretical").number_array(theo);
    w.key("sample").number_array(samp);
    w.end_object();
  } else {
    w.null();
  }

  std::vector<double> idx;
  std::vector<double> val;
  for (const auto& pt : b.index_plot) {
    idx.push_back(static_cast<double>(pt.index));
    val.push_back(pt.value);
  }
  w.key("index_plot").begin_object();
  w.key("index").number_array(idx);
  w.key("value").number_array(val);
  w.end_object();

  w.key("tests").begin_array();
  for (const auto& t : b.tests) write_test(w, t);
  w.end_array();

  w.key("mean_nonzero");
  if (b.mean) {
    w.begin_object();
    w.key("mean").value(b.mean->mean);
    w.key("sd").value(b.mean->sd);
    w.key("count").value(static_cast<long long>(b.mean->count));
    w.key("level").value(kConfidenceLevel);
    w.key("critical_t").value(b.mean->critical);
    w.key("lower").value(b.mean->lower);
    w.key("upper").value(b.mean->upper);
    w.key("contains_zero").value(b.mean->contains_zero);
    w.end_object();
  } else {
    w.null();
  }
  w.end_object();
}

}  // namespace

std::string report_json(const DiagnosticsReport& r) {
  detail::JsonWriter w;
  w.begin_object();
  w.key("schema_version").value(kReportSchemaVersion);

  w.key("fit").begin_object();
  w.key("n").value(static_cast<long long>(r.fit.n));
  w.key("p").value(static_cast<long long>(r.fit.p));
  w.key("df").value(static_cast<long long>(r.fit.df));
  w.key("sigma2_hat").value(r.fit.sigma2_hat);
  w.key("coefficients").begin_array();
  for (Eigen::Index j = 0; j < r.fit.beta_hat.size(); ++j) {
    w.begin_object();
    w.key("term").value(r.fit.columns[static_cast<std::size_t>(j)]);
    w.key("estimate").value(r.fit.beta_hat(j));
    w.end_object();
  }
  w.end_array();
  w.end_object();

  w.key("blocks").begin_array();
  for (const auto& b : r.blocks) write_block(w, b);
  w.end_array();

  w.key("provenance").begin_object();
  w.key("config_hash").value(r.provenance.config_hash);
  w.key("seed").value(static_cast<unsigned long long>(r.provenance.seed));
  w.key("rng").value(r.provenance.rng);
  w.key("conventions").begin_object();
  w.key("transform").value("R = Q^T e, eigenvectors of (I-H) Omega (I-H) as columns of Q");
  w.key("order").value("descending eigenvalue; trailing p eigenvalues set to zero");
  w.key("sign").value("largest-magnitude eigenvector entry positive, ties to lowest index");
  w.key("degenerate_eigenspaces")
      .value("pivoted Gram-Schmidt on the eigenspace projector, descending lexicographic order");
  w.key("plotting_positions").value("(i - 0.5) / m");
  w.key("homo_standardization").value("leave-one-out scale, Student t with n - p - 1 df");
  w.key("hetero_standardization").value("R_i / sqrt(lambda_i), unstable if lambda_i <= 1e-10 lambda_1");
  w.key("mean_interval").value("mean of R_1..R_{n-p} +- t_{n-p-1, 0.975} s / sqrt(n-p)");
  w.key("ks_p_value").value("limiting Kolmogorov law at (sqrt(m) + 0.12 + 0.11/sqrt(m)) D");
  w.key("lilliefors_p_value").value("Monte Carlo null table, 10000 draws per sample size");
  w.end_object();
  w.end_object();

  w.end_object();
  std::string out = w.str();
  out += '\n';
  return out;
}

}  // namespace pcares

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pcares/csv.hpp"
#include "pcares/diagnostics.hpp"
#include "pcares/model_config.hpp"
#include "pcares/pca_residuals.hpp"

namespace pcares {

inline constexpr const char* kReportSchemaVersion = "1.0";
inline constexpr double kConfidenceLevel = 0.95;

struct FitSummary {
  std::vector<std::string> columns;
  Vector beta_hat;
  double sigma2_hat = 0.0;
  Eigen::Index n = 0;
  Eigen::Index p = 0;
  Eigen::Index df = 0;  ///< n - p - 1, the t reference for standardized homo residuals
};

/// Mean of the non-zero PCA residuals with mean +- t_{m-1, 0.975} s / sqrt(m).
struct MeanInterval {
  double mean = 0.0;
  double sd = 0.0;
  double critical = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  Eigen::Index count = 0;
  bool contains_zero = true;
};

MeanInterval mean_interval(const Vector& values, double level = kConfidenceLevel);

struct NamedTest {
  std::string name;  ///< e.g. "ks_student_t", "lilliefors"
  std::optional<TestResult> result;
  std::string skipped;  ///< reason when result is empty
};

struct EstimatorBlock {
  CovKind kind = CovKind::Homo;
  Vector eigenvalues;  ///< the n - p non-zero ones
  PcaResiduals residuals;
  std::optional<QqData> qq;
  std::vector<IndexPoint> index_plot;
  std::vector<NamedTest> tests;
  std::optional<MeanInterval> mean;
  std::string degenerate;  ///< reason the block carries no diagnostics
};

struct Provenance {
  std::string config_hash;
  std::uint64_t seed = kLillieforsSeed;
  std::string rng;
};

struct DiagnosticsReport {
  FitSummary fit;
  std::vector<EstimatorBlock> blocks;
  Provenance provenance;
};

struct ReportOptions {
  std::uint64_t seed = kLillieforsSeed;  ///< seeds the Lilliefors null tables
};

/// fit -> Omega per estimator -> spectral decomposition -> standardization ->
/// diagnostics. Errors are rethrown tagged with the stage that raised them.
DiagnosticsReport run_report(const Table& table, const ModelConfig& config,
                             const ReportOptions& options = {});

/// Same pipeline on an already built design.
DiagnosticsReport run_report(const DesignMatrix& x, const Vector& y, const ModelConfig& config,
                             const ReportOptions& options = {});

/// Serialized report body (schema_version, fit, blocks, provenance).
std::string report_json(const DiagnosticsReport& report);

enum class OutputFormat { Json, Csv, Svg };

/// Writes report.json, qq_<kind>.csv / index_<kind>.csv and qq_<kind>.svg as
/// selected. Returns the files written in order.
std::vector<std::filesystem::path> emit(const DiagnosticsReport& report,
                                        const std::filesystem::path& outdir,
                                        const std::vector<OutputFormat>& formats);

std::string qq_csv(const QqData& qq);
std::string index_csv(const std::vector<IndexPoint>& points);
std::string qq_svg(const QqData& qq, const std::string& title);

/// Reads a file written by qq_csv.
std::vector<QqPoint> read_qq_csv(const std::filesystem::path& path);

}  // namespace pcares

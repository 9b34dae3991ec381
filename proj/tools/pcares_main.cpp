// pcares: PCA residuals for linear models.
//
//   pcares fit --data states.csv --config model.json --estimator homo,hc0..hc4 --out out/ [--svg]
//   pcares simulate --scenario scenario.json --out sim/
//   pcares edf-cov --sigma 1 --grid 0.25,0.5,0.75 [--mc 20000 --n 400 --p 3 --out dir]
//
// Exit status: 0 success, 2 input error, 3 numerical failure.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pcares/csv.hpp"
#include "pcares/diagnostics.hpp"
#include "pcares/error.hpp"
#include "pcares/model_config.hpp"
#include "pcares/report.hpp"
#include "pcares/simulation.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      grid.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      pcares::fail(pcares::ErrorCode::ParseError, "bad grid value '" + item + "'");
    }
    if (!(grid.back() > 0.0 && grid.back() < 1.0)) {
      pcares::fail(pcares::ErrorCode::InvalidArgument, "grid value '" + item + "' outside (0, 1)");
    }
  }
  if (grid.empty()) pcares::fail(pcares::ErrorCode::Empty, "empty grid");
  return grid;
}

void write_text(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) pcares::fail(pcares::ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out << body;
}

struct FitArgs {
  std::string data;
  std::string config;
  std::string estimators;
  std::string out;
  bool svg = false;
  bool no_csv = false;
  std::uint64_t seed = pcares::kLillieforsSeed;
};

int run_fit(const FitArgs& a) {
  pcares::ModelConfig config = pcares::load_model_config(a.config);
  if (!a.estimators.empty()) config.estimators = pcares::parse_kind_list(a.estimators);
  const pcares::Table table = pcares::load_csv(a.data);
  const pcares::DiagnosticsReport report = pcares::run_report(table, config, {a.seed});

  std::vector<pcares::OutputFormat> formats{pcares::OutputFormat::Json};
  if (!a.no_csv) formats.push_back(pcares::OutputFormat::Csv);
  if (a.svg) formats.push_back(pcares::OutputFormat::Svg);
  const auto files = pcares::emit(report, a.out, formats);

  std::cout << "n = " << report.fit.n << ", p = " << report.fit.p << ", df = " << report.fit.df
            << ", sigma2_hat = " << pcares::format_double(report.fit.sigma2_hat) << "\n";
  for (const auto& b : report.blocks) {
    std::cout << "  " << pcares::to_string(b.kind) << ": " << b.residuals.nonzero_count()
              << " non-zero residuals";
    if (b.mean) {
      std::cout << ", mean " << b.mean->mean << " [" << b.mean->lower << ", " << b.mean->upper << "]";
    }
    if (!b.degenerate.empty()) std::cout << " (" << b.degenerate << ")";
    std::cout << "\n";
  }
  for (const auto& f : files) std::cout << "wrote " << f.string() << "\n";
  return 0;
}

int run_simulate(const std::string& scenario_path, const std::string& out) {
  const pcares::ScenarioFile file = pcares::load_scenario(scenario_path);
  const pcares::SimDataset d = pcares::gen_dataset(file.scenario);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) pcares::fail(pcares::ErrorCode::IoError, "cannot create '" + out + "'");

  std::string csv = "y";
  for (Eigen::Index j = 1; j < d.x.p(); ++j) csv += ",x" + std::to_string(j);
  csv += ",true_variance\n";
  for (Eigen::Index i = 0; i < d.x.n(); ++i) {
    csv += pcares::format_double(d.y(i));
    for (Eigen::Index j = 1; j < d.x.p(); ++j) csv += "," + pcares::format_double(d.x.values(i, j));
    csv += "," + pcares::format_double(d.omega(i)) + "\n";
  }
  write_text(fs::path(out) / "dataset.csv", csv);

  std::string config = "{\n  \"response\": \"y\",\n  \"terms\": [";
  for (Eigen::Index j = 1; j < d.x.p(); ++j) config += (j > 1 ? ", " : "") + ("\"x" + std::to_string(j) + "\"");
  config += "],\n  \"intercept\": true,\n  \"estimators\": \"homo,hc0..hc4\"\n}\n";
  write_text(fs::path(out) / "config.json", config);
  std::cout << "wrote " << (fs::path(out) / "dataset.csv").string() << "\n"
            << "wrote " << (fs::path(out) / "config.json").string() << "\n";

  if (!file.edf_grid.empty()) {
    const auto mc = pcares::mc_edf_covariance(file.scenario, file.edf_grid,
                                              file.replications ? file.replications : 20000);
    const auto cmp = pcares::compare_with_theorem1(mc);
    write_text(fs::path(out) / "theorem1_discrepancy.md", pcares::theorem1_discrepancy_markdown(mc, cmp));
    std::cout << "wrote " << (fs::path(out) / "theorem1_discrepancy.md").string() << "\n";
  }
  return 0;
}

struct EdfArgs {
  double sigma = 1.0;
  std::string grid;
  std::size_t mc = 0;
  std::size_t n = 400;
  std::size_t p = 3;
  std::uint64_t seed = 1;
  std::string out;
};

int run_edf_cov(const EdfArgs& a) {
  const std::vector<double> grid = parse_grid(a.grid);
  if (!(a.sigma > 0.0) || !std::isfinite(a.sigma)) {
    pcares::fail(pcares::ErrorCode::InvalidArgument, "--sigma must be positive");
  }
  std::cout << "t1,t2,cov\n";
  for (double t1 : grid) {
    for (double t2 : grid) {
      std::cout << pcares::format_double(t1) << "," << pcares::format_double(t2) << ","
                << pcares::format_double(pcares::theorem1_cov(t1, t2, a.sigma)) << "\n";
    }
  }
  if (a.mc == 0) return 0;

  pcares::SimScenario s;
  s.n = a.n;
  s.p = a.p;
  s.seed = a.seed;
  s.variance = pcares::VariancePattern::constant(a.sigma * a.sigma);
  const auto mc = pcares::mc_edf_covariance(s, grid, a.mc);
  const auto cmp = pcares::compare_with_theorem1(mc);
  const std::string md = pcares::theorem1_discrepancy_markdown(mc, cmp);
  if (a.out.empty()) {
    std::cout << "\n" << md;
  } else {
    fs::create_directories(a.out);
    write_text(fs::path(a.out) / "theorem1_discrepancy.md", md);
    std::cout << "wrote " << (fs::path(a.out) / "theorem1_discrepancy.md").string() << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PCA residuals for normal linear models"};
  app.require_subcommand(1);

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit", "fit a model and write the diagnostics report");
  fit_cmd->add_option("--data", fit.data, "CSV file with a header row")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--config", fit.config, "JSON model config")->required()->check(CLI::ExistingFile);
  fit_cmd->add_option("--estimator", fit.estimators, "estimators, e.g. homo,hc0..hc4 (overrides config)");
  fit_cmd->add_option("--out", fit.out, "output directory")->required();
  fit_cmd->add_flag("--svg", fit.svg, "also write Q-Q plots as SVG");
  fit_cmd->add_flag("--no-csv", fit.no_csv, "write report.json only");
  fit_cmd->add_option("--seed", fit.seed, "seed for the Lilliefors null tables");

  std::string scenario;
  std::string sim_out;
  auto* sim_cmd = app.add_subcommand("simulate", "generate a dataset from a scenario file");
  sim_cmd->add_option("--scenario", scenario, "JSON scenario file")->required()->check(CLI::ExistingFile);
  sim_cmd->add_option("--out", sim_out, "output directory")->required();

  EdfArgs edf;
  auto* edf_cmd = app.add_subcommand("edf-cov", "evaluate the EDF limit covariance on a grid");
  edf_cmd->add_option("--sigma", edf.sigma, "error standard deviation")->required();
  edf_cmd->add_option("--grid", edf.grid, "comma separated points in (0,1)")->required();
  edf_cmd->add_option("--mc", edf.mc, "Monte Carlo replications for a comparison (0 = none)");
  edf_cmd->add_option("--n", edf.n, "observations per Monte Carlo dataset");
  edf_cmd->add_option("--p", edf.p, "columns (with intercept) per Monte Carlo dataset");
  edf_cmd->add_option("--seed", edf.seed, "Monte Carlo seed");
  edf_cmd->add_option("--out", edf.out, "directory for theorem1_discrepancy.md");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*fit_cmd) return run_fit(fit);
    if (*sim_cmd) return run_simulate(scenario, sim_out);
    if (*edf_cmd) return run_edf_cov(edf);
  } catch (const pcares::Error& e) {
    std::cerr << "pcares: " << e.what() << "\n";
    return e.error_class() == pcares::ErrorClass::Input ? kExitInput : kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "pcares: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}

#include "pcares/model_config.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "pcares/error.hpp"

namespace pcares {

using nlohmann::json;

std::string ModelTerm::label() const {
  return power == 1 ? column : column + "^" + std::to_string(power);
}

void ModelConfig::validate() const {
  if (response.empty()) fail(ErrorCode::InvalidArgument, "config: response is empty");
  if (estimators.empty()) fail(ErrorCode::InvalidArgument, "config: at least one estimator is required");
  if (terms.empty() && !intercept) fail(ErrorCode::InvalidArgument, "config: model has no columns");
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].column.empty()) fail(ErrorCode::InvalidArgument, "config: empty term column");
    if (terms[i].power < 1) fail(ErrorCode::InvalidArgument, "config: term powers must be positive");
    if (terms[i].column == response) {
      fail(ErrorCode::InvalidArgument, "config: response '" + response + "' used as a term");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (terms[i] == terms[j]) {
        fail(ErrorCode::InvalidArgument, "config: duplicate term '" + terms[i].label() + "'");
      }
    }
  }
}

std::string ModelConfig::canonical_json() const {
  json j;
  j["response"] = response;
  j["intercept"] = intercept;
  json t = json::array();
  for (const auto& term : terms) t.push_back({{"column", term.column}, {"power", term.power}});
  j["terms"] = t;
  json e = json::array();
  for (CovKind k : estimators) e.push_back(std::string(to_string(k)));
  j["estimators"] = e;
  return j.dump();
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string ModelConfig::hash() const {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(canonical_json())));
  return buf;
}

ModelConfig parse_model_config(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ParseError, std::string("config: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::ParseError, "config: top level must be an object");

  ModelConfig c;
  try {
    for (const auto& [key, value] : j.items()) {
      if (key != "response" && key != "terms" && key != "intercept" && key != "estimators") {
        fail(ErrorCode::ParseError, "config: unknown key '" + key + "'");
      }
    }
    if (!j.contains("response")) fail(ErrorCode::ParseError, "config: missing 'response'");
    c.response = j.at("response").get<std::string>();
    if (j.contains("intercept")) c.intercept = j.at("intercept").get<bool>();
    if (j.contains("terms")) {
      for (const auto& t : j.at("terms")) {
        if (t.is_string()) {
          c.terms.push_back({t.get<std::string>(), 1});
        } else if (t.is_object()) {
          ModelTerm term{t.at("column").get<std::string>(), 1};
          if (t.contains("power")) term.power = t.at("power").get<int>();
          c.terms.push_back(term);
        } else {
          fail(ErrorCode::ParseError, "config: each term must be a string or an object");
        }
      }
    }
    if (j.contains("estimators")) {
      const auto& e = j.at("estimators");
      std::string list;
      if (e.is_string()) {
        list = e.get<std::string>();
      } else {
        for (const auto& item : e) list += item.get<std::string>() + ",";
      }
      c.estimators = parse_kind_list(list);
    }
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

ModelConfig load_model_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_model_config(buf.str());
}

std::pair<DesignMatrix, Vector> build_design(const Table& table, const ModelConfig& config) {
  config.validate();
  const auto* response = table.find(config.response);
  if (!response) fail(ErrorCode::MissingColumn, "no column named '" + config.response + "'");
  const auto n = static_cast<Eigen::Index>(table.rows());
  const auto p = static_cast<Eigen::Index>(config.terms.size()) + (config.intercept ? 1 : 0);

  DesignMatrix d;
  d.intercept = config.intercept;
  d.values.resize(n, p);
  Eigen::Index col = 0;
  if (config.intercept) {
    d.values.col(col++).setOnes();
    d.columns.emplace_back("(intercept)");
  }
  for (const auto& term : config.terms) {
    const auto* source = table.find(term.column);
    if (!source) fail(ErrorCode::MissingColumn, "no column named '" + term.column + "'");
    for (Eigen::Index i = 0; i < n; ++i) {
      const double base = (*source)[static_cast<std::size_t>(i)];
      double v = base;
      for (int k = 1; k < term.power; ++k) v *= base;
      d.values(i, col) = v;
    }
    const auto c = d.values.col(col);
    if ((c.array() == c(0)).all()) {
      fail(ErrorCode::ConstantColumn, "term '" + term.label() + "' is constant");
    }
    d.columns.push_back(term.label());
    ++col;
  }
  Vector y = Eigen::Map<const Vector>(response->data(), n);
  return {std::move(d), std::move(y)};
}

ScenarioFile parse_scenario(std::string_view json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::ParseError, std::string("scenario: ") + e.what());
  }
  ScenarioFile f;
  SimScenario& s = f.scenario;
  try {
    s.n = j.at("n").get<std::size_t>();
    s.p = j.value("p", std::size_t{1});
    s.seed = j.value("seed", std::uint64_t{0});
    if (j.contains("beta")) {
      const auto beta = j.at("beta").get<std::vector<double>>();
      s.beta = Eigen::Map<const Vector>(beta.data(), static_cast<Eigen::Index>(beta.size()));
    }
    if (j.contains("variance")) {
      const auto& v = j.at("variance");
      const auto kind = v.at("kind").get<std::string>();
      if (kind == "const") {
        s.variance = VariancePattern::constant(v.value("sigma2", 1.0));
      } else if (kind == "exp_linear") {
        s.variance = VariancePattern::exp_linear(v.at("gamma").get<std::vector<double>>());
      } else if (kind == "step") {
        s.variance = VariancePattern::step(v.at("sigma2_a").get<double>(), v.at("sigma2_b").get<double>(),
                                           v.value("split", 0.5));
      } else {
        fail(ErrorCode::ParseError, "scenario: unknown variance kind '" + kind + "'");
      }
    }
    if (j.contains("design")) {
      const auto& d = j.at("design");
      const auto kind = d.at("kind").get<std::string>();
      if (kind == "iid_normal") {
        s.design = DesignKind::iid_normal();
      } else if (kind == "with_leverage") {
        s.design = DesignKind::with_leverage(d.at("outliers").get<std::size_t>(), d.at("magnitude").get<double>());
      } else {
        fail(ErrorCode::ParseError, "scenario: unknown design kind '" + kind + "'");
      }
    }
    if (j.contains("edf_grid")) f.edf_grid = j.at("edf_grid").get<std::vector<double>>();
    f.replications = j.value("replications", std::size_t{0});
  } catch (const json::exception& e) {
    fail(ErrorCode::ParseError, std::string("scenario: ") + e.what());
  }
  s.validate();
  return f;
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace pcares

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "pcares/error.hpp"
#include "pcares/report.hpp"

namespace pcares {

namespace fs = std::filesystem;

std::string qq_csv(const QqData& qq) {
  std::string out = "theoretical,sample\n";
  for (const auto& pt : qq.points) {
    out += format_double(pt.theoretical);
    out += ',';
    out += format_double(pt.sample);
    out += '\n';
  }
  return out;
}

std::string index_csv(const std::vector<IndexPoint>& points) {
  std::string out = "index,value\n";
  for (const auto& pt : points) {
    out += std::to_string(pt.index);
    out += ',';
    out += format_double(pt.value);
    out += '\n';
  }
  return out;
}

std::string qq_svg(const QqData& qq, const std::string& title) {
  constexpr double kSize = 480.0;
  constexpr double kMargin = 40.0;
  double lo = 0.0;
  double hi = 0.0;
  bool first = true;
  for (const auto& pt : qq.points) {
    for (double v : {pt.theoretical, pt.sample}) {
      if (!std::isfinite(v)) continue;
      lo = first ? v : std::min(lo, v);
      hi = first ? v : std::max(hi, v);
      first = false;
    }
  }
  if (hi - lo < 1e-12) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double pad = 0.05 * (hi - lo);
  lo -= pad;
  hi += pad;
  const double span = kSize - 2.0 * kMargin;
  auto sx = [&](double v) { return kMargin + (v - lo) / (hi - lo) * span; };
  auto sy = [&](double v) { return kSize - kMargin - (v - lo) / (hi - lo) * span; };
  auto fmt = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return std::string(buf);
  };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kSize << "\" height=\"" << kSize
    << "\" viewBox=\"0 0 " << kSize << ' ' << kSize << "\">\n";
  s << "<title>" << title << "</title>\n";
  s << "<rect x=\"" << kMargin << "\" y=\"" << kMargin << "\" width=\"" << span << "\" height=\"" << span
    << "\" fill=\"white\" stroke=\"black\"/>\n";
  s << "<line x1=\"" << fmt(sx(lo)) << "\" y1=\"" << fmt(sy(lo)) << "\" x2=\"" << fmt(sx(hi))
    << "\" y2=\"" << fmt(sy(hi)) << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  for (const auto& pt : qq.points) {
    if (!std::isfinite(pt.theoretical) || !std::isfinite(pt.sample)) continue;
    s << "<circle cx=\"" << fmt(sx(pt.theoretical)) << "\" cy=\"" << fmt(sy(pt.sample))
      << "\" r=\"2.5\" fill=\"steelblue\"/>\n";
  }
  s << "<text x=\"" << kSize / 2 << "\" y=\"" << kSize - 8 << "\" text-anchor=\"middle\" font-size=\"12\">"
    << (qq.reference.kind == QqReference::Kind::StudentT ? "Student t quantiles" : "normal quantiles")
    << "</text>\n";
  s << "<text x=\"12\" y=\"" << kSize / 2 << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 12 "
    << kSize / 2 << ")\">sample quantiles</text>\n";
  s << "</svg>\n";
  return s.str();
}

namespace {

void write_file(const fs::path& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write '" + path.string() + "'");
  out << body;
  out.close();
  if (!out) fail(ErrorCode::IoError, "error writing '" + path.string() + "'");
}

bool wants(const std::vector<OutputFormat>& formats, OutputFormat f) {
  return std::find(formats.begin(), formats.end(), f) != formats.end();
}

}  // namespace

std::vector<fs::path> emit(const DiagnosticsReport& report, const fs::path& outdir,
                           const std::vector<OutputFormat>& formats) {
  std::error_code ec;
  fs::create_directories(outdir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create '" + outdir.string() + "': " + ec.message());

  std::vector<fs::path> written;
  if (wants(formats, OutputFormat::Json)) {
    written.push_back(outdir / "report.json");
    write_file(written.back(), report_json(report));
  }
  for (const auto& block : report.blocks) {
    const std::string kind(to_string(block.kind));
    if (wants(formats, OutputFormat::Csv)) {
      written.push_back(outdir / ("qq_" + kind + ".csv"));
      write_file(written.back(), block.qq ? qq_csv(*block.qq) : qq_csv(QqData{}));
      written.push_back(outdir / ("index_" + kind + ".csv"));
      write_file(written.back(), index_csv(block.index_plot));
    }
    if (wants(formats, OutputFormat::Svg) && block.qq) {
      written.push_back(outdir / ("qq_" + kind + ".svg"));
      write_file(written.back(), qq_svg(*block.qq, "Q-Q plot, " + kind + " PCA residuals"));
    }
  }
  return written;
}

std::vector<QqPoint> read_qq_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  std::vector<QqPoint> out;
  const Table t = parse_csv(text, path.string(), 0);
  const auto* theo = t.find("theoretical");
  const auto* samp = t.find("sample");
  if (!theo || !samp) fail(ErrorCode::MissingColumn, "Q-Q csv needs theoretical,sample columns");
  for (std::size_t i = 0; i < t.rows(); ++i) out.push_back({(*theo)[i], (*samp)[i]});
  return out;
}

}  // namespace pcares

#include "pcares/robust_cov.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

#include "pcares/error.hpp"

namespace pcares {

std::string_view to_string(CovKind kind) {
  switch (kind) {
    case CovKind::Homo: return "homo";
    case CovKind::HC0: return "hc0";
    case CovKind::HC1: return "hc1";
    case CovKind::HC2: return "hc2";
    case CovKind::HC3: return "hc3";
    case CovKind::HC4: return "hc4";
  }
  return "unknown";
}

std::optional<CovKind> parse_kind(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (CovKind k : kAllKinds) {
    if (lower == to_string(k)) return k;
  }
  return std::nullopt;
}

std::vector<CovKind> parse_kind_list(std::string_view text) {
  std::vector<bool> wanted(std::size(kAllKinds), false);
  auto index_of = [](CovKind k) { return static_cast<std::size_t>(k); };
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    if (comma == std::string_view::npos) comma = text.size();
    std::string_view item = text.substr(start, comma - start);
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.front()))) item.remove_prefix(1);
    while (!item.empty() && std::isspace(static_cast<unsigned char>(item.back()))) item.remove_suffix(1);
    if (!item.empty()) {
      if (const auto dots = item.find(".."); dots != std::string_view::npos) {
        auto lo = parse_kind(item.substr(0, dots));
        std::string_view hi_text = item.substr(dots + 2);
        auto hi = parse_kind(hi_text);
        // "hc0..4" shorthand
        if (!hi && lo && hi_text.size() == 1) hi = parse_kind("hc" + std::string(hi_text));
        if (!lo || !hi || *lo == CovKind::Homo || *hi == CovKind::Homo || *hi < *lo) {
          fail(ErrorCode::InvalidArgument, "bad estimator range '" + std::string(item) + "'");
        }
        for (auto k = index_of(*lo); k <= index_of(*hi); ++k) wanted[k] = true;
      } else {
        auto k = parse_kind(item);
        if (!k) fail(ErrorCode::InvalidArgument, "unknown estimator '" + std::string(item) + "'");
        wanted[index_of(*k)] = true;
      }
    }
    start = comma + 1;
  }
  std::vector<CovKind> out;
  for (CovKind k : kAllKinds) {
    if (wanted[index_of(k)]) out.push_back(k);
  }
  if (out.empty()) fail(ErrorCode::InvalidArgument, "no estimator selected");
  return out;
}

OmegaEstimate OmegaEstimate::from_variances(const Vector& variances, CovKind kind) {
  OmegaEstimate o;
  o.kind = kind;
  o.base = variances;
  o.adjust = Vector::Ones(variances.size());
  o.diag = variances;
  return o;
}

bool OmegaEstimate::uniform_adjust() const {
  return adjust.size() == 0 || (adjust.array() == adjust(0)).all();
}

double hc4_delta(double leverage, Eigen::Index n, Eigen::Index p) {
  return std::min(4.0, static_cast<double>(n) * leverage / static_cast<double>(p));
}

OmegaEstimate omega_hat(const FitResult& fit, CovKind kind) {
  const Eigen::Index n = fit.n;
  const Eigen::Index p = fit.p;
  OmegaEstimate o;
  o.kind = kind;

  if (kind == CovKind::Homo) {
    o.base = Vector::Constant(n, fit.sigma2_hat);
    o.adjust = Vector::Ones(n);
    o.diag = o.base;
    return o;
  }

  o.base = fit.resid.cwiseAbs2();
  o.adjust.resize(n);
  if (kind == CovKind::HC2 || kind == CovKind::HC3 || kind == CovKind::HC4) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (1.0 - fit.leverage(i) <= kLeverageOneTol) {
        fail(ErrorCode::LeverageOne, "observation " + std::to_string(i + 1) +
                                         " has leverage 1; " + std::string(to_string(kind)) +
                                         " is undefined");
      }
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    const double one_minus_h = 1.0 - fit.leverage(i);
    switch (kind) {
      case CovKind::HC0: o.adjust(i) = 1.0; break;
      case CovKind::HC1: o.adjust(i) = static_cast<double>(n) / static_cast<double>(n - p); break;
      case CovKind::HC2: o.adjust(i) = 1.0 / one_minus_h; break;
      case CovKind::HC3: o.adjust(i) = 1.0 / (one_minus_h * one_minus_h); break;
      case CovKind::HC4:
        o.adjust(i) = 1.0 / std::pow(one_minus_h, hc4_delta(fit.leverage(i), n, p));
        break;
      case CovKind::Homo: break;
    }
  }
  o.diag = o.adjust.cwiseProduct(o.base);
  return o;
}

HcCovariance hc_cov(const DesignMatrix& x, const OmegaEstimate& omega) {
  if (omega.diag.size() != x.n()) {
    fail(ErrorCode::InvalidArgument, "omega has " + std::to_string(omega.diag.size()) +
                                         " entries, design has " + std::to_string(x.n()) + " rows");
  }
  const OrthogonalFactor f = orthogonal_factor(x.values);
  // P = (X^T X)^{-1} X^T = R^{-1} Q^T
  const Matrix pt = f.r.triangularView<Eigen::Upper>().solve(f.q.transpose());

  // Uniform adjustments are applied as a scalar after the sandwich, so HC1
  // is exactly n/(n-p) times HC0.
  const bool scalar = omega.uniform_adjust() && omega.base.size() == omega.diag.size();
  const Vector& middle = scalar ? omega.base : omega.diag;
  Matrix m = pt * middle.asDiagonal() * pt.transpose();
  m = (0.5 * (m + m.transpose())).eval();
  if (scalar && omega.adjust.size() > 0 && omega.adjust(0) != 1.0) m *= omega.adjust(0);
  return {omega.kind, std::move(m)};
}

}  // namespace pcares

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include <boost/math/distributions/normal.hpp>

#include "pcares/diagnostics.hpp"
#include "pcares/distributions.hpp"
#include "pcares/error.hpp"
#include "pcares/rng.hpp"

using namespace pcares;

namespace {

PcaResiduals residuals_of(std::vector<double> values, Eigen::Index p = 0) {
  PcaResiduals r;
  r.raw = Vector::Zero(static_cast<Eigen::Index>(values.size()) + p);
  for (std::size_t i = 0; i < values.size(); ++i) r.raw(static_cast<Eigen::Index>(i)) = values[i];
  r.n = r.raw.size();
  r.p = p;
  return r;
}

// Printed covariance formula, written out with Boost's N(0, sigma) law.
double theorem1_oracle(double t1, double t2, double sigma) {
  const boost::math::normal_distribution<double> law(0.0, sigma);
  const double q1 = boost::math::quantile(law, t1);
  const double q2 = boost::math::quantile(law, t2);
  const double a = q1 * q2 * boost::math::pdf(law, q1) * boost::math::pdf(law, q2);
  return std::min(t1, t2) - t1 * t2 - 2.0 * sigma * a + 2.0 * sigma * sigma * a;
}

double correction(double t1, double t2, double sigma) {
  const boost::math::normal_distribution<double> law(0.0, sigma);
  const double q1 = boost::math::quantile(law, t1);
  const double q2 = boost::math::quantile(law, t2);
  const double a = q1 * q2 * boost::math::pdf(law, q1) * boost::math::pdf(law, q2);
  return std::abs(2.0 * sigma * a) + std::abs(2.0 * sigma * sigma * a);
}

std::vector<double> normal_sample(std::size_t m, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> x(m);
  for (double& v : x) v = rng.normal();
  return x;
}

// Test-side Lilliefors: critical value from its own simulation.
double lilliefors_stat_oracle(std::vector<double> x) {
  const double m = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= m;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / (m - 1.0));
  std::sort(x.begin(), x.end());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double f = 0.5 * std::erfc(-(x[i] - mean) / sd / std::sqrt(2.0));
    d = std::max({d, (static_cast<double>(i) + 1.0) / m - f, f - static_cast<double>(i) / m});
  }
  return d;
}

}  // namespace

TEST_CASE("edf: closed forms") {
  const EdfCurve one = edf(residuals_of({0.0}));
  CHECK(one(-1.0) == 0.0);
  CHECK(one(0.0) == 1.0);
  const EdfCurve three = edf(residuals_of({3.0, 1.0, 2.0}, 2));
  CHECK(three.size() == 3);
  CHECK(three(2.0) == doctest::Approx(2.0 / 3.0));
  CHECK(three(1.999999) == doctest::Approx(1.0 / 3.0));
  CHECK(three(10.0) == 1.0);
  CHECK_THROWS_AS(edf(residuals_of({}, 2)), Error);
}

TEST_CASE("edf: counting oracle on a seeded sample") {
  const std::vector<double> x = normal_sample(137, 4);
  const EdfCurve f = edf(residuals_of(x, 3));
  double previous = 0.0;
  for (double t = -4.0; t <= 4.0; t += 0.01) {
    const double count = static_cast<double>(std::count_if(x.begin(), x.end(), [t](double v) { return v <= t; }));
    CHECK(f(t) == count / 137.0);
    CHECK(f(t) >= previous);
    previous = f(t);
  }
  // Right-continuous: the jump is attained at each data point.
  for (double v : x) CHECK(f(v) > f(std::nextafter(v, -1e300)));
}

TEST_CASE("theorem1_cov: median value and symmetry") {
  for (double sigma : {0.5, 1.0, 2.0}) CHECK(theorem1_cov(0.5, 0.5, sigma) == 0.25);
  const double grid[] = {0.1, 0.25, 0.5, 0.75, 0.9};
  for (double sigma : {0.5, 1.0, 2.0}) {
    for (double t1 : grid) {
      for (double t2 : grid) {
        CHECK(std::abs(theorem1_cov(t1, t2, sigma) - theorem1_cov(t2, t1, sigma)) <= 1e-14);
        CHECK(theorem1_cov(t1, t2, sigma) == doctest::Approx(theorem1_oracle(t1, t2, sigma)).epsilon(1e-12));
      }
    }
  }
  CHECK(theorem1_cov(0.3, 0.7, 1.0) == theorem1_cov(0.7, 0.3, 1.0));
}

TEST_CASE("theorem1_cov: bounds and boundary limits") {
  for (double sigma : {0.5, 1.0, 3.0}) {
    for (double t = 0.05; t < 1.0; t += 0.05) {
      CHECK(theorem1_cov(t, t, sigma) <= t * (1.0 - t) + correction(t, t, sigma) + 1e-15);
    }
    for (double t : {1e-6, 1.0 - 1e-6}) CHECK(std::abs(theorem1_cov(t, t, sigma)) <= 1e-3);
  }
  for (double bad : {0.0, 1.0, -0.2, 1.5}) {
    try {
      theorem1_cov(bad, 0.5, 1.0);
      FAIL("expected DomainError");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::DomainError);
    }
  }
  CHECK_THROWS_AS(theorem1_cov(0.5, 0.5, 0.0), Error);
}

TEST_CASE("ks_test: closed forms") {
  const std::size_t m = 40;
  std::vector<double> x;
  for (std::size_t i = 1; i <= m; ++i) x.push_back(dist::normal_quantile((static_cast<double>(i) - 0.5) / m));
  const TestResult r = ks_test(x, dist::normal_cdf);
  CHECK(r.statistic == doctest::Approx(0.5 / m).epsilon(1e-12));
  CHECK(r.n_effective == m);
  CHECK(r.method == TestMethod::KsKnown);
  CHECK(r.p_value == doctest::Approx(1.0));

  const std::vector<double> one{0.0};
  CHECK(ks_test(one, dist::normal_cdf).statistic == 0.5);
  CHECK_THROWS_AS(ks_test(std::vector<double>{}, dist::normal_cdf), Error);
}

TEST_CASE("ks_test: invariant under a common increasing transform") {
  const std::vector<double> x = normal_sample(80, 9);
  std::vector<double> y;
  for (double v : x) y.push_back(std::exp(v));
  const double a = ks_test(x, dist::normal_cdf).statistic;
  const double b = ks_test(y, [](double v) { return dist::normal_cdf(std::log(v)); }).statistic;
  CHECK(a == doctest::Approx(b).epsilon(1e-12));
}

TEST_CASE("ks_test: calibration, 500 seeded samples of 200") {
  int accepted = 0;
  for (std::uint64_t run = 0; run < 500; ++run) {
    const std::vector<double> x = normal_sample(200, 1000 + run);
    if (ks_test(x, dist::normal_cdf).p_value > 0.01) ++accepted;
  }
  MESSAGE("p > 0.01 in " << accepted << " of 500 runs");
  CHECK(accepted >= 495);
}

TEST_CASE("ks_test: size at the 1% and 5% levels over 20000 samples") {
  const int runs = 20000;
  int at1 = 0;
  int at5 = 0;
  for (int run = 0; run < runs; ++run) {
    const TestResult r = ks_test(normal_sample(200, 0xCA11B + static_cast<std::uint64_t>(run)), dist::normal_cdf);
    at1 += r.p_value <= 0.01;
    at5 += r.p_value <= 0.05;
  }
  const double r1 = at1 / static_cast<double>(runs);
  const double r5 = at5 / static_cast<double>(runs);
  MESSAGE("rejection rates " << r1 << " and " << r5);
  CHECK(std::abs(r1 - 0.01) <= 4.0 * std::sqrt(0.01 * 0.99 / runs));
  CHECK(std::abs(r5 - 0.05) <= 4.0 * std::sqrt(0.05 * 0.95 / runs));
}

TEST_CASE("lilliefors_test: best case and definitional statistic") {
  std::vector<double> x;
  for (int i = 1; i <= 30; ++i) x.push_back(3.0 + 2.0 * dist::normal_quantile((i - 0.5) / 30.0));
  const TestResult best = lilliefors_test(x);
  CHECK(best.method == TestMethod::Lilliefors);
  CHECK(best.statistic < 0.05);
  CHECK(best.p_value > 0.5);

  const std::vector<double> y = normal_sample(57, 5);
  double mean = 0.0;
  for (double v : y) mean += v;
  mean /= 57.0;
  double ss = 0.0;
  for (double v : y) ss += (v - mean) * (v - mean);
  const double sd = std::sqrt(ss / 56.0);
  const double ks = ks_test(y, [&](double v) { return dist::normal_cdf((v - mean) / sd); }).statistic;
  CHECK(lilliefors_test(y).statistic == ks);
  CHECK(lilliefors_test(y).statistic == doctest::Approx(lilliefors_stat_oracle(y)).epsilon(1e-12));

  CHECK_THROWS_AS(lilliefors_test(std::vector<double>{1, 2, 3, 4}), Error);
  const TestResult flat = lilliefors_test(std::vector<double>(6, 2.0));
  CHECK(flat.p_value == 0.0);
}

TEST_CASE("lilliefors_test: null p-values are roughly uniform") {
  int below = 0;
  for (std::uint64_t run = 0; run < 400; ++run) below += lilliefors_test(normal_sample(40, 777 + run)).p_value <= 0.1;
  CHECK(below >= 24);
  CHECK(below <= 56);
}

TEST_CASE("lilliefors_test: power against Uniform(0,1), m = 100") {
  // Oracle: critical value from an independent simulation with std::normal_distribution.
  std::mt19937_64 gen(123);
  std::normal_distribution<double> nd;
  std::vector<double> null_stats;
  for (int r = 0; r < 4000; ++r) {
    std::vector<double> z(100);
    for (double& v : z) v = nd(gen);
    null_stats.push_back(lilliefors_stat_oracle(z));
  }
  std::sort(null_stats.begin(), null_stats.end());
  const double critical = null_stats[static_cast<std::size_t>(0.95 * null_stats.size())];

  const int draws = 400;
  int rejected = 0;
  int oracle_rejected = 0;
  std::uniform_real_distribution<double> ud;
  for (int r = 0; r < draws; ++r) {
    std::vector<double> u(100);
    for (double& v : u) v = ud(gen);
    rejected += lilliefors_test(u).p_value <= 0.05;
    oracle_rejected += lilliefors_stat_oracle(u) > critical;
  }
  const double power = rejected / static_cast<double>(draws);
  MESSAGE("power " << power << ", oracle " << oracle_rejected / static_cast<double>(draws));
  CHECK(power > 0.5);
  CHECK(std::abs(rejected - oracle_rejected) <= 0.05 * draws);
}

TEST_CASE("lilliefors_test: concurrent first use builds one table") {
  const std::vector<double> x = normal_sample(73, 3);
  std::vector<double> p(8);
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < p.size(); ++i) {
    pool.emplace_back([&, i] { p[i] = lilliefors_test(x, 0xBEEF).p_value; });
  }
  for (auto& t : pool) t.join();
  for (double v : p) CHECK(v == p[0]);
}

TEST_CASE("qq_data") {
  const std::vector<double> one{4.2};
  const QqData a = qq_data(one, QqReference::std_normal());
  REQUIRE(a.points.size() == 1);
  CHECK(a.points[0].theoretical == 0.0);
  CHECK(a.points[0].sample == 4.2);

  CHECK(QqReference::student_t(1.0).quantile(0.75) == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(plotting_position(3, 4) == 0.625);

  const std::vector<double> x = normal_sample(48, 48);
  const QqData q = qq_data(x, QqReference::student_t(48.0));
  CHECK(q.points.size() == 48);
  for (std::size_t i = 1; i < q.points.size(); ++i) {
    CHECK(q.points[i].theoretical >= q.points[i - 1].theoretical);
    CHECK(q.points[i].sample >= q.points[i - 1].sample);
  }
  CHECK(q.points[10].theoretical == dist::student_t_quantile(10.5 / 48.0, 48.0));

  CHECK_THROWS_AS(qq_data(std::vector<double>{}, QqReference::std_normal()), Error);
  try {
    qq_data(x, QqReference::student_t(0.5));
    FAIL("expected BadDf");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::BadDf);
  }
}

TEST_CASE("index_plot_data") {
  PcaResiduals r = residuals_of({1.0, -2.0}, 1);
  r.standardized = {1.0, -2.0};
  auto pts = index_plot_data(r);
  REQUIRE(pts.size() == 2);
  CHECK(pts[0].index == 1);
  CHECK(pts[0].value == 1.0);
  CHECK(pts[1].index == 2);
  CHECK(pts[1].value == -2.0);

  r = residuals_of({1.0, 5.0, 3.0});
  r.standardized = {0.5, std::nullopt, 1.5};
  pts = index_plot_data(r);
  REQUIRE(pts.size() == 2);
  CHECK(pts[1].index == 3);
  CHECK(pts[1].value == 1.5);

  CHECK_THROWS_AS(index_plot_data(residuals_of({1.0})), Error);
}

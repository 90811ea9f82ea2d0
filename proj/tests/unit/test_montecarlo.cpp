#include <doctest.h>

#include "lrca/error.hpp"
#include "lrca/montecarlo.hpp"
#include "lrca/rng.hpp"
#include "oracles.hpp"

#include <cmath>
#include <set>
#include <sstream>

using namespace lrca;
using lrca::testing::throws_kind;

TEST_CASE("replication seeds are deterministic and distinct") {
  CHECK(replication_seed(7, 3) == replication_seed(7, 3));
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i) seen.insert(replication_seed(20240611, i));
  CHECK(seen.size() == 10000);
}

TEST_CASE("neighbouring streams are uncorrelated") {
  RngStream a(replication_seed(0, 0));
  RngStream b(replication_seed(0, 1));
  const int n = 10000;
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  for (int i = 0; i < n; ++i) {
    const double x = a.uniform();
    const double y = b.uniform();
    CHECK((x > 0.0 && x < 1.0));
    sa += x; sb += y; saa += x * x; sbb += y * y; sab += x * y;
  }
  const double cov = sab / n - (sa / n) * (sb / n);
  const double rho = cov / std::sqrt((saa / n - sa * sa / n / n) * (sbb / n - sb * sb / n / n));
  CHECK(std::abs(rho) < 0.05);
}

TEST_CASE("level experiment is reproducible and independent of worker count") {
  ExperimentConfig c;
  c.dgp = "DGP1";
  c.n = 250;
  c.replications = 60;
  c.workers = 1;
  const StatisticDraws one = simulate_statistics(c);
  c.workers = 4;
  const StatisticDraws four = simulate_statistics(c);
  CHECK(one.statistics.rows() == 60);
  // Bitwise equality, including NaN placement.
  for (Eigen::Index i = 0; i < one.statistics.rows(); ++i) {
    for (Eigen::Index j = 0; j < one.statistics.cols(); ++j) {
      const double a = one.statistics(i, j);
      const double b = four.statistics(i, j);
      CHECK(((std::isnan(a) && std::isnan(b)) || a == b));
    }
  }
  std::ostringstream x, y;
  write_csv(x, tabulate(c, one));
  write_csv(y, run_level_experiment(c));
  CHECK(x.str() == y.str());
  c.master_seed += 1;
  std::ostringstream z;
  write_csv(z, run_level_experiment(c));
  CHECK(z.str() != x.str());
}

TEST_CASE("rejection table CSV round trip and markdown") {
  ExperimentConfig c;
  c.dgp = "DGP2";
  c.n = 250;
  c.replications = 40;
  c.tests = {TestKind::LRCa, TestKind::Ca, TestKind::LR};
  const RejectionTable t = run_level_experiment(c);
  CHECK(t.rows.size() == 6);
  std::stringstream s;
  write_csv(s, t);
  CHECK(s.str().rfind("dgp,n,test,level,rate,failures\n", 0) == 0);
  const RejectionTable back = read_rejection_csv(s);
  CHECK(back.rows == t.rows);
  std::ostringstream md;
  write_markdown(md, t);
  CHECK(md.str().find("| DGP2 |") != std::string::npos);
  for (const auto& row : t.rows) CHECK((row.rate >= 0.0 && row.rate <= 1.0));
  CHECK(throws_kind(ErrorKind::ConfigInvalid, [&] { (void)t.rate("LM", 0.05); }));
  std::istringstream bad("dgp,n,test\n");
  CHECK(throws_kind(ErrorKind::InvalidData, [&] { read_rejection_csv(bad); }));
}

TEST_CASE("rates at a vanishing level are zero") {
  ExperimentConfig c;
  c.dgp = "DGP1";
  c.n = 250;
  c.replications = 30;
  c.levels = {1e-12};
  for (const auto& row : run_level_experiment(c).rows) CHECK(row.rate == 0.0);
}

TEST_CASE("config validation") {
  ExperimentConfig c;
  c.dgp = "DGP9";
  CHECK(throws_kind(ErrorKind::ConfigInvalid, [&] { c.validate(); }));
  c.dgp = "DGP1";
  c.replications = 0;
  CHECK(throws_kind(ErrorKind::ConfigInvalid, [&] { c.validate(); }));
  c.replications = 10;
  c.levels = {1.5};
  CHECK(throws_kind(ErrorKind::ConfigInvalid, [&] { c.validate(); }));
  c.levels = {0.05};
  c.parameters = Vector::Constant(3, 0.5);
  c.parameters.value()[1] = 0.7;
  CHECK(throws_kind(ErrorKind::ConfigInvalid, [&] { c.validate(); }));
  c.parameters.reset();
  c.dgp = "quadratic";
  c.tests = {TestKind::LRCa2};
  CHECK(throws_kind(ErrorKind::ConfigInvalid, [&] { c.validate(); }));
  CHECK(throws_kind(ErrorKind::ConfigInvalid, [] { parse_test_kind("XYZ"); }));
  for (TestKind k : {TestKind::LRCa, TestKind::LRCa2, TestKind::Ca, TestKind::Ca2, TestKind::LR, TestKind::LM,
                     TestKind::Wald}) {
    CHECK(parse_test_kind(to_string(k)) == k);
  }
}

TEST_CASE("built-in identity self-check never fires") {
  for (const char* dgp : {"DGP1", "DGP4", "weibull-size", "quadratic"}) {
    ExperimentConfig c;
    c.dgp = dgp;
    c.n = 250;
    c.replications = 40;
    c.check_identity = true;
    const StatisticDraws d = simulate_statistics(c);
    CHECK(d.identity_violations == 0);
    CHECK(d.failures() <= 1);
  }
}

TEST_CASE("weibull without the shape restriction: LM equals C_alpha per replication") {
  ExperimentConfig c;
  c.dgp = "weibull-size";
  c.n = 250;
  c.replications = 100;
  c.shape_restricted = false;
  c.tests = {TestKind::LM, TestKind::Ca};
  const StatisticDraws d = simulate_statistics(c);
  for (Eigen::Index i = 0; i < d.statistics.rows(); ++i) {
    if (d.failed[static_cast<std::size_t>(i)]) continue;
    CHECK(lrca::testing::relative_error(d.statistics(i, 0), d.statistics(i, 1)) <= 1e-6);
  }
}

TEST_CASE("power grid helpers") {
  const auto g = linear_grid(-8.0, -2.0, 0.1);
  CHECK(g.size() == 61);
  CHECK(g.front() == -8.0);
  CHECK(std::abs(g.back() + 2.0) < 1e-12);
  CHECK(std::abs(g[30] + 5.0) < 1e-12);
  ExperimentConfig c;
  c.dgp = "weibull-power";
  c.n = 100;
  c.replications = 10;
  CHECK(throws_kind(ErrorKind::ConfigInvalid, [&] { run_power_experiment(c, {}); }));
  CHECK(throws_kind(ErrorKind::ConfigInvalid, [&] { run_power_experiment(c, {-3.0, -4.0}); }));
  c.dgp = "DGP1";
  CHECK(throws_kind(ErrorKind::ConfigInvalid, [&] { run_power_experiment(c, {-3.0}); }));
}

TEST_CASE("power curve at far alternatives") {
  ExperimentConfig c;
  c.dgp = "weibull-power";
  c.n = 400;
  c.replications = 100;
  c.levels = {0.05};
  c.tests = {TestKind::LRCa};
  const PowerCurve pc = run_power_experiment(c, {-8.0, -5.0, -2.0});
  CHECK(pc.rates[0][0][0] > 0.95);
  CHECK(pc.rates[0][0][2] > 0.95);
  CHECK(pc.rates[0][0][1] < 0.15);
  std::ostringstream csv, plot;
  write_csv(csv, pc);
  write_plot_csv(plot, pc);
  CHECK(csv.str().rfind("grid,test,level,rate,failures\n", 0) == 0);
  CHECK(plot.str().rfind("grid,test,rate\n", 0) == 0);
}

TEST_CASE("empirical quantile and KS distance") {
  CHECK(empirical_quantile({1.0, 2.0, 3.0, 4.0}, 0.5) == 2.5);
  CHECK(empirical_quantile({5.0, 1.0, 3.0}, 0.0) == 1.0);
  CHECK(empirical_quantile({5.0, 1.0, 3.0}, 1.0) == 5.0);
  // Exact quantiles of chi2_2 at the midpoints of n equal cells.
  std::vector<double> exact;
  for (int i = 0; i < 1000; ++i) exact.push_back(chi2_quantile(2, (i + 0.5) / 1000.0));
  CHECK(std::abs(ks_distance_chi2(exact, 2) - 0.0005) < 1e-9);
  CHECK(ks_distance_chi2(exact, 6) > 0.3);
}

TEST_CASE("null calibration of the quadratic model and its df negative control") {
  ExperimentConfig c;
  c.dgp = "quadratic";
  c.n = 500;
  c.replications = 1000;
  const CalibrationSummary s = null_calibration(c, TestKind::LRCa);
  CHECK(s.within_band);
  CHECK(s.ks_band == doctest::Approx(1.36 / std::sqrt(1000.0)));
  const CalibrationSummary wrong = null_calibration(c, TestKind::LRCa, 4);
  CHECK_FALSE(wrong.within_band);
  CHECK(wrong.df == 4);
}

TEST_CASE("ARCH DGP2 null 95th percentile of LRCa") {
  ExperimentConfig c;
  c.dgp = "DGP2";
  c.n = 1000;
  c.replications = 2000;
  c.tests = {TestKind::LRCa};
  const CalibrationSummary s = null_calibration(c, TestKind::LRCa);
  CHECK(s.failures < 40);
  CHECK(std::abs(s.empirical_quantiles[1] / 3.8415 - 1.0) < 0.15);
}

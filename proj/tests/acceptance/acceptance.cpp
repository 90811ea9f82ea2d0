// One line per acceptance criterion; exit status 1 if any criterion fails.

#include "lrca/cli/cli.hpp"
#include "lrca/error.hpp"
#include "lrca/inference.hpp"
#include "lrca/models/arch.hpp"
#include "lrca/models/error_components.hpp"
#include "lrca/models/weibull.hpp"
#include "lrca/montecarlo.hpp"
#include "lrca/rng.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>

using namespace lrca;
using lrca::testing::random_evaluation;
using lrca::testing::random_vector;
using lrca::testing::relative_error;

namespace {

enum class Verdict { Pass, Fail, Skip };

struct Outcome {
  Verdict verdict = Verdict::Fail;
  std::string detail;
};

int failures = 0;

void report(int id, const char* title, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {Verdict::Fail, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const char* tag = o.verdict == Verdict::Pass ? "PASS" : o.verdict == Verdict::Fail ? "FAIL" : "SKIP";
  if (o.verdict == Verdict::Fail) ++failures;
  std::printf("%s criterion %d: %s | %s | %.1fs\n", tag, id, title, o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double elapsed_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Matrix random_rows(std::mt19937_64& rng, Eigen::Index q, Eigen::Index d) {
  Matrix m(q, d);
  for (Eigen::Index i = 0; i < q; ++i) m.row(i) = random_vector(rng, d).transpose();
  return m;
}

// --- 1 ---------------------------------------------------------------------

Outcome identities() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  const int instances = 200;
  double worst[4] = {0, 0, 0, 0};
  for (int rep = 0; rep < instances; ++rep) {
    const Eigen::Index d = 2 + rep % 4;
    const Eigen::Index q = 1 + rep % (d - 1);
    const std::size_t n = 50 + static_cast<std::size_t>(rep);

    // I1: the same evaluation in both slots.
    const CriterionEvaluation e = random_evaluation(rng, d, n);
    const Matrix rm = random_rows(rng, q, d);
    const Restriction r1 = Restriction::linear(rm, rm * e.point);
    worst[0] = std::max(worst[0], relative_error(lrc_alpha(e, e, r1, 0.05).raw_statistic,
                                                 c_alpha(e, r1, 0.05).raw_statistic));

    // I2: interior extremum pair under information equality.
    CriterionEvaluation u2 = random_evaluation(rng, d, n).with_info_equality();
    u2.score.setZero();
    CriterionEvaluation s2 = random_evaluation(rng, d, n).with_info_equality();
    s2.score = rm.transpose() * random_vector(rng, q);
    s2.value = u2.value - 0.01 * (1 + rep % 9);
    const Restriction r2 = Restriction::linear(rm, rm * s2.point);
    worst[1] = std::max(worst[1], relative_error(lrc_alpha(u2, s2, r2, 0.05).raw_statistic,
                                                 classic_lr(u2, s2, static_cast<int>(q), 0.05).raw_statistic));

    // I3: subvector path against the general path, info := H.
    const CriterionEvaluation u3 = random_evaluation(rng, d, n).with_info_equality();
    CriterionEvaluation s3 = random_evaluation(rng, d, n).with_info_equality();
    s3.value = u3.value - 0.03;
    const Restriction r3 = Restriction::subvector(d, s3.point.head(q));
    worst[2] = std::max(worst[2], relative_error(lrc_alpha(u3, s3, r3, 0.05).raw_statistic,
                                                 lrc_alpha_subvector(u3, s3, q, 0.05).raw_statistic));

    // LR plus the subvector adjustment for an extremum pair with I != H.
    CriterionEvaluation u4 = random_evaluation(rng, d, n);
    u4.score.setZero();
    CriterionEvaluation s4 = random_evaluation(rng, d, n);
    s4.score.tail(d - q).setZero();
    s4.value = u4.value - 0.03;
    const Restriction r4 = Restriction::subvector(d, s4.point.head(q));
    const double lr = classic_lr(u4, s4, static_cast<int>(q), 0.05).raw_statistic;
    worst[3] = std::max(worst[3], relative_error(lrc_alpha(u4, s4, r4, 0.05).raw_statistic,
                                                 lr + subvector_lr_adjustment(s4, q)));
  }
  const double secs = elapsed_since(t0);
  const double w = std::max({worst[0], worst[1], worst[2], worst[3]});
  std::ostringstream s;
  s << instances << " instances each; max rel err I1 " << worst[0] << ", I2 " << worst[1] << ", I3 " << worst[2]
    << ", LR+adj " << worst[3] << " (limit 1e-9, runtime limit 10s)";
  return {w <= 1e-9 && secs < 10.0 ? Verdict::Pass : Verdict::Fail, s.str()};
}

// --- 2 ---------------------------------------------------------------------

double score_error(const Vector& analytic, const Vector& fd) {
  return (analytic - fd).cwiseAbs().maxCoeff() / std::max(1e-8, analytic.cwiseAbs().maxCoeff());
}

Outcome scores() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(202);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_arch = 0, worst_wb = 0, worst_ec = 0;

  const auto series = models::arch_simulate(models::ArchParams{1.0, Vector::Constant(4, 0.1)}, 500, 7);
  for (int i = 0; i < 20; ++i) {
    Vector theta(5);
    theta << 0.5 + 1.5 * u(rng), 0.02 + 0.25 * u(rng), 0.02 + 0.25 * u(rng), 0.02 + 0.2 * u(rng), 0.02 + 0.2 * u(rng);
    const Vector fd = fd_gradient([&](const Vector& t) { return models::arch_quasi_loglik(t, series); }, theta);
    worst_arch = std::max(worst_arch, score_error(models::arch_criterion(models::ArchParams::from_vector(theta), series).score, fd));
  }

  Matrix x(250, 2);
  RngStream xs(9);
  for (Eigen::Index i = 0; i < 250; ++i) x.row(i) << 1.0, xs.uniform();
  const Vector times = models::weibull_simulate(models::WeibullParams{Vector(Eigen::Vector2d(-5.0, 1.0)), 1.0}, x, 10);
  const Objective wf = models::weibull_objective(x, times);
  for (int i = 0; i < 20; ++i) {
    Vector theta(3);
    theta << -5.5 + u(rng), 0.5 + u(rng), 0.6 + u(rng);
    const Vector fd = fd_gradient(wf.value, theta);
    worst_wb = std::max(worst_wb, score_error(models::weibull_criterion(models::WeibullParams::from_vector(theta), x, times).score, fd));
  }

  const std::size_t n = 30, t = 5;
  Matrix px(static_cast<Eigen::Index>(n * t), 3);
  RngStream ps(11);
  for (Eigen::Index i = 0; i < px.rows(); ++i) px.row(i) << 1.0, ps.normal(), ps.uniform();
  const models::PanelData panel =
      models::ec_simulate(models::EcParams{Vector(Eigen::Vector3d(1.0, 0.5, -0.2)), 0.1, 0.03, 0.04}, px, n, t, 12);
  for (int i = 0; i < 20; ++i) {
    Vector theta(6);
    theta << 0.8 + 0.4 * u(rng), 0.3 + 0.4 * u(rng), -0.4 + 0.4 * u(rng), 0.05 + 0.1 * u(rng), 0.01 + 0.05 * u(rng),
        0.01 + 0.05 * u(rng);
    const Vector fd = fd_gradient([&](const Vector& v) { return models::ec_loglik(v, panel); }, theta);
    worst_ec = std::max(worst_ec, score_error(models::ec_score(theta, panel), fd));
  }
  const double secs = elapsed_since(t0);
  std::ostringstream s;
  s << "20 points per model; max rel err arch " << worst_arch << ", weibull " << worst_wb << ", error-components "
    << worst_ec << " (limit 1e-5, runtime limit 30s)";
  const bool ok = std::max({worst_arch, worst_wb, worst_ec}) <= 1e-5 && secs < 30.0;
  return {ok ? Verdict::Pass : Verdict::Fail, s.str()};
}

// --- 3 ---------------------------------------------------------------------

Outcome distributions() {
  double round_trip = 0.0;
  for (int df = 1; df <= 10; ++df) {
    for (int k = 1; k <= 99; ++k) {
      const double p = k / 100.0;
      round_trip = std::max(round_trip, std::abs(chi2_sf(df, chi2_quantile(df, p)) - (1.0 - p)));
    }
  }
  double closed = 0.0;
  for (int k = 1; k <= 99; ++k) {
    const double p = k / 100.0;
    closed = std::max(closed, std::abs(chi2_quantile(2, p) + 2.0 * std::log1p(-p)));
    const double x = 0.1 * k;
    closed = std::max(closed, std::abs(chi2_sf(2, x) - std::exp(-0.5 * x)));
  }
  std::ostringstream s;
  s << "round trip max err " << round_trip << " (limit 1e-8); df=2 closed forms max err " << closed << " (limit 1e-10)";
  return {round_trip <= 1e-8 && closed <= 1e-10 ? Verdict::Pass : Verdict::Fail, s.str()};
}

// --- 4 ---------------------------------------------------------------------

Outcome table1() {
  struct Cell {
    const char* dgp;
    std::size_t n;
    double lrc5, lrc10, ca5, ca10;  // target rates, percent
  };
  const Cell cells[] = {
      {"DGP1", 250, 3.5, 8.3, 3.4, 7.8},
      {"DGP1", 500, 3.8, 8.5, 3.7, 8.4},
      {"DGP2", 250, 3.4, 8.2, 3.8, 8.2},
      {"DGP2", 500, 3.8, 8.2, 3.8, 8.3},
  };
  bool ok = true;
  double worst = 0.0;
  double worst_fail = 0.0;
  std::ostringstream s;
  for (const Cell& c : cells) {
    ExperimentConfig cfg;
    cfg.dgp = c.dgp;
    cfg.n = c.n;
    cfg.replications = 1000;
    cfg.tests = {TestKind::LRCa, TestKind::Ca};
    const RejectionTable t = run_level_experiment(cfg);
    const double got[4] = {100 * t.rate("LRCa", 0.05), 100 * t.rate("LRCa", 0.10), 100 * t.rate("Ca", 0.05),
                           100 * t.rate("Ca", 0.10)};
    const double want[4] = {c.lrc5, c.lrc10, c.ca5, c.ca10};
    for (int k = 0; k < 4; ++k) {
      const double dev = std::abs(got[k] - want[k]);
      worst = std::max(worst, dev);
      ok = ok && dev <= 2.0;
    }
    const double fail = 100.0 * static_cast<double>(t.rows.front().failures) / 1000.0;
    worst_fail = std::max(worst_fail, fail);
    ok = ok && fail < 2.0;
    s << c.dgp << "/" << c.n << " LRCa " << got[0] << "/" << got[1] << " Ca " << got[2] << "/" << got[3] << "; ";
  }
  s << "max |dev| " << fmt("%.1f", worst) << "pp (limit 2.0), max failures " << fmt("%.1f", worst_fail) << "%";
  return {ok ? Verdict::Pass : Verdict::Fail, s.str()};
}

// --- 5 ---------------------------------------------------------------------

Outcome table2() {
  ExperimentConfig y;
  y.dgp = "weibull-size";
  y.n = 250;
  y.replications = 1000;
  y.levels = {0.05};
  y.shape_restricted = true;
  y.tests = {TestKind::LRCa, TestKind::LM};
  const StatisticDraws dy = simulate_statistics(y);
  const RejectionTable ty = tabulate(y, dy);
  const double lm = 100 * ty.rate("LM", 0.05);
  const double lrc = 100 * ty.rate("LRCa", 0.05);

  ExperimentConfig n = y;
  n.shape_restricted = false;
  n.tests = {TestKind::LM, TestKind::Ca};
  const StatisticDraws dn = simulate_statistics(n);
  const RejectionTable tn = tabulate(n, dn);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < dn.statistics.rows(); ++i) {
    if (dn.failed[static_cast<std::size_t>(i)]) continue;
    worst = std::max(worst, relative_error(dn.statistics(i, 0), dn.statistics(i, 1)));
  }
  const double lm_n = 100 * tn.rate("LM", 0.05);
  const double ca_n = 100 * tn.rate("Ca", 0.05);
  const double fail = 100.0 * std::max(dy.failures(), dn.failures()) / 1000.0;
  std::ostringstream s;
  s << "eta>=1: LM " << lm << "% (need >25), LRCa " << lrc << "% (need 3-7); eta>0: LM " << lm_n << "%, Ca " << ca_n
    << "%, max per-replication rel diff " << worst << "; failures " << fail << "%";
  const bool ok = lm > 25.0 && lrc >= 3.0 && lrc <= 7.0 && worst <= 1e-6 && lm_n == ca_n && fail < 2.0;
  return {ok ? Verdict::Pass : Verdict::Fail, s.str()};
}

// --- 6 ---------------------------------------------------------------------

Outcome power() {
  ExperimentConfig c;
  c.dgp = "weibull-power";
  c.n = 100;
  c.replications = 500;
  c.levels = {0.05};
  c.tests = {TestKind::LRCa};
  const std::vector<double> grid = linear_grid(-8.0, -2.0, 0.1);
  const PowerCurve pc = run_power_experiment(c, grid);
  const std::vector<double>& r = pc.rates[0][0];
  std::size_t mid = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (std::abs(grid[i] + 5.0) < 1e-9) mid = i;
  }
  bool shape = true;
  for (std::size_t i = 1; i <= mid; ++i) shape = shape && r[i] <= r[i - 1] + 0.03;
  for (std::size_t i = mid + 1; i < grid.size(); ++i) shape = shape && r[i] >= r[i - 1] - 0.03;
  const double at_null = 100 * r[mid];
  const double left = 100 * r.front();
  const double right = 100 * r.back();
  // Not part of the verdict: the null rate at the same seed with eight times the replications.
  ExperimentConfig big = c;
  big.replications = 4000;
  big.null_beta0 = -5.0;
  const double reference = 100 * tabulate(big, simulate_statistics(big)).rate("LRCa", 0.05);
  std::ostringstream s;
  s << "LRCa at -5: " << at_null << "% (need 3.5-7), at -8: " << left << "%, at -2: " << right
    << "% (need >90), shape " << (shape ? "ok" : "violated") << "; null rate with R=4000: " << reference << "%";
  const bool ok = at_null >= 3.5 && at_null <= 7.0 && left > 90.0 && right > 90.0 && shape;
  return {ok ? Verdict::Pass : Verdict::Fail, s.str()};
}

// --- 7 ---------------------------------------------------------------------

Outcome calibration() {
  ExperimentConfig c;
  c.dgp = "quadratic";
  c.n = 500;
  c.replications = 2000;
  c.tests = {TestKind::LRCa, TestKind::LR};
  const StatisticDraws d = simulate_statistics(c);
  const CalibrationSummary lrc = summarize_calibration(d, TestKind::LRCa);
  const CalibrationSummary lr = summarize_calibration(d, TestKind::LR);
  std::ostringstream s;
  s << "KS LRCa " << fmt("%.4f", lrc.ks_distance) << ", KS LR " << fmt("%.4f", lr.ks_distance) << ", band "
    << fmt("%.4f", lrc.ks_band) << " (LRCa must lie inside, LR outside)";
  const bool ok = lrc.ks_distance < lrc.ks_band && lr.ks_distance > lr.ks_band;
  return {ok ? Verdict::Pass : Verdict::Fail, s.str()};
}

// --- 8 ---------------------------------------------------------------------

Outcome ricefarms() {
  const char* env = std::getenv("LRCA_RICEFARMS");
  const std::filesystem::path path = env ? env : LRCA_RICEFARMS_DEFAULT;
  if (!std::filesystem::exists(path)) {
    return {Verdict::Skip, "fixture " + path.string() + " not found (run tools/fetch_ricefarms.py or set LRCA_RICEFARMS)"};
  }
  const cli::DataModel m = cli::load_model("error-components", path);
  const FitResult fit = cli::fit_unrestricted(m);
  struct Row {
    Eigen::Index param;
    double level;
    cli::CiMethod method;
    double lower, upper, tol;
  };
  using cli::CiMethod;
  const Row rows[] = {
      {0, 0.95, CiMethod::Inversion, 5.39, 6.15, 0.01}, {1, 0.95, CiMethod::Inversion, 0.15, 0.24, 0.01},
      {2, 0.95, CiMethod::Inversion, 0.17, 0.27, 0.01}, {3, 0.95, CiMethod::Inversion, 0.52, 0.62, 0.01},
      {0, 0.95, CiMethod::T, 5.39, 6.16, 0.01},         {1, 0.95, CiMethod::T, 0.15, 0.25, 0.01},
      {2, 0.95, CiMethod::T, 0.17, 0.28, 0.01},         {3, 0.95, CiMethod::T, 0.51, 0.63, 0.01},
      {4, 0.95, CiMethod::Inversion, 0.087, 0.104, 0.002}, {5, 0.95, CiMethod::Inversion, 0.015, 0.031, 0.002},
      {6, 0.95, CiMethod::Inversion, 0.012, 0.128, 0.002}, {4, 0.95, CiMethod::T, 0.086, 0.104, 0.002},
      {5, 0.95, CiMethod::T, 0.014, 0.031, 0.002},         {6, 0.95, CiMethod::T, -0.005, 0.068, 0.002},
      {4, 0.90, CiMethod::Inversion, 0.088, 0.102, 0.002}, {5, 0.90, CiMethod::Inversion, 0.016, 0.030, 0.002},
      {6, 0.90, CiMethod::Inversion, 0.014, 0.098, 0.002}, {4, 0.90, CiMethod::T, 0.087, 0.103, 0.002},
      {5, 0.90, CiMethod::T, 0.015, 0.029, 0.002},         {6, 0.90, CiMethod::T, 0.001, 0.062, 0.002},
  };
  bool ok = fit.converged;
  int misses = 0;
  double worst_coef = 0.0, worst_var = 0.0;
  std::ostringstream miss;
  for (const Row& r : rows) {
    const ConfidenceInterval ci = cli::parameter_interval(m, fit, r.param, r.level, r.method);
    const double dev = std::max(std::abs(ci.lower - r.lower), std::abs(ci.upper - r.upper));
    (r.tol > 0.005 ? worst_coef : worst_var) = std::max(r.tol > 0.005 ? worst_coef : worst_var, dev);
    if (dev > r.tol + 1e-12) {
      ok = false;
      ++misses;
      miss << " " << m.names[static_cast<std::size_t>(r.param)] << "@" << r.level << "=[" << ci.lower << ","
           << ci.upper << "]";
    }
  }
  const ConfidenceInterval lam = cli::parameter_interval(m, fit, 6, 0.95, CiMethod::Inversion);
  const ConfidenceInterval lam_t = cli::parameter_interval(m, fit, 6, 0.95, CiMethod::T);
  std::ostringstream s;
  s << "20 intervals; sigma2_lambda 95% LRCa [" << fmt("%.4f", lam.lower) << ", " << fmt("%.4f", lam.upper) << "], t ["
    << fmt("%.4f", lam_t.lower) << ", " << fmt("%.4f", lam_t.upper) << "]; max dev coefficients "
    << fmt("%.4f", worst_coef) << " (limit 0.01), variances " << fmt("%.4f", worst_var) << " (limit 0.002)";
  if (misses) s << "; misses:" << miss.str();
  return {ok ? Verdict::Pass : Verdict::Fail, s.str()};
}

// --- 9 ---------------------------------------------------------------------

Outcome spectral_dense() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(909);
  std::uniform_int_distribution<int> nn(1, 5), tt(1, 4);
  std::uniform_real_distribution<double> var(0.02, 2.0);
  double worst = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    models::PanelData p;
    p.individuals = static_cast<std::size_t>(nn(rng));
    p.periods = static_cast<std::size_t>(tt(rng));
    const auto rows = static_cast<Eigen::Index>(p.individuals * p.periods);
    p.x = Matrix(rows, 2);
    p.x.col(0).setOnes();
    p.x.col(1) = random_vector(rng, rows);
    p.y = random_vector(rng, rows, 1.5);
    Vector theta(5);
    theta << 0.2, -0.4, var(rng), var(rng), var(rng);
    worst = std::max(worst, relative_error(models::ec_loglik(theta, p), lrca::testing::ec_loglik_dense(theta, p)));
  }
  const double secs = elapsed_since(t0);
  std::ostringstream s;
  s << "50 instances (N<=5, T<=4); max rel err " << worst << " (limit 1e-9, runtime limit 5s)";
  return {worst <= 1e-9 && secs < 5.0 ? Verdict::Pass : Verdict::Fail, s.str()};
}

}  // namespace

int main() {
  report(1, "algebraic identities I1/I2/I3 and the LR adjustment", identities);
  report(2, "analytic scores match finite differences", scores);
  report(3, "chi-square quantile / survival round trip", distributions);
  report(4, "ARCH size table, DGP1-2, n 250/500, R=1000", table1);
  report(5, "Weibull size table, n=250, R=1000", table2);
  report(6, "Weibull power curve, n=100, R=500", power);
  report(7, "null calibration of the boundary quasi-likelihood model, R=2000", calibration);
  report(8, "RiceFarms confidence intervals", ricefarms);
  report(9, "error-components spectral vs dense likelihood", spectral_dense);
  std::printf("%s: %d criterion(s) failed\n", failures ? "FAILED" : "OK", failures);
  return failures ? 1 : 0;
}

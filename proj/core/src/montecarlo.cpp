#include "lrca/montecarlo.hpp"

#include "lrca/error.hpp"
#include "lrca/models/arch.hpp"
#include "lrca/models/gaussian_mean.hpp"
#include "lrca/models/weibull.hpp"
#include "lrca/optimize.hpp"
#include "lrca/rng.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <thread>

namespace lrca {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

enum class Family { Arch, Weibull, Quadratic };

Family family_of(const std::string& dgp) {
  if (dgp.size() == 4 && dgp.rfind("DGP", 0) == 0 && dgp[3] >= '1' && dgp[3] <= '6') return Family::Arch;
  if (dgp == "weibull-size" || dgp == "weibull-power") return Family::Weibull;
  if (dgp == "quadratic") return Family::Quadratic;
  throw Error(ErrorKind::ConfigInvalid, "dgp: unknown value '" + dgp +
                                            "' (expected DGP1..DGP6, weibull-size, weibull-power, quadratic)");
}

Vector arch_truth(char which) {
  Vector v;
  switch (which) {
    case '1': v.resize(3); v << 1.0, 0.1, 0.0; break;
    case '2': v.resize(3); v << 10.0 / 9.0, 0.0, 0.0; break;
    case '3': v.resize(5); v << 1.0, 0.1, 0.1, 0.1, 0.0; break;
    case '4': v.resize(5); v << 1.0, 0.15, 0.15, 0.0, 0.0; break;
    case '5': v.resize(5); v << 1.0, 0.3, 0.0, 0.0, 0.0; break;
    default: v.resize(5); v << 10.0 / 7.0, 0.0, 0.0, 0.0, 0.0; break;
  }
  return v;
}

std::vector<TestKind> default_tests(Family f) {
  switch (f) {
    case Family::Quadratic:
      return {TestKind::LRCa, TestKind::Ca, TestKind::LR, TestKind::LM, TestKind::Wald};
    default:
      return {TestKind::LRCa, TestKind::LRCa2, TestKind::Ca, TestKind::Ca2,
              TestKind::LR, TestKind::LM, TestKind::Wald};
  }
}

int restriction_df(Family f) { return f == Family::Weibull ? 2 : 1; }

/// Fills one statistic per test, NaN where a statistic cannot be formed.
using Row = std::vector<double>;

struct Slots {
  std::vector<TestKind> tests;
  Row values;
  explicit Slots(std::vector<TestKind> t) : tests(std::move(t)), values(tests.size(), kNaN) {}

  template <class F>
  void fill(TestKind kind, F&& compute) {
    for (std::size_t j = 0; j < tests.size(); ++j) {
      if (tests[j] != kind) continue;
      try {
        values[j] = compute().statistic;
      } catch (const Error&) {
        values[j] = kNaN;
      }
    }
  }
  [[nodiscard]] bool wants(TestKind kind) const {
    return std::find(tests.begin(), tests.end(), kind) != tests.end();
  }
};

struct ReplicationResult {
  Row values;
  std::string failure;
  bool identity_violation = false;
};

bool identity_holds(const CriterionEvaluation& res, const Restriction& r) {
  try {
    const double a = lrc_alpha(res, res, r, 0.05).raw_statistic;
    const double b = c_alpha(res, r, 0.05).raw_statistic;
    return std::abs(a - b) <= 1e-8 * std::max(1.0, std::abs(b));
  } catch (const Error&) {
    return true;  // both statistics undefined; nothing to compare
  }
}

void require_converged(const FitResult& fit, const char* what) {
  if (!fit.converged) {
    throw Error(ErrorKind::MaxIterations, std::string(what) + " did not converge");
  }
}

constexpr double kReportLevel = 0.05;

// --- ARCH -----------------------------------------------------------------

ReplicationResult arch_replication(const ExperimentConfig& cfg, const Vector& truth,
                                   std::size_t index) {
  using namespace models;
  const Eigen::Index p = truth.size() - 1;
  const auto series = arch_simulate(ArchParams::from_vector(truth), cfg.n,
                                    replication_seed(cfg.master_seed, index));
  const Bounds bounds = arch_qmle_bounds(p);
  const Objective f = arch_objective(series, p);
  const Vector start =
      bounds.project(arch_ols(series, p, cfg.arch_start == ArchStart::RestrictedOlse).to_vector());

  const FitResult unres = maximize_box(f, start, bounds);
  require_converged(unres, "unrestricted QMLE");
  Vector rstart = start;
  rstart[p] = 0.0;
  const FitResult res = maximize_fixed(f, rstart, bounds, {{p, 0.0}});
  require_converged(res, "restricted QMLE");

  const Restriction r = Restriction::fixed_components(p + 1, {p}, Vector::Zero(1));
  const auto eu = arch_criterion(ArchParams::from_vector(unres.point), series, cfg.arch_info, cfg.arch_curvature);
  const auto er = arch_criterion(ArchParams::from_vector(res.point), series, cfg.arch_info, cfg.arch_curvature);

  Slots s(cfg.active_tests());
  std::optional<CriterionEvaluation> eo;
  if (s.wants(TestKind::Ca2) || s.wants(TestKind::LRCa2)) {
    // Restricted OLSE for the model without the tested lag.
    Vector olse = Vector::Zero(p + 1);
    olse.head(p) = arch_ols(series, p - 1, true).to_vector();
    eo = arch_criterion(ArchParams::from_vector(olse), series, cfg.arch_info, cfg.arch_curvature);
  }
  const double level = kReportLevel;
  s.fill(TestKind::LRCa, [&] { return lrc_alpha(eu, er, r, level); });
  s.fill(TestKind::Ca, [&] { return c_alpha(er, r, level); });
  if (eo) {
    s.fill(TestKind::LRCa2, [&] { return lrc_alpha(eu, *eo, r, level); });
    s.fill(TestKind::Ca2, [&] { return c_alpha(*eo, r, level); });
  }
  s.fill(TestKind::LR, [&] { return classic_lr(eu, er, 1, level); });
  s.fill(TestKind::LM, [&] { return classic_lm(er, r, level); });
  s.fill(TestKind::Wald, [&] { return wald(unres.point, estimate_covariance(eu), r, level); });
  ReplicationResult out{std::move(s.values), {}, false};
  if (cfg.check_identity) out.identity_violation = !identity_holds(er, r);
  return out;
}

// --- Weibull --------------------------------------------------------------

Matrix weibull_design(const ExperimentConfig& cfg) {
  RngStream rng(derived_seed(cfg.master_seed, cfg.n, 0x57454942ULL));
  Matrix x(static_cast<Eigen::Index>(cfg.n), 2);
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    x(i, 0) = 1.0;
    x(i, 1) = rng.uniform();
  }
  return x;
}

ReplicationResult weibull_replication(const ExperimentConfig& cfg, const Vector& truth,
                                      const Matrix& x, std::size_t index) {
  using namespace models;
  const WeibullParams params = WeibullParams::from_vector(truth);
  const Vector times = weibull_simulate(params, x, replication_seed(cfg.master_seed, index));
  const Objective f = weibull_objective(x, times);

  const Bounds free_bounds = weibull_bounds(2, kMinShape);
  WeibullParams st = weibull_start(x, times);
  st.eta = std::max(st.eta, 1e-2);
  const FitResult unres = maximize_box(f, st.to_vector(), free_bounds);
  require_converged(unres, "unrestricted MLE");

  Vector null_beta(2);
  null_beta << cfg.null_beta0, truth[1];
  const Bounds res_bounds = weibull_bounds(2, cfg.shape_restricted ? 1.0 : kMinShape);
  Vector rstart(3);
  rstart << null_beta, std::max(unres.point[2], res_bounds.lower[2]);
  const FitResult res = maximize_fixed(f, rstart, res_bounds, {{0, null_beta[0]}, {1, null_beta[1]}});
  require_converged(res, "restricted MLE");

  const Restriction r = Restriction::fixed_components(3, {0, 1}, null_beta);
  const auto eu = weibull_criterion(WeibullParams::from_vector(unres.point), x, times, cfg.weibull_info);
  const auto er = weibull_criterion(WeibullParams::from_vector(res.point), x, times, cfg.weibull_info);

  Slots s(cfg.active_tests());
  std::optional<CriterionEvaluation> em;
  if (s.wants(TestKind::Ca2) || s.wants(TestKind::LRCa2)) {
    try {
      const double eta = weibull_moment_eta(null_beta, x, times, cfg.moment);
      em = weibull_criterion(WeibullParams{null_beta, eta}, x, times, cfg.weibull_info);
    } catch (const Error&) {
      em.reset();
    }
  }
  const double level = kReportLevel;
  s.fill(TestKind::LRCa, [&] { return lrc_alpha(eu, er, r, level); });
  s.fill(TestKind::Ca, [&] { return c_alpha(er, r, level); });
  if (em) {
    s.fill(TestKind::LRCa2, [&] { return lrc_alpha(eu, *em, r, level); });
    s.fill(TestKind::Ca2, [&] { return c_alpha(*em, r, level); });
  }
  s.fill(TestKind::LR, [&] { return classic_lr(eu, er, 2, level); });
  s.fill(TestKind::LM, [&] { return classic_lm(er, r, level); });
  s.fill(TestKind::Wald, [&] { return wald(unres.point, estimate_covariance(eu), r, level); });
  ReplicationResult out{std::move(s.values), {}, false};
  if (cfg.check_identity) out.identity_violation = !identity_holds(er, r);
  return out;
}

// --- Gaussian mean --------------------------------------------------------

ReplicationResult quadratic_replication(const ExperimentConfig& cfg, const Vector& truth,
                                        std::size_t index) {
  using namespace models;
  const auto data = gaussian_mean_simulate(truth, unit_correlation(cfg.correlation, cfg.variance_ratio),
                                           unit_correlation(cfg.correlation), cfg.n,
                                           replication_seed(cfg.master_seed, index));
  const double inf = std::numeric_limits<double>::infinity();
  Vector lo(2), hi(2);
  lo << -inf, 0.0;
  hi << inf, inf;
  const Bounds bounds(lo, hi);
  const Objective f = gaussian_mean_objective(data);
  const Vector start = bounds.project(data.draws.colwise().mean().transpose());
  const FitResult unres = maximize_box(f, start, bounds);
  require_converged(unres, "unrestricted fit");
  Vector rstart = start;
  rstart[0] = 0.0;
  const FitResult res = maximize_fixed(f, rstart, bounds, {{0, 0.0}});
  require_converged(res, "restricted fit");

  const Restriction r = Restriction::fixed_components(2, {0}, Vector::Zero(1));
  const auto eu = gaussian_mean_criterion(unres.point, data, cfg.quadratic_info);
  const auto er = gaussian_mean_criterion(res.point, data, cfg.quadratic_info);
  Slots s(cfg.active_tests());
  const double level = kReportLevel;
  s.fill(TestKind::LRCa, [&] { return lrc_alpha(eu, er, r, level); });
  s.fill(TestKind::Ca, [&] { return c_alpha(er, r, level); });
  s.fill(TestKind::LR, [&] { return classic_lr(eu, er, 1, level); });
  s.fill(TestKind::LM, [&] { return classic_lm(er, r, level); });
  s.fill(TestKind::Wald, [&] { return wald(unres.point, estimate_covariance(eu), r, level); });
  ReplicationResult out{std::move(s.values), {}, false};
  if (cfg.check_identity) out.identity_violation = !identity_holds(er, r);
  return out;
}

unsigned worker_count(unsigned requested, std::size_t tasks) {
  unsigned w = requested > 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  return static_cast<unsigned>(std::min<std::size_t>(w, std::max<std::size_t>(tasks, 1)));
}

}  // namespace

std::string to_string(TestKind kind) {
  switch (kind) {
    case TestKind::LRCa: return "LRCa";
    case TestKind::LRCa2: return "LRCa2";
    case TestKind::Ca: return "Ca";
    case TestKind::Ca2: return "Ca2";
    case TestKind::LR: return "LR";
    case TestKind::LM: return "LM";
    case TestKind::Wald: return "Wald";
  }
  return "?";
}

TestKind parse_test_kind(const std::string& name) {
  for (TestKind k : {TestKind::LRCa, TestKind::LRCa2, TestKind::Ca, TestKind::Ca2, TestKind::LR,
                     TestKind::LM, TestKind::Wald}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorKind::ConfigInvalid,
              "tests: unknown test '" + name + "' (expected LRCa, LRCa2, Ca, Ca2, LR, LM, Wald)");
}

void ExperimentConfig::validate() const {
  const Family f = family_of(dgp);
  if (replications < 1) throw Error(ErrorKind::ConfigInvalid, "replications: must be at least 1");
  if (levels.empty()) throw Error(ErrorKind::ConfigInvalid, "levels: must not be empty");
  for (double a : levels) {
    if (!(a > 0.0 && a < 1.0)) throw Error(ErrorKind::ConfigInvalid, "levels: each level must lie in (0, 1)");
  }
  const Vector truth = true_parameters();
  if (!truth.allFinite()) throw Error(ErrorKind::ConfigInvalid, "parameters: non-finite value");
  switch (f) {
    case Family::Arch: {
      if (truth.size() < 2) throw Error(ErrorKind::ConfigInvalid, "parameters: ARCH needs omega and at least one lag");
      if (!(truth[0] > 0.0) || (truth.tail(truth.size() - 1).array() < 0.0).any()) {
        throw Error(ErrorKind::ConfigInvalid, "parameters: ARCH needs omega > 0 and alpha >= 0");
      }
      if (!(truth.tail(truth.size() - 1).sum() < 1.0)) {
        throw Error(ErrorKind::ConfigInvalid, "parameters: ARCH lag coefficients must sum below 1");
      }
      if (n <= static_cast<std::size_t>(truth.size())) {
        throw Error(ErrorKind::ConfigInvalid, "n: must exceed the number of ARCH parameters");
      }
      break;
    }
    case Family::Weibull:
      if (truth.size() != 3) throw Error(ErrorKind::ConfigInvalid, "parameters: Weibull expects (beta0, beta1, eta)");
      if (!(truth[2] > 0.0)) throw Error(ErrorKind::ConfigInvalid, "parameters: Weibull shape must be positive");
      if (!std::isfinite(null_beta0)) throw Error(ErrorKind::ConfigInvalid, "null_beta0: must be finite");
      if (n < 4) throw Error(ErrorKind::ConfigInvalid, "n: Weibull experiments need n >= 4");
      break;
    case Family::Quadratic:
      if (truth.size() != 2) throw Error(ErrorKind::ConfigInvalid, "parameters: quadratic model expects 2 values");
      if (truth[1] < 0.0) throw Error(ErrorKind::ConfigInvalid, "parameters: second component must be >= 0");
      if (!(std::abs(correlation) < 1.0)) throw Error(ErrorKind::ConfigInvalid, "correlation: must lie in (-1, 1)");
      if (!(variance_ratio > 0.0)) throw Error(ErrorKind::ConfigInvalid, "variance_ratio: must be positive");
      if (n < 2) throw Error(ErrorKind::ConfigInvalid, "n: must be at least 2");
      break;
  }
  const auto supported = default_tests(f);
  for (TestKind t : tests) {
    if (std::find(supported.begin(), supported.end(), t) == supported.end()) {
      throw Error(ErrorKind::ConfigInvalid, "tests: " + to_string(t) + " is not available for " + dgp);
    }
  }
}

Vector ExperimentConfig::true_parameters() const {
  if (parameters) return *parameters;
  switch (family_of(dgp)) {
    case Family::Arch: return arch_truth(dgp[3]);
    case Family::Weibull: {
      Vector v(3);
      v << -5.0, 1.0, 1.0;
      return v;
    }
    case Family::Quadratic: return Vector::Zero(2);
  }
  return {};
}

std::vector<TestKind> ExperimentConfig::active_tests() const {
  return tests.empty() ? default_tests(family_of(dgp)) : tests;
}

std::size_t StatisticDraws::failures() const {
  return static_cast<std::size_t>(std::count(failed.begin(), failed.end(), true));
}

StatisticDraws simulate_statistics(const ExperimentConfig& config) {
  config.validate();
  const Family fam = family_of(config.dgp);
  const Vector truth = config.true_parameters();
  const auto tests = config.active_tests();
  const std::size_t reps = config.replications;
  const Matrix design = fam == Family::Weibull ? weibull_design(config) : Matrix();

  std::vector<ReplicationResult> results(reps);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < reps; i = next++) {
      try {
        switch (fam) {
          case Family::Arch: results[i] = arch_replication(config, truth, i); break;
          case Family::Weibull: results[i] = weibull_replication(config, truth, design, i); break;
          case Family::Quadratic: results[i] = quadratic_replication(config, truth, i); break;
        }
      } catch (const std::exception& e) {
        results[i] = ReplicationResult{Row(tests.size(), kNaN), e.what(), false};
      }
    }
  };
  const unsigned workers = worker_count(config.workers, reps);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  StatisticDraws out;
  out.tests = tests;
  out.df.assign(tests.size(), restriction_df(fam));
  out.statistics.resize(static_cast<Eigen::Index>(reps), static_cast<Eigen::Index>(tests.size()));
  out.failed.resize(reps);
  out.failure_reasons.resize(reps);
  for (std::size_t i = 0; i < reps; ++i) {
    for (std::size_t j = 0; j < tests.size(); ++j) {
      out.statistics(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = results[i].values[j];
    }
    out.failed[i] = !results[i].failure.empty();
    out.failure_reasons[i] = results[i].failure;
    if (results[i].identity_violation) ++out.identity_violations;
  }
  return out;
}

double RejectionTable::rate(const std::string& test, double level) const {
  for (const auto& r : rows) {
    if (r.test == test && std::abs(r.level - level) < 1e-12) return r.rate;
  }
  throw Error(ErrorKind::ConfigInvalid, "no rejection rate for " + test + " at level " + format_double(level));
}

RejectionTable tabulate(const ExperimentConfig& config, const StatisticDraws& draws) {
  RejectionTable table;
  table.replications = draws.replications();
  for (std::size_t j = 0; j < draws.tests.size(); ++j) {
    const auto col = draws.statistics.col(static_cast<Eigen::Index>(j));
    std::size_t valid = 0;
    for (Eigen::Index i = 0; i < col.size(); ++i) valid += std::isfinite(col[i]) ? 1 : 0;
    for (double level : config.levels) {
      const double crit = chi2_quantile(draws.df[j], 1.0 - level);
      std::size_t rejections = 0;
      for (Eigen::Index i = 0; i < col.size(); ++i) {
        if (std::isfinite(col[i]) && col[i] >= crit) ++rejections;
      }
      RejectionRow row;
      row.dgp = config.dgp;
      row.n = config.n;
      row.test = to_string(draws.tests[j]);
      row.level = level;
      row.rate = valid > 0 ? static_cast<double>(rejections) / static_cast<double>(valid) : 0.0;
      row.failures = table.replications - valid;
      table.rows.push_back(row);
    }
  }
  return table;
}

RejectionTable run_level_experiment(const ExperimentConfig& config) {
  return tabulate(config, simulate_statistics(config));
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& out, const RejectionTable& table) {
  out << "dgp,n,test,level,rate,failures\n";
  for (const auto& r : table.rows) {
    out << r.dgp << ',' << r.n << ',' << r.test << ',' << format_double(r.level) << ','
        << format_double(r.rate) << ',' << r.failures << '\n';
  }
}

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string f;
  while (std::getline(ss, f, ',')) out.push_back(f);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <class T>
T parse_field(const std::string& s, const char* name) {
  T v{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorKind::InvalidData, std::string("bad ") + name + " field '" + s + "'");
  }
  return v;
}

}  // namespace

RejectionTable read_rejection_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::InvalidData, "empty rejection table");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "dgp,n,test,level,rate,failures") throw Error(ErrorKind::InvalidData, "unexpected header '" + line + "'");
  RejectionTable t;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 6) throw Error(ErrorKind::InvalidData, "ragged row '" + line + "'");
    RejectionRow r;
    r.dgp = f[0];
    r.n = parse_field<std::size_t>(f[1], "n");
    r.test = f[2];
    r.level = parse_field<double>(f[3], "level");
    r.rate = parse_field<double>(f[4], "rate");
    r.failures = parse_field<std::size_t>(f[5], "failures");
    t.rows.push_back(r);
  }
  return t;
}

namespace {

void write_aligned(std::ostream& out, const std::vector<std::vector<std::string>>& cells) {
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  auto emit = [&](const std::vector<std::string>& row) {
    out << '|';
    for (std::size_t c = 0; c < row.size(); ++c) out << ' ' << std::setw(static_cast<int>(width[c])) << row[c] << " |";
    out << '\n';
  };
  emit(cells.front());
  out << '|';
  for (std::size_t w : width) out << std::string(w + 1, '-') << ":|";
  out << '\n';
  for (std::size_t r = 1; r < cells.size(); ++r) emit(cells[r]);
}

std::string percent(double rate) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(1) << 100.0 * rate;
  return s.str();
}

std::string level_label(double level) { return percent(level).substr(0, percent(level).size() - 2) + "%"; }

}  // namespace

void write_markdown(std::ostream& out, const RejectionTable& table) {
  std::vector<double> levels;
  for (const auto& r : table.rows) {
    if (std::find(levels.begin(), levels.end(), r.level) == levels.end()) levels.push_back(r.level);
  }
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> head{"dgp", "n", "test"};
  for (double a : levels) head.push_back(level_label(a));
  head.push_back("failures");
  cells.push_back(head);
  std::map<std::tuple<std::string, std::size_t, std::string>, std::size_t> index;
  for (const auto& r : table.rows) {
    const auto key = std::make_tuple(r.dgp, r.n, r.test);
    auto it = index.find(key);
    if (it == index.end()) {
      std::vector<std::string> row{r.dgp, std::to_string(r.n), r.test};
      row.resize(3 + levels.size(), "");
      row.push_back(std::to_string(r.failures));
      cells.push_back(row);
      it = index.emplace(key, cells.size() - 1).first;
    }
    const auto pos = std::find(levels.begin(), levels.end(), r.level) - levels.begin();
    cells[it->second][3 + static_cast<std::size_t>(pos)] = percent(r.rate);
  }
  write_aligned(out, cells);
}

std::vector<double> linear_grid(double from, double to, double step) {
  if (!(step > 0.0) || !(to >= from)) throw Error(ErrorKind::ConfigInvalid, "grid: need step > 0 and to >= from");
  const auto count = static_cast<std::size_t>(std::llround((to - from) / step)) + 1;
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i) {
    g[i] = std::round((from + static_cast<double>(i) * step) * 1e10) / 1e10;
  }
  return g;
}

PowerCurve run_power_experiment(const ExperimentConfig& config, const std::vector<double>& grid) {
  if (grid.empty()) throw Error(ErrorKind::ConfigInvalid, "grid: must not be empty");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw Error(ErrorKind::ConfigInvalid, "grid: must be strictly increasing");
  }
  if (family_of(config.dgp) != Family::Weibull) {
    throw Error(ErrorKind::ConfigInvalid, "dgp: power curves are defined for the Weibull design");
  }
  PowerCurve curve;
  curve.grid = grid;
  curve.tests = config.active_tests();
  curve.levels = config.levels;
  curve.n = config.n;
  curve.replications = config.replications;
  curve.rates.assign(config.levels.size(),
                     std::vector<std::vector<double>>(curve.tests.size(), std::vector<double>(grid.size())));
  for (std::size_t g = 0; g < grid.size(); ++g) {
    ExperimentConfig c = config;
    c.null_beta0 = grid[g];
    const StatisticDraws draws = simulate_statistics(c);
    const RejectionTable t = tabulate(c, draws);
    curve.failures.push_back(draws.failures());
    for (std::size_t l = 0; l < config.levels.size(); ++l) {
      for (std::size_t j = 0; j < curve.tests.size(); ++j) {
        curve.rates[l][j][g] = t.rate(to_string(curve.tests[j]), config.levels[l]);
      }
    }
  }
  return curve;
}

void write_csv(std::ostream& out, const PowerCurve& curve) {
  out << "grid,test,level,rate,failures\n";
  for (std::size_t l = 0; l < curve.levels.size(); ++l) {
    for (std::size_t j = 0; j < curve.tests.size(); ++j) {
      for (std::size_t g = 0; g < curve.grid.size(); ++g) {
        out << format_double(curve.grid[g]) << ',' << to_string(curve.tests[j]) << ','
            << format_double(curve.levels[l]) << ',' << format_double(curve.rates[l][j][g]) << ','
            << curve.failures[g] << '\n';
      }
    }
  }
}

void write_plot_csv(std::ostream& out, const PowerCurve& curve) {
  out << "grid,test,rate\n";
  for (std::size_t j = 0; j < curve.tests.size(); ++j) {
    for (std::size_t g = 0; g < curve.grid.size(); ++g) {
      out << format_double(curve.grid[g]) << ',' << to_string(curve.tests[j]) << ','
          << format_double(curve.rates[0][j][g]) << '\n';
    }
  }
}

void write_markdown(std::ostream& out, const PowerCurve& curve) {
  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> head{"grid"};
  for (TestKind t : curve.tests) head.push_back(to_string(t));
  cells.push_back(head);
  for (std::size_t g = 0; g < curve.grid.size(); ++g) {
    std::vector<std::string> row{format_double(curve.grid[g])};
    for (std::size_t j = 0; j < curve.tests.size(); ++j) row.push_back(percent(curve.rates[0][j][g]));
    cells.push_back(row);
  }
  write_aligned(out, cells);
}

double ks_distance_chi2(std::vector<double> sample, int df) {
  if (sample.empty()) throw Error(ErrorKind::ConfigInvalid, "empty sample");
  std::sort(sample.begin(), sample.end());
  const double m = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    const double f = chi2_cdf(df, std::max(0.0, sample[i]));
    d = std::max({d, static_cast<double>(i + 1) / m - f, f - static_cast<double>(i) / m});
  }
  return d;
}

double empirical_quantile(std::vector<double> sample, double p) {
  if (sample.empty()) throw Error(ErrorKind::ConfigInvalid, "empty sample");
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::InvalidProbability, "quantile probability");
  std::sort(sample.begin(), sample.end());
  const double h = p * static_cast<double>(sample.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sample.size() - 1);
  return sample[lo] + (h - static_cast<double>(lo)) * (sample[hi] - sample[lo]);
}

CalibrationSummary summarize_calibration(const StatisticDraws& draws, TestKind test,
                                         std::optional<int> df_override) {
  const auto it = std::find(draws.tests.begin(), draws.tests.end(), test);
  if (it == draws.tests.end()) throw Error(ErrorKind::ConfigInvalid, "tests: " + to_string(test) + " was not run");
  const auto j = static_cast<std::size_t>(it - draws.tests.begin());
  CalibrationSummary s;
  s.test = test;
  s.df = df_override.value_or(draws.df[j]);
  if (s.df < 1) throw Error(ErrorKind::ConfigInvalid, "df: must be positive");
  std::vector<double> values;
  const auto col = draws.statistics.col(static_cast<Eigen::Index>(j));
  for (Eigen::Index i = 0; i < col.size(); ++i) {
    if (std::isfinite(col[i])) values.push_back(col[i]);
  }
  s.used = values.size();
  s.failures = draws.replications() - s.used;
  if (values.empty()) throw Error(ErrorKind::ConfigInvalid, "no successful replications");
  for (double p : s.probabilities) {
    s.empirical_quantiles.push_back(empirical_quantile(values, p));
    s.reference_quantiles.push_back(chi2_quantile(s.df, p));
  }
  s.ks_distance = ks_distance_chi2(values, s.df);
  s.ks_band = 1.36 / std::sqrt(static_cast<double>(s.used));
  s.within_band = s.ks_distance < s.ks_band;
  return s;
}

CalibrationSummary null_calibration(const ExperimentConfig& config, TestKind test,
                                    std::optional<int> df_override) {
  ExperimentConfig c = config;
  if (std::find(c.tests.begin(), c.tests.end(), test) == c.tests.end() && !c.tests.empty()) {
    c.tests.push_back(test);
  }
  return summarize_calibration(simulate_statistics(c), test, df_override);
}

}  // namespace lrca

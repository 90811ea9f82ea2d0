#include "lrca/cli/cli.hpp"

#include "lrca/error.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <fstream>
#include <ostream>

namespace lrca::cli {

namespace {

constexpr std::array<const char*, 6> kCommands{"simulate", "test", "ci", "power", "calibrate", "describe"};

std::string command_list() {
  std::string s;
  for (const char* c : kCommands) s += (s.empty() ? "" : ", ") + std::string(c);
  return s;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::error_code ec;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
  std::ofstream f(path);
  if (!f) throw UsageError("cannot write '" + path.string() + "'");
  return f;
}

bool wants(const FileConfig& c, const std::string& fmt) {
  return std::find(c.formats.begin(), c.formats.end(), fmt) != c.formats.end();
}

InfoEstimator parse_info(const std::string& s) {
  if (s == "opg") return InfoEstimator::OuterProduct;
  if (s == "centered-opg") return InfoEstimator::CenteredOuterProduct;
  if (s == "hessian") return InfoEstimator::Hessian;
  throw UsageError("--info: expected opg, centered-opg or hessian");
}

struct ExperimentFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> workers;
  std::string out;
};

void add_experiment_flags(CLI::App* app, ExperimentFlags& f, bool out_required) {
  app->add_option("--config", f.config, "JSON experiment config")->required();
  app->add_option("--seed", f.seed, "overrides master_seed");
  app->add_option("--workers", f.workers, "caps the worker pool (0: all cores)");
  auto* o = app->add_option("--out", f.out, "output directory");
  if (out_required) o->required();
}

FileConfig load_with_flags(const ExperimentFlags& f) {
  FileConfig c = load_config(f.config);
  if (f.seed) c.experiment.master_seed = *f.seed;
  if (f.workers) c.experiment.workers = *f.workers;
  return c;
}

struct ModelFlags {
  std::string model;
  std::string data;
  Eigen::Index order = 1;
  bool monotone = false;
  std::string info;
};

void add_model_flags(CLI::App* app, ModelFlags& f) {
  app->add_option("--model", f.model, "arch | weibull | error-components")->required();
  app->add_option("--data", f.data, "CSV data file")->required();
  app->add_option("--order", f.order, "ARCH order p");
  app->add_flag("--monotone-hazard", f.monotone, "Weibull: impose eta >= 1");
  app->add_option("--info", f.info, "opg | centered-opg | hessian");
}

DataModel load_with_flags(const ModelFlags& f) {
  ModelOptions opt;
  opt.arch_order = f.order;
  opt.monotone_hazard = f.monotone;
  if (!f.info.empty()) opt.info = parse_info(f.info);
  return load_model(f.model, f.data, opt);
}

void print_fit(std::ostream& out, const DataModel& m, const FitResult& fit, const char* label) {
  fmt::print(out, "{} fit: converged={} iterations={} criterion={}\n", label, fit.converged ? "yes" : "no",
             fit.iterations, format_double(fit.value));
  for (std::size_t i = 0; i < m.names.size(); ++i) {
    fmt::print(out, "  {:<14} {:.6g}\n", m.names[i], fit.point[static_cast<Eigen::Index>(i)]);
  }
}

void warn_unconverged(std::ostream& err, const FitResult& fit, const char* label) {
  if (!fit.converged) {
    fmt::print(err, "warning: {} fit did not converge (projected gradient {:.3g}); statistics use the best point\n",
               label, fit.projected_gradient);
  }
}

int cmd_simulate(const ExperimentFlags& f, std::ostream& out) {
  const FileConfig c = load_with_flags(f);
  const StatisticDraws draws = simulate_statistics(c.experiment);
  const RejectionTable table = tabulate(c.experiment, draws);
  const std::filesystem::path dir(f.out);
  if (wants(c, "csv")) {
    auto file = open_output(dir / "rejection.csv");
    write_csv(file, table);
  }
  if (wants(c, "md")) {
    auto file = open_output(dir / "rejection.md");
    write_markdown(file, table);
  }
  fmt::print(out, "{} n={} replications={} failures={}\n", c.experiment.dgp, c.experiment.n,
             c.experiment.replications, draws.failures());
  write_markdown(out, table);
  if (c.experiment.check_identity) fmt::print(out, "identity violations: {}\n", draws.identity_violations);
  return 0;
}

int cmd_power(const ExperimentFlags& f, std::ostream& out) {
  const FileConfig c = load_with_flags(f);
  const PowerGrid g = c.grid.value_or(PowerGrid{});
  const PowerCurve curve = run_power_experiment(c.experiment, linear_grid(g.from, g.to, g.step));
  const std::filesystem::path dir(f.out);
  if (wants(c, "csv")) {
    auto file = open_output(dir / "power.csv");
    write_csv(file, curve);
    auto plot = open_output(dir / "power_plot.csv");
    write_plot_csv(plot, curve);
  }
  if (wants(c, "md")) {
    auto file = open_output(dir / "power.md");
    write_markdown(file, curve);
  }
  write_markdown(out, curve);
  return 0;
}

int cmd_calibrate(const ExperimentFlags& f, std::optional<std::string> test, std::optional<int> df,
                  std::ostream& out) {
  const FileConfig c = load_with_flags(f);
  TestKind kind = c.calibrate_test;
  if (test) {
    try {
      kind = parse_test_kind(*test);
    } catch (const Error& e) {
      throw UsageError(std::string("--test: ") + e.what());
    }
  }
  const std::optional<int> df_used = df ? df : c.calibrate_df;
  const CalibrationSummary s = null_calibration(c.experiment, kind, df_used);
  fmt::print(out, "{} on {} (n={}, replications={}, used={}, failures={})\n", to_string(s.test),
             c.experiment.dgp, c.experiment.n, c.experiment.replications, s.used, s.failures);
  fmt::print(out, "  {:>6} {:>12} {:>12}\n", "p", "empirical", "chi2");
  for (std::size_t i = 0; i < s.probabilities.size(); ++i) {
    fmt::print(out, "  {:>6.3f} {:>12.6f} {:>12.6f}\n", s.probabilities[i], s.empirical_quantiles[i],
               s.reference_quantiles[i]);
  }
  fmt::print(out, "KS distance from chi2_{}: {:.5f} (band {:.5f}) -> {}\n", s.df, s.ks_distance, s.ks_band,
             s.within_band ? "within band" : "outside band");
  if (!f.out.empty()) {
    nlohmann::json j{{"test", to_string(s.test)},
                     {"df", s.df},
                     {"used", s.used},
                     {"failures", s.failures},
                     {"probabilities", s.probabilities},
                     {"empirical_quantiles", s.empirical_quantiles},
                     {"reference_quantiles", s.reference_quantiles},
                     {"ks_distance", s.ks_distance},
                     {"ks_band", s.ks_band},
                     {"within_band", s.within_band}};
    auto file = open_output(std::filesystem::path(f.out) / "calibration.json");
    file << j.dump(2) << '\n';
  }
  return 0;
}

int cmd_test(const ModelFlags& mf, const std::string& restrict_text, double level, const std::string& out_path,
             std::ostream& out, std::ostream& err) {
  const DataModel m = load_with_flags(mf);
  const RestrictionSpec spec = parse_restriction(restrict_text, m);
  const HypothesisReport rep = test_hypothesis(m, spec, level);
  warn_unconverged(err, rep.unrestricted, "unrestricted");
  warn_unconverged(err, rep.restricted, "restricted");
  print_fit(out, m, rep.unrestricted, "unrestricted");
  print_fit(out, m, rep.restricted, "restricted");
  fmt::print(out, "H0: {}  level {}\n", restrict_text, format_double(level));
  fmt::print(out, "  {:<6} {:>12} {:>4} {:>10} {:>7}\n", "test", "statistic", "df", "p-value", "reject");
  for (const auto& [name, o] : rep.outcomes) {
    if (!o) {
      fmt::print(out, "  {:<6} {:>12}\n", name, "n/a");
      continue;
    }
    fmt::print(out, "  {:<6} {:>12.6f} {:>4} {:>10.4g} {:>7}{}\n", name, o->statistic, o->df, o->p_value,
               o->reject ? "yes" : "no", o->clamped ? "  (clamped at 0)" : "");
  }
  for (const auto& e : rep.errors) fmt::print(err, "note: {}\n", e);
  if (!out_path.empty()) {
    auto file = open_output(out_path);
    file << "test,statistic,df,p_value,level,reject\n";
    for (const auto& [name, o] : rep.outcomes) {
      if (!o) continue;
      file << name << ',' << format_double(o->statistic) << ',' << o->df << ',' << format_double(o->p_value)
           << ',' << format_double(o->level) << ',' << (o->reject ? 1 : 0) << '\n';
    }
  }
  const bool any = std::any_of(rep.outcomes.begin(), rep.outcomes.end(), [](const auto& p) { return p.second.has_value(); });
  if (!any) {
    fmt::print(err, "error: no statistic could be formed\n");
    return 2;
  }
  return 0;
}

int cmd_ci(const ModelFlags& mf, const std::string& param, double level, const std::string& method,
           const std::string& out_path, std::ostream& out, std::ostream& err) {
  CiMethod how;
  if (method == "inversion") how = CiMethod::Inversion;
  else if (method == "t") how = CiMethod::T;
  else throw UsageError("--method: expected inversion or t");
  const DataModel m = load_with_flags(mf);
  std::vector<Eigen::Index> which;
  if (param == "all") {
    for (std::size_t i = 0; i < m.names.size(); ++i) which.push_back(static_cast<Eigen::Index>(i));
  } else {
    which.push_back(m.index_of(param));
  }
  const FitResult fit = fit_unrestricted(m);
  warn_unconverged(err, fit, "unrestricted");
  fmt::print(out, "{} confidence intervals, level {} ({})\n", m.id, format_double(level), method);
  fmt::print(out, "  {:<14} {:>12} {:>12} {:>12}\n", "parameter", "estimate", "lower", "upper");
  std::ostringstream csv;
  csv << "param,estimate,lower,upper,level,method,truncated\n";
  for (Eigen::Index j : which) {
    const ConfidenceInterval ci = parameter_interval(m, fit, j, level, how);
    const std::string& name = m.names[static_cast<std::size_t>(j)];
    fmt::print(out, "  {:<14} {:>12.6f} {:>12.6f} {:>12.6f}{}{}\n", name, fit.point[j], ci.lower, ci.upper,
               ci.truncated_at_boundary ? "  (at bound)" : "", ci.disconnected ? "  (disconnected)" : "");
    csv << name << ',' << format_double(fit.point[j]) << ',' << format_double(ci.lower) << ','
        << format_double(ci.upper) << ',' << format_double(level) << ',' << method << ','
        << (ci.truncated_at_boundary ? 1 : 0) << '\n';
  }
  if (!out_path.empty()) {
    auto file = open_output(out_path);
    file << csv.str();
  }
  return 0;
}

bool is_usage_kind(ErrorKind k) {
  return k == ErrorKind::ConfigInvalid || k == ErrorKind::UnknownModel || k == ErrorKind::InvalidData ||
         k == ErrorKind::UnbalancedPanel;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  if (argc >= 2) {
    const std::string first = argv[1];
    const bool known = std::find(kCommands.begin(), kCommands.end(), first) != kCommands.end();
    if (!known && !first.empty() && first[0] != '-') {
      fmt::print(err, "error: unknown command '{}'; valid commands: {}\n", first, command_list());
      return 1;
    }
  }

  CLI::App app{"Mixed LR / C(alpha) tests, Monte Carlo experiments and confidence intervals", "lrca"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "lrca 0.1.0");

  ExperimentFlags sim_flags;
  auto* sim = app.add_subcommand("simulate", "size experiment; writes rejection.csv / rejection.md");
  add_experiment_flags(sim, sim_flags, true);

  ExperimentFlags pow_flags;
  auto* pow = app.add_subcommand("power", "Weibull power curve; writes power.csv, power_plot.csv, power.md");
  add_experiment_flags(pow, pow_flags, true);

  ExperimentFlags cal_flags;
  std::optional<std::string> cal_test;
  std::optional<int> cal_df;
  auto* cal = app.add_subcommand("calibrate", "null distribution against chi-square (KS distance)");
  add_experiment_flags(cal, cal_flags, false);
  cal->add_option("--test", cal_test, "statistic to calibrate (default from config, else LRCa)");
  cal->add_option("--df", cal_df, "reference degrees of freedom")->check(CLI::Range(1, 1000));

  ModelFlags test_flags;
  std::string restrict_text;
  double test_level = 0.05;
  std::string test_out;
  auto* test = app.add_subcommand("test", "test a restriction on user data");
  add_model_flags(test, test_flags);
  test->add_option("--restrict", restrict_text, "name=value,... or c1*p1+c2*p2=v")->required();
  test->add_option("--level", test_level, "nominal level");
  test->add_option("--out", test_out, "CSV file for the outcomes");

  ModelFlags ci_flags;
  std::string ci_param;
  double ci_level = 0.95;
  std::string ci_method = "inversion";
  std::string ci_out;
  auto* ci = app.add_subcommand("ci", "confidence interval by LRCa inversion or t ratio");
  add_model_flags(ci, ci_flags);
  ci->add_option("--param", ci_param, "parameter name, alias, or `all`")->required();
  ci->add_option("--level", ci_level, "confidence level");
  ci->add_option("--method", ci_method, "inversion | t");
  ci->add_option("--out", ci_out, "CSV file for the intervals");

  std::string describe_id;
  auto* desc = app.add_subcommand("describe", "parameters, bounds and data format of a model");
  desc->add_option("model", describe_id, "arch | weibull | error-components")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::CallForVersion&) {
    out << "lrca 0.1.0\n";
    return 0;
  } catch (const CLI::RequiredError& e) {
    if (app.get_subcommands().empty()) {
      fmt::print(err, "error: missing command; valid commands: {}\n", command_list());
    } else {
      fmt::print(err, "error: {}\n", e.what());
    }
    return 1;
  } catch (const CLI::ParseError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return 1;
  }

  try {
    if (*sim) return cmd_simulate(sim_flags, out);
    if (*pow) return cmd_power(pow_flags, out);
    if (*cal) return cmd_calibrate(cal_flags, cal_test, cal_df, out);
    if (*test) return cmd_test(test_flags, restrict_text, test_level, test_out, out, err);
    if (*ci) return cmd_ci(ci_flags, ci_param, ci_level, ci_method, ci_out, out, err);
    if (*desc) {
      out << describe(describe_id);
      return 0;
    }
  } catch (const UsageError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return 1;
  } catch (const Error& e) {
    fmt::print(err, "error: {}\n", e.what());
    return is_usage_kind(e.kind()) ? 1 : 2;
  } catch (const std::exception& e) {
    fmt::print(err, "error: {}\n", e.what());
    return 2;
  }
  return 1;
}

}  // namespace lrca::cli

#include "lrca/cli/cli.hpp"

#include "lrca/error.hpp"
#include "lrca/models/arch.hpp"
#include "lrca/models/csv.hpp"
#include "lrca/models/error_components.hpp"
#include "lrca/models/weibull.hpp"

#include <algorithm>
#include <cmath>

namespace lrca::cli {

namespace {

Eigen::Index dim_of(const DataModel& m) { return static_cast<Eigen::Index>(m.names.size()); }

DataModel arch_model(const std::filesystem::path& path, const ModelOptions& opt) {
  if (opt.arch_order < 1) throw UsageError("--order must be at least 1");
  auto series = std::make_shared<const std::vector<double>>(models::read_series(path));
  const Eigen::Index p = opt.arch_order;
  if (series->size() <= static_cast<std::size_t>(p + 1)) {
    throw Error(ErrorKind::InvalidData, "series too short for ARCH(" + std::to_string(p) + ")");
  }
  DataModel m;
  m.id = "arch";
  m.names.push_back("omega");
  for (Eigen::Index j = 1; j <= p; ++j) m.names.push_back("alpha" + std::to_string(j));
  m.aliases.resize(m.names.size());
  m.bounds = models::arch_qmle_bounds(p);
  m.objective = models::arch_objective(*series, p);
  m.start = m.bounds.project(models::arch_ols(*series, p, true).to_vector());
  m.info = opt.info.value_or(InfoEstimator::OuterProduct);
  const InfoEstimator info = m.info;
  m.evaluate = [series, info](const Vector& theta) {
    return models::arch_criterion(models::ArchParams::from_vector(theta), *series, info);
  };
  m.data = series;
  return m;
}

struct SurvivalHolder {
  models::SurvivalData data;
};

DataModel weibull_model(const std::filesystem::path& path, const ModelOptions& opt) {
  auto holder = std::make_shared<SurvivalHolder>();
  holder->data = models::read_survival(path);
  const auto& d = holder->data;
  const Eigen::Index k = d.x.cols();
  DataModel m;
  m.id = "weibull";
  for (Eigen::Index j = 0; j < k; ++j) m.names.push_back("beta" + std::to_string(j));
  m.names.push_back("eta");
  m.aliases.resize(m.names.size());
  m.aliases[0].push_back("intercept");
  for (std::size_t j = 0; j < d.covariates.size(); ++j) m.aliases[j + 1].push_back(d.covariates[j]);
  m.bounds = models::weibull_bounds(k, opt.monotone_hazard ? 1.0 : models::kMinShape);
  m.objective = models::weibull_objective(d.x, d.times);
  m.start = m.bounds.project(models::weibull_start(d.x, d.times).to_vector());
  m.info = opt.info.value_or(InfoEstimator::OuterProduct);
  const InfoEstimator info = m.info;
  std::shared_ptr<const SurvivalHolder> keep = holder;
  m.evaluate = [keep, info](const Vector& theta) {
    return models::weibull_criterion(models::WeibullParams::from_vector(theta), keep->data.x,
                                     keep->data.times, info);
  };
  m.data = keep;
  return m;
}

DataModel ec_model(const std::filesystem::path& path, const ModelOptions& opt) {
  auto file = std::make_shared<const models::PanelFile>(models::read_panel(path));
  const Eigen::Index k = file->panel.x.cols();
  DataModel m;
  m.id = "error-components";
  for (Eigen::Index j = 0; j < k; ++j) m.names.push_back("beta" + std::to_string(j));
  m.names.insert(m.names.end(), {"sigma2_v", "sigma2_eta", "sigma2_lambda"});
  m.aliases.resize(m.names.size());
  m.aliases[0].push_back("intercept");
  for (std::size_t j = 0; j < file->covariates.size(); ++j) m.aliases[j + 1].push_back(file->covariates[j]);
  m.bounds = models::ec_default_bounds(k);
  m.objective = models::ec_objective(file->panel);
  m.start = m.bounds.project(models::ec_start(file->panel).to_vector());
  m.info = opt.info.value_or(InfoEstimator::Hessian);
  const InfoEstimator info = m.info;
  m.evaluate = [file, info](const Vector& theta) {
    return models::ec_criterion(models::EcParams::from_vector(theta), file->panel, info);
  };
  m.data = file;
  return m;
}

}  // namespace

Eigen::Index DataModel::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<Eigen::Index>(i);
    if (i < aliases.size() && std::find(aliases[i].begin(), aliases[i].end(), name) != aliases[i].end()) {
      return static_cast<Eigen::Index>(i);
    }
  }
  std::string known;
  for (const auto& n : all_names()) known += (known.empty() ? "" : ", ") + n;
  throw UsageError("unknown parameter '" + name + "' for model " + id + " (known: " + known + ")");
}

std::vector<std::string> DataModel::all_names() const {
  std::vector<std::string> out = names;
  for (const auto& a : aliases) out.insert(out.end(), a.begin(), a.end());
  return out;
}

DataModel load_model(const std::string& id, const std::filesystem::path& data,
                     const ModelOptions& options) {
  if (id != "arch" && id != "weibull" && id != "error-components") {
    throw Error(ErrorKind::UnknownModel, "'" + id + "' (known: arch, weibull, error-components)");
  }
  if (!std::filesystem::exists(data)) throw UsageError("--data: no such file '" + data.string() + "'");
  if (id == "arch") return arch_model(data, options);
  if (id == "weibull") return weibull_model(data, options);
  return ec_model(data, options);
}

FitResult fit_unrestricted(const DataModel& m, const OptimizeOptions& opt) {
  return maximize_box(m.objective, m.start, m.bounds, opt);
}

FitResult fit_restricted(const DataModel& m, const RestrictionSpec& spec, const Vector& start,
                         const OptimizeOptions& opt) {
  const Eigen::Index d = dim_of(m);
  if (spec.is_linear()) {
    if (spec.coefficients->size() != d) throw UsageError("restriction: dimension mismatch");
    return maximize_linear(m.objective, m.bounds.project(start), m.bounds, *spec.coefficients,
                           spec.target, opt);
  }
  Vector s = start;
  for (const auto& [i, v] : spec.fixed) {
    if (i < 0 || i >= d) throw UsageError("restriction: index outside the model dimension");
    if (v < m.bounds.lower[i] || v > m.bounds.upper[i]) {
      throw UsageError("restriction: " + m.names[static_cast<std::size_t>(i)] + "=" +
                       format_double(v) + " lies outside the parameter space");
    }
    s[i] = v;
  }
  return maximize_fixed(m.objective, m.bounds.project(s), m.bounds, spec.fixed, opt);
}

HypothesisReport test_hypothesis(const DataModel& m, const RestrictionSpec& spec, double level) {
  if (!(level > 0.0 && level < 1.0)) throw UsageError("--level must lie in (0, 1)");
  const Eigen::Index d = dim_of(m);
  if (!spec.is_linear() && static_cast<Eigen::Index>(spec.fixed.size()) > d) {
    throw UsageError("restriction: more fixed components than parameters");
  }
  HypothesisReport rep;
  rep.unrestricted = fit_unrestricted(m);
  rep.restricted = fit_restricted(m, spec, rep.unrestricted.point);
  const Restriction r = spec.to_restriction(d);
  const CriterionEvaluation eu = m.evaluate(rep.unrestricted.point);
  const CriterionEvaluation er = m.evaluate(rep.restricted.point);
  const int q = static_cast<int>(r.q());

  const auto attempt = [&rep](const std::string& label, const std::function<TestOutcome()>& f) {
    try {
      rep.outcomes.emplace_back(label, f());
    } catch (const Error& e) {
      rep.outcomes.emplace_back(label, std::nullopt);
      rep.errors.push_back(label + ": " + e.what());
    }
  };
  attempt("LRCa", [&] { return lrc_alpha(eu, er, r, level); });
  attempt("Ca", [&] { return c_alpha(er, r, level); });
  attempt("LR", [&] { return classic_lr(eu, er, q, level); });
  attempt("LM", [&] { return classic_lm(er, r, level); });
  attempt("Wald", [&] { return wald(rep.unrestricted.point, estimate_covariance(eu), r, level); });
  return rep;
}

ConfidenceInterval parameter_interval(const DataModel& m, const FitResult& unrestricted,
                                      Eigen::Index param, double level, CiMethod method) {
  const Eigen::Index d = dim_of(m);
  if (param < 0 || param >= d) throw UsageError("--param: index outside the model dimension");
  if (!(level > 0.0 && level < 1.0)) throw UsageError("--level must lie in (0, 1)");
  const CriterionEvaluation eu = m.evaluate(unrestricted.point);
  const double center = unrestricted.point[param];

  if (method == CiMethod::T) {
    const SymMatrix cov = estimate_covariance(eu);
    const double var = cov(param, param);
    if (!(var > 0.0)) throw Error(ErrorKind::NonPositiveSE, m.names[static_cast<std::size_t>(param)]);
    return t_interval(center, std::sqrt(var), level);
  }

  const double alpha = 1.0 - level;
  const std::vector<Eigen::Index> lead{param};
  const CriterionEvaluation eu_lead = permute_leading(eu, lead);
  const TestBuilder test = [&](double value) {
    RestrictionSpec spec;
    spec.fixed[param] = value;
    const FitResult rf = fit_restricted(m, spec, unrestricted.point);
    const CriterionEvaluation er = m.evaluate(rf.point);
    if (m.info == InfoEstimator::Hessian) {
      return lrc_alpha_subvector(eu_lead, permute_leading(er, lead), 1, alpha);
    }
    return lrc_alpha(eu, er, Restriction::fixed_components(d, {param}, Vector::Constant(1, value)), alpha);
  };
  ParameterRange range{m.bounds.lower[param], m.bounds.upper[param]};
  return invert_to_interval(test, center, level, range);
}

}  // namespace lrca::cli

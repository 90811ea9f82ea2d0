#include "lrca/cli/cli.hpp"

#include "lrca/error.hpp"

namespace lrca::cli {

std::string describe(const std::string& model_id) {
  static const std::string restriction_syntax =
      "restrictions (--restrict):\n"
      "  name=value[,name=value...]   fix one or more parameters\n"
      "  c1*p1+c2*p2=v                 one linear restriction (coefficient 1 may be omitted)\n";
  if (model_id == "arch") {
    return "arch: Gaussian ARCH(p) quasi-likelihood, presample values zero\n"
           "parameters (p from --order, default 1):\n"
           "  omega      [1e-08, inf)\n"
           "  alpha1..p  [0, 0.9999]\n"
           "info: opg (default), centered-opg, hessian\n" +
           restriction_syntax +
           "data: CSV with a single column `x`, one observation per row\n";
  }
  if (model_id == "weibull") {
    return "weibull: Weibull regression, log-hazard x'beta + log eta + (eta - 1) log t\n"
           "parameters (k = 1 + number of covariates):\n"
           "  beta0      (-inf, inf)   alias: intercept\n"
           "  beta1..    (-inf, inf)   aliases: covariate column names\n"
           "  eta        eta > 0 (lower bound 1e-06); eta >= 1 with --monotone-hazard\n"
           "info: opg (default), centered-opg, hessian\n" +
           restriction_syntax +
           "data: CSV with column `time` (> 0) first, then numeric covariates; an intercept is added\n";
  }
  if (model_id == "error-components") {
    return "error-components: two-way random effects panel regression, Gaussian likelihood\n"
           "parameters (k = 1 + number of covariates):\n"
           "  beta0          (-inf, inf)   alias: intercept\n"
           "  beta1..        (-inf, inf)   aliases: covariate column names\n"
           "  sigma2_v       [1e-10, inf)\n"
           "  sigma2_eta     [0, inf)\n"
           "  sigma2_lambda  [0, inf)\n"
           "info: hessian (default), opg (clustered by individual), centered-opg\n" +
           restriction_syntax +
           "data: CSV with columns `id,t,y`, then covariates; balanced, sorted by id then t;\n"
           "      an intercept is added\n";
  }
  throw Error(ErrorKind::UnknownModel, "'" + model_id + "' (known: arch, weibull, error-components)");
}

}  // namespace lrca::cli
